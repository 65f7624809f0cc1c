//! Channel types, attributes and typing environments.

use std::fmt;

use crate::syntax::{Ident, ProcVar};

/// Usage attribute of a channel type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attribute {
    Affine,
    Unrestricted,
    /// Unique after the given number of uses; `Unique(0)` is unique now.
    Unique(u32),
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attribute::Affine => f.write_str("aff"),
            Attribute::Unrestricted => f.write_str("unr"),
            Attribute::Unique(i) => write!(f, "unq({i})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Chan(Vec<Type>, Attribute),
    Proc,
}

impl Type {
    pub fn chan(objects: Vec<Type>, attr: Attribute) -> Self {
        Type::Chan(objects, attr)
    }

    pub fn attr(&self) -> Option<Attribute> {
        match self {
            Type::Chan(_, a) => Some(*a),
            Type::Proc => None,
        }
    }

    pub fn objects(&self) -> Option<&[Type]> {
        match self {
            Type::Chan(o, _) => Some(o),
            Type::Proc => None,
        }
    }

    pub fn with_attr(&self, attr: Attribute) -> Type {
        match self {
            Type::Chan(o, _) => Type::Chan(o.clone(), attr),
            Type::Proc => Type::Proc,
        }
    }

    pub fn is_unique_now(&self) -> bool {
        matches!(self, Type::Chan(_, Attribute::Unique(0)))
    }

    /// Largest unique index occurring anywhere in the type.
    pub fn max_unique_index(&self) -> u32 {
        match self {
            Type::Proc => 0,
            Type::Chan(objs, a) => {
                let own = match a {
                    Attribute::Unique(i) => *i,
                    _ => 0,
                };
                objs.iter().map(Type::max_unique_index).fold(own, u32::max)
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Proc => f.write_str("proc"),
            Type::Chan(objs, a) => {
                f.write_str("ch(")?;
                for (i, t) in objs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")@{a}")
            }
        }
    }
}

/// Outcome of the usage decrement `a - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decrement {
    /// The assumption survives with this type.
    Type(Type),
    /// Affine assumption used up; it disappears from the environment.
    Consumed,
    /// No clause applies (`unq(0)` or `proc`).
    Undefined,
}

pub fn decrement(t: &Type) -> Decrement {
    match t {
        Type::Chan(_, Attribute::Affine) => Decrement::Consumed,
        Type::Chan(_, Attribute::Unrestricted) => Decrement::Type(t.clone()),
        Type::Chan(o, Attribute::Unique(i)) if *i > 0 => {
            Decrement::Type(Type::Chan(o.clone(), Attribute::Unique(i - 1)))
        }
        _ => Decrement::Undefined,
    }
}

/// All decompositions `t = t1 ∘ t2`.
pub fn split(t: &Type) -> Vec<(Type, Type)> {
    match t {
        Type::Proc => vec![(Type::Proc, Type::Proc)],
        Type::Chan(_, Attribute::Unrestricted) => vec![(t.clone(), t.clone())],
        Type::Chan(o, Attribute::Unique(i)) => {
            let aff = Type::Chan(o.clone(), Attribute::Affine);
            let next = Type::Chan(o.clone(), Attribute::Unique(i + 1));
            vec![(aff.clone(), next.clone()), (next, aff)]
        }
        Type::Chan(_, Attribute::Affine) => Vec::new(),
    }
}

/// Whether `t = t1 ∘ t2` holds.
pub fn is_split(t: &Type, t1: &Type, t2: &Type) -> bool {
    split(t).iter().any(|(a, b)| a == t1 && b == t2)
}

/// Reflexive-transitive attribute order: `unq(i) <= unq(i+1) <= unr <= aff`.
pub fn attr_le(a: Attribute, b: Attribute) -> bool {
    use Attribute::*;
    match (a, b) {
        (Unique(i), Unique(j)) => i <= j,
        (Unique(_), Unrestricted | Affine) => true,
        (Unrestricted, Unrestricted | Affine) => true,
        (Affine, Affine) => true,
        _ => false,
    }
}

/// Subtyping; invariant in object types.
pub fn subtype(t1: &Type, t2: &Type) -> bool {
    match (t1, t2) {
        (Type::Proc, Type::Proc) => true,
        (Type::Chan(o1, a1), Type::Chan(o2, a2)) => o1 == o2 && attr_le(*a1, *a2),
        _ => false,
    }
}

/// The subject of an assumption: an identifier or a process variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    Id(Ident),
    PVar(ProcVar),
}

impl Subject {
    pub fn text(&self) -> &str {
        match self {
            Subject::Id(u) => u.text(),
            Subject::PVar(x) => x.as_str(),
        }
    }
}

impl From<Ident> for Subject {
    fn from(u: Ident) -> Self {
        Subject::Id(u)
    }
}

impl From<ProcVar> for Subject {
    fn from(x: ProcVar) -> Self {
        Subject::PVar(x)
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

/// A multiset of typing assumptions. Kept sorted so that equality is
/// multiset equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeEnv {
    entries: Vec<(Subject, Type)>,
}

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Subject, Type)>) -> Self {
        let mut entries: Vec<_> = entries.into_iter().collect();
        entries.sort();
        TypeEnv { entries }
    }

    pub fn entries(&self) -> &[(Subject, Type)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, s: Subject, t: Type) {
        let item = (s, t);
        let pos = self.entries.partition_point(|e| *e < item);
        self.entries.insert(pos, item);
    }

    pub fn with(&self, s: Subject, t: Type) -> Self {
        let mut e = self.clone();
        e.insert(s, t);
        e
    }

    /// Removes one copy of the assumption; false when absent.
    pub fn remove_one(&mut self, s: &Subject, t: &Type) -> bool {
        match self.entries.iter().position(|(a, b)| a == s && b == t) {
            Some(i) => {
                self.entries.remove(i);
                true
            }
            None => false,
        }
    }

    pub fn without(&self, s: &Subject, t: &Type) -> Option<Self> {
        let mut e = self.clone();
        e.remove_one(s, t).then_some(e)
    }

    pub fn types_of<'a>(&'a self, s: &'a Subject) -> impl Iterator<Item = &'a Type> + 'a {
        self.entries.iter().filter(move |(a, _)| a == s).map(|(_, t)| t)
    }

    pub fn contains_subject(&self, s: &Subject) -> bool {
        self.entries.iter().any(|(a, _)| a == s)
    }

    pub fn subjects(&self) -> Vec<Subject> {
        let mut v: Vec<Subject> = self.entries.iter().map(|(s, _)| s.clone()).collect();
        v.dedup();
        v
    }

    /// At most one assumption per subject.
    pub fn is_partial_map(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].0 != w[1].0)
    }

    /// Multiset union.
    pub fn union(&self, other: &TypeEnv) -> TypeEnv {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        TypeEnv::from_entries(entries)
    }

    /// Multiset difference `self - other`, ignoring elements of `other`
    /// that are absent from `self`.
    pub fn minus(&self, other: &TypeEnv) -> TypeEnv {
        let mut e = self.clone();
        for (s, t) in &other.entries {
            e.remove_one(s, t);
        }
        e
    }

    /// Restriction to the given subject.
    pub fn only(&self, s: &Subject) -> TypeEnv {
        TypeEnv {
            entries: self.entries.iter().filter(|(a, _)| a == s).cloned().collect(),
        }
    }

    pub fn max_unique_index(&self) -> u32 {
        self.entries
            .iter()
            .map(|(_, t)| t.max_unique_index())
            .max()
            .unwrap_or(0)
    }
}

impl FromIterator<(Subject, Type)> for TypeEnv {
    fn from_iter<I: IntoIterator<Item = (Subject, Type)>>(iter: I) -> Self {
        TypeEnv::from_entries(iter)
    }
}

impl fmt::Display for TypeEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (s, t)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}: {t}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Attribute::*;

    fn ch(a: Attribute) -> Type {
        Type::chan(vec![], a)
    }

    #[test]
    fn decrement_cases() {
        assert_eq!(decrement(&ch(Affine)), Decrement::Consumed);
        assert_eq!(decrement(&ch(Unique(1))), Decrement::Type(ch(Unique(0))));
        assert_eq!(decrement(&ch(Unique(0))), Decrement::Undefined);
        assert_eq!(decrement(&ch(Unrestricted)), Decrement::Type(ch(Unrestricted)));
        assert_eq!(decrement(&Type::Proc), Decrement::Undefined);
    }

    #[test]
    fn split_cases() {
        assert_eq!(
            split(&ch(Unique(0))),
            vec![(ch(Affine), ch(Unique(1))), (ch(Unique(1)), ch(Affine))]
        );
        let t = Type::chan(vec![ch(Affine)], Unrestricted);
        assert_eq!(split(&t), vec![(t.clone(), t.clone())]);
        assert!(split(&ch(Affine)).is_empty());
        assert_eq!(split(&Type::Proc), vec![(Type::Proc, Type::Proc)]);
        assert!(!is_split(&ch(Unique(0)), &ch(Affine), &ch(Unique(0))));
    }

    #[test]
    fn subtype_cases() {
        assert!(subtype(&ch(Unique(0)), &ch(Unrestricted)));
        assert!(subtype(&ch(Unrestricted), &ch(Affine)));
        assert!(!subtype(&ch(Affine), &ch(Unrestricted)));
        assert!(!subtype(&ch(Unique(2)), &ch(Unique(1))));
        assert!(!subtype(&Type::chan(vec![ch(Affine)], Unrestricted), &ch(Unrestricted)));
        assert!(subtype(&Type::Proc, &Type::Proc));
        assert!(!subtype(&Type::Proc, &ch(Affine)));
    }

    #[test]
    fn env_is_a_multiset() {
        let u = Subject::Id(Ident::name("u"));
        let a = TypeEnv::from_entries(vec![(u.clone(), ch(Affine)), (u.clone(), ch(Unique(1)))]);
        let b = TypeEnv::from_entries(vec![(u.clone(), ch(Unique(1))), (u.clone(), ch(Affine))]);
        assert_eq!(a, b);
        assert!(!a.is_partial_map());
        assert!(a.only(&u).len() == 2);
        let mut c = a.clone();
        assert!(c.remove_one(&u, &ch(Affine)));
        assert!(!c.remove_one(&u, &ch(Affine)));
        assert!(c.is_partial_map());
        assert_eq!(a.minus(&c).len(), 1);
    }

    #[test]
    fn display_forms() {
        assert_eq!(Unique(0).to_string(), "unq(0)");
        let t = Type::chan(vec![ch(Affine), Type::Proc], Unique(3));
        assert_eq!(t.to_string(), "ch(ch()@aff, proc)@unq(3)");
    }
}
