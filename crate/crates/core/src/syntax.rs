//! Abstract syntax of processes and configurations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A runtime channel name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(transparent)]
pub struct Name(pub String);

/// A term variable, bound by input or allocation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub String);

/// A process variable, bound by recursion.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProcVar(pub String);

impl Name {
    pub fn new(s: impl Into<String>) -> Self {
        Name(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Var {
    pub fn new(s: impl Into<String>) -> Self {
        Var(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl ProcVar {
    pub fn new(s: impl Into<String>) -> Self {
        ProcVar(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Either a channel name or a variable. Names and variables live in
/// disjoint namespaces even when their text coincides.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ident {
    Name(Name),
    Var(Var),
}

impl Ident {
    pub fn name(s: impl Into<String>) -> Self {
        Ident::Name(Name::new(s))
    }

    pub fn var(s: impl Into<String>) -> Self {
        Ident::Var(Var::new(s))
    }

    pub fn text(&self) -> &str {
        match self {
            Ident::Name(n) => n.as_str(),
            Ident::Var(v) => v.as_str(),
        }
    }

    pub fn as_name(&self) -> Option<&Name> {
        match self {
            Ident::Name(n) => Some(n),
            Ident::Var(_) => None,
        }
    }
}

impl From<Name> for Ident {
    fn from(n: Name) -> Self {
        Ident::Name(n)
    }
}

impl From<Var> for Ident {
    fn from(v: Var) -> Self {
        Ident::Var(v)
    }
}

/// State of a channel: allocated (`alloc`) or deallocated (`dealloc`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum ChannelState {
    Allocated,
    Deallocated,
}

impl ChannelState {
    pub fn keyword(self) -> &'static str {
        match self {
            ChannelState::Allocated => "alloc",
            ChannelState::Deallocated => "dealloc",
        }
    }
}

impl fmt::Display for ChannelState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Process {
    Output {
        subject: Ident,
        objects: Vec<Ident>,
        cont: Box<Process>,
    },
    Input {
        subject: Ident,
        params: Vec<Var>,
        cont: Box<Process>,
    },
    Nil,
    Match {
        left: Ident,
        right: Ident,
        then: Box<Process>,
        otherwise: Box<Process>,
    },
    Rec {
        binder: ProcVar,
        body: Box<Process>,
    },
    PVar(ProcVar),
    Par(Box<Process>, Box<Process>),
    Scope {
        name: Name,
        state: ChannelState,
        body: Box<Process>,
    },
    Alloc {
        binder: Var,
        body: Box<Process>,
    },
    Free {
        subject: Ident,
        cont: Box<Process>,
    },
}

impl Process {
    pub fn output(subject: Ident, objects: Vec<Ident>, cont: Process) -> Self {
        Process::Output {
            subject,
            objects,
            cont: Box::new(cont),
        }
    }

    pub fn input(subject: Ident, params: Vec<Var>, cont: Process) -> Self {
        Process::Input {
            subject,
            params,
            cont: Box::new(cont),
        }
    }

    pub fn matching(left: Ident, right: Ident, then: Process, otherwise: Process) -> Self {
        Process::Match {
            left,
            right,
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        }
    }

    pub fn rec(binder: ProcVar, body: Process) -> Self {
        Process::Rec {
            binder,
            body: Box::new(body),
        }
    }

    pub fn par(left: Process, right: Process) -> Self {
        Process::Par(Box::new(left), Box::new(right))
    }

    pub fn scope(name: Name, state: ChannelState, body: Process) -> Self {
        Process::Scope {
            name,
            state,
            body: Box::new(body),
        }
    }

    pub fn alloc(binder: Var, body: Process) -> Self {
        Process::Alloc {
            binder,
            body: Box::new(body),
        }
    }

    pub fn free(subject: Ident, cont: Process) -> Self {
        Process::Free {
            subject,
            cont: Box::new(cont),
        }
    }

    /// Right-nested parallel composition of `parts`; `Nil` when empty.
    pub fn par_all(parts: Vec<Process>) -> Self {
        let mut it = parts.into_iter().rev();
        match it.next() {
            None => Process::Nil,
            Some(last) => it.fold(last, |acc, p| Process::par(p, acc)),
        }
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Process::Nil)
    }

    /// Free names and variables.
    pub fn free_idents(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        collect_free_idents(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        self.free_idents()
            .into_iter()
            .filter_map(|i| match i {
                Ident::Name(n) => Some(n),
                Ident::Var(_) => None,
            })
            .collect()
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        self.free_idents()
            .into_iter()
            .filter_map(|i| match i {
                Ident::Var(v) => Some(v),
                Ident::Name(_) => None,
            })
            .collect()
    }

    pub fn free_procvars(&self) -> BTreeSet<ProcVar> {
        let mut out = BTreeSet::new();
        collect_free_procvars(self, &mut Vec::new(), &mut out);
        out
    }

    /// Every identifier or process-variable text occurring anywhere in the
    /// term, bound or free. Used to pick fresh names.
    pub fn all_texts(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_texts(self, &mut out);
        out
    }

    /// Every channel name occurring anywhere in the term, bound or free.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        collect_names(self, &mut out);
        out
    }

    /// Number of prefixes (output, input, match, alloc, free) in the term.
    pub fn prefix_count(&self) -> usize {
        match self {
            Process::Output { cont, .. }
            | Process::Input { cont, .. }
            | Process::Free { cont, .. } => 1 + cont.prefix_count(),
            Process::Alloc { body, .. } => 1 + body.prefix_count(),
            Process::Match {
                then, otherwise, ..
            } => 1 + then.prefix_count() + otherwise.prefix_count(),
            Process::Nil | Process::PVar(_) => 0,
            Process::Rec { body, .. } | Process::Scope { body, .. } => body.prefix_count(),
            Process::Par(l, r) => l.prefix_count() + r.prefix_count(),
        }
    }
}

fn collect_free_idents(p: &Process, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
    let note = |u: &Ident, bound: &Vec<Ident>, out: &mut BTreeSet<Ident>| {
        if !bound.contains(u) {
            out.insert(u.clone());
        }
    };
    match p {
        Process::Output {
            subject,
            objects,
            cont,
        } => {
            note(subject, bound, out);
            for o in objects {
                note(o, bound, out);
            }
            collect_free_idents(cont, bound, out);
        }
        Process::Input {
            subject,
            params,
            cont,
        } => {
            note(subject, bound, out);
            let n = bound.len();
            bound.extend(params.iter().cloned().map(Ident::Var));
            collect_free_idents(cont, bound, out);
            bound.truncate(n);
        }
        Process::Nil | Process::PVar(_) => {}
        Process::Match {
            left,
            right,
            then,
            otherwise,
        } => {
            note(left, bound, out);
            note(right, bound, out);
            collect_free_idents(then, bound, out);
            collect_free_idents(otherwise, bound, out);
        }
        Process::Rec { body, .. } => collect_free_idents(body, bound, out),
        Process::Par(l, r) => {
            collect_free_idents(l, bound, out);
            collect_free_idents(r, bound, out);
        }
        Process::Scope { name, body, .. } => {
            bound.push(Ident::Name(name.clone()));
            collect_free_idents(body, bound, out);
            bound.pop();
        }
        Process::Alloc { binder, body } => {
            bound.push(Ident::Var(binder.clone()));
            collect_free_idents(body, bound, out);
            bound.pop();
        }
        Process::Free { subject, cont } => {
            note(subject, bound, out);
            collect_free_idents(cont, bound, out);
        }
    }
}

fn collect_free_procvars(p: &Process, bound: &mut Vec<ProcVar>, out: &mut BTreeSet<ProcVar>) {
    match p {
        Process::PVar(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Process::Rec { binder, body } => {
            bound.push(binder.clone());
            collect_free_procvars(body, bound, out);
            bound.pop();
        }
        Process::Nil => {}
        Process::Output { cont, .. } | Process::Input { cont, .. } | Process::Free { cont, .. } => {
            collect_free_procvars(cont, bound, out)
        }
        Process::Scope { body, .. } | Process::Alloc { body, .. } => {
            collect_free_procvars(body, bound, out)
        }
        Process::Match {
            then, otherwise, ..
        } => {
            collect_free_procvars(then, bound, out);
            collect_free_procvars(otherwise, bound, out);
        }
        Process::Par(l, r) => {
            collect_free_procvars(l, bound, out);
            collect_free_procvars(r, bound, out);
        }
    }
}

fn collect_texts(p: &Process, out: &mut BTreeSet<String>) {
    match p {
        Process::Output {
            subject,
            objects,
            cont,
        } => {
            out.insert(subject.text().to_string());
            out.extend(objects.iter().map(|o| o.text().to_string()));
            collect_texts(cont, out);
        }
        Process::Input {
            subject,
            params,
            cont,
        } => {
            out.insert(subject.text().to_string());
            out.extend(params.iter().map(|x| x.0.clone()));
            collect_texts(cont, out);
        }
        Process::Nil => {}
        Process::PVar(x) => {
            out.insert(x.0.clone());
        }
        Process::Match {
            left,
            right,
            then,
            otherwise,
        } => {
            out.insert(left.text().to_string());
            out.insert(right.text().to_string());
            collect_texts(then, out);
            collect_texts(otherwise, out);
        }
        Process::Rec { binder, body } => {
            out.insert(binder.0.clone());
            collect_texts(body, out);
        }
        Process::Par(l, r) => {
            collect_texts(l, out);
            collect_texts(r, out);
        }
        Process::Scope { name, body, .. } => {
            out.insert(name.0.clone());
            collect_texts(body, out);
        }
        Process::Alloc { binder, body } => {
            out.insert(binder.0.clone());
            collect_texts(body, out);
        }
        Process::Free { subject, cont } => {
            out.insert(subject.text().to_string());
            collect_texts(cont, out);
        }
    }
}

fn collect_names(p: &Process, out: &mut BTreeSet<Name>) {
    let note = |u: &Ident, out: &mut BTreeSet<Name>| {
        if let Ident::Name(n) = u {
            out.insert(n.clone());
        }
    };
    match p {
        Process::Output {
            subject,
            objects,
            cont,
        } => {
            note(subject, out);
            for o in objects {
                note(o, out);
            }
            collect_names(cont, out);
        }
        Process::Input { subject, cont, .. } | Process::Free { subject, cont } => {
            note(subject, out);
            collect_names(cont, out);
        }
        Process::Nil | Process::PVar(_) => {}
        Process::Match {
            left,
            right,
            then,
            otherwise,
        } => {
            note(left, out);
            note(right, out);
            collect_names(then, out);
            collect_names(otherwise, out);
        }
        Process::Rec { body, .. } | Process::Alloc { body, .. } => collect_names(body, out),
        Process::Par(l, r) => {
            collect_names(l, out);
            collect_names(r, out);
        }
        Process::Scope { name, body, .. } => {
            out.insert(name.clone());
            collect_names(body, out);
        }
    }
}

/// Picks `base` stripped of its numeric suffix, followed by the smallest
/// number that makes the text unused.
pub fn fresh_text(base: &str, used: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "n" } else { stem };
    (0u64..)
        .map(|i| format!("{stem}{i}"))
        .find(|cand| !used.contains(cand))
        .expect("unbounded counter")
}

pub type Store = BTreeMap<Name, ChannelState>;

/// A channel store paired with a process.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub store: Store,
    pub process: Process,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("free name `{0}` is not in the store")]
    NameNotInStore(String),
    #[error("configuration is not closed: free variable `{0}`")]
    FreeVar(String),
    #[error("configuration is not closed: free process variable `{0}`")]
    FreeProcVar(String),
}

impl Configuration {
    /// Builds a configuration, checking that every free name is in the store.
    pub fn new(store: Store, process: Process) -> Result<Self, ConfigError> {
        if let Some(n) = process.free_names().into_iter().find(|n| !store.contains_key(n)) {
            return Err(ConfigError::NameNotInStore(n.0));
        }
        Ok(Configuration { store, process })
    }

    /// A configuration whose store allocates every free name of `process`.
    pub fn allocating(process: Process) -> Self {
        let store = process
            .free_names()
            .into_iter()
            .map(|n| (n, ChannelState::Allocated))
            .collect();
        Configuration { store, process }
    }

    pub fn is_closed(&self) -> bool {
        self.process.free_vars().is_empty() && self.process.free_procvars().is_empty()
    }

    pub fn ensure_closed(&self) -> Result<(), ConfigError> {
        if let Some(v) = self.process.free_vars().into_iter().next() {
            return Err(ConfigError::FreeVar(v.0));
        }
        if let Some(x) = self.process.free_procvars().into_iter().next() {
            return Err(ConfigError::FreeProcVar(x.0));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Ident {
        Ident::name(s)
    }

    #[test]
    fn free_sets_follow_binders() {
        // c?(x). new d:alloc. x!(d, e).X
        let p = Process::input(
            n("c"),
            vec![Var::new("x")],
            Process::scope(
                Name::new("d"),
                ChannelState::Allocated,
                Process::output(
                    Ident::var("x"),
                    vec![n("d"), n("e")],
                    Process::PVar(ProcVar::new("X")),
                ),
            ),
        );
        let names: Vec<_> = p.free_names().into_iter().map(|n| n.0).collect();
        assert_eq!(names, vec!["c", "e"]);
        assert!(p.free_vars().is_empty());
        assert_eq!(p.free_procvars().len(), 1);
        let closed = Process::rec(ProcVar::new("X"), p.clone());
        assert!(closed.free_procvars().is_empty());
    }

    #[test]
    fn fresh_text_uses_smallest_suffix() {
        let used: BTreeSet<String> = ["c0", "c1", "d"].iter().map(|s| s.to_string()).collect();
        assert_eq!(fresh_text("c", &used), "c2");
        assert_eq!(fresh_text("d", &used), "d0");
        assert_eq!(fresh_text("c7", &used), "c2");
    }

    #[test]
    fn configuration_requires_store_coverage() {
        let p = Process::output(n("c"), vec![], Process::Nil);
        assert!(Configuration::new(Store::new(), p.clone()).is_err());
        let c = Configuration::allocating(p);
        assert_eq!(c.store.len(), 1);
        assert!(c.is_closed());
    }
}
