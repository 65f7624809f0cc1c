//! Consistency of typing environments: derivability from a partial map by
//! the structural rules, decided by a bounded inverse search.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::types::{decrement, split, Attribute, Decrement, Subject, Type, TypeEnv};

/// One structural step, read from the partial map towards the environment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    /// tCon: replace `from` by the two halves.
    Split { from: Type, into: (Type, Type) },
    /// tWeak: drop the assumption.
    Weaken { ty: Type },
    /// tSub: raise `from` to a supertype.
    Sub { from: Type, to: Type },
    /// tRev: change the object list of a unique-now assumption.
    Rev { from: Type, to: Type },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub subject: Subject,
    pub mv: Move,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.subject;
        match &self.mv {
            Move::Split { from, into } => write!(f, "tCon {s}: {from} = {} o {}", into.0, into.1),
            Move::Weaken { ty } => write!(f, "tWeak {s}: {ty}"),
            Move::Sub { from, to } => write!(f, "tSub {s}: {from} <= {to}"),
            Move::Rev { from, to } => write!(f, "tRev {s}: {from} ~> {to}"),
        }
    }
}

/// A partial map and the steps that turn it into the checked environment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub origin: TypeEnv,
    pub steps: Vec<Step>,
}

impl Witness {
    /// Replays the steps from the origin.
    pub fn apply(&self) -> Option<TypeEnv> {
        apply_steps(&self.origin, &self.steps)
    }
}

/// Applies steps forwards, checking each side condition.
pub fn apply_steps(origin: &TypeEnv, steps: &[Step]) -> Option<TypeEnv> {
    let mut env = origin.clone();
    for Step { subject, mv } in steps {
        match mv {
            Move::Split { from, into } => {
                if !split(from).contains(into) || !env.remove_one(subject, from) {
                    return None;
                }
                env.insert(subject.clone(), into.0.clone());
                env.insert(subject.clone(), into.1.clone());
            }
            Move::Weaken { ty } => {
                if !env.remove_one(subject, ty) {
                    return None;
                }
            }
            Move::Sub { from, to } => {
                if !crate::types::subtype(from, to) || !env.remove_one(subject, from) {
                    return None;
                }
                env.insert(subject.clone(), to.clone());
            }
            Move::Rev { from, to } => {
                let ok = from.is_unique_now() && to.is_unique_now();
                if !ok || !env.remove_one(subject, from) {
                    return None;
                }
                env.insert(subject.clone(), to.clone());
            }
        }
    }
    Some(env)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("assumptions {assumptions} for `{subject}` are not derivable from a single assumption")]
pub struct Inconsistent {
    pub subject: Subject,
    pub assumptions: TypeEnv,
}

/// Decides consistency and returns a witness when it holds.
pub fn is_consistent(env: &TypeEnv) -> Result<Witness, Inconsistent> {
    let mut origin = Vec::new();
    let mut steps = Vec::new();
    for subject in env.subjects() {
        let types: Vec<Type> = env.types_of(&subject).cloned().collect();
        match search(&types, None) {
            Some((root, inverse)) => {
                origin.push((subject.clone(), root.expect("non-empty multiset")));
                steps.extend(forward(&subject, inverse));
            }
            None => {
                return Err(Inconsistent {
                    assumptions: env.only(&subject),
                    subject,
                })
            }
        }
    }
    Ok(Witness {
        origin: TypeEnv::from_entries(origin),
        steps,
    })
}

/// Searches for steps turning exactly `origin` into `env`.
pub fn derivable_from(env: &TypeEnv, origin: &TypeEnv) -> Option<Witness> {
    if !origin.is_partial_map() {
        return None;
    }
    let mut steps = Vec::new();
    let mut subjects: BTreeSet<Subject> = env.subjects().into_iter().collect();
    subjects.extend(origin.subjects());
    for subject in subjects {
        let types: Vec<Type> = env.types_of(&subject).cloned().collect();
        let target = origin.types_of(&subject).next().cloned();
        match (&target, types.is_empty()) {
            (None, true) => continue,
            (None, false) => return None,
            (Some(t), true) => steps.push(Step {
                subject: subject.clone(),
                mv: Move::Weaken { ty: t.clone() },
            }),
            (Some(_), false) => {
                let (_, inverse) = search(&types, target.as_ref())?;
                steps.extend(forward(&subject, inverse));
            }
        }
    }
    Some(Witness {
        origin: origin.clone(),
        steps,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Lemma1Error {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("counterexample: {decremented} is not derivable from {origin}")]
    Counterexample {
        origin: TypeEnv,
        decremented: TypeEnv,
    },
}

/// Checks that decrementing two assumptions on `u` keeps the environment
/// derivable from the same partial map as before.
pub fn lemma1_check(
    env: &TypeEnv,
    u: &Subject,
    objects: &[Type],
    a1: Attribute,
    a2: Attribute,
) -> Result<Witness, Lemma1Error> {
    let t1 = Type::chan(objects.to_vec(), a1);
    let t2 = Type::chan(objects.to_vec(), a2);
    let full = env.with(u.clone(), t1.clone()).with(u.clone(), t2.clone());
    let before = is_consistent(&full).map_err(|e| Lemma1Error::Precondition(e.to_string()))?;
    let mut after = env.clone();
    for t in [&t1, &t2] {
        match decrement(t) {
            Decrement::Type(d) => after.insert(u.clone(), d),
            Decrement::Consumed => {}
            Decrement::Undefined => {
                return Err(Lemma1Error::Precondition(format!(
                    "decrement of {t} is undefined"
                )))
            }
        }
    }
    derivable_from(&after, &before.origin).ok_or(Lemma1Error::Counterexample {
        origin: before.origin,
        decremented: after,
    })
}

/// Inverse steps, each taking a multiset one step closer to its origin.
#[derive(Clone, Debug)]
enum Inverse {
    Merge(Type, Type, Type),
    Lower(Type, Type),
    Insert(Type),
    Unrevise(Type, Type),
}

fn forward(subject: &Subject, inverse: Vec<Inverse>) -> Vec<Step> {
    inverse
        .into_iter()
        .rev()
        .map(|inv| Step {
            subject: subject.clone(),
            mv: match inv {
                Inverse::Merge(a, b, t) => Move::Split {
                    from: t,
                    into: (a, b),
                },
                Inverse::Lower(from, to) => Move::Sub { from: to, to: from },
                Inverse::Insert(ty) => Move::Weaken { ty },
                Inverse::Unrevise(from, to) => Move::Rev { from: to, to: from },
            },
        })
        .collect()
}

fn merge(a: &Type, b: &Type) -> Option<Type> {
    match (a, b) {
        (Type::Proc, Type::Proc) => Some(Type::Proc),
        (Type::Chan(s1, x), Type::Chan(s2, y)) if s1 == s2 => {
            let parent = match (x, y) {
                (Attribute::Unrestricted, Attribute::Unrestricted) => Attribute::Unrestricted,
                (Attribute::Affine, Attribute::Unique(i)) | (Attribute::Unique(i), Attribute::Affine)
                    if *i > 0 =>
                {
                    Attribute::Unique(i - 1)
                }
                _ => return None,
            };
            Some(Type::Chan(s1.clone(), parent))
        }
        _ => None,
    }
}

/// States no inverse step can bring back to a singleton: nothing merges
/// with `unq(0)`, two unique assumptions never merge, an unrestricted one
/// only merges with another unrestricted one, and object lists only change
/// at `unq(0)`.
fn dead(s: &[Type]) -> bool {
    if s.len() < 2 {
        return false;
    }
    let (mut unq, mut unr, mut procs) = (0, 0, 0);
    for t in s {
        match t {
            Type::Proc => procs += 1,
            Type::Chan(_, Attribute::Unique(0)) => return true,
            Type::Chan(_, Attribute::Unique(_)) => unq += 1,
            Type::Chan(_, Attribute::Unrestricted) => unr += 1,
            Type::Chan(_, Attribute::Affine) => {}
        }
    }
    let lists_differ = s.windows(2).any(|w| w[0].objects() != w[1].objects());
    (procs > 0 && procs < s.len()) || lists_differ || unq >= 2 || (unq >= 1 && unr >= 1)
}

/// Bounded breadth-first search from the multiset `start` towards a
/// singleton (or towards exactly `target`). Returns the origin type and the
/// inverse steps in search order.
fn search(start: &[Type], target: Option<&Type>) -> Option<(Option<Type>, Vec<Inverse>)> {
    let mut start: Vec<Type> = start.to_vec();
    start.sort();
    let max_index = start
        .iter()
        .chain(target)
        .map(Type::max_unique_index)
        .max()
        .unwrap_or(0);
    // One more step in exact mode, for a final revision.
    let bound = start.len() + max_index as usize + 1 + usize::from(target.is_some());
    let index_limit = start.len() as u32 + max_index;

    let goal = |s: &[Type]| match target {
        Some(t) => s.len() == 1 && s[0] == *t,
        None => s.len() == 1,
    };

    let mut lists: BTreeSet<Vec<Type>> = start
        .iter()
        .chain(target)
        .filter_map(|t| t.objects().map(<[Type]>::to_vec))
        .collect();
    if lists.is_empty() {
        lists.insert(Vec::new());
    }

    let mut parent: HashMap<Vec<Type>, (Vec<Type>, Inverse)> = HashMap::new();
    let mut depth: HashMap<Vec<Type>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(state) = queue.pop_front() {
        if goal(&state) {
            let mut path = Vec::new();
            let mut cur = state.clone();
            while let Some((prev, inv)) = parent.get(&cur) {
                path.push(inv.clone());
                cur = prev.clone();
            }
            path.reverse();
            return Some((Some(state[0].clone()), path));
        }
        let d = depth[&state];
        if d >= bound {
            continue;
        }
        let remaining = bound - d - 1;
        let mut push = |next: Vec<Type>, inv: Inverse| {
            // Each step shrinks the multiset by at most one.
            if next.len() > remaining + 1 || depth.contains_key(&next) || dead(&next) {
                return;
            }
            depth.insert(next.clone(), d + 1);
            parent.insert(next.clone(), (state.clone(), inv));
            queue.push_back(next);
        };
        let n = state.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if let Some(t) = merge(&state[i], &state[j]) {
                    let mut next: Vec<Type> = state
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != i && *k != j)
                        .map(|(_, t)| t.clone())
                        .collect();
                    next.push(t.clone());
                    next.sort();
                    push(next, Inverse::Merge(state[i].clone(), state[j].clone(), t));
                }
            }
        }
        for i in 0..n {
            if i > 0 && state[i] == state[i - 1] {
                continue;
            }
            let Type::Chan(objs, a) = &state[i] else {
                continue;
            };
            // A single tSub may use any pair of the subtype closure.
            // An affine leaf lowered to a unique one is never needed: the
            // unrestricted route or an inserted unique covers it.
            let lowered: Vec<Attribute> = match a {
                Attribute::Affine => vec![Attribute::Unrestricted, Attribute::Unique(0)],
                Attribute::Unrestricted => (0..=index_limit).map(Attribute::Unique).collect(),
                Attribute::Unique(k) => (0..*k).map(Attribute::Unique).collect(),
            };
            let replace = |t: Type| {
                let mut next = state.clone();
                next[i] = t;
                next.sort();
                next
            };
            for b in lowered {
                let t = Type::Chan(objs.clone(), b);
                push(replace(t.clone()), Inverse::Lower(state[i].clone(), t));
            }
            if *a == Attribute::Unique(0) {
                for s in &lists {
                    if s != objs {
                        let t = Type::Chan(s.clone(), Attribute::Unique(0));
                        push(replace(t.clone()), Inverse::Unrevise(state[i].clone(), t));
                    }
                }
            }
        }
        // Re-inserting a weakened assumption only helps when it can merge
        // with an affine assumption already present.
        let affine_lists: BTreeSet<&[Type]> = state
            .iter()
            .filter(|t| t.attr() == Some(Attribute::Affine))
            .filter_map(Type::objects)
            .collect();
        for s in affine_lists {
            for k in 1..=index_limit {
                let t = Type::Chan(s.to_vec(), Attribute::Unique(k));
                let mut next = state.clone();
                next.push(t.clone());
                next.sort();
                push(next, Inverse::Insert(t));
            }
        }
    }
    None
}
