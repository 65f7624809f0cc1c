//! Alpha-equivalence and canonical representatives of structural congruence.
//!
//! The implemented congruence is generated by commutativity, associativity
//! and the `nil` unit of parallel composition, alpha-conversion, reordering
//! of scopes and scope extrusion `(new c P) | Q == new c (P | Q)` for
//! `c` not free in `Q`. The garbage law `P == new c P` is not included.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use crate::subst::rename_name;
use crate::syntax::{fresh_text, ChannelState, Ident, Name, ProcVar, Process};

/// A string that is equal for two processes iff they are alpha-equivalent.
pub fn alpha_key(p: &Process) -> String {
    let mut k = Keyer::default();
    k.process(p);
    k.out
}

pub fn alpha_eq(p: &Process, q: &Process) -> bool {
    alpha_key(p) == alpha_key(q)
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Binder {
    Id(Ident),
    Pv(ProcVar),
}

#[derive(Default)]
struct Keyer<'a> {
    out: String,
    bound: Vec<Binder>,
    labels: Option<&'a Labels>,
}

impl Keyer<'_> {
    fn ident(&mut self, u: &Ident) {
        let b = Binder::Id(u.clone());
        if let Some(pos) = self.bound.iter().rposition(|x| *x == b) {
            let _ = write!(self.out, "#{}", self.bound.len() - 1 - pos);
            return;
        }
        if let Some(s) = self.labels.and_then(|l| l.get(&b)) {
            self.out.push_str(s);
            return;
        }
        match u {
            Ident::Name(n) => {
                let _ = write!(self.out, "n:{}", n.0);
            }
            Ident::Var(v) => {
                let _ = write!(self.out, "v:{}", v.0);
            }
        }
    }

    fn idents(&mut self, us: &[Ident]) {
        self.out.push('(');
        for (i, u) in us.iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            self.ident(u);
        }
        self.out.push(')');
    }

    fn with<F: FnOnce(&mut Self)>(&mut self, binders: Vec<Binder>, f: F) {
        let n = self.bound.len();
        self.bound.extend(binders);
        f(self);
        self.bound.truncate(n);
    }

    fn process(&mut self, p: &Process) {
        match p {
            Process::Output {
                subject,
                objects,
                cont,
            } => {
                self.out.push_str("O[");
                self.ident(subject);
                self.idents(objects);
                self.out.push_str("].");
                self.process(cont);
            }
            Process::Input {
                subject,
                params,
                cont,
            } => {
                self.out.push_str("I[");
                self.ident(subject);
                let _ = write!(self.out, "/{}].", params.len());
                let bs = params.iter().cloned().map(|x| Binder::Id(Ident::Var(x))).collect();
                self.with(bs, |k| k.process(cont));
            }
            Process::Nil => self.out.push('0'),
            Process::Match {
                left,
                right,
                then,
                otherwise,
            } => {
                self.out.push_str("M[");
                self.ident(left);
                self.out.push('=');
                self.ident(right);
                self.out.push_str("](");
                self.process(then);
                self.out.push(';');
                self.process(otherwise);
                self.out.push(')');
            }
            Process::Rec { binder, body } => {
                self.out.push_str("R.");
                self.with(vec![Binder::Pv(binder.clone())], |k| k.process(body));
            }
            Process::PVar(x) => {
                let b = Binder::Pv(x.clone());
                match self.bound.iter().rposition(|y| *y == b) {
                    Some(pos) => {
                        let _ = write!(self.out, "X#{}", self.bound.len() - 1 - pos);
                    }
                    None => match self.labels.and_then(|l| l.get(&b)) {
                        Some(s) => {
                            let _ = write!(self.out, "X{s}");
                        }
                        None => {
                            let _ = write!(self.out, "X:{}", x.0);
                        }
                    },
                }
            }
            Process::Par(l, r) => {
                self.out.push('(');
                self.process(l);
                self.out.push('|');
                self.process(r);
                self.out.push(')');
            }
            Process::Scope { name, state, body } => {
                let _ = write!(
                    self.out,
                    "N{}.",
                    if *state == ChannelState::Allocated { "+" } else { "-" }
                );
                self.with(vec![Binder::Id(Ident::Name(name.clone()))], |k| {
                    k.process(body)
                });
            }
            Process::Alloc { binder, body } => {
                self.out.push_str("A.");
                self.with(vec![Binder::Id(Ident::Var(binder.clone()))], |k| {
                    k.process(body)
                });
            }
            Process::Free { subject, cont } => {
                self.out.push_str("F[");
                self.ident(subject);
                self.out.push_str("].");
                self.process(cont);
            }
        }
    }
}

fn key_labeled(p: &Process, labels: &Labels) -> String {
    let mut k = Keyer {
        labels: Some(labels),
        ..Keyer::default()
    };
    k.process(p);
    k.out
}

/// Labels for identifiers bound outside the term being keyed; keeps sort
/// keys independent of binder spelling.
type Labels = HashMap<Binder, String>;
type Scopes = Vec<(Name, ChannelState)>;

/// Upper bound on binder orderings tried when several scoped names are
/// indistinguishable by their local signature.
const MAX_ORDERINGS: usize = 720;

/// A process in top-level normal form: scoped names followed by the prime
/// (non-parallel, non-scope, non-nil) components running in parallel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flattened {
    pub scopes: Vec<(Name, ChannelState)>,
    pub components: Vec<Process>,
}

impl Flattened {
    pub fn into_process(self) -> Process {
        let body = Process::par_all(self.components);
        self.scopes
            .into_iter()
            .rev()
            .fold(body, |acc, (n, s)| Process::scope(n, s, acc))
    }
}

/// Canonical representative of the congruence class of `p`.
pub fn canonical_form(p: &Process) -> Process {
    canonical_flat(p).into_process()
}

/// Canonical form split into its scope prefix and sorted components.
pub fn canonical_flat(p: &Process) -> Flattened {
    canon_level(p, &Labels::new(), 0)
}

fn canon_any(p: &Process, labels: &Labels, depth: usize) -> Process {
    canon_level(p, labels, depth).into_process()
}

fn canon_prime(p: &Process, labels: &Labels, depth: usize) -> Process {
    let bind = |binders: Vec<Binder>| -> Labels {
        let mut l = labels.clone();
        for (i, b) in binders.into_iter().enumerate() {
            l.insert(b, format!("${depth}.{i}"));
        }
        l
    };
    match p {
        Process::Output {
            subject,
            objects,
            cont,
        } => Process::output(
            subject.clone(),
            objects.clone(),
            canon_any(cont, labels, depth),
        ),
        Process::Input {
            subject,
            params,
            cont,
        } => {
            let l = bind(
                params
                    .iter()
                    .map(|x| Binder::Id(Ident::Var(x.clone())))
                    .collect(),
            );
            Process::input(subject.clone(), params.clone(), canon_any(cont, &l, depth + 1))
        }
        Process::Match {
            left,
            right,
            then,
            otherwise,
        } => Process::matching(
            left.clone(),
            right.clone(),
            canon_any(then, labels, depth),
            canon_any(otherwise, labels, depth),
        ),
        Process::Rec { binder, body } => {
            let l = bind(vec![Binder::Pv(binder.clone())]);
            Process::rec(binder.clone(), canon_any(body, &l, depth + 1))
        }
        Process::Alloc { binder, body } => {
            let l = bind(vec![Binder::Id(Ident::Var(binder.clone()))]);
            Process::alloc(binder.clone(), canon_any(body, &l, depth + 1))
        }
        Process::Free { subject, cont } => {
            Process::free(subject.clone(), canon_any(cont, labels, depth))
        }
        Process::Nil | Process::PVar(_) => p.clone(),
        Process::Par(..) | Process::Scope { .. } => canon_any(p, labels, depth),
    }
}

fn flatten(
    p: &Process,
    free: &BTreeSet<Name>,
    used: &mut BTreeSet<String>,
    scopes: &mut Vec<(Name, ChannelState)>,
    comps: &mut Vec<Process>,
) {
    match p {
        Process::Nil => {}
        Process::Par(l, r) => {
            flatten(l, free, used, scopes, comps);
            flatten(r, free, used, scopes, comps);
        }
        Process::Scope { name, state, body } => {
            // Extruded names must stay distinct from each other and from
            // the free names of the level.
            if free.contains(name) || scopes.iter().any(|(n, _)| n == name) {
                let fresh = Name(fresh_text(&name.0, used));
                used.insert(fresh.0.clone());
                let body = rename_name(body, name, &fresh);
                scopes.push((fresh, *state));
                flatten(&body, free, used, scopes, comps);
            } else {
                scopes.push((name.clone(), *state));
                flatten(body, free, used, scopes, comps);
            }
        }
        other => comps.push(other.clone()),
    }
}

fn canon_level(p: &Process, labels: &Labels, depth: usize) -> Flattened {
    let mut used = p.all_texts();
    let free = p.free_names();
    let mut scopes = Vec::new();
    let mut raw = Vec::new();
    flatten(p, &free, &mut used, &mut scopes, &mut raw);

    if scopes.is_empty() {
        let mut keyed: Vec<(String, Process)> = raw
            .iter()
            .map(|c| {
                let c = canon_prime(c, labels, depth);
                (key_labeled(&c, labels), c)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        return Flattened {
            scopes,
            components: keyed.into_iter().map(|(_, c)| c).collect(),
        };
    }

    let name_binder = |n: &Name| Binder::Id(Ident::Name(n.clone()));
    let mut anon = labels.clone();
    for (n, _) in &scopes {
        anon.insert(name_binder(n), "_".to_string());
    }

    // Signature of each scoped name: its state and the anonymised shapes of
    // the components mentioning it, with the name itself marked.
    let signature = |name: &Name, state: ChannelState| -> String {
        let mut marked = anon.clone();
        marked.insert(name_binder(name), "@".to_string());
        let mut uses: Vec<String> = raw
            .iter()
            .filter(|c| c.free_names().contains(name))
            .map(|c| key_labeled(&canon_prime(c, &marked, depth + 1), &marked))
            .collect();
        uses.sort();
        format!("{state:?}|{}", uses.join("|"))
    };

    let mut sigs: Vec<(String, Name, ChannelState)> = scopes
        .iter()
        .map(|(n, s)| (signature(n, *s), n.clone(), *s))
        .collect();
    sigs.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let mut groups: Vec<Vec<(Name, ChannelState)>> = Vec::new();
    let mut last: Option<&str> = None;
    for (sig, n, s) in &sigs {
        if last == Some(sig.as_str()) {
            groups.last_mut().unwrap().push((n.clone(), *s));
        } else {
            groups.push(vec![(n.clone(), *s)]);
        }
        last = Some(sig.as_str());
    }

    let total: usize = groups
        .iter()
        .map(|g| (1..=g.len()).product::<usize>())
        .try_fold(1usize, |acc, f| acc.checked_mul(f))
        .unwrap_or(usize::MAX);

    let orderings: Vec<Vec<(Name, ChannelState)>> = if total <= MAX_ORDERINGS {
        group_orderings(&groups)
    } else {
        vec![groups.concat()]
    };

    let mut best: Option<(String, Scopes, Vec<Process>)> = None;
    for order in orderings {
        let mut positional = labels.clone();
        for (i, (n, _)) in order.iter().enumerate() {
            positional.insert(name_binder(n), format!("%{depth}.{i}"));
        }
        let mut keyed: Vec<(String, Process)> = raw
            .iter()
            .map(|c| {
                let c = canon_prime(c, &positional, depth + 1);
                (key_labeled(&c, &positional), c)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut total_key = String::new();
        for (_, s) in &order {
            total_key.push_str(if *s == ChannelState::Allocated { "+" } else { "-" });
        }
        for (k, _) in &keyed {
            total_key.push('|');
            total_key.push_str(k);
        }
        if best.as_ref().is_none_or(|(bk, _, _)| total_key < *bk) {
            let sorted = keyed.into_iter().map(|(_, c)| c).collect();
            best = Some((total_key, order, sorted));
        }
    }
    let (_, scopes, components) = best.expect("at least one ordering");
    Flattened { scopes, components }
}

fn group_orderings(groups: &[Vec<(Name, ChannelState)>]) -> Vec<Vec<(Name, ChannelState)>> {
    let mut acc: Vec<Vec<(Name, ChannelState)>> = vec![Vec::new()];
    for g in groups {
        let perms = permutations(g);
        let mut next = Vec::with_capacity(acc.len() * perms.len());
        for prefix in &acc {
            for perm in &perms {
                let mut v = prefix.clone();
                v.extend(perm.iter().cloned());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Drops `new c:dealloc` wrappers whose name is unused in their body.
/// Such wrappers enable no reduction; used only to shrink explored graphs.
pub fn drop_dead_scopes(p: &Process) -> Process {
    match p {
        Process::Scope {
            name,
            state: ChannelState::Deallocated,
            body,
        } if !body.free_names().contains(name) => drop_dead_scopes(body),
        Process::Scope { name, state, body } => {
            Process::scope(name.clone(), *state, drop_dead_scopes(body))
        }
        Process::Par(l, r) => Process::par(drop_dead_scopes(l), drop_dead_scopes(r)),
        other => other.clone(),
    }
}

/// Counts of each component shape, used by tests comparing multisets.
pub fn component_multiset(p: &Process) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for c in canonical_flat(p).components {
        *m.entry(alpha_key(&c)).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_process;

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    #[test]
    fn alpha_eq_examples() {
        assert!(alpha_eq(&p("alloc x. free x.nil"), &p("alloc y. free y.nil")));
        assert!(alpha_eq(&p("c?(x).nil"), &p("c?(y).nil")));
        assert!(!alpha_eq(&p("new c:alloc.nil"), &p("new c:dealloc.nil")));
        assert!(!alpha_eq(&p("c?(x,y).x!().nil"), &p("c?(x,y).y!().nil")));
        assert!(alpha_eq(
            &p("new c:alloc. c!().nil"),
            &p("new d:alloc. d!().nil")
        ));
        assert!(!alpha_eq(&p("c!().nil"), &p("d!().nil")));
        assert!(alpha_eq(&p("rec X. c!().X"), &p("rec Y. c!().Y")));
    }

    #[test]
    fn shadowing_is_respected() {
        // inner x refers to the inner binder
        assert!(alpha_eq(&p("c?(x).c?(x).x!().nil"), &p("c?(y).c?(z).z!().nil")));
        assert!(!alpha_eq(&p("c?(x).c?(x).x!().nil"), &p("c?(y).c?(z).y!().nil")));
    }

    #[test]
    fn nil_unit_is_removed() {
        assert_eq!(canonical_form(&p("nil | c!().nil")), p("c!().nil"));
        assert_eq!(canonical_form(&p("nil | nil")), Process::Nil);
    }

    #[test]
    fn scope_extrusion() {
        let got = canonical_form(&p("(new c:alloc. c!().nil) | d!().nil"));
        assert!(alpha_eq(&got, &p("new c:alloc.(c!().nil | d!().nil)")));
    }

    #[test]
    fn extrusion_renames_clashing_scopes() {
        let got = canonical_form(&p("(new c:alloc. c!().nil) | (new c:dealloc. c?().nil)"));
        let flat = canonical_flat(&got);
        assert_eq!(flat.scopes.len(), 2);
        assert_ne!(flat.scopes[0].0, flat.scopes[1].0);
        assert!(alpha_eq(
            &got,
            &canonical_form(&p("new a:dealloc. new b:alloc. (b!().nil | a?().nil)"))
        ));
    }

    #[test]
    fn commutativity_and_scope_swap() {
        let a = canonical_form(&p("new a:alloc. new b:dealloc. (a!(b).nil | b?().nil | e!().nil)"));
        let b = canonical_form(&p("e!().nil | new b:dealloc. (b?().nil | new a:alloc. a!(b).nil)"));
        assert!(alpha_eq(&a, &b));
    }

    #[test]
    fn symmetric_scopes_are_canonical() {
        let a = canonical_form(&p("new a:alloc. new b:alloc. (a!().nil | b!().nil | a?().nil)"));
        let b = canonical_form(&p("new a:alloc. new b:alloc. (b!().nil | a!().nil | b?().nil)"));
        assert!(alpha_eq(&a, &b));
    }

    #[test]
    fn canonicalisation_reaches_under_prefixes() {
        let a = canonical_form(&p("c?(x).(nil | x!().nil | d!().nil)"));
        let b = canonical_form(&p("c?(y).(d!().nil | y!().nil)"));
        assert!(alpha_eq(&a, &b));
    }

    #[test]
    fn dead_scopes_are_dropped_only_when_deallocated() {
        assert_eq!(drop_dead_scopes(&p("new c:dealloc. d!().nil")), p("d!().nil"));
        assert_eq!(
            drop_dead_scopes(&p("new c:alloc. d!().nil")),
            p("new c:alloc. d!().nil")
        );
        assert_eq!(
            drop_dead_scopes(&p("new c:dealloc. c!().nil")),
            p("new c:dealloc. c!().nil")
        );
    }
}
