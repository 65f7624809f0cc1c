//! Reference one-step reducts: rename every active scope apart, pull it to
//! the top, then fire each rule on the flat list of components.

use std::collections::{BTreeMap, BTreeSet};

use pir_core::{ChannelState, Configuration, Ident, Name, ProcVar, Process, Var};

/// The rule fired, by its conventional name.
pub type RuleName = &'static str;

fn texts(p: &Process, out: &mut BTreeSet<String>) {
    let mut id = |u: &Ident| {
        out.insert(u.text().to_string());
    };
    match p {
        Process::Nil => {}
        Process::PVar(x) => {
            out.insert(x.as_str().to_string());
        }
        Process::Output {
            subject,
            objects,
            cont,
        } => {
            id(subject);
            objects.iter().for_each(&mut id);
            texts(cont, out);
        }
        Process::Input {
            subject,
            params,
            cont,
        } => {
            id(subject);
            out.extend(params.iter().map(|x| x.as_str().to_string()));
            texts(cont, out);
        }
        Process::Match {
            left,
            right,
            then,
            otherwise,
        } => {
            id(left);
            id(right);
            texts(then, out);
            texts(otherwise, out);
        }
        Process::Rec { binder, body } => {
            out.insert(binder.as_str().to_string());
            texts(body, out);
        }
        Process::Alloc { binder, body } => {
            out.insert(binder.as_str().to_string());
            texts(body, out);
        }
        Process::Scope { name, body, .. } => {
            out.insert(name.as_str().to_string());
            texts(body, out);
        }
        Process::Par(a, b) => {
            texts(a, out);
            texts(b, out);
        }
        Process::Free { subject, cont } => {
            id(subject);
            texts(cont, out);
        }
    }
}

struct Fresh(BTreeSet<String>);

impl Fresh {
    fn take(&mut self, base: &str) -> String {
        let mut i = 0;
        loop {
            let s = format!("{base}_{i}");
            if self.0.insert(s.clone()) {
                return s;
            }
            i += 1;
        }
    }
}

/// Replaces free occurrences of identifiers, renaming scope and input
/// binders that would capture a replacement.
fn replace(p: &Process, map: &BTreeMap<Ident, Ident>, fresh: &mut Fresh) -> Process {
    let r = |u: &Ident| map.get(u).cloned().unwrap_or_else(|| u.clone());
    let captured: BTreeSet<String> = map.values().map(|u| u.text().to_string()).collect();
    match p {
        Process::Nil | Process::PVar(_) => p.clone(),
        Process::Output {
            subject,
            objects,
            cont,
        } => Process::output(r(subject), objects.iter().map(r).collect(), replace(cont, map, fresh)),
        Process::Free { subject, cont } => Process::free(r(subject), replace(cont, map, fresh)),
        Process::Match {
            left,
            right,
            then,
            otherwise,
        } => Process::matching(
            r(left),
            r(right),
            replace(then, map, fresh),
            replace(otherwise, map, fresh),
        ),
        Process::Par(a, b) => Process::par(replace(a, map, fresh), replace(b, map, fresh)),
        Process::Rec { binder, body } => Process::rec(binder.clone(), replace(body, map, fresh)),
        Process::Input {
            subject,
            params,
            cont,
        } => {
            let mut inner = map.clone();
            let mut new_params = Vec::new();
            for x in params {
                inner.remove(&Ident::Var(x.clone()));
                if captured.contains(x.as_str()) {
                    let y = Var::new(fresh.take(x.as_str()));
                    inner.insert(Ident::Var(x.clone()), Ident::Var(y.clone()));
                    new_params.push(y);
                } else {
                    new_params.push(x.clone());
                }
            }
            Process::input(r(subject), new_params, replace(cont, &inner, fresh))
        }
        Process::Alloc { binder, body } => {
            let mut inner = map.clone();
            inner.remove(&Ident::Var(binder.clone()));
            if captured.contains(binder.as_str()) {
                let y = Var::new(fresh.take(binder.as_str()));
                inner.insert(Ident::Var(binder.clone()), Ident::Var(y.clone()));
                Process::alloc(y, replace(body, &inner, fresh))
            } else {
                Process::alloc(binder.clone(), replace(body, &inner, fresh))
            }
        }
        Process::Scope { name, state, body } => {
            let mut inner = map.clone();
            inner.remove(&Ident::Name(name.clone()));
            if captured.contains(name.as_str()) {
                let y = Name::new(fresh.take(name.as_str()));
                inner.insert(Ident::Name(name.clone()), Ident::Name(y.clone()));
                Process::scope(y, *state, replace(body, &inner, fresh))
            } else {
                Process::scope(name.clone(), *state, replace(body, &inner, fresh))
            }
        }
    }
}

fn unfold(body: &Process, x: &ProcVar, whole: &Process) -> Process {
    match body {
        Process::PVar(y) if y == x => whole.clone(),
        Process::Rec { binder, .. } if binder == x => body.clone(),
        Process::Nil | Process::PVar(_) => body.clone(),
        Process::Output {
            subject,
            objects,
            cont,
        } => Process::output(subject.clone(), objects.clone(), unfold(cont, x, whole)),
        Process::Input {
            subject,
            params,
            cont,
        } => Process::input(subject.clone(), params.clone(), unfold(cont, x, whole)),
        Process::Free { subject, cont } => Process::free(subject.clone(), unfold(cont, x, whole)),
        Process::Match {
            left,
            right,
            then,
            otherwise,
        } => Process::matching(
            left.clone(),
            right.clone(),
            unfold(then, x, whole),
            unfold(otherwise, x, whole),
        ),
        Process::Par(a, b) => Process::par(unfold(a, x, whole), unfold(b, x, whole)),
        Process::Rec { binder, body } => Process::rec(binder.clone(), unfold(body, x, whole)),
        Process::Alloc { binder, body } => Process::alloc(binder.clone(), unfold(body, x, whole)),
        Process::Scope { name, state, body } => {
            Process::scope(name.clone(), *state, unfold(body, x, whole))
        }
    }
}

struct Top {
    scopes: Vec<(Name, ChannelState)>,
    comps: Vec<Process>,
}

fn hoist(p: &Process, fresh: &mut Fresh, top: &mut Top) {
    match p {
        Process::Nil => {}
        Process::Par(a, b) => {
            hoist(a, fresh, top);
            hoist(b, fresh, top);
        }
        Process::Scope { name, state, body } => {
            let n = Name::new(fresh.take("s"));
            top.scopes.push((n.clone(), *state));
            let map = BTreeMap::from([(Ident::Name(name.clone()), Ident::Name(n))]);
            hoist(&replace(body, &map, fresh), fresh, top);
        }
        other => top.comps.push(other.clone()),
    }
}

fn rebuild(store: &pir_core::Store, scopes: &[(Name, ChannelState)], comps: Vec<Process>) -> Configuration {
    let mut p = Process::par_all(comps);
    for (n, s) in scopes.iter().rev() {
        p = Process::scope(n.clone(), *s, p);
    }
    Configuration {
        store: store.clone(),
        process: p,
    }
}

/// Every one-step reduct, labelled by rule.
pub fn reducts(c: &Configuration) -> Vec<(RuleName, Configuration)> {
    let mut all = BTreeSet::new();
    texts(&c.process, &mut all);
    all.extend(c.store.keys().map(|n| n.as_str().to_string()));
    let mut fresh = Fresh(all);
    let mut top = Top {
        scopes: Vec::new(),
        comps: Vec::new(),
    };
    hoist(&c.process, &mut fresh, &mut top);
    let state = |n: &Name, scopes: &[(Name, ChannelState)]| {
        scopes
            .iter()
            .find(|(m, _)| m == n)
            .map(|(_, s)| *s)
            .or_else(|| c.store.get(n).copied())
    };
    let without = |skip: &[usize], add: Vec<Process>| {
        let mut v: Vec<Process> = top
            .comps
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .map(|(_, p)| p.clone())
            .collect();
        v.extend(add);
        v
    };
    let mut out = Vec::new();
    for (i, comp) in top.comps.iter().enumerate() {
        match comp {
            Process::Rec { binder, body } => {
                out.push(("rRec", rebuild(&c.store, &top.scopes, without(&[i], vec![unfold(body, binder, comp)]))));
            }
            Process::Match {
                left: Ident::Name(a),
                right: Ident::Name(b),
                then,
                otherwise,
            } => {
                let (rule, next) = if a == b { ("rThen", then) } else { ("rElse", otherwise) };
                out.push((rule, rebuild(&c.store, &top.scopes, without(&[i], vec![(**next).clone()]))));
            }
            Process::Alloc { binder, body } => {
                let n = Name::new(fresh.take("fresh"));
                let map = BTreeMap::from([(Ident::Var(binder.clone()), Ident::Name(n.clone()))]);
                let scoped = Process::scope(n, ChannelState::Allocated, replace(body, &map, &mut fresh));
                out.push(("rAll", rebuild(&c.store, &top.scopes, without(&[i], vec![scoped]))));
            }
            Process::Free {
                subject: Ident::Name(n),
                cont,
            } if state(n, &top.scopes) == Some(ChannelState::Allocated) => {
                let mut store = c.store.clone();
                let mut scopes = top.scopes.clone();
                match scopes.iter_mut().find(|(m, _)| m == n) {
                    Some(e) => e.1 = ChannelState::Deallocated,
                    None => {
                        store.insert(n.clone(), ChannelState::Deallocated);
                    }
                }
                out.push(("rFree", rebuild(&store, &scopes, without(&[i], vec![(**cont).clone()]))));
            }
            Process::Output {
                subject: Ident::Name(n),
                objects,
                cont,
            } if state(n, &top.scopes) == Some(ChannelState::Allocated) => {
                for (j, other) in top.comps.iter().enumerate() {
                    let Process::Input {
                        subject: Ident::Name(m),
                        params,
                        cont: cont2,
                    } = other
                    else {
                        continue;
                    };
                    if m != n || params.len() != objects.len() {
                        continue;
                    }
                    let map: BTreeMap<Ident, Ident> = params
                        .iter()
                        .map(|x| Ident::Var(x.clone()))
                        .zip(objects.iter().cloned())
                        .collect();
                    let received = replace(cont2, &map, &mut fresh);
                    out.push((
                        "rCom",
                        rebuild(&c.store, &top.scopes, without(&[i, j], vec![(**cont).clone(), received])),
                    ));
                }
            }
            _ => {}
        }
    }
    out
}
