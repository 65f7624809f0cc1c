//! Structural congruence decided by brute force: scopes are pulled to the
//! top of each level, and levels are compared by trying every bijection of
//! scopes and every matching of components.

use std::collections::HashMap;

use pir_core::{ChannelState, Configuration, Ident, Process};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Id {
    Free(char, String),
    Bound(usize),
}

#[derive(Clone, Debug)]
struct Level {
    scopes: Vec<(usize, ChannelState)>,
    comps: Vec<Comp>,
}

#[derive(Clone, Debug)]
enum Comp {
    Out(Id, Vec<Id>, Level),
    In(Id, Vec<usize>, Level),
    If(Id, Id, Level, Level),
    Rec(usize, Level),
    PVar(Id),
    Alloc(usize, Level),
    Free(Id, Level),
}

#[derive(Default)]
struct Builder {
    next: usize,
    // (kind, text) -> binder ids, innermost last
    env: HashMap<(char, String), Vec<usize>>,
}

impl Builder {
    fn bind(&mut self, kind: char, text: &str) -> usize {
        let id = self.next;
        self.next += 1;
        self.env.entry((kind, text.to_string())).or_default().push(id);
        id
    }

    fn unbind(&mut self, kind: char, text: &str) {
        self.env.get_mut(&(kind, text.to_string())).and_then(|v| v.pop());
    }

    fn resolve(&self, kind: char, text: &str) -> Id {
        match self.env.get(&(kind, text.to_string())).and_then(|v| v.last()) {
            Some(&i) => Id::Bound(i),
            None => Id::Free(kind, text.to_string()),
        }
    }

    fn ident(&self, u: &Ident) -> Id {
        match u {
            Ident::Name(n) => self.resolve('n', n.as_str()),
            Ident::Var(x) => self.resolve('v', x.as_str()),
        }
    }

    fn level(&mut self, p: &Process) -> Level {
        let mut l = Level {
            scopes: Vec::new(),
            comps: Vec::new(),
        };
        self.collect(p, &mut l);
        l
    }

    fn collect(&mut self, p: &Process, l: &mut Level) {
        match p {
            Process::Nil => {}
            Process::Par(a, b) => {
                self.collect(a, l);
                self.collect(b, l);
            }
            Process::Scope { name, state, body } => {
                let id = self.bind('n', name.as_str());
                l.scopes.push((id, *state));
                self.collect(body, l);
                self.unbind('n', name.as_str());
            }
            Process::Output {
                subject,
                objects,
                cont,
            } => {
                let c = Comp::Out(
                    self.ident(subject),
                    objects.iter().map(|o| self.ident(o)).collect(),
                    self.level(cont),
                );
                l.comps.push(c);
            }
            Process::Input {
                subject,
                params,
                cont,
            } => {
                let s = self.ident(subject);
                let ids: Vec<usize> = params.iter().map(|x| self.bind('v', x.as_str())).collect();
                let body = self.level(cont);
                for x in params {
                    self.unbind('v', x.as_str());
                }
                l.comps.push(Comp::In(s, ids, body));
            }
            Process::Match {
                left,
                right,
                then,
                otherwise,
            } => {
                let c = Comp::If(
                    self.ident(left),
                    self.ident(right),
                    self.level(then),
                    self.level(otherwise),
                );
                l.comps.push(c);
            }
            Process::Rec { binder, body } => {
                let id = self.bind('p', binder.as_str());
                let b = self.level(body);
                self.unbind('p', binder.as_str());
                l.comps.push(Comp::Rec(id, b));
            }
            Process::PVar(x) => l.comps.push(Comp::PVar(self.resolve('p', x.as_str()))),
            Process::Alloc { binder, body } => {
                let id = self.bind('v', binder.as_str());
                let b = self.level(body);
                self.unbind('v', binder.as_str());
                l.comps.push(Comp::Alloc(id, b));
            }
            Process::Free { subject, cont } => {
                let c = Comp::Free(self.ident(subject), self.level(cont));
                l.comps.push(c);
            }
        }
    }
}

type Map = HashMap<usize, usize>;

fn id_eq(a: &Id, b: &Id, m: &Map) -> bool {
    match (a, b) {
        (Id::Free(k, s), Id::Free(j, t)) => k == j && s == t,
        (Id::Bound(i), Id::Bound(j)) => m.get(i) == Some(j),
        _ => false,
    }
}

fn ids_eq(a: &[Id], b: &[Id], m: &Map) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| id_eq(x, y, m))
}

fn with(m: &Map, pairs: impl IntoIterator<Item = (usize, usize)>) -> Map {
    let mut m = m.clone();
    m.extend(pairs);
    m
}

fn comp_eq(a: &Comp, b: &Comp, m: &Map) -> bool {
    match (a, b) {
        (Comp::Out(s, o, k), Comp::Out(t, p, l)) => {
            id_eq(s, t, m) && ids_eq(o, p, m) && level_eq(k, l, m)
        }
        (Comp::In(s, xs, k), Comp::In(t, ys, l)) => {
            id_eq(s, t, m)
                && xs.len() == ys.len()
                && level_eq(k, l, &with(m, xs.iter().copied().zip(ys.iter().copied())))
        }
        (Comp::If(a1, b1, t1, e1), Comp::If(a2, b2, t2, e2)) => {
            id_eq(a1, a2, m) && id_eq(b1, b2, m) && level_eq(t1, t2, m) && level_eq(e1, e2, m)
        }
        (Comp::Rec(x, k), Comp::Rec(y, l)) | (Comp::Alloc(x, k), Comp::Alloc(y, l)) => {
            level_eq(k, l, &with(m, [(*x, *y)]))
        }
        (Comp::PVar(x), Comp::PVar(y)) => id_eq(x, y, m),
        (Comp::Free(s, k), Comp::Free(t, l)) => id_eq(s, t, m) && level_eq(k, l, m),
        _ => false,
    }
}

fn level_eq(a: &Level, b: &Level, m: &Map) -> bool {
    if a.scopes.len() != b.scopes.len() || a.comps.len() != b.comps.len() {
        return false;
    }
    let mut used = vec![false; b.scopes.len()];
    scopes_then_comps(a, b, 0, &mut used, m)
}

fn scopes_then_comps(a: &Level, b: &Level, i: usize, used: &mut [bool], m: &Map) -> bool {
    if i == a.scopes.len() {
        let mut taken = vec![false; b.comps.len()];
        return match_comps(&a.comps, &b.comps, 0, &mut taken, m);
    }
    let (x, s) = a.scopes[i];
    for j in 0..b.scopes.len() {
        if used[j] || b.scopes[j].1 != s {
            continue;
        }
        used[j] = true;
        let ok = scopes_then_comps(a, b, i + 1, used, &with(m, [(x, b.scopes[j].0)]));
        used[j] = false;
        if ok {
            return true;
        }
    }
    false
}

fn match_comps(a: &[Comp], b: &[Comp], i: usize, taken: &mut [bool], m: &Map) -> bool {
    if i == a.len() {
        return true;
    }
    for j in 0..b.len() {
        if taken[j] || !comp_eq(&a[i], &b[j], m) {
            continue;
        }
        taken[j] = true;
        let ok = match_comps(a, b, i + 1, taken, m);
        taken[j] = false;
        if ok {
            return true;
        }
    }
    false
}

pub fn congruent(p: &Process, q: &Process) -> bool {
    let a = Builder::default().level(p);
    let b = Builder::default().level(q);
    level_eq(&a, &b, &Map::new())
}

pub fn congruent_configs(c: &Configuration, d: &Configuration) -> bool {
    c.store == d.store && congruent(&c.process, &d.process)
}

/// Multiset equality up to `eq`, by exhaustive matching.
pub fn same_multiset<T>(xs: &[T], ys: &[T], eq: impl Fn(&T, &T) -> bool) -> bool {
    fn go<T>(xs: &[T], ys: &[T], i: usize, taken: &mut [bool], eq: &dyn Fn(&T, &T) -> bool) -> bool {
        if i == xs.len() {
            return true;
        }
        for j in 0..ys.len() {
            if !taken[j] && eq(&xs[i], &ys[j]) {
                taken[j] = true;
                if go(xs, ys, i + 1, taken, eq) {
                    return true;
                }
                taken[j] = false;
            }
        }
        false
    }
    xs.len() == ys.len() && go(xs, ys, 0, &mut vec![false; ys.len()], &eq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pir_core::parse_process;

    fn eq(a: &str, b: &str) -> bool {
        congruent(&parse_process(a).unwrap(), &parse_process(b).unwrap())
    }

    #[test]
    fn laws() {
        assert!(eq("a!().nil | b!().nil", "b!().nil | (a!().nil | nil)"));
        assert!(eq("new n:alloc. (n!().nil | b!().nil)", "b!().nil | new n:alloc. n!().nil"));
        assert!(eq("a?(x). x!().nil", "a?(y). y!().nil"));
        assert!(eq("new n:alloc. new m:dealloc. n!(m).nil", "new m:dealloc. new n:alloc. n!(m).nil"));
        assert!(!eq("new n:alloc. n!().nil", "new n:dealloc. n!().nil"));
        assert!(!eq("new n:alloc. nil", "nil"));
        assert!(!eq("a?(x, y). x!().nil", "a?(x, y). y!().nil"));
        assert!(eq("a!().(b!().nil | c!().nil)", "a!().(c!().nil | b!().nil)"));
    }
}
