//! Capture-avoiding substitution.

use std::collections::BTreeSet;

use crate::syntax::{fresh_text, Ident, Name, ProcVar, Process, Var};

/// Simultaneous substitution of names for variables, `p{b/x}`.
pub fn subst_names(p: &Process, subs: &[(Var, Name)]) -> Process {
    let map: Vec<(Ident, Ident)> = subs
        .iter()
        .map(|(x, n)| (Ident::Var(x.clone()), Ident::Name(n.clone())))
        .collect();
    subst_idents(p, &map)
}

/// Renames the free name `from` to `to`.
pub fn rename_name(p: &Process, from: &Name, to: &Name) -> Process {
    subst_idents(p, &[(Ident::Name(from.clone()), Ident::Name(to.clone()))])
}

/// Simultaneous capture-avoiding identifier substitution. Keys must be
/// pairwise distinct.
pub fn subst_idents(p: &Process, map: &[(Ident, Ident)]) -> Process {
    let map: Vec<(Ident, Ident)> = map.iter().filter(|(k, v)| k != v).cloned().collect();
    if map.is_empty() {
        return p.clone();
    }
    go(p, &map)
}

fn apply(u: &Ident, map: &[(Ident, Ident)]) -> Ident {
    map.iter()
        .find(|(k, _)| k == u)
        .map(|(_, v)| v.clone())
        .unwrap_or_else(|| u.clone())
}

/// Restricts `map` to keys free in `body` and not shadowed by `binders`.
fn restrict(map: &[(Ident, Ident)], binders: &[Ident], body: &Process) -> Vec<(Ident, Ident)> {
    let free = body.free_idents();
    map.iter()
        .filter(|(k, _)| !binders.contains(k) && free.contains(k))
        .cloned()
        .collect()
}

fn used_texts(body: &Process, map: &[(Ident, Ident)]) -> BTreeSet<String> {
    let mut used = body.all_texts();
    for (k, v) in map {
        used.insert(k.text().to_string());
        used.insert(v.text().to_string());
    }
    used
}

fn go(p: &Process, map: &[(Ident, Ident)]) -> Process {
    match p {
        Process::Output {
            subject,
            objects,
            cont,
        } => Process::output(
            apply(subject, map),
            objects.iter().map(|o| apply(o, map)).collect(),
            go(cont, map),
        ),
        Process::Input {
            subject,
            params,
            cont,
        } => {
            let binders: Vec<Ident> = params.iter().cloned().map(Ident::Var).collect();
            let inner = restrict(map, &binders, cont);
            let (params, cont) = freshen_vars(params, cont, &inner);
            Process::input(apply(subject, map), params, go(&cont, &inner))
        }
        Process::Nil => Process::Nil,
        Process::PVar(x) => Process::PVar(x.clone()),
        Process::Match {
            left,
            right,
            then,
            otherwise,
        } => Process::matching(
            apply(left, map),
            apply(right, map),
            go(then, map),
            go(otherwise, map),
        ),
        Process::Rec { binder, body } => Process::rec(binder.clone(), go(body, map)),
        Process::Par(l, r) => Process::par(go(l, map), go(r, map)),
        Process::Scope { name, state, body } => {
            let inner = restrict(map, &[Ident::Name(name.clone())], body);
            let captures = inner.iter().any(|(_, v)| v == &Ident::Name(name.clone()));
            let (name, body) = if captures {
                let fresh = Name(fresh_text(&name.0, &used_texts(body, &inner)));
                let body = go(body, &[(Ident::Name(name.clone()), Ident::Name(fresh.clone()))]);
                (fresh, body)
            } else {
                (name.clone(), (**body).clone())
            };
            Process::scope(name, *state, go(&body, &inner))
        }
        Process::Alloc { binder, body } => {
            let inner = restrict(map, &[Ident::Var(binder.clone())], body);
            let (mut params, body) = freshen_vars(std::slice::from_ref(binder), body, &inner);
            Process::alloc(params.remove(0), go(&body, &inner))
        }
        Process::Free { subject, cont } => Process::free(apply(subject, map), go(cont, map)),
    }
}

/// Renames any of `params` that would capture a value of `map` inside `body`.
fn freshen_vars(params: &[Var], body: &Process, map: &[(Ident, Ident)]) -> (Vec<Var>, Process) {
    let clashing: Vec<&Var> = params
        .iter()
        .filter(|x| map.iter().any(|(_, v)| v == &Ident::Var((*x).clone())))
        .collect();
    if clashing.is_empty() {
        return (params.to_vec(), body.clone());
    }
    let mut used = used_texts(body, map);
    used.extend(params.iter().map(|x| x.0.clone()));
    let mut renames = Vec::new();
    let new_params = params
        .iter()
        .map(|x| {
            if clashing.contains(&x) {
                let fresh = Var(fresh_text(&x.0, &used));
                used.insert(fresh.0.clone());
                renames.push((Ident::Var(x.clone()), Ident::Var(fresh.clone())));
                fresh
            } else {
                x.clone()
            }
        })
        .collect();
    (new_params, go(body, &renames))
}

/// Capture-avoiding substitution of `body` for free occurrences of `x`.
pub fn subst_procvar(p: &Process, x: &ProcVar, body: &Process) -> Process {
    let ctx = PSubst {
        x,
        body,
        body_idents: body.free_idents(),
        body_pvars: body.free_procvars(),
    };
    ctx.go(p)
}

struct PSubst<'a> {
    x: &'a ProcVar,
    body: &'a Process,
    body_idents: BTreeSet<Ident>,
    body_pvars: BTreeSet<ProcVar>,
}

impl PSubst<'_> {
    fn used(&self, p: &Process) -> BTreeSet<String> {
        let mut used = p.all_texts();
        used.extend(self.body.all_texts());
        used
    }

    fn go(&self, p: &Process) -> Process {
        if !p.free_procvars().contains(self.x) {
            return p.clone();
        }
        match p {
            Process::PVar(y) if y == self.x => self.body.clone(),
            Process::PVar(_) | Process::Nil => p.clone(),
            Process::Output {
                subject,
                objects,
                cont,
            } => Process::output(subject.clone(), objects.clone(), self.go(cont)),
            Process::Free { subject, cont } => Process::free(subject.clone(), self.go(cont)),
            Process::Match {
                left,
                right,
                then,
                otherwise,
            } => Process::matching(
                left.clone(),
                right.clone(),
                self.go(then),
                self.go(otherwise),
            ),
            Process::Par(l, r) => Process::par(self.go(l), self.go(r)),
            Process::Rec { binder, body } => {
                if self.body_pvars.contains(binder) {
                    let fresh = ProcVar(fresh_text(&binder.0, &self.used(p)));
                    let renamed = subst_procvar(body, binder, &Process::PVar(fresh.clone()));
                    Process::rec(fresh, self.go(&renamed))
                } else {
                    Process::rec(binder.clone(), self.go(body))
                }
            }
            Process::Input {
                subject,
                params,
                cont,
            } => {
                let mut used = self.used(p);
                let mut renames = Vec::new();
                let params: Vec<Var> = params
                    .iter()
                    .map(|v| {
                        if self.body_idents.contains(&Ident::Var(v.clone())) {
                            let fresh = Var(fresh_text(&v.0, &used));
                            used.insert(fresh.0.clone());
                            renames.push((Ident::Var(v.clone()), Ident::Var(fresh.clone())));
                            fresh
                        } else {
                            v.clone()
                        }
                    })
                    .collect();
                let cont = subst_idents(cont, &renames);
                Process::input(subject.clone(), params, self.go(&cont))
            }
            Process::Alloc { binder, body } => {
                if self.body_idents.contains(&Ident::Var(binder.clone())) {
                    let fresh = Var(fresh_text(&binder.0, &self.used(p)));
                    let body = subst_idents(
                        body,
                        &[(Ident::Var(binder.clone()), Ident::Var(fresh.clone()))],
                    );
                    Process::alloc(fresh, self.go(&body))
                } else {
                    Process::alloc(binder.clone(), self.go(body))
                }
            }
            Process::Scope { name, state, body } => {
                if self.body_idents.contains(&Ident::Name(name.clone())) {
                    let fresh = Name(fresh_text(&name.0, &self.used(p)));
                    let body = rename_name(body, name, &fresh);
                    Process::scope(fresh, *state, self.go(&body))
                } else {
                    Process::scope(name.clone(), *state, self.go(body))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::alpha_eq;
    use crate::parser::parse_process;
    use crate::syntax::ChannelState;

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    fn var_proc(s: &str, vars: &[&str]) -> Process {
        let vars: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        crate::parser::parse_process_with_vars(s, &vars).unwrap()
    }

    #[test]
    fn direct_replacement() {
        let src = var_proc("x!(y).nil", &["x", "y"]);
        let out = subst_names(
            &src,
            &[(Var::new("x"), Name::new("c")), (Var::new("y"), Name::new("d"))],
        );
        assert_eq!(out, p("c!(d).nil"));
    }

    #[test]
    fn bound_variable_shields() {
        let src = p("c?(x).x!().nil");
        let out = subst_names(&src, &[(Var::new("x"), Name::new("d"))]);
        assert_eq!(out, src);
    }

    #[test]
    fn scope_binder_is_renamed_on_capture() {
        let src = var_proc("new d:alloc. x!(d).nil", &["x"]);
        let out = subst_names(&src, &[(Var::new("x"), Name::new("d"))]);
        match &out {
            Process::Scope { name, state, body } => {
                assert_ne!(name.0, "d");
                assert_eq!(*state, ChannelState::Allocated);
                assert_eq!(
                    **body,
                    Process::output(Ident::name("d"), vec![Ident::Name(name.clone())], Process::Nil)
                );
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(out.free_names().contains(&Name::new("d")));
    }

    #[test]
    fn procvar_substitution_cases() {
        let x = ProcVar::new("X");
        assert_eq!(subst_procvar(&p("X"), &x, &p("nil")), p("nil"));
        assert_eq!(subst_procvar(&p("rec X. X"), &x, &p("nil")), p("rec X. X"));
        assert_eq!(
            subst_procvar(&p("c!().X | X"), &x, &p("free c.nil")),
            p("c!().free c.nil | free c.nil")
        );
    }

    #[test]
    fn procvar_substitution_avoids_name_capture() {
        // substituting a body mentioning the free name d under `new d`
        let out = subst_procvar(&p("new d:alloc. X"), &ProcVar::new("X"), &p("d!().nil"));
        assert!(out.free_names().contains(&Name::new("d")));
        assert!(alpha_eq(&out, &p("new e:alloc. d!().nil")));
    }

    #[test]
    fn procvar_substitution_avoids_recursion_capture() {
        let out = subst_procvar(&p("rec Y. (X | Y)"), &ProcVar::new("X"), &p("Y"));
        assert!(out.free_procvars().contains(&ProcVar::new("Y")));
    }
}
