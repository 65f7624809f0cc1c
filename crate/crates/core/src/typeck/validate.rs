//! Checks every node of a derivation against the declarative rules.

use std::fmt;

use super::derivation::{mentions, Derivation, TRule};
use crate::syntax::{ChannelState, Ident, Process};
use crate::types::{decrement, split, subtype, Attribute, Decrement, Subject, Type, TypeEnv};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ValidationError {
    /// Premise indices from the root to the failing node.
    pub path: Vec<usize>,
    pub rule: String,
    pub env: TypeEnv,
    pub process: String,
    pub reason: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(
            f,
            "node [{}] {} {} |- {}: {}",
            path.join("."),
            self.rule,
            self.env,
            self.process,
            self.reason
        )
    }
}

/// Validates the whole tree; reports the first failing node in pre-order.
pub fn validate(d: &Derivation) -> Result<(), ValidationError> {
    for (path, node) in d.nodes() {
        if let Err(reason) = check_node(node) {
            return Err(ValidationError {
                path,
                rule: node.rule.to_string(),
                env: node.env.clone(),
                process: node.process.to_string(),
                reason,
            });
        }
    }
    Ok(())
}

type Check = Result<(), String>;

fn premises(d: &Derivation, n: usize) -> Result<&[Derivation], String> {
    if d.premises.len() != n {
        return Err(format!(
            "expected {n} premise(s), found {}",
            d.premises.len()
        ));
    }
    Ok(&d.premises)
}

fn same_process(p: &Derivation, expected: &Process) -> Check {
    if p.process != *expected {
        return Err(format!(
            "premise process `{}` should be `{expected}`",
            p.process
        ));
    }
    Ok(())
}

fn same_env(actual: &TypeEnv, expected: &TypeEnv) -> Check {
    if actual != expected {
        return Err(format!("premise environment {actual}, expected {expected}"));
    }
    Ok(())
}

fn id(u: &Ident) -> Subject {
    Subject::Id(u.clone())
}

fn fresh(env: &TypeEnv, u: &Ident) -> Check {
    if mentions(env, u) {
        return Err(format!("bound identifier `{u}` is not fresh"));
    }
    Ok(())
}

/// Distinct assumptions for `s` in `env`.
fn candidates<'a>(env: &'a TypeEnv, s: &'a Subject) -> Vec<&'a Type> {
    let mut v: Vec<&Type> = env.types_of(s).collect();
    v.dedup();
    v
}

fn after_use(env: &TypeEnv, s: &Subject, t: &Type) -> Option<TypeEnv> {
    let mut rest = env.without(s, t)?;
    match decrement(t) {
        Decrement::Type(d) => rest.insert(s.clone(), d),
        Decrement::Consumed => {}
        Decrement::Undefined => return None,
    }
    Some(rest)
}

fn check_node(d: &Derivation) -> Check {
    let env = &d.env;
    let p = &d.process;
    match &d.rule {
        TRule::Unknown(name) => Err(format!("unknown rule `{name}`")),
        TRule::Nil => {
            premises(d, 0)?;
            if !p.is_nil() {
                return Err("process is not nil".into());
            }
            if !env.is_empty() {
                return Err(format!("environment {env} should be empty"));
            }
            Ok(())
        }
        TRule::Var => {
            premises(d, 0)?;
            let Process::PVar(x) = p else {
                return Err("process is not a process variable".into());
            };
            let expected = TypeEnv::from_entries([(Subject::PVar(x.clone()), Type::Proc)]);
            if *env != expected {
                return Err(format!("environment {env} should be exactly {expected}"));
            }
            Ok(())
        }
        TRule::In => {
            let [prem] = premises(d, 1)? else { unreachable!() };
            let Process::Input {
                subject,
                params,
                cont,
            } = p
            else {
                return Err("process is not an input".into());
            };
            same_process(prem, cont)?;
            for x in params {
                fresh(env, &Ident::Var(x.clone()))?;
            }
            let s = id(subject);
            for t in candidates(env, &s) {
                let Type::Chan(objs, _) = t else { continue };
                if objs.len() != params.len() {
                    continue;
                }
                let Some(mut expected) = after_use(env, &s, t) else {
                    continue;
                };
                for (x, o) in params.iter().zip(objs) {
                    expected.insert(Subject::Id(Ident::Var(x.clone())), o.clone());
                }
                if prem.env == expected {
                    return Ok(());
                }
            }
            Err(format!(
                "no assumption for `{subject}` whose decrement and parameters give {}",
                prem.env
            ))
        }
        TRule::Out => {
            let [prem] = premises(d, 1)? else { unreachable!() };
            let Process::Output {
                subject,
                objects,
                cont,
            } = p
            else {
                return Err("process is not an output".into());
            };
            same_process(prem, cont)?;
            let s = id(subject);
            for t in candidates(env, &s) {
                let Type::Chan(objs, _) = t else { continue };
                if objs.len() != objects.len() {
                    continue;
                }
                let Some(mut rest) = env.without(&s, t) else {
                    continue;
                };
                let handed = objects
                    .iter()
                    .zip(objs)
                    .all(|(v, o)| rest.remove_one(&id(v), o));
                if !handed {
                    continue;
                }
                match decrement(t) {
                    Decrement::Type(dt) => rest.insert(s.clone(), dt),
                    Decrement::Consumed => {}
                    Decrement::Undefined => continue,
                }
                if prem.env == rest {
                    return Ok(());
                }
            }
            Err(format!(
                "no assumption for `{subject}` and its objects yields {}",
                prem.env
            ))
        }
        TRule::Par => {
            let [l, r] = premises(d, 2)? else { unreachable!() };
            let Process::Par(pl, pr) = p else {
                return Err("process is not a parallel composition".into());
            };
            same_process(l, pl)?;
            same_process(r, pr)?;
            let union = l.env.union(&r.env);
            if union != *env {
                return Err(format!(
                    "environment should be the union {union} of the premises"
                ));
            }
            Ok(())
        }
        TRule::If => {
            let [a, b] = premises(d, 2)? else { unreachable!() };
            let Process::Match {
                left,
                right,
                then,
                otherwise,
            } = p
            else {
                return Err("process is not a match".into());
            };
            same_process(a, then)?;
            same_process(b, otherwise)?;
            for u in [left, right] {
                if !env.types_of(&id(u)).any(|t| matches!(t, Type::Chan(..))) {
                    return Err(format!("no channel assumption for `{u}`"));
                }
            }
            same_env(&a.env, env)?;
            same_env(&b.env, env)
        }
        TRule::Rec => {
            let [prem] = premises(d, 1)? else { unreachable!() };
            let Process::Rec { binder, body } = p else {
                return Err("process is not a recursion".into());
            };
            same_process(prem, body)?;
            let x = Subject::PVar(binder.clone());
            if env.contains_subject(&x) {
                return Err(format!("bound process variable `{binder}` is not fresh"));
            }
            for (s, t) in env.entries() {
                let ok = matches!(t, Type::Proc | Type::Chan(_, Attribute::Unrestricted));
                if !ok {
                    return Err(format!("assumption {s}: {t} is not unrestricted"));
                }
            }
            same_env(&prem.env, &env.with(x, Type::Proc))
        }
        TRule::All => {
            let [prem] = premises(d, 1)? else { unreachable!() };
            let Process::Alloc { binder, body } = p else {
                return Err("process is not an allocation".into());
            };
            same_process(prem, body)?;
            let x = Ident::Var(binder.clone());
            fresh(env, &x)?;
            let added = prem.env.minus(env);
            let ok = env.minus(&prem.env).is_empty()
                && added.len() == 1
                && added.entries()[0].0 == id(&x)
                && added.entries()[0].1.is_unique_now();
            if !ok {
                return Err(format!(
                    "premise {} should extend the conclusion with `{x}` unique now",
                    prem.env
                ));
            }
            Ok(())
        }
        TRule::Free => {
            let [prem] = premises(d, 1)? else { unreachable!() };
            let Process::Free { subject, cont } = p else {
                return Err("process is not a deallocation".into());
            };
            same_process(prem, cont)?;
            let s = id(subject);
            let found = candidates(env, &s)
                .into_iter()
                .filter(|t| t.is_unique_now())
                .any(|t| env.without(&s, t).as_ref() == Some(&prem.env));
            if !found {
                return Err(format!(
                    "conclusion should be the premise plus `{subject}` unique now"
                ));
            }
            Ok(())
        }
        TRule::Rst1 | TRule::Rst2 => {
            let [prem] = premises(d, 1)? else { unreachable!() };
            let Process::Scope { name, state, body } = p else {
                return Err("process is not a scope".into());
            };
            same_process(prem, body)?;
            let want = if d.rule == TRule::Rst1 {
                ChannelState::Allocated
            } else {
                ChannelState::Deallocated
            };
            if *state != want {
                return Err(format!("scope state is {state}, rule needs {want}"));
            }
            if d.rule == TRule::Rst2 {
                return same_env(&prem.env, env);
            }
            let c = Ident::Name(name.clone());
            fresh(env, &c)?;
            let added = prem.env.minus(env);
            let ok = env.minus(&prem.env).is_empty()
                && added.len() == 1
                && added.entries()[0].0 == id(&c);
            if !ok {
                return Err(format!(
                    "premise {} should extend the conclusion with one assumption for `{c}`",
                    prem.env
                ));
            }
            Ok(())
        }
        TRule::Con | TRule::Weak | TRule::Sub | TRule::Rev => {
            let [prem] = premises(d, 1)? else { unreachable!() };
            same_process(prem, p)?;
            check_structural(&d.rule, env, &prem.env)
        }
    }
}

fn check_structural(rule: &TRule, concl: &TypeEnv, prem: &TypeEnv) -> Check {
    for (s, t) in concl.entries() {
        let Some(rest) = concl.without(s, t) else { continue };
        let ok = match rule {
            TRule::Weak => rest == *prem,
            TRule::Con => split(t)
                .iter()
                .any(|(a, b)| rest.with(s.clone(), a.clone()).with(s.clone(), b.clone()) == *prem),
            TRule::Sub | TRule::Rev => prem.entries().iter().any(|(s2, t2)| {
                let related = match rule {
                    TRule::Sub => subtype(t, t2),
                    _ => t.is_unique_now() && t2.is_unique_now(),
                };
                s2 == s && related && rest.with(s.clone(), t2.clone()) == *prem
            }),
            _ => false,
        };
        if ok {
            return Ok(());
        }
    }
    let what = match rule {
        TRule::Weak => "dropping one assumption",
        TRule::Con => "splitting one assumption",
        TRule::Sub => "raising one assumption to a proper supertype",
        _ => "revising the object types of one unique-now assumption",
    };
    Err(format!("premise {prem} is not obtained from the conclusion by {what}"))
}
