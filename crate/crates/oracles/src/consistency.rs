//! Closed-form consistency and forward generation of consistent
//! environments.

use pir_core::{Attribute, Subject, Type, TypeEnv};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Consistency by counting, one subject at a time. A subject's
/// assumptions come from a single origin, so they are all `proc` or all
/// channels over one object list; unique assumptions come only from a
/// unique origin, which can hand out at most `j` affine halves alongside a
/// surviving `unq(j)`, and no unrestricted ones.
pub fn consistent(env: &TypeEnv) -> bool {
    env.subjects().iter().all(|s| {
        let ts: Vec<&Type> = env.types_of(s).collect();
        if ts.iter().all(|t| **t == Type::Proc) {
            return true;
        }
        let mut lists = Vec::new();
        let (mut unq, mut aff, mut unr) = (Vec::new(), 0u32, 0u32);
        for t in &ts {
            let Type::Chan(objs, a) = t else { return false };
            lists.push(objs);
            match a {
                Attribute::Unique(j) => unq.push(*j),
                Attribute::Affine => aff += 1,
                Attribute::Unrestricted => unr += 1,
            }
        }
        if lists.windows(2).any(|w| w[0] != w[1]) {
            return false;
        }
        match unq.as_slice() {
            [] => true,
            [j] => unr == 0 && aff <= *j,
            _ => false,
        }
    })
}

fn random_list<R: Rng>(rng: &mut R) -> Vec<Type> {
    let unr = Type::chan(vec![], Attribute::Unrestricted);
    let aff = Type::chan(vec![], Attribute::Affine);
    let choices = [vec![], vec![unr.clone()], vec![unr.clone(), unr], vec![aff]];
    choices.choose(rng).expect("non-empty").clone()
}

fn random_type<R: Rng>(rng: &mut R) -> Type {
    if rng.random_bool(0.1) {
        return Type::Proc;
    }
    let a = match rng.random_range(0..4) {
        0 => Attribute::Affine,
        1 => Attribute::Unrestricted,
        _ => Attribute::Unique(rng.random_range(0..3)),
    };
    Type::chan(random_list(rng), a)
}

/// A random partial map over the subjects `u0..u{n-1}`.
pub fn random_origin<R: Rng>(rng: &mut R, n: usize) -> TypeEnv {
    (0..n)
        .map(|i| (Subject::Id(pir_core::Ident::name(format!("u{i}"))), random_type(rng)))
        .collect()
}

fn halves(t: &Type) -> Vec<(Type, Type)> {
    match t {
        Type::Proc => vec![(Type::Proc, Type::Proc)],
        Type::Chan(_, Attribute::Unrestricted) => vec![(t.clone(), t.clone())],
        Type::Chan(o, Attribute::Unique(i)) => {
            let aff = Type::chan(o.clone(), Attribute::Affine);
            let next = Type::chan(o.clone(), Attribute::Unique(i + 1));
            vec![(aff.clone(), next.clone()), (next, aff)]
        }
        Type::Chan(_, Attribute::Affine) => vec![],
    }
}

fn supertypes(t: &Type) -> Vec<Type> {
    let Type::Chan(o, a) = t else { return vec![] };
    let with = |a| Type::chan(o.clone(), a);
    match a {
        Attribute::Affine => vec![],
        Attribute::Unrestricted => vec![with(Attribute::Affine)],
        Attribute::Unique(i) => vec![
            with(Attribute::Affine),
            with(Attribute::Unrestricted),
            with(Attribute::Unique(i + 1)),
            with(Attribute::Unique(i + 2)),
        ],
    }
}

/// Applies `moves` random structural steps to `origin`.
pub fn drift<R: Rng>(rng: &mut R, origin: &TypeEnv, moves: usize) -> TypeEnv {
    let mut env = origin.clone();
    for _ in 0..moves {
        let entries = env.entries().to_vec();
        let Some((s, t)) = entries.choose(rng).cloned() else { break };
        match rng.random_range(0..10) {
            0..=5 => {
                if let Some((a, b)) = halves(&t).choose(rng).cloned() {
                    env.remove_one(&s, &t);
                    env.insert(s.clone(), a);
                    env.insert(s, b);
                }
            }
            6 => {
                env.remove_one(&s, &t);
            }
            7 | 8 => {
                if let Some(u) = supertypes(&t).choose(rng).cloned() {
                    env.remove_one(&s, &t);
                    env.insert(s, u);
                }
            }
            _ => {
                if matches!(t, Type::Chan(_, Attribute::Unique(0))) {
                    env.remove_one(&s, &t);
                    env.insert(s, Type::chan(random_list(rng), Attribute::Unique(0)));
                }
            }
        }
    }
    env
}

#[cfg(test)]
mod tests {
    use super::*;
    use pir_core::parser::parse_judgment;

    fn env(text: &str) -> TypeEnv {
        parse_judgment(&format!("{text} |- nil"), &[]).unwrap().0
    }

    #[test]
    fn closed_form_cases() {
        assert!(consistent(&env("{u: ch()@unq(1), u: ch()@aff}")));
        assert!(!consistent(&env("{u: ch()@unq(0), u: ch()@aff}")));
        assert!(!consistent(&env("{u: ch()@unr, u: ch()@unq(2)}")));
        assert!(consistent(&env("{u: ch()@unr, u: ch()@aff, u: ch()@aff}")));
        assert!(!consistent(&env("{u: ch()@unr, u: ch(ch()@unr)@unr}")));
    }
}
