//! Acceptance run. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use pir_core::consistency::lemma1_check;
use pir_core::semantics::{error_witnesses, explore, replay, successors, ExploreBounds};
use pir_core::typeck::{
    check_config, parse_derivation, subject_reduction_probe, validate, ProbeBounds,
};
use pir_core::types::{decrement, split, subtype, Decrement};
use pir_core::{parse, parse_process, Attribute, Configuration, Ident, SourceFile, Subject, Type, TypeEnv};
use pir_oracles::consistency::{consistent, drift, random_origin};
use pir_oracles::equiv::{congruent_configs, same_multiset};
use pir_oracles::{gen, mutate, step};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHECK_LIMIT: Duration = Duration::from_secs(30);
const EXPLORE_LIMIT: Duration = Duration::from_secs(60);

const ACCEPTED: [&str; 11] = [
    "nil.pir",
    "alloc_free.pir",
    "client0_system.pir",
    "client1_system.pir",
    "client2_system.pir",
    "client3_system.pir",
    "heap_system.pir",
    "client4_system.pir",
    "infheap.pir",
    "consistency_example.pir",
    "leak.pir",
];

const REJECTED: [&str; 3] = [
    "client_err_system.pir",
    "client2_unsafe_system.pir",
    "client3_unsafe_system.pir",
];

type Outcome = Result<String, String>;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus")).join(name)
}

fn load(name: &str) -> SourceFile {
    parse(&std::fs::read_to_string(corpus(name)).unwrap()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_verdicts() -> Outcome {
    let cases: Vec<(&str, i32)> = [
        "client0_system.pir",
        "client1_system.pir",
        "client2_system.pir",
        "client3_system.pir",
        "heap_system.pir",
        "client4_system.pir",
        "infheap.pir",
    ]
    .into_iter()
    .map(|f| (f, 0))
    .chain(REJECTED.into_iter().map(|f| (f, 1)))
    .collect();
    let start = Instant::now();
    for (f, want) in &cases {
        let o = Command::new(env!("CARGO_BIN_EXE_pir"))
            .arg("check")
            .arg(corpus(f))
            .output()
            .map_err(|e| e.to_string())?;
        let got = o.status.code().unwrap_or(-1);
        ensure(got == *want, || format!("{f}: exit {got}, expected {want}"))?;
    }
    let t = start.elapsed();
    ensure(t < CHECK_LIMIT, || format!("took {t:.2?}, limit {CHECK_LIMIT:?}"))?;
    Ok(format!("{}/{} verdicts correct in {t:.2?} (limit {CHECK_LIMIT:?})", cases.len(), cases.len()))
}

fn explore_corpus() -> Outcome {
    let bounds = ExploreBounds {
        max_depth: 20,
        max_unfoldings: 2,
        max_states: 100_000,
        ..ExploreBounds::default()
    };
    let start = Instant::now();
    let mut states = 0;
    for f in ACCEPTED {
        let r = explore(&load(f).configuration(), bounds).map_err(|e| e.to_string())?;
        states += r.states;
        ensure(r.errors.is_empty(), || format!("{f}: {} error traces", r.errors.len()))?;
    }
    let c = load("client_err_system.pir").configuration();
    let r = explore(&c, bounds).map_err(|e| e.to_string())?;
    ensure(!r.errors.is_empty(), || "client_err: no error found".into())?;
    for e in &r.errors {
        let end = replay(&c, &e.steps).map_err(|e| e.to_string())?;
        let w = error_witnesses(&end).map_err(|e| e.to_string())?;
        ensure(w == e.witnesses, || "client_err: replay disagrees".into())?;
    }
    let t = start.elapsed();
    ensure(t < EXPLORE_LIMIT, || format!("took {t:.2?}, limit {EXPLORE_LIMIT:?}"))?;
    Ok(format!(
        "0 errors in {} accepted files ({states} states), client_err {} replayed error(s), {t:.2?} (limit {EXPLORE_LIMIT:?})",
        ACCEPTED.len(),
        r.errors.len()
    ))
}

fn subject_reduction() -> Outcome {
    let bounds = ProbeBounds {
        depth: 20,
        ..ProbeBounds::default()
    };
    let mut states = 0;
    for f in ACCEPTED {
        let src = load(f);
        let r = subject_reduction_probe(&src.env(), &src.configuration(), bounds).map_err(|e| format!("{f}: {e}"))?;
        ensure(r.falsifications.is_empty(), || {
            format!("{f}: {} falsifications, first: {}", r.falsifications.len(), r.falsifications[0].reason)
        })?;
        ensure(r.inconclusive.is_empty(), || format!("{f}: {} inconclusive", r.inconclusive.len()))?;
        states += r.states;
    }
    Ok(format!("0 falsifications over {states} typed states, depth 20"))
}

fn ch(a: Attribute) -> Type {
    Type::chan(vec![], a)
}

fn lemma() -> Outcome {
    let u = Subject::Id(Ident::name("u"));
    let w = lemma1_check(&TypeEnv::new(), &u, &[], Attribute::Unique(1), Attribute::Affine)
        .map_err(|e| format!("instance: {e}"))?;
    ensure(w.origin == TypeEnv::new().with(u.clone(), ch(Attribute::Unique(0))), || {
        format!("instance: unexpected origin {}", w.origin)
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 500 {
        attempts += 1;
        ensure(attempts < 100_000, || "generator starved".into())?;
        let origin = random_origin(&mut rng, 2);
        let moves = rng.random_range(1..10);
        let env = drift(&mut rng, &origin, moves);
        let entries = env.entries().to_vec();
        let mut pick = None;
        for (i, (s1, t1)) in entries.iter().enumerate() {
            for (s2, t2) in entries.iter().skip(i + 1) {
                let (Type::Chan(o1, a1), Type::Chan(o2, a2)) = (t1, t2) else { continue };
                if s1 == s2
                    && o1 == o2
                    && decrement(t1) != Decrement::Undefined
                    && decrement(t2) != Decrement::Undefined
                {
                    pick = Some((s1.clone(), o1.clone(), *a1, *a2, t1.clone(), t2.clone()));
                }
            }
        }
        let Some((s, objs, a1, a2, t1, t2)) = pick else { continue };
        ensure(consistent(&env), || format!("oracle rejects generated {env}"))?;
        let rest = env.without(&s, &t1).unwrap().without(&s, &t2).unwrap();
        let w = lemma1_check(&rest, &s, &objs, a1, a2).map_err(|e| format!("{env}: {e}"))?;
        let after = w.apply().ok_or("witness does not apply")?;
        ensure(consistent(&after), || format!("oracle rejects decremented {after}"))?;
        checked += 1;
    }
    Ok(format!("instance holds, {checked} random environments checked"))
}

fn algebra() -> Outcome {
    use Attribute::*;
    for i in 0..4 {
        for k in 1..=8u32 {
            let mut cur = ch(Unique(i));
            for _ in 0..k {
                let (a, b) = split(&cur)
                    .into_iter()
                    .find(|(a, _)| *a == ch(Affine))
                    .ok_or_else(|| format!("no affine split of {cur}"))?;
                ensure(a == ch(Affine), || "bad half".into())?;
                cur = b;
            }
            ensure(cur == ch(Unique(i + k)), || format!("unq({i}) after {k} splits gave {cur}"))?;
        }
    }
    ensure(decrement(&ch(Unique(0))) == Decrement::Undefined, || "decrement(unq(0)) defined".into())?;
    ensure(subtype(&ch(Unique(0)), &ch(Unrestricted)), || "unq(0) <= unr fails".into())?;
    ensure(!subtype(&ch(Affine), &ch(Unrestricted)), || "aff <= unr holds".into())?;
    Ok("split chain k<=8, decrement(unq(0)) undefined, unq(0) <= unr, not aff <= unr".into())
}

fn certificates() -> Outcome {
    let mut derivations = Vec::new();
    for f in ACCEPTED {
        let src = load(f);
        let d = check_config(&src.env(), &src.configuration()).map_err(|e| format!("{f}: {e}"))?;
        let back = parse_derivation(&d.to_text()).map_err(|e| format!("{f}: {e}"))?;
        validate(&back).map_err(|e| format!("{f}: {e}"))?;
        derivations.push(d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..50 {
        let m = mutate::mutate(&mut rng, &derivations[i % derivations.len()]);
        ensure(validate(&m.derivation).is_err(), || format!("mutant {i} accepted: {}", m.description))?;
    }
    Ok(format!("{} derivations valid, 50/50 mutants rejected", derivations.len()))
}

fn syntax_and_steps() -> Outcome {
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = gen::process(&mut rng, 8);
        let text = p.to_string();
        let q = parse_process(&text).map_err(|e| format!("seed {seed}: {text}: {e}"))?;
        ensure(q == p, || format!("seed {seed}: {text} reparsed differently"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..300 {
        let c = gen::configuration(&mut rng, 6);
        let ours: Vec<(&str, Configuration)> = successors(&c)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|(l, d)| (l.rule.as_str(), d))
            .collect();
        let reference = step::reducts(&c);
        ensure(
            same_multiset(&ours, &reference, |a, b| a.0 == b.0 && congruent_configs(&a.1, &b.1)),
            || format!("case {i}: successors of {} disagree", c.process),
        )?;
    }
    Ok("1000 ASTs round-trip, 300 configurations agree with the reference stepper".into())
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 7] = [
        (1, check_verdicts),
        (2, explore_corpus),
        (3, subject_reduction),
        (4, lemma),
        (5, algebra),
        (6, certificates),
        (7, syntax_and_steps),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match r {
            Ok(detail) => println!("criterion {n}: PASS  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL  {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
