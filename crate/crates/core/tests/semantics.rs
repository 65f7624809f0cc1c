use pir_core::congruence::{alpha_eq, canonical_form};
use pir_core::semantics::{explore, replay, run, successors, ExploreBounds, HaltReason};
use pir_core::{parse, Configuration};
use pir_oracles::equiv::{congruent, congruent_configs, same_multiset};
use pir_oracles::{gen, step};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn load(name: &str) -> Configuration {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    parse(&std::fs::read_to_string(path).unwrap()).unwrap().configuration()
}

#[test]
fn successors_match_reference_on_random_configurations() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut with_steps = 0;
    for i in 0..300 {
        let c = gen::configuration(&mut rng, 6);
        let ours: Vec<(&str, Configuration)> = successors(&c)
            .unwrap()
            .into_iter()
            .map(|(l, d)| (l.rule.as_str(), d))
            .collect();
        let reference = step::reducts(&c);
        with_steps += usize::from(!reference.is_empty());
        assert!(
            same_multiset(&ours, &reference, |a, b| a.0 == b.0 && congruent_configs(&a.1, &b.1)),
            "case {i}: {}\nours: {:?}\nreference: {:?}",
            c.process,
            ours.iter().map(|(r, d)| format!("{r} {}", d.process)).collect::<Vec<_>>(),
            reference.iter().map(|(r, d)| format!("{r} {}", d.process)).collect::<Vec<_>>(),
        );
    }
    assert!(with_steps > 100, "generator too weak: {with_steps}");
}

#[test]
fn canonical_form_is_congruent_and_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let p = gen::process(&mut rng, 8);
        let c = canonical_form(&p);
        assert!(congruent(&p, &c), "{p}  vs  {c}");
        assert_eq!(canonical_form(&c), c, "{p}");
    }
}

#[test]
fn congruent_inputs_have_equal_canonical_forms() {
    let pairs = [
        ("a!().nil | b!().nil", "b!().nil | a!().nil"),
        ("new n:alloc. (n!().nil | b!().nil)", "b!().nil | new n:alloc. n!().nil"),
        ("new n:alloc. new m:dealloc. n!(m).nil", "new m:dealloc. new n:alloc. n!(m).nil"),
        ("a?(x). (x!().nil | nil)", "a?(y). y!().nil"),
    ];
    for (l, r) in pairs {
        let (p, q) = (pir_core::parse_process(l).unwrap(), pir_core::parse_process(r).unwrap());
        let (cp, cq) = (canonical_form(&p), canonical_form(&q));
        assert!(alpha_eq(&cp, &cq), "{l} / {r}: {cp} vs {cq}");
    }
}

#[test]
fn explore_corpus_expectations() {
    let safe = [
        "nil.pir",
        "alloc_free.pir",
        "client0_system.pir",
        "client1_system.pir",
        "client2_system.pir",
        "client3_system.pir",
        "client4_system.pir",
        "heap_system.pir",
        "infheap.pir",
        "consistency_example.pir",
        "leak.pir",
    ];
    for f in safe {
        let r = explore(&load(f), ExploreBounds::default()).unwrap();
        assert!(r.errors.is_empty(), "{f}: {:?}", r.errors);
    }
    for f in ["client_err_system.pir", "client2_unsafe_system.pir", "client3_unsafe_system.pir"] {
        let c = load(f);
        let r = explore(&c, ExploreBounds::default()).unwrap();
        assert!(!r.errors.is_empty(), "{f}");
        for e in &r.errors {
            let end = replay(&c, &e.steps).unwrap();
            assert_eq!(pir_core::semantics::error_witnesses(&end).unwrap(), e.witnesses);
        }
    }
}

#[test]
fn leak_is_stuck_not_erroneous() {
    let r = explore(&load("leak.pir"), ExploreBounds::default()).unwrap();
    assert!(r.errors.is_empty());
    assert!(r.stuck > 0);
}

#[test]
fn runs_are_reproducible() {
    let c = load("client2_system.pir");
    for seed in 0..5 {
        let a = run(&c, seed, 50).unwrap();
        let b = run(&c, seed, 50).unwrap();
        let la: Vec<_> = a.trace.iter().map(|t| t.0.clone()).collect();
        let lb: Vec<_> = b.trace.iter().map(|t| t.0.clone()).collect();
        assert_eq!(la, lb);
        assert_ne!(a.halt, HaltReason::Error(vec![]));
    }
}
