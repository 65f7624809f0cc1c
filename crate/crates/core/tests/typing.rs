use pir_core::semantics::successors;
use pir_core::typeck::{
    check_config, infer, parse_derivation, subject_reduction_probe, validate, CheckError, ProbeBounds,
};
use pir_core::{parse, Attribute, Ident, Subject, Type, TypeEnv};
use pir_oracles::{gen, mutate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn load(name: &str) -> pir_core::SourceFile {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

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

#[test]
fn corpus_verdicts_and_certificates() {
    for f in ACCEPTED {
        let src = load(f);
        let d = check_config(&src.env(), &src.configuration()).unwrap_or_else(|e| panic!("{f}: {e}"));
        validate(&d).unwrap_or_else(|e| panic!("{f}: {e}"));
        let text = d.to_text();
        let back = parse_derivation(&text).unwrap_or_else(|e| panic!("{f}: {e}"));
        assert_eq!(back, d, "{f}");
    }
    for f in REJECTED {
        let src = load(f);
        let r = check_config(&src.env(), &src.configuration());
        assert!(matches!(r, Err(CheckError::NotTypable(_))), "{f}: {r:?}");
    }
}

const WORKED: &str = "\
tCon {a: ch(ch()@aff)@unr, u: ch()@unq(0)} |- a!(u).nil | a?(x).u?().(free u.nil | a!(x).nil)
  tCon {a: ch(ch()@aff)@unr, a: ch(ch()@aff)@unr, u: ch()@unq(0)} |- a!(u).nil | a?(x).u?().(free u.nil | a!(x).nil)
    tPar {a: ch(ch()@aff)@unr, a: ch(ch()@aff)@unr, u: ch()@aff, u: ch()@unq(1)} |- a!(u).nil | a?(x).u?().(free u.nil | a!(x).nil)
      tOut {a: ch(ch()@aff)@unr, u: ch()@aff} |- a!(u).nil
        tWeak {a: ch(ch()@aff)@unr} |- nil
          tNil {} |- nil
      tIn {a: ch(ch()@aff)@unr, u: ch()@unq(1)} |- a?(x).u?().(free u.nil | a!(x).nil)
        tIn {a: ch(ch()@aff)@unr, u: ch()@unq(1), x: ch()@aff} |- u?().(free u.nil | a!(x).nil)
          tPar {a: ch(ch()@aff)@unr, u: ch()@unq(0), x: ch()@aff} |- free u.nil | a!(x).nil
            tFree {u: ch()@unq(0)} |- free u.nil
              tNil {} |- nil
            tOut {a: ch(ch()@aff)@unr, x: ch()@aff} |- a!(x).nil
              tWeak {a: ch(ch()@aff)@unr} |- nil
                tNil {} |- nil
";

#[test]
fn worked_derivation_is_valid() {
    let d = parse_derivation(WORKED).unwrap();
    assert_eq!(d.size(), 14);
    validate(&d).unwrap();
}

#[test]
fn worked_derivation_with_wrong_split_is_rejected_at_the_split() {
    let bad = WORKED.replacen(
        "    tPar {a: ch(ch()@aff)@unr, a: ch(ch()@aff)@unr, u: ch()@aff, u: ch()@unq(1)}",
        "    tPar {a: ch(ch()@aff)@unr, a: ch(ch()@aff)@unr, u: ch()@aff, u: ch()@unq(0)}",
        1,
    );
    assert_ne!(bad, WORKED);
    let e = validate(&parse_derivation(&bad).unwrap()).unwrap_err();
    assert_eq!(e.path, vec![0]);
    assert_eq!(e.rule, "tCon");
}

#[test]
fn residual_of_the_worked_example_types() {
    let src = load("consistency_example.pir");
    let c = src.configuration();
    let next = successors(&c).unwrap();
    assert_eq!(next.len(), 1);
    let d = check_config(&src.env(), &next[0].1).unwrap();
    validate(&d).unwrap();
    // The residual needs u: unq(0) and u: aff side by side.
    let inconsistent = d
        .nodes()
        .into_iter()
        .any(|(_, n)| pir_core::consistency::is_consistent(&n.env).is_err());
    assert!(inconsistent);
}

#[test]
fn mutants_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let derivations: Vec<_> = ACCEPTED
        .iter()
        .map(|f| {
            let src = load(f);
            check_config(&src.env(), &src.configuration()).unwrap()
        })
        .collect();
    for i in 0..50 {
        let d = &derivations[i % derivations.len()];
        let m = mutate::mutate(&mut rng, d);
        assert!(validate(&m.derivation).is_err(), "mutant {i} survived: {}", m.description);
    }
}

#[test]
fn subject_reduction_on_the_corpus() {
    for f in ACCEPTED {
        let src = load(f);
        let r = subject_reduction_probe(&src.env(), &src.configuration(), ProbeBounds::default()).unwrap();
        assert!(r.falsifications.is_empty(), "{f}: {:?}", r.falsifications[0]);
        assert!(r.inconclusive.is_empty(), "{f}");
    }
}

fn random_type<R: Rng>(rng: &mut R, depth: u32) -> Type {
    let a = match rng.random_range(0..4) {
        0 => Attribute::Affine,
        1 => Attribute::Unrestricted,
        _ => Attribute::Unique(rng.random_range(0..2)),
    };
    let n = if depth == 0 { 0 } else { rng.random_range(0..=2) };
    Type::chan((0..n).map(|_| random_type(rng, depth - 1)).collect(), a)
}

#[test]
fn inferred_derivations_validate_on_random_processes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut typed = 0;
    for _ in 0..1000 {
        let p = gen::process(&mut rng, 5);
        let env: TypeEnv = p
            .free_names()
            .into_iter()
            .map(|n| (Subject::Id(Ident::Name(n)), random_type(&mut rng, 1)))
            .collect();
        if let Ok(d) = infer(&env, &p) {
            validate(&d).unwrap_or_else(|e| panic!("{env} |- {p}: {e}"));
            typed += 1;
        }
    }
    assert!(typed > 60, "only {typed} typed");
}
