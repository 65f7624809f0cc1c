use pir_core::parser::{parse_judgment, parse_type};
use pir_core::{parse, parse_process, Process};
use pir_oracles::gen;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn generated(seed: u64) -> Process {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen::process(&mut rng, 8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let p = generated(seed);
        let text = p.to_string();
        let q = parse_process(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(q, p, "{}", text);
    }

    #[test]
    fn configurations_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = gen::configuration(&mut rng, 6);
        let f = pir_core::SourceFile { assumptions: vec![], store: Some(c.store.clone()), body: c.process.clone() };
        let back = parse(&f.to_string()).unwrap();
        prop_assert_eq!(back.configuration(), c);
    }
}

#[test]
fn corpus_files_round_trip() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let src = std::fs::read_to_string(&path).unwrap();
        let f = parse(&src).unwrap();
        let again = parse(&f.to_string()).unwrap();
        assert_eq!(again, f, "{}", path.display());
    }
}

#[test]
fn types_round_trip() {
    for t in [
        "proc",
        "ch()@unr",
        "ch(ch()@aff, proc)@unq(3)",
        "ch(ch(ch()@unr)@unq(0))@unr",
    ] {
        assert_eq!(parse_type(t).unwrap().to_string(), t);
    }
}

#[test]
fn judgments_round_trip() {
    let (env, p) = parse_judgment("{a: ch()@unr, X: proc} |- a!().X", &[]).unwrap();
    let text = format!("{env} |- {p}");
    assert_eq!(parse_judgment(&text, &[]).unwrap(), (env, p));
}

#[test]
fn parse_errors_carry_positions() {
    let e = parse_process("a!(b.nil").unwrap_err();
    assert_eq!(e.line, 1);
    assert!(e.column > 1);
    assert!(parse_process("a?(x, x).nil").is_err());
}
