//! Single-node corruptions of a derivation.

use pir_core::typeck::{Derivation, TRule};
use pir_core::{Ident, ProcVar, Process, Subject, Type};
use rand::seq::IndexedRandom;
use rand::Rng;

#[derive(Clone, Debug)]
pub struct Mutant {
    pub description: String,
    pub derivation: Derivation,
}

/// One random corruption: a changed rule name, a dropped premise, a process
/// replaced by an unbound process variable, or an extra assumption in a
/// non-root environment.
pub fn mutate<R: Rng>(rng: &mut R, d: &Derivation) -> Mutant {
    let paths: Vec<Vec<usize>> = d.nodes().into_iter().map(|(p, _)| p).collect();
    let mut m = d.clone();
    loop {
        let path = paths.choose(rng).expect("non-empty").clone();
        let node = m.get_mut(&path).expect("path exists");
        let at = format!("{path:?}");
        match rng.random_range(0..4) {
            0 => {
                let others: Vec<&TRule> = TRule::ALL.iter().filter(|r| **r != node.rule).collect();
                let r = (*others.choose(rng).expect("non-empty")).clone();
                let description = format!("rule at {at}: {} -> {r}", node.rule);
                node.rule = r;
                return Mutant {
                    description,
                    derivation: m,
                };
            }
            1 if !node.premises.is_empty() => {
                let i = rng.random_range(0..node.premises.len());
                node.premises.remove(i);
                return Mutant {
                    description: format!("premise {i} dropped at {at}"),
                    derivation: m,
                };
            }
            2 => {
                node.process = Process::PVar(ProcVar::new("Zz"));
                return Mutant {
                    description: format!("process replaced at {at}"),
                    derivation: m,
                };
            }
            3 if !path.is_empty() => {
                node.env.insert(
                    Subject::Id(Ident::name("zz")),
                    Type::chan(vec![], pir_core::Attribute::Unrestricted),
                );
                return Mutant {
                    description: format!("assumption added at {at}"),
                    derivation: m,
                };
            }
            _ => {}
        }
    }
}
