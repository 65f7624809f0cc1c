use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{error_witnesses, is_terminated, successors, ErrorWitness, StepLabel};
use crate::syntax::{ConfigError, Configuration};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HaltReason {
    Terminated,
    Stuck,
    /// The current configuration has error redexes.
    Error(Vec<ErrorWitness>),
    StepLimit,
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltReason::Terminated => f.write_str("terminated"),
            HaltReason::Stuck => f.write_str("stuck"),
            HaltReason::Error(ws) => {
                f.write_str("error")?;
                for w in ws {
                    write!(f, " {w}")?;
                }
                Ok(())
            }
            HaltReason::StepLimit => f.write_str("step-limit"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub trace: Vec<(StepLabel, Configuration)>,
    pub last: Configuration,
    pub halt: HaltReason,
}

/// Executes with a seeded uniform scheduler. Halts as soon as an error
/// redex is present, when no step is possible, or after `max_steps`.
pub fn run(c: &Configuration, seed: u64, max_steps: usize) -> Result<RunResult, ConfigError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = c.clone();
    let mut trace = Vec::new();
    loop {
        let ws = error_witnesses(&current)?;
        if !ws.is_empty() {
            return Ok(RunResult {
                trace,
                last: current,
                halt: HaltReason::Error(ws),
            });
        }
        let mut succ = successors(&current)?;
        if succ.is_empty() {
            let halt = if is_terminated(&current) {
                HaltReason::Terminated
            } else {
                HaltReason::Stuck
            };
            return Ok(RunResult {
                trace,
                last: current,
                halt,
            });
        }
        if trace.len() >= max_steps {
            return Ok(RunResult {
                trace,
                last: current,
                halt: HaltReason::StepLimit,
            });
        }
        let pick = rng.random_range(0..succ.len());
        let (label, next) = succ.swap_remove(pick);
        trace.push((label, next.clone()));
        current = next;
    }
}
