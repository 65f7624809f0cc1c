use std::collections::hash_map::DefaultHasher;
use std::collections::{HashSet, VecDeque};
use std::hash::{Hash, Hasher};

use serde::Serialize;

use super::{error_witnesses, is_terminated, state_key, successors, ErrorWitness, Rule, StepLabel};
use crate::congruence::{alpha_key, canonical_flat, drop_dead_scopes};
use crate::syntax::{ConfigError, Configuration};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExploreBounds {
    pub max_depth: usize,
    /// rRec steps allowed per recursion term along one path.
    pub max_unfoldings: u32,
    pub max_states: usize,
    /// Identify states that differ only by unused deallocated scopes.
    pub drop_dead_scopes: bool,
}

impl Default for ExploreBounds {
    fn default() -> Self {
        ExploreBounds {
            max_depth: 20,
            max_unfoldings: 2,
            max_states: 100_000,
            drop_dead_scopes: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErrorTrace {
    pub steps: Vec<StepLabel>,
    pub witnesses: Vec<ErrorWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExploreReport {
    pub states: usize,
    pub truncated: bool,
    pub errors: Vec<ErrorTrace>,
    pub stuck: usize,
    pub terminated: usize,
    pub bounds: ExploreBounds,
}

struct Node {
    config: Configuration,
    depth: usize,
    parent: Option<(usize, StepLabel)>,
    unfolds: Vec<(u64, u32)>,
}

fn site_hash(c: &Configuration, label: &StepLabel) -> u64 {
    let flat = canonical_flat(&c.process);
    let mut h = DefaultHasher::new();
    alpha_key(&flat.components[label.locus[0]]).hash(&mut h);
    h.finish()
}

fn path_to(nodes: &[Node], mut i: usize) -> Vec<StepLabel> {
    let mut steps = Vec::new();
    while let Some((p, l)) = &nodes[i].parent {
        steps.push(l.clone());
        i = *p;
    }
    steps.reverse();
    steps
}

/// Breadth-first exploration of the reachable configurations within bounds.
pub fn explore(c: &Configuration, bounds: ExploreBounds) -> Result<ExploreReport, ConfigError> {
    c.ensure_closed()?;
    let key = |c: &Configuration| {
        if bounds.drop_dead_scopes {
            state_key(&Configuration {
                store: c.store.clone(),
                process: drop_dead_scopes(&c.process),
            })
        } else {
            state_key(c)
        }
    };
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(key(c));
    let mut nodes = vec![Node {
        config: c.clone(),
        depth: 0,
        parent: None,
        unfolds: Vec::new(),
    }];
    let mut queue = VecDeque::from([0usize]);
    let mut report = ExploreReport {
        states: 1,
        truncated: false,
        errors: Vec::new(),
        stuck: 0,
        terminated: 0,
        bounds,
    };
    while let Some(i) = queue.pop_front() {
        let config = nodes[i].config.clone();
        let witnesses = error_witnesses(&config)?;
        if !witnesses.is_empty() {
            report.errors.push(ErrorTrace {
                steps: path_to(&nodes, i),
                witnesses,
            });
        }
        let succ = successors(&config)?;
        if succ.is_empty() {
            if is_terminated(&config) {
                report.terminated += 1;
            } else {
                report.stuck += 1;
            }
            continue;
        }
        if nodes[i].depth >= bounds.max_depth {
            report.truncated = true;
            continue;
        }
        for (label, next) in succ {
            let mut unfolds = nodes[i].unfolds.clone();
            if label.rule == Rule::Rec {
                let site = site_hash(&config, &label);
                match unfolds.iter_mut().find(|(s, _)| *s == site) {
                    Some((_, n)) if *n >= bounds.max_unfoldings => {
                        report.truncated = true;
                        continue;
                    }
                    Some((_, n)) => *n += 1,
                    None if bounds.max_unfoldings == 0 => {
                        report.truncated = true;
                        continue;
                    }
                    None => unfolds.push((site, 1)),
                }
            }
            if !seen.insert(key(&next)) {
                continue;
            }
            if report.states >= bounds.max_states {
                report.truncated = true;
                continue;
            }
            report.states += 1;
            nodes.push(Node {
                config: next,
                depth: nodes[i].depth + 1,
                parent: Some((i, label)),
                unfolds,
            });
            queue.push_back(nodes.len() - 1);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("step {index} ({label}) is not enabled")]
    NotEnabled { index: usize, label: String },
}

/// Re-executes a sequence of step labels from `c`.
pub fn replay(c: &Configuration, steps: &[StepLabel]) -> Result<Configuration, ReplayError> {
    let mut current = c.clone();
    for (index, label) in steps.iter().enumerate() {
        current = successors(&current)?
            .into_iter()
            .find(|(l, _)| l == label)
            .map(|(_, next)| next)
            .ok_or_else(|| ReplayError::NotEnabled {
                index,
                label: label.to_string(),
            })?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn config(src: &str) -> Configuration {
        parse(src).unwrap().configuration()
    }

    #[test]
    fn nil_is_one_state() {
        let r = explore(&config("nil"), ExploreBounds {
            max_depth: 10,
            max_unfoldings: 2,
            max_states: 1000,
            drop_dead_scopes: true,
        })
        .unwrap();
        assert_eq!(r.states, 1);
        assert!(r.errors.is_empty());
        assert!(!r.truncated);
        assert_eq!(r.terminated, 1);
    }

    #[test]
    fn error_traces_replay() {
        let c = config("store { c: alloc } in free c. nil | c!().nil");
        let r = explore(&c, ExploreBounds::default()).unwrap();
        assert_eq!(r.errors.len(), 1);
        let end = replay(&c, &r.errors[0].steps).unwrap();
        assert_eq!(error_witnesses(&end).unwrap(), r.errors[0].witnesses);
    }

    #[test]
    fn unfolding_bound_truncates() {
        let c = config("rec X. alloc x. X");
        let r = explore(&c, ExploreBounds::default()).unwrap();
        assert!(r.truncated);
        assert!(r.errors.is_empty());
    }

    #[test]
    fn state_bound_truncates() {
        let c = config("alloc x. alloc y. alloc z. nil");
        let r = explore(&c, ExploreBounds {
            max_states: 2,
            ..ExploreBounds::default()
        })
        .unwrap();
        assert_eq!(r.states, 2);
        assert!(r.truncated);
    }
}
