use std::collections::{HashSet, VecDeque};

use super::derivation::Derivation;
use super::infer::{infer_with, Failure, InferError, InferOptions};
use crate::semantics::{state_key, successors, Rule, StepLabel};
use crate::syntax::{ChannelState, ConfigError, Configuration, Ident, Name};
use crate::types::{decrement, Decrement, Subject, TypeEnv};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("environment is not a partial map: `{0}` has several assumptions")]
    NotPartialMap(String),
    #[error("channel not allocated: `{0}`")]
    NotAllocated(String),
    #[error("no assumption for free name `{0}`")]
    Uncovered(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("not typable: {0}")]
    NotTypable(Box<Failure>),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl CheckError {
    pub fn is_inconclusive(&self) -> bool {
        matches!(self, CheckError::Inconclusive(_))
    }
}

pub fn check_config(env: &TypeEnv, c: &Configuration) -> Result<Derivation, CheckError> {
    check_config_with(env, c, InferOptions::default())
}

pub fn check_config_with(
    env: &TypeEnv,
    c: &Configuration,
    opts: InferOptions,
) -> Result<Derivation, CheckError> {
    c.ensure_closed()?;
    if !env.is_partial_map() {
        let e = env.entries();
        let dup = e
            .windows(2)
            .find(|w| w[0].0 == w[1].0)
            .map(|w| w[0].0.text().to_string())
            .unwrap_or_default();
        return Err(CheckError::NotPartialMap(dup));
    }
    for (s, _) in env.entries() {
        if let Subject::Id(Ident::Name(n)) = s {
            if c.store.get(n) != Some(&ChannelState::Allocated) {
                return Err(CheckError::NotAllocated(n.0.clone()));
            }
        }
    }
    for n in c.process.free_names() {
        if !env.contains_subject(&Subject::Id(Ident::Name(n.clone()))) {
            return Err(CheckError::Uncovered(n.0));
        }
    }
    infer_with(env, &c.process, opts).map_err(|e| match e {
        InferError::NotTypable(f) => CheckError::NotTypable(f),
        InferError::Inconclusive(s) => CheckError::Inconclusive(s),
    })
}

/// Candidate environments for the target of a step, most likely first.
pub fn successor_envs(env: &TypeEnv, label: &StepLabel) -> Vec<TypeEnv> {
    let s = Subject::Id(Ident::Name(Name::new(label.subject.clone())));
    let Some(t) = env.types_of(&s).next().cloned() else {
        return vec![env.clone()];
    };
    match label.rule {
        Rule::Com => {
            let mut out = vec![env.clone()];
            let mut cur = Some(t.clone());
            for _ in 0..2 {
                let Some(ty) = cur.take() else { break };
                let mut e = env.without(&s, &t).expect("present");
                match decrement(&ty) {
                    Decrement::Type(d) => {
                        e.insert(s.clone(), d.clone());
                        cur = Some(d);
                    }
                    Decrement::Consumed => {}
                    Decrement::Undefined => break,
                }
                if !out.contains(&e) {
                    out.push(e);
                }
            }
            out
        }
        Rule::Free => vec![env.without(&s, &t).expect("present")],
        _ => vec![env.clone()],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeBounds {
    pub depth: usize,
    pub max_states: usize,
    pub infer: InferOptions,
}

impl Default for ProbeBounds {
    fn default() -> Self {
        ProbeBounds {
            depth: 20,
            max_states: 2_000,
            infer: InferOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeFinding {
    pub trace: Vec<StepLabel>,
    pub configuration: Configuration,
    pub tried: Vec<TypeEnv>,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct ProbeReport {
    pub states: usize,
    pub typed: usize,
    pub falsifications: Vec<ProbeFinding>,
    pub inconclusive: Vec<ProbeFinding>,
    /// The state bound cut the search short.
    pub truncated: bool,
}

/// Walks reachable configurations and retypes each one under an
/// environment derived from its parent's.
pub fn subject_reduction_probe(
    env: &TypeEnv,
    c: &Configuration,
    bounds: ProbeBounds,
) -> Result<ProbeReport, CheckError> {
    check_config_with(env, c, bounds.infer)?;
    let mut report = ProbeReport {
        states: 1,
        typed: 1,
        ..ProbeReport::default()
    };
    let mut seen: HashSet<(String, TypeEnv)> = HashSet::new();
    seen.insert((state_key(c), env.clone()));
    let mut queue = VecDeque::from([(c.clone(), env.clone(), Vec::<StepLabel>::new())]);
    while let Some((cur, cur_env, trace)) = queue.pop_front() {
        if trace.len() >= bounds.depth {
            continue;
        }
        for (label, next) in successors(&cur)? {
            let mut path = trace.clone();
            path.push(label.clone());
            let candidates = successor_envs(&cur_env, &label);
            let mut typed = None;
            let mut inconclusive = None;
            let mut last_reason = String::new();
            for e in &candidates {
                match check_config_with(e, &next, bounds.infer) {
                    Ok(_) => {
                        typed = Some(e.clone());
                        break;
                    }
                    Err(err) if err.is_inconclusive() => inconclusive = Some(err.to_string()),
                    Err(err) => last_reason = err.to_string(),
                }
            }
            let Some(next_env) = typed else {
                let finding = ProbeFinding {
                    trace: path,
                    configuration: next,
                    tried: candidates,
                    reason: inconclusive.clone().unwrap_or(last_reason),
                };
                if inconclusive.is_some() {
                    report.inconclusive.push(finding);
                } else {
                    report.falsifications.push(finding);
                }
                continue;
            };
            if !seen.insert((state_key(&next), next_env.clone())) {
                continue;
            }
            if report.states >= bounds.max_states {
                report.truncated = true;
                continue;
            }
            report.states += 1;
            report.typed += 1;
            queue.push_back((next, next_env, path));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn load(src: &str) -> (TypeEnv, Configuration) {
        let f = parse(src).unwrap();
        (f.env(), f.configuration())
    }

    #[test]
    fn empty_config_is_typed() {
        let (env, c) = load("nil");
        let d = check_config(&env, &c).unwrap();
        assert_eq!(d.size(), 1);
    }

    #[test]
    fn deallocated_channel_rejected() {
        let (env, c) = load("assume c: ch()@unr; store { c: dealloc } in nil");
        assert_eq!(check_config(&env, &c), Err(CheckError::NotAllocated("c".into())));
    }

    #[test]
    fn uncovered_name_rejected() {
        let (env, c) = load("c!().nil");
        assert_eq!(check_config(&env, &c), Err(CheckError::Uncovered("c".into())));
    }

    #[test]
    fn probe_alloc_free() {
        let (env, c) = load("alloc x. free x. nil");
        let bounds = ProbeBounds {
            depth: 3,
            ..ProbeBounds::default()
        };
        let r = subject_reduction_probe(&env, &c, bounds).unwrap();
        assert!(r.falsifications.is_empty());
        assert!(r.inconclusive.is_empty());
        assert_eq!(r.states, 3);
    }
}
