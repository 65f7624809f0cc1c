//! Reduction and error predicates over closed configurations.

mod explore;
mod run;

pub use explore::{explore, replay, ErrorTrace, ExploreBounds, ExploreReport, ReplayError};
pub use run::{run, HaltReason, RunResult};

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::congruence::{alpha_key, canonical_flat, canonical_form, Flattened};
use crate::subst::{subst_names, subst_procvar};
use crate::syntax::{fresh_text, ChannelState, ConfigError, Configuration, Ident, Name, Process};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    #[serde(rename = "rCom")]
    Com,
    #[serde(rename = "rRec")]
    Rec,
    #[serde(rename = "rThen")]
    Then,
    #[serde(rename = "rElse")]
    Else,
    #[serde(rename = "rAll")]
    All,
    #[serde(rename = "rFree")]
    Free,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Com => "rCom",
            Rule::Rec => "rRec",
            Rule::Then => "rThen",
            Rule::Else => "rElse",
            Rule::All => "rAll",
            Rule::Free => "rFree",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One reduction step. `locus` holds indices into the canonical components
/// of the source configuration. `subject` is the channel for rCom/rFree, the
/// left operand for matches, the recursion variable for rRec and the bound
/// variable for rAll.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StepLabel {
    pub rule: Rule,
    pub subject: String,
    pub locus: Vec<usize>,
    pub fresh: Option<String>,
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  subject={}", self.rule, self.subject)?;
        if let Some(n) = &self.fresh {
            write!(f, "  fresh={n}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ErrorRule {
    #[serde(rename = "eAty")]
    Aty,
    #[serde(rename = "eOut")]
    Out,
    #[serde(rename = "eIn")]
    In,
}

impl fmt::Display for ErrorRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorRule::Aty => "eAty",
            ErrorRule::Out => "eOut",
            ErrorRule::In => "eIn",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ErrorWitness {
    pub rule: ErrorRule,
    pub channel: Name,
    /// Output and input arities, for eAty.
    pub arities: Option<(usize, usize)>,
}

impl fmt::Display for ErrorWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}", self.rule, self.channel.as_str())?;
        if let Some((o, i)) = self.arities {
            write!(f, ", {o}, {i}")?;
        }
        f.write_str(")")
    }
}

/// The top level of a configuration, with states of scoped names at hand.
struct Level {
    store: crate::syntax::Store,
    flat: Flattened,
}

impl Level {
    fn of(c: &Configuration) -> Result<Self, ConfigError> {
        c.ensure_closed()?;
        Ok(Level {
            store: c.store.clone(),
            flat: canonical_flat(&c.process),
        })
    }

    fn state(&self, n: &Name) -> Option<ChannelState> {
        self.flat
            .scopes
            .iter()
            .find(|(m, _)| m == n)
            .map(|(_, s)| *s)
            .or_else(|| self.store.get(n).copied())
    }

    fn ident_state(&self, u: &Ident) -> Option<(Name, ChannelState)> {
        let n = u.as_name()?;
        Some((n.clone(), self.state(n)?))
    }

    /// Replaces the components at `locus` by `replacement` and rebuilds.
    fn rebuild(
        &self,
        locus: &[usize],
        replacement: Vec<Process>,
        store: crate::syntax::Store,
        scopes: Vec<(Name, ChannelState)>,
    ) -> Configuration {
        let mut comps: Vec<Process> = self
            .flat
            .components
            .iter()
            .enumerate()
            .filter(|(i, _)| !locus.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        comps.extend(replacement);
        let p = Flattened {
            scopes,
            components: comps,
        }
        .into_process();
        Configuration {
            store,
            process: canonical_form(&p),
        }
    }

    fn simple(&self, locus: &[usize], replacement: Vec<Process>) -> Configuration {
        self.rebuild(
            locus,
            replacement,
            self.store.clone(),
            self.flat.scopes.clone(),
        )
    }

    fn used_names(&self, c: &Configuration) -> BTreeSet<String> {
        let mut used: BTreeSet<String> = self.store.keys().map(|n| n.0.clone()).collect();
        used.extend(c.process.all_texts());
        used.extend(self.flat.scopes.iter().map(|(n, _)| n.0.clone()));
        for comp in &self.flat.components {
            used.extend(comp.all_texts());
        }
        used
    }
}

/// All one-step reducts of a closed configuration, up to congruence.
pub fn successors(c: &Configuration) -> Result<Vec<(StepLabel, Configuration)>, ConfigError> {
    let level = Level::of(c)?;
    let comps = &level.flat.components;
    let mut out = Vec::new();
    for (i, comp) in comps.iter().enumerate() {
        match comp {
            Process::Rec { binder, body } => {
                let unfolded = subst_procvar(body, binder, comp);
                out.push((
                    StepLabel {
                        rule: Rule::Rec,
                        subject: binder.0.clone(),
                        locus: vec![i],
                        fresh: None,
                    },
                    level.simple(&[i], vec![unfolded]),
                ));
            }
            Process::Match {
                left: Ident::Name(a),
                right: Ident::Name(b),
                then,
                otherwise,
            } => {
                let (rule, next) = if a == b {
                    (Rule::Then, then)
                } else {
                    (Rule::Else, otherwise)
                };
                out.push((
                    StepLabel {
                        rule,
                        subject: a.0.clone(),
                        locus: vec![i],
                        fresh: None,
                    },
                    level.simple(&[i], vec![(**next).clone()]),
                ));
            }
            Process::Alloc { binder, body } => {
                let fresh = Name(fresh_text("c", &level.used_names(c)));
                let scoped = Process::scope(
                    fresh.clone(),
                    ChannelState::Allocated,
                    subst_names(body, &[(binder.clone(), fresh.clone())]),
                );
                out.push((
                    StepLabel {
                        rule: Rule::All,
                        subject: binder.0.clone(),
                        locus: vec![i],
                        fresh: Some(fresh.0),
                    },
                    level.simple(&[i], vec![scoped]),
                ));
            }
            Process::Free { subject, cont } => {
                if let Some((n, ChannelState::Allocated)) = level.ident_state(subject) {
                    let mut store = level.store.clone();
                    let mut scopes = level.flat.scopes.clone();
                    match scopes.iter_mut().find(|(m, _)| *m == n) {
                        Some(entry) => entry.1 = ChannelState::Deallocated,
                        None => {
                            store.insert(n.clone(), ChannelState::Deallocated);
                        }
                    }
                    out.push((
                        StepLabel {
                            rule: Rule::Free,
                            subject: n.0,
                            locus: vec![i],
                            fresh: None,
                        },
                        level.rebuild(&[i], vec![(**cont).clone()], store, scopes),
                    ));
                }
            }
            Process::Output {
                subject,
                objects,
                cont,
            } => {
                let Some((n, ChannelState::Allocated)) = level.ident_state(subject) else {
                    continue;
                };
                for (j, other) in comps.iter().enumerate() {
                    let Process::Input {
                        subject: s2,
                        params,
                        cont: cont2,
                    } = other
                    else {
                        continue;
                    };
                    if j == i || s2 != subject || params.len() != objects.len() {
                        continue;
                    }
                    let subs: Vec<_> = params
                        .iter()
                        .cloned()
                        .zip(objects.iter().filter_map(|o| o.as_name().cloned()))
                        .collect();
                    let received = subst_names(cont2, &subs);
                    out.push((
                        StepLabel {
                            rule: Rule::Com,
                            subject: n.0.clone(),
                            locus: vec![i, j],
                            fresh: None,
                        },
                        level.simple(&[i, j], vec![(**cont).clone(), received]),
                    ));
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Every error redex of a closed configuration.
pub fn error_witnesses(c: &Configuration) -> Result<Vec<ErrorWitness>, ConfigError> {
    let level = Level::of(c)?;
    let comps = &level.flat.components;
    let mut out = Vec::new();
    for (i, comp) in comps.iter().enumerate() {
        match comp {
            Process::Output {
                subject, objects, ..
            } => {
                if let Some((n, ChannelState::Deallocated)) = level.ident_state(subject) {
                    out.push(ErrorWitness {
                        rule: ErrorRule::Out,
                        channel: n,
                        arities: None,
                    });
                }
                for (j, other) in comps.iter().enumerate() {
                    if let Process::Input {
                        subject: s2,
                        params,
                        ..
                    } = other
                    {
                        if j != i && s2 == subject && params.len() != objects.len() {
                            if let Some(n) = subject.as_name() {
                                out.push(ErrorWitness {
                                    rule: ErrorRule::Aty,
                                    channel: n.clone(),
                                    arities: Some((objects.len(), params.len())),
                                });
                            }
                        }
                    }
                }
            }
            Process::Input { subject, .. } => {
                if let Some((n, ChannelState::Deallocated)) = level.ident_state(subject) {
                    out.push(ErrorWitness {
                        rule: ErrorRule::In,
                        channel: n,
                        arities: None,
                    });
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// True when no process remains, ignoring scope binders.
pub fn is_terminated(c: &Configuration) -> bool {
    canonical_flat(&c.process).components.is_empty()
}

/// Deduplication key: store plus the alpha-invariant shape of the process.
pub fn state_key(c: &Configuration) -> String {
    let mut key = String::new();
    for (n, s) in &c.store {
        key.push_str(&n.0);
        key.push(if *s == ChannelState::Allocated { '+' } else { '-' });
        key.push(',');
    }
    key.push('|');
    key.push_str(&alpha_key(&canonical_form(&c.process)));
    key
}

pub fn state_hash(c: &Configuration) -> u64 {
    let mut h = DefaultHasher::new();
    state_key(c).hash(&mut h);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn config(src: &str) -> Configuration {
        parse(src).unwrap().configuration()
    }

    #[test]
    fn communication_on_allocated_channel() {
        let c = config("store { c: alloc } in c!().nil | c?().nil");
        let succ = successors(&c).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].0.rule, Rule::Com);
        assert_eq!(succ[0].1.process, Process::Nil);
        assert!(error_witnesses(&c).unwrap().is_empty());
    }

    #[test]
    fn deallocated_channel_blocks_and_errs() {
        let c = config("store { c: dealloc } in c!().nil | c?().nil");
        assert!(successors(&c).unwrap().is_empty());
        let w = error_witnesses(&c).unwrap();
        let rules: Vec<ErrorRule> = w.iter().map(|w| w.rule).collect();
        assert_eq!(w.len(), 2);
        assert!(rules.contains(&ErrorRule::Out) && rules.contains(&ErrorRule::In));
    }

    #[test]
    fn alloc_then_free() {
        let c = config("store { } in alloc x. free x. nil");
        let s1 = successors(&c).unwrap();
        assert_eq!(s1.len(), 1);
        assert_eq!(s1[0].0.fresh.as_deref(), Some("c0"));
        assert_eq!(s1[0].1.process.to_string(), "new c0:alloc. free c0.nil");
        let s2 = successors(&s1[0].1).unwrap();
        assert_eq!(s2.len(), 1);
        assert_eq!(s2[0].0.rule, Rule::Free);
        assert_eq!(s2[0].1.process.to_string(), "new c0:dealloc. nil");
        assert!(successors(&s2[0].1).unwrap().is_empty());
        assert!(s2[0].1.store.is_empty());
    }

    #[test]
    fn arity_mismatch() {
        let c = config("store { c: alloc, d: alloc } in c!(d).nil | c?(x, y).nil");
        assert!(successors(&c).unwrap().is_empty());
        assert_eq!(
            error_witnesses(&c).unwrap(),
            vec![ErrorWitness {
                rule: ErrorRule::Aty,
                channel: Name::new("c"),
                arities: Some((1, 2)),
            }]
        );
        let lone = config("store { c: dealloc } in c!().nil");
        assert_eq!(error_witnesses(&lone).unwrap()[0].rule, ErrorRule::Out);
        let ok = config("store { c: alloc } in c!().nil");
        assert!(error_witnesses(&ok).unwrap().is_empty());
    }

    #[test]
    fn double_free_is_stuck_not_error() {
        let c = config("store { c: dealloc } in free c. nil");
        assert!(successors(&c).unwrap().is_empty());
        assert!(error_witnesses(&c).unwrap().is_empty());
    }

    #[test]
    fn free_flips_the_store() {
        let c = config("store { c: alloc } in free c. nil");
        let s = successors(&c).unwrap();
        assert_eq!(s[0].1.store[&Name::new("c")], ChannelState::Deallocated);
    }

    #[test]
    fn matches_and_recursion() {
        let c = config("store { a: alloc, b: alloc } in if a = a then a!().nil else nil | if a = b then nil else b!().nil");
        let rules: BTreeSet<Rule> = successors(&c).unwrap().iter().map(|s| s.0.rule).collect();
        assert_eq!(rules, BTreeSet::from([Rule::Then, Rule::Else]));

        let r = config("store { a: alloc } in rec X. a!().X");
        let s = successors(&r).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].1.process.to_string(), "a!().rec X. a!().X");
    }

    #[test]
    fn communication_under_a_scope() {
        let c = config("store { } in new c:alloc. (c!().nil | c?().nil)");
        let s = successors(&c).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].0.subject, "c");
    }

    #[test]
    fn substitution_on_receive() {
        let c = config("store { a: alloc, d: alloc } in a!(d).nil | a?(x). x!().nil");
        let s = successors(&c).unwrap();
        assert_eq!(s[0].1.process.to_string(), "d!().nil");
    }

    #[test]
    fn open_configurations_are_rejected() {
        let c = Configuration {
            store: Default::default(),
            process: crate::parser::parse_process("X").unwrap(),
        };
        assert!(successors(&c).is_err());
    }
}
