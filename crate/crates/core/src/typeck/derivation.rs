use std::fmt;
use std::str::FromStr;

use crate::parser::{parse_judgment, ParseError};
use crate::syntax::{Ident, Process};
use crate::types::TypeEnv;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TRule {
    In,
    Out,
    Par,
    If,
    Rec,
    Var,
    All,
    Free,
    Nil,
    Rst1,
    Rst2,
    Con,
    Weak,
    Sub,
    Rev,
    /// A rule name not in the system; never valid.
    Unknown(String),
}

impl TRule {
    pub const ALL: [TRule; 15] = [
        TRule::In,
        TRule::Out,
        TRule::Par,
        TRule::If,
        TRule::Rec,
        TRule::Var,
        TRule::All,
        TRule::Free,
        TRule::Nil,
        TRule::Rst1,
        TRule::Rst2,
        TRule::Con,
        TRule::Weak,
        TRule::Sub,
        TRule::Rev,
    ];

    pub fn name(&self) -> &str {
        match self {
            TRule::In => "tIn",
            TRule::Out => "tOut",
            TRule::Par => "tPar",
            TRule::If => "tIf",
            TRule::Rec => "tRec",
            TRule::Var => "tVar",
            TRule::All => "tAll",
            TRule::Free => "tFree",
            TRule::Nil => "tNil",
            TRule::Rst1 => "tRst1",
            TRule::Rst2 => "tRst2",
            TRule::Con => "tCon",
            TRule::Weak => "tWeak",
            TRule::Sub => "tSub",
            TRule::Rev => "tRev",
            TRule::Unknown(s) => s,
        }
    }

    pub fn is_structural(&self) -> bool {
        matches!(self, TRule::Con | TRule::Weak | TRule::Sub | TRule::Rev)
    }
}

impl FromStr for TRule {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(TRule::ALL
            .iter()
            .find(|r| r.name() == s)
            .cloned()
            .unwrap_or_else(|| TRule::Unknown(s.to_string())))
    }
}

impl fmt::Display for TRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A typing derivation. Rule instances (split pairs, subtype pairs, revised
/// object lists) are implicit in the difference between conclusion and
/// premise environments.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub rule: TRule,
    pub env: TypeEnv,
    pub process: Process,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn leaf(rule: TRule, env: TypeEnv, process: Process) -> Self {
        Derivation {
            rule,
            env,
            process,
            premises: Vec::new(),
        }
    }

    pub fn node(rule: TRule, env: TypeEnv, process: Process, premises: Vec<Derivation>) -> Self {
        Derivation {
            rule,
            env,
            process,
            premises,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(Derivation::height).max().unwrap_or(0)
    }

    /// Nodes in pre-order, paired with their paths from the root.
    pub fn nodes(&self) -> Vec<(Vec<usize>, &Derivation)> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), self)];
        while let Some((path, d)) = stack.pop() {
            for (i, p) in d.premises.iter().enumerate().rev() {
                let mut q = path.clone();
                q.push(i);
                stack.push((q, p));
            }
            out.push((path, d));
        }
        out
    }

    pub fn get_mut(&mut self, path: &[usize]) -> Option<&mut Derivation> {
        let mut d = self;
        for &i in path {
            d = d.premises.get_mut(i)?;
        }
        Some(d)
    }

    /// Serialises one node per line: indentation, rule, environment and
    /// process. Free variables of the root process are declared first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let vars = self.process.free_vars();
        if !vars.is_empty() {
            let names: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
            out.push_str(&format!("vars {}\n", names.join(", ")));
        }
        self.write_lines(0, &mut out);
        out
    }

    fn write_lines(&self, depth: usize, out: &mut String) {
        out.push_str(&format!(
            "{}{} {} |- {}\n",
            "  ".repeat(depth),
            self.rule,
            self.env,
            self.process
        ));
        for p in &self.premises {
            p.write_lines(depth + 1, out);
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DerivationParseError {
    #[error("empty derivation")]
    Empty,
    #[error("line {line}: {message}")]
    Structure { line: usize, message: String },
    #[error("line {line}: {source}")]
    Judgment { line: usize, source: ParseError },
}

/// Identifiers bound by the process of a node for its premises.
fn binders_of(p: &Process) -> Vec<String> {
    match p {
        Process::Input { params, .. } => params.iter().map(|x| x.0.clone()).collect(),
        Process::Alloc { binder, .. } => vec![binder.0.clone()],
        _ => Vec::new(),
    }
}

/// Parses the format written by [`Derivation::to_text`]. Identifiers are
/// classified as variables when a binder of an ancestor node binds them.
pub fn parse_derivation(text: &str) -> Result<Derivation, DerivationParseError> {
    struct Line<'a> {
        no: usize,
        depth: usize,
        rule: &'a str,
        rest: &'a str,
    }
    let mut lines = Vec::new();
    let mut root_vars: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        if lines.is_empty() && root_vars.is_empty() {
            if let Some(rest) = raw.strip_prefix("vars ") {
                root_vars = rest.split(',').map(|s| s.trim().to_string()).collect();
                continue;
            }
        }
        let indent = raw.len() - raw.trim_start_matches(' ').len();
        if indent % 2 != 0 {
            return Err(DerivationParseError::Structure {
                line: no,
                message: "indentation must be a multiple of two spaces".into(),
            });
        }
        let body = &raw[indent..];
        let (rule, rest) = body.split_once(' ').ok_or(DerivationParseError::Structure {
            line: no,
            message: "expected `rule {env} |- process`".into(),
        })?;
        lines.push(Line {
            no,
            depth: indent / 2,
            rule,
            rest,
        });
    }
    if lines.is_empty() {
        return Err(DerivationParseError::Empty);
    }
    if lines[0].depth != 0 {
        return Err(DerivationParseError::Structure {
            line: lines[0].no,
            message: "root must not be indented".into(),
        });
    }

    // Stack of open nodes with the variables in scope for their premises.
    let mut stack: Vec<(Derivation, Vec<String>)> = Vec::new();
    let mut root: Option<Derivation> = None;
    let close = |stack: &mut Vec<(Derivation, Vec<String>)>, root: &mut Option<Derivation>| {
        let (done, _) = stack.pop().expect("non-empty stack");
        match stack.last_mut() {
            Some((parent, _)) => parent.premises.push(done),
            None => *root = Some(done),
        }
    };
    for line in &lines {
        if root.is_some() {
            return Err(DerivationParseError::Structure {
                line: line.no,
                message: "more than one root".into(),
            });
        }
        if line.depth > stack.len() {
            return Err(DerivationParseError::Structure {
                line: line.no,
                message: "indentation skips a level".into(),
            });
        }
        while stack.len() > line.depth {
            close(&mut stack, &mut root);
        }
        if root.is_some() {
            return Err(DerivationParseError::Structure {
                line: line.no,
                message: "more than one root".into(),
            });
        }
        let vars = match stack.last() {
            Some((parent, vars)) => {
                let mut v = vars.clone();
                v.extend(binders_of(&parent.process));
                v
            }
            None => root_vars.clone(),
        };
        let (env, process) = parse_judgment(line.rest, &vars).map_err(|source| {
            DerivationParseError::Judgment {
                line: line.no,
                source,
            }
        })?;
        let rule: TRule = line.rule.parse().expect("infallible");
        stack.push((Derivation::leaf(rule, env, process), vars));
    }
    while !stack.is_empty() {
        close(&mut stack, &mut root);
    }
    Ok(root.expect("at least one line"))
}

/// Whether the identifier is among the subjects of `env`.
pub(crate) fn mentions(env: &TypeEnv, u: &Ident) -> bool {
    env.entries()
        .iter()
        .any(|(s, _)| matches!(s, crate::types::Subject::Id(v) if v == u))
}
