//! Lexer and recursive-descent parser for `.pir` sources.
//!
//! Identifiers starting with an upper-case letter are process variables.
//! Other identifiers are classified by their binder: those bound by `?` or
//! `alloc` are variables, everything else is a channel name.

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::{ChannelState, Configuration, Ident, Name, ProcVar, Process, Store, Var};
use crate::types::{Attribute, Subject, Type, TypeEnv};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

/// A parsed `.pir` file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    pub assumptions: Vec<(Ident, Type)>,
    pub store: Option<Store>,
    pub body: Process,
}

impl SourceFile {
    pub fn env(&self) -> TypeEnv {
        self.assumptions
            .iter()
            .map(|(u, t)| (Subject::Id(u.clone()), t.clone()))
            .collect()
    }

    /// The declared store, or one allocating every free name of the body
    /// and every assumed name.
    pub fn configuration(&self) -> Configuration {
        let store = match &self.store {
            Some(s) => s.clone(),
            None => {
                let mut names: BTreeSet<Name> = self.body.free_names();
                names.extend(self.assumptions.iter().filter_map(|(u, _)| u.as_name().cloned()));
                names
                    .into_iter()
                    .map(|n| (n, ChannelState::Allocated))
                    .collect()
            }
        };
        Configuration {
            store,
            process: self.body.clone(),
        }
    }
}

impl fmt::Display for SourceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (u, t) in &self.assumptions {
            writeln!(f, "assume {u}: {t};")?;
        }
        if let Some(store) = &self.store {
            f.write_str("store {")?;
            for (i, (n, s)) in store.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, " {}: {}", n.as_str(), s)?;
            }
            f.write_str(" } in\n")?;
        }
        writeln!(f, "{}", self.body)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    PVar(String),
    Nat(u32),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::PVar(s) => format!("process variable `{s}`"),
            Tok::Nat(n) => format!("number `{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
    offset: usize,
}

const KEYWORDS: &[&str] = &[
    "assume", "store", "in", "nil", "if", "then", "else", "rec", "new", "alloc", "dealloc",
    "free", "ch", "proc", "aff", "unr", "unq",
];

const SYMBOLS: &[&str] = &["|-", "!", "?", "(", ")", ".", ",", "|", ":", ";", "{", "}", "=", "@"];

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.char_indices().peekable();
    while let Some(&(off, c)) = chars.peek() {
        let start = (line, column, off);
        let push = |toks: &mut Vec<Spanned>, tok: Tok| {
            toks.push(Spanned {
                tok,
                line: start.0,
                column: start.1,
                offset: start.2,
            })
        };
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
        } else if c.is_whitespace() {
            chars.next();
            column += 1;
        } else if c == '#' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                column += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    chars.next();
                    column += 1;
                } else {
                    break;
                }
            }
            let tok = if s.starts_with(|c: char| c.is_ascii_uppercase()) {
                Tok::PVar(s)
            } else {
                Tok::Ident(s)
            };
            push(&mut toks, tok);
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    chars.next();
                    column += 1;
                } else {
                    break;
                }
            }
            let n = s.parse::<u32>().map_err(|_| ParseError {
                line: start.0,
                column: start.1,
                offset: start.2,
                message: format!("number `{s}` out of range"),
                expected: vec![],
            })?;
            push(&mut toks, Tok::Nat(n));
        } else if let Some(alias) = match c {
            'ν' => Some("new"),
            '⊤' => Some("alloc"),
            '⊥' => Some("dealloc"),
            _ => None,
        } {
            chars.next();
            column += 1;
            push(&mut toks, Tok::Ident(alias.to_string()));
        } else if c == '⊢' {
            chars.next();
            column += 1;
            push(&mut toks, Tok::Sym("|-"));
        } else {
            let rest = &text[off..];
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(sym) => {
                    for _ in 0..sym.len() {
                        chars.next();
                        column += 1;
                    }
                    push(&mut toks, Tok::Sym(sym));
                }
                None => {
                    return Err(ParseError {
                        line,
                        column,
                        offset: off,
                        message: format!("unexpected character `{c}`"),
                        expected: vec![],
                    })
                }
            }
        }
    }
    toks.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
        offset: text.len(),
    });
    Ok(toks)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Name,
    Var,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    scope: Vec<(String, Kind)>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str, vars: &[String]) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            scope: vars.iter().map(|v| (v.clone(), Kind::Var)).collect(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let sp = &self.toks[self.pos];
        ParseError {
            line: sp.line,
            column: sp.column,
            offset: sp.offset,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error_here(format!("unexpected {}", self.peek().describe()), expected)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    fn expect_sym(&mut self, sym: &'static str) -> PResult<()> {
        if self.is_sym(sym) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[sym]))
        }
    }

    fn expect_kw(&mut self, kw: &'static str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[kw]))
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected(&["end of input"]))
        }
    }

    /// A non-keyword lower-case identifier.
    fn ident_text(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            Tok::Ident(s) => Err(self.error_here(
                format!("keyword `{s}` cannot be used as an identifier"),
                &["identifier"],
            )),
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn resolve(&self, text: String) -> Ident {
        match self.scope.iter().rev().find(|(s, _)| *s == text) {
            Some((_, Kind::Var)) => Ident::Var(Var(text)),
            _ => Ident::Name(Name(text)),
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        let t = self.ident_text()?;
        Ok(self.resolve(t))
    }

    fn with_binders<T>(
        &mut self,
        binders: Vec<(String, Kind)>,
        f: impl FnOnce(&mut Self) -> PResult<T>,
    ) -> PResult<T> {
        let n = self.scope.len();
        self.scope.extend(binders);
        let r = f(self);
        self.scope.truncate(n);
        r
    }

    fn state(&mut self) -> PResult<ChannelState> {
        if self.is_kw("alloc") {
            self.bump();
            Ok(ChannelState::Allocated)
        } else if self.is_kw("dealloc") {
            self.bump();
            Ok(ChannelState::Deallocated)
        } else {
            Err(self.unexpected(&["alloc", "dealloc"]))
        }
    }

    fn par(&mut self) -> PResult<Process> {
        let mut p = self.seq()?;
        while self.is_sym("|") {
            self.bump();
            let q = self.seq()?;
            p = Process::par(p, q);
        }
        Ok(p)
    }

    fn seq(&mut self) -> PResult<Process> {
        match self.peek().clone() {
            Tok::Sym("(") => {
                self.bump();
                let p = self.par()?;
                self.expect_sym(")")?;
                Ok(p)
            }
            Tok::PVar(x) => {
                self.bump();
                Ok(Process::PVar(ProcVar(x)))
            }
            Tok::Ident(kw) => match kw.as_str() {
                "nil" => {
                    self.bump();
                    Ok(Process::Nil)
                }
                "if" => {
                    self.bump();
                    let left = self.ident()?;
                    self.expect_sym("=")?;
                    let right = self.ident()?;
                    self.expect_kw("then")?;
                    let then = self.seq()?;
                    self.expect_kw("else")?;
                    let otherwise = self.seq()?;
                    Ok(Process::matching(left, right, then, otherwise))
                }
                "rec" => {
                    self.bump();
                    let x = match self.bump() {
                        Tok::PVar(x) => x,
                        _ => {
                            self.pos -= 1;
                            return Err(self.unexpected(&["process variable"]));
                        }
                    };
                    self.expect_sym(".")?;
                    let body = self.seq()?;
                    Ok(Process::rec(ProcVar(x), body))
                }
                "new" => {
                    self.bump();
                    let n = self.ident_text()?;
                    self.expect_sym(":")?;
                    let state = self.state()?;
                    self.expect_sym(".")?;
                    let body = self.with_binders(vec![(n.clone(), Kind::Name)], |p| p.seq())?;
                    Ok(Process::scope(Name(n), state, body))
                }
                "alloc" => {
                    self.bump();
                    let x = self.ident_text()?;
                    self.expect_sym(".")?;
                    let body = self.with_binders(vec![(x.clone(), Kind::Var)], |p| p.seq())?;
                    Ok(Process::alloc(Var(x), body))
                }
                "free" => {
                    self.bump();
                    let u = self.ident()?;
                    self.expect_sym(".")?;
                    let cont = self.seq()?;
                    Ok(Process::free(u, cont))
                }
                _ if KEYWORDS.contains(&kw.as_str()) => Err(self.unexpected(&["process"])),
                _ => self.action(),
            },
            _ => Err(self.unexpected(&["process"])),
        }
    }

    fn action(&mut self) -> PResult<Process> {
        let subject = self.ident()?;
        if self.is_sym("!") {
            self.bump();
            self.expect_sym("(")?;
            let mut objects = Vec::new();
            if !self.is_sym(")") {
                objects.push(self.ident()?);
                while self.is_sym(",") {
                    self.bump();
                    objects.push(self.ident()?);
                }
            }
            self.expect_sym(")")?;
            self.expect_sym(".")?;
            let cont = self.seq()?;
            Ok(Process::output(subject, objects, cont))
        } else if self.is_sym("?") {
            self.bump();
            self.expect_sym("(")?;
            let mut params: Vec<String> = Vec::new();
            if !self.is_sym(")") {
                loop {
                    let at = self.pos;
                    let x = self.ident_text()?;
                    if params.contains(&x) {
                        self.pos = at;
                        return Err(self.error_here(
                            format!("parameter `{x}` bound twice in the same input"),
                            &[],
                        ));
                    }
                    params.push(x);
                    if self.is_sym(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
            self.expect_sym(".")?;
            let binders = params.iter().map(|x| (x.clone(), Kind::Var)).collect();
            let cont = self.with_binders(binders, |p| p.seq())?;
            Ok(Process::input(
                subject,
                params.into_iter().map(Var).collect(),
                cont,
            ))
        } else {
            Err(self.unexpected(&["!", "?"]))
        }
    }

    fn ty(&mut self) -> PResult<Type> {
        if self.is_kw("proc") {
            self.bump();
            return Ok(Type::Proc);
        }
        self.expect_kw("ch")?;
        self.expect_sym("(")?;
        let mut objs = Vec::new();
        if !self.is_sym(")") {
            objs.push(self.ty()?);
            while self.is_sym(",") {
                self.bump();
                objs.push(self.ty()?);
            }
        }
        self.expect_sym(")")?;
        self.expect_sym("@")?;
        let attr = if self.is_kw("aff") {
            self.bump();
            Attribute::Affine
        } else if self.is_kw("unr") {
            self.bump();
            Attribute::Unrestricted
        } else if self.is_kw("unq") {
            self.bump();
            self.expect_sym("(")?;
            let n = match self.bump() {
                Tok::Nat(n) => n,
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected(&["natural number"]));
                }
            };
            self.expect_sym(")")?;
            Attribute::Unique(n)
        } else {
            return Err(self.unexpected(&["aff", "unr", "unq"]));
        };
        Ok(Type::Chan(objs, attr))
    }

    fn env(&mut self) -> PResult<TypeEnv> {
        self.expect_sym("{")?;
        let mut entries = Vec::new();
        if !self.is_sym("}") {
            loop {
                let subject = match self.peek().clone() {
                    Tok::PVar(x) => {
                        self.bump();
                        Subject::PVar(ProcVar(x))
                    }
                    _ => Subject::Id(self.ident()?),
                };
                self.expect_sym(":")?;
                entries.push((subject, self.ty()?));
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym("}")?;
        Ok(TypeEnv::from_entries(entries))
    }

    fn file(&mut self) -> PResult<SourceFile> {
        let mut assumptions: Vec<(Ident, Type)> = Vec::new();
        while self.is_kw("assume") {
            self.bump();
            let at = self.pos;
            let u = self.ident()?;
            if assumptions.iter().any(|(v, _)| *v == u) {
                self.pos = at;
                return Err(self.error_here(format!("`{u}` is assumed twice"), &[]));
            }
            self.expect_sym(":")?;
            let t = self.ty()?;
            self.expect_sym(";")?;
            assumptions.push((u, t));
        }
        let mut store = None;
        let mut store_at = self.pos;
        if self.is_kw("store") {
            store_at = self.pos;
            self.bump();
            self.expect_sym("{")?;
            let mut s = Store::new();
            if !self.is_sym("}") {
                loop {
                    let at = self.pos;
                    let n = self.ident_text()?;
                    if s.contains_key(&Name(n.clone())) {
                        self.pos = at;
                        return Err(self.error_here(format!("`{n}` declared twice in store"), &[]));
                    }
                    self.expect_sym(":")?;
                    let st = self.state()?;
                    s.insert(Name(n), st);
                    if self.is_sym(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect_sym("}")?;
            self.expect_kw("in")?;
            store = Some(s);
        }
        let body = self.par()?;
        self.expect_eof()?;
        if let Some(s) = &store {
            if let Some(n) = body.free_names().into_iter().find(|n| !s.contains_key(n)) {
                self.pos = store_at;
                return Err(self.error_here(
                    format!("store does not declare free name `{}`", n.as_str()),
                    &[],
                ));
            }
        }
        Ok(SourceFile {
            assumptions,
            store,
            body,
        })
    }
}

pub fn parse(text: &str) -> Result<SourceFile, ParseError> {
    Parser::new(text, &[])?.file()
}

pub fn parse_process(text: &str) -> Result<Process, ParseError> {
    parse_process_with_vars(text, &[])
}

/// Parses a process in which the given free identifiers are variables.
pub fn parse_process_with_vars(text: &str, vars: &[String]) -> Result<Process, ParseError> {
    let mut p = Parser::new(text, vars)?;
    let proc = p.par()?;
    p.expect_eof()?;
    Ok(proc)
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(text, &[])?;
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses `{u: T, ...} |- P`, treating `vars` as variables.
pub fn parse_judgment(text: &str, vars: &[String]) -> Result<(TypeEnv, Process), ParseError> {
    let mut p = Parser::new(text, vars)?;
    let env = p.env()?;
    p.expect_sym("|-")?;
    let proc = p.par()?;
    p.expect_eof()?;
    Ok((env, proc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Ident {
        Ident::var(s)
    }
    fn n(s: &str) -> Ident {
        Ident::name(s)
    }

    #[test]
    fn nil() {
        assert_eq!(parse_process("nil").unwrap(), Process::Nil);
    }

    #[test]
    fn client2_ast() {
        let got = parse_process(
            "alloc x. getTime!(x). x?(yh,ym). getDate!(x). x?(zy,zm,zd). free x. nil",
        )
        .unwrap();
        let x = Var::new("x");
        let expected = Process::alloc(
            x.clone(),
            Process::output(
                n("getTime"),
                vec![v("x")],
                Process::input(
                    v("x"),
                    vec![Var::new("yh"), Var::new("ym")],
                    Process::output(
                        n("getDate"),
                        vec![v("x")],
                        Process::input(
                            v("x"),
                            vec![Var::new("zy"), Var::new("zm"), Var::new("zd")],
                            Process::free(v("x"), Process::Nil),
                        ),
                    ),
                ),
            ),
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn classification_is_contextual() {
        let p = parse_process("new c:alloc. c?(c). c!(d).nil").unwrap();
        let Process::Scope { body, .. } = p else { panic!() };
        let Process::Input { subject, cont, .. } = *body else { panic!() };
        assert_eq!(subject, n("c"));
        let Process::Output { subject, objects, .. } = *cont else { panic!() };
        assert_eq!(subject, v("c"));
        assert_eq!(objects, vec![n("d")]);
    }

    #[test]
    fn par_is_loosest_and_left_associative() {
        let p = parse_process("a!().nil | b?().nil | X").unwrap();
        match p {
            Process::Par(l, r) => {
                assert!(matches!(*l, Process::Par(..)));
                assert_eq!(*r, Process::PVar(ProcVar::new("X")));
            }
            _ => panic!(),
        }
        let q = parse_process("a!().b!().nil | c!().nil").unwrap();
        assert!(matches!(q, Process::Par(..)));
    }

    #[test]
    fn empty_tuples_and_types() {
        assert!(parse_process("c!().c?().nil").is_ok());
        assert_eq!(
            parse_type("ch()@aff").unwrap(),
            Type::Chan(vec![], Attribute::Affine)
        );
        assert_eq!(
            parse_type("ch(ch()@unq(2), proc)@unr").unwrap(),
            Type::Chan(
                vec![Type::Chan(vec![], Attribute::Unique(2)), Type::Proc],
                Attribute::Unrestricted
            )
        );
    }

    #[test]
    fn file_with_headers() {
        let f = parse(
            "# a comment\nassume c: ch()@unr;\nstore { c: alloc, d: dealloc } in\nc!(d).nil\n",
        )
        .unwrap();
        assert_eq!(f.assumptions.len(), 1);
        assert_eq!(f.store.as_ref().unwrap().len(), 2);
        let again = parse(&f.to_string()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_process("c!(x).\n  nil |").unwrap_err();
        assert_eq!((e.line, e.column), (2, 8));
        assert!(e.expected.contains(&"process".to_string()));

        let e = parse_process("c?(x, x).nil").unwrap_err();
        assert_eq!(e.column, 7);

        let e = parse("store { c: alloc } in d!().nil").unwrap_err();
        assert!(e.message.contains("`d`"));

        let e = parse("assume a: ch()@aff; assume a: ch()@aff; nil").unwrap_err();
        assert!(e.message.contains("twice"));

        let e = parse_process("c!().nil $").unwrap_err();
        assert_eq!(e.offset, 9);
    }

    #[test]
    fn arity_is_not_checked_at_parse_time() {
        assert!(parse_process("c!(a).nil | c?(x, y).nil").is_ok());
    }

    #[test]
    fn judgment_lines() {
        let (env, p) =
            parse_judgment("{x: ch()@unq(0), X: proc} |- free x.X", &["x".into()]).unwrap();
        assert_eq!(env.len(), 2);
        assert_eq!(p, Process::free(v("x"), Process::PVar(ProcVar::new("X"))));
    }
}
