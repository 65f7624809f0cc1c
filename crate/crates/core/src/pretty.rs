//! Concrete-syntax printing. Output re-parses to an equal AST.

use std::fmt::{self, Write};

use crate::syntax::{Ident, Name, ProcVar, Process, Var};

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

macro_rules! display_text {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    )*};
}

display_text!(Name, Var, ProcVar);

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_par(&mut s, self);
        f.write_str(&s)
    }
}

fn write_list(out: &mut String, items: impl Iterator<Item = String>) {
    out.push('(');
    for (i, it) in items.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&it);
    }
    out.push(')');
}

fn write_par(out: &mut String, p: &Process) {
    match p {
        // `|` associates to the left, so only a right operand needs parentheses.
        Process::Par(l, r) => {
            write_par(out, l);
            out.push_str(" | ");
            write_seq(out, r);
        }
        other => write_seq(out, other),
    }
}

fn write_seq(out: &mut String, p: &Process) {
    match p {
        Process::Par(..) => {
            out.push('(');
            write_par(out, p);
            out.push(')');
        }
        Process::Nil => out.push_str("nil"),
        Process::PVar(x) => out.push_str(x.as_str()),
        Process::Output {
            subject,
            objects,
            cont,
        } => {
            let _ = write!(out, "{subject}!");
            write_list(out, objects.iter().map(|o| o.to_string()));
            out.push('.');
            write_seq(out, cont);
        }
        Process::Input {
            subject,
            params,
            cont,
        } => {
            let _ = write!(out, "{subject}?");
            write_list(out, params.iter().map(|x| x.0.clone()));
            out.push('.');
            write_seq(out, cont);
        }
        Process::Match {
            left,
            right,
            then,
            otherwise,
        } => {
            let _ = write!(out, "if {left} = {right} then ");
            write_seq(out, then);
            out.push_str(" else ");
            write_seq(out, otherwise);
        }
        Process::Rec { binder, body } => {
            let _ = write!(out, "rec {}. ", binder.as_str());
            write_seq(out, body);
        }
        Process::Scope { name, state, body } => {
            let _ = write!(out, "new {}:{}. ", name.as_str(), state);
            write_seq(out, body);
        }
        Process::Alloc { binder, body } => {
            let _ = write!(out, "alloc {}. ", binder.as_str());
            write_seq(out, body);
        }
        Process::Free { subject, cont } => {
            let _ = write!(out, "free {subject}.");
            write_seq(out, cont);
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::parser::parse_process;
    use crate::syntax::Process;

    #[test]
    fn prints_canonical_ascii() {
        assert_eq!(Process::Nil.to_string(), "nil");
        let p = parse_process("ν c:⊤. (c!().nil | c?(x). free c. nil) | X").unwrap();
        assert_eq!(
            p.to_string(),
            "new c:alloc. (c!().nil | c?(x).free c.nil) | X"
        );
    }

    #[test]
    fn right_nested_par_keeps_parentheses() {
        let p = parse_process("a!().nil | (b!().nil | c!().nil)").unwrap();
        assert_eq!(p.to_string(), "a!().nil | (b!().nil | c!().nil)");
        assert_eq!(parse_process(&p.to_string()).unwrap(), p);
    }
}
