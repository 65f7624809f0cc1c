//! The πR calculus: syntax, reduction semantics and resource-aware typing.

pub mod congruence;
pub mod consistency;
pub mod parser;
pub mod pretty;
pub mod semantics;
pub mod subst;
pub mod syntax;
pub mod typeck;
pub mod types;

pub use parser::{parse, parse_process, ParseError, SourceFile};
pub use syntax::{ChannelState, Configuration, Ident, Name, ProcVar, Process, Store, Var};
pub use types::{Attribute, Subject, Type, TypeEnv};
