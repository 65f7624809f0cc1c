//! Typing derivations: search, checking and configuration-level typing.

mod config;
mod derivation;
mod infer;
mod validate;

pub use config::{
    check_config, check_config_with, subject_reduction_probe, successor_envs, CheckError,
    ProbeBounds, ProbeFinding, ProbeReport,
};
pub use derivation::{parse_derivation, Derivation, DerivationParseError, TRule};
pub use infer::{barendregt, infer, infer_with, Failure, InferError, InferOptions};
pub use validate::{validate, ValidationError};
