//! Test support: random generators and reference implementations that
//! share no code paths with the library routines they check.

pub mod consistency;
pub mod equiv;
pub mod gen;
pub mod mutate;
pub mod step;
