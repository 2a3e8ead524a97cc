//! Sets of the form `A = {n >= 0 : ||p(n)|| <= eps(n)}`, their sumsets, and
//! the Diophantine certificates that explain which integers are missing.
//!
//! Run `cargo run --example NAME` for a tour; each example covers one module:
//!
//! - `exact_reals` for [`realkernel`]
//! - `continued_fractions` for [`contfrac`]
//! - `membership` for [`recurrence`]
//! - `sqrt2_complement` for [`sumset`] and [`obstruction`]
//! - `witness_families` for [`witnesses`]
//! - `exceptional_alpha` for [`exceptional`]
//! - `weyl_sums` for [`equidist`]
//! - `cubic_gamma` for [`higherdeg`]
//!
//! The `recbases` binary exposes the same operations as subcommands.

pub mod bitset;
pub mod cli;
pub mod contfrac;
pub mod equidist;
pub mod error;
pub mod exceptional;
pub mod higherdeg;
pub mod obstruction;
mod quad;
pub mod realkernel;
pub mod recurrence;
pub mod sumset;
pub mod witnesses;

pub use error::{Error, Result};
pub use realkernel::{QuadSurd, RealDescriptor};
