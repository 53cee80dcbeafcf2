//! Mistake-bounded online learning games with per-round caps on binary
//! arithmetic operations.

pub mod adversaries;
pub mod bounds;
pub mod cli;
pub mod dag;
pub mod engine;
pub mod error;
pub mod families;
pub mod learners;
pub mod linalg;
pub mod numerics;
pub mod reductions;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::{BinaryOp, NumericError, OpMeter, Scalar, UnaryOp};
