//! Random-key optimization: problem-independent search in the unit
//! hypercube with problem-specific decoders.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod error;
pub mod eval;
pub mod harness;
pub mod keys;
pub mod local_search;
pub mod pool;
pub mod problems;
pub mod solvers;
pub mod variation;

pub use error::{Error, Result};
pub use eval::{Evaluator, RunResult, StopCriterion, TracePoint};
pub use keys::{Decoder, Fitness, RandomKeys, RngStream};
pub use pool::{ElitePool, PoolEntry, SharedPool};
