#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod compliance;
pub mod error;
pub mod fluid;
pub mod harness;
pub mod junction;
pub mod rng;
pub mod stability;
pub mod tangle;
