// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod grid;
pub mod kernels;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod noise;
pub mod solver;
pub mod picard;
pub mod ensemble;
pub mod estimators;
pub mod harness;
