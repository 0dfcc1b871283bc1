#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod awgn;
pub mod baselines;
pub mod bsc;
pub mod cli;
pub mod prob;
pub mod quadrature;
pub mod sim;
pub mod solver;
