//! Pure Nash equilibria of quasi-proportional single-item auctions.
//!
//! A bidder wins with probability `w(b_i) / sum_j w(b_j)` for a concave
//! weight `w`; under all-pay every bidder pays their bid, under winners-pay
//! only the winner does. The crate evaluates these games ([`mechanism`]),
//! provides their closed-form equilibria ([`analytic`]), and computes and
//! certifies equilibria numerically ([`solver`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod mechanism;
pub mod solver;
pub mod weights;

pub use error::{Error, Result};
pub use mechanism::{AuctionInstance, BidVector, InstanceRecord, PaymentRule, ValuationProfile};
pub use solver::{
    best_response, best_response_gap, best_response_iteration, giga_solve, iteration_budget, solve,
    EquilibriumResult, Method, SolverConfig, StepRule,
};
pub use weights::WeightSpec;
