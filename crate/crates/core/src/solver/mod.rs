//! Numerical equilibrium computation.
//!
//! Two solvers share one certificate: [`giga_solve`] runs simultaneous
//! projected gradient ascent (every bidder a no-regret learner), and
//! [`best_response_iteration`] sweeps exact best responses. Both declare
//! convergence only when the best-response gap of the returned point is at
//! most the target.

mod giga;
mod iteration;
mod oracle;
mod share;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::{AuctionInstance, BidVector};

pub use giga::giga_solve;
pub use iteration::best_response_iteration;
pub use oracle::{
    best_response, best_response_gap, certify, golden_section_max, oracle_tol, Certificate,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Giga,
    BestResponseIteration,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('-', "_").as_str() {
            "giga" => Ok(Method::Giga),
            "best_response_iteration" | "br" | "best_response" => Ok(Method::BestResponseIteration),
            _ => Err(Error::Parse {
                what: "solver method",
                input: s.to_string(),
            }),
        }
    }
}

/// Step length of the gradient update at iteration `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `1 / sqrt(t)` for every bidder.
    Uniform,
    /// `sqrt(v_i) / sqrt(t)`.
    SqrtValue,
    /// `v_i / sqrt(t)`: the uniform rule applied to each bidder's bid and
    /// utility measured in units of their own value.
    ValueScaled,
}

impl StepRule {
    pub(crate) fn scale(&self, value: f64) -> f64 {
        match self {
            StepRule::Uniform => 1.0,
            StepRule::SqrtValue => value.sqrt(),
            StepRule::ValueScaled => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Lower end of the projection interval; bids never go below it.
    pub bid_floor: f64,
    /// Target best-response gap.
    pub tolerance: f64,
    /// Gradient steps for GIGA, sweeps for best-response iteration.
    pub max_iterations: u64,
    pub method: Method,
    /// GIGA certifies its iterate and running average every this many steps.
    pub certify_every: u64,
    /// Starting profile in sorted-value order; all ones (clamped) when absent.
    pub initial_bids: Option<Vec<f64>>,
    /// Width of the final best-response bracket, relative to the bidder's value.
    pub oracle_tol: f64,
    pub step_rule: StepRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            bid_floor: 1e-9,
            tolerance: 1e-8,
            max_iterations: 10_000_000,
            method: Method::BestResponseIteration,
            certify_every: 1000,
            initial_bids: None,
            oracle_tol: 1e-12,
            step_rule: StepRule::SqrtValue,
        }
    }
}

impl SolverConfig {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self, instance: &AuctionInstance) -> Result<()> {
        if !(self.bid_floor > 0.0 && self.bid_floor < instance.values().min()) {
            return Err(Error::Invalid(format!(
                "bid floor {} must lie in (0, min value {})",
                self.bid_floor,
                instance.values().min()
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Invalid(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.oracle_tol > 0.0) {
            return Err(Error::Invalid(format!(
                "oracle tolerance must be positive, got {}",
                self.oracle_tol
            )));
        }
        if self.max_iterations == 0 || self.certify_every == 0 {
            return Err(Error::Invalid("iteration counts must be positive".into()));
        }
        if let Some(b) = &self.initial_bids {
            if b.len() != instance.n() || b.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!(
                    "initial bids must be {} finite numbers",
                    instance.n()
                )));
            }
        }
        Ok(())
    }

    /// Starting point clamped into `[bid_floor, v_i]`.
    pub(crate) fn start(&self, instance: &AuctionInstance) -> Vec<f64> {
        let values = instance.values().values();
        match &self.initial_bids {
            Some(b) => b
                .iter()
                .zip(values)
                .map(|(&x, &v)| x.clamp(self.bid_floor, v))
                .collect(),
            None => values
                .iter()
                .map(|&v| 1.0f64.clamp(self.bid_floor, v))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    /// The certified point: whichever candidate had the smaller gap.
    pub bids: BidVector,
    /// Running average of the iterates.
    pub average_bids: BidVector,
    /// Best-response gap of `bids`, recomputed at return.
    pub epsilon: f64,
    pub revenue: f64,
    pub efficiency: f64,
    pub iterations: u64,
    pub converged: bool,
    pub method: Method,
}

impl EquilibriumResult {
    pub(crate) fn finish(
        instance: &AuctionInstance,
        config: &SolverConfig,
        candidates: [BidVector; 2],
        iterations: u64,
        method: Method,
    ) -> Result<Self> {
        let [last, average] = candidates;
        let eps_last = best_response_gap(instance, &last, config.oracle_tol)?;
        let eps_avg = best_response_gap(instance, &average, config.oracle_tol)?;
        let (bids, epsilon) = if eps_avg < eps_last {
            (average.clone(), eps_avg)
        } else {
            (last, eps_last)
        };
        Ok(Self {
            revenue: instance.revenue(&bids)?,
            efficiency: instance.efficiency(&bids)?,
            bids,
            average_bids: average,
            epsilon,
            iterations,
            converged: epsilon <= config.tolerance,
            method,
        })
    }
}

/// Runs the solver selected by `config.method`.
pub fn solve(instance: &AuctionInstance, config: &SolverConfig) -> Result<EquilibriumResult> {
    match config.method {
        Method::Giga => giga_solve(instance, config),
        Method::BestResponseIteration => best_response_iteration(instance, config),
    }
}

/// Heuristic GIGA horizon `ceil((n * sum(v) / v_min / epsilon)^2)` capped at `cap`.
/// The leading constant is taken to be 1.
pub fn iteration_budget(values: &[f64], epsilon: f64, cap: u64) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(Error::Invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Invalid(
            "values must be nonempty and positive".into(),
        ));
    }
    let n = values.len() as f64;
    let sum: f64 = values.iter().sum();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let root = n * sum / min / epsilon;
    let t = root * root;
    // absorb representation error so exact squares do not round up
    let t = (t * (1.0 - 1e-12)).ceil();
    Ok(if t >= cap as f64 { cap } else { t as u64 })
}
