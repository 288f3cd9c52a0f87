use std::io::Write;

use quasiprop_core::{
    solve, AuctionInstance, PaymentRule, SolverConfig, ValuationProfile, WeightSpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::format::significant;

pub const POINTS_PER_DECADE: f64 = 25.0;
pub const CSV_DIGITS: usize = 12;
pub const CSV_HEADER: [&str; 9] = [
    "alpha",
    "n",
    "rule",
    "weight",
    "revenue",
    "efficiency",
    "epsilon",
    "iterations",
    "bids",
];

/// Geometric grid of high values. Without `points`, the grid carries 25
/// points per decade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub start: f64,
    pub stop: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl AlphaGrid {
    pub fn new(start: f64, stop: f64, points: Option<usize>) -> Self {
        Self {
            start,
            stop,
            points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.start >= 1.0) {
            return Err(HarnessError::Validation(format!(
                "alpha start must be >= 1, got {}",
                self.start
            )));
        }
        if !(self.stop.is_finite() && self.stop >= self.start) {
            return Err(HarnessError::Validation(format!(
                "alpha stop {} must be finite and >= start {}",
                self.stop, self.start
            )));
        }
        if self.points == Some(0) {
            return Err(HarnessError::Validation("alpha grid is empty".into()));
        }
        if self.points == Some(1) && self.stop > self.start {
            return Err(HarnessError::Validation(
                "a one-point alpha grid needs start == stop".into(),
            ));
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        match self.points {
            Some(p) => p,
            None if self.stop == self.start => 1,
            None => ((self.stop / self.start).log10() * POINTS_PER_DECADE).round() as usize + 1,
        }
        .max(1)
    }

    pub fn values(&self) -> Vec<f64> {
        let m = self.point_count();
        if m == 1 {
            return vec![self.start];
        }
        let ratio = (self.stop / self.start).ln();
        (0..m)
            .map(|k| match k {
                0 => self.start,
                k if k == m - 1 => self.stop,
                k => self.start * (ratio * k as f64 / (m - 1) as f64).exp(),
            })
            .collect()
    }
}

fn default_low_value() -> f64 {
    1.0
}

/// Profiles `(alpha, low, ..., low)` over an alpha grid and a list of
/// bidder counts, solved for each weight under one payment rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub rule: PaymentRule,
    pub weights: Vec<WeightSpec>,
    pub alpha: AlphaGrid,
    pub n: Vec<usize>,
    #[serde(default = "default_low_value")]
    pub low_value: f64,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        if self.weights.is_empty() {
            return Err(HarnessError::Validation("weight list is empty".into()));
        }
        if self.n.is_empty() {
            return Err(HarnessError::Validation(
                "bidder-count list is empty".into(),
            ));
        }
        if let Some(n) = self.n.iter().find(|&&n| n < 2) {
            return Err(HarnessError::Validation(format!(
                "need at least two bidders, got {n}"
            )));
        }
        if !(self.low_value.is_finite() && self.low_value > 0.0) {
            return Err(HarnessError::Validation(format!(
                "low value must be positive, got {}",
                self.low_value
            )));
        }
        Ok(())
    }

    /// Grid points in output order: alpha, then n, then weight.
    pub fn points(&self) -> Vec<(f64, usize, WeightSpec)> {
        let mut out = Vec::new();
        for alpha in self.alpha.values() {
            for &n in &self.n {
                for &w in &self.weights {
                    out.push((alpha, n, w));
                }
            }
        }
        out
    }

    /// Named grids for the standard revenue curves.
    pub fn preset(name: &str) -> Result<Self> {
        let three_weights = vec![
            WeightSpec::linear(),
            WeightSpec::power(0.5)?,
            WeightSpec::power(0.25)?,
        ];
        let spec = |rule, weights, n| SweepSpec {
            rule,
            weights,
            alpha: AlphaGrid::new(1.0, 1e4, None),
            n,
            low_value: 1.0,
            solver: SolverConfig::default(),
        };
        Ok(match name {
            "allpay-two" => spec(PaymentRule::AllPay, three_weights, vec![2]),
            "winnerpay-two" => spec(PaymentRule::WinnersPay, three_weights, vec![2]),
            "winnerpay-many-linear" => spec(
                PaymentRule::WinnersPay,
                vec![WeightSpec::linear()],
                vec![2, 3, 4, 5],
            ),
            "winnerpay-many-sqrt" => spec(
                PaymentRule::WinnersPay,
                vec![WeightSpec::power(0.5)?],
                vec![2, 3, 4, 5],
            ),
            other => {
                return Err(HarnessError::Validation(format!(
                    "unknown preset {other:?}; expected one of {}",
                    PRESETS.join(", ")
                )))
            }
        })
    }
}

pub const PRESETS: [&str; 4] = [
    "allpay-two",
    "winnerpay-two",
    "winnerpay-many-linear",
    "winnerpay-many-sqrt",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub n: usize,
    pub rule: PaymentRule,
    pub weight: WeightSpec,
    pub revenue: f64,
    pub efficiency: f64,
    pub epsilon: f64,
    pub iterations: u64,
    pub converged: bool,
    /// Equilibrium bids, high bidder first.
    pub bids: Vec<f64>,
}

impl SweepRow {
    pub fn instance(&self, low_value: f64) -> Result<AuctionInstance> {
        let profile = ValuationProfile::one_high(self.alpha, low_value, self.n)?;
        Ok(AuctionInstance::new(self.rule, profile, self.weight))
    }

    fn csv_record(&self) -> [String; 9] {
        let bids: Vec<String> = self
            .bids
            .iter()
            .map(|&b| significant(b, CSV_DIGITS))
            .collect();
        [
            significant(self.alpha, CSV_DIGITS),
            self.n.to_string(),
            self.rule.to_string(),
            self.weight.to_string(),
            significant(self.revenue, CSV_DIGITS),
            significant(self.efficiency, CSV_DIGITS),
            significant(self.epsilon, CSV_DIGITS),
            self.iterations.to_string(),
            bids.join(";"),
        ]
    }
}

fn solve_point(spec: &SweepSpec, alpha: f64, n: usize, weight: WeightSpec) -> Result<SweepRow> {
    let profile = ValuationProfile::one_high(alpha, spec.low_value, n)?;
    let instance = AuctionInstance::new(spec.rule, profile, weight);
    let result = solve(&instance, &spec.solver)?;
    let bids = instance.values().to_original(result.bids.as_slice());
    Ok(SweepRow {
        alpha,
        n,
        rule: spec.rule,
        weight,
        revenue: result.revenue,
        efficiency: result.efficiency,
        epsilon: result.epsilon,
        iterations: result.iterations,
        converged: result.converged,
        bids,
    })
}

/// Solves every grid point on the current rayon pool. Rows come back in
/// grid order regardless of completion order; unconverged points are kept.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.points()
        .into_par_iter()
        .map(|(alpha, n, w)| solve_point(spec, alpha, n, w))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record(row.csv_record())?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_25_points_per_decade() {
        let g = AlphaGrid::new(1.0, 1e4, None);
        let v = g.values();
        assert_eq!(v.len(), 101);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[100], 1e4);
        assert!((v[25] - 10.0).abs() < 1e-12);
        assert_eq!(AlphaGrid::new(3.0, 3.0, None).values(), vec![3.0]);
    }

    #[test]
    fn validation_rejects_bad_grids() {
        assert!(AlphaGrid::new(0.5, 10.0, None).validate().is_err());
        assert!(AlphaGrid::new(10.0, 1.0, None).validate().is_err());
        assert!(AlphaGrid::new(1.0, 10.0, Some(0)).validate().is_err());
        let mut spec = SweepSpec::preset("winnerpay-two").unwrap();
        spec.n.clear();
        assert!(spec.validate().is_err());
        assert!(SweepSpec::preset("nope").is_err());
    }

    #[test]
    fn points_are_lexicographic() {
        let mut spec = SweepSpec::preset("winnerpay-many-linear").unwrap();
        spec.alpha = AlphaGrid::new(1.0, 10.0, Some(2));
        let p = spec.points();
        assert_eq!(p.len(), 8);
        assert_eq!((p[0].0, p[0].1), (1.0, 2));
        assert_eq!((p[3].0, p[3].1), (1.0, 5));
        assert_eq!((p[4].0, p[4].1), (10.0, 2));
    }

    #[test]
    fn spec_json_fills_defaults() {
        let spec: SweepSpec = serde_json::from_str(
            r#"{"rule":"winners_pay","weights":["linear","sqrt"],"alpha":{"start":1,"stop":100},"n":[2]}"#,
        )
        .unwrap();
        assert_eq!(spec.low_value, 1.0);
        assert_eq!(spec.solver, SolverConfig::default());
        assert_eq!(spec.alpha.point_count(), 51);
    }
}
