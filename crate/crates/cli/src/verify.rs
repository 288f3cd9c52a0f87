//! Acceptance criteria as executable checks.
//!
//! Each criterion solves its own grid of instances and records one
//! [`Check`] per assertion. A criterion passes when every check passes.
//! Criterion 11 re-solves the instances of criteria 1 to 8 with both
//! solvers and compares them.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use quasiprop_core::solver::certify;
use quasiprop_core::{
    solve, AuctionInstance, BidVector, EquilibriumResult, Method, PaymentRule, SolverConfig,
    ValuationProfile, WeightSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Gradient of bidder `i`'s utility in their own bid, given the bid and the
/// total weight of the other bidders.
pub type GradientFn = dyn Fn(&AuctionInstance, usize, f64, f64) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Criterion {
    pub id: u8,
    pub slug: &'static str,
    pub title: &'static str,
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion {
        id: 1,
        slug: "closed_form_two_bidder",
        title: "two-bidder all-pay closed form, both solvers",
    },
    Criterion {
        id: 2,
        slug: "winnerpay_linear_bounds",
        title: "winners-pay linear bid bracket and revenue/sqrt(alpha)",
    },
    Criterion {
        id: 3,
        slug: "sqrt_weight_scaling",
        title: "winners-pay sqrt weight revenue slope",
    },
    Criterion {
        id: 4,
        slug: "allpay_uniform",
        title: "all-pay uniform-value equilibrium",
    },
    Criterion {
        id: 5,
        slug: "winnerpay_uniform",
        title: "winners-pay uniform-value equilibrium",
    },
    Criterion {
        id: 6,
        slug: "many_bidder_limit",
        title: "revenue with many low bidders",
    },
    Criterion {
        id: 7,
        slug: "log_weight_bound",
        title: "log weight high-bid bound",
    },
    Criterion {
        id: 8,
        slug: "revenue_ordering",
        title: "revenue ordering across weights and bidder counts",
    },
    Criterion {
        id: 9,
        slug: "gradient",
        title: "analytic gradient against central differences",
    },
    Criterion {
        id: 10,
        slug: "uniqueness",
        title: "random starts reach one sorted equilibrium",
    },
    Criterion {
        id: 11,
        slug: "method_agreement",
        title: "solver agreement and certificate stability",
    },
];

/// Looks a criterion up by slug or number.
pub fn find(key: &str) -> Option<&'static Criterion> {
    let key = key.trim();
    CRITERIA
        .iter()
        .find(|c| c.slug == key || c.slug.replace('_', "-") == key || key.parse::<u8>() == Ok(c.id))
}

#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn error(label: impl Into<String>, err: impl fmt::Display) -> Self {
        Self::new(label, false, format!("error: {err}"))
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub checks: Vec<Check>,
    /// Measured quantities worth printing whether or not the checks pass.
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        format!(
            "{} {:>2} {:<24} {:>4}/{:<4} checks {:>8.2}s  {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.criterion.id,
            self.criterion.slug,
            ok,
            self.checks.len(),
            self.elapsed.as_secs_f64(),
            self.criterion.title,
        )
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary_line())?;
        for note in &self.notes {
            writeln!(f, "        {note}")?;
        }
        for c in self.failures().take(20) {
            writeln!(f, "      x {}: {}", c.label, c.detail)?;
        }
        let hidden = self.failures().count().saturating_sub(20);
        if hidden > 0 {
            writeln!(f, "      x ... {hidden} more failing checks")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySettings {
    /// Target best-response gap for every solve.
    pub tolerance: f64,
    /// Gradient-step budget for GIGA; its hardest points need ~1.5e8 steps.
    pub giga_max_iterations: u64,
    pub sweep_max_iterations: u64,
    pub seed: u64,
    pub gradient_cases: usize,
    pub random_starts: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-18,
            giga_max_iterations: 200_000_000,
            sweep_max_iterations: 100_000,
            seed: 0x5eed,
            gradient_cases: 1000,
            random_starts: 20,
        }
    }
}

pub struct Verifier {
    settings: VerifySettings,
    gradient: Box<GradientFn>,
}

impl Default for Verifier {
    fn default() -> Self {
        Self::new(VerifySettings::default())
    }
}

fn rel_err(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        ((actual - expected) / expected).abs()
    }
}

fn label(instance: &AuctionInstance) -> String {
    let v = instance.values().values();
    let values = if v.len() > 3 {
        format!("{}x{}", v[0], v.len())
    } else {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    format!("{} {} v=({values})", instance.rule(), instance.weight())
}

fn one_high(rule: PaymentRule, weight: WeightSpec, alpha: f64, n: usize) -> AuctionInstance {
    let profile = ValuationProfile::one_high(alpha, 1.0, n).expect("alpha and n are positive");
    AuctionInstance::new(rule, profile, weight)
}

fn power(gamma: f64) -> WeightSpec {
    WeightSpec::power(gamma).expect("exponent in (0, 1]")
}

fn geometric(start: f64, stop: f64, points: usize) -> Vec<f64> {
    let ratio = (stop / start).ln();
    (0..points)
        .map(|k| start * (ratio * k as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Instances solved by criteria 1 to 8; criterion 11 re-solves them all.
pub fn instances(id: u8) -> Vec<AuctionInstance> {
    let mut out = Vec::new();
    match id {
        1 => {
            for gamma in [0.25, 0.5, 1.0] {
                for k in 0..=10 {
                    out.push(one_high(PaymentRule::AllPay, power(gamma), 2f64.powi(k), 2));
                }
            }
        }
        2 => {
            for k in 0..=12 {
                out.push(one_high(
                    PaymentRule::WinnersPay,
                    WeightSpec::linear(),
                    10f64.powf(k as f64 / 2.0),
                    2,
                ));
            }
        }
        3 => {
            for alpha in geometric(1e3, 1e6, 76) {
                out.push(one_high(PaymentRule::WinnersPay, power(0.5), alpha, 2));
            }
        }
        4 | 5 => {
            let rule = if id == 4 {
                PaymentRule::AllPay
            } else {
                PaymentRule::WinnersPay
            };
            for n in [2, 3, 5, 10] {
                for gamma in [0.5, 1.0] {
                    for value in [1.0, 10.0] {
                        let profile = ValuationProfile::uniform(value, n).expect("positive value");
                        out.push(AuctionInstance::new(rule, profile, power(gamma)));
                    }
                }
            }
        }
        6 => {
            for rule in [PaymentRule::WinnersPay, PaymentRule::AllPay] {
                for gamma in [0.5, 1.0] {
                    for n in [25, 50] {
                        out.push(one_high(rule, power(gamma), 100.0, n));
                    }
                }
            }
        }
        7 => {
            for rule in [PaymentRule::AllPay, PaymentRule::WinnersPay] {
                for k in 2..=6 {
                    out.push(one_high(rule, WeightSpec::log1p(), 10f64.powi(k), 2));
                }
            }
        }
        8 => {
            for gamma in [1.0, 0.5, 0.25] {
                out.push(one_high(PaymentRule::WinnersPay, power(gamma), 100.0, 2));
            }
            for w in [WeightSpec::linear(), power(0.5)] {
                for n in 3..=5 {
                    out.push(one_high(PaymentRule::WinnersPay, w, 100.0, n));
                }
            }
        }
        _ => {}
    }
    out
}

fn uniqueness_grid() -> Vec<AuctionInstance> {
    let weights = [
        WeightSpec::linear(),
        power(0.5),
        power(0.25),
        WeightSpec::log1p(),
        WeightSpec::iterated_log(2).expect("depth 2 is supported"),
    ];
    let profiles = [
        vec![10.0, 1.0],
        vec![4.0, 2.0, 1.5],
        vec![20.0, 1.0, 1.0, 1.0],
    ];
    let mut out = Vec::new();
    for rule in [PaymentRule::AllPay, PaymentRule::WinnersPay] {
        for w in weights {
            for v in &profiles {
                out.push(AuctionInstance::from_values(rule, v.clone(), w).expect("valid profile"));
            }
        }
    }
    out
}

struct Solved {
    instance: AuctionInstance,
    result: Result<EquilibriumResult, String>,
    elapsed: Duration,
}

impl Solved {
    fn bids(&self) -> Option<&[f64]> {
        self.result.as_ref().ok().map(|r| r.bids.as_slice())
    }
}

impl Verifier {
    pub fn new(settings: VerifySettings) -> Self {
        Self {
            settings,
            gradient: Box::new(|inst, i, bid, others| inst.unilateral_gradient(i, bid, others)),
        }
    }

    /// Replaces the gradient checked by criterion 9.
    pub fn with_gradient<F>(mut self, gradient: F) -> Self
    where
        F: Fn(&AuctionInstance, usize, f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.gradient = Box::new(gradient);
        self
    }

    pub fn settings(&self) -> &VerifySettings {
        &self.settings
    }

    pub fn config(&self, method: Method) -> SolverConfig {
        SolverConfig {
            tolerance: self.settings.tolerance,
            max_iterations: match method {
                Method::Giga => self.settings.giga_max_iterations,
                Method::BestResponseIteration => self.settings.sweep_max_iterations,
            },
            ..SolverConfig::default()
        }
        .with_method(method)
    }

    fn solve_one(&self, instance: &AuctionInstance, config: &SolverConfig) -> Solved {
        let start = Instant::now();
        let result = solve(instance, config).map_err(|e| e.to_string());
        Solved {
            instance: instance.clone(),
            result,
            elapsed: start.elapsed(),
        }
    }

    fn solve_all(&self, instances: &[AuctionInstance], method: Method) -> Vec<Solved> {
        let config = self.config(method);
        instances
            .par_iter()
            .map(|inst| self.solve_one(inst, &config))
            .collect()
    }

    pub fn run(&self, id: u8) -> CriterionReport {
        let criterion = *CRITERIA
            .iter()
            .find(|c| c.id == id)
            .expect("criterion ids are 1..=11");
        let start = Instant::now();
        let mut notes = Vec::new();
        let checks = match id {
            1 => self.closed_form(),
            2 => self.winnerpay_linear_bounds(&mut notes),
            3 => self.sqrt_scaling(&mut notes),
            4 => self.uniform(PaymentRule::AllPay),
            5 => self.uniform(PaymentRule::WinnersPay),
            6 => self.many_bidders(&mut notes),
            7 => self.log_bound(&mut notes),
            8 => self.ordering(&mut notes),
            9 => self.gradient_soundness(&mut notes),
            10 => self.uniqueness(),
            11 => self.agreement(&mut notes),
            _ => unreachable!(),
        };
        CriterionReport {
            criterion,
            checks,
            notes,
            elapsed: start.elapsed(),
        }
    }

    pub fn run_many(&self, ids: &[u8]) -> Vec<CriterionReport> {
        ids.iter().map(|&id| self.run(id)).collect()
    }

    /// Certified-solution check shared by every solve: a solver error or an
    /// uncertified result becomes a failing check and yields `None`.
    fn certified<'a>(
        &self,
        s: &'a Solved,
        checks: &mut Vec<Check>,
        what: &str,
    ) -> Option<&'a EquilibriumResult> {
        match &s.result {
            Err(e) => {
                checks.push(Check::error(format!("{what} {}", label(&s.instance)), e));
                None
            }
            Ok(r) => {
                checks.push(Check::new(
                    format!("{what} {} certified", label(&s.instance)),
                    r.converged,
                    format!(
                        "epsilon {:.3e} after {} iterations",
                        r.epsilon, r.iterations
                    ),
                ));
                Some(r)
            }
        }
    }

    fn closed_form(&self) -> Vec<Check> {
        let grid = instances(1);
        let mut checks = Vec::new();
        for method in [Method::Giga, Method::BestResponseIteration] {
            for s in self.solve_all(&grid, method) {
                let alpha = s.instance.values().alpha();
                let gamma = s.instance.weight().gamma().expect("power weight");
                let ag = alpha.powf(gamma);
                let low = gamma * ag / ((1.0 + ag) * (1.0 + ag));
                let high = alpha * low;
                let revenue = (1.0 + alpha) * low;
                let name = format!("{method:?} {}", label(&s.instance));
                checks.push(Check::new(
                    format!("{name} runtime"),
                    s.elapsed <= Duration::from_secs(1),
                    format!("{:.3}s", s.elapsed.as_secs_f64()),
                ));
                let Ok(r) = &s.result else {
                    checks.push(Check::error(name, s.result.as_ref().unwrap_err()));
                    continue;
                };
                let b = r.bids.as_slice();
                let err = (b[0] - high).abs().max((b[1] - low).abs());
                checks.push(Check::new(
                    format!("{name} bids"),
                    err <= 1e-5,
                    format!("max error {err:.2e}"),
                ));
                checks.push(Check::new(
                    format!("{name} epsilon"),
                    r.epsilon <= 1e-7,
                    format!("{:.2e}", r.epsilon),
                ));
                let rev = rel_err(r.revenue, revenue);
                checks.push(Check::new(
                    format!("{name} revenue"),
                    rev <= 1e-5,
                    format!("relative error {rev:.2e}"),
                ));
            }
        }
        checks
    }

    fn winnerpay_linear_bounds(&self, notes: &mut Vec<String>) -> Vec<Check> {
        let mut checks = Vec::new();
        for s in self.solve_all(&instances(2), Method::BestResponseIteration) {
            let Some(r) = self.certified(&s, &mut checks, "solve") else {
                continue;
            };
            let alpha = s.instance.values().alpha();
            let (high, low) = (r.bids.get(0), r.bids.get(1));
            let name = format!("alpha={alpha:.4e}");
            checks.push(Check::new(
                format!("{name} low bid in [1/3, 1/2]"),
                (1.0 / 3.0 - 1e-6..=0.5 + 1e-6).contains(&low),
                format!("{low:.9}"),
            ));
            let floor = (1.0 / 9.0 + alpha / 3.0).sqrt() - 1.0 / 3.0;
            checks.push(Check::new(
                format!("{name} high bid lower bound"),
                high >= floor - 1e-6,
                format!("{high:.6} vs {floor:.6}"),
            ));
            if alpha >= 1e4 * (1.0 - 1e-12) {
                let ratio = r.revenue / alpha.sqrt();
                notes.push(format!(
                    "alpha={alpha:.0e}: revenue/sqrt(alpha) = {ratio:.6}"
                ));
                checks.push(Check::new(
                    format!("{name} revenue/sqrt(alpha) in [0.5, 0.65]"),
                    (0.5..=0.65).contains(&ratio),
                    format!("{ratio:.6}"),
                ));
            }
        }
        checks
    }

    fn sqrt_scaling(&self, notes: &mut Vec<String>) -> Vec<Check> {
        let mut checks = Vec::new();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in self.solve_all(&instances(3), Method::BestResponseIteration) {
            if let Some(r) = self.certified(&s, &mut checks, "solve") {
                xs.push(s.instance.values().alpha().ln());
                ys.push(r.revenue.ln());
            }
        }
        let m = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let slope = sxy / sxx;
        notes.push(format!(
            "least-squares slope {slope:.5} over {} points",
            xs.len()
        ));
        checks.push(Check::new(
            "log-log slope in [0.60, 0.72]",
            (0.60..=0.72).contains(&slope),
            format!("{slope:.5}"),
        ));
        checks
    }

    fn uniform(&self, rule: PaymentRule) -> Vec<Check> {
        let id = if rule == PaymentRule::AllPay { 4 } else { 5 };
        let mut checks = Vec::new();
        for s in self.solve_all(&instances(id), Method::BestResponseIteration) {
            let Some(r) = self.certified(&s, &mut checks, "solve") else {
                continue;
            };
            let n = s.instance.n() as f64;
            let value = s.instance.values().alpha();
            let gamma = s.instance.weight().gamma().expect("power weight");
            let name = label(&s.instance);
            let bid = match rule {
                PaymentRule::AllPay => gamma * (n - 1.0) * value / (n * n),
                PaymentRule::WinnersPay => value * (n - 1.0) * gamma / ((n - 1.0) * gamma + n),
            };
            let worst = r
                .bids
                .as_slice()
                .iter()
                .map(|&b| rel_err(b, bid))
                .fold(0.0f64, f64::max);
            checks.push(Check::new(
                format!("{name} bids"),
                worst <= 1e-6,
                format!("relative error {worst:.2e}"),
            ));
            match rule {
                PaymentRule::AllPay => {
                    let revenue = (n - 1.0) * gamma * value / n;
                    let e = rel_err(r.revenue, revenue);
                    checks.push(Check::new(
                        format!("{name} revenue"),
                        e <= 1e-6,
                        format!("relative error {e:.2e}"),
                    ));
                }
                PaymentRule::WinnersPay if gamma == 1.0 => {
                    let printed = value / (1.0 + n / (n - 1.0));
                    let e = rel_err(printed, bid);
                    checks.push(Check::new(
                        format!("{name} linear-weight form"),
                        e <= 1e-12,
                        format!("{printed} vs {bid}"),
                    ));
                    let e = r
                        .bids
                        .as_slice()
                        .iter()
                        .map(|&b| rel_err(b, printed))
                        .fold(0.0f64, f64::max);
                    checks.push(Check::new(
                        format!("{name} bids vs linear-weight form"),
                        e <= 1e-6,
                        format!("relative error {e:.2e}"),
                    ));
                }
                PaymentRule::WinnersPay => {}
            }
        }
        checks
    }

    fn many_bidders(&self, notes: &mut Vec<String>) -> Vec<Check> {
        let mut checks = Vec::new();
        let mut revenue = BTreeMap::new();
        for s in self.solve_all(&instances(6), Method::BestResponseIteration) {
            if let Some(r) = self.certified(&s, &mut checks, "solve") {
                let gamma = s.instance.weight().gamma().expect("power weight");
                let key = (
                    s.instance.rule().as_str(),
                    (gamma * 100.0) as u32,
                    s.instance.n(),
                );
                notes.push(format!(
                    "{} gamma={gamma} n={}: revenue {:.6}, low bid {:.6}",
                    key.0,
                    key.2,
                    r.revenue,
                    r.bids.get(s.instance.n() - 1)
                ));
                revenue.insert(key, r.revenue);
            }
        }
        for gamma in [0.5, 1.0] {
            let g = (gamma * 100.0) as u32;
            let target = gamma / (1.0 + gamma);
            if let Some(&r50) = revenue.get(&("winners_pay", g, 50)) {
                let e = rel_err(r50, target);
                checks.push(Check::new(
                    format!("winners_pay gamma={gamma} n=50 revenue within 10% of {target:.4}"),
                    e <= 0.10,
                    format!("{r50:.6} (relative gap {e:.3})"),
                ));
                if let Some(&r25) = revenue.get(&("winners_pay", g, 25)) {
                    let d = (r50 - r25).abs();
                    checks.push(Check::new(
                        format!("winners_pay gamma={gamma} |revenue(50) - revenue(25)| <= 0.02"),
                        d <= 0.02,
                        format!("{d:.6}"),
                    ));
                }
            }
            if let Some(&r50) = revenue.get(&("all_pay", g, 50)) {
                let e = rel_err(r50, gamma);
                checks.push(Check::new(
                    format!("all_pay gamma={gamma} n=50 revenue within 15% of {gamma}"),
                    e <= 0.15,
                    format!("{r50:.6} (relative gap {e:.3})"),
                ));
            }
        }
        checks
    }

    fn log_bound(&self, notes: &mut Vec<String>) -> Vec<Check> {
        let mut checks = Vec::new();
        let mut ratios: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
        for s in self.solve_all(&instances(7), Method::BestResponseIteration) {
            let Some(r) = self.certified(&s, &mut checks, "solve") else {
                continue;
            };
            let alpha = s.instance.values().alpha();
            let ratio = r.bids.get(0) * alpha.ln().powi(2) / alpha;
            notes.push(format!(
                "{} alpha={alpha:.0e}: high bid {:.6}, ratio {ratio:.6}",
                s.instance.rule(),
                r.bids.get(0)
            ));
            checks.push(Check::new(
                format!("{} alpha={alpha:.0e} ratio <= 4", s.instance.rule()),
                ratio <= 4.0,
                format!("{ratio:.6}"),
            ));
            ratios
                .entry(s.instance.rule().as_str())
                .or_default()
                .push((alpha, ratio));
        }
        for (rule, mut list) in ratios {
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            let top = &list[list.len().saturating_sub(3)..];
            let monotone = top.windows(2).all(|w| w[1].1 <= w[0].1);
            checks.push(Check::new(
                format!("{rule} ratio non-increasing over the top two decades"),
                monotone,
                format!("{:?}", top.iter().map(|p| p.1).collect::<Vec<_>>()),
            ));
        }
        checks
    }

    fn ordering(&self, notes: &mut Vec<String>) -> Vec<Check> {
        let mut checks = Vec::new();
        let mut revenue = BTreeMap::new();
        for s in self.solve_all(&instances(8), Method::BestResponseIteration) {
            if let Some(r) = self.certified(&s, &mut checks, "solve") {
                revenue.insert((s.instance.weight().to_string(), s.instance.n()), r.revenue);
            }
        }
        // the n = 2 points of the second grid are the first grid's
        let get = |w: &str, n: usize| revenue.get(&(w.to_string(), n)).copied();
        let two: Vec<Option<f64>> = ["power:0.25", "power:0.5", "power:1"]
            .iter()
            .map(|w| get(w, 2))
            .collect();
        notes.push(format!(
            "n=2 revenue: x^(1/4) {:?}, sqrt {:?}, linear {:?}",
            two[0], two[1], two[2]
        ));
        for (hi, lo, what) in [(0, 1, "x^(1/4) > sqrt"), (1, 2, "sqrt > linear")] {
            if let (Some(a), Some(b)) = (two[hi], two[lo]) {
                checks.push(Check::new(
                    format!("n=2 {what} by > 1e-3"),
                    a - b > 1e-3,
                    format!("{a:.6} vs {b:.6}"),
                ));
            }
        }
        for w in ["power:1", "power:0.5"] {
            let series: Vec<Option<f64>> = (2..=5).map(|n| get(w, n)).collect();
            notes.push(format!("{w} revenue for n=2..5: {series:?}"));
            let increasing = series.iter().all(Option::is_some)
                && series.windows(2).all(|p| p[1].unwrap() > p[0].unwrap());
            checks.push(Check::new(
                format!("{w} revenue strictly increasing in n"),
                increasing,
                format!("{series:?}"),
            ));
        }
        checks
    }

    fn gradient_soundness(&self, notes: &mut Vec<String>) -> Vec<Check> {
        let weights = [
            WeightSpec::linear(),
            power(0.5),
            power(0.25),
            power(0.75),
            WeightSpec::log1p(),
            WeightSpec::iterated_log(2).expect("depth 2 is supported"),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.seed);
        let mut worst: f64 = 0.0;
        let mut failed = Vec::new();
        for case in 0..self.settings.gradient_cases {
            let rule = if rng.gen_bool(0.5) {
                PaymentRule::AllPay
            } else {
                PaymentRule::WinnersPay
            };
            let w = weights[rng.gen_range(0..weights.len())];
            let n = rng.gen_range(2..=6);
            let values: Vec<f64> = (0..n)
                .map(|_| 10f64.powf(rng.gen_range(-1.0..2.0)))
                .collect();
            let instance = AuctionInstance::from_values(rule, values, w).expect("positive values");
            let bids: Vec<f64> = instance
                .values()
                .values()
                .iter()
                .map(|&v| v * rng.gen_range(0.05..0.95))
                .collect();
            let bids = BidVector::new(bids, instance.values()).expect("bids inside [0, v]");
            let i = rng.gen_range(0..n);
            let others = instance.sigma_others(&bids, i);
            let b = bids.get(i);

            let analytic = (self.gradient)(&instance, i, b, others);
            let central = |h: f64| {
                (instance.utility_gain(i, b, b + h, others)
                    - instance.utility_gain(i, b, b - h, others))
                    / (2.0 * h)
            };
            let h = 1e-3 * b;
            let numeric = (4.0 * central(h / 2.0) - central(h)) / 3.0;
            let err = (analytic - numeric).abs()
                / analytic.abs().max(numeric.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max(err);
            if err.is_nan() || err > 1e-6 {
                failed.push(format!(
                    "case {case} {} bidder {i}: {analytic} vs {numeric}",
                    label(&instance)
                ));
            }
        }
        notes.push(format!(
            "worst relative error {worst:.2e} over {} cases",
            self.settings.gradient_cases
        ));
        let mut checks = vec![Check::new(
            format!(
                "{} random configurations within 1e-6",
                self.settings.gradient_cases
            ),
            failed.is_empty(),
            format!("{} failures, worst {worst:.2e}", failed.len()),
        )];
        checks.extend(
            failed
                .into_iter()
                .take(10)
                .map(|f| Check::new("gradient mismatch", false, f)),
        );
        checks
    }

    fn uniqueness(&self) -> Vec<Check> {
        let grid = uniqueness_grid();
        let settings = &self.settings;
        grid.par_iter()
            .enumerate()
            .flat_map_iter(|(k, instance)| {
                let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ (k as u64 + 1));
                let mut checks = Vec::new();
                let mut reference: Option<Vec<f64>> = None;
                let mut spread: f64 = 0.0;
                let mut sorted = true;
                let mut certified = 0;
                let runs = settings.random_starts;
                for run in 0..runs {
                    let start: Vec<f64> = instance
                        .values()
                        .values()
                        .iter()
                        .map(|&v| v * rng.gen_range(1e-6..1.0))
                        .collect();
                    // alternate solvers so both face the random starts
                    let method = if run % 2 == 0 {
                        Method::BestResponseIteration
                    } else {
                        Method::Giga
                    };
                    let config = SolverConfig {
                        initial_bids: Some(start),
                        ..self.config(method)
                    };
                    match solve(instance, &config) {
                        Err(e) => {
                            checks.push(Check::error(format!("{} run {run}", label(instance)), e))
                        }
                        Ok(r) => {
                            certified += r.converged as usize;
                            let b = r.bids.as_slice();
                            sorted &= b.windows(2).all(|p| p[0] >= p[1] - 1e-8);
                            match &reference {
                                None => reference = Some(b.to_vec()),
                                Some(x) => {
                                    spread = x
                                        .iter()
                                        .zip(b)
                                        .fold(spread, |m, (p, q)| m.max((p - q).abs()));
                                }
                            }
                        }
                    }
                }
                let name = label(instance);
                checks.push(Check::new(
                    format!("{name} all runs certified"),
                    certified == runs,
                    format!("{certified}/{runs}"),
                ));
                checks.push(Check::new(
                    format!("{name} identical within 1e-4"),
                    spread <= 1e-4,
                    format!("spread {spread:.2e}"),
                ));
                checks.push(Check::new(
                    format!("{name} bids sorted"),
                    sorted,
                    String::new(),
                ));
                checks
            })
            .collect()
    }

    fn agreement(&self, notes: &mut Vec<String>) -> Vec<Check> {
        let mut grid: Vec<AuctionInstance> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for id in 1..=8 {
            for inst in instances(id) {
                let key = format!(
                    "{} {} {:?}",
                    inst.rule(),
                    inst.weight(),
                    inst.values().values()
                );
                if seen.insert(key) {
                    grid.push(inst);
                }
            }
        }
        let br = self.config(Method::BestResponseIteration);
        let giga = self.config(Method::Giga);
        let pairs: Vec<(Solved, Solved)> = grid
            .par_iter()
            .map(|inst| (self.solve_one(inst, &br), self.solve_one(inst, &giga)))
            .collect();

        let mut checks = Vec::new();
        let mut worst_inflation: f64 = 0.0;
        for (a, b) in &pairs {
            let name = label(&a.instance);
            match (a.bids(), b.bids()) {
                (Some(x), Some(y)) => {
                    let d = x
                        .iter()
                        .zip(y)
                        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
                    let g = b.result.as_ref().expect("bids imply a result");
                    checks.push(Check::new(
                        format!("{name} solvers agree within 1e-4"),
                        d <= 1e-4,
                        format!(
                            "max difference {d:.2e}; GIGA epsilon {:.2e} after {} steps",
                            g.epsilon, g.iterations
                        ),
                    ));
                }
                _ => checks.push(Check::new(
                    format!("{name} both solvers return"),
                    false,
                    "solver error",
                )),
            }
            for s in [a, b] {
                let Ok(r) = &s.result else { continue };
                let fine = certify(&s.instance, &r.bids, br.oracle_tol / 10.0).map(|c| c.epsilon);
                match fine {
                    Ok(fine) => {
                        let inflation = if r.epsilon > 0.0 {
                            fine / r.epsilon
                        } else if fine > 0.0 {
                            f64::INFINITY
                        } else {
                            1.0
                        };
                        worst_inflation = worst_inflation.max(inflation);
                        checks.push(Check::new(
                            format!("{name} {:?} finer certificate within 10%", r.method),
                            fine <= 1.1 * r.epsilon,
                            format!("{:.3e} -> {fine:.3e}", r.epsilon),
                        ));
                    }
                    Err(e) => checks.push(Check::error(format!("{name} recertify"), e)),
                }
            }
        }
        notes.push(format!(
            "{} instances, worst certificate inflation factor {worst_inflation:.3}",
            grid.len()
        ));
        checks
    }
}
