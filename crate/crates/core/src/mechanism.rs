//! The single-item auction game: allocation, utilities, gradients,
//! revenue, efficiency and first-order-condition residuals.
//!
//! Bidders are indexed in nonincreasing order of value. [`ValuationProfile`]
//! keeps the permutation back to the caller's order for reporting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaymentRule {
    /// Every bidder pays their bid.
    AllPay,
    /// Only the bidder who receives the item pays, and pays their bid.
    WinnersPay,
}

impl PaymentRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            PaymentRule::AllPay => "all_pay",
            PaymentRule::WinnersPay => "winners_pay",
        }
    }
}

impl fmt::Display for PaymentRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PaymentRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('-', "_").as_str() {
            "all_pay" | "allpay" => Ok(PaymentRule::AllPay),
            "winners_pay" | "winnerspay" | "winner_pay" => Ok(PaymentRule::WinnersPay),
            _ => Err(Error::Parse {
                what: "payment rule",
                input: s.to_string(),
            }),
        }
    }
}

/// Bidder values sorted nonincreasing, at least two of them, all positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationProfile {
    values: Vec<f64>,
    /// `order[k]` is the caller's index of the bidder at sorted position `k`.
    order: Vec<usize>,
}

impl ValuationProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Invalid(format!(
                "need at least two bidders, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Invalid(format!(
                "values must be positive and finite, got {v}"
            )));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        // stable: equal values keep the caller's relative order
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let sorted = order.iter().map(|&k| values[k]).collect();
        Ok(Self {
            values: sorted,
            order,
        })
    }

    /// The profile `(alpha, low, ..., low)` with `n` bidders.
    pub fn one_high(alpha: f64, low: f64, n: usize) -> Result<Self> {
        let mut v = vec![low; n];
        if let Some(first) = v.first_mut() {
            *first = alpha;
        }
        Self::new(v)
    }

    pub fn uniform(value: f64, n: usize) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Highest value.
    pub fn alpha(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn original_order(&self) -> &[usize] {
        &self.order
    }

    /// Reorders a per-bidder vector from sorted positions to the caller's order.
    pub fn to_original<T: Copy>(&self, sorted: &[T]) -> Vec<T> {
        let mut out = sorted.to_vec();
        for (k, &orig) in self.order.iter().enumerate() {
            out[orig] = sorted[k];
        }
        out
    }

    /// Reorders a per-bidder vector from the caller's order to sorted positions.
    pub fn from_original<T: Copy>(&self, original: &[T]) -> Vec<T> {
        self.order.iter().map(|&k| original[k]).collect()
    }
}

/// One strategy profile, aligned with the sorted values of its instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BidVector(Vec<f64>);

impl BidVector {
    /// Validates `b_i` in `[0, v_i]` for bids given in sorted-value order.
    pub fn new(bids: Vec<f64>, values: &ValuationProfile) -> Result<Self> {
        if bids.len() != values.len() {
            return Err(Error::Invalid(format!(
                "{} bids for {} bidders",
                bids.len(),
                values.len()
            )));
        }
        for (i, (&b, &v)) in bids.iter().zip(values.values()).enumerate() {
            if !(b.is_finite() && (0.0..=v).contains(&b)) {
                return Err(Error::Invalid(format!(
                    "bid {b} of bidder {i} outside [0, {v}]"
                )));
            }
        }
        Ok(Self(bids))
    }

    /// Bids listed in the caller's original bidder order.
    pub fn from_original(bids: &[f64], values: &ValuationProfile) -> Result<Self> {
        if bids.len() != values.len() {
            return Err(Error::Invalid(format!(
                "{} bids for {} bidders",
                bids.len(),
                values.len()
            )));
        }
        Self::new(values.from_original(bids), values)
    }

    pub(crate) fn from_vec_unchecked(bids: Vec<f64>) -> Self {
        Self(bids)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Copy of the profile with bidder `i` moved to `bid` (unvalidated).
    pub fn with_bid(&self, i: usize, bid: f64) -> Self {
        let mut b = self.0.clone();
        b[i] = bid;
        Self(b)
    }

    pub fn max_abs_diff(&self, other: &BidVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The game: a payment rule, the bidders' values and the allocation weight.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionInstance {
    rule: PaymentRule,
    values: ValuationProfile,
    weight: WeightSpec,
}

impl AuctionInstance {
    pub fn new(rule: PaymentRule, values: ValuationProfile, weight: WeightSpec) -> Self {
        Self {
            rule,
            values,
            weight,
        }
    }

    pub fn from_values(rule: PaymentRule, values: Vec<f64>, weight: WeightSpec) -> Result<Self> {
        Ok(Self::new(rule, ValuationProfile::new(values)?, weight))
    }

    pub fn rule(&self) -> PaymentRule {
        self.rule
    }

    pub fn values(&self) -> &ValuationProfile {
        &self.values
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values.values()[i]
    }

    /// Validated bid vector in sorted-value order.
    pub fn bids(&self, bids: Vec<f64>) -> Result<BidVector> {
        BidVector::new(bids, &self.values)
    }

    fn check_len(&self, bids: &BidVector) -> Result<()> {
        if bids.len() != self.n() {
            return Err(Error::Invalid(format!(
                "{} bids for {} bidders",
                bids.len(),
                self.n()
            )));
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::Invalid(format!(
                "bidder {i} out of range for {} bidders",
                self.n()
            )));
        }
        Ok(())
    }

    fn weights_of(&self, bids: &BidVector) -> Vec<f64> {
        bids.as_slice()
            .iter()
            .map(|&b| self.weight.eval_unchecked(b))
            .collect()
    }

    /// Total weight of all bids.
    pub fn sigma(&self, bids: &BidVector) -> f64 {
        bids.as_slice()
            .iter()
            .map(|&b| self.weight.eval_unchecked(b))
            .sum()
    }

    /// Total weight of everyone except bidder `i`, summed directly rather
    /// than by subtraction from the full total.
    pub fn sigma_others(&self, bids: &BidVector, i: usize) -> f64 {
        bids.as_slice()
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &b)| self.weight.eval_unchecked(b))
            .sum()
    }

    pub fn allocation_probabilities(&self, bids: &BidVector) -> Result<Vec<f64>> {
        self.check_len(bids)?;
        let w = self.weights_of(bids);
        let sigma: f64 = w.iter().sum();
        if sigma <= 0.0 {
            return Err(Error::DegenerateProfile);
        }
        Ok(w.into_iter().map(|wi| wi / sigma).collect())
    }

    pub fn utility(&self, i: usize, bids: &BidVector) -> Result<f64> {
        self.check_len(bids)?;
        self.check_index(i)?;
        let others = self.sigma_others(bids, i);
        let b = bids.get(i);
        if others + self.weight.eval_unchecked(b) <= 0.0 {
            return Err(Error::DegenerateProfile);
        }
        Ok(self.unilateral_utility(i, b, others))
    }

    /// `u_i` when bidder `i` bids `bid` against opponents of total weight `others`.
    /// Caller guarantees `w(bid) + others > 0`.
    pub fn unilateral_utility(&self, i: usize, bid: f64, others: f64) -> f64 {
        let v = self.value(i);
        let wb = self.weight.eval_unchecked(bid);
        let p = wb / (wb + others);
        match self.rule {
            PaymentRule::AllPay => v * p - bid,
            PaymentRule::WinnersPay => p * (v - bid),
        }
    }

    /// `u_i(to) - u_i(from)` with `b_{-i}` fixed, in a form free of the
    /// cancellation between two large utilities.
    pub fn utility_gain(&self, i: usize, from: f64, to: f64, others: f64) -> f64 {
        let v = self.value(i);
        let d = to - from;
        let w_from = self.weight.eval_unchecked(from);
        let dw = self.weight.increment(from, d);
        let w_to = w_from + dw;
        let s_from = w_from + others;
        let s_to = w_to + others;
        match self.rule {
            PaymentRule::AllPay => v * others * dw / (s_to * s_from) - d,
            PaymentRule::WinnersPay => {
                (dw * (v - from) * others - s_from * d * w_to) / (s_to * s_from)
            }
        }
    }

    pub fn utility_gradient(&self, i: usize, bids: &BidVector) -> Result<f64> {
        self.check_len(bids)?;
        self.check_index(i)?;
        let b = bids.get(i);
        if b <= 0.0 {
            return Err(Error::Domain(format!(
                "gradient of bidder {i} requires a positive bid, got {b}"
            )));
        }
        let others = self.sigma_others(bids, i);
        if others + self.weight.eval_unchecked(b) <= 0.0 {
            return Err(Error::DegenerateProfile);
        }
        Ok(self.unilateral_gradient(i, b, others))
    }

    /// `du_i/db_i` at a positive `bid` against opponents of total weight `others`.
    pub fn unilateral_gradient(&self, i: usize, bid: f64, others: f64) -> f64 {
        let v = self.value(i);
        let wb = self.weight.eval_unchecked(bid);
        let dw = self.weight.deriv_unchecked(bid);
        let sigma = wb + others;
        match self.rule {
            PaymentRule::AllPay => v * dw * others / (sigma * sigma) - 1.0,
            PaymentRule::WinnersPay => (dw * (v - bid) * others - wb * sigma) / (sigma * sigma),
        }
    }

    pub fn revenue(&self, bids: &BidVector) -> Result<f64> {
        self.check_len(bids)?;
        match self.rule {
            PaymentRule::AllPay => Ok(bids.as_slice().iter().sum()),
            PaymentRule::WinnersPay => {
                let p = self.allocation_probabilities(bids)?;
                Ok(p.iter().zip(bids.as_slice()).map(|(p, b)| p * b).sum())
            }
        }
    }

    pub fn efficiency(&self, bids: &BidVector) -> Result<f64> {
        let p = self.allocation_probabilities(bids)?;
        Ok(p.iter().zip(self.values.values()).map(|(p, v)| p * v).sum())
    }

    /// Signed residual of the stationarity condition of bidder `i`:
    /// `v_i - sigma^2 / (w'(b_i) (sigma - w(b_i)))` under all-pay and
    /// `v_i - b_i - w(b_i) sigma / (w'(b_i) (sigma - w(b_i)))` under winners-pay.
    pub fn foc_residual(&self, i: usize, bids: &BidVector) -> Result<f64> {
        self.check_len(bids)?;
        self.check_index(i)?;
        let b = bids.get(i);
        if b <= 0.0 {
            return Err(Error::Domain(format!(
                "first-order residual of bidder {i} requires a positive bid, got {b}"
            )));
        }
        let others = self.sigma_others(bids, i);
        if others <= 0.0 {
            return Err(Error::NoOpponentWeight(i));
        }
        let v = self.value(i);
        let wb = self.weight.eval_unchecked(b);
        let dw = self.weight.deriv_unchecked(b);
        let sigma = wb + others;
        Ok(match self.rule {
            PaymentRule::AllPay => v - sigma * sigma / (dw * others),
            PaymentRule::WinnersPay => v - b - wb * sigma / (dw * others),
        })
    }
}

/// JSON form of an instance, optionally with a bid profile, in the caller's
/// bidder order: `{"rule": "all_pay", "values": [..], "weight": "power:0.5", "bids": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub rule: PaymentRule,
    pub values: Vec<f64>,
    pub weight: WeightSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bids: Option<Vec<f64>>,
}

impl InstanceRecord {
    pub fn from_instance(instance: &AuctionInstance, bids: Option<&BidVector>) -> Self {
        let profile = instance.values();
        Self {
            rule: instance.rule(),
            values: profile.to_original(profile.values()),
            weight: *instance.weight(),
            bids: bids.map(|b| profile.to_original(b.as_slice())),
        }
    }

    pub fn instance(&self) -> Result<AuctionInstance> {
        AuctionInstance::from_values(self.rule, self.values.clone(), self.weight)
    }

    /// The instance and, if present, its validated bids in sorted order.
    pub fn into_parts(&self) -> Result<(AuctionInstance, Option<BidVector>)> {
        let instance = self.instance()?;
        let bids = match &self.bids {
            Some(b) => Some(BidVector::from_original(b, instance.values())?),
            None => None,
        };
        Ok((instance, bids))
    }
}
