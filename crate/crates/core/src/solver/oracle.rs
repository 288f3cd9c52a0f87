//! One-dimensional best responses and the epsilon-Nash certificate.

use crate::analytic::winnerpay_proportional_best_response;
use crate::error::{Error, Result};
use crate::mechanism::{AuctionInstance, BidVector, PaymentRule};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_GOLDEN_STEPS: usize = 400;
const MAX_BISECTIONS: usize = 200;

/// Shrinks `[lo, hi]` around the maximizer of a unimodal function until its
/// width is at most `tol`. `gain(c, d)` must return `f(d) - f(c)`. Ties keep
/// the left part, so plateaus resolve to their leftmost point.
pub fn golden_section_max<F>(mut lo: f64, mut hi: f64, tol: f64, gain: F) -> (f64, f64)
where
    F: Fn(f64, f64) -> f64,
{
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    for _ in 0..MAX_GOLDEN_STEPS {
        if hi - lo <= tol {
            break;
        }
        if gain(c, d) > 0.0 {
            lo = c;
            c = d;
            d = lo + INV_PHI * (hi - lo);
        } else {
            hi = d;
            d = c;
            c = hi - INV_PHI * (hi - lo);
        }
    }
    (lo, hi)
}

/// Maximizer of `u_i(., b_{-i})` over `[0, v_i]` against opponents of total weight `others > 0`.
pub(crate) fn best_response_against(
    instance: &AuctionInstance,
    i: usize,
    others: f64,
    tol: f64,
) -> f64 {
    let v = instance.value(i);
    let w = instance.weight();
    if instance.rule() == PaymentRule::WinnersPay && w.is_linear() {
        // others > 0 and v > 0 were established by the callers
        return winnerpay_proportional_best_response(others, v).unwrap_or(0.0);
    }

    let grad = |x: f64| instance.unilateral_gradient(i, x, others);
    if grad(v) >= 0.0 {
        return v;
    }
    if instance.rule() == PaymentRule::AllPay && v * w.deriv_at_zero() / others <= 1.0 {
        // all-pay utility is nonincreasing from zero on
        return 0.0;
    }

    let (lo, hi) = golden_section_max(0.0, v, tol, |c, d| instance.utility_gain(i, c, d, others));

    // refine on the sign of the analytic gradient inside a widened bracket
    let width = (hi - lo).max(f64::EPSILON * v);
    let mut a = (lo - width).max(0.0);
    let mut b = (hi + width).min(v);
    if a > 0.0 && grad(a) <= 0.0 {
        a = 0.0;
    }
    if b < v && grad(b) >= 0.0 {
        b = v;
    }
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if grad(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Best response of bidder `i` to the other entries of `bids` (entry `i` is ignored).
///
/// Golden-section search on the strictly concave own utility down to an
/// interval of width `tol`, refined by bisection on the analytic gradient.
/// Winners-pay with the linear weight uses the exact square-root response.
pub fn best_response(
    instance: &AuctionInstance,
    i: usize,
    bids: &BidVector,
    tol: f64,
) -> Result<f64> {
    if bids.len() != instance.n() || i >= instance.n() {
        return Err(Error::Invalid(format!(
            "bidder {i} / {} bids for {} bidders",
            bids.len(),
            instance.n()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!(
            "oracle tolerance must be positive, got {tol}"
        )));
    }
    let others = instance.sigma_others(bids, i);
    if others <= 0.0 {
        return Err(Error::NoOpponentWeight(i));
    }
    Ok(best_response_against(instance, i, others, tol))
}

/// Per-bidder outcome of a certificate evaluation.
#[derive(Debug, Clone)]
pub struct Certificate {
    /// Largest utility gain any single bidder can obtain by deviating.
    pub epsilon: f64,
    pub best_responses: Vec<f64>,
    pub gains: Vec<f64>,
}

pub(crate) fn others_weights(instance: &AuctionInstance, bids: &[f64]) -> Vec<f64> {
    let w = instance.weight();
    let weights: Vec<f64> = bids.iter().map(|&b| w.eval_unchecked(b)).collect();
    let n = weights.len();
    // prefix + suffix sums so no term is recovered by subtraction
    let mut suffix = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] + weights[k];
    }
    let mut prefix = 0.0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(prefix + suffix[k + 1]);
        prefix += weights[k];
    }
    out
}

/// Relative tolerance `tol` scaled by each bidder's value.
pub fn oracle_tol(instance: &AuctionInstance, i: usize, rel_tol: f64) -> f64 {
    rel_tol * instance.value(i).max(1.0)
}

pub fn certify(instance: &AuctionInstance, bids: &BidVector, rel_tol: f64) -> Result<Certificate> {
    if bids.len() != instance.n() {
        return Err(Error::Invalid(format!(
            "{} bids for {} bidders",
            bids.len(),
            instance.n()
        )));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::Invalid(format!(
            "oracle tolerance must be positive, got {rel_tol}"
        )));
    }
    let others = others_weights(instance, bids.as_slice());
    let mut best_responses = Vec::with_capacity(instance.n());
    let mut gains = Vec::with_capacity(instance.n());
    for (i, &s) in others.iter().enumerate() {
        if s <= 0.0 {
            return Err(if instance.sigma(bids) <= 0.0 {
                Error::DegenerateProfile
            } else {
                Error::NoOpponentWeight(i)
            });
        }
        let br = best_response_against(instance, i, s, oracle_tol(instance, i, rel_tol));
        let gain = instance.utility_gain(i, bids.get(i), br, s).max(0.0);
        best_responses.push(br);
        gains.push(gain);
    }
    let epsilon = gains.iter().copied().fold(0.0, f64::max);
    Ok(Certificate {
        epsilon,
        best_responses,
        gains,
    })
}

/// `max_i [u_i(BR_i(b_{-i}), b_{-i}) - u_i(b)]`, zero exactly at a pure Nash equilibrium.
/// `rel_tol` is the oracle tolerance relative to each bidder's value.
pub fn best_response_gap(
    instance: &AuctionInstance,
    bids: &BidVector,
    rel_tol: f64,
) -> Result<f64> {
    certify(instance, bids, rel_tol).map(|c| c.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightSpec;

    fn inst(rule: PaymentRule, values: &[f64], w: WeightSpec) -> AuctionInstance {
        AuctionInstance::from_values(rule, values.to_vec(), w).unwrap()
    }

    /// Dense grid oracle, independent of golden section and bisection.
    fn grid_best_response(a: &AuctionInstance, i: usize, bids: &BidVector) -> f64 {
        let v = a.value(i);
        let others = a.sigma_others(bids, i);
        let mut best = (f64::NEG_INFINITY, 0.0);
        let (mut lo, mut hi) = (0.0, v);
        for _ in 0..6 {
            for k in 0..=1000 {
                let x = lo + (hi - lo) * k as f64 / 1000.0;
                let u = a.unilateral_utility(i, x, others);
                if u > best.0 {
                    best = (u, x);
                }
            }
            let step = (hi - lo) / 1000.0;
            lo = (best.1 - 2.0 * step).max(0.0);
            hi = (best.1 + 2.0 * step).min(v);
        }
        best.1
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let f = |x: f64| -(x - 0.3) * (x - 0.3);
        let (lo, hi) = golden_section_max(0.0, 1.0, 1e-10, |c, d| f(d) - f(c));
        assert!(hi - lo <= 1e-10);
        assert!((0.5 * (lo + hi) - 0.3).abs() < 1e-9);
    }

    #[test]
    fn golden_section_plateau_goes_left() {
        let f = |x: f64| if x < 0.2 { x } else { 0.2 };
        let (lo, hi) = golden_section_max(0.0, 1.0, 1e-9, |c, d| f(d) - f(c));
        assert!((0.5 * (lo + hi) - 0.2).abs() < 1e-8);
    }

    #[test]
    fn best_response_examples() {
        let a = inst(PaymentRule::WinnersPay, &[1.0, 1.0], WeightSpec::linear());
        let b = a.bids(vec![0.0, 1.0 / 3.0]).unwrap();
        assert!((best_response(&a, 0, &b, 1e-12).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let a = inst(
            PaymentRule::AllPay,
            &[4.0, 1.0],
            WeightSpec::power(0.5).unwrap(),
        );
        let b = a.bids(vec![0.0, 1.0 / 9.0]).unwrap();
        assert!((best_response(&a, 0, &b, 1e-12).unwrap() - 4.0 / 9.0).abs() < 1e-8);
        let b = a.bids(vec![4.0 / 9.0, 0.7]).unwrap();
        assert!((best_response(&a, 1, &b, 1e-12).unwrap() - 1.0 / 9.0).abs() < 1e-8);

        let zero = a.bids(vec![0.0, 0.0]).unwrap();
        assert_eq!(
            best_response(&a, 0, &zero, 1e-12),
            Err(Error::NoOpponentWeight(0))
        );
    }

    #[test]
    fn best_response_against_overwhelming_opponents_is_interior() {
        let a = inst(
            PaymentRule::WinnersPay,
            &[1e3, 1.0],
            WeightSpec::power(0.5).unwrap(),
        );
        let b = a.bids(vec![1e3, 1.0]).unwrap();
        let br = best_response(&a, 1, &b, 1e-12).unwrap();
        assert!(br > 0.0 && br < 1.0);
    }

    #[test]
    fn proportional_allpay_can_drop_out() {
        // v w'(0) / s <= 1 makes zero the best bid
        let a = inst(PaymentRule::AllPay, &[2.0, 1.0], WeightSpec::linear());
        let b = a.bids(vec![1.5, 0.3]).unwrap();
        assert_eq!(best_response(&a, 1, &b, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn best_response_matches_grid_oracle() {
        let weights = [
            WeightSpec::linear(),
            WeightSpec::power(0.5).unwrap(),
            WeightSpec::power(0.25).unwrap(),
            WeightSpec::log1p(),
            WeightSpec::iterated_log(2).unwrap(),
        ];
        for rule in [PaymentRule::AllPay, PaymentRule::WinnersPay] {
            for w in weights {
                for values in [
                    vec![4.0, 1.0],
                    vec![50.0, 3.0, 1.0],
                    vec![1.0, 1.0, 1.0, 1.0],
                ] {
                    let bids: Vec<f64> = values.iter().map(|v| 0.3 * v).collect();
                    let a = inst(rule, &values, w);
                    let b = a.bids(bids).unwrap();
                    for i in 0..a.n() {
                        let br = best_response(&a, i, &b, 1e-12).unwrap();
                        let grid = grid_best_response(&a, i, &b);
                        let others = a.sigma_others(&b, i);
                        let du = a.unilateral_utility(i, grid, others)
                            - a.unilateral_utility(i, br, others);
                        assert!(
                            du <= 1e-12 * a.value(i),
                            "{rule} {w} {values:?} {i}: {br} vs {grid}"
                        );
                        assert!((br - grid).abs() <= 1e-6 * a.value(i));
                    }
                }
            }
        }
    }

    #[test]
    fn gap_examples() {
        let a = inst(
            PaymentRule::AllPay,
            &[4.0, 1.0],
            WeightSpec::power(0.5).unwrap(),
        );
        let eq = a.bids(vec![4.0 / 9.0, 1.0 / 9.0]).unwrap();
        assert!(best_response_gap(&a, &eq, 1e-12).unwrap() <= 1e-8);
        let off = a.bids(vec![1.0, 1.0]).unwrap();
        assert!(best_response_gap(&a, &off, 1e-12).unwrap() > 0.0);

        let a = inst(PaymentRule::WinnersPay, &[1.0, 1.0], WeightSpec::linear());
        let eq = a.bids(vec![1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!(best_response_gap(&a, &eq, 1e-12).unwrap() <= 1e-10);

        let zero = a.bids(vec![0.0, 0.0]).unwrap();
        assert_eq!(
            best_response_gap(&a, &zero, 1e-12),
            Err(Error::DegenerateProfile)
        );
    }

    #[test]
    fn others_weights_match_direct_sums() {
        let a = inst(
            PaymentRule::AllPay,
            &[9.0, 4.0, 2.0, 1.0],
            WeightSpec::power(0.5).unwrap(),
        );
        let b = a.bids(vec![4.0, 1.0, 0.25, 0.0]).unwrap();
        let o = others_weights(&a, b.as_slice());
        #[allow(clippy::needless_range_loop)]
        for i in 0..4 {
            assert!((o[i] - a.sigma_others(&b, i)).abs() < 1e-15);
        }
    }
}
