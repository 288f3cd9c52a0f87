use crate::mechanism::{AuctionInstance, PaymentRule};
use crate::weights::WeightSpec;

const MAX_BISECTIONS: u32 = 4000;

/// Bisects a decreasing predicate on `[lo, hi]` down to adjacent floats.
/// `positive(x)` must be true left of the root and false right of it.
fn bisect(mut lo: f64, mut hi: f64, geometric: bool, positive: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        let mid = if geometric && lo > 0.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if !(mid > lo && mid < hi) {
            break;
        }
        if positive(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bid solving one bidder's first-order condition when the total weight of
/// all bidders, own included, is `total`. Zero when the bidder drops out.
fn bid_for_total(rule: PaymentRule, weight: &WeightSpec, value: f64, total: f64) -> f64 {
    // Each condition is strictly decreasing in the bid on the region where
    // the own weight stays below the total.
    let foc = |b: f64| -> f64 {
        let wb = weight.eval_unchecked(b);
        let rest = total - wb;
        if rest <= 0.0 {
            return -1.0;
        }
        let slope = weight.deriv_unchecked(b);
        match rule {
            PaymentRule::AllPay => value * slope * rest - total * total,
            PaymentRule::WinnersPay => slope * (value - b) * rest - wb * total,
        }
    };
    if foc(0.0) <= 0.0 {
        return 0.0;
    }
    if foc(value) >= 0.0 {
        return value;
    }
    bisect(0.0, value, false, |b| foc(b) > 0.0)
}

/// Equilibrium bids found through the total weight.
///
/// For a fixed total, each bidder's share `w(b_i)/total` solving the
/// first-order condition is unique and strictly decreasing in the total, so
/// the consistent total is the root of a monotone scalar function.
pub(crate) fn equilibrium_by_total(instance: &AuctionInstance) -> Vec<f64> {
    let values = instance.values().values();
    let weight = instance.weight();
    let rule = instance.rule();
    let bids_at = |total: f64| -> Vec<f64> {
        values
            .iter()
            .map(|&v| bid_for_total(rule, weight, v, total))
            .collect()
    };
    let excess = |total: f64| -> bool {
        let sum: f64 = bids_at(total)
            .iter()
            .map(|&b| weight.eval_unchecked(b))
            .sum();
        sum > total
    };

    let hi: f64 = values.iter().map(|&v| weight.eval_unchecked(v)).sum();
    let mut lo = hi;
    for _ in 0..MAX_BISECTIONS {
        lo *= 0.5;
        if lo == 0.0 || excess(lo) {
            break;
        }
    }
    let total = bisect(lo, hi, true, excess);
    bids_at(total)
}
