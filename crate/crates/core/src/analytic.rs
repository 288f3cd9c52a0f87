//! Closed-form equilibria and revenue bounds.
//!
//! These are independent of the numerical solvers and serve as their oracles.
//! Logarithms are natural throughout.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::PaymentRule;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Invalid(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::Invalid(format!(
            "alpha must be finite and at least 1, got {alpha}"
        )));
    }
    Ok(())
}

/// Equilibrium of the two-bidder all-pay game with values `(alpha, 1)` and
/// weight `x^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoBidderAllPayEq {
    /// Bid of the value-1 bidder.
    pub low_bid: f64,
    /// Bid of the value-`alpha` bidder; always `alpha * low_bid`.
    pub high_bid: f64,
    pub revenue: f64,
    pub efficiency: f64,
}

pub fn allpay_two_bidder_power(alpha: f64, gamma: f64) -> Result<TwoBidderAllPayEq> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    let ag = alpha.powf(gamma);
    let low_bid = gamma * ag / ((1.0 + ag) * (1.0 + ag));
    Ok(TwoBidderAllPayEq {
        low_bid,
        high_bid: alpha * low_bid,
        revenue: (1.0 + alpha) * low_bid,
        efficiency: (1.0 + alpha * ag) / (1.0 + ag),
    })
}

/// Large-`alpha` revenue of the two-bidder all-pay game, `gamma * alpha^(1 - gamma)`.
pub fn allpay_two_bidder_revenue_limit(alpha: f64, gamma: f64) -> f64 {
    gamma * alpha.powf(1.0 - gamma)
}

/// Exact best response under the proportional weight with winners-pay:
/// `sqrt(s (s + v)) - s`, where `s` is the sum of the other bids.
pub fn winnerpay_proportional_best_response(s_others: f64, v: f64) -> Result<f64> {
    if !(s_others >= 0.0 && s_others.is_finite()) {
        return Err(Error::Invalid(format!(
            "sum of other bids must be >= 0, got {s_others}"
        )));
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Invalid(format!("value must be positive, got {v}")));
    }
    if s_others == 0.0 {
        return Ok(0.0);
    }
    // rationalized to avoid cancellation when s >> v
    Ok(s_others * v / ((s_others * (s_others + v)).sqrt() + s_others))
}

/// Symmetric equilibrium when all `n` bidders value the item at `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformEq {
    pub bid: f64,
    pub revenue: f64,
    pub n: usize,
    pub value: f64,
    pub gamma: f64,
    pub rule: PaymentRule,
}

/// All-pay: `bid = gamma (n-1) V / n^2`, revenue `(n-1) gamma V / n`.
/// Winners-pay: `bid = revenue = V (n-1) gamma / ((n-1) gamma + n)`, the
/// symmetric solution of the winners-pay stationarity condition.
pub fn uniform_equilibrium(
    n: usize,
    value: f64,
    gamma: f64,
    rule: PaymentRule,
) -> Result<UniformEq> {
    if n < 2 {
        return Err(Error::Invalid(format!(
            "need at least two bidders, got {n}"
        )));
    }
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::Invalid(format!(
            "value must be positive, got {value}"
        )));
    }
    check_gamma(gamma)?;
    let nf = n as f64;
    let (bid, revenue) = match rule {
        PaymentRule::AllPay => {
            let bid = gamma * (nf - 1.0) * value / (nf * nf);
            (bid, nf * bid)
        }
        PaymentRule::WinnersPay => {
            let k = (nf - 1.0) * gamma;
            let bid = value * k / (k + nf);
            (bid, bid)
        }
    };
    Ok(UniformEq {
        bid,
        revenue,
        n,
        value,
        gamma,
        rule,
    })
}

/// The printed uniform winners-pay revenue `V / (1 + (n / (n-1)) gamma)`.
/// Agrees with [`uniform_equilibrium`] only at `gamma = 1`.
pub fn uniform_winnerpay_printed(n: usize, value: f64, gamma: f64) -> f64 {
    let nf = n as f64;
    value / (1.0 + nf / (nf - 1.0) * gamma)
}

/// Shape of the two-bidder `log(1 + x)` revenue bound, `alpha / log^2 alpha`
/// (the constant factor is left to the caller).
pub fn logweight_bid_bound(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::Invalid(format!("alpha must exceed 1, got {alpha}")));
    }
    let l = alpha.ln();
    Ok(alpha / (l * l))
}

/// Limits for the profile `(alpha, 1, ..., 1)` as the number of value-1 bidders grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManyBuyerLimit {
    /// Winners-pay: the limiting low bid. All-pay: the coefficient `c` in `low bid ~ c / n`.
    pub low_bid: f64,
    /// Winners-pay: limiting revenue. All-pay: limiting total payment of the low bidders.
    pub revenue: f64,
}

pub fn manybuyer_limits(alpha: f64, gamma: f64, rule: PaymentRule) -> Result<ManyBuyerLimit> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    Ok(match rule {
        PaymentRule::WinnersPay => {
            let b = gamma / (1.0 + gamma);
            ManyBuyerLimit {
                low_bid: b,
                revenue: b,
            }
        }
        PaymentRule::AllPay => ManyBuyerLimit {
            low_bid: gamma,
            revenue: gamma,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::AuctionInstance;
    use crate::weights::WeightSpec;

    #[test]
    fn two_bidder_allpay_examples() {
        let eq = allpay_two_bidder_power(4.0, 0.5).unwrap();
        assert!((eq.low_bid - 1.0 / 9.0).abs() < 1e-15);
        assert!((eq.high_bid - 4.0 / 9.0).abs() < 1e-15);
        assert!((eq.revenue - 5.0 / 9.0).abs() < 1e-15);
        assert!((eq.efficiency - 3.0).abs() < 1e-15);

        let eq = allpay_two_bidder_power(1.0, 1.0).unwrap();
        assert_eq!(
            (eq.low_bid, eq.high_bid, eq.revenue, eq.efficiency),
            (0.25, 0.25, 0.5, 1.0)
        );

        let eq = allpay_two_bidder_power(1024.0, 0.5).unwrap();
        assert!((eq.revenue - 1025.0 * 16.0 / 1089.0).abs() < 1e-12);
        assert!((eq.revenue - 15.06).abs() < 5e-3);
        assert!(eq.revenue < allpay_two_bidder_revenue_limit(1024.0, 0.5));
    }

    #[test]
    fn two_bidder_allpay_rejects_bad_parameters() {
        assert!(allpay_two_bidder_power(0.5, 0.5).is_err());
        assert!(allpay_two_bidder_power(2.0, 0.0).is_err());
        assert!(allpay_two_bidder_power(2.0, 1.1).is_err());
    }

    #[test]
    fn revenue_approaches_large_alpha_limit() {
        for gamma in [0.5, 1.0] {
            let eq = allpay_two_bidder_power(1e8, gamma).unwrap();
            let ratio = eq.revenue / allpay_two_bidder_revenue_limit(1e8, gamma);
            assert!((ratio - 1.0).abs() < 1e-3, "gamma {gamma}: {ratio}");
        }
    }

    #[test]
    fn closed_forms_satisfy_first_order_conditions() {
        for gamma in [0.25, 0.5, 0.75, 1.0] {
            for alpha in [1.0, 3.0, 100.0, 1e4] {
                let eq = allpay_two_bidder_power(alpha, gamma).unwrap();
                let a = AuctionInstance::from_values(
                    PaymentRule::AllPay,
                    vec![alpha, 1.0],
                    WeightSpec::power(gamma).unwrap(),
                )
                .unwrap();
                let b = a.bids(vec![eq.high_bid, eq.low_bid]).unwrap();
                for i in 0..2 {
                    let r = a.foc_residual(i, &b).unwrap();
                    assert!(r.abs() <= 1e-9 * alpha.max(1.0), "{alpha} {gamma} {i}: {r}");
                }
            }
        }
        for rule in [PaymentRule::AllPay, PaymentRule::WinnersPay] {
            for n in [2, 3, 7] {
                for gamma in [0.25, 0.5, 1.0] {
                    let eq = uniform_equilibrium(n, 3.0, gamma, rule).unwrap();
                    let a = AuctionInstance::from_values(
                        rule,
                        vec![3.0; n],
                        WeightSpec::power(gamma).unwrap(),
                    )
                    .unwrap();
                    let b = a.bids(vec![eq.bid; n]).unwrap();
                    assert!(a.foc_residual(0, &b).unwrap().abs() <= 1e-9);
                    assert!((a.revenue(&b).unwrap() - eq.revenue).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn eq3_best_response_examples() {
        let third = 1.0 / 3.0;
        assert!((winnerpay_proportional_best_response(third, 1.0).unwrap() - third).abs() < 1e-15);
        assert_eq!(winnerpay_proportional_best_response(0.0, 5.0).unwrap(), 0.0);
        let b = winnerpay_proportional_best_response(0.41005, 4.0).unwrap();
        assert!((b - 0.93470).abs() < 1e-5, "{b}");
        assert!(winnerpay_proportional_best_response(-1.0, 1.0).is_err());
    }

    #[test]
    fn eq3_map_is_increasing_towards_one_half() {
        let mut prev = 0.0;
        for k in 0..200 {
            let s = 1e-4 * 1.1f64.powi(k);
            let b = winnerpay_proportional_best_response(s, 1.0).unwrap();
            assert!(b > prev && b < 0.5);
            prev = b;
        }
        assert!((winnerpay_proportional_best_response(1e12, 1.0).unwrap() - 0.5).abs() < 1e-9);
        let lo = winnerpay_proportional_best_response(2.0, 1.0).unwrap();
        let hi = winnerpay_proportional_best_response(2.0, 1.5).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn uniform_examples() {
        let eq = uniform_equilibrium(2, 1.0, 1.0, PaymentRule::WinnersPay).unwrap();
        assert!((eq.bid - 1.0 / 3.0).abs() < 1e-15 && (eq.revenue - 1.0 / 3.0).abs() < 1e-15);
        let eq = uniform_equilibrium(3, 2.0, 0.5, PaymentRule::AllPay).unwrap();
        assert!((eq.bid - 2.0 / 9.0).abs() < 1e-15 && (eq.revenue - 2.0 / 3.0).abs() < 1e-15);
        let eq = uniform_equilibrium(2, 1.0, 0.5, PaymentRule::WinnersPay).unwrap();
        assert!((eq.bid - 0.2).abs() < 1e-15);
        assert!(uniform_equilibrium(1, 1.0, 0.5, PaymentRule::AllPay).is_err());
    }

    #[test]
    fn printed_uniform_winnerpay_agrees_only_for_linear_weight() {
        for n in [2, 3, 5, 10] {
            let derived = uniform_equilibrium(n, 10.0, 1.0, PaymentRule::WinnersPay).unwrap();
            assert!((derived.revenue - uniform_winnerpay_printed(n, 10.0, 1.0)).abs() < 1e-12);
            let derived = uniform_equilibrium(n, 10.0, 0.5, PaymentRule::WinnersPay).unwrap();
            assert!((derived.revenue - uniform_winnerpay_printed(n, 10.0, 0.5)).abs() > 1e-3);
        }
    }

    #[test]
    fn log_bound_examples() {
        let e = std::f64::consts::E;
        assert!((logweight_bid_bound(e * e).unwrap() - e * e / 4.0).abs() < 1e-12);
        assert!((logweight_bid_bound(e.powi(4)).unwrap() - e.powi(4) / 16.0).abs() < 1e-12);
        assert!((logweight_bid_bound(1e6).unwrap() - 5239.2138).abs() < 1e-3);
        assert!(logweight_bid_bound(1.0).is_err());
    }

    #[test]
    fn many_buyer_examples() {
        let l = manybuyer_limits(100.0, 1.0, PaymentRule::WinnersPay).unwrap();
        assert_eq!((l.low_bid, l.revenue), (0.5, 0.5));
        let l = manybuyer_limits(100.0, 0.5, PaymentRule::WinnersPay).unwrap();
        assert!((l.low_bid - 1.0 / 3.0).abs() < 1e-15);
        let l = manybuyer_limits(100.0, 1.0, PaymentRule::AllPay).unwrap();
        assert_eq!((l.low_bid, l.revenue), (1.0, 1.0));
    }
}
