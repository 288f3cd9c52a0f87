use crate::error::Result;
use crate::mechanism::{AuctionInstance, BidVector};

use super::oracle::{best_response_gap, others_weights};
use super::{EquilibriumResult, Method, SolverConfig};

/// Simultaneous projected gradient ascent with step `c_i/sqrt(t)` from the
/// all-ones profile, projecting each bid onto `[bid_floor, v_i]`. The
/// per-bidder constant `c_i` comes from `config.step_rule`; `Uniform` is the
/// plain `1/sqrt(t)` schedule.
///
/// The last iterate and the running average are both certified every
/// `certify_every` steps; the solve stops as soon as either reaches the
/// target gap, and returns the better of the two. Running out of iterations
/// is not an error: the result carries `converged = false`.
pub fn giga_solve(instance: &AuctionInstance, config: &SolverConfig) -> Result<EquilibriumResult> {
    config.validate(instance)?;
    let values = instance.values().values();
    let n = instance.n();
    let mut bids = config.start(instance);
    let mut average = bids.clone();
    let mut last_checked = bids.clone();
    let mut grads = vec![0.0; n];

    let mut t: u64 = 0;
    while t < config.max_iterations {
        t += 1;
        let others = others_weights(instance, &bids);
        for i in 0..n {
            grads[i] = instance.unilateral_gradient(i, bids[i], others[i]);
        }
        let step = 1.0 / (t as f64).sqrt();
        for i in 0..n {
            let scale = config.step_rule.scale(values[i]);
            let y = bids[i] + scale * step * grads[i];
            bids[i] = if y > values[i] {
                values[i]
            } else {
                y.max(config.bid_floor)
            };
        }
        let tf = t as f64;
        for (avg, &b) in average.iter_mut().zip(&bids) {
            *avg += (b - *avg) / tf;
        }

        if t.is_multiple_of(config.certify_every) {
            let last = BidVector::from_vec_unchecked(bids.clone());
            let avg = BidVector::from_vec_unchecked(average.clone());
            let eps = best_response_gap(instance, &last, config.oracle_tol)?
                .min(best_response_gap(instance, &avg, config.oracle_tol)?);
            if eps <= config.tolerance {
                break;
            }
            // a frozen iterate cannot improve further; only the average still drifts toward it
            if bids == last_checked {
                break;
            }
            last_checked.clone_from(&bids);
        }
    }

    EquilibriumResult::finish(
        instance,
        config,
        [
            BidVector::from_vec_unchecked(bids),
            BidVector::from_vec_unchecked(average),
        ],
        t,
        Method::Giga,
    )
}
