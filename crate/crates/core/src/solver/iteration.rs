use crate::error::Result;
use crate::mechanism::{AuctionInstance, BidVector};

use super::oracle::{best_response_against, best_response_gap, oracle_tol, others_weights};
use super::share::equilibrium_by_total;
use super::{EquilibriumResult, Method, SolverConfig};

const HISTORY: usize = 6;
const MIN_RELAXATION: f64 = 1.0 / 1024.0;
const MAX_REJECTIONS: u32 = 60;

/// One Gauss–Seidel sweep: each bidder in turn moves to their best response
/// against the current bids, clamped to `[bid_floor, v_i]`.
fn sweep(instance: &AuctionInstance, config: &SolverConfig, bids: &[f64]) -> Vec<f64> {
    let values = instance.values().values();
    let mut next = bids.to_vec();
    for i in 0..next.len() {
        let others = others_weights(instance, &next)[i];
        let tol = oracle_tol(instance, i, config.oracle_tol);
        next[i] =
            best_response_against(instance, i, others, tol).clamp(config.bid_floor, values[i]);
    }
    next
}

fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Solves the small least-squares problem `min |f - dF c|` by normal equations
/// with a relative ridge term.
fn mixing_coefficients(df: &[Vec<f64>], f: &[f64]) -> Option<Vec<f64>> {
    let m = df.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for j in 0..m {
        for k in 0..m {
            a[j][k] = df[j].iter().zip(&df[k]).map(|(x, y)| x * y).sum();
        }
        rhs[j] = df[j].iter().zip(f).map(|(x, y)| x * y).sum();
    }
    let trace: f64 = (0..m).map(|j| a[j][j]).sum();
    if !(trace > 0.0) {
        return None;
    }
    for (j, row) in a.iter_mut().enumerate() {
        row[j] += 1e-12 * trace;
    }
    // Gaussian elimination with partial pivoting
    for col in 0..m {
        let pivot = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col] == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..m {
            let factor = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (x, p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= factor * p;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut c = vec![0.0; m];
    for row in (0..m).rev() {
        let tail: f64 = (row + 1..m).map(|k| a[row][k] * c[k]).sum();
        c[row] = (rhs[row] - tail) / a[row][row];
    }
    c.iter().all(|x| x.is_finite()).then_some(c)
}

/// Best-response iteration on log-bids.
///
/// The fixed-point map is one Gauss–Seidel sweep of best responses. Plain
/// sweeps oscillate and diverge for all-pay games with a large value ratio
/// (the composite response map has slope about `-alpha/4` there), so the
/// sweeps are combined by Anderson mixing over the last few iterates. A
/// mixed step that fails to shrink the sweep residual is rejected: the
/// history is dropped and a relaxed step is taken from the last accepted
/// point instead. Every sweep output is certified; the best-certified point
/// is returned.
///
/// Near a dropout corner (a best response pinned at the floor) the mixing
/// model breaks down. If the sweeps stall without certifying, the
/// equilibrium is located directly by bisection on the total weight and
/// kept when it certifies better.
pub fn best_response_iteration(
    instance: &AuctionInstance,
    config: &SolverConfig,
) -> Result<EquilibriumResult> {
    config.validate(instance)?;
    let values = instance.values().values();
    let n = instance.n();
    let lower = config.bid_floor.ln();
    let upper: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let project = |x: &mut Vec<f64>| {
        for (xi, &hi) in x.iter_mut().zip(&upper) {
            *xi = xi.clamp(lower, hi);
        }
    };
    let to_bids = |x: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(values)
            .map(|(&z, &v)| z.exp().clamp(config.bid_floor, v))
            .collect()
    };

    let mut x: Vec<f64> = config.start(instance).iter().map(|b| b.ln()).collect();
    let mut best_bids = to_bids(&x);
    let mut best_eps = f64::INFINITY;
    let mut average = vec![0.0; n];

    // history of accepted (residual, image) pairs
    let mut residuals: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut anchor: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    let mut relaxation: f64 = 1.0;
    let mut rejections = 0u32;

    let mut sweeps: u64 = 0;
    while sweeps < config.max_iterations {
        sweeps += 1;
        let image_bids = sweep(instance, config, &to_bids(&x));
        let sf = sweeps as f64;
        for (avg, &b) in average.iter_mut().zip(&image_bids) {
            *avg += (b - *avg) / sf;
        }
        let eps = best_response_gap(
            instance,
            &BidVector::from_vec_unchecked(image_bids.clone()),
            config.oracle_tol,
        )?;
        if eps < best_eps || (eps == best_eps && eps == 0.0) {
            best_eps = eps;
            best_bids.clone_from(&image_bids);
        }
        if eps <= config.tolerance {
            break;
        }

        let image: Vec<f64> = image_bids.iter().map(|b| b.ln()).collect();
        let residual: Vec<f64> = image.iter().zip(&x).map(|(g, z)| g - z).collect();
        let norm = sup_norm(&residual);
        if norm == 0.0 {
            break;
        }

        let accepted = anchor.as_ref().is_none_or(|(_, _, prev)| norm < *prev);
        if !accepted {
            rejections += 1;
            if rejections > MAX_REJECTIONS {
                break;
            }
            residuals.clear();
            images.clear();
            relaxation = (relaxation * 0.5).max(MIN_RELAXATION);
            let (ax, af, _) = anchor.as_ref().expect("rejection implies an anchor");
            x = ax.iter().zip(af).map(|(z, f)| z + relaxation * f).collect();
            project(&mut x);
            continue;
        }
        rejections = 0;
        relaxation = (relaxation * 2.0).min(1.0);
        anchor = Some((x.clone(), residual.clone(), norm));
        residuals.push(residual.clone());
        images.push(image.clone());
        if residuals.len() > HISTORY + 1 {
            residuals.remove(0);
            images.remove(0);
        }

        let m = residuals.len();
        let mixed = if m >= 2 {
            let df: Vec<Vec<f64>> = (1..m)
                .map(|k| {
                    residuals[k]
                        .iter()
                        .zip(&residuals[k - 1])
                        .map(|(a, b)| a - b)
                        .collect()
                })
                .collect();
            mixing_coefficients(&df, &residual).map(|c| {
                let mut next = image.clone();
                for (k, ck) in c.iter().enumerate() {
                    for (j, nj) in next.iter_mut().enumerate() {
                        *nj -= ck * (images[k + 1][j] - images[k][j]);
                    }
                }
                next
            })
        } else {
            None
        };
        x = mixed.unwrap_or_else(|| {
            x.iter()
                .zip(&residual)
                .map(|(z, f)| z + relaxation * f)
                .collect()
        });
        project(&mut x);
    }

    if best_eps > config.tolerance {
        let candidate: Vec<f64> = equilibrium_by_total(instance)
            .iter()
            .zip(values)
            .map(|(&b, &v)| b.clamp(config.bid_floor, v))
            .collect();
        let eps = best_response_gap(
            instance,
            &BidVector::from_vec_unchecked(candidate.clone()),
            config.oracle_tol,
        )?;
        if eps < best_eps {
            best_bids = candidate;
        }
    }

    EquilibriumResult::finish(
        instance,
        config,
        [
            BidVector::from_vec_unchecked(best_bids),
            BidVector::from_vec_unchecked(average),
        ],
        sweeps,
        Method::BestResponseIteration,
    )
}
