use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{positive, require, Result};
use crate::rng::path_rng;

use super::model::MdsModel;

/// Relative slack below which `‖S_k‖` counts as equal to `n·x`.
pub const TIE_RTOL: f64 = 1e-12;

/// Monte Carlo estimate of `P(max_{k≤n} ‖S_k‖ > n·x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub paths: u64,
    pub hits: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub n: u64,
    pub x: f64,
}

impl McEstimate {
    pub fn from_counts(hits: u64, paths: u64, seed: u64, n: u64, x: f64) -> Self {
        let (ci_low, ci_high) = clopper_pearson(hits, paths);
        Self { p_hat: hits as f64 / paths as f64, paths, hits, ci_low, ci_high, seed, n, x }
    }
}

/// Two-sided 95% Clopper–Pearson interval for `hits` successes in `trials`.
pub fn clopper_pearson(hits: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0 && hits <= trials);
    let (k, m) = (hits as f64, trials as f64);
    let low = if hits == 0 { 0.0 } else { beta_quantile(k, m - k + 1.0, 0.025) };
    let high = if hits == trials { 1.0 } else { beta_quantile(k + 1.0, m - k, 0.975) };
    (low.min(k / m), high.max(k / m))
}

// Bisection on the regularized incomplete beta; statrs' own inverse fails to
// terminate for very lopsided shapes such as (64, 1e7).
fn beta_quantile(a: f64, b: f64, level: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
            break;
        }
        if beta_reg(a, b, mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Strict `norm > threshold`, treating values within [`TIE_RTOL`] as ties.
pub fn exceeds_threshold(norm: f64, threshold: f64) -> bool {
    norm - threshold > TIE_RTOL * threshold.abs()
}

pub fn mc_deviation_prob(model: &MdsModel, n: u64, x: f64, paths: u64, seed: u64) -> Result<McEstimate> {
    Ok(mc_deviation_grid(model, &[n], &[x], paths, seed)?.remove(0))
}

/// Estimates for every `(n, x)` pair, row-major in `ns`, from one set of
/// paths simulated to `max(ns)`. Each entry equals the corresponding
/// [`mc_deviation_prob`] call with the same seed.
pub fn mc_deviation_grid(model: &MdsModel, ns: &[u64], xs: &[f64], paths: u64, seed: u64) -> Result<Vec<McEstimate>> {
    require(!ns.is_empty() && !xs.is_empty(), || "empty (n, x) grid".to_string())?;
    require(paths >= 1, || "paths must be >= 1".to_string())?;
    require(ns.iter().all(|&n| n >= 1), || "n must be >= 1".to_string())?;
    for &x in xs {
        positive("x", x)?;
    }
    let n_max = *ns.iter().max().expect("nonempty");
    let cells = ns.len() * xs.len();
    let counts = (0..paths)
        .into_par_iter()
        .fold(
            || vec![0u64; cells],
            |mut acc, i| {
                let running = path_running_max(model, n_max, seed, i);
                for (a, &n) in ns.iter().enumerate() {
                    let m = running[n as usize - 1];
                    for (b, &x) in xs.iter().enumerate() {
                        if exceeds_threshold(m, n as f64 * x) {
                            acc[a * xs.len() + b] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(u, v)| *u += v);
                a
            },
        );
    let mut out = Vec::with_capacity(cells);
    for (a, &n) in ns.iter().enumerate() {
        for (b, &x) in xs.iter().enumerate() {
            out.push(McEstimate::from_counts(counts[a * xs.len() + b], paths, seed, n, x));
        }
    }
    Ok(out)
}

/// `max_{j≤k} ‖S_j‖` for `k = 1..=n` along path `index`.
fn path_running_max(model: &MdsModel, n: u64, seed: u64, index: u64) -> Vec<f64> {
    let space = model.space();
    let mut rng = path_rng(seed, index);
    let mut state = model.start_path(&mut rng);
    let mut inc = vec![0.0; space.dim()];
    let mut sum = vec![0.0; space.dim()];
    let mut best = 0.0f64;
    (0..n)
        .map(|_| {
            model.step(&mut rng, &mut state, &mut inc);
            sum.iter_mut().zip(&inc).for_each(|(s, v)| *s += v);
            best = best.max(space.norm_coords(&sum));
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::SpaceSpec;

    #[test]
    fn clopper_pearson_reference() {
        // regularized incomplete beta inverted at 50 digits
        let (lo, hi) = clopper_pearson(5, 20);
        assert!((lo - 0.08657146910143454).abs() < 1e-9, "{lo}");
        assert!((hi - 0.4910458717079575).abs() < 1e-9, "{hi}");
        assert_eq!(clopper_pearson(0, 10).0, 0.0);
        assert!((clopper_pearson(0, 10).1 - 0.30849710781876076).abs() < 1e-9);
        assert_eq!(clopper_pearson(10, 10).1, 1.0);
        let (lo, hi) = clopper_pearson(64, 10_000_000);
        assert!((lo / 4.928_783_233_851_786e-6 - 1.0).abs() < 1e-8, "{lo}");
        assert!((hi / 8.172_649_877_222_207e-6 - 1.0).abs() < 1e-8, "{hi}");
    }

    #[test]
    fn ties_are_not_hits() {
        assert!(!exceeds_threshold(3.0, 3.0));
        assert!(!exceeds_threshold(2.4000000000000004, 4.0 * 0.6));
        assert!(exceeds_threshold(3.0, 2.4));
    }

    #[test]
    fn forced_and_impossible() {
        let m = MdsModel::rademacher_real();
        assert_eq!(mc_deviation_prob(&m, 2, 0.4, 1000, 1).unwrap().p_hat, 1.0);
        assert_eq!(mc_deviation_prob(&m, 7, 1.0, 1000, 1).unwrap().p_hat, 0.0);
    }

    #[test]
    fn grid_matches_single_queries() {
        let m = MdsModel::pareto_radial(SpaceSpec::euclidean(2).unwrap(), 3.0, 1.0).unwrap();
        let grid = mc_deviation_grid(&m, &[4, 9], &[0.5, 1.5], 3000, 17).unwrap();
        for e in &grid {
            assert_eq!(*e, mc_deviation_prob(&m, e.n, e.x, 3000, 17).unwrap());
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let m = MdsModel::weibull_radial(SpaceSpec::ell_q(3, 3.0).unwrap(), 0.4).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_deviation_prob(&m, 16, 0.3, 5000, 9).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn estimate_invariants() {
        let e = mc_deviation_prob(&MdsModel::rademacher_real(), 4, 0.6, 20_000, 7).unwrap();
        assert!(e.ci_low <= e.p_hat && e.p_hat <= e.ci_high);
        assert!(e.ci_low <= 0.25 && 0.25 <= e.ci_high);
    }
}
