//! Weak-`L^p` functionals of norm tails.
//!
//! `N_p(X) = sup_t t^p·P(‖X‖ > t)` is implemented as defined, on the `p`-th
//! power scale: it scales as `λ^p` under `X → λX`. The weak norm
//! `‖X‖_{p,∞} = sup_A P(A)^{−1+1/p}·E[‖X‖·1_A]` is linear. The sandwich that
//! holds for every law, and is tight for the Pareto tail `min(1, t^{−p})`, is
//!
//! `N_p(X)^{1/p} ≤ ‖X‖_{p,∞} ≤ p/(p−1)·N_p(X)^{1/p}`,
//!
//! and [`sandwich_check`] tests that form. The Pareto case pins the root:
//! `N₃ = 1` and `‖X‖_{3,∞} = 3/2`, while a constant `c` gives `N_p = c^p`
//! and `‖X‖_{p,∞} = c`.
//!
//! Divergent functionals are reported as `f64::INFINITY`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::bounds::tail_exponent;
use crate::error::{positive, require, unit_open, Error, Result};
use crate::optimize::golden_section;
use crate::rng::path_rng;
use crate::simulate::{truncate_decompose, MdsModel};
use crate::spaces::Point;

/// Relative slack of [`sandwich_check`].
pub const SANDWICH_RTOL: f64 = 1e-9;

/// Law of `‖X‖` through its tail `t ↦ P(‖X‖ > t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", try_from = "TailJson")]
pub enum TailFunction {
    /// `min(1, (scale/t)^p)`.
    Pareto { p: f64, scale: f64 },
    /// `exp(−t^{2α/(1−α)})`.
    WeibullLike { alpha: f64 },
    /// `‖X‖ = b` almost surely.
    Bounded { b: f64 },
    /// Empirical law of the samples, kept sorted in decreasing order.
    Empirical { samples: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
enum TailJson {
    Pareto { p: f64, scale: f64 },
    WeibullLike { alpha: f64 },
    Bounded { b: f64 },
    Empirical { samples: Vec<f64> },
}

impl TryFrom<TailJson> for TailFunction {
    type Error = Error;

    fn try_from(j: TailJson) -> Result<Self> {
        match j {
            TailJson::Pareto { p, scale } => TailFunction::pareto(p, scale),
            TailJson::WeibullLike { alpha } => TailFunction::weibull_like(alpha),
            TailJson::Bounded { b } => TailFunction::bounded(b),
            TailJson::Empirical { samples } => TailFunction::empirical(samples),
        }
    }
}

impl TailFunction {
    pub fn pareto(p: f64, scale: f64) -> Result<Self> {
        positive("p", p)?;
        positive("scale", scale)?;
        Ok(TailFunction::Pareto { p, scale })
    }

    pub fn weibull_like(alpha: f64) -> Result<Self> {
        unit_open("alpha", alpha)?;
        Ok(TailFunction::WeibullLike { alpha })
    }

    pub fn bounded(b: f64) -> Result<Self> {
        crate::error::nonneg("b", b)?;
        Ok(TailFunction::Bounded { b })
    }

    pub fn empirical(mut samples: Vec<f64>) -> Result<Self> {
        require(!samples.is_empty(), || "empirical tail needs at least one sample".to_string())?;
        require(samples.iter().all(|v| v.is_finite() && *v >= 0.0), || {
            "empirical samples must be finite norms (>= 0)".to_string()
        })?;
        samples.sort_by(|a, b| b.total_cmp(a));
        Ok(TailFunction::Empirical { samples })
    }

    /// `P(‖X‖ > t)`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TailFunction::Pareto { p, scale } => {
                if t <= *scale {
                    1.0
                } else {
                    (scale / t).powf(*p)
                }
            }
            TailFunction::WeibullLike { alpha } => {
                if t <= 0.0 {
                    1.0
                } else {
                    (-t.powf(tail_exponent(*alpha))).exp()
                }
            }
            TailFunction::Bounded { b } => {
                if t < *b {
                    1.0
                } else {
                    0.0
                }
            }
            TailFunction::Empirical { samples } => {
                // samples are decreasing; count those strictly above t
                let above = samples.partition_point(|&v| v > t);
                above as f64 / samples.len() as f64
            }
        }
    }
}

/// Distinct values of a decreasing sample with the count of samples `>=` each.
fn ranked_levels(samples: &[f64]) -> impl Iterator<Item = (f64, usize)> + '_ {
    let m = samples.len();
    (0..m).filter(move |&i| i + 1 == m || samples[i + 1] < samples[i]).map(move |i| (samples[i], i + 1))
}

/// `N_p = sup_{t>0} t^p·P(‖X‖ > t)`.
pub fn n_p(tail: &TailFunction, p: f64) -> Result<f64> {
    require(p > 1.0 && p.is_finite(), || format!("p must be > 1, got {p}"))?;
    Ok(match tail {
        TailFunction::Pareto { p: index, scale } => {
            if p > *index {
                f64::INFINITY
            } else {
                scale.powf(p)
            }
        }
        TailFunction::WeibullLike { alpha } => {
            // maximiser of t^p·exp(−t^γ) solves t^γ = p/γ
            let k = p / tail_exponent(*alpha);
            k.powf(k) * (-k).exp()
        }
        TailFunction::Bounded { b } => b.powf(p),
        TailFunction::Empirical { samples } => {
            let m = samples.len() as f64;
            ranked_levels(samples).map(|(v, count)| v.powf(p) * count as f64 / m).fold(0.0, f64::max)
        }
    })
}

/// `‖X‖_{p,∞} = sup_A P(A)^{−1+1/p}·E[‖X‖·1_A]`.
///
/// For a fixed `P(A) = a` the supremum is attained on an upper tail event,
/// so the norm is `sup_{a∈(0,1]} a^{1/p−1}·∫₀^a Q(v) dv` with `Q` the upper
/// quantile function. For `m` samples this is
/// `max_k (k/m)^{1/p}·(mean of the k largest)`.
pub fn weak_lp_norm(tail: &TailFunction, p: f64) -> Result<f64> {
    require(p > 1.0 && p.is_finite(), || format!("p must be > 1, got {p}"))?;
    Ok(match tail {
        TailFunction::Pareto { p: index, scale } => {
            if p > *index || *index <= 1.0 {
                f64::INFINITY
            } else {
                // a^{1/p−1}∫₀^a s·v^{−1/index} dv is nondecreasing in a for p <= index
                scale * index / (index - 1.0)
            }
        }
        TailFunction::WeibullLike { alpha } => weibull_weak_norm(tail_exponent(*alpha), p),
        TailFunction::Bounded { b } => *b,
        TailFunction::Empirical { samples } => {
            let m = samples.len() as f64;
            let mut prefix = 0.0;
            let mut best = 0.0_f64;
            for (k, v) in samples.iter().enumerate() {
                prefix += v;
                let k = (k + 1) as f64;
                best = best.max((k / m).powf(1.0 / p) * prefix / k);
            }
            best
        }
    })
}

// With a = e^{−L}: a^{1/p−1}·∫₀^a (−ln v)^{1/γ} dv = e^{L(1−1/p)}·Γ(1+1/γ, L).
fn weibull_weak_norm(gamma_exp: f64, p: f64) -> f64 {
    let s = 1.0 + 1.0 / gamma_exp;
    let full = gamma(s);
    let upper = |l: f64| if l > 0.0 { gamma_ur(s, l) } else { 1.0 };
    let ln_f = |l: f64| l * (1.0 - 1.0 / p) + (upper(l) * full).ln();
    let neg = |l: f64| -ln_f(l);
    // Γ(s, L) ~ L^{s−1}e^{−L}, so the objective decays like e^{−L/p} far out.
    let hi = 40.0 * p + 40.0 * s;
    let steps = 400;
    let (mut best_l, mut best) = (0.0, ln_f(0.0));
    for i in 1..=steps {
        let l = hi * i as f64 / steps as f64;
        let v = ln_f(l);
        if v > best {
            best = v;
            best_l = l;
        }
    }
    let h = hi / steps as f64;
    let (lo, up) = ((best_l - h).max(0.0), best_l + h);
    let refined = golden_section(neg, lo, up, 1e-12, 200);
    best.max(-refined.value).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    /// `N_p` on its own (`p`-th power) scale.
    pub n_p: f64,
    /// `N_p^{1/p}`, the linear-scale quantity compared with the weak norm.
    pub n_p_root: f64,
    pub weak_norm: f64,
    pub ok: bool,
}

/// Checks `N_p^{1/p} ≤ ‖X‖_{p,∞} ≤ p/(p−1)·N_p^{1/p}` with relative slack
/// [`SANDWICH_RTOL`].
pub fn sandwich_check(tail: &TailFunction, p: f64) -> Result<SandwichReport> {
    let np = n_p(tail, p)?;
    let w = weak_lp_norm(tail, p)?;
    let root = np.powf(1.0 / p);
    let slack = 1.0 + SANDWICH_RTOL;
    let ok = np.is_finite() && w.is_finite() && root <= w * slack && w <= p / (p - 1.0) * root * slack;
    Ok(SandwichReport { n_p: np, n_p_root: root, weak_norm: w, ok })
}

/// `sup_t exp(t^{2α/(1−α)})·P(‖X‖ > t)`.
pub fn exp_tail_constant(tail: &TailFunction, alpha: f64) -> Result<f64> {
    unit_open("alpha", alpha)?;
    let g = tail_exponent(alpha);
    Ok(match tail {
        TailFunction::Pareto { .. } => f64::INFINITY,
        TailFunction::Bounded { b } => b.powf(g).exp(),
        TailFunction::WeibullLike { alpha: own } => {
            let h = tail_exponent(*own);
            if h < g {
                f64::INFINITY
            } else if h == g {
                1.0
            } else {
                // interior maximiser of t^g − t^h
                let t = (g / h).powf(1.0 / (h - g));
                (t.powf(g) - t.powf(h)).exp()
            }
        }
        TailFunction::Empirical { samples } => {
            let m = samples.len() as f64;
            ranked_levels(samples).map(|(v, count)| (v.powf(g) + (count as f64 / m).ln()).exp()).fold(0.0, f64::max)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentCheck {
    /// Estimate of `E‖X″ − E[X″ | F]‖²`, where `X″` is the part of the first
    /// increment above the truncation level.
    pub lhs: f64,
    /// Estimate of `4·E[‖X‖²·1{‖X‖ > u}]`.
    pub rhs: f64,
    pub std_error: f64,
    pub ok: bool,
}

/// Monte Carlo check of `E‖X″ᵢ‖² ≤ 4·E[‖Xᵢ‖²·1{‖Xᵢ‖ > u}]` on the first
/// increment of `paths` simulated paths.
pub fn centered_second_moment_check(model: &MdsModel, u: f64, paths: usize, seed: u64) -> Result<SecondMomentCheck> {
    require(paths >= 2, || "paths must be >= 2".to_string())?;
    crate::error::nonneg("u", u)?;
    let space = model.space();
    let mut diffs = Vec::with_capacity(paths);
    let (mut sum_l, mut sum_r) = (0.0, 0.0);
    for i in 0..paths as u64 {
        let mut rng = path_rng(seed, i);
        let x: Point = model.sample_path_with(&mut rng, 1).remove(0);
        let split = truncate_decompose(model, std::slice::from_ref(&x), u)?;
        let tail_norm = space.norm(&split.tail[0])?;
        let norm = space.norm(&x)?;
        let l = tail_norm * tail_norm;
        let r = if norm > u { 4.0 * norm * norm } else { 0.0 };
        sum_l += l;
        sum_r += r;
        diffs.push(l - r);
    }
    let m = paths as f64;
    let mean_d = (sum_l - sum_r) / m;
    let var = diffs.iter().map(|d| (d - mean_d).powi(2)).sum::<f64>() / (m - 1.0);
    let se = (var / m).sqrt();
    let (lhs, rhs) = (sum_l / m, sum_r / m);
    Ok(SecondMomentCheck { lhs, rhs, std_error: se, ok: lhs <= rhs + 3.0 * se })
}

/// Draws `m` norms from a tail by inversion. Used for empirical checks.
pub fn sample_norms(tail: &TailFunction, m: usize, seed: u64) -> Vec<f64> {
    let mut rng = path_rng(seed, 0);
    (0..m)
        .map(|_| {
            let u: f64 = 1.0 - rng.random::<f64>();
            match tail {
                TailFunction::Pareto { p, scale } => scale * u.powf(-1.0 / p),
                TailFunction::WeibullLike { alpha } => (-u.ln()).powf(1.0 / tail_exponent(*alpha)),
                TailFunction::Bounded { b } => *b,
                TailFunction::Empirical { samples } => samples[((u * samples.len() as f64) as usize).min(samples.len() - 1)],
            }
        })
        .collect()
}
