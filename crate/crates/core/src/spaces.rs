//! Finite-dimensional representatives of (r, D)-smooth Banach spaces.
//!
//! A space is `(r, D)`-smooth when every martingale difference sequence
//! obeys `E‖X₁+…+Xₙ‖^r ≤ D·Σ E‖Xᵢ‖^r`. The same letter is used elsewhere for
//! the constant of the two-point smoothness inequality
//! `‖x+y‖² + ‖x−y‖² ≤ 2‖x‖² + 2D²‖y‖²`, under which the martingale moment
//! inequality holds with `D²` in place of `D`. Each [`SpaceSpec`] records
//! which of the two readings its `D` follows ([`Convention`]), and exposes
//! the value in either reading through [`SpaceSpec::d_moment`] and
//! [`SpaceSpec::d_two_point`].
//!
//! Catalog defaults:
//!
//! | kind            | r | D         | convention        |
//! |-----------------|---|-----------|-------------------|
//! | `real`          | 2 | 1         | `pinelis_squared` |
//! | `euclidean(d)`  | 2 | 1         | `pinelis_squared` |
//! | `ell_q(d, q≥2)` | 2 | √(q−1)    | `pinelis_squared` |
//! | `ell_r(d, r≤2)` | r | 2         | `paper_eq7`       |
//!
//! Hilbert spaces satisfy both readings with `D = 1`. The `ell_q` constant is
//! the 2-uniform smoothness constant of `L^q`; the `ell_r` constant is the
//! von Bahr–Esseen constant applied coordinatewise.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require, Error, Result};
use crate::rng::path_rng;
use crate::simulate::MdsModel;

/// Which smoothness inequality the stored `D` satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `E‖Sₙ‖^r ≤ D·Σ E‖Xᵢ‖^r`.
    PaperEq7,
    /// `‖x+y‖² + ‖x−y‖² ≤ 2‖x‖² + 2D²‖y‖²`, hence `E‖Sₙ‖² ≤ D²·Σ E‖Xᵢ‖²`.
    PinelisSquared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceKind {
    Real,
    Euclidean { d: usize },
    /// `ℓ^q` on `d` coordinates, `q ≥ 2`.
    EllQ { d: usize, q: f64 },
    /// `ℓ^r` on `d` coordinates; the norm exponent is the smoothness order `r`.
    EllR { d: usize },
}

impl SpaceKind {
    pub fn dim(&self) -> usize {
        match *self {
            SpaceKind::Real => 1,
            SpaceKind::Euclidean { d } | SpaceKind::EllQ { d, .. } | SpaceKind::EllR { d } => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceJson", into = "SpaceJson")]
pub struct SpaceSpec {
    kind: SpaceKind,
    r: f64,
    d_const: f64,
    convention: Convention,
}

impl SpaceSpec {
    pub fn new(kind: SpaceKind, r: f64, d_const: f64, convention: Convention) -> Result<Self> {
        require(r > 1.0 && r <= 2.0, || format!("smoothness order r must lie in (1, 2], got {r}"))?;
        require(d_const.is_finite() && d_const > 0.0, || {
            format!("smoothness constant D must be > 0, got {d_const}")
        })?;
        require(kind.dim() >= 1, || "dimension must be >= 1".to_string())?;
        match kind {
            SpaceKind::EllQ { q, .. } => {
                require(q.is_finite() && q >= 2.0, || format!("ell_q needs q >= 2, got {q}"))?
            }
            SpaceKind::Real | SpaceKind::Euclidean { .. } => {}
            SpaceKind::EllR { .. } => {}
        }
        if convention == Convention::PinelisSquared {
            require(r == 2.0, || "the pinelis_squared convention is defined for r = 2".to_string())?;
        }
        Ok(Self { kind, r, d_const, convention })
    }

    pub fn real() -> Self {
        Self { kind: SpaceKind::Real, r: 2.0, d_const: 1.0, convention: Convention::PinelisSquared }
    }

    pub fn euclidean(d: usize) -> Result<Self> {
        Self::new(SpaceKind::Euclidean { d }, 2.0, 1.0, Convention::PinelisSquared)
    }

    pub fn ell_q(d: usize, q: f64) -> Result<Self> {
        require(q.is_finite() && q >= 2.0, || format!("ell_q needs q >= 2, got {q}"))?;
        Self::new(SpaceKind::EllQ { d, q }, 2.0, (q - 1.0).sqrt(), Convention::PinelisSquared)
    }

    pub fn ell_r(d: usize, r: f64) -> Result<Self> {
        Self::new(SpaceKind::EllR { d }, r, 2.0, Convention::PaperEq7)
    }

    /// Same space with a different constant or convention.
    pub fn with_constant(&self, d_const: f64, convention: Convention) -> Result<Self> {
        Self::new(self.kind, self.r, d_const, convention)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// The stored constant, in the space's own convention.
    pub fn d_const(&self) -> f64 {
        self.d_const
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Constant of the moment inequality `E‖Sₙ‖^r ≤ D·Σ E‖Xᵢ‖^r`.
    pub fn d_moment(&self) -> f64 {
        match self.convention {
            Convention::PaperEq7 => self.d_const,
            Convention::PinelisSquared => self.d_const * self.d_const,
        }
    }

    /// Constant in the two-point reading, as used by the bounded-increment
    /// exponential inequality. For a moment-convention space with `r = 2`
    /// this is `√D`.
    pub fn d_two_point(&self) -> f64 {
        match self.convention {
            Convention::PaperEq7 => self.d_const.sqrt(),
            Convention::PinelisSquared => self.d_const,
        }
    }

    fn norm_exponent(&self) -> Option<f64> {
        match self.kind {
            SpaceKind::Real => None,
            SpaceKind::Euclidean { .. } => Some(2.0),
            SpaceKind::EllQ { q, .. } => Some(q),
            SpaceKind::EllR { .. } => Some(self.r),
        }
    }

    /// Norm of raw coordinates; the caller guarantees the length.
    pub(crate) fn norm_coords(&self, x: &[f64]) -> f64 {
        match self.norm_exponent() {
            None => x[0].abs(),
            Some(e) if e == 2.0 => {
                let m = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if m == 0.0 || !m.is_finite() {
                    return m;
                }
                m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt()
            }
            Some(e) => {
                let m = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if m == 0.0 || !m.is_finite() {
                    return m;
                }
                m * x.iter().map(|v| (v.abs() / m).powf(e)).sum::<f64>().powf(1.0 / e)
            }
        }
    }

    pub fn norm(&self, p: &Point) -> Result<f64> {
        self.check(p)?;
        Ok(self.norm_coords(&p.coords))
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if p.coords.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.coords.len() });
        }
        Ok(())
    }

    /// Fills `out` with a random direction of unit norm: a random sign in one
    /// dimension, a normalised Gaussian vector otherwise. For non-Euclidean
    /// norms this is not the cone measure, only a symmetric law on the sphere.
    pub(crate) fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        if out.len() == 1 {
            out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
            return;
        }
        loop {
            for v in out.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let n = self.norm_coords(out);
            if n > 0.0 {
                out.iter_mut().for_each(|v| *v /= n);
                return;
            }
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            SpaceKind::Real => "real".to_string(),
            SpaceKind::Euclidean { d } => format!("euclidean({d})"),
            SpaceKind::EllQ { d, q } => format!("ell_q({d},q={q})"),
            SpaceKind::EllR { d } => format!("ell_r({d},r={})", self.r),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    d_const: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    convention: Option<Convention>,
}

impl TryFrom<SpaceJson> for SpaceSpec {
    type Error = Error;

    fn try_from(j: SpaceJson) -> Result<Self> {
        let need_d = || j.d.ok_or_else(|| invalid(format!("space '{}' needs field d", j.kind)));
        let base = match j.kind.as_str() {
            "real" => SpaceSpec::real(),
            "euclidean" => SpaceSpec::euclidean(need_d()?)?,
            "ell_q" => {
                let q = j.q.ok_or_else(|| invalid("space 'ell_q' needs field q"))?;
                SpaceSpec::ell_q(need_d()?, q)?
            }
            "ell_r" => {
                let r = j.r.ok_or_else(|| invalid("space 'ell_r' needs field r"))?;
                SpaceSpec::ell_r(need_d()?, r)?
            }
            other => return Err(invalid(format!("unknown space kind '{other}'"))),
        };
        if j.kind != "ell_r" {
            if let Some(r) = j.r {
                require(r == base.r, || format!("space '{}' has r = {}, got {r}", j.kind, base.r))?;
            }
        }
        match (j.d_const, j.convention) {
            (None, None) => Ok(base),
            (d, c) => base.with_constant(d.unwrap_or(base.d_const), c.unwrap_or(base.convention)),
        }
    }
}

impl From<SpaceSpec> for SpaceJson {
    fn from(s: SpaceSpec) -> Self {
        let (kind, d, q) = match s.kind {
            SpaceKind::Real => ("real", None, None),
            SpaceKind::Euclidean { d } => ("euclidean", Some(d), None),
            SpaceKind::EllQ { d, q } => ("ell_q", Some(d), Some(q)),
            SpaceKind::EllR { d } => ("ell_r", Some(d), None),
        };
        SpaceJson {
            kind: kind.to_string(),
            d,
            q,
            r: Some(s.r),
            d_const: Some(s.d_const),
            convention: Some(s.convention),
        }
    }
}

/// A vector of coordinates standing for an element of a [`SpaceSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&v| v == 0.0)
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// Sampled lower estimate of the smoothness modulus
/// `sup_t t^{−r}·sup{‖x+ty‖ + ‖x−ty‖ − 2 : ‖x‖ = ‖y‖ = 1}`.
///
/// Pair `k` is drawn from stream `k` of `seed`. The result is the largest
/// value seen, never a certified supremum.
pub fn smoothness_scan(space: &SpaceSpec, t_grid: &[f64], pair_samples: usize, seed: u64) -> Result<f64> {
    require(!t_grid.is_empty(), || "t_grid must be nonempty".to_string())?;
    require(pair_samples >= 1, || "pair_samples must be >= 1".to_string())?;
    for &t in t_grid {
        crate::error::positive("t", t)?;
    }
    let d = space.dim();
    let (mut x, mut y) = (vec![0.0; d], vec![0.0; d]);
    let (mut plus, mut minus) = (vec![0.0; d], vec![0.0; d]);
    let mut best = f64::NEG_INFINITY;
    for k in 0..pair_samples {
        let mut rng = path_rng(seed, k as u64);
        space.random_unit(&mut rng, &mut x);
        space.random_unit(&mut rng, &mut y);
        for &t in t_grid {
            for i in 0..d {
                plus[i] = x[i] + t * y[i];
                minus[i] = x[i] - t * y[i];
            }
            let excess = space.norm_coords(&plus) + space.norm_coords(&minus) - 2.0;
            best = best.max(excess / t.powf(space.r));
        }
    }
    Ok(best)
}

/// Monte Carlo estimate of the moment-inequality ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eq7Ratio {
    pub ratio: f64,
    pub std_error: f64,
    /// Set when every sampled increment was zero; `ratio` is then 0.
    pub degenerate: bool,
}

/// Estimates `E‖Sₙ‖^r / (D·Σ E‖Xᵢ‖^r)` (moment convention) or
/// `E‖Sₙ‖² / (D²·Σ E‖Xᵢ‖²)` (two-point convention) from `paths` simulated
/// paths of `model`, measured in the norm of `space`.
///
/// The standard error is the delta-method error of a ratio of means.
pub fn empirical_eq7_ratio(space: &SpaceSpec, model: &MdsModel, n: usize, paths: usize, seed: u64) -> Result<Eq7Ratio> {
    require(n >= 1, || "n must be >= 1".to_string())?;
    require(paths >= 2, || "paths must be >= 2".to_string())?;
    let dim = model.space().dim();
    if dim != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: dim });
    }
    let (exponent, scale) = match space.convention {
        Convention::PaperEq7 => (space.r, space.d_const),
        Convention::PinelisSquared => (2.0, space.d_const * space.d_const),
    };
    let pow = |v: f64| if exponent == 2.0 { v * v } else { v.powf(exponent) };

    use rayon::prelude::*;
    let samples: Vec<(f64, f64)> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let mut sum = vec![0.0; dim];
            let mut inc = vec![0.0; dim];
            let mut denom = 0.0;
            let mut state = model.start_path(&mut rng);
            for _ in 0..n {
                model.step(&mut rng, &mut state, &mut inc);
                denom += pow(space.norm_coords(&inc));
                sum.iter_mut().zip(&inc).for_each(|(s, v)| *s += v);
            }
            (pow(space.norm_coords(&sum)), denom)
        })
        .collect();

    let m = paths as f64;
    let mean_a = samples.iter().map(|s| s.0).sum::<f64>() / m;
    let mean_b = samples.iter().map(|s| s.1).sum::<f64>() / m;
    if mean_b == 0.0 {
        return Ok(Eq7Ratio { ratio: 0.0, std_error: 0.0, degenerate: true });
    }
    let rho = mean_a / mean_b;
    let resid_var = samples.iter().map(|(a, b)| (a - rho * b).powi(2)).sum::<f64>() / (m - 1.0);
    let se = (resid_var / m).sqrt() / mean_b / scale;
    Ok(Eq7Ratio { ratio: rho / scale, std_error: se, degenerate: false })
}
