//! Numerical choice of the free parameters in the truncation bounds.
//!
//! Each search keeps the default parameter choice as an incumbent, so the
//! returned value never exceeds `paper_value`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{beta_threshold, general_q_ln_terms, ln_add, pretrunc_terms, substitution_point, ExpCertificate, PolyCertificate};
use crate::error::{positive, require, Error, Result};
use crate::spaces::SpaceSpec;

/// Relative tolerance on the objective.
pub const OBJECTIVE_RTOL: f64 = 1e-6;
/// Cap on objective evaluations per search.
pub const MAX_EVALUATIONS: usize = 10_000;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Minimises `f` on `[lo, hi]` by golden-section search, returning the best
/// point evaluated (endpoints included).
pub fn golden_section<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rtol: f64, max_iter: usize) -> GoldenResult {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut best = GoldenResult { x: a, value: f(a), iterations: 0 };
    let consider = |x: f64, v: f64, best: &mut GoldenResult| {
        if v < best.value || best.value.is_nan() {
            best.x = x;
            best.value = v;
        }
    };
    let fb = f(b);
    consider(b, fb, &mut best);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    consider(c, fc, &mut best);
    consider(d, fd, &mut best);
    let mut iterations = 0;
    while iterations < max_iter && (b - a) > rtol * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            consider(c, fc, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            consider(d, fd, &mut best);
        }
    }
    best.iterations = iterations;
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub params: BTreeMap<String, f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub paper_value: f64,
    pub iterations: usize,
    /// Successive incumbents, starting at the default parameters.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
}

impl OptResult {
    pub fn without_trace(mut self) -> Self {
        self.trace.clear();
        self
    }
}

/// Search spec for [`optimize_theorem1`]: `resolution` points per axis
/// (1 means the default point only) and the upper end of the `u` range,
/// defaulting to ten times the default `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Grid {
    pub resolution: usize,
    pub u_max: Option<f64>,
}

impl Default for Theorem1Grid {
    fn default() -> Self {
        Self { resolution: 24, u_max: None }
    }
}

// Lowest `u` searched, relative to `u_max`.
const U_SPAN: f64 = 1e-4;

struct Incumbent {
    point: Vec<f64>,
    ln_value: f64,
    trace: Vec<TraceEntry>,
    names: &'static [&'static str],
}

impl Incumbent {
    fn new(names: &'static [&'static str], point: Vec<f64>, ln_value: f64) -> Self {
        let mut s = Self { point, ln_value, trace: Vec::new(), names };
        s.record();
        s
    }

    fn record(&mut self) {
        let params = self.names.iter().map(|n| n.to_string()).zip(self.point.iter().copied()).collect();
        self.trace.push(TraceEntry { params, value: self.ln_value.exp() });
    }

    fn offer(&mut self, point: Vec<f64>, ln_value: f64) -> bool {
        if ln_value < self.ln_value {
            self.point = point;
            self.ln_value = ln_value;
            self.record();
            true
        } else {
            false
        }
    }

    fn finish(self, reference_ln: f64, iterations: usize) -> OptResult {
        OptResult {
            params: self.names.iter().map(|n| n.to_string()).zip(self.point).collect(),
            value: self.ln_value.exp(),
            paper_value: reference_ln.exp(),
            iterations,
            trace: self.trace,
        }
    }
}

/// Minimises the truncation bound over `(t, u)` at `total_x = n·x`, with a
/// literal `D`.
pub fn optimize_theorem1_d(n: u64, x: f64, d: f64, cert: &ExpCertificate, grid: &Theorem1Grid) -> Result<OptResult> {
    require(n >= 1, || "n must be >= 1".to_string())?;
    positive("x", x)?;
    positive("D", d)?;
    cert.validate()?;
    require(grid.resolution >= 1, || "grid resolution must be >= 1".to_string())?;
    let nf = n as f64;
    let total_x = nf * x;
    let beta = beta_threshold(cert.alpha)?;
    let objective = |t: f64, u: f64| pretrunc_terms(total_x, nf, t, u, d, cert.alpha, cert.c1, beta).ln_value();
    let (t0, u0) = substitution_point(total_x, n, d, cert.alpha)?;
    let reference_ln = objective(t0, u0);
    let mut best = Incumbent::new(&["t", "u"], vec![t0, u0], reference_ln);
    if grid.resolution == 1 {
        return Ok(best.finish(reference_ln, 0));
    }
    let u_max = grid.u_max.unwrap_or(10.0 * u0);
    positive("u_max", u_max)?;

    let k = grid.resolution;
    let ts: Vec<f64> = (1..=k).map(|i| i as f64 / (k + 1) as f64).collect();
    let ln_u_lo = (u_max * U_SPAN).ln();
    let ln_u_hi = u_max.ln();
    let ln_step = (ln_u_hi - ln_u_lo) / (k - 1) as f64;
    let ln_us: Vec<f64> = (0..k).map(|j| ln_u_lo + j as f64 * ln_step).collect();
    let cells: Vec<(f64, f64)> = ts.iter().flat_map(|&t| ln_us.iter().map(move |&lu| (t, lu))).collect();
    let values: Vec<f64> = cells.par_iter().map(|&(t, lu)| objective(t, lu.exp())).collect();
    let mut evaluations = 1 + values.len();
    for (&(t, lu), &v) in cells.iter().zip(&values) {
        best.offer(vec![t, lu.exp()], v);
    }

    let t_half = 1.0 / (k + 1) as f64;
    let t_edge = 1e-9;
    loop {
        let before = best.ln_value;
        let (t, u) = (best.point[0], best.point[1]);
        let g = golden_section(
            |tt| objective(tt, u),
            (t - t_half).max(t_edge),
            (t + t_half).min(1.0 - t_edge),
            1e-10,
            200,
        );
        evaluations += g.iterations + 4;
        best.offer(vec![g.x, u], g.value);
        let t = best.point[0];
        let lu = best.point[1].ln();
        let g = golden_section(|l| objective(t, l.exp()), lu - ln_step, (lu + ln_step).min(ln_u_hi), 1e-12, 200);
        evaluations += g.iterations + 4;
        best.offer(vec![t, g.x.exp()], g.value);
        let gain = before - best.ln_value;
        if gain <= OBJECTIVE_RTOL || evaluations >= MAX_EVALUATIONS {
            break;
        }
    }
    if !best.ln_value.is_finite() && best.ln_value != f64::NEG_INFINITY {
        return Err(Error::InvalidInput("objective is not finite".to_string()));
    }
    Ok(best.finish(reference_ln, evaluations))
}

pub fn optimize_theorem1(n: u64, x: f64, space: &SpaceSpec, cert: &ExpCertificate, grid: &Theorem1Grid) -> Result<OptResult> {
    if space.r() != 2.0 {
        return Err(Error::UnsupportedSpace(format!("{} has r = {}, need r = 2", space.label(), space.r())));
    }
    optimize_theorem1_d(n, x, space.d_two_point(), cert, grid)
}

const Q_GRID: usize = 64;

/// Minimises the general-q bound over `q ∈ bracket`, with `q = 2p₂` as the
/// incumbent, for a literal `D`.
pub fn optimize_theorem2_q_d(n: u64, x: f64, r: f64, d: f64, cert: &PolyCertificate, bracket: (f64, f64)) -> Result<OptResult> {
    require(n >= 1, || "n must be >= 1".to_string())?;
    positive("x", x)?;
    positive("D", d)?;
    cert.validate(r)?;
    let (q_lo, q_hi) = bracket;
    require(q_lo > cert.p2 && q_hi.is_finite(), || format!("bracket must satisfy q_lo > p2 = {}, got {q_lo}", cert.p2))?;
    require(q_hi >= q_lo, || format!("empty bracket ({q_lo}, {q_hi})"))?;
    let nf = n as f64;
    let objective = |q: f64| {
        let (a, b) = general_q_ln_terms(q, nf, x, r, d, cert);
        ln_add(a, b)
    };
    let q0 = 2.0 * cert.p2;
    let reference_ln = objective(q0);
    let mut best = Incumbent::new(&["q"], vec![q0], reference_ln);
    if q_hi == q_lo {
        best.offer(vec![q_lo], objective(q_lo));
        return Ok(best.finish(reference_ln, 1));
    }
    let step = (q_hi - q_lo) / (Q_GRID - 1) as f64;
    let qs: Vec<f64> = (0..Q_GRID).map(|i| q_lo + i as f64 * step).collect();
    let values: Vec<f64> = qs.par_iter().map(|&q| objective(q)).collect();
    for (&q, &v) in qs.iter().zip(&values) {
        best.offer(vec![q], v);
    }
    let q = best.point[0];
    let g = golden_section(objective, (q - step).max(q_lo), (q + step).min(q_hi), 1e-12, 200);
    best.offer(vec![g.x], g.value);
    Ok(best.finish(reference_ln, 1 + Q_GRID + g.iterations + 4))
}

pub fn optimize_theorem2_q(n: u64, x: f64, space: &SpaceSpec, cert: &PolyCertificate, bracket: (f64, f64)) -> Result<OptResult> {
    optimize_theorem2_q_d(n, x, space.r(), space.d_moment(), cert, bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{pretrunc_bound_d, theorem2_bound_d, theorem2_general_q_bound_d};

    #[test]
    fn golden_finds_interior_and_boundary_minima() {
        let g = golden_section(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-12, 200);
        assert!((g.x - 0.3).abs() < 1e-6);
        let g = golden_section(|x| x, 2.0, 5.0, 1e-12, 200);
        assert_eq!(g.x, 2.0);
    }

    #[test]
    fn theorem1_default_point_only() {
        let cert = ExpCertificate::new(0.5, 1.0).unwrap();
        let r = optimize_theorem1_d(100, 1.0, 1.0, &cert, &Theorem1Grid { resolution: 1, u_max: None }).unwrap();
        assert_eq!(r.value, r.paper_value);
        let (t, u) = substitution_point(100.0, 100, 1.0, 0.5).unwrap();
        let direct = pretrunc_bound_d(100.0, 100, t, u, 1.0, &cert).unwrap().value;
        assert!((r.paper_value - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn theorem1_strict_improvement() {
        let cert = ExpCertificate::new(0.5, 1.0).unwrap();
        let r = optimize_theorem1_d(100, 1.0, 1.0, &cert, &Theorem1Grid::default()).unwrap();
        assert!(r.value < r.paper_value, "{} vs {}", r.value, r.paper_value);
        let t = r.params["t"];
        let u = r.params["u"];
        let direct = pretrunc_bound_d(100.0, 100, t, u, 1.0, &cert).unwrap().value;
        assert!((direct - r.value).abs() <= 1e-12 * direct);
        assert_eq!(r.trace.first().unwrap().value, r.paper_value);
        assert_eq!(r.trace.last().unwrap().value, r.value);
    }

    #[test]
    fn theorem1_without_tail_mass() {
        let cert = ExpCertificate::new(0.5, 0.0).unwrap();
        let r = optimize_theorem1_d(20, 0.5, 1.0, &cert, &Theorem1Grid::default()).unwrap();
        assert!(r.value <= r.paper_value);
    }

    #[test]
    fn theorem2_chain() {
        let cert = PolyCertificate::new(3.0, 3.0, 1.0, 1.0);
        let r = optimize_theorem2_q_d(100, 1.0, 2.0, 1.0, &cert, (3.1, 20.0)).unwrap();
        let at_default = theorem2_general_q_bound_d(6.0, 100, 1.0, 2.0, 1.0, &cert).unwrap().value;
        let closed = theorem2_bound_d(100, 1.0, 2.0, 1.0, &cert).unwrap().value;
        assert!(r.value <= r.paper_value);
        assert!((r.paper_value - at_default).abs() <= 1e-12 * at_default);
        assert!(r.paper_value <= closed);
    }

    #[test]
    fn theorem2_degenerate_and_bad_brackets() {
        let cert = PolyCertificate::new(3.0, 3.0, 1.0, 1.0);
        let r = optimize_theorem2_q_d(100, 1.0, 2.0, 1.0, &cert, (6.0, 6.0)).unwrap();
        assert_eq!(r.value, r.paper_value);
        assert!(optimize_theorem2_q_d(100, 1.0, 2.0, 1.0, &cert, (3.0, 20.0)).is_err());
        let far = theorem2_general_q_bound_d(60.0, 100, 1.0, 2.0, 1.0, &cert).unwrap().value;
        assert!(far > r.paper_value);
    }
}
