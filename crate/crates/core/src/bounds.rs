//! Closed-form deviation bounds for `P(max_{k≤n} ‖S_k‖ > n·x)`.
//!
//! Two layers are exposed. Functions suffixed `_d` take the smoothness
//! constant exactly as it enters the printed formula. The unsuffixed
//! versions take a [`SpaceSpec`] and read the constant in the reading the
//! formula was proved for: the stretched-exponential bound and the truncation
//! bound use the two-point constant ([`SpaceSpec::d_two_point`]), the
//! polynomial bounds use the moment constant ([`SpaceSpec::d_moment`]).
//!
//! Threshold conventions: theorem-level bounds take the normalised `x` and
//! multiply by `n` internally; proof-level bounds (`pretrunc_bound`,
//! `pinelis_hoeffding`, `i1_i2_numeric`) take the absolute threshold.
//!
//! Values are never clamped to 1. [`BoundResult::trivial`] flags a bound
//! that carries no information.

use std::collections::BTreeMap;
use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::{nonneg, positive, require, unit_open, Error, Result};
use crate::quad::integrate;
use crate::spaces::SpaceSpec;

/// Theorem 1 constant `1007156`, an upper bound for `86400/(1−1/√2)²`.
pub const THEOREM1_NUMERATOR: f64 = 1_007_156.0;
/// Constant of the weak-tail second-moment inequality for unbounded
/// increments, `7200·e²·D²`, without the `e²·D²`.
pub const PINELIS_TAIL_CONSTANT: f64 = 7200.0;
/// `12 × 7200`: the truncated second-moment bound times the tail constant.
pub const TRUNCATION_NUMERATOR: f64 = 12.0 * PINELIS_TAIL_CONSTANT;
/// Constant of the comparison real-line stretched-exponential bound.
pub const FAN_CONSTANT: f64 = 35.0;
/// Relative tolerance of the adaptive quadrature behind [`i1_i2_numeric`].
pub const QUAD_RTOL: f64 = 1e-8;

/// Stretched-exponential tail certificate:
/// `sup_i sup_t exp(t^{2α/(1−α)})·P(‖Xᵢ‖ > t) ≤ C₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpCertificate {
    pub alpha: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
}

impl ExpCertificate {
    pub fn new(alpha: f64, c1: f64) -> Result<Self> {
        let cert = Self { alpha, c1 };
        cert.validate()?;
        Ok(cert)
    }

    pub fn validate(&self) -> Result<()> {
        unit_open("alpha", self.alpha)?;
        nonneg("C1", self.c1)
    }

    /// Tail exponent `2α/(1−α)`.
    pub fn gamma(&self) -> f64 {
        tail_exponent(self.alpha)
    }
}

/// Polynomial tail certificate: weak-`L^{p₁}` control of the increments
/// (`C₁`) and weak-`L^{p₂}` control of the conditional `r`-th moments (`C₂`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyCertificate {
    pub p1: f64,
    pub p2: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
}

impl PolyCertificate {
    pub fn new(p1: f64, p2: f64, c1: f64, c2: f64) -> Self {
        Self { p1, p2, c1, c2 }
    }

    /// Checks `p₂ ≥ p₁ > r` and nonnegative constants.
    pub fn validate(&self, r: f64) -> Result<()> {
        check_orders(self.p1, self.p2, r)?;
        nonneg("C1", self.c1)?;
        nonneg("C2", self.c2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub trivial: bool,
    pub constants: BTreeMap<String, f64>,
}

impl BoundResult {
    pub fn new(value: f64, constants: impl IntoIterator<Item = (&'static str, f64)>) -> Self {
        Self {
            value,
            trivial: value >= 1.0,
            constants: constants.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }
}

pub(crate) fn tail_exponent(alpha: f64) -> f64 {
    2.0 * alpha / (1.0 - alpha)
}

fn check_n(n: u64) -> Result<f64> {
    require(n >= 1, || "n must be >= 1".to_string())?;
    Ok(n as f64)
}

fn check_orders(p1: f64, p2: f64, r: f64) -> Result<()> {
    require(r > 1.0 && r <= 2.0, || format!("r must lie in (1, 2], got {r}"))?;
    require(p1.is_finite() && p2.is_finite(), || "p1 and p2 must be finite".to_string())?;
    require(p1 > r, || format!("need p1 > r, got p1 = {p1}, r = {r}"))?;
    require(p2 >= p1, || format!("need p2 >= p1, got p1 = {p1}, p2 = {p2}"))
}

fn space_r2(space: &SpaceSpec) -> Result<f64> {
    if space.r() != 2.0 {
        return Err(Error::UnsupportedSpace(format!(
            "the stretched-exponential bound needs a (2, D)-smooth space, {} has r = {}",
            space.label(),
            space.r()
        )));
    }
    Ok(space.d_two_point())
}

/// `β = (3(1−α)/(2α))^{(1−α)/(2α)}`, the mode of `t³·exp(−t^{2α/(1−α)})`.
pub fn beta_threshold(alpha: f64) -> Result<f64> {
    unit_open("alpha", alpha)?;
    Ok((3.0 * (1.0 - alpha) / (2.0 * alpha)).powf((1.0 - alpha) / (2.0 * alpha)))
}

/// `C(α, x) = 2 + 1007156·e²·D²·C₁·(x^{−2α}·16^{−(1−α)}·D^{−2(1−α)} + x^{−2}·β²)`.
pub fn theorem1_constant(alpha: f64, x: f64, d: f64, c1: f64) -> Result<f64> {
    unit_open("alpha", alpha)?;
    positive("x", x)?;
    positive("D", d)?;
    nonneg("C1", c1)?;
    let beta_sq = (3.0 * (1.0 - alpha) / (2.0 * alpha)).powf((1.0 - alpha) / alpha);
    let first = x.powf(-2.0 * alpha) * 16f64.powf(alpha - 1.0) * d.powf(2.0 * (alpha - 1.0));
    let second = beta_sq / (x * x);
    Ok(2.0 + THEOREM1_NUMERATOR * E * E * d * d * c1 * (first + second))
}

/// `C(α, x)·exp(−(x/(4D))^{2α}·n^α)` with a literal `D`.
pub fn theorem1_bound_d(n: u64, x: f64, d: f64, cert: &ExpCertificate) -> Result<BoundResult> {
    let nf = check_n(n)?;
    cert.validate()?;
    let c = theorem1_constant(cert.alpha, x, d, cert.c1)?;
    let exponent = (x / (4.0 * d)).powf(2.0 * cert.alpha) * nf.powf(cert.alpha);
    Ok(BoundResult::new(
        c * (-exponent).exp(),
        [("C_alpha_x", c), ("beta", beta_threshold(cert.alpha)?), ("D", d), ("exponent", exponent)],
    ))
}

/// Stretched-exponential bound for a `(2, D)`-smooth space.
pub fn theorem1_bound(n: u64, x: f64, space: &SpaceSpec, cert: &ExpCertificate) -> Result<BoundResult> {
    theorem1_bound_d(n, x, space_r2(space)?, cert)
}

/// Default truncation parameters for absolute threshold
/// `total_x`: `t = 1/√2`, `u = (total_x/(4D√n))^{1−α}`.
pub fn substitution_point(total_x: f64, n: u64, d: f64, alpha: f64) -> Result<(f64, f64)> {
    let nf = check_n(n)?;
    positive("total_x", total_x)?;
    positive("D", d)?;
    unit_open("alpha", alpha)?;
    Ok((std::f64::consts::FRAC_1_SQRT_2, (total_x / (4.0 * d * nf.sqrt())).powf(1.0 - alpha)))
}

pub(crate) struct PretruncTerms {
    /// `ln` of `2·exp(−total_x²t²/(8D²u²n))`.
    pub ln_bounded: f64,
    /// `ln` of the truncated-tail term, `-inf` when `C₁ = 0`.
    pub ln_tail: f64,
}

impl PretruncTerms {
    pub fn ln_value(&self) -> f64 {
        ln_add(self.ln_bounded, self.ln_tail)
    }
}

pub(crate) fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub(crate) fn pretrunc_terms(total_x: f64, nf: f64, t: f64, u: f64, d: f64, alpha: f64, c1: f64, beta: f64) -> PretruncTerms {
    let ln_bounded = LN_2 - (total_x * total_x * t * t) / (8.0 * d * d * u * u * nf);
    let ln_tail = if c1 == 0.0 {
        f64::NEG_INFINITY
    } else {
        (TRUNCATION_NUMERATOR * E * E * d * d * c1 * nf).ln() - 2.0 * (1.0 - t).ln() - 2.0 * total_x.ln()
            + (u * u + beta * beta).ln()
            - u.powf(tail_exponent(alpha))
    };
    PretruncTerms { ln_bounded, ln_tail }
}

/// Truncation bound valid for every `t ∈ (0,1)` and `u > 0`:
///
/// `2·exp(−X²t²/(8D²u²n)) + 12·7200·e²·D²·C₁·n/((1−t)²X²)·(u²+β²)·exp(−u^{2α/(1−α)})`
///
/// where `X = total_x` is the absolute threshold.
pub fn pretrunc_bound_d(total_x: f64, n: u64, t: f64, u: f64, d: f64, cert: &ExpCertificate) -> Result<BoundResult> {
    let nf = check_n(n)?;
    positive("total_x", total_x)?;
    unit_open("t", t)?;
    positive("u", u)?;
    positive("D", d)?;
    cert.validate()?;
    let beta = beta_threshold(cert.alpha)?;
    let terms = pretrunc_terms(total_x, nf, t, u, d, cert.alpha, cert.c1, beta);
    let (a, b) = (terms.ln_bounded.exp(), terms.ln_tail.exp());
    Ok(BoundResult::new(a + b, [("bounded_term", a), ("tail_term", b), ("beta", beta), ("t", t), ("u", u), ("D", d)]))
}

pub fn pretrunc_bound(total_x: f64, n: u64, t: f64, u: f64, space: &SpaceSpec, cert: &ExpCertificate) -> Result<BoundResult> {
    pretrunc_bound_d(total_x, n, t, u, space_r2(space)?, cert)
}

/// The truncation bound after substituting [`substitution_point`], in its
/// printed form `C_n(α, X)·exp(−(X²/(16D²n))^α)` with
/// `C_n = 2 + 86400/(1−1/√2)²·e²·D²·C₁·n·(X^{−2α}(16D²n)^{−(1−α)} + β²/X²)`.
pub fn substituted_bound_d(total_x: f64, n: u64, d: f64, cert: &ExpCertificate) -> Result<BoundResult> {
    let nf = check_n(n)?;
    positive("total_x", total_x)?;
    positive("D", d)?;
    cert.validate()?;
    let alpha = cert.alpha;
    let beta = beta_threshold(alpha)?;
    let k = TRUNCATION_NUMERATOR / (1.0 - std::f64::consts::FRAC_1_SQRT_2).powi(2);
    let cn = 2.0
        + k * E * E * d * d * cert.c1 * nf
            * (total_x.powf(-2.0 * alpha) * (16.0 * d * d * nf).powf(alpha - 1.0) + beta * beta / (total_x * total_x));
    let exponent = (total_x * total_x / (16.0 * d * d * nf)).powf(alpha);
    Ok(BoundResult::new(cn * (-exponent).exp(), [("C_n", cn), ("beta", beta), ("exponent", exponent)]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Constants {
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
}

fn geometric_prefactor(p2: f64) -> f64 {
    let g = 2f64.powf(2.0 * p2);
    g / (g - 1.0)
}

/// `K₁ = 2^{2p₂}/(2^{2p₂}−1)·2^{1−r}·2^{p₁+2p₁p₂/r}·D^{p₁/r}` and
/// `K₂ = 2^{2p₂}/(2^{2p₂}−1)·2^{1−r}·2^{p₂+2p₂²/r}·D^{p₂/r}·(p₂/(p₂−r))^{p₂/r}`.
pub fn theorem2_constants(p1: f64, p2: f64, r: f64, d: f64) -> Result<Theorem2Constants> {
    check_orders(p1, p2, r)?;
    positive("D", d)?;
    let pre = geometric_prefactor(p2) * 2f64.powf(1.0 - r);
    let k1 = pre * 2f64.powf(p1 + 2.0 * p1 * p2 / r) * d.powf(p1 / r);
    let k2 = pre * 2f64.powf(p2 + 2.0 * p2 * p2 / r) * d.powf(p2 / r) * (p2 / (p2 - r)).powf(p2 / r);
    Ok(Theorem2Constants { k1, k2 })
}

/// `K₁·C₁·x^{−p₁}·n^{1−p₁} + K₂·C₂·x^{−p₂}·n^{p₂/r−p₂}` with literal `r`, `D`.
pub fn theorem2_bound_d(n: u64, x: f64, r: f64, d: f64, cert: &PolyCertificate) -> Result<BoundResult> {
    let nf = check_n(n)?;
    positive("x", x)?;
    cert.validate(r)?;
    let k = theorem2_constants(cert.p1, cert.p2, r, d)?;
    let first = k.k1 * cert.c1 * x.powf(-cert.p1) * nf.powf(1.0 - cert.p1);
    let second = k.k2 * cert.c2 * x.powf(-cert.p2) * nf.powf(cert.p2 / r - cert.p2);
    Ok(BoundResult::new(first + second, [("K1", k.k1), ("K2", k.k2), ("first_term", first), ("second_term", second), ("D", d)]))
}

/// Polynomial bound for an `(r, D)`-smooth space.
pub fn theorem2_bound(n: u64, x: f64, space: &SpaceSpec, cert: &PolyCertificate) -> Result<BoundResult> {
    theorem2_bound_d(n, x, space.r(), space.d_moment(), cert)
}

/// `(K(p, r, D), p₂)` for independent increments, where
/// `p₂ = (p−1)r/(r−1)` equalises the two decay rates.
pub fn corollary_constant(p: f64, r: f64, d: f64) -> Result<(f64, f64)> {
    require(r > 1.0 && r <= 2.0, || format!("r must lie in (1, 2], got {r}"))?;
    require(p.is_finite() && p > r, || format!("need p > r, got p = {p}, r = {r}"))?;
    positive("D", d)?;
    let p2 = (p - 1.0) * r / (r - 1.0);
    let k = geometric_prefactor(p2) * 2f64.powf(1.0 - r) * 2f64.powf(p + 2.0 * p * p2 / r) * d.powf(p / r);
    Ok((k, p2))
}

/// `K(p,r,D)·(C·x^{−p} + sup_moment·x^{−(p−1)r/(r−1)})·n^{1−p}` where
/// `sup_moment = sup_i (E‖Xᵢ‖^r)^{p/r}`.
pub fn corollary_bound_d(n: u64, x: f64, r: f64, d: f64, p: f64, c: f64, sup_moment: f64) -> Result<BoundResult> {
    let nf = check_n(n)?;
    positive("x", x)?;
    nonneg("C", c)?;
    nonneg("sup_moment", sup_moment)?;
    let (k, p2) = corollary_constant(p, r, d)?;
    let value = k * (c * x.powf(-p) + sup_moment * x.powf(-p2)) * nf.powf(1.0 - p);
    Ok(BoundResult::new(value, [("K", k), ("p2", p2), ("D", d)]))
}

pub fn corollary_bound(n: u64, x: f64, space: &SpaceSpec, p: f64, c: f64, sup_moment: f64) -> Result<BoundResult> {
    corollary_bound_d(n, x, space.r(), space.d_moment(), p, c, sup_moment)
}

/// Real-line bound `(18p√(p/(p−1)))^p·M^p·x^{−p}·n^{−p/2}` where
/// `M^p = sup_i E|Xᵢ|^p`.
pub fn lesigne_volny_bound(n: u64, x: f64, p: f64, m: f64) -> Result<BoundResult> {
    let nf = check_n(n)?;
    positive("x", x)?;
    require(p.is_finite() && p >= 2.0, || format!("need p >= 2, got {p}"))?;
    nonneg("M", m)?;
    let prefactor = (18.0 * p * (p / (p - 1.0)).sqrt()).powf(p);
    let value = prefactor * m.powf(p) * x.powf(-p) * nf.powf(-p / 2.0);
    Ok(BoundResult::new(value, [("prefactor", prefactor)]))
}

/// Real-line stretched-exponential bound with constant 35. It controls the
/// one-sided `max_k S_k`, with `C₁` the exponential-moment constant
/// `sup_i E exp(|Xᵢ|^{2α/(1−α)})`.
pub fn fan_real_bound(n: u64, x: f64, alpha: f64, c1: f64) -> Result<BoundResult> {
    let nf = check_n(n)?;
    unit_open("alpha", alpha)?;
    positive("x", x)?;
    nonneg("C1", c1)?;
    let beta_sq = (3.0 * (1.0 - alpha) / (2.0 * alpha)).powf((1.0 - alpha) / alpha);
    let c = 2.0 + FAN_CONSTANT * c1 * (x.powf(-2.0 * alpha) * 16f64.powf(alpha - 1.0) + beta_sq / (x * x));
    let exponent = (x / 4.0).powf(2.0 * alpha) * nf.powf(alpha);
    Ok(BoundResult::new(c * (-exponent).exp(), [("C_alpha_x", c), ("exponent", exponent)]))
}

/// Bounded-increment exponential inequality as printed:
/// `exp(−x_abs²/(2D²nb²))` for increments with `‖Xᵢ‖ ≤ b`.
pub fn pinelis_hoeffding(n: u64, x_abs: f64, b: f64, d: f64) -> Result<f64> {
    let nf = check_n(n)?;
    nonneg("x_abs", x_abs)?;
    positive("b", b)?;
    positive("D", d)?;
    Ok((-(x_abs * x_abs) / (2.0 * d * d * nf * b * b)).exp())
}

/// Numeric evaluation of the two terms of the general deviation lemma,
///
/// `I₁ = 2^{q−r}q/(2^q−1)·∫₀¹ P(max‖Xᵢ‖ > 2^{−1−q/r}D^{−1/r}·x_abs·u)·u^{q−1} du`
///
/// and `I₂` likewise with the tail of `(Σ E[‖Xᵢ‖^r | F_{i−1}])^{1/r}`.
/// `max_tail` and `cond_tail` must be nonincreasing with values in `[0, 1]`.
pub fn i1_i2_numeric(
    q: f64,
    x_abs: f64,
    max_tail: &dyn Fn(f64) -> f64,
    cond_tail: &dyn Fn(f64) -> f64,
    r: f64,
    d: f64,
) -> Result<(f64, f64)> {
    positive("q", q)?;
    nonneg("x_abs", x_abs)?;
    require(r > 1.0 && r <= 2.0, || format!("r must lie in (1, 2], got {r}"))?;
    positive("D", d)?;
    let pre = 2f64.powf(q - r) * q / (2f64.powf(q) - 1.0);
    let scale = 2f64.powf(-1.0 - q / r) * d.powf(-1.0 / r) * x_abs;
    let run = |tail: &dyn Fn(f64) -> f64| integrate(|u| tail(scale * u) * u.powf(q - 1.0), 0.0, 1.0, QUAD_RTOL);
    Ok((pre * run(max_tail)?, pre * run(cond_tail)?))
}

/// Polynomial bound with a free exponent `q > p₂`:
///
/// `2^{q−r}q/(2^q−1)·[2^{(1+q/r)p₁}D^{p₁/r}C₁x^{−p₁}n^{1−p₁}/(q−p₁)
///   + 2^{(1+q/r)p₂}D^{p₂/r}(p₂/(p₂−r))^{p₂/r}C₂x^{−p₂}n^{p₂/r−p₂}/(q−p₂)]`.
///
/// At `q = 2p₂` it is at most [`theorem2_bound_d`], which loosens
/// `2p₂/(2p₂−p₁)` to 2.
pub fn theorem2_general_q_bound_d(q: f64, n: u64, x: f64, r: f64, d: f64, cert: &PolyCertificate) -> Result<BoundResult> {
    check_n(n)?;
    positive("x", x)?;
    positive("D", d)?;
    cert.validate(r)?;
    require(q.is_finite() && q > cert.p2, || format!("need q > p2 = {} for integrability, got q = {q}", cert.p2))?;
    let (ln_first, ln_second) = general_q_ln_terms(q, n as f64, x, r, d, cert);
    let (first, second) = (ln_first.exp(), ln_second.exp());
    Ok(BoundResult::new(first + second, [("q", q), ("first_term", first), ("second_term", second), ("D", d)]))
}

pub fn theorem2_general_q_bound(q: f64, n: u64, x: f64, space: &SpaceSpec, cert: &PolyCertificate) -> Result<BoundResult> {
    theorem2_general_q_bound_d(q, n, x, space.r(), space.d_moment(), cert)
}

/// Logarithms of the two summands of the general-q bound (prefactor included).
pub(crate) fn general_q_ln_terms(q: f64, nf: f64, x: f64, r: f64, d: f64, cert: &PolyCertificate) -> (f64, f64) {
    // ln(2^q − 1) = q·ln2 + ln(1 − 2^{−q})
    let ln_pre = (q - r) * LN_2 + q.ln() - (q * LN_2 + (-(2f64.powf(-q))).ln_1p());
    let (p1, p2) = (cert.p1, cert.p2);
    let ln_of = |c: f64| if c == 0.0 { f64::NEG_INFINITY } else { c.ln() };
    let ln_first = ln_pre + (1.0 + q / r) * p1 * LN_2 + (p1 / r) * d.ln() + ln_of(cert.c1) - p1 * x.ln()
        + (1.0 - p1) * nf.ln()
        - (q - p1).ln();
    let ln_second = ln_pre + (1.0 + q / r) * p2 * LN_2 + (p2 / r) * d.ln() + (p2 / r) * (p2 / (p2 - r)).ln()
        + ln_of(cert.c2)
        - p2 * x.ln()
        + (p2 / r - p2) * nf.ln()
        - (q - p2).ln();
    (ln_first, ln_second)
}
