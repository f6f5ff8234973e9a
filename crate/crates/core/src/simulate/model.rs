use rand::Rng;
use rand_distr::{Distribution, Pareto, Weibull};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::bounds::{tail_exponent, ExpCertificate, PolyCertificate};
use crate::error::{positive, require, unit_open, Error, Result};
use crate::rng::{path_rng, PathRng};
use crate::spaces::{Point, SpaceSpec};
use crate::tails::{exp_tail_constant, n_p, TailFunction};

/// The bundled martingale-difference laws.
///
/// Every variant has a symmetric conditional law given the past, so
/// `E[Xᵢ | F_{i−1}] = 0`, and the same holds for `Xᵢ·1{‖Xᵢ‖ ≤ u}` and
/// `Xᵢ·1{‖Xᵢ‖ > u}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// Independent ±1 signs on the real line.
    RademacherReal,
    /// Independent ±1 signs in every coordinate of `space`.
    RademacherCoords { space: SpaceSpec },
    /// `R·θ` with `P(R > t) = min(1, (scale/t)^p)` and `θ` a symmetric unit
    /// direction.
    ParetoRadial { space: SpaceSpec, p: f64, scale: f64 },
    /// `W·θ` with `P(W > t) = exp(−t^{2α/(1−α)})`.
    WeibullRadial { space: SpaceSpec, alpha: f64 },
    /// `Xᵢ = Y₀·Yᵢ` on the real line: `Y₀ ≥ 0` with tail `exp(−t^{2α/(1−α)})`,
    /// drawn once per path, and independent signs `Yᵢ`. The filtration is
    /// `Fᵢ = σ(Y₀, …, Yᵢ)`.
    ProductY0 { alpha: f64 },
    /// `Xᵢ = Vᵢ·Rᵢ·θᵢ` with `P(Vᵢ > t) = min(1, t^{−p2})`,
    /// `P(Rᵢ > t) = min(1, t^{−p1})`. The scale `Vᵢ` is revealed one step
    /// early (it belongs to `F_{i−1}`), so `E[‖Xᵢ‖^r | F_{i−1}]^{1/r}` is
    /// `Vᵢ·(E R^r)^{1/r}` and has a lighter tail than `‖Xᵢ‖`.
    ConditionalScale { space: SpaceSpec, p1: f64, p2: f64 },
}

/// Choices left free when certificates are derived: the exponent `α` of the
/// stretched-exponential certificate for bounded laws, and the polynomial
/// orders `p1 ≤ p2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CertOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
}

/// Hypotheses of the independent-increment polynomial bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorollaryCertificate {
    pub p: f64,
    /// `sup_i N_p(‖Xᵢ‖)`.
    #[serde(rename = "C")]
    pub c: f64,
    /// `sup_i (E‖Xᵢ‖^r)^{p/r}`.
    pub sup_moment: f64,
}

/// `sup_i E|Xᵢ|^p ≤ M^p`, for real-valued laws only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCertificate {
    pub p: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub exp: Option<ExpCertificate>,
    pub poly: Option<PolyCertificate>,
    pub corollary: Option<CorollaryCertificate>,
    pub moment: Option<MomentCertificate>,
    pub notes: Vec<String>,
}

/// A sampleable martingale-difference model with analytic certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct MdsModel {
    kind: ModelKind,
    options: CertOptions,
    space: SpaceSpec,
    certificates: Certificates,
}

/// Serialised form of a model: its kind plus optional certificate options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "is_default")]
    pub cert: CertOptions,
}

fn is_default(o: &CertOptions) -> bool {
    *o == CertOptions::default()
}

impl TryFrom<ModelSpec> for MdsModel {
    type Error = Error;

    fn try_from(s: ModelSpec) -> Result<Self> {
        MdsModel::with_options(s.kind, s.cert)
    }
}

impl From<MdsModel> for ModelSpec {
    fn from(m: MdsModel) -> Self {
        ModelSpec { kind: m.kind, cert: m.options }
    }
}

/// Per-path state: the `Y₀` factor for [`ModelKind::ProductY0`].
#[derive(Debug, Clone, Copy)]
pub struct PathState {
    y0: f64,
}

const DEFAULT_ALPHA: f64 = 0.5;
const DEFAULT_P1: f64 = 4.0;

impl MdsModel {
    pub fn rademacher_real() -> Self {
        Self::with_options(ModelKind::RademacherReal, CertOptions::default()).expect("valid defaults")
    }

    pub fn rademacher_coords(space: SpaceSpec) -> Result<Self> {
        Self::with_options(ModelKind::RademacherCoords { space }, CertOptions::default())
    }

    pub fn pareto_radial(space: SpaceSpec, p: f64, scale: f64) -> Result<Self> {
        Self::with_options(ModelKind::ParetoRadial { space, p, scale }, CertOptions::default())
    }

    pub fn weibull_radial(space: SpaceSpec, alpha: f64) -> Result<Self> {
        Self::with_options(ModelKind::WeibullRadial { space, alpha }, CertOptions::default())
    }

    pub fn product_y0(alpha: f64) -> Result<Self> {
        Self::with_options(ModelKind::ProductY0 { alpha }, CertOptions::default())
    }

    pub fn conditional_scale(space: SpaceSpec, p1: f64, p2: f64) -> Result<Self> {
        Self::with_options(ModelKind::ConditionalScale { space, p1, p2 }, CertOptions::default())
    }

    pub fn with_options(kind: ModelKind, options: CertOptions) -> Result<Self> {
        let space = match &kind {
            ModelKind::RademacherReal | ModelKind::ProductY0 { .. } => SpaceSpec::real(),
            ModelKind::RademacherCoords { space }
            | ModelKind::ParetoRadial { space, .. }
            | ModelKind::WeibullRadial { space, .. }
            | ModelKind::ConditionalScale { space, .. } => *space,
        };
        let certificates = derive_certificates(&kind, &space, &options)?;
        Ok(Self { kind, options, space, certificates })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn certificates(&self) -> &Certificates {
        &self.certificates
    }

    /// Whether the increments are independent (the corollary path applies).
    pub fn independent(&self) -> bool {
        !matches!(self.kind, ModelKind::ProductY0 { .. })
    }

    /// Increment norms are bounded by this value, when they are bounded.
    pub fn norm_bound(&self) -> Option<f64> {
        match &self.kind {
            ModelKind::RademacherReal => Some(1.0),
            ModelKind::RademacherCoords { space } => Some(space.norm_coords(&vec![1.0; space.dim()])),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ModelKind::RademacherReal => "rademacher_real".to_string(),
            ModelKind::RademacherCoords { space } => format!("rademacher_coords[{}]", space.label()),
            ModelKind::ParetoRadial { space, p, scale } => format!("pareto_radial[{};p={p};scale={scale}]", space.label()),
            ModelKind::WeibullRadial { space, alpha } => format!("weibull_radial[{};alpha={alpha}]", space.label()),
            ModelKind::ProductY0 { alpha } => format!("product_y0[alpha={alpha}]"),
            ModelKind::ConditionalScale { space, p1, p2 } => {
                format!("conditional_scale[{};p1={p1};p2={p2}]", space.label())
            }
        }
    }

    pub fn start_path<R: Rng + ?Sized>(&self, rng: &mut R) -> PathState {
        match &self.kind {
            ModelKind::ProductY0 { alpha } => PathState { y0: weibull(*alpha).sample(rng) },
            _ => PathState { y0: 0.0 },
        }
    }

    /// Writes the next increment into `out` (length = space dimension).
    pub fn step<R: Rng + ?Sized>(&self, rng: &mut R, state: &mut PathState, out: &mut [f64]) {
        match &self.kind {
            ModelKind::RademacherReal => out[0] = sign(rng),
            ModelKind::RademacherCoords { .. } => out.iter_mut().for_each(|v| *v = sign(rng)),
            ModelKind::ParetoRadial { space, p, scale } => {
                let radius = Pareto::new(*scale, *p).expect("validated").sample(rng);
                space.random_unit(rng, out);
                out.iter_mut().for_each(|v| *v *= radius);
            }
            ModelKind::WeibullRadial { space, alpha } => {
                let radius = weibull(*alpha).sample(rng);
                space.random_unit(rng, out);
                out.iter_mut().for_each(|v| *v *= radius);
            }
            ModelKind::ProductY0 { .. } => out[0] = state.y0 * sign(rng),
            ModelKind::ConditionalScale { space, p1, p2 } => {
                let v = Pareto::new(1.0, *p2).expect("validated").sample(rng);
                let r = Pareto::new(1.0, *p1).expect("validated").sample(rng);
                space.random_unit(rng, out);
                out.iter_mut().for_each(|c| *c *= v * r);
            }
        }
    }

    /// `n` increments drawn from `rng`.
    pub fn sample_path_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Point> {
        let mut state = self.start_path(rng);
        (0..n)
            .map(|_| {
                let mut buf = vec![0.0; self.space.dim()];
                self.step(rng, &mut state, &mut buf);
                Point::new(buf)
            })
            .collect()
    }

    /// Per-path `E[exp(δ·|Xᵢ|) | F_{i−1}]` for `i ≥ 1`, available when it does
    /// not depend on `i`: `exp(δ·Y₀)` for the product model, `exp(δ)` for
    /// real Rademacher signs.
    pub fn conditional_exp_moment(&self, state: &PathState, delta: f64) -> Option<f64> {
        match self.kind {
            ModelKind::ProductY0 { .. } => Some((delta * state.y0).exp()),
            ModelKind::RademacherReal => Some(delta.exp()),
            _ => None,
        }
    }
}

/// Path of `n` increments from stream 0 of `seed`; path `i` of a Monte Carlo
/// run with the same seed uses stream `i`.
pub fn sample_path(model: &MdsModel, n: usize, seed: u64) -> Result<Vec<Point>> {
    require(n >= 1, || "n must be >= 1".to_string())?;
    let mut rng: PathRng = path_rng(seed, 0);
    Ok(model.sample_path_with(&mut rng, n))
}

fn sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn weibull(alpha: f64) -> Weibull<f64> {
    Weibull::new(1.0, tail_exponent(alpha)).expect("validated alpha")
}

fn derive_certificates(kind: &ModelKind, space: &SpaceSpec, opts: &CertOptions) -> Result<Certificates> {
    let r = space.r();
    let mut c = Certificates::default();
    let real = space.dim() == 1;
    let cert_alpha = opts.alpha.unwrap_or(DEFAULT_ALPHA);
    if let Some(a) = opts.alpha {
        unit_open("cert alpha", a)?;
    }
    // p2 that equalises the two polynomial rates for constant conditional moments
    let balanced = |p1: f64| (p1 - 1.0) * r / (r - 1.0);
    let orders = |default_p1: f64, default_p2: &dyn Fn(f64) -> f64| -> Result<(f64, f64)> {
        let p1 = opts.p1.unwrap_or(default_p1);
        let p2 = opts.p2.unwrap_or_else(|| default_p2(p1));
        require(p1 > r && p2 >= p1, || format!("certificate orders need p2 >= p1 > r = {r}, got p1 = {p1}, p2 = {p2}"))?;
        Ok((p1, p2))
    };

    match kind {
        ModelKind::RademacherReal | ModelKind::RademacherCoords { .. } => {
            let b = space.norm_coords(&vec![1.0; space.dim()]);
            let tail = TailFunction::bounded(b)?;
            c.exp = Some(ExpCertificate::new(cert_alpha, exp_tail_constant(&tail, cert_alpha)?)?);
            let (p1, p2) = orders(DEFAULT_P1, &balanced)?;
            c.poly = Some(PolyCertificate::new(p1, p2, b.powf(p1), b.powf(p2)));
            c.corollary = Some(CorollaryCertificate { p: p1, c: b.powf(p1), sup_moment: b.powf(p1) });
            if real {
                c.moment = Some(MomentCertificate { p: p1, m: b });
            }
            c.notes.push(format!("increment norm is constant {b}"));
        }
        ModelKind::ParetoRadial { p, scale, .. } => {
            positive("scale", *scale)?;
            require(*p > r, || format!("pareto index p must exceed r = {r}, got {p}"))?;
            let (p1, p2) = orders(*p, &balanced)?;
            require(p1 <= *p, || format!("p1 = {p1} exceeds the tail index {p}"))?;
            let tail = TailFunction::pareto(*p, *scale)?;
            let c1 = n_p(&tail, p1)?;
            let moment_r = scale.powf(r) * p / (p - r);
            c.poly = Some(PolyCertificate::new(p1, p2, c1, moment_r.powf(p2 / r)));
            c.corollary = Some(CorollaryCertificate { p: p1, c: c1, sup_moment: moment_r.powf(p1 / r) });
            c.notes.push("no stretched-exponential certificate: polynomial tail".to_string());
        }
        ModelKind::WeibullRadial { alpha, .. } => {
            unit_open("alpha", *alpha)?;
            let g = tail_exponent(*alpha);
            let tail = TailFunction::weibull_like(*alpha)?;
            c.exp = Some(ExpCertificate::new(*alpha, 1.0)?);
            let (p1, p2) = orders(DEFAULT_P1, &balanced)?;
            let moment_r = gamma(1.0 + r / g);
            let c1 = n_p(&tail, p1)?;
            c.poly = Some(PolyCertificate::new(p1, p2, c1, moment_r.powf(p2 / r)));
            c.corollary = Some(CorollaryCertificate { p: p1, c: c1, sup_moment: moment_r.powf(p1 / r) });
            if real {
                c.moment = Some(MomentCertificate { p: p1, m: gamma(1.0 + p1 / g).powf(1.0 / p1) });
            }
        }
        ModelKind::ProductY0 { alpha } => {
            unit_open("alpha", *alpha)?;
            let g = tail_exponent(*alpha);
            let tail = TailFunction::weibull_like(*alpha)?;
            c.exp = Some(ExpCertificate::new(*alpha, 1.0)?);
            let (p1, p2) = orders(DEFAULT_P1, &|p1| p1)?;
            // |Xᵢ| = Y₀ and E[|Xᵢ|^r | F_{i−1}]^{1/r} = Y₀
            c.poly = Some(PolyCertificate::new(p1, p2, n_p(&tail, p1)?, n_p(&tail, p2)?));
            c.moment = Some(MomentCertificate { p: p1, m: gamma(1.0 + p1 / g).powf(1.0 / p1) });
            c.notes.push("dependent increments: the independent-increment bound does not apply".to_string());
            c.notes.push("E[exp(δ|Xᵢ|) | F_{i−1}] = exp(δ·Y₀) is unbounded".to_string());
        }
        ModelKind::ConditionalScale { p1, p2, .. } => {
            require(*p1 > r && p2 > p1, || format!("conditional_scale needs p2 > p1 > r = {r}, got p1 = {p1}, p2 = {p2}"))?;
            require(opts.p1.is_none() && opts.p2.is_none(), || {
                "conditional_scale fixes its certificate orders to (p1, p2)".to_string()
            })?;
            // P(VR > t) ≤ t^{−p1}·E V^{p1} = t^{−p1}·p2/(p2−p1)
            let c1 = p2 / (p2 - p1);
            let c2 = (p1 / (p1 - r)).powf(p2 / r);
            c.poly = Some(PolyCertificate::new(*p1, *p2, c1, c2));
            let moment_r = p1 / (p1 - r) * p2 / (p2 - r);
            c.corollary = Some(CorollaryCertificate { p: *p1, c: c1, sup_moment: moment_r.powf(p1 / r) });
            c.notes.push("scale V_i is F_{i-1}-measurable".to_string());
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_support() {
        let path = sample_path(&MdsModel::rademacher_real(), 3, 11).unwrap();
        assert!(path.iter().all(|p| p.coords() == [1.0] || p.coords() == [-1.0]));
    }

    #[test]
    fn product_model_has_constant_modulus() {
        let model = MdsModel::product_y0(0.4).unwrap();
        for seed in 0..20 {
            let path = sample_path(&model, 12, seed).unwrap();
            let m0 = path[0].coords()[0].abs();
            assert!(path.iter().all(|p| p.coords()[0].abs() == m0));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = MdsModel::pareto_radial(SpaceSpec::ell_q(3, 4.0).unwrap(), 3.0, 1.0).unwrap();
        assert_eq!(sample_path(&model, 5, 2).unwrap(), sample_path(&model, 5, 2).unwrap());
        assert_ne!(sample_path(&model, 5, 2).unwrap(), sample_path(&model, 5, 3).unwrap());
    }

    #[test]
    fn radial_norms_follow_the_radius() {
        let space = SpaceSpec::ell_q(3, 4.0).unwrap();
        let model = MdsModel::pareto_radial(space, 3.0, 1.0).unwrap();
        let path = sample_path(&model, 200, 5).unwrap();
        assert!(path.iter().all(|p| space.norm(p).unwrap() >= 1.0 - 1e-12));
    }

    #[test]
    fn certificates() {
        let rad = MdsModel::rademacher_real();
        let c = rad.certificates();
        assert_eq!(c.exp.unwrap().c1, std::f64::consts::E);
        assert_eq!(c.poly.unwrap(), PolyCertificate::new(4.0, 6.0, 1.0, 1.0));
        let par = MdsModel::pareto_radial(SpaceSpec::euclidean(2).unwrap(), 4.0, 1.0).unwrap();
        let pc = par.certificates();
        assert!(pc.exp.is_none());
        assert_eq!(pc.poly.unwrap().c1, 1.0);
        assert_eq!(pc.poly.unwrap().p2, 6.0);
        // (E R²)^{1/2} = √2, N_6 = 2³
        assert!((pc.poly.unwrap().c2 - 8.0).abs() < 1e-12);
        assert!(MdsModel::product_y0(0.5).unwrap().certificates().corollary.is_none());
        assert!(MdsModel::pareto_radial(SpaceSpec::euclidean(2).unwrap(), 2.0, 1.0).is_err());
        assert!(MdsModel::conditional_scale(SpaceSpec::real(), 3.0, 3.0).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let m = MdsModel::weibull_radial(SpaceSpec::euclidean(2).unwrap(), 0.5).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: MdsModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let r: MdsModel = serde_json::from_str(r#"{"kind":"rademacher_real","cert":{"alpha":0.3}}"#).unwrap();
        assert_eq!(r.certificates().exp.unwrap().alpha, 0.3);
        assert!(serde_json::from_str::<MdsModel>(r#"{"kind":"pareto_radial","space":{"kind":"real"},"p":1.5,"scale":1}"#).is_err());
    }
}
