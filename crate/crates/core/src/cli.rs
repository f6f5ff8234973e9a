//! Campaign files and the commands behind the `mdev` binary.
//!
//! Exit codes: 0 success (every verified row dominates), 1 a row where the
//! Monte Carlo lower confidence limit exceeds the bound, 2 usage or input
//! error, 3 numeric failure. The worker count comes from `MDEV_THREADS`.
//!
//! Verification CSV columns, in order:
//! `model,n,x,paths,seed,p_hat,ci_low,ci_high,bound_name,bound_value,trivial,dominates`.
//! Skipped rows leave `bound_value` and `trivial` empty and set
//! `dominates` to `skipped`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    corollary_bound, corollary_bound_d, fan_real_bound, lesigne_volny_bound, pinelis_hoeffding, pretrunc_bound_d,
    theorem1_bound, theorem1_bound_d, theorem2_bound, theorem2_bound_d, theorem2_general_q_bound,
    theorem2_general_q_bound_d, BoundResult, ExpCertificate, PolyCertificate,
};
use crate::error::Error;
use crate::optimize::{optimize_theorem1, optimize_theorem1_d, optimize_theorem2_q, optimize_theorem2_q_d, OptResult, Theorem1Grid};
use crate::simulate::{
    exact_deviation_prob_rademacher, mc_deviation_grid, mc_deviation_prob, rate_fit, McEstimate, MdsModel, RateFamily,
    RateFit,
};

pub const THREADS_ENV: &str = "MDEV_THREADS";

pub const CSV_COLUMNS: [&str; 12] =
    ["model", "n", "x", "paths", "seed", "p_hat", "ci_low", "ci_high", "bound_name", "bound_value", "trivial", "dominates"];

/// A command failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Quadrature { .. }) { 3 } else { 2 };
        Self { code, message: e.to_string() }
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSelector {
    Theorem1,
    Theorem2,
    Corollary,
    Lv,
    GeneralQ,
    OptTheorem1,
    OptTheorem2,
}

impl BoundSelector {
    pub fn name(self) -> &'static str {
        match self {
            Self::Theorem1 => "theorem1",
            Self::Theorem2 => "theorem2",
            Self::Corollary => "corollary",
            Self::Lv => "lv",
            Self::GeneralQ => "general_q",
            Self::OptTheorem1 => "opt_theorem1",
            Self::OptTheorem2 => "opt_theorem2",
        }
    }

    /// Bound value for `model` at `(n, x)`, or `None` when the model lacks the
    /// certificate or the space is outside the bound's scope.
    pub fn evaluate(self, model: &MdsModel, n: u64, x: f64) -> crate::Result<Option<f64>> {
        let space = model.space();
        let certs = model.certificates();
        let r2 = space.r() == 2.0;
        let value = match self {
            Self::Theorem1 => match certs.exp {
                Some(c) if r2 => Some(theorem1_bound(n, x, space, &c)?.value),
                _ => None,
            },
            Self::OptTheorem1 => match certs.exp {
                Some(c) if r2 => Some(optimize_theorem1(n, x, space, &c, &Theorem1Grid::default())?.value),
                _ => None,
            },
            Self::Theorem2 => certs.poly.map(|c| theorem2_bound(n, x, space, &c)).transpose()?.map(|b| b.value),
            Self::GeneralQ => {
                certs.poly.map(|c| theorem2_general_q_bound(2.0 * c.p2, n, x, space, &c)).transpose()?.map(|b| b.value)
            }
            Self::OptTheorem2 => certs
                .poly
                .map(|c| optimize_theorem2_q(n, x, space, &c, default_q_bracket(&c)))
                .transpose()?
                .map(|o| o.value),
            Self::Corollary => match certs.corollary {
                Some(c) if model.independent() => Some(corollary_bound(n, x, space, c.p, c.c, c.sup_moment)?.value),
                _ => None,
            },
            Self::Lv => match certs.moment {
                Some(m) if space.dim() == 1 && m.p >= 2.0 => Some(lesigne_volny_bound(n, x, m.p, m.m)?.value),
                _ => None,
            },
        };
        Ok(value)
    }
}

/// Search bracket for `q` used when none is given.
pub fn default_q_bracket(cert: &PolyCertificate) -> (f64, f64) {
    (cert.p2 * 1.001, cert.p2 * 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

/// A verification campaign: every model on the `n × x` grid against every
/// selected bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    pub models: Vec<MdsModel>,
    pub n: Vec<u64>,
    pub x: Vec<f64>,
    pub paths: u64,
    pub seed: u64,
    pub bounds: Vec<BoundSelector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl Campaign {
    pub fn from_json(text: &str) -> crate::Result<Self> {
        let c: Campaign = serde_json::from_str(text).map_err(|e| Error::Campaign(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> crate::Result<()> {
        let fail = |m: &str| Err(Error::Campaign(m.to_string()));
        if self.models.is_empty() {
            return fail("no models");
        }
        if self.n.is_empty() || self.x.is_empty() {
            return fail("empty n or x grid");
        }
        if self.n.contains(&0) {
            return fail("n values must be >= 1");
        }
        if self.x.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return fail("x values must be finite and > 0");
        }
        if self.paths == 0 {
            return fail("paths must be >= 1");
        }
        if self.bounds.is_empty() {
            return fail("no bounds selected");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub model: String,
    pub n: u64,
    pub x: f64,
    pub paths: u64,
    pub seed: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound_name: String,
    pub bound_value: Option<f64>,
    pub trivial: Option<bool>,
    /// `"true"`, `"false"` or `"skipped"`.
    pub dominates: String,
}

impl VerifyRow {
    pub fn failed(&self) -> bool {
        self.dominates == "false"
    }
}

/// Runs a campaign; rows are ordered by model, then `n`, then `x`, then bound.
pub fn run_campaign(c: &Campaign) -> crate::Result<Vec<VerifyRow>> {
    c.validate()?;
    let mut rows = Vec::new();
    for model in &c.models {
        let label = model.label();
        for est in mc_deviation_grid(model, &c.n, &c.x, c.paths, c.seed)? {
            for &sel in &c.bounds {
                let value = sel.evaluate(model, est.n, est.x)?;
                if let Some(v) = value {
                    if !v.is_finite() {
                        return Err(Error::Campaign(format!("{} is not finite for {label} at n = {}, x = {}", sel.name(), est.n, est.x)));
                    }
                }
                rows.push(VerifyRow {
                    model: label.clone(),
                    n: est.n,
                    x: est.x,
                    paths: est.paths,
                    seed: est.seed,
                    p_hat: est.p_hat,
                    ci_low: est.ci_low,
                    ci_high: est.ci_high,
                    bound_name: sel.name().to_string(),
                    bound_value: value,
                    trivial: value.map(|v| v >= 1.0),
                    dominates: match value {
                        Some(v) => (est.ci_low <= v).to_string(),
                        None => "skipped".to_string(),
                    },
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_rows_csv<W: Write>(rows: &[VerifyRow], out: W) -> crate::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let io = |e: csv::Error| Error::Campaign(format!("writing CSV: {e}"));
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Campaign(format!("writing CSV: {e}")))
}

#[derive(Parser, Debug)]
#[command(name = "mdev", about = "Deviation bounds for Banach-space martingales: evaluate, simulate, verify, optimize")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one closed-form bound.
    Bound(BoundArgs),
    /// Run a verification campaign and write CSV rows.
    Verify(VerifyArgs),
    /// Exact deviation probability for independent signs.
    Exact(ExactArgs),
    /// Monte Carlo estimate of the deviation probability.
    Simulate(SimulateArgs),
    /// Fit a decay rate to deviation probabilities over an n grid.
    Rate(RateArgs),
    /// Optimise the free parameters of a truncation bound.
    Optimize(OptimizeArgs),
}

#[derive(Args, Debug, Clone)]
#[command(group(ArgGroup::new("which").required(true).multiple(false).args(
    ["theorem1", "theorem2", "corollary", "lv", "fan", "pinelis", "pretrunc", "general_q"])))]
pub struct BoundArgs {
    #[arg(long)]
    pub theorem1: bool,
    #[arg(long)]
    pub theorem2: bool,
    #[arg(long)]
    pub corollary: bool,
    #[arg(long)]
    pub lv: bool,
    #[arg(long)]
    pub fan: bool,
    #[arg(long)]
    pub pinelis: bool,
    #[arg(long)]
    pub pretrunc: bool,
    #[arg(long = "general-q")]
    pub general_q: bool,
    #[arg(long)]
    pub n: Option<u64>,
    /// Per-step threshold; the event is `max ‖S_k‖ > n·x`.
    #[arg(long)]
    pub x: Option<f64>,
    /// Absolute threshold for `--pinelis`.
    #[arg(long = "x-abs")]
    pub x_abs: Option<f64>,
    /// Absolute threshold for `--pretrunc` (defaults to `n·x`).
    #[arg(long = "total-x")]
    pub total_x: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "D")]
    pub d: Option<f64>,
    #[arg(long = "C1")]
    pub c1: Option<f64>,
    #[arg(long = "C2")]
    pub c2: Option<f64>,
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// `sup_i (E‖X_i‖^r)^{p/r}` for `--corollary`.
    #[arg(long = "sup-moment")]
    pub sup_moment: Option<f64>,
    #[arg(long = "M")]
    pub m: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub u: Option<f64>,
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> CmdResult<T> {
    v.ok_or_else(|| Failure::usage(format!("missing required flag --{flag}")))
}

pub fn cmd_bound(a: &BoundArgs) -> CmdResult<BoundResult> {
    let exp_cert = || -> CmdResult<ExpCertificate> { Ok(ExpCertificate::new(need(a.alpha, "alpha")?, need(a.c1, "C1")?)?) };
    let poly_cert = || -> CmdResult<PolyCertificate> {
        Ok(PolyCertificate::new(need(a.p1, "p1")?, need(a.p2, "p2")?, need(a.c1, "C1")?, need(a.c2, "C2")?))
    };
    let result = if a.theorem1 {
        theorem1_bound_d(need(a.n, "n")?, need(a.x, "x")?, need(a.d, "D")?, &exp_cert()?)?
    } else if a.theorem2 {
        theorem2_bound_d(need(a.n, "n")?, need(a.x, "x")?, need(a.r, "r")?, need(a.d, "D")?, &poly_cert()?)?
    } else if a.general_q {
        let r = need(a.r, "r")?;
        theorem2_general_q_bound_d(need(a.q, "q")?, need(a.n, "n")?, need(a.x, "x")?, r, need(a.d, "D")?, &poly_cert()?)?
    } else if a.corollary {
        corollary_bound_d(
            need(a.n, "n")?,
            need(a.x, "x")?,
            need(a.r, "r")?,
            need(a.d, "D")?,
            need(a.p, "p")?,
            need(a.c, "C")?,
            need(a.sup_moment, "sup-moment")?,
        )?
    } else if a.lv {
        lesigne_volny_bound(need(a.n, "n")?, need(a.x, "x")?, need(a.p, "p")?, need(a.m, "M")?)?
    } else if a.fan {
        fan_real_bound(need(a.n, "n")?, need(a.x, "x")?, need(a.alpha, "alpha")?, need(a.c1, "C1")?)?
    } else if a.pinelis {
        let (x_abs, b, d) = (need(a.x_abs, "x-abs")?, need(a.b, "b")?, need(a.d, "D")?);
        BoundResult::new(pinelis_hoeffding(need(a.n, "n")?, x_abs, b, d)?, [("b", b), ("D", d)])
    } else if a.pretrunc {
        let n = need(a.n, "n")?;
        let total_x = match (a.total_x, a.x) {
            (Some(t), None) => t,
            (None, Some(x)) => n as f64 * x,
            (Some(_), Some(_)) => return Err(Failure::usage("give either --total-x or --x, not both")),
            (None, None) => return Err(Failure::usage("missing required flag --total-x (or --x)")),
        };
        pretrunc_bound_d(total_x, n, need(a.t, "t")?, need(a.u, "u")?, need(a.d, "D")?, &exp_cert()?)?
    } else {
        return Err(Failure::usage("select one bound"));
    };
    if !result.value.is_finite() {
        return Err(Failure::numeric(format!("bound value is not finite: {}", result.value)));
    }
    Ok(result)
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Campaign JSON file.
    pub campaign: PathBuf,
    /// CSV destination; overrides the campaign's output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ExactArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOutput {
    pub p: String,
    pub hits: u64,
    pub total: u64,
    pub value: f64,
    pub n: u32,
    pub x: f64,
}

pub fn cmd_exact(a: &ExactArgs) -> CmdResult<ExactOutput> {
    let e = exact_deviation_prob_rademacher(a.n, a.x)?;
    Ok(ExactOutput { p: e.fraction(), hits: e.hits, total: e.total, value: e.value(), n: a.n, x: a.x })
}

/// Model selection shared by `simulate` and `rate`.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Model kind (rademacher_real, rademacher_coords, pareto_radial,
    /// weibull_radial, product_y0, conditional_scale) or a model JSON object.
    #[arg(long)]
    pub model: String,
    /// Space kind: real, euclidean, ell_q or ell_r.
    #[arg(long, default_value = "real")]
    pub space: String,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Exponent of the ℓ^q norm.
    #[arg(long = "space-q")]
    pub space_q: Option<f64>,
    /// Exponent of the ℓ^r norm.
    #[arg(long = "space-r")]
    pub space_r: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
}

impl ModelArgs {
    pub fn build(&self) -> CmdResult<MdsModel> {
        let parse = |v: serde_json::Value| -> CmdResult<MdsModel> {
            serde_json::from_value(v).map_err(|e| Failure::usage(format!("invalid model: {e}")))
        };
        if self.model.trim_start().starts_with('{') {
            let v = serde_json::from_str(&self.model).map_err(|e| Failure::usage(format!("invalid model JSON: {e}")))?;
            return parse(v);
        }
        let mut space = serde_json::json!({ "kind": self.space });
        if let Some(d) = self.dim {
            space["d"] = d.into();
        }
        if let Some(q) = self.space_q {
            space["q"] = q.into();
        }
        if let Some(r) = self.space_r {
            space["r"] = r.into();
        }
        let mut m = serde_json::json!({ "kind": self.model });
        match self.model.as_str() {
            "rademacher_real" | "product_y0" => {}
            _ => m["space"] = space,
        }
        let scale = if self.model == "pareto_radial" { Some(self.scale.unwrap_or(1.0)) } else { self.scale };
        for (key, v) in [("p", self.p), ("scale", scale), ("alpha", self.alpha), ("p1", self.p1), ("p2", self.p2)] {
            if let Some(v) = v {
                m[key] = v.into();
            }
        }
        parse(m)
    }
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub paths: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub model: MdsModel,
    pub label: String,
    #[serde(flatten)]
    pub estimate: McEstimate,
}

pub fn cmd_simulate(a: &SimulateArgs) -> CmdResult<SimulateOutput> {
    let model = a.model.build()?;
    let estimate = mc_deviation_prob(&model, a.n, a.x, a.paths, a.seed)?;
    Ok(SimulateOutput { label: model.label(), model, estimate })
}

#[derive(Args, Debug, Clone)]
pub struct RateArgs {
    /// CSV with `n` and `p_hat` columns (a verification CSV works when it
    /// holds a single model and x).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// log_log, or log_linear together with --rate-alpha.
    #[arg(long, default_value = "log_log")]
    pub family: String,
    #[arg(long = "rate-alpha")]
    pub rate_alpha: Option<f64>,
    /// Simulate a model instead of reading --input.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, default_value = "real")]
    pub space: String,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long = "space-q")]
    pub space_q: Option<f64>,
    #[arg(long = "space-r")]
    pub space_r: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    /// Comma-separated n grid for simulation.
    #[arg(long, value_delimiter = ',')]
    pub ns: Vec<u64>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub paths: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateOutput {
    pub family: RateFamily,
    pub points: Vec<(f64, f64)>,
    #[serde(flatten)]
    pub fit: RateFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<serde_json::Value>,
}

#[derive(Deserialize)]
struct RatePoint {
    n: f64,
    p_hat: f64,
    #[serde(default)]
    model: Option<String>,
    #[serde(default)]
    x: Option<f64>,
}

/// Reads `(n, p_hat)` pairs, collapsing repeated rows of one grid cell.
pub fn read_rate_points(path: &Path) -> CmdResult<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let mut series: Option<(Option<String>, Option<u64>)> = None;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for row in reader.deserialize::<RatePoint>() {
        let row = row.map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let key = (row.model.clone(), row.x.map(f64::to_bits));
        match &series {
            None => series = Some(key),
            Some(k) if *k != key => return Err(Failure::usage("input mixes several models or x values")),
            _ => {}
        }
        match points.iter().find(|(n, _)| *n == row.n) {
            Some(&(_, p)) if p != row.p_hat => {
                return Err(Failure::usage(format!("conflicting p_hat values for n = {}", row.n)))
            }
            Some(_) => {}
            None => points.push((row.n, row.p_hat)),
        }
    }
    Ok(points)
}

pub fn cmd_rate(a: &RateArgs) -> CmdResult<RateOutput> {
    let family = match a.family.as_str() {
        "log_log" => RateFamily::LogLog,
        "log_linear" => RateFamily::LogLinear { alpha: need(a.rate_alpha, "rate-alpha")? },
        other => return Err(Failure::usage(format!("unknown family '{other}'"))),
    };
    let (points, input) = match (&a.input, &a.model) {
        (Some(path), None) => (read_rate_points(path)?, None),
        (None, Some(kind)) => {
            let margs = ModelArgs {
                model: kind.clone(),
                space: a.space.clone(),
                dim: a.dim,
                space_q: a.space_q,
                space_r: a.space_r,
                p: a.p,
                scale: a.scale,
                alpha: a.alpha,
                p1: a.p1,
                p2: a.p2,
            };
            let model = margs.build()?;
            if a.ns.is_empty() {
                return Err(Failure::usage("missing required flag --ns"));
            }
            let (x, paths, seed) = (need(a.x, "x")?, need(a.paths, "paths")?, need(a.seed, "seed")?);
            let est = mc_deviation_grid(&model, &a.ns, &[x], paths, seed)?;
            let echo = serde_json::json!({ "model": model, "ns": a.ns, "x": x, "paths": paths, "seed": seed, "estimates": est });
            (est.iter().map(|e| (e.n as f64, e.p_hat)).collect(), Some(echo))
        }
        _ => return Err(Failure::usage("give exactly one of --input or --model")),
    };
    let fit = rate_fit(&points, family)?;
    Ok(RateOutput { family, points, fit, input })
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(group(ArgGroup::new("which").required(true).multiple(false).args(["theorem1", "theorem2"])))]
pub struct OptimizeArgs {
    #[arg(long)]
    pub theorem1: bool,
    #[arg(long)]
    pub theorem2: bool,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub x: f64,
    #[arg(long = "D")]
    pub d: f64,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "C1")]
    pub c1: Option<f64>,
    #[arg(long = "C2")]
    pub c2: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Grid points per axis for the (t, u) search; 1 keeps the default point.
    #[arg(long, default_value_t = Theorem1Grid::default().resolution)]
    pub resolution: usize,
    #[arg(long = "u-max")]
    pub u_max: Option<f64>,
    #[arg(long = "q-lo")]
    pub q_lo: Option<f64>,
    #[arg(long = "q-hi")]
    pub q_hi: Option<f64>,
    /// Include the sequence of incumbents.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeOutput {
    pub input: OptimizeArgs,
    #[serde(flatten)]
    pub result: OptResult,
}

pub fn cmd_optimize(a: &OptimizeArgs) -> CmdResult<OptimizeOutput> {
    let result = if a.theorem1 {
        let cert = ExpCertificate::new(need(a.alpha, "alpha")?, need(a.c1, "C1")?)?;
        optimize_theorem1_d(a.n, a.x, a.d, &cert, &Theorem1Grid { resolution: a.resolution, u_max: a.u_max })?
    } else {
        let cert = PolyCertificate::new(need(a.p1, "p1")?, need(a.p2, "p2")?, need(a.c1, "C1")?, need(a.c2, "C2")?);
        let (lo, hi) = default_q_bracket(&cert);
        optimize_theorem2_q_d(a.n, a.x, need(a.r, "r")?, a.d, &cert, (a.q_lo.unwrap_or(lo), a.q_hi.unwrap_or(hi)))?
    };
    let result = if a.trace { result } else { result.without_trace() };
    Ok(OptimizeOutput { input: a.clone(), result })
}

/// Runs `verify`, writing CSV (or JSON) to the chosen destination.
/// Returns the exit code.
pub fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write) -> CmdResult<i32> {
    let text = fs::read_to_string(&a.campaign).map_err(|e| Failure::usage(format!("{}: {e}", a.campaign.display())))?;
    let campaign = Campaign::from_json(&text)?;
    let rows = run_campaign(&campaign)?;
    let (dest, format) = match (&a.out, &campaign.output) {
        (Some(p), _) => (Some(p.clone()), OutputFormat::Csv),
        (None, Some(o)) => (Some(o.path.clone()), o.format),
        (None, None) => (None, OutputFormat::Csv),
    };
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => write_rows_csv(&rows, &mut buf)?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut buf, &rows).map_err(|e| Failure::numeric(e.to_string()))?;
            buf.push(b'\n');
        }
    }
    match dest {
        Some(p) => fs::write(&p, &buf).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
        None => stdout.write_all(&buf).map_err(|e| Failure::usage(e.to_string()))?,
    }
    Ok(if rows.iter().any(VerifyRow::failed) { 1 } else { 0 })
}

fn print_json<T: Serialize>(value: &T, out: &mut dyn Write) -> CmdResult<i32> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::numeric(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| Failure::usage(e.to_string()))?;
    Ok(0)
}

fn thread_pool() -> CmdResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Failure::usage(format!("thread pool: {e}")))
}

pub fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> CmdResult<i32> {
    let pool = thread_pool()?;
    let mut buf: Vec<u8> = Vec::new();
    let code = pool.install(|| {
        let out: &mut dyn Write = &mut buf;
        match &cli.command {
            Command::Bound(a) => print_json(&cmd_bound(a)?, out),
            Command::Verify(a) => cmd_verify(a, out),
            Command::Exact(a) => print_json(&cmd_exact(a)?, out),
            Command::Simulate(a) => print_json(&cmd_simulate(a)?, out),
            Command::Rate(a) => print_json(&cmd_rate(a)?, out),
            Command::Optimize(a) => print_json(&cmd_optimize(a)?, out),
        }
    })?;
    stdout.write_all(&buf).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(code)
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
                let _ = writeln!(stderr, "{first}");
            }
            return code;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["mdev"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn json(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn bound_examples() {
        let (code, out, _) = run_args(&["bound", "--theorem1", "--alpha", "0.5", "--x", "4", "--D", "1", "--C1", "0", "--n", "1"]);
        assert_eq!(code, 0);
        let v = json(&out)["value"].as_f64().unwrap();
        assert!((v - 2.0 * (-1f64).exp()).abs() < 1e-15);

        let (code, out, _) = run_args(&["bound", "--pinelis", "--n", "1", "--x-abs", "1", "--b", "1", "--D", "1"]);
        assert_eq!(code, 0);
        assert!((json(&out)["value"].as_f64().unwrap() - 0.606_530_659_712_633_4).abs() < 1e-15);

        let args = ["bound", "--theorem2", "--p1", "3", "--p2", "3", "--r", "2", "--D", "1", "--C1", "0", "--C2", "0", "--n", "5", "--x", "1"];
        let (code, out, _) = run_args(&args);
        assert_eq!(code, 0);
        let v = json(&out);
        assert_eq!(v["value"].as_f64().unwrap(), 0.0);
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["constants", "trivial", "value"]);
    }

    #[test]
    fn bound_usage_errors() {
        let (code, _, err) = run_args(&["bound", "--theorem1", "--alpha", "0.5", "--x", "4", "--D", "1", "--n", "1"]);
        assert_eq!(code, 2);
        assert!(err.contains("--C1") && err.lines().count() == 1, "{err}");
        let (code, _, err) = run_args(&["bound", "--theorem1", "--lv", "--n", "1"]);
        assert_eq!(code, 2);
        assert_eq!(err.lines().count(), 1);
        let (code, _, _) = run_args(&["bound", "--n", "1"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn exact_output() {
        let (code, out, _) = run_args(&["exact", "--n", "4", "--x", "0.6"]);
        assert_eq!(code, 0);
        let v = json(&out);
        assert_eq!(v["p"], "1/4");
        assert_eq!(v["hits"], 4);
        assert_eq!(v["total"], 16);
    }

    #[test]
    fn simulate_output() {
        let (code, out, _) = run_args(&["simulate", "--model", "rademacher_real", "--n", "4", "--x", "0.6", "--paths", "100000", "--seed", "7"]);
        assert_eq!(code, 0);
        let v = json(&out);
        assert!(v["ci_low"].as_f64().unwrap() <= 0.25 && 0.25 <= v["ci_high"].as_f64().unwrap());
        assert_eq!(v["seed"], 7);
        let (code, _, _) = run_args(&["simulate", "--model", "rademacher_real", "--n", "4", "--x", "0.6", "--paths", "10"]);
        assert_eq!(code, 2);
        let args = ["simulate", "--model", "pareto_radial", "--space", "ell_q", "--dim", "3", "--space-q", "4", "--p", "3", "--n", "8", "--x", "1", "--paths", "100", "--seed", "1"];
        assert_eq!(run_args(&args).0, 0);
    }

    #[test]
    fn rate_from_planted_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("planted.csv");
        let mut text = String::from("n,p_hat\n");
        for n in [8.0f64, 16.0, 32.0, 64.0] {
            text.push_str(&format!("{n},{}\n", n.powi(-3)));
        }
        fs::write(&path, text).unwrap();
        let (code, out, err) = run_args(&["rate", "--input", path.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        assert!((json(&out)["slope"].as_f64().unwrap() + 3.0).abs() < 1e-9);
    }

    #[test]
    fn optimize_output() {
        let (code, out, _) = run_args(&["optimize", "--theorem1", "--n", "100", "--x", "1", "--D", "1", "--alpha", "0.5", "--C1", "1"]);
        assert_eq!(code, 0);
        let v = json(&out);
        assert!(v["value"].as_f64().unwrap() < v["paper_value"].as_f64().unwrap());
        assert!(v.get("trace").is_none());
        let (_, out, _) = run_args(&["optimize", "--theorem1", "--n", "100", "--x", "1", "--D", "1", "--alpha", "0.5", "--C1", "1", "--trace"]);
        assert!(json(&out)["trace"].as_array().unwrap().len() >= 2);
        let args = ["optimize", "--theorem2", "--n", "100", "--x", "1", "--D", "1", "--p1", "3", "--p2", "3", "--r", "2", "--C1", "1", "--C2", "1", "--q-lo", "3.1", "--q-hi", "20"];
        assert_eq!(run_args(&args).0, 0);
    }

    fn campaign_file(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("campaign.json");
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn verify_rademacher_campaign() {
        let dir = tempfile::tempdir().unwrap();
        let c = campaign_file(
            dir.path(),
            r#"{"models":[{"kind":"rademacher_real"}],"n":[4,8],"x":[0.5],"paths":20000,"seed":3,"bounds":["theorem1","lv"]}"#,
        );
        let (code, out, err) = run_args(&["verify", c.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        let mut lines = out.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.count(), 4);
    }

    #[test]
    fn verify_skips_inapplicable_bounds() {
        let dir = tempfile::tempdir().unwrap();
        let c = campaign_file(
            dir.path(),
            r#"{"models":[{"kind":"pareto_radial","space":{"kind":"euclidean","d":2},"p":4,"scale":1}],
                "n":[8],"x":[1.0],"paths":1000,"seed":3,"bounds":["theorem1","theorem2"]}"#,
        );
        let out_path = dir.path().join("rows.csv");
        let (code, _, err) = run_args(&["verify", c.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        let text = fs::read_to_string(out_path).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert!(rows[0].ends_with("theorem1,,,skipped"), "{}", rows[0]);
        assert!(rows[1].contains(",theorem2,") && rows[1].ends_with(",true"));
    }

    #[test]
    fn verify_rejects_empty_grid_and_bad_json() {
        let dir = tempfile::tempdir().unwrap();
        let c = campaign_file(dir.path(), r#"{"models":[{"kind":"rademacher_real"}],"n":[],"x":[0.5],"paths":10,"seed":3,"bounds":["theorem1"]}"#);
        assert_eq!(run_args(&["verify", c.to_str().unwrap()]).0, 2);
        let c = campaign_file(dir.path(), "{not json");
        assert_eq!(run_args(&["verify", c.to_str().unwrap()]).0, 2);
    }

    #[test]
    fn falsification_exits_one() {
        let row = VerifyRow {
            model: "m".into(),
            n: 1,
            x: 1.0,
            paths: 1,
            seed: 0,
            p_hat: 1.0,
            ci_low: 0.5,
            ci_high: 1.0,
            bound_name: "b".into(),
            bound_value: Some(0.1),
            trivial: Some(false),
            dominates: "false".into(),
        };
        assert!(row.failed());
    }
}
