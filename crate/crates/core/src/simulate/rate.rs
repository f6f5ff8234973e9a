use serde::{Deserialize, Serialize};

use crate::error::{require, unit_open, Error, Result};

use super::engine::McEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RateFamily {
    /// `log p̂` against `n^α`.
    LogLinear { alpha: f64 },
    /// `log p̂` against `log n`.
    LogLog,
}

/// Least-squares fit of `log p̂` on the family's abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub used: usize,
    /// Grid values of `n` dropped because `p̂ = 0`.
    pub dropped: Vec<f64>,
}

pub fn rate_fit(points: &[(f64, f64)], family: RateFamily) -> Result<RateFit> {
    if let RateFamily::LogLinear { alpha } = family {
        unit_open("alpha", alpha)?;
    }
    for &(n, p) in points {
        require(n > 0.0 && (0.0..=1.0).contains(&p), || format!("invalid rate point (n = {n}, p_hat = {p})"))?;
    }
    let dropped: Vec<f64> = points.iter().filter(|(_, p)| *p == 0.0).map(|(n, _)| *n).collect();
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|&(n, p)| {
            let abscissa = match family {
                RateFamily::LogLinear { alpha } => n.powf(alpha),
                RateFamily::LogLog => n.ln(),
            };
            (abscissa, p.ln())
        })
        .collect();
    let k = xy.len();
    if k < 3 {
        return Err(Error::InsufficientData(format!("{k} usable grid points, need at least 3")));
    }
    let kf = k as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    require(sxx > 0.0, || "grid has a single distinct n".to_string())?;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let std_error = (ssr / (kf - 2.0) / sxx).sqrt();
    Ok(RateFit { slope, std_error, intercept, used: k, dropped })
}

pub fn rate_fit_estimates(estimates: &[McEstimate], family: RateFamily) -> Result<RateFit> {
    let points: Vec<(f64, f64)> = estimates.iter().map(|e| (e.n as f64, e.p_hat)).collect();
    rate_fit(&points, family)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_exponential() {
        let pts: Vec<_> = [4.0, 9.0, 16.0, 25.0f64].iter().map(|&n| (n, (-2.0 * n.sqrt()).exp())).collect();
        let fit = rate_fit(&pts, RateFamily::LogLinear { alpha: 0.5 }).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-9);
        assert!(fit.std_error < 1e-9);
    }

    #[test]
    fn planted_power() {
        let pts: Vec<_> = [8.0, 16.0, 32.0, 64.0f64].iter().map(|&n| (n, n.powi(-3))).collect();
        let fit = rate_fit(&pts, RateFamily::LogLog).unwrap();
        assert!((fit.slope + 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_hits_are_dropped() {
        let pts = [(2.0, 0.5), (4.0, 0.25), (8.0, 0.0), (16.0, 1.0 / 16.0)];
        let fit = rate_fit(&pts, RateFamily::LogLog).unwrap();
        assert_eq!(fit.dropped, vec![8.0]);
        assert_eq!(fit.used, 3);
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!(matches!(rate_fit(&pts[..3], RateFamily::LogLog), Err(Error::InsufficientData(_))));
    }
}
