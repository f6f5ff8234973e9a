//! Decay rate of the deviation probability for a heavy-tailed model.

use mdev::simulate::{mc_deviation_grid, rate_fit_estimates, MdsModel, RateFamily};
use mdev::spaces::SpaceSpec;

fn main() -> mdev::Result<()> {
    let model = MdsModel::pareto_radial(SpaceSpec::euclidean(2)?, 4.0, 1.0)?;
    let estimates = mc_deviation_grid(&model, &[8, 16, 32, 64], &[1.0], 1_000_000, 2)?;
    for e in &estimates {
        println!("n={:>3} p_hat={:.3e} hits={}", e.n, e.p_hat, e.hits);
    }
    let fit = rate_fit_estimates(&estimates, RateFamily::LogLog)?;
    println!("log-log slope {:.3} ± {:.3} (heavy-tail rate is -3)", fit.slope, fit.std_error);
    let weibull = MdsModel::weibull_radial(SpaceSpec::euclidean(2)?, 0.5)?;
    let estimates = mc_deviation_grid(&weibull, &[4, 8, 16, 32], &[0.5], 1_000_000, 2)?;
    let fit = rate_fit_estimates(&estimates, RateFamily::LogLinear { alpha: 0.5 })?;
    println!("weibull: log p against sqrt(n) slope {:.3} ± {:.3}", fit.slope, fit.std_error);
    Ok(())
}
