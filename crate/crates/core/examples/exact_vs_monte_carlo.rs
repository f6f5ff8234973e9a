//! Sign-path enumeration against the Monte Carlo engine.

use mdev::simulate::{exact_deviation_prob_rademacher, mc_deviation_prob, MdsModel};

fn main() -> mdev::Result<()> {
    let model = MdsModel::rademacher_real();
    for (n, x) in [(4, 0.6), (10, 0.3), (16, 0.5), (20, 0.25)] {
        let exact = exact_deviation_prob_rademacher(n, x)?;
        let mc = mc_deviation_prob(&model, n as u64, x, 200_000, 11)?;
        println!(
            "n={n:>2} x={x:<4} exact={:<10} ({:.6}) mc={:.6} [{:.6}, {:.6}]",
            exact.fraction(),
            exact.value(),
            mc.p_hat,
            mc.ci_low,
            mc.ci_high
        );
    }
    Ok(())
}
