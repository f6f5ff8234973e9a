//! N_p, weak-L^p norms and the sandwich between them.

use mdev::tails::{exp_tail_constant, n_p, sample_norms, sandwich_check, weak_lp_norm, TailFunction};

fn main() -> mdev::Result<()> {
    let pareto = TailFunction::pareto(3.0, 1.0)?;
    println!("pareto(3): N_3 = {}, weak norm = {}", n_p(&pareto, 3.0)?, weak_lp_norm(&pareto, 3.0)?);
    println!("pareto(3) at p = 4: N_4 = {}", n_p(&pareto, 4.0)?);

    let empirical = TailFunction::empirical(sample_norms(&pareto, 10_000, 3))?;
    for p in [2.5, 3.0, 4.0] {
        let s = sandwich_check(&empirical, p)?;
        println!("empirical p={p}: {:.4} <= {:.4} <= {:.4} ok={}", s.n_p_root, s.weak_norm, p / (p - 1.0) * s.n_p_root, s.ok);
    }

    for alpha in [0.3, 0.5] {
        println!(
            "alpha={alpha}: bounded(1) -> {:.6}, weibull_like -> {}",
            exp_tail_constant(&TailFunction::bounded(1.0)?, alpha)?,
            exp_tail_constant(&TailFunction::weibull_like(alpha)?, alpha)?
        );
    }
    Ok(())
}
