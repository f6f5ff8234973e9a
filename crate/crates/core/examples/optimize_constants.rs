//! Free parameters of the truncation bound and of the polynomial lemma.

use mdev::bounds::{ExpCertificate, PolyCertificate};
use mdev::optimize::{optimize_theorem1_d, optimize_theorem2_q_d, Theorem1Grid};

fn main() -> mdev::Result<()> {
    let exp = ExpCertificate::new(0.5, 1.0)?;
    for n in [100, 10_000, 1_000_000] {
        let o = optimize_theorem1_d(n, 1.0, 1.0, &exp, &Theorem1Grid::default())?;
        println!("n={n:>8} (t,u) search: {:.4e} vs {:.4e} at {:?}", o.value, o.paper_value, o.params);
    }
    let poly = PolyCertificate::new(4.0, 6.0, 1.0, 1.0);
    for n in [100, 10_000] {
        let o = optimize_theorem2_q_d(n, 1.0, 2.0, 1.0, &poly, (6.01, 60.0))?;
        println!("n={n:>8} q search: {:.4e} vs {:.4e} at q={:.3}", o.value, o.paper_value, o.params["q"]);
    }
    Ok(())
}
