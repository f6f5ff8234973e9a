//! Quadrature of the two lemma terms against their closed forms.

use mdev::bounds::{i1_i2_numeric, theorem2_bound_d, PolyCertificate};

fn main() -> mdev::Result<()> {
    let (r, d, x) = (2.0, 1.0, 1.0);
    let cert = PolyCertificate::new(3.0, 4.0, 1.0, 1.0);
    let chain = (cert.p2 / (cert.p2 - r)).powf(cert.p2 / r);
    for n in [10u64, 100, 1000] {
        let nf = n as f64;
        let max_tail = |t: f64| (nf * cert.c1 * t.powf(-cert.p1)).min(1.0);
        let cond_tail = |t: f64| (cert.c2 * chain * nf.powf(cert.p2 / r) * t.powf(-cert.p2)).min(1.0);
        let (i1, i2) = i1_i2_numeric(2.0 * cert.p2, nf * x, &max_tail, &cond_tail, r, d)?;
        let closed = theorem2_bound_d(n, x, r, d, &cert)?;
        println!(
            "n={n:>5} I1={i1:.4e} <= {:.4e}  I2={i2:.4e} <= {:.4e}",
            closed.constant("first_term").unwrap(),
            closed.constant("second_term").unwrap()
        );
    }
    Ok(())
}
