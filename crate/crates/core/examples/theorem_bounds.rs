//! Closed-form bounds side by side for one `(n, x)`.

use mdev::bounds::*;

fn main() -> mdev::Result<()> {
    let (n, x) = (10_000, 1.0);
    let exp = ExpCertificate::new(0.5, std::f64::consts::E)?;
    let poly = PolyCertificate::new(4.0, 6.0, 1.0, 1.0);

    let t1 = theorem1_bound_d(n, x, 1.0, &exp)?;
    println!("theorem1   {:.4e} trivial={} C={:.4e}", t1.value, t1.trivial, t1.constant("C_alpha_x").unwrap());
    println!("fan        {:.4e}", fan_real_bound(n, x, 0.5, std::f64::consts::E)?.value);
    let t2 = theorem2_bound_d(n, x, 2.0, 1.0, &poly)?;
    println!("theorem2   {:.4e} (K1={:.3e}, K2={:.3e})", t2.value, t2.constant("K1").unwrap(), t2.constant("K2").unwrap());
    println!("general q  {:.4e} at q=2p2", theorem2_general_q_bound_d(12.0, n, x, 2.0, 1.0, &poly)?.value);
    println!("corollary  {:.4e}", corollary_bound_d(n, x, 2.0, 1.0, 4.0, 1.0, 1.0)?.value);
    println!("lv         {:.4e}", lesigne_volny_bound(n, x, 4.0, 1.0)?.value);
    println!("pinelis    {:.4e} for |S_n| > 400", pinelis_hoeffding(n, 400.0, 1.0, 1.0)?);
    println!("{}", serde_json::to_string_pretty(&t1).unwrap());
    Ok(())
}
