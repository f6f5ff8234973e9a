//! Splitting a path into bounded and tail parts, and the second-moment check.

use mdev::simulate::{sample_path, truncate_decompose, MdsModel};
use mdev::tails::centered_second_moment_check;

fn main() -> mdev::Result<()> {
    let model = MdsModel::product_y0(0.5)?;
    let path = sample_path(&model, 6, 8)?;
    let split = truncate_decompose(&model, &path, 1.0)?;
    for ((x, a), b) in path.iter().zip(&split.bounded).zip(&split.tail) {
        println!("{:>9.5} = {:>9.5} + {:>9.5}", x.coords()[0], a.coords()[0], b.coords()[0]);
    }
    for u in [0.5, 1.0, 2.0] {
        let c = centered_second_moment_check(&model, u, 100_000, 3)?;
        println!("u={u}: lhs={:.5} rhs={:.5} ok={}", c.lhs, c.rhs, c.ok);
    }
    Ok(())
}
