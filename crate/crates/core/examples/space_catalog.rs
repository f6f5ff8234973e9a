//! Norms, smoothness constants and the moment inequality for the bundled spaces.

use mdev::simulate::MdsModel;
use mdev::spaces::{empirical_eq7_ratio, smoothness_scan, Point, SpaceSpec};

fn main() -> mdev::Result<()> {
    let spaces = [
        SpaceSpec::real(),
        SpaceSpec::euclidean(3)?,
        SpaceSpec::ell_q(3, 4.0)?,
        SpaceSpec::ell_r(3, 1.5)?,
    ];
    let grid: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    for space in spaces {
        let v = Point::new(vec![1.0; space.dim()]);
        let model = MdsModel::rademacher_coords(space)?;
        let ratio = empirical_eq7_ratio(&space, &model, 16, 20_000, 1)?;
        println!(
            "{:<18} r={:.2} D={:.4} ‖(1,..,1)‖={:.4} scan={:.4} moment ratio={:.4}±{:.4}",
            space.label(),
            space.r(),
            space.d_const(),
            space.norm(&v)?,
            smoothness_scan(&space, &grid, 2000, 7)?,
            ratio.ratio,
            ratio.std_error
        );
    }
    println!("{}", serde_json::to_string(&SpaceSpec::ell_q(2, 4.0)?).unwrap());
    Ok(())
}
