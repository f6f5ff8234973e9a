//! A small verification campaign: every model against every applicable bound.

use mdev::cli::{run_campaign, write_rows_csv, BoundSelector, Campaign};
use mdev::simulate::MdsModel;
use mdev::spaces::SpaceSpec;

fn main() -> mdev::Result<()> {
    let plane = SpaceSpec::euclidean(2)?;
    let campaign = Campaign {
        models: vec![
            MdsModel::rademacher_real(),
            MdsModel::pareto_radial(plane, 4.0, 1.0)?,
            MdsModel::weibull_radial(plane, 0.5)?,
            MdsModel::product_y0(0.5)?,
        ],
        n: vec![8, 64],
        x: vec![0.5, 1.0],
        paths: 20_000,
        seed: 1,
        bounds: vec![BoundSelector::Theorem1, BoundSelector::Theorem2, BoundSelector::Corollary, BoundSelector::Lv],
        output: None,
    };
    let rows = run_campaign(&campaign)?;
    write_rows_csv(&rows, std::io::stdout())?;
    let failed = rows.iter().filter(|r| r.failed()).count();
    eprintln!("{} rows, {failed} falsified", rows.len());
    Ok(())
}
