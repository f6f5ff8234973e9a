use serde::{Deserialize, Serialize};

use crate::error::{nonneg, Result};
use crate::spaces::Point;

use super::model::MdsModel;

/// `Xᵢ = X′ᵢ + X″ᵢ` with `X′ᵢ` the centered part of `Xᵢ·1{‖Xᵢ‖ ≤ u}` and
/// `X″ᵢ` the centered part of `Xᵢ·1{‖Xᵢ‖ > u}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub bounded: Vec<Point>,
    pub tail: Vec<Point>,
}

/// Splits a path at level `u`.
///
/// Every bundled model is conditionally symmetric given the past, so both
/// centering terms vanish and the split is the plain indicator split.
pub fn truncate_decompose(model: &MdsModel, path: &[Point], u: f64) -> Result<Truncation> {
    nonneg("u", u)?;
    let space = model.space();
    let mut bounded = Vec::with_capacity(path.len());
    let mut tail = Vec::with_capacity(path.len());
    for x in path {
        let norm = space.norm(x)?;
        let zero = Point::zeros(x.dim());
        if norm <= u {
            bounded.push(x.clone());
            tail.push(zero);
        } else {
            bounded.push(zero);
            tail.push(x.clone());
        }
    }
    Ok(Truncation { bounded, tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::sample_path;
    use crate::spaces::SpaceSpec;

    fn reconstructs(path: &[Point], t: &Truncation) -> bool {
        path.iter().zip(&t.bounded).zip(&t.tail).all(|((x, a), b)| {
            x.coords().iter().zip(a.coords()).zip(b.coords()).all(|((x, a), b)| a + b == *x)
        })
    }

    #[test]
    fn examples() {
        let m = MdsModel::rademacher_real();
        let path = sample_path(&m, 10, 3).unwrap();
        let t = truncate_decompose(&m, &path, 0.5).unwrap();
        assert!(t.bounded.iter().all(Point::is_zero));
        assert_eq!(t.tail, path);
        let t = truncate_decompose(&m, &path, 1.0).unwrap();
        assert_eq!(t.bounded, path);
        assert!(t.tail.iter().all(Point::is_zero));

        let p = MdsModel::pareto_radial(SpaceSpec::euclidean(2).unwrap(), 3.0, 1.0).unwrap();
        let path = sample_path(&p, 50, 3).unwrap();
        let t = truncate_decompose(&p, &path, 0.0).unwrap();
        assert_eq!(t.tail, path);
        assert!(truncate_decompose(&p, &path, -1.0).is_err());
    }

    #[test]
    fn reconstruction_and_level() {
        let space = SpaceSpec::ell_q(3, 4.0).unwrap();
        let m = MdsModel::weibull_radial(space, 0.5).unwrap();
        for seed in 0..50 {
            let path = sample_path(&m, 20, seed).unwrap();
            let u = 0.8;
            let t = truncate_decompose(&m, &path, u).unwrap();
            assert!(reconstructs(&path, &t));
            assert!(t.bounded.iter().all(|p| space.norm(p).unwrap() <= 2.0 * u));
        }
    }

    #[test]
    fn bounded_part_is_centered() {
        let m = MdsModel::product_y0(0.5).unwrap();
        let u = 1.0;
        let paths = 100_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for seed in 0..paths {
            let path = sample_path(&m, 1, seed).unwrap();
            let v = truncate_decompose(&m, &path, u).unwrap().bounded[0].coords()[0];
            sum += v;
            sq += v * v;
        }
        let mean = sum / paths as f64;
        let se = ((sq / paths as f64 - mean * mean) / paths as f64).sqrt();
        assert!(mean.abs() <= 3.0 * se, "mean {mean} se {se}");
    }
}
