use mdev::simulate::{exact_deviation_prob_rademacher, mc_deviation_prob, sample_path, MdsModel};
use mdev::spaces::SpaceSpec;
use mdev::tails::{centered_second_moment_check, n_p, sample_norms, sandwich_check, TailFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn four_steps_at_point_six() {
    let e = mc_deviation_prob(&MdsModel::rademacher_real(), 4, 0.6, 1_000_000, 77).unwrap();
    assert!(e.ci_low <= 0.25 && 0.25 <= e.ci_high, "{e:?}");
    assert!((e.p_hat - 0.25).abs() < 0.002);
}

#[test]
fn monte_carlo_tracks_enumeration() {
    let model = MdsModel::rademacher_real();
    let paths = 100_000;
    for n in [4u32, 8, 12, 16] {
        for x in [0.3, 0.5, 0.7] {
            let exact = exact_deviation_prob_rademacher(n, x).unwrap().value();
            let e = mc_deviation_prob(&model, n as u64, x, paths, 1000 + n as u64).unwrap();
            let sd = (exact * (1.0 - exact) / paths as f64).sqrt();
            assert!((e.p_hat - exact).abs() <= 4.0 * sd + 1e-12, "n={n} x={x}: {} vs {exact}", e.p_hat);
        }
    }
}

#[test]
fn pareto_radius_has_unit_weak_moment() {
    let model = MdsModel::pareto_radial(SpaceSpec::euclidean(2).unwrap(), 3.0, 1.0).unwrap();
    let mut norms: Vec<f64> =
        sample_path(&model, 1_000_000, 5).unwrap().iter().map(|p| model.space().norm(p).unwrap()).collect();
    norms.sort_by(|a, b| b.total_cmp(a));
    let m = norms.len() as f64;
    // the extreme order statistics are left out: their contribution has a 1/c tail
    let bulk = norms.iter().enumerate().skip(10_000).map(|(i, v)| v.powi(3) * (i + 1) as f64 / m).fold(0.0, f64::max);
    assert!((0.9..=1.1).contains(&bulk), "{bulk}");
    let full = n_p(&TailFunction::empirical(norms).unwrap(), 3.0).unwrap();
    assert!(full >= bulk);
}

#[test]
fn raw_empirical_weak_moment_follows_reciprocal_law() {
    // for continuous tails, sup_t t^p·P̂(‖X‖ ≥ t) / N_p exceeds c with probability 1/c
    let tail = TailFunction::pareto(3.0, 1.0).unwrap();
    let reps = 2000;
    let sups: Vec<f64> = (0..reps)
        .map(|k| n_p(&TailFunction::empirical(sample_norms(&tail, 500, 900 + k)).unwrap(), 3.0).unwrap())
        .collect();
    for c in [1.5, 2.0, 4.0] {
        let freq = sups.iter().filter(|&&v| v > c).count() as f64 / reps as f64;
        let sd = (1.0 / c * (1.0 - 1.0 / c) / reps as f64).sqrt();
        assert!((freq - 1.0 / c).abs() < 4.0 * sd, "c={c}: {freq}");
    }
}

#[test]
fn empirical_pareto_sandwich() {
    let tail = TailFunction::empirical(sample_norms(&TailFunction::pareto(3.0, 1.0).unwrap(), 100_000, 8)).unwrap();
    assert!(sandwich_check(&tail, 3.0).unwrap().ok);
}

#[test]
fn product_model_conditional_exponential_moment_is_unbounded() {
    let model = MdsModel::product_y0(0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let values: Vec<f64> =
        (0..100_000).map(|_| model.conditional_exp_moment(&model.start_path(&mut rng), 1.0).unwrap()).collect();
    for k in [10.0, 100.0, 1e3, 1e4] {
        assert!(values.iter().any(|&v| v > k), "no path above {k}");
    }
    let plain = MdsModel::rademacher_real();
    let state = plain.start_path(&mut rng);
    assert_eq!(plain.conditional_exp_moment(&state, 1.0), Some(std::f64::consts::E));
}

#[test]
fn product_model_second_moment_after_truncation() {
    let check = centered_second_moment_check(&MdsModel::product_y0(0.5).unwrap(), 2.0, 100_000, 21).unwrap();
    assert!(check.ok, "{check:?}");
}

#[test]
fn rademacher_below_one_is_all_tail() {
    let check = centered_second_moment_check(&MdsModel::rademacher_real(), 0.5, 10_000, 1).unwrap();
    assert!((check.lhs - 1.0).abs() < 1e-12 && check.ok, "{check:?}");
}
