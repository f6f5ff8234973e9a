mod common;

use common::oracle::Hp;
use common::rel_err;

#[test]
fn oracle_matches_fifty_digit_references() {
    let mut hp = Hp::new();
    assert!(rel_err(hp.beta(0.5), 1.224_744_871_391_589) < 1e-15);
    assert!(rel_err(hp.beta(0.75), 0.890_898_718_140_339_3) < 1e-15);
    assert!(rel_err(hp.theorem1_constant(0.5, 4.0, 1.0, 1.0), 1_162_803.903_808_530_9) < 1e-15);
    assert!(rel_err(hp.theorem1_bound(400, 4.0, 1.0, 0.5, 1.0), 2.396_717_478_520_649_9e-3) < 1e-15);
    assert!(rel_err(hp.pinelis(1, 1.0, 1.0, 1.0), 0.606_530_659_712_633_4) < 1e-15);
}
