use weakval_core::selection_bias::{
    berkson_conditional_correlation, berkson_demo, pendulum_postselect, BerksonConfig, FourierTarget,
};

/// Upper 1% point of the chi-square distribution with 19 degrees of freedom.
const CHI2_19_P01: f64 = 36.191;

#[test]
fn default_chord_reconstructs_from_a_million_pendulums() {
    let target = FourierTarget::default_chord();
    let out = pendulum_postselect(1_000_000, &target, 2024).unwrap();
    assert!(out.reconstruction_error < 0.05, "{}", out.reconstruction_error);
    assert_eq!(out.representatives.len(), 3);
    for (i, r) in out.representatives.iter().enumerate() {
        assert!(target.matches(i, r));
    }
    let (a, f, p) = out.marginals.chi_square();
    for stat in [a, f, p] {
        assert!(stat < CHI2_19_P01, "chi-square {stat}");
    }
    assert_eq!(out.marginals.phase.iter().sum::<u64>(), 1_000_000);
}

#[test]
fn berkson_reference_rates() {
    let out = berkson_demo(100_000, BerksonConfig { rate_a: 0.2, rate_b: 0.2 }, 77).unwrap();
    assert!(out.r_unconditional.abs() < 0.05);
    assert!(out.r_conditional < -0.2);
    // admitted sample is ~36% of 1e5; the estimate sits close to the closed form
    assert!((out.r_conditional - berkson_conditional_correlation(0.2, 0.2)).abs() < 0.02);
}

#[test]
fn berkson_sign_over_rate_grid() {
    for a in [0.1, 0.2, 0.5] {
        for b in [0.1, 0.2, 0.5] {
            let out = berkson_demo(50_000, BerksonConfig { rate_a: a, rate_b: b }, 5).unwrap();
            assert!(out.r_conditional < 0.0, "rates {a}, {b}");
        }
    }
}
