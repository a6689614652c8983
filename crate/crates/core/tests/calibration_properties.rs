use proptest::prelude::*;
use tpmdp_core::calibration::DEFAULT_REL_TOL;
use tpmdp_core::{
    privacy_profile, sigma_gamma, standard_normal_cdf, CalibrationTriple, PrivacyBudget,
};

fn triple(eps: f64, delta: f64, sens: f64) -> CalibrationTriple {
    CalibrationTriple::new(PrivacyBudget::new(eps, delta).unwrap(), sens).unwrap()
}

fn sigma(eps: f64, delta: f64, sens: f64) -> f64 {
    sigma_gamma(&triple(eps, delta, sens), DEFAULT_REL_TOL)
        .unwrap()
        .sigma
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn profile_is_tight_at_the_calibrated_sigma(
        eps in 0.0f64..3.0,
        log_delta in -10.0f64..-0.5,
        sens in 0.1f64..10.0,
    ) {
        let delta = 10f64.powf(log_delta);
        let t = triple(eps, delta, sens);
        let s = sigma_gamma(&t, DEFAULT_REL_TOL).unwrap();
        let p = privacy_profile(s.sigma, &t).unwrap();
        prop_assert!(p <= delta);
        prop_assert!(p >= delta * (1.0 - 1e-6));
        prop_assert!(privacy_profile(s.sigma * (1.0 - 1e-9), &t).unwrap() > delta);
    }

    #[test]
    fn sigma_decreases_in_epsilon_and_delta(
        eps in 0.01f64..2.0,
        bump in 0.01f64..1.0,
        log_delta in -9.0f64..-1.0,
    ) {
        let delta = 10f64.powf(log_delta);
        prop_assert!(sigma(eps + bump, delta, 1.0) < sigma(eps, delta, 1.0));
        prop_assert!(sigma(eps, delta * 2.0, 1.0) < sigma(eps, delta, 1.0));
    }

    #[test]
    fn sigma_is_linear_in_sensitivity(
        eps in 0.01f64..2.0,
        log_delta in -9.0f64..-1.0,
        k in -6i32..6,
    ) {
        let delta = 10f64.powf(log_delta);
        let scale = 2f64.powi(k);
        prop_assert_eq!(sigma(eps, delta, scale), scale * sigma(eps, delta, 1.0));
    }

    #[test]
    fn classical_bound_is_an_envelope(eps in 1e-3f64..=1.0, log_delta in -8.0f64..-2.0) {
        let delta = 10f64.powf(log_delta);
        let classical = (2.0 * (1.25 / delta).ln()).sqrt() / eps;
        prop_assert!(sigma(eps, delta, 1.0) <= classical);
    }

    #[test]
    fn profile_is_monotone_in_sigma(eps in 0.0f64..2.0, a in 0.05f64..50.0, b in 0.05f64..50.0) {
        let t = triple(eps, 0.5, 1.0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(privacy_profile(lo, &t).unwrap() >= privacy_profile(hi, &t).unwrap());
    }

    #[test]
    fn cdf_is_monotone(a in -40.0f64..40.0, b in -40.0f64..40.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(standard_normal_cdf(lo) <= standard_normal_cdf(hi));
    }
}
