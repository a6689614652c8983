//! Gaussian mechanism calibration.
//!
//! A Gaussian mechanism with noise `N(0, sigma^2 I)` on a query of l2-sensitivity
//! `D` is `(epsilon, delta)`-DP exactly when
//!
//! ```text
//! Phi(D / (2 sigma) - epsilon sigma / D) - e^epsilon Phi(-D / (2 sigma) - epsilon sigma / D) <= delta
//! ```
//!
//! The left-hand side is [`privacy_profile`]; [`sigma_gamma`] finds the smallest
//! `sigma` satisfying the condition.

use libm::erfc;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on `sigma` used when callers have no reason to pick another.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

const MAX_BRACKET_STEPS: usize = 2_100;
const MAX_BISECTION_STEPS: usize = 10_000;

/// A per-party `(epsilon, delta)` guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidBudget(format!(
                "epsilon must be finite and >= 0, got {epsilon}"
            )));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidBudget(format!(
                "delta must lie in [0, 1], got {delta}"
            )));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Budget plus the l2-sensitivity of the query it protects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTriple {
    pub budget: PrivacyBudget,
    sensitivity: f64,
}

impl CalibrationTriple {
    pub fn new(budget: PrivacyBudget, sensitivity: f64) -> Result<Self> {
        if !(sensitivity.is_finite() && sensitivity > 0.0) {
            return Err(Error::InvalidSensitivity(sensitivity));
        }
        Ok(Self {
            budget,
            sensitivity,
        })
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedSigma {
    pub sigma: f64,
    /// Value of the privacy profile at `sigma`; never above the requested delta.
    pub achieved_delta: f64,
}

impl CalibratedSigma {
    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// CDF of the standard normal distribution.
///
/// Evaluated through `erfc` so that the lower tail keeps full relative precision.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Smallest delta achieved by Gaussian noise of standard deviation `sigma`.
pub fn privacy_profile(sigma: f64, triple: &CalibrationTriple) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidSigma(sigma));
    }
    Ok(unit_profile(
        sigma / triple.sensitivity,
        triple.budget.epsilon,
    ))
}

// The profile depends on sigma and the sensitivity only through their ratio.
fn unit_profile(scale: f64, epsilon: f64) -> f64 {
    let a = 0.5 / scale;
    let b = epsilon * scale;
    let upper = standard_normal_cdf(a - b);
    let lower = standard_normal_cdf(-a - b);
    let value = if lower == 0.0 {
        upper
    } else {
        upper - (epsilon + lower.ln()).exp()
    };
    value.clamp(0.0, 1.0)
}

/// Minimal noise standard deviation for `triple`.
///
/// Brackets the root by doubling or halving from `sigma = sensitivity`, then bisects
/// until the bracket is narrower than `rel_tol` relative to its upper end. The
/// returned sigma always satisfies the profile; `sigma * (1 - rel_tol)` does not.
pub fn sigma_gamma(triple: &CalibrationTriple, rel_tol: f64) -> Result<CalibratedSigma> {
    let delta = triple.budget.delta;
    let epsilon = triple.budget.epsilon;
    if delta == 0.0 {
        return Err(Error::ZeroDelta);
    }
    if delta >= 1.0 {
        return Ok(CalibratedSigma {
            sigma: 0.0,
            achieved_delta: 1.0,
        });
    }
    if !(rel_tol.is_finite() && rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }

    let meets = |scale: f64| unit_profile(scale, epsilon) <= delta;

    let (mut lo, mut hi) = if meets(1.0) {
        let mut lo = 0.5;
        let mut steps = 0;
        while meets(lo) {
            lo *= 0.5;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || lo == 0.0 {
                return Err(Error::NonConvergence { iterations: steps });
            }
        }
        (lo, 2.0 * lo)
    } else {
        let mut hi = 2.0;
        let mut steps = 0;
        while !meets(hi) {
            hi *= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
                return Err(Error::NonConvergence { iterations: steps });
            }
        }
        (0.5 * hi, hi)
    };

    // Bisect a little past rel_tol so the guarantee survives rounding.
    let target = 0.25 * rel_tol;
    let mut steps = 0;
    while hi - lo > target * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if meets(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
        if steps > MAX_BISECTION_STEPS {
            return Err(Error::NonConvergence { iterations: steps });
        }
    }

    // Rescaling by the sensitivity moves the ratio by an ulp or two, and the profile
    // carries cancellation noise near the root. Step up until every nearby ratio meets.
    let robust = |s: f64| {
        let (d1, u1) = (s.next_down(), s.next_up());
        [d1.next_down(), d1, s, u1, u1.next_up()]
            .into_iter()
            .all(meets)
    };
    let mut guard = 0;
    while !robust(hi) {
        hi *= 1.0 + f64::EPSILON * 1024.0;
        guard += 1;
        if guard > MAX_BISECTION_STEPS * 64 {
            return Err(Error::NonConvergence { iterations: guard });
        }
    }

    Ok(CalibratedSigma {
        sigma: hi * triple.sensitivity,
        achieved_delta: unit_profile(hi, epsilon),
    })
}

/// Queries with a built-in partial sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    /// Sum of one binary record per party.
    Count,
    /// Functional-mechanism linear regression over `dims` features.
    FunctionalLinReg { dims: usize },
}

impl QueryKind {
    /// Length of the vector the mechanism perturbs.
    pub fn output_dims(&self) -> usize {
        match *self {
            QueryKind::Count => 1,
            QueryKind::FunctionalLinReg { dims } => dims * (dims + 1) / 2 + dims,
        }
    }
}

/// Worst-case l2 change of the query output when a single party's input changes.
pub fn partial_sensitivity(query: QueryKind) -> Result<f64> {
    match query {
        QueryKind::Count => Ok(1.0),
        QueryKind::FunctionalLinReg { dims: 0 } => Err(Error::UnsupportedQuery(
            "linear regression needs at least one feature".into(),
        )),
        QueryKind::FunctionalLinReg { dims } => {
            let d = dims as f64;
            Ok((2.0 * d * d + 15.0 * d).sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(epsilon: f64, delta: f64, sensitivity: f64) -> CalibrationTriple {
        CalibrationTriple::new(PrivacyBudget::new(epsilon, delta).unwrap(), sensitivity).unwrap()
    }

    // Reference values below come from 50-digit mpmath evaluations.

    #[test]
    fn normal_cdf_reference_points() {
        assert_eq!(standard_normal_cdf(0.0), 0.5);
        assert_eq!(standard_normal_cdf(40.0), 1.0);
        assert_eq!(standard_normal_cdf(1e300), 1.0);
        // Lower tail keeps relative precision instead of cancelling to zero.
        let tail = standard_normal_cdf(-30.0);
        assert!((tail / 4.906_713_927_148_187e-198 - 1.0).abs() < 1e-12);
        assert!((standard_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
    }

    #[test]
    fn normal_cdf_symmetry() {
        for i in -200..=200 {
            let x = i as f64 * 0.05;
            let s = standard_normal_cdf(x) + standard_normal_cdf(-x);
            assert!((s - 1.0).abs() < 1e-14, "x = {x}: {s}");
        }
    }

    #[test]
    fn profile_reference_points() {
        let p = privacy_profile(1.0, &triple(0.0, 0.5, 1.0)).unwrap();
        assert!((p - 0.382_924_922_548_026_2).abs() < 1e-14);

        let p = privacy_profile(1e9, &triple(1.0, 0.5, 1.0)).unwrap();
        assert!(p < 1e-12);

        let p = privacy_profile(4.845, &triple(1.0, 1e-5, 1.0)).unwrap();
        assert!(p <= 1e-5);
        assert!((p - 4.109_351_761_624_036e-8).abs() < 1e-18);
    }

    #[test]
    fn profile_rejects_nonpositive_sigma() {
        let t = triple(1.0, 1e-5, 1.0);
        assert_eq!(privacy_profile(0.0, &t), Err(Error::InvalidSigma(0.0)));
        assert!(privacy_profile(-1.0, &t).is_err());
        assert!(privacy_profile(f64::NAN, &t).is_err());
    }

    #[test]
    fn sigma_gamma_matches_high_precision_root() {
        let cases = [
            (1.0, 1e-5, 3.730_631_634_815_942),
            (0.5, 1e-6, 8.057_618_480_725_044),
            (0.1, 1e-3, 17.404_396_203_031_166),
            (2.0, 1e-8, 2.652_926_768_055_825),
            (0.0, 0.01, 39.893_183_581_616_52),
        ];
        for (eps, delta, expected) in cases {
            let got = sigma_gamma(&triple(eps, delta, 1.0), DEFAULT_REL_TOL).unwrap();
            let rel = (got.sigma - expected).abs() / expected;
            assert!(
                rel < 1e-11,
                "eps={eps} delta={delta}: {} vs {expected}",
                got.sigma
            );
            assert!(got.achieved_delta <= delta);
        }
    }

    #[test]
    fn sigma_gamma_below_classical_bound() {
        let got = sigma_gamma(&triple(1.0, 1e-5, 1.0), DEFAULT_REL_TOL).unwrap();
        assert!(got.sigma > 0.0 && got.sigma < 4.845);
    }

    #[test]
    fn sigma_gamma_delta_one_needs_no_noise() {
        for eps in [0.0, 0.3, 5.0] {
            let got = sigma_gamma(&triple(eps, 1.0, 1.0), DEFAULT_REL_TOL).unwrap();
            assert_eq!(got.sigma, 0.0);
        }
    }

    #[test]
    fn sigma_gamma_scales_with_sensitivity() {
        let one = sigma_gamma(&triple(1.0, 1e-5, 1.0), DEFAULT_REL_TOL).unwrap();
        let two = sigma_gamma(&triple(1.0, 1e-5, 2.0), DEFAULT_REL_TOL).unwrap();
        assert_eq!(two.sigma, 2.0 * one.sigma);
    }

    #[test]
    fn sigma_gamma_is_tight() {
        let t = triple(0.7, 1e-6, 1.0);
        let got = sigma_gamma(&t, DEFAULT_REL_TOL).unwrap();
        assert!(privacy_profile(got.sigma, &t).unwrap() <= 1e-6);
        assert!(privacy_profile(got.sigma * (1.0 - DEFAULT_REL_TOL), &t).unwrap() > 1e-6);
    }

    #[test]
    fn zero_delta_is_rejected() {
        assert_eq!(
            sigma_gamma(&triple(1.0, 0.0, 1.0), DEFAULT_REL_TOL),
            Err(Error::ZeroDelta)
        );
    }

    #[test]
    fn budget_validation() {
        assert!(PrivacyBudget::new(-0.1, 0.1).is_err());
        assert!(PrivacyBudget::new(f64::INFINITY, 0.1).is_err());
        assert!(PrivacyBudget::new(0.1, 1.5).is_err());
        assert!(PrivacyBudget::new(0.1, -1e-9).is_err());
        assert!(CalibrationTriple::new(PrivacyBudget::new(1.0, 0.1).unwrap(), 0.0).is_err());
    }

    #[test]
    fn partial_sensitivities() {
        assert_eq!(partial_sensitivity(QueryKind::Count).unwrap(), 1.0);
        assert_eq!(
            partial_sensitivity(QueryKind::FunctionalLinReg { dims: 4 }).unwrap(),
            92f64.sqrt()
        );
        assert_eq!(
            partial_sensitivity(QueryKind::FunctionalLinReg { dims: 1 }).unwrap(),
            17f64.sqrt()
        );
        assert!(partial_sensitivity(QueryKind::FunctionalLinReg { dims: 0 }).is_err());
    }
}
