//! Noise allocation for threshold personalized multi-party differential privacy.
//!
//! Each party holds its own `(epsilon, delta)` budget and the released value of a
//! query is perturbed by the sum of independent Gaussian noises contributed by
//! every party. Any coalition of at most `t` parties that can see the release
//! must still be unable to breach the budget of a party outside the coalition.
//! This crate computes the minimal total noise variance that satisfies those
//! constraints in linear time, checks it against a brute-force LP oracle, and
//! simulates the resulting mechanism on count and linear-regression workloads.
//!
//! The pieces:
//!
//! * [`calibration`]: minimal Gaussian standard deviation for `(epsilon, delta, sensitivity)`.
//! * [`allocator`]: the linear-time variance allocator, its closed-form optimum,
//!   a feasibility checker, and the comparison baselines.
//! * [`lp_oracle`]: exhaustive constraint enumeration and a dense simplex solver.
//! * [`mechanism`]: populations, mechanism runs, baselines and the experiment harness.
//! * [`composition`]: budget arithmetic for sequentially composed mechanisms.

pub mod allocator;
pub mod calibration;
pub mod composition;
mod error;
pub mod lp_oracle;
pub mod mechanism;

pub use allocator::{
    allocate, allocate_full, baseline_min_centralized, baseline_non_threshold, baseline_tmdp,
    classify_subcase, feasibility_check, optimal_value, xi, Allocation, FeasibilityReport, Subcase,
    ThresholdInstance,
};
pub use calibration::{
    partial_sensitivity, privacy_profile, sigma_gamma, standard_normal_cdf, CalibratedSigma,
    CalibrationTriple, PrivacyBudget, QueryKind,
};
pub use error::{Error, Result};
