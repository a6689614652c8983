//! Comparison allocations.

use super::{allocate, Allocation, ThresholdInstance};

/// Non-personalized allocation: every party is held to the most stringent requirement.
pub fn baseline_tmdp(inst: &ThresholdInstance) -> Allocation {
    let top = inst.sigma_gamma().iter().copied().fold(0.0, f64::max);
    let uniform = inst
        .with_sigma_gamma(vec![top; inst.n()])
        .expect("uniform requirements keep the instance valid");
    allocate(&uniform)
}

/// Allocation that ignores the collusion threshold by assuming `t = n - 1`.
pub fn baseline_non_threshold(inst: &ThresholdInstance) -> Allocation {
    let widest = inst
        .with_threshold(inst.n() - 1)
        .expect("n - 1 is always a valid threshold");
    allocate(&widest)
}

/// Variance a trusted curator would add: the largest requirement among parties
/// that some admissible coalition could attack.
pub fn baseline_min_centralized(inst: &ThresholdInstance) -> f64 {
    if inst.t() == 0 || inst.active_count() == 0 {
        return 0.0;
    }
    let sg = inst.sigma_gamma();
    (0..inst.n())
        // j is attackable unless it is the only active party
        .filter(|&j| !(inst.active_count() == 1 && inst.is_active(j)))
        .map(|j| sg[j] * sg[j])
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::optimal_value;

    #[test]
    fn tmdp_matches_allocate_on_homogeneous_requirements() {
        let inst = ThresholdInstance::new(2, [0, 3], vec![1.5; 6]).unwrap();
        assert_eq!(baseline_tmdp(&inst), allocate(&inst));
    }

    #[test]
    fn tmdp_worked_example() {
        // All requirements become 3: total = n / (n - t) * 9 = 18.
        let inst = ThresholdInstance::all_active(2, vec![3.0, 2.0, 1.0, 1.0]).unwrap();
        let tmdp = baseline_tmdp(&inst);
        assert_eq!(tmdp.total, 18.0);
        assert!(tmdp.total >= allocate(&inst).total);
    }

    #[test]
    fn non_threshold_collapses_to_requirements() {
        let sg = vec![3.0, 2.0, 1.0, 1.0];
        let inst = ThresholdInstance::all_active(1, sg.clone()).unwrap();
        let alloc = baseline_non_threshold(&inst);
        let expected: Vec<f64> = sg.iter().map(|s| s * s).collect();
        assert_eq!(alloc.variances, expected);
        assert!(alloc.total >= allocate(&inst).total);

        let already = ThresholdInstance::all_active(3, sg).unwrap();
        assert_eq!(baseline_non_threshold(&already), allocate(&already));
    }

    #[test]
    fn min_centralized_examples() {
        let inst = ThresholdInstance::all_active(2, vec![3.0, 2.0, 1.0, 1.0]).unwrap();
        assert_eq!(baseline_min_centralized(&inst), 9.0);

        let lone = ThresholdInstance::new(1, [0], vec![3.0, 2.0, 1.0, 1.0]).unwrap();
        assert_eq!(baseline_min_centralized(&lone), 4.0);

        let flat = ThresholdInstance::new(2, [1, 2], vec![0.5; 5]).unwrap();
        assert_eq!(baseline_min_centralized(&flat), 0.25);

        let trivial = ThresholdInstance::all_active(0, vec![3.0, 2.0]).unwrap();
        assert_eq!(baseline_min_centralized(&trivial), 0.0);
    }

    #[test]
    fn min_centralized_lower_bounds_the_optimum() {
        let inst =
            ThresholdInstance::new(3, [1, 4], vec![0.4, 2.0, 1.2, 0.9, 1.8, 0.3, 1.1]).unwrap();
        assert!(baseline_min_centralized(&inst) <= optimal_value(&inst));
    }
}
