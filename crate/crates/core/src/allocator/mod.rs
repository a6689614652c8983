//! Linear-time solver for the noise variance allocation LP.
//!
//! Party `i` contributes Gaussian noise of variance `v_i`. For every party `j` and
//! every coalition `A` of exactly `t` parties that excludes `j` and contains at
//! least one active party, the noise contributed by parties outside `A` must cover
//! `sigma_gamma[j]^2`. The allocator returns the `v` of minimal total satisfying all
//! of these constraints without enumerating them.

mod baselines;
mod feasibility;
mod order;

use serde::Serialize;

use crate::calibration::{sigma_gamma, CalibrationTriple, PrivacyBudget, DEFAULT_REL_TOL};
use crate::error::{Error, Result};

pub use baselines::{baseline_min_centralized, baseline_non_threshold, baseline_tmdp};
pub use feasibility::{
    constraint_slacks, feasibility_check, FeasibilityReport, WorstConstraint, DEFAULT_SLACK_TOL,
};

use order::{kth_largest, top_squares, TopTwo};

/// Input of the allocation problem: threshold, active set and per-party minimal noise.
///
/// Parties are indexed from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdInstance {
    t: usize,
    active: Vec<bool>,
    active_count: usize,
    sigma_gamma: Vec<f64>,
}

impl ThresholdInstance {
    pub fn new(
        t: usize,
        active: impl IntoIterator<Item = usize>,
        sigma_gamma: Vec<f64>,
    ) -> Result<Self> {
        let n = sigma_gamma.len();
        let mut mask = vec![false; n];
        for i in active {
            if i >= n {
                return Err(Error::InvalidInstance(format!(
                    "active party {i} out of range for n = {n}"
                )));
            }
            if mask[i] {
                return Err(Error::InvalidInstance(format!(
                    "active party {i} listed twice"
                )));
            }
            mask[i] = true;
        }
        Self::from_mask(t, mask, sigma_gamma)
    }

    /// Instance in which every party receives the output.
    pub fn all_active(t: usize, sigma_gamma: Vec<f64>) -> Result<Self> {
        let mask = vec![true; sigma_gamma.len()];
        Self::from_mask(t, mask, sigma_gamma)
    }

    pub fn from_mask(t: usize, active: Vec<bool>, sigma_gamma: Vec<f64>) -> Result<Self> {
        let n = sigma_gamma.len();
        if n == 0 {
            return Err(Error::InvalidInstance(
                "at least one party is required".into(),
            ));
        }
        if active.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: active.len(),
            });
        }
        if t > n - 1 {
            return Err(Error::InvalidInstance(format!(
                "threshold t = {t} must be at most n - 1 = {}",
                n - 1
            )));
        }
        if let Some((i, s)) = sigma_gamma
            .iter()
            .enumerate()
            .find(|(_, s)| !(s.is_finite() && **s >= 0.0))
        {
            return Err(Error::InvalidInstance(format!(
                "sigma_gamma[{i}] = {s} must be finite and nonnegative"
            )));
        }
        let active_count = active.iter().filter(|&&a| a).count();
        Ok(Self {
            t,
            active,
            active_count,
            sigma_gamma,
        })
    }

    /// Calibrates each party's minimal noise from its budget and a shared sensitivity.
    pub fn from_budgets(
        t: usize,
        active: Vec<bool>,
        budgets: &[PrivacyBudget],
        sensitivity: f64,
    ) -> Result<Self> {
        let sigma = budgets
            .iter()
            .map(|&b| {
                let triple = CalibrationTriple::new(b, sensitivity)?;
                sigma_gamma(&triple, DEFAULT_REL_TOL).map(|c| c.sigma)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_mask(t, active, sigma)
    }

    pub fn n(&self) -> usize {
        self.sigma_gamma.len()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn sigma_gamma(&self) -> &[f64] {
        &self.sigma_gamma
    }

    pub fn is_active(&self, party: usize) -> bool {
        self.active[party]
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    pub fn active_parties(&self) -> impl Iterator<Item = usize> + '_ {
        self.active
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
    }

    pub fn is_fully_active(&self) -> bool {
        self.active_count == self.n()
    }

    pub fn with_threshold(&self, t: usize) -> Result<Self> {
        Self::from_mask(t, self.active.clone(), self.sigma_gamma.clone())
    }

    pub fn with_sigma_gamma(&self, sigma_gamma: Vec<f64>) -> Result<Self> {
        Self::from_mask(self.t, self.active.clone(), sigma_gamma)
    }
}

/// Per-party noise variances and their sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    pub variances: Vec<f64>,
    pub total: f64,
}

impl Allocation {
    pub fn from_variances(variances: Vec<f64>) -> Self {
        let total = variances.iter().sum();
        Self { variances, total }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            variances: vec![0.0; n],
            total: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }
}

/// The mutually exclusive regimes the solver dispatches on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcase {
    /// No coalition can see the output (`t = 0` or no active party); no noise needed.
    Trivial,
    /// `|active| >= n - t + 1`: every size-`t` coalition meets the active set.
    ManyActive,
    /// Exactly one active party.
    SingleActive,
    /// `2 <= |active| <= n - t` and `n <= t * |active|`.
    CrowdedActive,
    /// `2 <= |active| <= n - t` and `n > t * |active|`.
    SparseActive,
}

impl Subcase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Subcase::Trivial => "trivial",
            Subcase::ManyActive => "subcase-1",
            Subcase::SingleActive => "subcase-2",
            Subcase::CrowdedActive => "subcase-3",
            Subcase::SparseActive => "subcase-4",
        }
    }
}

impl std::fmt::Display for Subcase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which of the two sparse-active solutions applied, with its order-statistic maxima.
///
/// `alpha = max(largest inactive, second-largest active)`,
/// `beta = max(largest active, second-largest inactive)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparseBranch {
    pub alpha: f64,
    pub beta: f64,
    /// True when all noise sits on inactive parties, one of them carrying the surplus.
    pub concentrated: bool,
}

/// How an allocation was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllocationPlan {
    pub subcase: Subcase,
    pub sparse_branch: Option<SparseBranch>,
}

/// Cut index separating uniform-share parties from surplus parties:
/// `min(floor((2n - t) / (n - t)), t + 1)`.
pub fn xi(n: usize, t: usize) -> Result<usize> {
    if n < 2 || t == 0 || t > n - 1 {
        return Err(Error::ThresholdOutOfRange {
            t,
            max: n.saturating_sub(1),
        });
    }
    Ok(((2 * n - t) / (n - t)).min(t + 1))
}

pub fn classify_subcase(n: usize, t: usize, active_count: usize) -> Subcase {
    if t == 0 || active_count == 0 {
        Subcase::Trivial
    } else if active_count + t > n {
        Subcase::ManyActive
    } else if active_count == 1 {
        Subcase::SingleActive
    } else if n <= t * active_count {
        Subcase::CrowdedActive
    } else {
        Subcase::SparseActive
    }
}

/// Allocation for an instance in which every party is active.
pub fn allocate_full(inst: &ThresholdInstance) -> Result<Allocation> {
    if !inst.is_fully_active() {
        return Err(Error::InvalidInstance(
            "allocate_full requires every party to be active".into(),
        ));
    }
    xi(inst.n(), inst.t())?;
    Ok(Allocation::from_variances(full_variances(
        inst.sigma_gamma(),
        inst.t(),
    )))
}

// Every party receives the uniform share `s^2 / (n - t)` of the xi-th largest
// requirement `s`; parties whose requirement exceeds `s` add the shortfall on top.
fn full_variances(sigma_gamma: &[f64], t: usize) -> Vec<f64> {
    let n = sigma_gamma.len();
    let cut = ((2 * n - t) / (n - t)).min(t + 1);
    let s = kth_largest(sigma_gamma, cut);
    let s2 = s * s;
    let width = (n - t) as f64;
    let share = s2 / width;
    let carried = (n - t - 1) as f64 / width * s2;
    sigma_gamma
        .iter()
        .map(|&g| if g <= s { share } else { g * g - carried })
        .collect()
}

/// Optimal allocation for any instance.
pub fn allocate(inst: &ThresholdInstance) -> Allocation {
    allocate_with_plan(inst).0
}

pub fn allocate_with_plan(inst: &ThresholdInstance) -> (Allocation, AllocationPlan) {
    let n = inst.n();
    let t = inst.t();
    let subcase = classify_subcase(n, t, inst.active_count());
    let mut plan = AllocationPlan {
        subcase,
        sparse_branch: None,
    };
    let variances = match subcase {
        Subcase::Trivial => vec![0.0; n],
        Subcase::ManyActive | Subcase::CrowdedActive => full_variances(inst.sigma_gamma(), t),
        Subcase::SingleActive => single_active(inst),
        Subcase::SparseActive => {
            let (variances, branch) = sparse_active(inst);
            plan.sparse_branch = Some(branch);
            variances
        }
    };
    (Allocation::from_variances(variances), plan)
}

// The lone active party adds nothing; the inactive parties solve the fully active
// problem among themselves with one fewer possible colluder.
fn single_active(inst: &ThresholdInstance) -> Vec<f64> {
    let n = inst.n();
    let t = inst.t();
    let inactive: Vec<usize> = (0..n).filter(|&i| !inst.is_active(i)).collect();
    let mut variances = vec![0.0; n];
    if t >= 2 {
        let reduced: Vec<f64> = inactive.iter().map(|&i| inst.sigma_gamma[i]).collect();
        for (&i, v) in inactive.iter().zip(full_variances(&reduced, t - 1)) {
            variances[i] = v;
        }
    } else {
        let top = inactive
            .iter()
            .map(|&i| inst.sigma_gamma[i])
            .fold(0.0, f64::max);
        let share = top * top / (n - 1) as f64;
        for &i in &inactive {
            variances[i] = share;
        }
    }
    variances
}

fn sparse_active(inst: &ThresholdInstance) -> (Vec<f64>, SparseBranch) {
    let n = inst.n();
    let t = inst.t();
    let sg = inst.sigma_gamma();
    let active = TopTwo::scan(inst.active_parties().map(|i| (i, sg[i])));
    let inactive = TopTwo::scan((0..n).filter(|&i| !inst.is_active(i)).map(|i| (i, sg[i])));

    let alpha = inactive.first.max(active.second);
    let beta = active.first.max(inactive.second);
    let width = (n - inst.active_count() - t + 1) as f64;
    let concentrated = t >= 2 && alpha > beta;

    let variances = if !concentrated {
        let a2 = alpha * alpha;
        let share = a2 / width;
        (0..n)
            .map(|i| {
                if inst.is_active(i) {
                    (sg[i] * sg[i] - a2).max(0.0)
                } else {
                    share
                }
            })
            .collect()
    } else {
        let b2 = beta * beta;
        let share = b2 / width;
        let heavy = alpha * alpha - (width - 1.0) / width * b2;
        let heavy_party = inactive.first_index;
        (0..n)
            .map(|i| {
                if inst.is_active(i) {
                    0.0
                } else if Some(i) == heavy_party {
                    heavy
                } else {
                    share
                }
            })
            .collect()
    };
    (
        variances,
        SparseBranch {
            alpha,
            beta,
            concentrated,
        },
    )
}

/// Closed-form optimal total noise variance, computed from order statistics alone.
pub fn optimal_value(inst: &ThresholdInstance) -> f64 {
    let n = inst.n();
    let t = inst.t();
    let sg = inst.sigma_gamma();
    match classify_subcase(n, t, inst.active_count()) {
        Subcase::Trivial => 0.0,
        Subcase::ManyActive | Subcase::CrowdedActive => {
            let cut = ((2 * n - t) / (n - t)).min(t + 1);
            let (head, kth) = top_squares(sg, cut);
            let coef = (2 * n - t) as f64 / (n - t) as f64 - cut as f64;
            head + coef * kth
        }
        Subcase::SingleActive => {
            let inactive: Vec<f64> = (0..n)
                .filter(|&i| !inst.is_active(i))
                .map(|i| sg[i])
                .collect();
            let cut = ((2 * n - t - 1) / (n - t)).min(t);
            let (head, kth) = top_squares(&inactive, cut);
            let coef = (2 * n - t - 1) as f64 / (n - t) as f64 - cut as f64;
            head + coef * kth
        }
        Subcase::SparseActive => {
            let top = TopTwo::scan(sg.iter().copied().enumerate());
            let width = (n - inst.active_count() - t + 1) as f64;
            top.first * top.first + (t - 1) as f64 / width * top.second * top.second
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_examples() {
        assert_eq!(xi(1000, 500).unwrap(), 3);
        assert_eq!(xi(5, 2).unwrap(), 2);
        for n in 2..40 {
            assert_eq!(xi(n, n - 1).unwrap(), n);
            for t in 1..n {
                let v = xi(n, t).unwrap();
                assert!((2..=n).contains(&v));
            }
        }
        assert!(xi(5, 0).is_err());
        assert!(xi(5, 5).is_err());
        assert!(xi(1, 0).is_err());
    }

    #[test]
    fn full_allocation_worked_example() {
        let inst = ThresholdInstance::all_active(2, vec![3.0, 2.0, 1.0, 1.0]).unwrap();
        let alloc = allocate_full(&inst).unwrap();
        assert_eq!(alloc.variances, vec![8.5, 3.5, 0.5, 0.5]);
        assert_eq!(alloc.total, 13.0);
        assert_eq!(optimal_value(&inst), 13.0);
    }

    #[test]
    fn full_allocation_homogeneous() {
        let inst = ThresholdInstance::all_active(2, vec![1.0; 5]).unwrap();
        let alloc = allocate_full(&inst).unwrap();
        for v in &alloc.variances {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((alloc.total - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn full_allocation_with_maximal_threshold_is_identity() {
        let inst = ThresholdInstance::all_active(2, vec![2.0, 1.0, 0.5]).unwrap();
        let alloc = allocate_full(&inst).unwrap();
        assert_eq!(alloc.variances, vec![4.0, 1.0, 0.25]);
    }

    #[test]
    fn allocate_full_rejects_partial_activity() {
        let inst = ThresholdInstance::new(1, [0], vec![1.0, 1.0]).unwrap();
        assert!(allocate_full(&inst).is_err());
        let trivial = ThresholdInstance::all_active(0, vec![1.0, 1.0]).unwrap();
        assert!(allocate_full(&trivial).is_err());
    }

    #[test]
    fn subcase_examples() {
        assert_eq!(classify_subcase(1000, 500, 600), Subcase::ManyActive);
        assert_eq!(classify_subcase(5, 2, 2), Subcase::SparseActive);
        assert_eq!(classify_subcase(10, 0, 7), Subcase::Trivial);
        assert_eq!(classify_subcase(10, 3, 0), Subcase::Trivial);
        assert_eq!(classify_subcase(10, 3, 1), Subcase::SingleActive);
        assert_eq!(classify_subcase(10, 5, 2), Subcase::CrowdedActive);
        assert_eq!(classify_subcase(10, 5, 6), Subcase::ManyActive);
    }

    #[test]
    fn sparse_active_worked_example() {
        let inst = ThresholdInstance::new(2, [0, 1], vec![2.0, 1.0, 1.5, 0.5, 0.5]).unwrap();
        let (alloc, plan) = allocate_with_plan(&inst);
        assert_eq!(plan.subcase, Subcase::SparseActive);
        let branch = plan.sparse_branch.unwrap();
        assert_eq!(
            (branch.alpha, branch.beta, branch.concentrated),
            (1.5, 2.0, false)
        );
        assert_eq!(alloc.variances, vec![1.75, 0.0, 1.125, 1.125, 1.125]);
        assert_eq!(alloc.total, 5.125);
        assert_eq!(optimal_value(&inst), 5.125);
    }

    #[test]
    fn sparse_active_concentrated_branch() {
        // Largest requirement sits on an inactive party and dominates every other.
        let inst = ThresholdInstance::new(2, [0, 1], vec![1.0, 0.5, 3.0, 0.8, 0.2, 0.1]).unwrap();
        let (alloc, plan) = allocate_with_plan(&inst);
        let branch = plan.sparse_branch.unwrap();
        assert!(branch.concentrated);
        assert_eq!(branch.alpha, 3.0);
        assert_eq!(branch.beta, 1.0);
        // width = n - |active| - t + 1 = 3
        let heavy = 9.0 - 2.0 / 3.0 * 1.0;
        assert_eq!(alloc.variances[0], 0.0);
        assert_eq!(alloc.variances[1], 0.0);
        assert_eq!(alloc.variances[2], heavy);
        for i in 3..6 {
            assert_eq!(alloc.variances[i], 1.0 / 3.0);
        }
        assert!((alloc.total - optimal_value(&inst)).abs() < 1e-12);
    }

    #[test]
    fn single_active_threshold_one() {
        let inst = ThresholdInstance::new(1, [0], vec![5.0, 1.0, 1.0, 1.0]).unwrap();
        let alloc = allocate(&inst);
        assert_eq!(alloc.variances[0], 0.0);
        for v in &alloc.variances[1..] {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((alloc.total - optimal_value(&inst)).abs() < 1e-15);
    }

    #[test]
    fn single_active_recurses_on_inactive_parties() {
        let inst = ThresholdInstance::new(3, [2], vec![3.0, 2.0, 9.0, 1.0, 1.0]).unwrap();
        let alloc = allocate(&inst);
        assert_eq!(alloc.variances[2], 0.0);
        // Inactive parties solve the fully active problem with n = 4, t = 2.
        let reduced = ThresholdInstance::all_active(2, vec![3.0, 2.0, 1.0, 1.0]).unwrap();
        let expected = allocate_full(&reduced).unwrap();
        assert_eq!(
            [
                alloc.variances[0],
                alloc.variances[1],
                alloc.variances[3],
                alloc.variances[4]
            ],
            expected.variances[..]
        );
        assert_eq!(alloc.total, 13.0);
        assert_eq!(optimal_value(&inst), 13.0);
    }

    #[test]
    fn trivial_instances_get_zero_noise() {
        let inst = ThresholdInstance::all_active(0, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(allocate(&inst), Allocation::zeros(3));
        assert_eq!(optimal_value(&inst), 0.0);
        let nobody = ThresholdInstance::new(2, [], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(allocate(&nobody).total, 0.0);
        let lone = ThresholdInstance::all_active(0, vec![4.0]).unwrap();
        assert_eq!(allocate(&lone).total, 0.0);
    }

    #[test]
    fn instance_validation() {
        assert!(ThresholdInstance::all_active(0, vec![]).is_err());
        assert!(ThresholdInstance::all_active(3, vec![1.0; 3]).is_err());
        assert!(ThresholdInstance::new(1, [3], vec![1.0; 3]).is_err());
        assert!(ThresholdInstance::new(1, [1, 1], vec![1.0; 3]).is_err());
        assert!(ThresholdInstance::all_active(1, vec![1.0, f64::NAN]).is_err());
        assert!(ThresholdInstance::all_active(1, vec![1.0, -1.0]).is_err());
        assert!(ThresholdInstance::from_mask(1, vec![true], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn from_budgets_calibrates() {
        let b = PrivacyBudget::new(1.0, 1e-5).unwrap();
        let inst = ThresholdInstance::from_budgets(1, vec![true, true], &[b, b], 2.0).unwrap();
        assert!((inst.sigma_gamma()[0] - 2.0 * 3.730_631_634_815_942).abs() < 1e-9);
    }
}
