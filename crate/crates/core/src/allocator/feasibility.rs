//! Constraint verification without enumerating coalitions.
//!
//! For party `j`, the binding coalition removes the `t` largest variances among the
//! other parties, subject to containing at least one active party. Taking the `t`
//! largest greedily and, if that set has no active party, swapping its smallest
//! member for the largest active party gives the worst case in `O(1)` per party
//! after one sort.

use serde::Serialize;

use super::{Allocation, ThresholdInstance};

pub const DEFAULT_SLACK_TOL: f64 = 1e-9;

/// The tightest constraint found by [`feasibility_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstConstraint {
    /// Party whose budget the constraint protects.
    pub party: usize,
    /// Colluding parties whose noise is excluded, in increasing order.
    pub coalition: Vec<usize>,
    /// Noise variance contributed by everyone outside the coalition.
    pub covered: f64,
    /// `sigma_gamma[party]^2`.
    pub required: f64,
}

impl WorstConstraint {
    pub fn slack(&self) -> f64 {
        self.covered - self.required
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Constraint with the smallest slack relative to `max(1, required)`; `None`
    /// when no constraint exists.
    pub worst: Option<WorstConstraint>,
}

struct Binding {
    coalition: Vec<usize>,
    covered: f64,
}

struct Ranked<'a> {
    inst: &'a ThresholdInstance,
    variances: &'a [f64],
    order: Vec<usize>,
    rank: Vec<usize>,
    // suffix[k] = sum of variances at ranks k.. in descending order
    suffix: Vec<f64>,
    // active_prefix[k] = number of active parties among ranks ..k
    active_prefix: Vec<usize>,
    first_actives: [Option<usize>; 2],
}

impl<'a> Ranked<'a> {
    fn new(inst: &'a ThresholdInstance, variances: &'a [f64]) -> Self {
        let n = inst.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| variances[b].total_cmp(&variances[a]).then(a.cmp(&b)));
        let mut rank = vec![0; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let mut suffix = vec![0.0; n + 1];
        for r in (0..n).rev() {
            suffix[r] = suffix[r + 1] + variances[order[r]];
        }
        let mut active_prefix = vec![0; n + 1];
        for r in 0..n {
            active_prefix[r + 1] = active_prefix[r] + usize::from(inst.is_active(order[r]));
        }
        let mut first_actives = [None, None];
        for &i in order.iter().filter(|&&i| inst.is_active(i)).take(2) {
            if first_actives[0].is_none() {
                first_actives[0] = Some(i);
            } else {
                first_actives[1] = Some(i);
            }
        }
        Self {
            inst,
            variances,
            order,
            rank,
            suffix,
            active_prefix,
            first_actives,
        }
    }

    fn binding(&self, j: usize) -> Option<Binding> {
        let inst = self.inst;
        let t = inst.t();
        if t == 0 {
            return None;
        }
        let largest_other_active = self
            .first_actives
            .iter()
            .flatten()
            .copied()
            .find(|&a| a != j)?;

        // Greedy coalition: the t highest-ranked parties other than j.
        let j_inside = self.rank[j] < t;
        let span = if j_inside { t + 1 } else { t };
        let greedy_actives = self.active_prefix[span] - usize::from(j_inside && inst.is_active(j));
        let mut coalition: Vec<usize> = self.order[..span]
            .iter()
            .copied()
            .filter(|&i| i != j)
            .collect();
        let mut covered = self.suffix[span] + if j_inside { self.variances[j] } else { 0.0 };

        if greedy_actives == 0 {
            let dropped = coalition.pop().expect("coalition has t >= 1 members");
            covered += self.variances[dropped] - self.variances[largest_other_active];
            coalition.push(largest_other_active);
        }
        coalition.sort_unstable();
        Some(Binding { coalition, covered })
    }
}

/// Slack `covered - required` of the binding constraint for every party; `None`
/// for parties with no constraint.
pub fn constraint_slacks(inst: &ThresholdInstance, alloc: &Allocation) -> Vec<Option<f64>> {
    assert_eq!(alloc.len(), inst.n(), "allocation length must equal n");
    let ranked = Ranked::new(inst, &alloc.variances);
    (0..inst.n())
        .map(|j| {
            let g = inst.sigma_gamma()[j];
            ranked.binding(j).map(|b| b.covered - g * g)
        })
        .collect()
}

/// Checks every constraint of the allocation LP.
///
/// A constraint passes when `covered >= required - slack_tol * max(1, required)`.
pub fn feasibility_check(
    inst: &ThresholdInstance,
    alloc: &Allocation,
    slack_tol: f64,
) -> FeasibilityReport {
    assert_eq!(alloc.len(), inst.n(), "allocation length must equal n");
    let ranked = Ranked::new(inst, &alloc.variances);
    let mut feasible = true;
    let mut worst: Option<(f64, WorstConstraint)> = None;
    for j in 0..inst.n() {
        let Some(binding) = ranked.binding(j) else {
            continue;
        };
        let g = inst.sigma_gamma()[j];
        let required = g * g;
        let scale = required.max(1.0);
        let normalized = (binding.covered - required) / scale;
        if normalized < -slack_tol {
            feasible = false;
        }
        if worst.as_ref().is_none_or(|(w, _)| normalized < *w) {
            worst = Some((
                normalized,
                WorstConstraint {
                    party: j,
                    coalition: binding.coalition,
                    covered: binding.covered,
                    required,
                },
            ));
        }
    }
    FeasibilityReport {
        feasible,
        worst: worst.map(|(_, w)| w),
    }
}
