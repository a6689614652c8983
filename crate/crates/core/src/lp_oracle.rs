//! Brute-force reference for the allocation LP.
//!
//! Materializes every constraint row and solves the LP with a dense simplex. It
//! shares no structure with [`crate::allocator`], so agreement between the two is
//! an independent check of the linear-time solver.

use std::collections::HashMap;

use libm::lgamma as ln_gamma;

use crate::allocator::{Allocation, ThresholdInstance};
use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_constraints`].
pub const MAX_ENUMERATION_PARTIES: usize = 22;
/// Largest `n` accepted by [`solve_exact`].
pub const MAX_SOLVE_PARTIES: usize = 12;

const PIVOT_TOL: f64 = 1e-12;
const CERTIFICATE_TOL: f64 = 1e-8;
const MAX_PIVOTS: usize = 200_000;
const DEGENERATE_STREAK_BEFORE_BLAND: usize = 50;

/// One constraint `sum_{i in mask} v_i >= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintRow {
    /// Bit `i` is set when party `i` lies outside the coalition.
    pub mask: u32,
    pub rhs: f64,
    /// Party whose requirement produced the row.
    pub party: usize,
}

impl ConstraintRow {
    pub fn covers(&self, party: usize) -> bool {
        self.mask & (1 << party) != 0
    }

    pub fn lhs(&self, variances: &[f64]) -> f64 {
        variances
            .iter()
            .enumerate()
            .filter(|(i, _)| self.covers(*i))
            .map(|(_, v)| v)
            .sum()
    }
}

/// Every constraint of the allocation LP, one per (party, coalition) pair.
pub fn enumerate_constraints(inst: &ThresholdInstance) -> Result<Vec<ConstraintRow>> {
    let n = inst.n();
    if n > MAX_ENUMERATION_PARTIES {
        return Err(Error::InstanceTooLarge {
            n,
            limit: MAX_ENUMERATION_PARTIES,
        });
    }
    let t = inst.t();
    if t == 0 {
        return Ok(Vec::new());
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let active: u32 = inst.active_parties().fold(0, |acc, i| acc | (1u32 << i));
    let coalitions = subsets_of_size(n, t);

    let mut rows = Vec::new();
    for j in 0..n {
        let g = inst.sigma_gamma()[j];
        for &coalition in &coalitions {
            if coalition & (1 << j) != 0 || coalition & active == 0 {
                continue;
            }
            rows.push(ConstraintRow {
                mask: full & !coalition,
                rhs: g * g,
                party: j,
            });
        }
    }
    Ok(rows)
}

// All n-bit masks with exactly k bits set, in increasing order (Gosper's hack).
fn subsets_of_size(n: usize, k: usize) -> Vec<u32> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let limit = 1u64 << n;
    let mut out = Vec::new();
    let mut x: u64 = (1u64 << k) - 1;
    while x < limit {
        out.push(x as u32);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// Keeps one row per mask, with the largest right-hand side.
pub fn dedup_rows(rows: &[ConstraintRow]) -> Vec<ConstraintRow> {
    let mut best: HashMap<u32, ConstraintRow> = HashMap::new();
    for row in rows {
        best.entry(row.mask)
            .and_modify(|r| {
                if row.rhs > r.rhs {
                    *r = *row;
                }
            })
            .or_insert(*row);
    }
    let mut out: Vec<_> = best.into_values().collect();
    out.sort_by_key(|r| r.mask);
    out
}

/// Exact minimum of `sum v_i` subject to `rows` and `v >= 0`.
///
/// Runs a dense tableau simplex on the dual `max b'y s.t. M'y <= 1, y >= 0`, whose
/// slack basis is feasible from the start. The primal solution is read from the
/// final reduced costs and certified by primal feasibility, dual feasibility and a
/// zero duality gap.
pub fn solve_exact(rows: &[ConstraintRow], n: usize) -> Result<Allocation> {
    if n > MAX_SOLVE_PARTIES {
        return Err(Error::InstanceTooLarge {
            n,
            limit: MAX_SOLVE_PARTIES,
        });
    }
    if let Some(row) = rows.iter().find(|r| r.mask >> n != 0) {
        return Err(Error::Solver(format!(
            "row mask {:#b} references a party beyond n = {n}",
            row.mask
        )));
    }
    if rows.iter().all(|r| r.rhs <= 0.0) {
        return Ok(Allocation::zeros(n));
    }
    if rows.iter().any(|r| r.mask == 0 && r.rhs > 0.0) {
        return Err(Error::Solver(
            "a row with an empty support is infeasible".into(),
        ));
    }

    let mut tableau = DualTableau::new(rows, n);
    tableau.optimize()?;
    let (primal, dual) = tableau.solution();

    let scale = tableau.objective().abs().max(1.0);
    let primal_violation = rows
        .iter()
        .map(|r| (r.rhs - r.lhs(&primal)).max(0.0))
        .fold(0.0, f64::max);
    let dual_violation = (0..n)
        .map(|i| {
            let used: f64 = rows
                .iter()
                .zip(&dual)
                .filter(|(r, _)| r.covers(i))
                .map(|(_, y)| y)
                .sum();
            (used - 1.0).max(0.0)
        })
        .fold(0.0, f64::max);
    let primal_total: f64 = primal.iter().sum();
    let dual_total: f64 = rows.iter().zip(&dual).map(|(r, y)| r.rhs * y).sum();
    let residual = (primal_violation / scale)
        .max(dual_violation)
        .max((primal_total - dual_total).abs() / scale);
    if residual >= CERTIFICATE_TOL {
        return Err(Error::Solver(format!(
            "optimality certificate failed with residual {residual:e}"
        )));
    }
    Ok(Allocation::from_variances(primal))
}

struct DualTableau {
    n: usize,
    m: usize,
    width: usize,
    // n constraint rows, each of length m + n + 1 (rhs last)
    body: Vec<f64>,
    // reduced costs of the maximization, rhs slot holds the objective
    costs: Vec<f64>,
    basis: Vec<usize>,
}

impl DualTableau {
    fn new(rows: &[ConstraintRow], n: usize) -> Self {
        let m = rows.len();
        let width = m + n + 1;
        let mut body = vec![0.0; n * width];
        for i in 0..n {
            let line = &mut body[i * width..(i + 1) * width];
            for (c, row) in rows.iter().enumerate() {
                if row.covers(i) {
                    line[c] = 1.0;
                }
            }
            line[m + i] = 1.0;
            line[width - 1] = 1.0;
        }
        let mut costs = vec![0.0; width];
        for (c, row) in rows.iter().enumerate() {
            costs[c] = -row.rhs;
        }
        Self {
            n,
            m,
            width,
            body,
            costs,
            basis: (m..m + n).collect(),
        }
    }

    fn objective(&self) -> f64 {
        self.costs[self.width - 1]
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let candidates = self.costs[..self.width - 1]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c < -PIVOT_TOL);
        if bland {
            candidates.map(|(i, _)| i).next()
        } else {
            candidates
                .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                .map(|(i, _)| i)
        }
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let w = self.width;
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.n {
            let a = self.body[r * w + col];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.body[r * w + w - 1] / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    if ratio < bratio - PIVOT_TOL
                        || (ratio <= bratio + PIVOT_TOL && self.basis[r] < self.basis[br])
                    {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.body[row * w + col];
        for v in &mut self.body[row * w..(row + 1) * w] {
            *v /= p;
        }
        let pivot_line: Vec<f64> = self.body[row * w..(row + 1) * w].to_vec();
        for r in 0..self.n {
            if r == row {
                continue;
            }
            let f = self.body[r * w + col];
            if f != 0.0 {
                for (v, pv) in self.body[r * w..(r + 1) * w].iter_mut().zip(&pivot_line) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.costs[col];
        if f != 0.0 {
            for (v, pv) in self.costs.iter_mut().zip(&pivot_line) {
                *v -= f * pv;
            }
        }
        self.basis[row] = col;
    }

    fn optimize(&mut self) -> Result<()> {
        let mut bland = false;
        let mut degenerate_streak = 0;
        for _ in 0..MAX_PIVOTS {
            let Some(col) = self.entering(bland) else {
                return Ok(());
            };
            let Some(row) = self.leaving(col) else {
                return Err(Error::Solver(
                    "dual problem reported unbounded; the primal cannot be infeasible".into(),
                ));
            };
            let before = self.objective();
            self.pivot(row, col);
            if self.objective() <= before + PIVOT_TOL {
                degenerate_streak += 1;
                if degenerate_streak > DEGENERATE_STREAK_BEFORE_BLAND {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
            }
        }
        Err(Error::Solver(format!(
            "no optimum after {MAX_PIVOTS} pivots"
        )))
    }

    // (primal variances, dual multipliers per row)
    fn solution(&self) -> (Vec<f64>, Vec<f64>) {
        let primal = (0..self.n)
            .map(|i| self.costs[self.m + i].max(0.0))
            .collect();
        let mut dual = vec![0.0; self.m];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.m {
                dual[b] = self.body[r * self.width + self.width - 1].max(0.0);
            }
        }
        (primal, dual)
    }
}

/// Enumerates and solves in one step.
pub fn solve_instance(inst: &ThresholdInstance) -> Result<Allocation> {
    if inst.n() > MAX_SOLVE_PARTIES {
        return Err(Error::InstanceTooLarge {
            n: inst.n(),
            limit: MAX_SOLVE_PARTIES,
        });
    }
    let rows = enumerate_constraints(inst)?;
    solve_exact(&rows, inst.n())
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c.checked_mul((n - k + i) as u128)? / i as u128;
    }
    Some(c)
}

/// Number of constraint rows for `n` parties, threshold `t` and `active_size`
/// active parties, without materializing them. `None` if it exceeds `u128`.
pub fn constraint_census(n: usize, t: usize, active_size: usize) -> Option<u128> {
    if t == 0 || active_size == 0 || n == 0 || t >= n {
        return Some(0);
    }
    let k = active_size.min(n);
    let all = (n as u128).checked_mul(binomial(n - 1, t)?)?;
    let missing_active = (k as u128).checked_mul(binomial(n - k, t)?)?;
    let missing_inactive = if k == n {
        0
    } else {
        ((n - k) as u128).checked_mul(binomial(n - k - 1, t)?)?
    };
    Some(all - missing_active - missing_inactive)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Base-10 logarithm of [`constraint_census`], usable far beyond `u128`.
/// Returns negative infinity when there are no rows.
pub fn census_log10(n: usize, t: usize, active_size: usize) -> f64 {
    if t == 0 || active_size == 0 || n == 0 || t >= n {
        return f64::NEG_INFINITY;
    }
    let k = active_size.min(n);
    let lead = (n as f64).ln() + ln_binomial(n - 1, t);
    let mut fraction_missing = ((k as f64).ln() + ln_binomial(n - k, t) - lead).exp();
    if k < n {
        fraction_missing += (((n - k) as f64).ln() + ln_binomial(n - k - 1, t) - lead).exp();
    }
    (lead + (1.0 - fraction_missing).ln()) / std::f64::consts::LN_10
}
