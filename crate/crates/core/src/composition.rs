//! Budget accounting for a sequence of mechanisms run on the same parties.

use crate::calibration::PrivacyBudget;
use crate::error::{Error, Result};

/// Budgets of one mechanism in a composed sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismBudgets {
    /// Collusion threshold the mechanism was allocated for.
    pub t: usize,
    /// One budget per party.
    pub budgets: Vec<PrivacyBudget>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompositionMode {
    Basic,
    /// One slack `delta'` per party.
    Advanced {
        delta_prime: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionRequest {
    pub mechanisms: Vec<MechanismBudgets>,
    pub mode: CompositionMode,
}

/// Per-party budgets of the whole sequence, valid against coalitions of size `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedBudgets {
    pub t: usize,
    pub budgets: Vec<PrivacyBudget>,
}

/// Coordinate-wise sums of the per-mechanism budgets. Summed deltas are capped at 1.
pub fn compose_basic(mechanisms: &[Vec<PrivacyBudget>]) -> Result<Vec<PrivacyBudget>> {
    let n = party_count(mechanisms)?;
    (0..n)
        .map(|i| {
            let (eps, delta) = mechanisms.iter().fold((0.0, 0.0), |(e, d), m| {
                (e + m[i].epsilon(), d + m[i].delta())
            });
            PrivacyBudget::new(eps, delta.min(1.0))
        })
        .collect()
}

/// Advanced composition of `m` runs of an `(epsilon, delta)` mechanism:
/// `epsilon' = sqrt(2 m ln(1/delta')) epsilon + m epsilon (e^epsilon - 1)` and
/// `delta'' = m delta + delta'`, capped at 1.
pub fn compose_advanced(
    epsilon: f64,
    delta: f64,
    m: usize,
    delta_prime: f64,
) -> Result<PrivacyBudget> {
    let base = PrivacyBudget::new(epsilon, delta)?;
    if m == 0 {
        return Err(Error::InvalidComposition(
            "at least one mechanism is required".into(),
        ));
    }
    if !(delta_prime > 0.0 && delta_prime <= 1.0) {
        return Err(Error::InvalidComposition(format!(
            "delta' must lie in (0, 1], got {delta_prime}"
        )));
    }
    let mf = m as f64;
    let eps = base.epsilon();
    let composed = (2.0 * mf * (1.0 / delta_prime).ln()).sqrt() * eps + mf * eps * eps.exp_m1();
    PrivacyBudget::new(composed, (mf * base.delta() + delta_prime).min(1.0))
}

/// Composes a request, enforcing a common threshold across mechanisms.
///
/// Advanced mode additionally requires each party's budget to be identical in
/// every mechanism.
pub fn compose(request: &CompositionRequest) -> Result<ComposedBudgets> {
    let first = request
        .mechanisms
        .first()
        .ok_or_else(|| Error::InvalidComposition("at least one mechanism is required".into()))?;
    if let Some(other) = request.mechanisms.iter().find(|m| m.t != first.t) {
        return Err(Error::InvalidComposition(format!(
            "thresholds differ across mechanisms ({} vs {})",
            first.t, other.t
        )));
    }
    let tables: Vec<Vec<PrivacyBudget>> = request
        .mechanisms
        .iter()
        .map(|m| m.budgets.clone())
        .collect();
    let n = party_count(&tables)?;
    let budgets = match &request.mode {
        CompositionMode::Basic => compose_basic(&tables)?,
        CompositionMode::Advanced { delta_prime } => {
            if delta_prime.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: delta_prime.len(),
                });
            }
            (0..n)
                .map(|i| {
                    let b = tables[0][i];
                    if tables.iter().any(|m| m[i] != b) {
                        return Err(Error::InvalidComposition(format!(
                            "party {i} has different budgets across mechanisms; advanced composition needs identical ones"
                        )));
                    }
                    compose_advanced(b.epsilon(), b.delta(), tables.len(), delta_prime[i])
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(ComposedBudgets {
        t: first.t,
        budgets,
    })
}

fn party_count(mechanisms: &[Vec<PrivacyBudget>]) -> Result<usize> {
    let n = mechanisms
        .first()
        .ok_or_else(|| Error::InvalidComposition("at least one mechanism is required".into()))?
        .len();
    if let Some(m) = mechanisms.iter().find(|m| m.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: m.len(),
        });
    }
    Ok(n)
}
