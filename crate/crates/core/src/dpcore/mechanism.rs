//! Laplace and exponential mechanisms over seeded randomness.

use rand::Rng;

use crate::dpcore::ledger::{BudgetLedger, Scope};
use crate::error::{Error, Result};

/// A non-negative privacy budget in epsilon units.
///
/// Zero is permitted only for operations whose analysis proves them cost-free
/// (the exponential mechanism degrades to a uniform choice at zero).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Budget(f64);

impl Budget {
    pub const ZERO: Budget = Budget(0.0);

    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon.is_finite() && epsilon >= 0.0 {
            Ok(Budget(epsilon))
        } else {
            Err(Error::Budget(format!(
                "epsilon must be finite and >= 0, got {epsilon}"
            )))
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
}

/// One draw from Laplace(0, scale) by inverse CDF; exact and rejection-free.
pub fn laplace_noise<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    debug_assert!(scale > 0.0);
    // u in (0, 1) so the log never sees 0.
    let mut u: f64 = rng.gen();
    while u <= 0.0 {
        u = rng.gen();
    }
    let centered = u - 0.5;
    -scale * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
}

/// Adds i.i.d. Laplace(sensitivity / epsilon) noise to each value and records
/// the spend.
pub fn laplace_perturb<R: Rng + ?Sized>(
    values: &[f64],
    sensitivity: f64,
    budget: Budget,
    rng: &mut R,
    ledger: &mut BudgetLedger,
    scope: &Scope,
    mechanism: &str,
) -> Result<Vec<f64>> {
    if !(sensitivity > 0.0) {
        return Err(Error::Budget(format!(
            "laplace sensitivity must be positive, got {sensitivity}"
        )));
    }
    if budget.is_zero() {
        return Err(Error::Budget(
            "laplace mechanism refuses epsilon = 0 (infinite noise scale)".into(),
        ));
    }
    let scale = sensitivity / budget.epsilon();
    let out = values
        .iter()
        .map(|&v| v + laplace_noise(rng, scale))
        .collect();
    ledger.record(scope, mechanism, budget.epsilon());
    Ok(out)
}

/// Picks an index with probability proportional to exp(-eps * score / (2 * sensitivity)).
///
/// Lower scores are more likely. Epsilon zero yields the uniform distribution.
/// Scores are shifted by their minimum before exponentiation; the shift
/// cancels in the normalization and keeps the exponentials bounded.
pub fn exponential_choose<R: Rng + ?Sized>(
    scores: &[f64],
    sensitivity: f64,
    budget: Budget,
    rng: &mut R,
    ledger: &mut BudgetLedger,
    scope: &Scope,
    mechanism: &str,
) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::Input("exponential mechanism needs candidates".into()));
    }
    if !(sensitivity > 0.0) {
        return Err(Error::Budget(format!(
            "exponential sensitivity must be positive, got {sensitivity}"
        )));
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = scores
        .iter()
        .map(|&s| (-budget.epsilon() * (s - min) / (2.0 * sensitivity)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen::<f64>() * total;
    let mut chosen = weights.len() - 1;
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            chosen = i;
            break;
        }
        draw -= w;
    }
    ledger.record(scope, mechanism, budget.epsilon());
    Ok(chosen)
}
