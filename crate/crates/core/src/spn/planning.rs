//! Per-node operation planning: decide leaf/sum/product, run the correlation
//! trial, and allocate budget between this node and its subtrees.

use crate::datamodel::ColumnTable;
use crate::dpcore::{laplace_perturb, Budget, BudgetLedger, RngStream, Scope};
use crate::error::{Error, Result};
use crate::split::col_split;
use crate::stats::nmi_sensitivity;
use crate::{spn::SpnParams, stats::nmi};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpChoice {
    Leaf,
    Sum,
    Product,
}

#[derive(Clone, Debug)]
pub struct PlanningOutcome {
    pub op: OpChoice,
    /// Budget for generating the node itself.
    pub eps_op: Budget,
    /// Budget left for the children.
    pub eps_remaining: Budget,
    /// Budget consumed by the correlation trial.
    pub eps_eval: Budget,
    /// Noisy correlation score; may leave [0, 1] and is compared raw.
    pub noisy_nmi: f64,
}

/// Maximum possible node count of a tree over a table of the given size:
/// 2 * rows * attrs / beta - 1. Drives top-down budget division.
pub fn scale(row_count: usize, attr_count: usize, beta: u64) -> f64 {
    2.0 * row_count as f64 * attr_count as f64 / beta as f64 - 1.0
}

pub fn planning(
    t: &ColumnTable,
    eps: Budget,
    params: &SpnParams,
    rng: &RngStream,
    ledger: &mut BudgetLedger,
    scope: &Scope,
) -> Result<PlanningOutcome> {
    let attrs = t.attr_count();
    let rows = t.row_count;
    if attrs == 1 {
        return Ok(PlanningOutcome {
            op: OpChoice::Leaf,
            eps_op: eps,
            eps_remaining: Budget::ZERO,
            eps_eval: Budget::ZERO,
            noisy_nmi: 0.0,
        });
    }

    let sigma = scale(rows, attrs, params.beta);
    let both_feasible = rows as u64 >= 2 * params.beta;

    // Correlation trial: a throwaway column split plus a noisy score of it.
    let (eps_eval, noisy_nmi) = if both_feasible {
        let eps_eval = eps.epsilon() * params.gamma1 / sigma;
        let eps_trial = eps_eval * params.gamma2;
        let eps_score = eps_eval - eps_trial;
        let trial = col_split(
            t,
            Budget::new(eps_trial)?,
            &rng.child("trial"),
            ledger,
            scope,
            "col_split_trial",
        )?;
        let rho = nmi(t, &trial)?;
        let noisy = laplace_perturb(
            &[rho],
            nmi_sensitivity(rows)?,
            Budget::new(eps_score)?,
            &mut rng.child("trial_score").rng(),
            ledger,
            scope,
            "nmi_score",
        )?;
        (Budget::new(eps_eval)?, noisy[0])
    } else {
        (Budget::ZERO, 0.0)
    };

    let op = if both_feasible {
        if noisy_nmi <= params.alpha {
            OpChoice::Product
        } else {
            OpChoice::Sum
        }
    } else {
        OpChoice::Product
    };

    let eps_op = if op == OpChoice::Product && attrs == 2 {
        // Only one possible half-partition: the split is free.
        0.0
    } else {
        eps.epsilon() / sigma - eps_eval.epsilon()
    };
    if eps_op < 0.0 {
        return Err(Error::Config(format!(
            "negative node budget {eps_op}; gamma1 must not exceed 1"
        )));
    }
    let eps_remaining = eps.epsilon() - eps_eval.epsilon() - eps_op;

    Ok(PlanningOutcome {
        op,
        eps_op: Budget::new(eps_op)?,
        eps_remaining: Budget::new(eps_remaining.max(0.0))?,
        eps_eval,
        noisy_nmi,
    })
}
