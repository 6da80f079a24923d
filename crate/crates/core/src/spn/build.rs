//! Recursive private tree construction over a single table.

use crate::datamodel::{ColumnTable, Side};
use crate::dpcore::{laplace_perturb, Budget, BudgetLedger, RngStream, Scope};
use crate::error::{Error, Result};
use crate::spn::node::SpnNode;
use crate::spn::planning::{planning, scale, OpChoice};
use crate::split::{col_split, row_split, SplitConfig};
use crate::stats::{build_histogram, HISTOGRAM_SENSITIVITY};

/// Construction parameters.
#[derive(Clone, Copy, Debug)]
pub struct SpnParams {
    /// Correlation threshold steering product-vs-sum.
    pub alpha: f64,
    /// Minimum rows per cluster/leaf.
    pub beta: u64,
    /// Share of a node's budget spent on the correlation trial.
    pub gamma1: f64,
    /// Share of the trial spent on the trial split (the rest scores it).
    pub gamma2: f64,
    /// Clustering iterations for row splits.
    pub iterations: u32,
}

impl Default for SpnParams {
    fn default() -> Self {
        SpnParams {
            alpha: 0.5,
            beta: 10_000,
            gamma1: 0.5,
            gamma2: 0.5,
            iterations: 5,
        }
    }
}

impl SpnParams {
    pub fn validate(&self) -> Result<()> {
        if self.beta < 1 {
            return Err(Error::Config("beta must be >= 1".into()));
        }
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be >= 1".into()));
        }
        for (name, v) in [("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !self.alpha.is_finite() {
            return Err(Error::Config("alpha must be finite".into()));
        }
        Ok(())
    }
}

/// Builds a private tree for `t` with total budget `eps`.
///
/// `t` must contain only plain attributes (use `plain_view`), have at least
/// `beta` rows so the scale metric stays positive, and get a positive budget.
pub fn priv_spn(
    t: &ColumnTable,
    eps: Budget,
    params: &SpnParams,
    rng: &RngStream,
    ledger: &mut BudgetLedger,
) -> Result<SpnNode> {
    params.validate()?;
    if eps.is_zero() {
        return Err(Error::Budget(format!(
            "tree construction for `{}` needs a positive budget",
            t.schema.name
        )));
    }
    if t.schema.attributes.iter().any(|a| a.is_key()) {
        return Err(Error::Input(format!(
            "table `{}` passed with key attributes; build on the plain view",
            t.schema.name
        )));
    }
    if t.attr_count() == 0 {
        return Err(Error::Input(format!(
            "table `{}` has no plain attributes to model",
            t.schema.name
        )));
    }
    if (t.row_count as u64) < params.beta {
        return Err(Error::Config(format!(
            "table `{}` has {} rows, fewer than the minimum table size {}",
            t.schema.name, t.row_count, params.beta
        )));
    }

    let ctx = BuildCtx {
        params: *params,
        table: t.schema.name.clone(),
    };
    let rows: Vec<usize> = (0..t.row_count).collect();
    let attrs: Vec<usize> = (0..t.attr_count()).collect();

    // Depth is bounded by (attrs - 1) column splits plus (rows/beta - 1) row
    // splits plus the leaf; deep trees run on a thread with a matching stack.
    let depth_bound = t.attr_count() + t.row_count / params.beta as usize;
    if depth_bound > 4_000 {
        let stack = 16 * 1024 * 1024 + depth_bound * 4096;
        let t = t.clone();
        let rng = rng.clone();
        let scope = Scope::root(&ctx.table);
        let handle = std::thread::Builder::new()
            .name("spn-build".into())
            .stack_size(stack.min(1 << 30))
            .spawn(move || {
                let mut local = BudgetLedger::new();
                let node = build_node(&ctx, &t, rows, attrs, eps, &rng, &mut local, &scope);
                node.map(|n| (n, local))
            })
            .map_err(|e| Error::Input(format!("failed to spawn build thread: {e}")))?;
        let (node, local) = handle
            .join()
            .map_err(|_| Error::Input("tree build thread panicked".into()))??;
        ledger.merge(local);
        Ok(node)
    } else {
        build_node(&ctx, t, rows, attrs, eps, rng, ledger, &Scope::root(&ctx.table))
    }
}

struct BuildCtx {
    params: SpnParams,
    table: String,
}

#[allow(clippy::too_many_arguments)]
fn build_node(
    ctx: &BuildCtx,
    t: &ColumnTable,
    global_rows: Vec<usize>,
    global_attrs: Vec<usize>,
    eps: Budget,
    rng: &RngStream,
    ledger: &mut BudgetLedger,
    scope: &Scope,
) -> Result<SpnNode> {
    let plan = planning(t, eps, &ctx.params, &rng.child("plan"), ledger, scope)?;
    debug_assert!(
        (plan.eps_eval.epsilon() + plan.eps_op.epsilon() + plan.eps_remaining.epsilon()
            - eps.epsilon())
        .abs()
            <= 1e-9 * eps.epsilon().max(1.0)
    );

    match plan.op {
        OpChoice::Leaf => {
            let mut histogram = build_histogram(t)?;
            histogram.counts = laplace_perturb(
                &histogram.counts,
                HISTOGRAM_SENSITIVITY,
                plan.eps_op,
                &mut rng.child("hist").rng(),
                ledger,
                scope,
                "histogram",
            )?;
            histogram.clamp_non_negative();
            Ok(SpnNode::Leaf {
                attr_name: t.schema.attributes[0].name.clone(),
                attr_index: global_attrs[0],
                rows: global_rows,
                epsilon: plan.eps_op.epsilon(),
                histogram,
            })
        }
        OpChoice::Sum => {
            let cfg = SplitConfig::new(ctx.params.iterations, ctx.params.beta)?;
            let partition = row_split(t, plan.eps_op, &cfg, &rng.child("row_split"), ledger, scope)?;
            let n_left = partition.left().len() as f64;
            let n_right = partition.right().len() as f64;
            let weight_left = n_left / (n_left + n_right);

            // Parallel composition across disjoint row sets: both children
            // receive the full remaining budget.
            let left_table = t.subtable(&partition, Side::Left)?;
            let right_table = t.subtable(&partition, Side::Right)?;
            let rows_left = partition.left().iter().map(|&i| global_rows[i]).collect();
            let rows_right = partition.right().iter().map(|&i| global_rows[i]).collect();
            let left = build_node(
                ctx,
                &left_table,
                rows_left,
                global_attrs.clone(),
                plan.eps_remaining,
                &rng.child("L"),
                ledger,
                &scope.left(),
            )?;
            let right = build_node(
                ctx,
                &right_table,
                rows_right,
                global_attrs,
                plan.eps_remaining,
                &rng.child("R"),
                ledger,
                &scope.right(),
            )?;
            Ok(SpnNode::Sum {
                partition,
                weight_left,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
        OpChoice::Product => {
            let partition = col_split(
                t,
                plan.eps_op,
                &rng.child("col_split"),
                ledger,
                scope,
                "col_split",
            )?;
            // The remaining budget splits proportionally to the subtree
            // scales, so every leaf ends up with at least eps / scale(root).
            let sigma_left = scale(t.row_count, partition.left().len(), ctx.params.beta);
            let sigma_right = scale(t.row_count, partition.right().len(), ctx.params.beta);
            let eps_left = plan.eps_remaining.epsilon() * sigma_left / (sigma_left + sigma_right);
            let eps_right = plan.eps_remaining.epsilon() - eps_left;

            let left_table = t.subtable(&partition, Side::Left)?;
            let right_table = t.subtable(&partition, Side::Right)?;
            let attrs_left = partition.left().iter().map(|&i| global_attrs[i]).collect();
            let attrs_right = partition.right().iter().map(|&i| global_attrs[i]).collect();
            let left = build_node(
                ctx,
                &left_table,
                global_rows.clone(),
                attrs_left,
                Budget::new(eps_left)?,
                &rng.child("L"),
                ledger,
                &scope.left(),
            )?;
            let right = build_node(
                ctx,
                &right_table,
                global_rows,
                attrs_right,
                Budget::new(eps_right)?,
                &rng.child("R"),
                ledger,
                &scope.right(),
            )?;
            Ok(SpnNode::Product {
                partition,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
    }
}
