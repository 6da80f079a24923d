//! End-to-end synthesis: allocate budgets, build one tree per table, augment
//! foreign keys with fanout leaves, then sample a database of the original
//! shape. Table builds run in parallel; ledgers merge in schema order so the
//! audit trail is identical regardless of thread count.

use std::collections::BTreeMap;

use crate::datamodel::Database;
use crate::dpcore::{allocate_database_budget, Budget, BudgetAllocation, BudgetLedger, RngStream};
use crate::error::{Error, Result};
use crate::sampler::assemble_database;
use crate::spn::{
    composed_fanout_epsilon, composed_spn_epsilon, priv_fanout, priv_spn, SpnNode, SpnParams,
};

#[derive(Clone, Copy, Debug)]
pub struct PipelineParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: u64,
    /// Budget share for tree construction; the rest funds fanout edges.
    pub gamma: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub iterations: u32,
    pub seed: u64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            epsilon: 3.2,
            alpha: 0.5,
            beta: 10_000,
            gamma: 0.9,
            gamma1: 0.5,
            gamma2: 0.5,
            iterations: 5,
            seed: 0,
        }
    }
}

impl PipelineParams {
    pub fn spn_params(&self) -> SpnParams {
        SpnParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            iterations: self.iterations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        self.spn_params().validate()?;
        if !(0.0..=1.0).contains(&self.alpha) {
            log::warn!(
                "alpha = {} lies outside [0, 1]; the correlation score rarely leaves that range",
                self.alpha
            );
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct SynthesisArtifacts {
    pub synthetic: Database,
    /// Fanout-augmented tree per table, keyed by table name.
    pub trees: BTreeMap<String, SpnNode>,
    /// Trees as built, before fanout augmentation; budget composition is
    /// evaluated against these.
    pub pre_fanout_trees: BTreeMap<String, SpnNode>,
    pub ledger: BudgetLedger,
    pub allocation: BudgetAllocation,
}

pub fn synthesize(orig: &Database, params: &PipelineParams) -> Result<SynthesisArtifacts> {
    params.validate()?;
    orig.validate()?;
    let allocation =
        allocate_database_budget(&orig.schema, Budget::new(params.epsilon)?, params.gamma)?;
    for w in &allocation.warnings {
        log::warn!("{w}");
    }
    let spn_params = params.spn_params();
    let root_stream = RngStream::new(params.seed);

    // Each table build is independent: own budget, own rng subtree, own
    // ledger. Results come back in schema order.
    let built = crate::parallel::try_map_collect(&orig.tables, |table| {
        let name = &table.schema.name;
        let grant = allocation
            .for_table(name)
            .expect("allocation covers every table");
        let stream = root_stream.child("table").child(name);
        let mut ledger = BudgetLedger::new();
        let view = table.plain_view();
        let tree = priv_spn(&view, grant.eps_spn, &spn_params, &stream.child("spn"), &mut ledger)?;
        let mut augmented = tree.clone();
        for fk_idx in table.schema.fk_indices() {
            let fk_name = table.schema.attributes[fk_idx].name.clone();
            augmented = priv_fanout(
                table,
                &augmented,
                &fk_name,
                grant.eps_fanout,
                &stream.child("fanout").child(&fk_name),
                &mut ledger,
            )?;
        }
        Ok((name.clone(), tree, augmented, ledger))
    })?;

    let mut ledger = BudgetLedger::new();
    let mut trees = BTreeMap::new();
    let mut pre_fanout_trees = BTreeMap::new();
    for (name, tree, augmented, local) in built {
        ledger.merge(local);
        pre_fanout_trees.insert(name.clone(), tree);
        trees.insert(name, augmented);
    }

    let synthetic = assemble_database(orig, &trees, &root_stream.child("assemble"))?;

    Ok(SynthesisArtifacts {
        synthetic,
        trees,
        pre_fanout_trees,
        ledger,
        allocation,
    })
}

#[derive(Clone, Debug)]
pub struct TableSpend {
    pub table: String,
    pub composed_spn: f64,
    pub composed_fanout: f64,
}

#[derive(Clone, Debug)]
pub struct DatabaseSpend {
    pub per_table: Vec<TableSpend>,
    /// Multiplicity-weighted database-level total.
    pub total: f64,
}

/// Composes the ledger against the finished trees and checks every grant.
/// Any overrun is an internal error surfaced as a budget violation.
pub fn verify_budget(
    orig: &Database,
    artifacts: &SynthesisArtifacts,
    epsilon: f64,
) -> Result<DatabaseSpend> {
    const TOL: f64 = 1e-9;
    let mut per_table = Vec::new();
    let mut total = 0.0;
    for table in &orig.tables {
        let name = &table.schema.name;
        let tau = table.schema.max_multiplicity as f64;
        let grant = artifacts
            .allocation
            .for_table(name)
            .expect("allocation covers every table");
        let tree = &artifacts.pre_fanout_trees[name];
        let composed_spn = composed_spn_epsilon(tree, &artifacts.ledger, name);
        let composed_fanout = composed_fanout_epsilon(&artifacts.ledger, name);
        if composed_spn > grant.eps_spn.epsilon() + TOL {
            return Err(Error::Budget(format!(
                "table `{name}` spent {composed_spn} on its tree, granted {}",
                grant.eps_spn.epsilon()
            )));
        }
        let fanout_grant =
            grant.eps_fanout.epsilon() * table.schema.fk_indices().len() as f64;
        if composed_fanout > fanout_grant + TOL {
            return Err(Error::Budget(format!(
                "table `{name}` spent {composed_fanout} on fanout, granted {fanout_grant}"
            )));
        }
        total += tau * (composed_spn + composed_fanout);
        per_table.push(TableSpend {
            table: name.clone(),
            composed_spn,
            composed_fanout,
        });
    }
    if total > epsilon + TOL {
        return Err(Error::Budget(format!(
            "database-level spend {total} exceeds configured epsilon {epsilon}"
        )));
    }
    Ok(DatabaseSpend { per_table, total })
}
