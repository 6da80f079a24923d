//! Database-level budget allocation across tables and foreign-key edges.
//!
//! Multiplicity bounds scale each table's grant so that the composed
//! database-level spend equals the configured total:
//! sum_i tau_i * eps_spn_i + sum_edges tau_i * eps_fanout_i = epsilon.

use crate::datamodel::DatabaseSchema;
use crate::dpcore::mechanism::Budget;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct TableBudget {
    pub table: String,
    /// Budget for tree construction on this table.
    pub eps_spn: Budget,
    /// Budget for each foreign-key fanout edge of this table (zero when the
    /// table has no foreign keys).
    pub eps_fanout: Budget,
}

#[derive(Clone, Debug)]
pub struct BudgetAllocation {
    pub per_table: Vec<TableBudget>,
    /// Fraction of the total that cannot be consumed (the fanout share of a
    /// schema without foreign-key edges).
    pub unspent: f64,
    pub warnings: Vec<String>,
}

impl BudgetAllocation {
    pub fn for_table(&self, name: &str) -> Option<&TableBudget> {
        self.per_table.iter().find(|t| t.table == name)
    }
}

pub fn allocate_database_budget(
    schema: &DatabaseSchema,
    total: Budget,
    gamma: f64,
) -> Result<BudgetAllocation> {
    if total.is_zero() {
        return Err(Error::Budget("total epsilon must be positive".into()));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Config(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let epsilon = total.epsilon();
    let tau_sum: f64 = schema.tables.iter().map(|t| t.max_multiplicity as f64).sum();
    let eps_spn = epsilon * gamma / tau_sum;

    // Each fanout edge of table i is charged tau_i times at the database
    // level, so the fanout share is divided by sum_i tau_i * |FK(T_i)|.
    let fk_weight: f64 = schema
        .tables
        .iter()
        .map(|t| t.max_multiplicity as f64 * t.fk_indices().len() as f64)
        .sum();

    let mut warnings = Vec::new();
    let mut unspent = 0.0;
    let eps_fanout = if fk_weight > 0.0 {
        epsilon * (1.0 - gamma) / fk_weight
    } else {
        unspent = epsilon * (1.0 - gamma);
        if unspent > 0.0 {
            warnings.push(format!(
                "schema has no foreign-key edges; {unspent} of the budget is unspent (set gamma = 1 to use it all)"
            ));
        }
        0.0
    };
    if eps_spn == 0.0 {
        warnings.push(
            "gamma = 0 leaves zero budget for tree construction; synthesis will refuse to run"
                .to_string(),
        );
    }

    let per_table = schema
        .tables
        .iter()
        .map(|t| TableBudget {
            table: t.name.clone(),
            eps_spn: Budget::new(eps_spn).expect("non-negative by construction"),
            eps_fanout: if t.fk_indices().is_empty() {
                Budget::ZERO
            } else {
                Budget::new(eps_fanout).expect("non-negative by construction")
            },
        })
        .collect();

    Ok(BudgetAllocation {
        per_table,
        unspent,
        warnings,
    })
}
