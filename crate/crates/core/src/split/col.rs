//! Column partitioning by the exponential mechanism.
//!
//! Draws |attr(T)| uniformly random half-sized column partitions (with
//! replacement, no deduplication), scores each by the normalized mutual
//! information between its sides, and samples one with probability
//! proportional to exp(-eps * score / (2 * sensitivity)): low-correlation
//! partitions are preferred.

use rand::seq::SliceRandom;

use crate::datamodel::{ColumnTable, IndexPartition};
use crate::dpcore::{exponential_choose, Budget, BudgetLedger, RngStream, Scope};
use crate::error::{Error, Result};
use crate::parallel;
use crate::stats::{nmi, nmi_sensitivity};

pub fn col_split(
    t: &ColumnTable,
    budget: Budget,
    rng: &RngStream,
    ledger: &mut BudgetLedger,
    scope: &Scope,
    mechanism: &str,
) -> Result<IndexPartition> {
    let m = t.attr_count();
    if m < 2 {
        return Err(Error::Input(
            "column split needs at least two attributes".into(),
        ));
    }
    if t.row_count < 2 {
        return Err(Error::Input(
            "column split needs at least two rows to score candidates".into(),
        ));
    }

    let mut sample_rng = rng.child("candidates").rng();
    let half = m / 2;
    let all: Vec<usize> = (0..m).collect();
    let candidates: Vec<IndexPartition> = (0..m)
        .map(|_| {
            let mut left: Vec<usize> =
                all.choose_multiple(&mut sample_rng, half).copied().collect();
            left.sort_unstable();
            let right: Vec<usize> = (0..m).filter(|i| !left.contains(i)).collect();
            IndexPartition::columns(left, right, m)
        })
        .collect::<Result<Vec<_>>>()?;

    let scores = parallel::try_map_collect(&candidates, |p| nmi(t, p))?;
    let sensitivity = nmi_sensitivity(t.row_count)?;
    let chosen = exponential_choose(
        &scores,
        sensitivity,
        budget,
        &mut rng.child("choose").rng(),
        ledger,
        scope,
        mechanism,
    )?;
    Ok(candidates[chosen].clone())
}
