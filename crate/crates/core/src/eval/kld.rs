//! Average KL divergence over lambda-way marginals at histogram-bin
//! granularity.

use std::collections::HashMap;

use crate::datamodel::{ColumnTable, Database};
use crate::dpcore::RngStream;
use crate::error::{Error, Result};
use crate::parallel;
use crate::stats::Binning;

/// Additive smoothing applied to every cell of both distributions before
/// normalizing, so the divergence stays finite.
const SMOOTHING: f64 = 1e-10;

/// Marginal subsets per table are enumerated up to this many; beyond it a
/// seeded uniform sample of this size is scored instead.
const MAX_SUBSETS: usize = 10_000;

/// Average KLD(original || synthetic) over all lambda-subsets of each table's
/// plain attributes, in nats. Tables with fewer than lambda attributes are
/// skipped; an error is returned only if every table is skipped.
pub fn kld_lambda(orig: &Database, synth: &Database, lambda: usize, seed: u64) -> Result<f64> {
    if lambda < 1 {
        return Err(Error::Input("lambda must be >= 1".into()));
    }
    if lambda > 8 {
        return Err(Error::Input("lambda above 8 is not supported".into()));
    }
    if orig.schema != synth.schema {
        return Err(Error::Input(
            "original and synthetic databases have different schemas".into(),
        ));
    }
    let mut divergences: Vec<f64> = Vec::new();
    for (o, s) in orig.tables.iter().zip(&synth.tables) {
        let plain = o.schema.plain_indices();
        if plain.len() < lambda {
            continue;
        }
        let subsets = attribute_subsets(&plain, lambda, seed, &o.schema.name);
        let binnings: HashMap<usize, Binning> = plain
            .iter()
            .map(|&i| Ok((i, Binning::for_attribute(&o.schema.attributes[i])?)))
            .collect::<Result<_>>()?;
        let per_subset = parallel::try_map_collect(&subsets, |subset| {
            marginal_kld(o, s, subset, &binnings)
        })?;
        divergences.extend(per_subset);
    }
    if divergences.is_empty() {
        return Err(Error::Input(format!(
            "no table has {lambda} or more plain attributes"
        )));
    }
    Ok(divergences.iter().sum::<f64>() / divergences.len() as f64)
}

fn attribute_subsets(plain: &[usize], lambda: usize, seed: u64, table: &str) -> Vec<Vec<usize>> {
    let total = binomial(plain.len(), lambda);
    if total <= MAX_SUBSETS as u128 {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(lambda);
        enumerate_combinations(plain, lambda, 0, &mut current, &mut out);
        out
    } else {
        use rand::seq::SliceRandom;
        let mut rng = RngStream::new(seed)
            .child("kld_subsets")
            .child(table)
            .rng();
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(MAX_SUBSETS);
        while out.len() < MAX_SUBSETS {
            let mut subset: Vec<usize> = plain
                .choose_multiple(&mut rng, lambda)
                .copied()
                .collect();
            subset.sort_unstable();
            if seen.insert(subset.clone()) {
                out.push(subset);
            }
        }
        out
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn enumerate_combinations(
    items: &[usize],
    k: usize,
    start: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in start..items.len() {
        current.push(items[i]);
        enumerate_combinations(items, k, i + 1, current, out);
        current.pop();
    }
}

/// KLD of one marginal. Cells observed in neither table contribute only
/// through the smoothing mass, which is accounted for in closed form.
fn marginal_kld(
    orig: &ColumnTable,
    synth: &ColumnTable,
    subset: &[usize],
    binnings: &HashMap<usize, Binning>,
) -> Result<f64> {
    let mut cell_count: f64 = 1.0;
    for idx in subset {
        cell_count *= binnings[idx].bin_count() as f64;
    }
    let pack = |t: &ColumnTable| -> HashMap<u64, u64> {
        let mut counts = HashMap::new();
        for row in 0..t.row_count {
            let mut key: u64 = 0;
            for idx in subset {
                let bin = binnings[idx].index_of(&t.column(*idx).get(row));
                key = (key << 16) | bin as u64;
            }
            *counts.entry(key).or_insert(0) += 1;
        }
        counts
    };
    let p_counts = pack(orig);
    let q_counts = pack(synth);

    let z_p = orig.row_count as f64 + SMOOTHING * cell_count;
    let z_q = synth.row_count as f64 + SMOOTHING * cell_count;

    let mut kld = 0.0;
    let mut observed_cells = 0u64;
    for (key, &cp) in &p_counts {
        let cq = q_counts.get(key).copied().unwrap_or(0);
        let p = (cp as f64 + SMOOTHING) / z_p;
        let q = (cq as f64 + SMOOTHING) / z_q;
        kld += p * (p / q).ln();
        observed_cells += 1;
    }
    for (key, &cq) in &q_counts {
        if !p_counts.contains_key(key) {
            let p = SMOOTHING / z_p;
            let q = (cq as f64 + SMOOTHING) / z_q;
            kld += p * (p / q).ln();
            observed_cells += 1;
        }
    }
    // Cells with zero mass on both sides all contribute the same term.
    let untouched = cell_count - observed_cells as f64;
    if untouched > 0.0 {
        let p = SMOOTHING / z_p;
        let q = SMOOTHING / z_q;
        kld += untouched * p * (p / q).ln();
    }
    Ok(kld)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{
        AttrDomain, AttrKind, AttributeSpec, Column, DatabaseSchema, TableSchema,
    };

    fn single_cat_db(values: Vec<u32>, domain_size: u32) -> Database {
        let schema = TableSchema {
            name: "t".into(),
            attributes: vec![AttributeSpec::plain(
                "c",
                AttrKind::Categorical,
                AttrDomain::Categorical(
                    (0..domain_size).map(|i| format!("v{i}")).collect(),
                ),
            )],
            is_primary_private: true,
            max_multiplicity: 1,
        };
        Database {
            schema: DatabaseSchema {
                tables: vec![schema.clone()],
            },
            tables: vec![ColumnTable::new(schema, vec![Column::Cat(values)]).unwrap()],
        }
    }

    #[test]
    fn identity_divergence_is_negligible() {
        let db = single_cat_db(vec![0, 0, 1, 1, 1], 3);
        let v = kld_lambda(&db, &db, 1, 0).unwrap();
        assert!(v.abs() < 1e-9, "got {v}");
    }

    #[test]
    fn hand_computed_one_way_value() {
        // original [a,a,b,b] vs synthetic [a,a,a,b]:
        // 0.5 ln(0.5/0.75) + 0.5 ln(0.5/0.25) = 0.14384 nats.
        let orig = single_cat_db(vec![0, 0, 1, 1], 2);
        let synth = single_cat_db(vec![0, 0, 0, 1], 2);
        let v = kld_lambda(&orig, &synth, 1, 0).unwrap();
        assert!((v - 0.143841036).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn lambda_above_attribute_count_errors_when_all_skipped() {
        let db = single_cat_db(vec![0, 1], 2);
        assert!(kld_lambda(&db, &db, 2, 0).is_err());
    }

    #[test]
    fn divergence_is_nonnegative() {
        for seed in 0..5u64 {
            use rand::Rng;
            let mut rng = crate::dpcore::RngStream::new(seed).rng();
            let a: Vec<u32> = (0..50).map(|_| rng.gen_range(0..4)).collect();
            let b: Vec<u32> = (0..50).map(|_| rng.gen_range(0..4)).collect();
            let v = kld_lambda(&single_cat_db(a, 4), &single_cat_db(b, 4), 1, 0).unwrap();
            assert!(v >= -1e-12, "got {v}");
        }
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(15, 2), 105);
        assert_eq!(binomial(15, 4), 1365);
        assert_eq!(binomial(3, 5), 0);
    }
}
