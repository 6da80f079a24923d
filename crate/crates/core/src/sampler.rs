//! Synthesize tables from finished trees: histogram sampling at the leaves,
//! vertical/horizontal concatenation at the internal nodes, key regeneration,
//! and referential integrity. Pure post-processing; consumes no budget.

use std::collections::BTreeMap;

use rand::Rng;

use crate::datamodel::{
    AttrKind, AttrRole, Column, ColumnTable, Database, TableSchema,
};
use crate::dpcore::RngStream;
use crate::error::{Error, Result};
use crate::spn::SpnNode;
use crate::stats::Binning;

/// Sampled plain-attribute columns plus raw foreign-key draws (original
/// primary-key values, remapped later through the key map).
#[derive(Clone, Debug, Default)]
pub struct SampledColumns {
    pub attrs: BTreeMap<String, Column>,
    pub fk_draws: BTreeMap<String, Vec<i64>>,
}

/// Draws `target_rows` rows from the tree. Sum nodes round the target by
/// weight and concatenate; product nodes emit the same count on both sides.
pub fn sample_table(tree: &SpnNode, target_rows: usize, rng: &RngStream) -> Result<SampledColumns> {
    sample_node(tree, target_rows, rng)
}

fn sample_node(node: &SpnNode, n: usize, rng: &RngStream) -> Result<SampledColumns> {
    match node {
        SpnNode::Leaf {
            attr_name,
            histogram,
            ..
        } => {
            let binning = Binning::for_attribute(&histogram.attribute)?;
            let draws = draw_weighted(&histogram.counts, n, &mut rng.child("draw").rng())
                .map_err(|_| {
                    Error::Input(format!(
                        "leaf for `{attr_name}` has no bins to sample from"
                    ))
                })?;
            let mut r = rng.child("within").rng();
            let column = materialize_column(histogram.attribute.kind, &binning, &draws, &mut r);
            let mut out = SampledColumns::default();
            out.attrs.insert(attr_name.clone(), column);
            Ok(out)
        }
        SpnNode::FanoutLeaf { fanout, .. } => {
            let keys: Vec<i64> = fanout.entries.keys().copied().collect();
            let weights: Vec<f64> = fanout.entries.values().copied().collect();
            let draws = draw_weighted(&weights, n, &mut rng.child("draw").rng()).map_err(|_| {
                Error::Input(format!(
                    "fanout leaf for `{}` has no keys to sample from",
                    fanout.fk_attribute.name
                ))
            })?;
            let values = draws.iter().map(|&i| keys[i]).collect();
            let mut out = SampledColumns::default();
            out.fk_draws.insert(fanout.fk_attribute.name.clone(), values);
            Ok(out)
        }
        SpnNode::Sum {
            weight_left,
            left,
            right,
            ..
        } => {
            let n_left = ((n as f64 * weight_left).round() as usize).min(n);
            let n_right = n - n_left;
            let l = sample_node(left, n_left, &rng.child("L"))?;
            let r = sample_node(right, n_right, &rng.child("R"))?;
            concat_vertical(l, r)
        }
        SpnNode::Product { left, right, .. } => {
            let l = sample_node(left, n, &rng.child("L"))?;
            let r = sample_node(right, n, &rng.child("R"))?;
            merge_horizontal(l, r)
        }
    }
}

/// Weighted bin draws over clamped counts. An all-zero weight vector falls
/// back to the uniform distribution with a warning.
fn draw_weighted<R: Rng + ?Sized>(
    weights: &[f64],
    n: usize,
    rng: &mut R,
) -> std::result::Result<Vec<usize>, ()> {
    if weights.is_empty() {
        return Err(());
    }
    let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
    let uniform;
    let effective: &[f64] = if total > 0.0 {
        weights
    } else {
        log::warn!("degenerate all-zero weights; sampling uniformly over {} bins", weights.len());
        uniform = vec![1.0; weights.len()];
        &uniform
    };
    let total: f64 = effective.iter().map(|w| w.max(0.0)).sum();
    let mut cumulative = Vec::with_capacity(effective.len());
    let mut acc = 0.0;
    for w in effective {
        acc += w.max(0.0);
        cumulative.push(acc);
    }
    let draws = (0..n)
        .map(|_| {
            let x = rng.gen::<f64>() * total;
            cumulative.partition_point(|&c| c <= x).min(effective.len() - 1)
        })
        .collect();
    Ok(draws)
}

fn materialize_column<R: Rng + ?Sized>(
    kind: AttrKind,
    binning: &Binning,
    bin_draws: &[usize],
    rng: &mut R,
) -> Column {
    match kind {
        AttrKind::Categorical => Column::Cat(
            bin_draws
                .iter()
                .map(|&b| match binning.sample(b, rng) {
                    crate::datamodel::CellValue::Cat(c) => c,
                    _ => unreachable!(),
                })
                .collect(),
        ),
        AttrKind::Integer => Column::Int(
            bin_draws
                .iter()
                .map(|&b| match binning.sample(b, rng) {
                    crate::datamodel::CellValue::Int(v) => v,
                    _ => unreachable!(),
                })
                .collect(),
        ),
        AttrKind::Real => Column::Real(
            bin_draws
                .iter()
                .map(|&b| match binning.sample(b, rng) {
                    crate::datamodel::CellValue::Real(v) => v,
                    _ => unreachable!(),
                })
                .collect(),
        ),
    }
}

fn concat_vertical(mut a: SampledColumns, b: SampledColumns) -> Result<SampledColumns> {
    if a.attrs.keys().ne(b.attrs.keys()) || a.fk_draws.keys().ne(b.fk_draws.keys()) {
        return Err(Error::Input(
            "sum-node children cover different column sets".into(),
        ));
    }
    for (name, col) in b.attrs {
        match (a.attrs.get_mut(&name).unwrap(), col) {
            (Column::Cat(x), Column::Cat(y)) => x.extend(y),
            (Column::Int(x), Column::Int(y)) => x.extend(y),
            (Column::Real(x), Column::Real(y)) => x.extend(y),
            _ => return Err(Error::Input("column kind mismatch under sum node".into())),
        }
    }
    for (name, vals) in b.fk_draws {
        a.fk_draws.get_mut(&name).unwrap().extend(vals);
    }
    Ok(a)
}

fn merge_horizontal(mut a: SampledColumns, b: SampledColumns) -> Result<SampledColumns> {
    for (name, col) in b.attrs {
        if a.attrs.insert(name.clone(), col).is_some() {
            return Err(Error::Input(format!(
                "product-node children both emit column `{name}`"
            )));
        }
    }
    for (name, vals) in b.fk_draws {
        if a.fk_draws.insert(name.clone(), vals).is_some() {
            return Err(Error::Input(format!(
                "product-node children both emit foreign key `{name}`"
            )));
        }
    }
    Ok(a)
}

/// Rank map from original primary-key values to synthetic ids 1..n. Key
/// literals never leave the system; only their rank order survives.
#[derive(Clone, Debug)]
pub struct KeyMap {
    sorted_pks: Vec<i64>,
}

impl KeyMap {
    pub fn from_pk_column(values: &[i64]) -> Self {
        let mut sorted_pks = values.to_vec();
        sorted_pks.sort_unstable();
        KeyMap { sorted_pks }
    }

    pub fn synthetic_id(&self, original_pk: i64) -> Option<i64> {
        self.sorted_pks
            .binary_search(&original_pk)
            .ok()
            .map(|rank| rank as i64 + 1)
    }

    pub fn len(&self) -> usize {
        self.sorted_pks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_pks.is_empty()
    }
}

/// Samples every table to its original size, regenerates primary keys as
/// 1..n, and remaps foreign-key draws through the target's rank map.
/// Post-processing only: touches no ledger.
pub fn assemble_database(
    orig: &Database,
    trees: &BTreeMap<String, SpnNode>,
    rng: &RngStream,
) -> Result<Database> {
    let mut key_maps: BTreeMap<String, KeyMap> = BTreeMap::new();
    for table in &orig.tables {
        if let Some(pk_idx) = table.schema.pk_index() {
            let Column::Int(vals) = table.column(pk_idx) else {
                unreachable!()
            };
            key_maps.insert(table.schema.name.clone(), KeyMap::from_pk_column(vals));
        }
    }

    let mut tables = Vec::with_capacity(orig.tables.len());
    for table in &orig.tables {
        let name = &table.schema.name;
        let tree = trees
            .get(name)
            .ok_or_else(|| Error::Input(format!("no tree for table `{name}`")))?;
        let n = table.row_count;
        let sampled = sample_table(tree, n, &rng.child("table").child(name).child("sample"))?;
        tables.push(assemble_table(&table.schema, n, sampled, &key_maps)?);
    }

    let db = Database {
        schema: orig.schema.clone(),
        tables,
    };
    db.validate()?;
    Ok(db)
}

fn assemble_table(
    schema: &TableSchema,
    n: usize,
    mut sampled: SampledColumns,
    key_maps: &BTreeMap<String, KeyMap>,
) -> Result<ColumnTable> {
    let mut columns = Vec::with_capacity(schema.attributes.len());
    for attr in &schema.attributes {
        let column = match &attr.role {
            AttrRole::Plain => sampled.attrs.remove(&attr.name).ok_or_else(|| {
                Error::Input(format!(
                    "tree for `{}` emitted no column for attribute `{}`",
                    schema.name, attr.name
                ))
            })?,
            AttrRole::PrimaryKey => Column::Int((1..=n as i64).collect()),
            AttrRole::ForeignKey { target } => {
                let draws = sampled.fk_draws.remove(&attr.name).ok_or_else(|| {
                    Error::Input(format!(
                        "tree for `{}` has no fanout for foreign key `{}`",
                        schema.name, attr.name
                    ))
                })?;
                let key_map = key_maps.get(target).ok_or_else(|| {
                    Error::Input(format!("referenced table `{target}` has no primary key"))
                })?;
                let remapped = draws
                    .iter()
                    .map(|&pk| {
                        key_map.synthetic_id(pk).expect(
                            "fanout keys come from the referencing column, which referential \
                             integrity ties to existing primary keys",
                        )
                    })
                    .collect();
                Column::Int(remapped)
            }
        };
        columns.push(column);
    }
    ColumnTable::new(schema.clone(), columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{AttrDomain, AttributeSpec, IndexPartition};
    use crate::stats::{BinSpec, Histogram};

    fn point_leaf(attr: &str, idx: usize, value_bin: usize, n_bins: usize) -> SpnNode {
        let attribute = AttributeSpec::plain(
            attr,
            AttrKind::Integer,
            AttrDomain::Integer {
                lo: 0,
                hi: n_bins as i64 - 1,
            },
        );
        let bins = (0..n_bins)
            .map(|i| BinSpec::IntRange {
                lo: i as i64,
                hi: i as i64,
            })
            .collect();
        let mut counts = vec![0.0; n_bins];
        counts[value_bin] = 4.0;
        SpnNode::Leaf {
            attr_name: attr.into(),
            attr_index: idx,
            rows: vec![],
            epsilon: 1.0,
            histogram: Histogram {
                attribute,
                bins,
                counts,
            },
        }
    }

    #[test]
    fn point_mass_leaf_emits_constant_column() {
        let leaf = point_leaf("a", 0, 2, 4);
        let out = sample_table(&leaf, 4, &RngStream::new(1)).unwrap();
        assert_eq!(out.attrs["a"], Column::Int(vec![2, 2, 2, 2]));
    }

    #[test]
    fn sum_node_rounds_target_by_weight() {
        let tree = SpnNode::Sum {
            partition: IndexPartition::rows(vec![0, 1, 2], vec![3, 4], 5).unwrap(),
            weight_left: 0.6,
            left: Box::new(point_leaf("a", 0, 0, 2)),
            right: Box::new(point_leaf("a", 0, 1, 2)),
        };
        let out = sample_table(&tree, 10, &RngStream::new(2)).unwrap();
        let Column::Int(vals) = &out.attrs["a"] else {
            panic!()
        };
        assert_eq!(vals.len(), 10);
        assert_eq!(vals.iter().filter(|&&v| v == 0).count(), 6);
        assert_eq!(vals.iter().filter(|&&v| v == 1).count(), 4);
    }

    #[test]
    fn product_node_emits_rectangular_output() {
        let tree = SpnNode::Product {
            partition: IndexPartition::columns(vec![0], vec![1], 2).unwrap(),
            left: Box::new(point_leaf("a", 0, 1, 3)),
            right: Box::new(point_leaf("b", 1, 2, 3)),
        };
        let out = sample_table(&tree, 3, &RngStream::new(3)).unwrap();
        assert_eq!(out.attrs["a"], Column::Int(vec![1, 1, 1]));
        assert_eq!(out.attrs["b"], Column::Int(vec![2, 2, 2]));
    }

    #[test]
    fn all_zero_weights_fall_back_to_uniform() {
        let leaf = point_leaf("a", 0, 0, 3);
        let SpnNode::Leaf { mut histogram, .. } = leaf else {
            panic!()
        };
        histogram.counts = vec![0.0, 0.0, 0.0];
        let zeroed = SpnNode::Leaf {
            attr_name: "a".into(),
            attr_index: 0,
            rows: vec![],
            epsilon: 1.0,
            histogram,
        };
        let out = sample_table(&zeroed, 3000, &RngStream::new(4)).unwrap();
        let Column::Int(vals) = &out.attrs["a"] else {
            panic!()
        };
        for v in 0..3 {
            let f = vals.iter().filter(|&&x| x == v).count() as f64 / 3000.0;
            assert!((f - 1.0 / 3.0).abs() < 0.05, "freq {f}");
        }
    }

    #[test]
    fn key_map_ranks_sorted_pk_values() {
        let km = KeyMap::from_pk_column(&[30, 10, 20]);
        assert_eq!(km.synthetic_id(10), Some(1));
        assert_eq!(km.synthetic_id(20), Some(2));
        assert_eq!(km.synthetic_id(30), Some(3));
        assert_eq!(km.synthetic_id(99), None);
    }

    #[test]
    fn determinism_same_seed_same_sample() {
        let tree = SpnNode::Sum {
            partition: IndexPartition::rows(vec![0], vec![1], 2).unwrap(),
            weight_left: 0.5,
            left: Box::new(point_leaf("a", 0, 0, 4)),
            right: Box::new(point_leaf("a", 0, 3, 4)),
        };
        let a = sample_table(&tree, 100, &RngStream::new(9)).unwrap();
        let b = sample_table(&tree, 100, &RngStream::new(9)).unwrap();
        assert_eq!(a.attrs, b.attrs);
    }
}
