//! Empirical joint entropy, normalized mutual information, and the
//! sensitivity bound used by the column-split mechanism.
//!
//! A row's value is the full tuple across all columns of the (sub)table.
//! Grouping identical tuples uses iterative partition refinement with exact
//! 64-bit keys per step, so no hash collisions can merge distinct tuples.

use std::collections::HashMap;

use crate::datamodel::{Axis, Column, ColumnTable, IndexPartition};
use crate::error::{Error, Result};

/// Sizes of the groups of identical tuples over the given columns.
fn group_sizes(t: &ColumnTable, cols: &[usize]) -> Vec<usize> {
    let n = t.row_count;
    if n == 0 {
        return Vec::new();
    }
    let mut gid: Vec<u32> = vec![0; n];
    let mut group_count: u32 = 1;
    for &c in cols {
        let codes = column_codes(t.column(c));
        let mut remap: HashMap<u64, u32> = HashMap::with_capacity(group_count as usize);
        let mut next: u32 = 0;
        for i in 0..n {
            let key = ((gid[i] as u64) << 32) | codes[i] as u64;
            let id = *remap.entry(key).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            gid[i] = id;
        }
        group_count = next;
    }
    let mut sizes = vec![0usize; group_count as usize];
    for &g in &gid {
        sizes[g as usize] += 1;
    }
    sizes
}

/// Dictionary codes for a column: equal cells share a code.
fn column_codes(col: &Column) -> Vec<u32> {
    match col {
        Column::Cat(v) => v.clone(),
        Column::Int(v) => dictionary(v.iter().map(|&x| x as u64)),
        Column::Real(v) => dictionary(v.iter().map(|&x| x.to_bits())),
    }
}

fn dictionary(values: impl Iterator<Item = u64>) -> Vec<u32> {
    let mut map: HashMap<u64, u32> = HashMap::new();
    let mut next: u32 = 0;
    values
        .map(|v| {
            *map.entry(v).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

fn entropy_from_sizes(sizes: &[usize], n: usize) -> f64 {
    let n = n as f64;
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Joint empirical entropy of the table's rows, in bits.
pub fn entropy(t: &ColumnTable) -> Result<f64> {
    if t.row_count == 0 {
        return Err(Error::Input("entropy of an empty table is undefined".into()));
    }
    let cols: Vec<usize> = (0..t.attr_count()).collect();
    Ok(entropy_from_sizes(&group_sizes(t, &cols), t.row_count))
}

pub(crate) fn entropy_of_columns(t: &ColumnTable, cols: &[usize]) -> Result<f64> {
    if t.row_count == 0 {
        return Err(Error::Input("entropy of an empty table is undefined".into()));
    }
    Ok(entropy_from_sizes(&group_sizes(t, cols), t.row_count))
}

/// Normalized mutual information between the two column groups of a
/// partition: (H(left) + H(right) - H(joint)) / log2(row count).
pub fn nmi(t: &ColumnTable, p: &IndexPartition) -> Result<f64> {
    if p.axis() != Axis::Columns {
        return Err(Error::Partition("nmi expects a column partition".into()));
    }
    if t.row_count < 2 {
        return Err(Error::Input(
            "nmi needs at least two rows (log2 of the row count must be positive)".into(),
        ));
    }
    if let Some(&bad) = p
        .left()
        .iter()
        .chain(p.right())
        .find(|&&c| c >= t.attr_count())
    {
        return Err(Error::Partition(format!(
            "column index {bad} out of range for {} attributes",
            t.attr_count()
        )));
    }
    let h_left = entropy_of_columns(t, p.left())?;
    let h_right = entropy_of_columns(t, p.right())?;
    let cols: Vec<usize> = (0..t.attr_count()).collect();
    let h_joint = entropy_of_columns(t, &cols)?;
    Ok((h_left + h_right - h_joint) / (t.row_count as f64).log2())
}

/// Sensitivity bound on NMI under single-record replacement.
///
/// Replacing one of n rows moves at most 1/n of the empirical mass, which
/// changes each of the three entropy terms by at most
/// dH(n) = (2/n) log2 n + 2/(n ln 2); the normalizer log2 n is fixed. The
/// analytic bound 3 dH(n)/log2 n blows up for tiny n, so it is capped at the
/// trivial bound 3.
pub fn nmi_sensitivity(row_count: usize) -> Result<f64> {
    if row_count < 2 {
        return Err(Error::Input("nmi sensitivity needs at least two rows".into()));
    }
    let n = row_count as f64;
    let log2n = n.log2();
    let dh = (2.0 / n) * log2n + 2.0 / (n * std::f64::consts::LN_2);
    Ok((3.0 * dh / log2n).min(3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{AttrDomain, AttrKind, AttributeSpec, TableSchema};

    pub(crate) fn cat_table(cols: Vec<Vec<u32>>) -> ColumnTable {
        let n_vals = cols
            .iter()
            .flat_map(|c| c.iter())
            .copied()
            .max()
            .unwrap_or(0)
            + 1;
        let domain: Vec<String> = (0..n_vals.max(2)).map(|i| format!("v{i}")).collect();
        let schema = TableSchema {
            name: "t".into(),
            attributes: (0..cols.len())
                .map(|i| {
                    AttributeSpec::plain(
                        &format!("c{i}"),
                        AttrKind::Categorical,
                        AttrDomain::Categorical(domain.clone()),
                    )
                })
                .collect(),
            is_primary_private: true,
            max_multiplicity: 1,
        };
        let columns = cols.into_iter().map(Column::Cat).collect();
        ColumnTable::new(schema, columns).unwrap()
    }

    #[test]
    fn uniform_two_values_is_one_bit() {
        let t = cat_table(vec![vec![0, 0, 1, 1]]);
        assert!((entropy(&t).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_mass_is_zero() {
        let t = cat_table(vec![vec![0, 0, 0, 0]]);
        assert_eq!(entropy(&t).unwrap(), 0.0);
    }

    #[test]
    fn four_distinct_tuples_are_two_bits() {
        let t = cat_table(vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1]]);
        assert!((entropy(&t).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_table_rejected() {
        let t = cat_table(vec![vec![]]);
        assert!(entropy(&t).is_err());
    }

    #[test]
    fn nmi_of_independent_columns_is_zero() {
        let t = cat_table(vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1]]);
        let p = IndexPartition::columns(vec![0], vec![1], 2).unwrap();
        assert!(nmi(&t, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn nmi_of_duplicated_column_is_half() {
        let t = cat_table(vec![vec![0, 0, 1, 1], vec![0, 0, 1, 1]]);
        let p = IndexPartition::columns(vec![0], vec![1], 2).unwrap();
        assert!((nmi(&t, &p).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn nmi_symmetric_in_sides() {
        let t = cat_table(vec![vec![0, 1, 1, 0, 1], vec![1, 1, 0, 0, 0], vec![0, 0, 1, 1, 0]]);
        let p = IndexPartition::columns(vec![0, 2], vec![1], 3).unwrap();
        let a = nmi(&t, &p).unwrap();
        let b = nmi(&t, &p.swapped()).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn nmi_with_constant_side_is_zero() {
        let t = cat_table(vec![vec![0, 0, 0, 0], vec![0, 1, 0, 1]]);
        let p = IndexPartition::columns(vec![0], vec![1], 2).unwrap();
        assert!(nmi(&t, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn single_row_table_rejected() {
        let t = cat_table(vec![vec![0], vec![1]]);
        let p = IndexPartition::columns(vec![0], vec![1], 2).unwrap();
        assert!(nmi(&t, &p).is_err());
    }

    #[test]
    fn sensitivity_small_n_hits_cap() {
        // n = 2: 3 * (1 + 1/ln 2) would be about 7.33, capped at 3.
        assert_eq!(nmi_sensitivity(2).unwrap(), 3.0);
    }

    #[test]
    fn sensitivity_large_n_matches_formula() {
        let v = nmi_sensitivity(10_000).unwrap();
        assert!((v - 6.6514e-4).abs() < 1e-7, "got {v}");
    }

    #[test]
    fn sensitivity_rejects_tiny_tables() {
        assert!(nmi_sensitivity(1).is_err());
    }

    #[test]
    fn mixed_kind_tuples_group_exactly() {
        use crate::datamodel::Column;
        let schema = TableSchema {
            name: "t".into(),
            attributes: vec![
                AttributeSpec::plain("i", AttrKind::Integer, AttrDomain::Integer { lo: 0, hi: 9 }),
                AttributeSpec::plain("x", AttrKind::Real, AttrDomain::Real { lo: 0.0, hi: 1.0 }),
            ],
            is_primary_private: true,
            max_multiplicity: 1,
        };
        let t = ColumnTable::new(
            schema,
            vec![
                Column::Int(vec![1, 1, 2, 1]),
                Column::Real(vec![0.5, 0.5, 0.5, 0.25]),
            ],
        )
        .unwrap();
        // Tuples: (1,.5) x2, (2,.5), (1,.25) -> H = 1.5 bits.
        assert!((entropy(&t).unwrap() - 1.5).abs() < 1e-12);
    }
}
