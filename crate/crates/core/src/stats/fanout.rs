//! Foreign-key fanout tables: per referenced primary key, how many rows of a
//! subset carry that key.

use std::collections::BTreeMap;

use crate::datamodel::{AttributeSpec, Column, ColumnTable};
use crate::error::{Error, Result};

/// Counts keyed by referenced primary-key value. The key set is the set of
/// distinct values of the whole foreign-key column, so every leaf of a table
/// shares the same key set and disjoint leaf counts add up to the whole-table
/// fanout.
#[derive(Clone, Debug, PartialEq)]
pub struct FanoutTable {
    pub fk_attribute: AttributeSpec,
    pub entries: BTreeMap<i64, f64>,
}

impl FanoutTable {
    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn clamp_non_negative(&mut self) {
        for c in self.entries.values_mut() {
            if *c < 0.0 {
                *c = 0.0;
            }
        }
    }
}

pub fn build_fanout(t: &ColumnTable, fk_name: &str, row_subset: &[usize]) -> Result<FanoutTable> {
    let idx = t
        .schema
        .attr_index(fk_name)
        .ok_or_else(|| Error::Input(format!("no attribute `{fk_name}`")))?;
    let attr = &t.schema.attributes[idx];
    if attr.fk_target().is_none() {
        return Err(Error::Input(format!(
            "attribute `{fk_name}` is not a foreign key"
        )));
    }
    let Column::Int(values) = t.column(idx) else {
        return Err(Error::Input(format!(
            "foreign key `{fk_name}` must be an integer column"
        )));
    };
    let mut entries: BTreeMap<i64, f64> = values.iter().map(|&v| (v, 0.0)).collect();
    for &row in row_subset {
        let v = values
            .get(row)
            .ok_or_else(|| Error::Input(format!("row index {row} out of range")))?;
        *entries.get_mut(v).expect("key present by construction") += 1.0;
    }
    Ok(FanoutTable {
        fk_attribute: attr.clone(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{AttrDomain, AttrKind, TableSchema};

    fn person_table() -> ColumnTable {
        let schema = TableSchema {
            name: "person".into(),
            attributes: vec![
                AttributeSpec::plain("age", AttrKind::Integer, AttrDomain::Integer { lo: 1, hi: 100 }),
                AttributeSpec::foreign_key("h_id", "household"),
            ],
            is_primary_private: false,
            max_multiplicity: 3,
        };
        ColumnTable::new(
            schema,
            vec![
                Column::Int(vec![27, 25, 30, 32, 5, 46]),
                Column::Int(vec![1, 1, 2, 2, 2, 3]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn full_table_fanout() {
        let t = person_table();
        let all: Vec<usize> = (0..t.row_count).collect();
        let f = build_fanout(&t, "h_id", &all).unwrap();
        assert_eq!(f.entries[&1], 2.0);
        assert_eq!(f.entries[&2], 3.0);
        assert_eq!(f.entries[&3], 1.0);
        assert_eq!(f.total(), 6.0);
    }

    #[test]
    fn empty_subset_gives_all_zero_entries() {
        let t = person_table();
        let f = build_fanout(&t, "h_id", &[]).unwrap();
        assert_eq!(f.entries.len(), 3);
        assert!(f.entries.values().all(|&c| c == 0.0));
    }

    #[test]
    fn partial_subset_counts_only_selected_rows() {
        let t = person_table();
        let f = build_fanout(&t, "h_id", &[0, 1]).unwrap();
        assert_eq!(f.entries[&1], 2.0);
        assert_eq!(f.entries[&2], 0.0);
        assert_eq!(f.entries[&3], 0.0);
        assert_eq!(f.total(), 2.0);
    }

    #[test]
    fn disjoint_subsets_add_to_whole() {
        let t = person_table();
        let a = build_fanout(&t, "h_id", &[0, 2, 4]).unwrap();
        let b = build_fanout(&t, "h_id", &[1, 3, 5]).unwrap();
        let whole = build_fanout(&t, "h_id", &(0..t.row_count).collect::<Vec<_>>()).unwrap();
        for (k, total) in &whole.entries {
            assert_eq!(a.entries[k] + b.entries[k], *total);
        }
    }

    #[test]
    fn non_fk_attribute_rejected() {
        let t = person_table();
        assert!(build_fanout(&t, "age", &[]).is_err());
    }
}
