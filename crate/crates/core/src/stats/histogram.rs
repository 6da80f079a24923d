//! Single-attribute histograms over declared-domain bins.

use crate::datamodel::{AttributeSpec, ColumnTable};
use crate::error::{Error, Result};
use crate::stats::binning::{BinSpec, Binning};

/// Counts may be non-integral after perturbation; they are clamped at zero
/// before use as sampling weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub attribute: AttributeSpec,
    pub bins: Vec<BinSpec>,
    pub counts: Vec<f64>,
}

impl Histogram {
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Zero out negative counts (post-processing; consumes no budget).
    pub fn clamp_non_negative(&mut self) {
        for c in &mut self.counts {
            if *c < 0.0 {
                *c = 0.0;
            }
        }
    }
}

/// Exact bin counts for a single-attribute table. Every row lands in exactly
/// one bin, so the counts sum to the row count.
pub fn build_histogram(t: &ColumnTable) -> Result<Histogram> {
    if t.attr_count() != 1 {
        return Err(Error::Input(format!(
            "histogram needs a single-attribute table, got {} attributes",
            t.attr_count()
        )));
    }
    let attribute = t.schema.attributes[0].clone();
    let binning = Binning::for_attribute(&attribute)?;
    let mut counts = vec![0.0; binning.bin_count()];
    let col = t.column(0);
    for row in 0..t.row_count {
        counts[binning.index_of(&col.get(row))] += 1.0;
    }
    let bins = (0..binning.bin_count()).map(|i| binning.spec(i)).collect();
    Ok(Histogram {
        attribute,
        bins,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{AttrDomain, AttrKind, Column, TableSchema};

    fn one_col(attr: AttributeSpec, col: Column) -> ColumnTable {
        let schema = TableSchema {
            name: "t".into(),
            attributes: vec![attr],
            is_primary_private: true,
            max_multiplicity: 1,
        };
        ColumnTable::new(schema, vec![col]).unwrap()
    }

    #[test]
    fn categorical_counts() {
        let t = one_col(
            AttributeSpec::plain(
                "c",
                AttrKind::Categorical,
                AttrDomain::Categorical(vec!["a".into(), "b".into(), "c".into()]),
            ),
            Column::Cat(vec![0, 0, 1]),
        );
        let h = build_histogram(&t).unwrap();
        assert_eq!(h.counts, vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn empty_column_is_all_zero() {
        let t = one_col(
            AttributeSpec::plain(
                "c",
                AttrKind::Categorical,
                AttrDomain::Categorical(vec!["a".into(), "b".into()]),
            ),
            Column::Cat(vec![]),
        );
        let h = build_histogram(&t).unwrap();
        assert!(h.counts.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn small_integer_domain_one_bin_per_value() {
        let t = one_col(
            AttributeSpec::plain("v", AttrKind::Integer, AttrDomain::Integer { lo: 1, hi: 10 }),
            Column::Int(vec![1, 5, 10]),
        );
        let h = build_histogram(&t).unwrap();
        assert_eq!(h.bins.len(), 10);
        assert_eq!(h.counts[0], 1.0);
        assert_eq!(h.counts[4], 1.0);
        assert_eq!(h.counts[9], 1.0);
        assert_eq!(h.total(), 3.0);
    }

    #[test]
    fn multi_attribute_input_rejected() {
        let schema = TableSchema {
            name: "t".into(),
            attributes: vec![
                AttributeSpec::plain("a", AttrKind::Integer, AttrDomain::Integer { lo: 0, hi: 1 }),
                AttributeSpec::plain("b", AttrKind::Integer, AttrDomain::Integer { lo: 0, hi: 1 }),
            ],
            is_primary_private: true,
            max_multiplicity: 1,
        };
        let t = ColumnTable::new(
            schema,
            vec![Column::Int(vec![0]), Column::Int(vec![1])],
        )
        .unwrap();
        assert!(build_histogram(&t).is_err());
    }

    #[test]
    fn clamp_zeroes_negatives() {
        let t = one_col(
            AttributeSpec::plain("v", AttrKind::Integer, AttrDomain::Integer { lo: 0, hi: 2 }),
            Column::Int(vec![0, 1]),
        );
        let mut h = build_histogram(&t).unwrap();
        h.counts[0] = -3.5;
        h.clamp_non_negative();
        assert_eq!(h.counts[0], 0.0);
        assert_eq!(h.counts[1], 1.0);
    }
}
