//! Bin layouts derived from declared attribute domains.
//!
//! Categorical attributes get one bin per domain value. Integer attributes
//! with at most 256 domain values get one bin per value, otherwise 256
//! equi-width ranges. Real attributes get 256 equi-width ranges over the
//! declared interval. Bins cover the domain exactly with no overlap.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::{AttrDomain, AttributeSpec, CellValue};
use crate::error::{Error, Result};

pub const MAX_BINS: usize = 256;

/// One bin of a histogram: a category code or a numeric interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BinSpec {
    Category { code: u32 },
    /// Inclusive integer range `[lo, hi]`.
    IntRange { lo: i64, hi: i64 },
    /// Real range `[lo, hi)`; the last bin of an attribute is closed at the
    /// domain's upper bound.
    RealRange { lo: f64, hi: f64 },
}

#[derive(Clone, Debug)]
pub struct Binning {
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Categorical {
        n: usize,
    },
    IntValues {
        lo: i64,
        n: usize,
    },
    /// Half-open edges, length n_bins + 1; bin i covers [edges[i], edges[i+1]).
    IntRanges {
        edges: Vec<i64>,
    },
    RealRanges {
        edges: Vec<f64>,
    },
}

impl Binning {
    pub fn for_attribute(attr: &AttributeSpec) -> Result<Self> {
        let domain = attr.domain.as_ref().ok_or_else(|| {
            Error::Input(format!(
                "attribute `{}` has no declared domain to bin",
                attr.name
            ))
        })?;
        let kind = match domain {
            AttrDomain::Categorical(values) => Kind::Categorical { n: values.len() },
            AttrDomain::Integer { lo, hi } => {
                let span = (*hi as i128) - (*lo as i128) + 1;
                if span <= MAX_BINS as i128 {
                    Kind::IntValues {
                        lo: *lo,
                        n: span as usize,
                    }
                } else {
                    let mut edges = Vec::with_capacity(MAX_BINS + 1);
                    for i in 0..=MAX_BINS {
                        let offset = span * i as i128 / MAX_BINS as i128;
                        edges.push((*lo as i128 + offset) as i64);
                    }
                    Kind::IntRanges { edges }
                }
            }
            AttrDomain::Real { lo, hi } => {
                let width = (hi - lo) / MAX_BINS as f64;
                let mut edges = Vec::with_capacity(MAX_BINS + 1);
                for i in 0..MAX_BINS {
                    edges.push(lo + width * i as f64);
                }
                edges.push(*hi);
                Kind::RealRanges { edges }
            }
        };
        Ok(Binning { kind })
    }

    pub fn bin_count(&self) -> usize {
        match &self.kind {
            Kind::Categorical { n } => *n,
            Kind::IntValues { n, .. } => *n,
            Kind::IntRanges { edges } => edges.len() - 1,
            Kind::RealRanges { edges } => edges.len() - 1,
        }
    }

    pub fn index_of(&self, value: &CellValue) -> usize {
        match (&self.kind, value) {
            (Kind::Categorical { n }, CellValue::Cat(c)) => (*c as usize).min(n - 1),
            (Kind::IntValues { lo, n }, CellValue::Int(v)) => {
                ((*v as i128 - *lo as i128).max(0) as usize).min(n - 1)
            }
            (Kind::IntRanges { edges }, CellValue::Int(v)) => {
                // Last edge index with edges[i] <= v.
                let pos = edges[1..].partition_point(|e| *e <= *v);
                pos.min(edges.len() - 2)
            }
            (Kind::RealRanges { edges }, CellValue::Real(x)) => {
                let pos = edges[1..].partition_point(|e| *e <= *x);
                pos.min(edges.len() - 2)
            }
            _ => panic!("cell kind does not match binning"),
        }
    }

    pub fn spec(&self, i: usize) -> BinSpec {
        match &self.kind {
            Kind::Categorical { .. } => BinSpec::Category { code: i as u32 },
            Kind::IntValues { lo, .. } => BinSpec::IntRange {
                lo: lo + i as i64,
                hi: lo + i as i64,
            },
            Kind::IntRanges { edges } => BinSpec::IntRange {
                lo: edges[i],
                hi: edges[i + 1] - 1,
            },
            Kind::RealRanges { edges } => BinSpec::RealRange {
                lo: edges[i],
                hi: edges[i + 1],
            },
        }
    }

    /// Draws a value from bin `i`: the category or value itself for point
    /// bins, uniform within the interval for range bins.
    pub fn sample<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> CellValue {
        match &self.kind {
            Kind::Categorical { .. } => CellValue::Cat(i as u32),
            Kind::IntValues { lo, .. } => CellValue::Int(lo + i as i64),
            Kind::IntRanges { edges } => {
                let (lo, hi) = (edges[i], edges[i + 1]);
                CellValue::Int(rng.gen_range(lo..hi))
            }
            Kind::RealRanges { edges } => {
                let (lo, hi) = (edges[i], edges[i + 1]);
                if hi > lo {
                    CellValue::Real(rng.gen_range(lo..hi))
                } else {
                    CellValue::Real(lo)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::AttrKind;
    use crate::dpcore::RngStream;

    fn int_attr(lo: i64, hi: i64) -> AttributeSpec {
        AttributeSpec::plain("a", AttrKind::Integer, AttrDomain::Integer { lo, hi })
    }

    #[test]
    fn small_integer_domain_gets_value_bins() {
        let b = Binning::for_attribute(&int_attr(1, 10)).unwrap();
        assert_eq!(b.bin_count(), 10);
        assert_eq!(b.index_of(&CellValue::Int(1)), 0);
        assert_eq!(b.index_of(&CellValue::Int(10)), 9);
        assert_eq!(b.spec(4), BinSpec::IntRange { lo: 5, hi: 5 });
    }

    #[test]
    fn wide_integer_domain_gets_256_ranges() {
        let b = Binning::for_attribute(&int_attr(0, 99_999)).unwrap();
        assert_eq!(b.bin_count(), 256);
        assert_eq!(b.index_of(&CellValue::Int(0)), 0);
        assert_eq!(b.index_of(&CellValue::Int(99_999)), 255);
        // Every value lands in exactly the bin whose range contains it.
        let mut rng = RngStream::new(1).rng();
        for _ in 0..500 {
            let v: i64 = rng.gen_range(0..=99_999);
            let i = b.index_of(&CellValue::Int(v));
            match b.spec(i) {
                BinSpec::IntRange { lo, hi } => assert!(lo <= v && v <= hi),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn real_domain_covers_edges() {
        let attr = AttributeSpec::plain("x", AttrKind::Real, AttrDomain::Real { lo: 0.0, hi: 1.0 });
        let b = Binning::for_attribute(&attr).unwrap();
        assert_eq!(b.bin_count(), 256);
        assert_eq!(b.index_of(&CellValue::Real(0.0)), 0);
        assert_eq!(b.index_of(&CellValue::Real(1.0)), 255);
        let mid = b.index_of(&CellValue::Real(0.5));
        match b.spec(mid) {
            BinSpec::RealRange { lo, hi } => assert!(lo <= 0.5 && 0.5 < hi),
            _ => unreachable!(),
        }
    }

    #[test]
    fn sampled_values_stay_in_bin() {
        let b = Binning::for_attribute(&int_attr(0, 99_999)).unwrap();
        let mut rng = RngStream::new(2).rng();
        for i in [0usize, 17, 128, 255] {
            for _ in 0..50 {
                let v = b.sample(i, &mut rng);
                assert_eq!(b.index_of(&v), i);
            }
        }
    }

    #[test]
    fn degenerate_real_domain() {
        let attr = AttributeSpec::plain("x", AttrKind::Real, AttrDomain::Real { lo: 2.0, hi: 2.0 });
        let b = Binning::for_attribute(&attr).unwrap();
        assert_eq!(b.index_of(&CellValue::Real(2.0)), 255);
        let mut rng = RngStream::new(3).rng();
        assert_eq!(b.sample(0, &mut rng), CellValue::Real(2.0));
    }
}
