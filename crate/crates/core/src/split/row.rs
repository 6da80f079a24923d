//! Noisy 2-means row partitioning.
//!
//! Starting from a uniform half-split, each iteration recomputes cluster
//! centers, perturbs every row's center-distance difference with Laplace
//! noise, and reassigns by sign. Distances are the sum over attributes of L1
//! on domain-normalized numerics and 0/1 mismatch against the cluster mode on
//! categoricals, so each attribute contributes at most 1 and the difference
//! has sensitivity 2m for m attributes. After the iterations both sides are
//! topped up to the minimum size by moving uniformly random rows (a
//! post-processing step, no budget).

use rand::seq::SliceRandom;
use rand::Rng;

use crate::datamodel::{AttrDomain, Column, ColumnTable, IndexPartition};
use crate::dpcore::{laplace_noise, Budget, BudgetLedger, RngStream, Scope};
use crate::error::{Error, Result};
use crate::parallel;
use crate::split::SplitConfig;

enum FeatureColumn {
    /// Domain-normalized numeric values in [0, 1].
    Numeric(Vec<f64>),
    /// Category codes plus the domain size.
    Categorical(Vec<u32>, usize),
}

enum Center {
    Numeric(f64),
    Mode(u32),
}

pub fn row_split(
    t: &ColumnTable,
    budget: Budget,
    cfg: &SplitConfig,
    rng: &RngStream,
    ledger: &mut BudgetLedger,
    scope: &Scope,
) -> Result<IndexPartition> {
    let n = t.row_count;
    let beta = cfg.min_side as usize;
    if n < 2 * beta {
        return Err(Error::Input(format!(
            "row split needs at least {} rows, table has {n}",
            2 * beta
        )));
    }
    if budget.is_zero() {
        return Err(Error::Budget("row split refuses epsilon = 0".into()));
    }
    if t.attr_count() == 0 {
        return Err(Error::Input("row split needs at least one attribute".into()));
    }

    let features = feature_columns(t)?;
    let m = features.len() as f64;
    // Difference of two distances, each in [0, m].
    let diff_sensitivity = 2.0 * m;
    let noise_scale = diff_sensitivity * cfg.iterations as f64 / budget.epsilon();

    let mut in_left = initial_half_split(n, &mut rng.child("init").rng());

    for iter in 0..cfg.iterations {
        let mut iter_rng = rng.child(&format!("iter{iter}")).rng();
        let left_center = cluster_center(&features, &in_left, true, n, &mut iter_rng);
        let right_center = cluster_center(&features, &in_left, false, n, &mut iter_rng);
        let diffs = parallel::map_indices(n, |i| {
            row_distance(&features, &left_center, i) - row_distance(&features, &right_center, i)
        });
        for (i, &d) in diffs.iter().enumerate() {
            in_left[i] = d + laplace_noise(&mut iter_rng, noise_scale) <= 0.0;
        }
    }

    enforce_minimum_sides(&mut in_left, beta, &mut rng.child("adjust").rng());

    let left: Vec<usize> = (0..n).filter(|&i| in_left[i]).collect();
    let right: Vec<usize> = (0..n).filter(|&i| !in_left[i]).collect();
    ledger.record(scope, "row_split", budget.epsilon());
    IndexPartition::rows(left, right, n)
}

/// Uniform half-split: exactly floor(n/2) rows on the left.
pub(crate) fn initial_half_split<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<bool> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut in_left = vec![false; n];
    for &i in &order[..n / 2] {
        in_left[i] = true;
    }
    in_left
}

fn feature_columns(t: &ColumnTable) -> Result<Vec<FeatureColumn>> {
    t.schema
        .attributes
        .iter()
        .zip(&t.columns)
        .map(|(attr, col)| {
            let domain = attr.domain.as_ref().ok_or_else(|| {
                Error::Input(format!(
                    "attribute `{}` has no domain; key columns cannot be clustered",
                    attr.name
                ))
            })?;
            Ok(match (domain, col) {
                (AttrDomain::Categorical(values), Column::Cat(codes)) => {
                    FeatureColumn::Categorical(codes.clone(), values.len())
                }
                (AttrDomain::Integer { lo, hi }, Column::Int(vals)) => {
                    let width = (*hi - *lo) as f64;
                    FeatureColumn::Numeric(
                        vals.iter()
                            .map(|&v| {
                                if width > 0.0 {
                                    (v - lo) as f64 / width
                                } else {
                                    0.0
                                }
                            })
                            .collect(),
                    )
                }
                (AttrDomain::Real { lo, hi }, Column::Real(vals)) => {
                    let width = hi - lo;
                    FeatureColumn::Numeric(
                        vals.iter()
                            .map(|&v| if width > 0.0 { (v - lo) / width } else { 0.0 })
                            .collect(),
                    )
                }
                _ => unreachable!("table construction enforces kind/storage match"),
            })
        })
        .collect()
}

/// Per-attribute center of one side: mean for numerics, mode for
/// categoricals. An empty side gets the values of a uniformly random row.
fn cluster_center<R: Rng + ?Sized>(
    features: &[FeatureColumn],
    in_left: &[bool],
    left: bool,
    n: usize,
    rng: &mut R,
) -> Vec<Center> {
    let count = in_left.iter().filter(|&&b| b == left).count();
    if count == 0 {
        let pick = rng.gen_range(0..n);
        return features
            .iter()
            .map(|f| match f {
                FeatureColumn::Numeric(v) => Center::Numeric(v[pick]),
                FeatureColumn::Categorical(codes, _) => Center::Mode(codes[pick]),
            })
            .collect();
    }
    features
        .iter()
        .map(|f| match f {
            FeatureColumn::Numeric(v) => {
                let sum: f64 = v
                    .iter()
                    .zip(in_left)
                    .filter(|(_, &b)| b == left)
                    .map(|(x, _)| *x)
                    .sum();
                Center::Numeric(sum / count as f64)
            }
            FeatureColumn::Categorical(codes, n_values) => {
                let mut counts = vec![0usize; *n_values];
                for (c, &b) in codes.iter().zip(in_left) {
                    if b == left {
                        counts[*c as usize] += 1;
                    }
                }
                let mode = counts
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                    .map(|(i, _)| i as u32)
                    .unwrap_or(0);
                Center::Mode(mode)
            }
        })
        .collect()
}

fn row_distance(features: &[FeatureColumn], center: &[Center], row: usize) -> f64 {
    features
        .iter()
        .zip(center)
        .map(|(f, c)| match (f, c) {
            (FeatureColumn::Numeric(v), Center::Numeric(m)) => (v[row] - m).abs(),
            (FeatureColumn::Categorical(codes, _), Center::Mode(m)) => {
                if codes[row] == *m {
                    0.0
                } else {
                    1.0
                }
            }
            _ => unreachable!(),
        })
        .sum()
}

fn enforce_minimum_sides<R: Rng + ?Sized>(in_left: &mut [bool], beta: usize, rng: &mut R) {
    loop {
        let left_count = in_left.iter().filter(|&&b| b).count();
        let right_count = in_left.len() - left_count;
        let (short, want) = if left_count < beta {
            (true, beta - left_count)
        } else if right_count < beta {
            (false, beta - right_count)
        } else {
            return;
        };
        let donors: Vec<usize> = (0..in_left.len())
            .filter(|&i| in_left[i] != short)
            .collect();
        for &i in donors.choose_multiple(rng, want) {
            in_left[i] = short;
        }
    }
}
