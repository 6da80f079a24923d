//! Private tree construction per table, fanout augmentation, budget
//! composition, and serialization.

mod build;
mod codec;
mod compose;
mod fanout;
mod node;
mod planning;

pub use build::{priv_spn, SpnParams};
pub use codec::{deserialize_spn, serialize_spn, SpnDocument, FORMAT_VERSION};
pub use compose::{composed_fanout_epsilon, composed_spn_epsilon, leaf_budgets};
pub use fanout::priv_fanout;
pub use node::{NodeCounts, SpnNode};
pub use planning::{planning, scale, OpChoice, PlanningOutcome};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{
        AttrDomain, AttrKind, AttributeSpec, Column, ColumnTable, TableSchema,
    };
    use crate::dpcore::{Budget, BudgetLedger, RngStream};
    use rand::Rng;

    fn random_table(rows: usize, attrs: usize, seed: u64) -> ColumnTable {
        let schema = TableSchema {
            name: "t".into(),
            attributes: (0..attrs)
                .map(|i| {
                    AttributeSpec::plain(
                        &format!("a{i}"),
                        AttrKind::Integer,
                        AttrDomain::Integer { lo: 0, hi: 7 },
                    )
                })
                .collect(),
            is_primary_private: true,
            max_multiplicity: 1,
        };
        let mut rng = RngStream::new(seed).child("data").rng();
        let columns = (0..attrs)
            .map(|_| Column::Int((0..rows).map(|_| rng.gen_range(0..8)).collect()))
            .collect();
        ColumnTable::new(schema, columns).unwrap()
    }

    fn params(beta: u64) -> SpnParams {
        SpnParams {
            beta,
            ..SpnParams::default()
        }
    }

    #[test]
    fn single_attribute_yields_one_perturbed_leaf() {
        let t = random_table(30, 1, 1);
        let mut ledger = BudgetLedger::new();
        let tree = priv_spn(
            &t,
            Budget::new(1.0).unwrap(),
            &params(10),
            &RngStream::new(1),
            &mut ledger,
        )
        .unwrap();
        match &tree {
            SpnNode::Leaf {
                epsilon, histogram, ..
            } => {
                assert_eq!(*epsilon, 1.0);
                assert_eq!(histogram.counts.len(), 8);
            }
            other => panic!("expected leaf, got {}", other.kind_name()),
        }
        assert_eq!(ledger.len(), 1);
        assert_eq!(ledger.entries()[0].mechanism, "histogram");
    }

    #[test]
    fn small_two_attribute_table_is_free_product_of_leaves() {
        // Rows below 2 * beta force a product; with two attributes the split
        // itself costs nothing and each leaf gets half the budget.
        let t = random_table(150, 2, 2);
        let mut ledger = BudgetLedger::new();
        let tree = priv_spn(
            &t,
            Budget::new(2.0).unwrap(),
            &params(100),
            &RngStream::new(2),
            &mut ledger,
        )
        .unwrap();
        match &tree {
            SpnNode::Product { left, right, .. } => {
                for child in [left.as_ref(), right.as_ref()] {
                    match child {
                        SpnNode::Leaf { epsilon, .. } => {
                            assert!((epsilon - 1.0).abs() < 1e-12)
                        }
                        other => panic!("expected leaf, got {}", other.kind_name()),
                    }
                }
            }
            other => panic!("expected product, got {}", other.kind_name()),
        }
        let col_split_spend: f64 = ledger
            .entries()
            .iter()
            .filter(|e| e.mechanism == "col_split")
            .map(|e| e.epsilon)
            .sum();
        assert_eq!(col_split_spend, 0.0);
    }

    #[test]
    fn leaf_budgets_meet_scale_floor() {
        // beta = 10, m = 2, n = 40: scale = 15, so every leaf holds >= eps/15.
        let t = random_table(40, 2, 3);
        let eps = 1.0;
        for seed in 0..5 {
            let mut ledger = BudgetLedger::new();
            let tree = priv_spn(
                &t,
                Budget::new(eps).unwrap(),
                &params(10),
                &RngStream::new(seed),
                &mut ledger,
            )
            .unwrap();
            let floor = eps / scale(40, 2, 10);
            for b in leaf_budgets(&tree) {
                assert!(b >= floor - 1e-9, "leaf budget {b} below {floor}");
            }
        }
    }

    #[test]
    fn composition_reproduces_granted_budget() {
        for seed in 0..10 {
            let t = random_table(60 + (seed as usize * 7) % 40, 1 + (seed as usize) % 4, seed);
            let eps = 0.3 + seed as f64 * 0.17;
            let mut ledger = BudgetLedger::new();
            let tree = priv_spn(
                &t,
                Budget::new(eps).unwrap(),
                &params(10),
                &RngStream::new(seed),
                &mut ledger,
            )
            .unwrap();
            let composed = composed_spn_epsilon(&tree, &ledger, "t");
            assert!(
                (composed - eps).abs() < 1e-9,
                "composed {composed} vs granted {eps}"
            );
            tree.check_structure().unwrap();
        }
    }

    #[test]
    fn depth_stays_within_bound() {
        let t = random_table(80, 3, 9);
        let mut ledger = BudgetLedger::new();
        let tree = priv_spn(
            &t,
            Budget::new(1.0).unwrap(),
            &params(10),
            &RngStream::new(9),
            &mut ledger,
        )
        .unwrap();
        let bound = (3 - 1) + (80 / 10 - 1) + 1;
        assert!(tree.depth() <= bound, "depth {} > {bound}", tree.depth());
        let sigma = scale(80, 3, 10);
        assert!(tree.node_count() as f64 <= sigma);
    }

    #[test]
    fn zero_budget_rejected() {
        let t = random_table(40, 2, 5);
        let mut ledger = BudgetLedger::new();
        assert!(priv_spn(
            &t,
            Budget::ZERO,
            &params(10),
            &RngStream::new(5),
            &mut ledger
        )
        .is_err());
    }

    #[test]
    fn fewer_rows_than_beta_rejected() {
        let t = random_table(5, 2, 6);
        let mut ledger = BudgetLedger::new();
        assert!(priv_spn(
            &t,
            Budget::new(1.0).unwrap(),
            &params(10),
            &RngStream::new(6),
            &mut ledger
        )
        .is_err());
    }

    fn person_table() -> ColumnTable {
        let schema = TableSchema {
            name: "person".into(),
            attributes: vec![
                AttributeSpec::plain("sex", AttrKind::Integer, AttrDomain::Integer { lo: 0, hi: 1 }),
                AttributeSpec::plain(
                    "age",
                    AttrKind::Integer,
                    AttrDomain::Integer { lo: 1, hi: 100 },
                ),
                AttributeSpec::foreign_key("h_id", "household"),
            ],
            is_primary_private: false,
            max_multiplicity: 3,
        };
        ColumnTable::new(
            schema,
            vec![
                Column::Int(vec![1, 0, 0, 1, 0, 1]),
                Column::Int(vec![27, 25, 30, 32, 5, 46]),
                Column::Int(vec![1, 1, 2, 2, 2, 3]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn fanout_attaches_product_with_fanout_leaf_per_chosen_leaf() {
        let t = person_table();
        let view = t.plain_view();
        let mut ledger = BudgetLedger::new();
        let tree = priv_spn(
            &view,
            Budget::new(100.0).unwrap(),
            &params(2),
            &RngStream::new(7),
            &mut ledger,
        )
        .unwrap();
        let before = tree.counts_by_kind();
        let augmented = priv_fanout(
            &t,
            &tree,
            "h_id",
            Budget::new(50.0).unwrap(),
            &RngStream::new(8),
            &mut ledger,
        )
        .unwrap();
        let after = augmented.counts_by_kind();
        assert!(after.fanout_leaves > 0);
        assert_eq!(after.leaves, before.leaves);
        assert_eq!(after.sums, before.sums);
        // One new product per fanout leaf.
        assert_eq!(after.products, before.products + after.fanout_leaves);
        // Original tree untouched.
        assert_eq!(before, tree.counts_by_kind());
        // Each fanout spend is the full edge budget; parallel composition.
        assert!((composed_fanout_epsilon(&ledger, "person") - 50.0).abs() < 1e-12);
    }

    #[test]
    fn single_leaf_tree_gets_one_fanout_covering_all_rows() {
        let t = person_table();
        // Only the "sex" and "age" columns count as attributes; restrict to
        // one attribute so the tree is a single leaf.
        let view = t.plain_view();
        let p = crate::datamodel::IndexPartition::columns(vec![0], vec![1], 2).unwrap();
        let single = view.subtable(&p, crate::datamodel::Side::Left).unwrap();
        let mut ledger = BudgetLedger::new();
        let tree = priv_spn(
            &single,
            Budget::new(10.0).unwrap(),
            &params(2),
            &RngStream::new(9),
            &mut ledger,
        )
        .unwrap();
        let augmented = priv_fanout(
            &t,
            &tree,
            "h_id",
            Budget::new(1e6).unwrap(),
            &RngStream::new(10),
            &mut ledger,
        )
        .unwrap();
        let mut fanouts = Vec::new();
        augmented.visit(&mut |n, _| {
            if let SpnNode::FanoutLeaf { fanout, .. } = n {
                fanouts.push(fanout.clone());
            }
        });
        assert_eq!(fanouts.len(), 1);
        // Near-noiseless counts over all six rows.
        assert!((fanouts[0].entries[&1] - 2.0).abs() < 1e-3);
        assert!((fanouts[0].entries[&2] - 3.0).abs() < 1e-3);
        assert!((fanouts[0].entries[&3] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn disjoint_leaf_fanouts_sum_to_whole_table_fanout() {
        let t = person_table();
        let view = t.plain_view();
        // Split rows by hand into two leaves over the same attribute.
        let p = crate::datamodel::IndexPartition::rows(vec![0, 1, 2], vec![3, 4, 5], 6).unwrap();
        let leaf_for = |rows: &[usize], local: &ColumnTable| {
            let one_attr =
                crate::datamodel::IndexPartition::columns(vec![0], vec![1], 2).unwrap();
            let sub = local.subtable(&one_attr, crate::datamodel::Side::Left).unwrap();
            let hist = crate::stats::build_histogram(&sub).unwrap();
            SpnNode::Leaf {
                attr_name: "sex".into(),
                attr_index: 0,
                rows: rows.to_vec(),
                epsilon: 1.0,
                histogram: hist,
            }
        };
        let left_table = view.subtable(&p, crate::datamodel::Side::Left).unwrap();
        let right_table = view.subtable(&p, crate::datamodel::Side::Right).unwrap();
        let tree = SpnNode::Sum {
            partition: p.clone(),
            weight_left: 0.5,
            left: Box::new(leaf_for(&[0, 1, 2], &left_table)),
            right: Box::new(leaf_for(&[3, 4, 5], &right_table)),
        };
        let mut ledger = BudgetLedger::new();
        let augmented = priv_fanout(
            &t,
            &tree,
            "h_id",
            Budget::new(1e7).unwrap(),
            &RngStream::new(11),
            &mut ledger,
        )
        .unwrap();
        let mut totals = std::collections::BTreeMap::new();
        augmented.visit(&mut |n, _| {
            if let SpnNode::FanoutLeaf { fanout, .. } = n {
                for (k, v) in &fanout.entries {
                    *totals.entry(*k).or_insert(0.0) += v;
                }
            }
        });
        // Near-noiseless, the per-leaf fanouts add to the whole-table fanout.
        assert!((totals[&1] - 2.0).abs() < 1e-3);
        assert!((totals[&2] - 3.0).abs() < 1e-3);
        assert!((totals[&3] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn fanout_rejects_non_fk() {
        let t = person_table();
        let view = t.plain_view();
        let mut ledger = BudgetLedger::new();
        let tree = priv_spn(
            &view,
            Budget::new(1.0).unwrap(),
            &params(2),
            &RngStream::new(12),
            &mut ledger,
        )
        .unwrap();
        assert!(priv_fanout(
            &t,
            &tree,
            "age",
            Budget::new(1.0).unwrap(),
            &RngStream::new(13),
            &mut ledger
        )
        .is_err());
    }

    #[test]
    fn serialization_round_trips_built_trees() {
        for seed in 0..5 {
            let t = random_table(50, 3, 100 + seed);
            let mut ledger = BudgetLedger::new();
            let tree = priv_spn(
                &t,
                Budget::new(1.0).unwrap(),
                &params(10),
                &RngStream::new(seed),
                &mut ledger,
            )
            .unwrap();
            let doc = SpnDocument {
                table: "t".into(),
                row_count: t.row_count,
                attr_count: t.attr_count(),
                beta: 10,
                root: tree,
            };
            let text = serialize_spn(&doc).unwrap();
            assert_eq!(deserialize_spn(&text).unwrap(), doc);
        }
    }
}
