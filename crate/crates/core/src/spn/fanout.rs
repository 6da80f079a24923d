//! Fanout augmentation: attach a perturbed foreign-key count table beside
//! every leaf of the attribute that has the most leaves.

use std::collections::HashMap;

use crate::datamodel::{ColumnTable, IndexPartition};
use crate::dpcore::{laplace_perturb, Budget, BudgetLedger, RngStream, Scope};
use crate::error::{Error, Result};
use crate::spn::node::SpnNode;
use crate::stats::{build_fanout, FANOUT_SENSITIVITY};

/// Returns a copy of `tree` in which every leaf of the attribute with the
/// most leaves is replaced by a product of that leaf and a fanout leaf over
/// `fk_name`, perturbed with the full `eps` each. The leaves of one attribute
/// cover disjoint row sets, so the spends compose in parallel to `eps`.
pub fn priv_fanout(
    t: &ColumnTable,
    tree: &SpnNode,
    fk_name: &str,
    eps: Budget,
    rng: &RngStream,
    ledger: &mut BudgetLedger,
) -> Result<SpnNode> {
    let attr = t
        .schema
        .attr(fk_name)
        .ok_or_else(|| Error::Input(format!("no attribute `{fk_name}`")))?;
    if attr.fk_target().is_none() {
        return Err(Error::Input(format!(
            "attribute `{fk_name}` is not a foreign key"
        )));
    }
    if eps.is_zero() {
        return Err(Error::Budget(format!(
            "fanout construction for `{}`.`{fk_name}` needs a positive budget",
            t.schema.name
        )));
    }

    // Attribute with the most leaves; ties break to the lowest index.
    let mut leaf_counts: HashMap<usize, usize> = HashMap::new();
    tree.visit(&mut |node, _| {
        if let SpnNode::Leaf { attr_index, .. } = node {
            *leaf_counts.entry(*attr_index).or_insert(0) += 1;
        }
    });
    if leaf_counts.is_empty() {
        return Err(Error::Input("tree has no leaves to augment".into()));
    }
    let chosen_attr = leaf_counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(&attr, _)| attr)
        .unwrap();

    let mechanism = format!("fanout:{fk_name}");
    augment(
        tree,
        &mut |leaf_rows, path| {
            let mut fanout = build_fanout(t, fk_name, leaf_rows)?;
            let counts: Vec<f64> = fanout.entries.values().copied().collect();
            let noisy = laplace_perturb(
                &counts,
                FANOUT_SENSITIVITY,
                eps,
                &mut rng.child(path).rng(),
                ledger,
                &Scope {
                    table: t.schema.name.clone(),
                    path: path.to_string(),
                },
                &mechanism,
            )?;
            for (slot, v) in fanout.entries.values_mut().zip(noisy) {
                *slot = v;
            }
            fanout.clamp_non_negative();
            Ok(SpnNode::FanoutLeaf {
                epsilon: eps.epsilon(),
                fanout,
            })
        },
        chosen_attr,
        &mut String::new(),
    )
}

fn augment(
    node: &SpnNode,
    make_fanout: &mut dyn FnMut(&[usize], &str) -> Result<SpnNode>,
    chosen_attr: usize,
    path: &mut String,
) -> Result<SpnNode> {
    match node {
        SpnNode::Leaf {
            attr_index, rows, ..
        } if *attr_index == chosen_attr => {
            let fanout_leaf = make_fanout(rows, path)?;
            Ok(SpnNode::Product {
                partition: IndexPartition::columns(vec![0], vec![1], 2)
                    .expect("two-column partition is valid"),
                left: Box::new(node.clone()),
                right: Box::new(fanout_leaf),
            })
        }
        SpnNode::Leaf { .. } | SpnNode::FanoutLeaf { .. } => Ok(node.clone()),
        SpnNode::Sum {
            partition,
            weight_left,
            left,
            right,
        } => {
            path.push('L');
            let l = augment(left, make_fanout, chosen_attr, path)?;
            path.pop();
            path.push('R');
            let r = augment(right, make_fanout, chosen_attr, path)?;
            path.pop();
            Ok(SpnNode::Sum {
                partition: partition.clone(),
                weight_left: *weight_left,
                left: Box::new(l),
                right: Box::new(r),
            })
        }
        SpnNode::Product {
            partition,
            left,
            right,
        } => {
            path.push('L');
            let l = augment(left, make_fanout, chosen_attr, path)?;
            path.pop();
            path.push('R');
            let r = augment(right, make_fanout, chosen_attr, path)?;
            path.pop();
            Ok(SpnNode::Product {
                partition: partition.clone(),
                left: Box::new(l),
                right: Box::new(r),
            })
        }
    }
}
