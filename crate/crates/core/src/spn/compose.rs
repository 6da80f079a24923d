//! Bottom-up ledger composition over a finished tree.
//!
//! Disjoint row clusters compose in parallel (max across a sum node's
//! children); everything else composes sequentially (sum). Over a tree built
//! top-down this reproduces the granted budget exactly, which the acceptance
//! suite asserts.

use std::collections::HashMap;

use crate::dpcore::BudgetLedger;
use crate::spn::node::SpnNode;

const SPN_MECHANISMS: [&str; 4] = ["col_split_trial", "nmi_score", "row_split", "col_split"];

/// Composed construction spend of `table`'s tree: per node, the local spends
/// plus max over sum-node children / sum over product-node children.
///
/// Expects the tree as built (before fanout augmentation); fanout spends are
/// composed separately by [`composed_fanout_epsilon`].
pub fn composed_spn_epsilon(tree: &SpnNode, ledger: &BudgetLedger, table: &str) -> f64 {
    let mut by_path: HashMap<&str, f64> = HashMap::new();
    for e in ledger.entries() {
        if e.table == table
            && (SPN_MECHANISMS.contains(&e.mechanism.as_str()) || e.mechanism == "histogram")
        {
            *by_path.entry(e.path.as_str()).or_insert(0.0) += e.epsilon;
        }
    }
    fn walk(node: &SpnNode, path: &mut String, by_path: &HashMap<&str, f64>) -> f64 {
        let local = by_path.get(path.as_str()).copied().unwrap_or(0.0);
        let children = match node {
            SpnNode::Sum { left, right, .. } => {
                path.push('L');
                let l = walk(left, path, by_path);
                path.pop();
                path.push('R');
                let r = walk(right, path, by_path);
                path.pop();
                l.max(r)
            }
            SpnNode::Product { left, right, .. } => {
                path.push('L');
                let l = walk(left, path, by_path);
                path.pop();
                path.push('R');
                let r = walk(right, path, by_path);
                path.pop();
                l + r
            }
            SpnNode::Leaf { .. } | SpnNode::FanoutLeaf { .. } => 0.0,
        };
        local + children
    }
    walk(tree, &mut String::new(), &by_path)
}

/// Composed fanout spend for `table`: per foreign key, the max across its
/// leaf perturbations (disjoint row sets), summed over foreign keys.
pub fn composed_fanout_epsilon(ledger: &BudgetLedger, table: &str) -> f64 {
    let mut per_fk: HashMap<&str, f64> = HashMap::new();
    for e in ledger.entries() {
        if e.table == table {
            if let Some(fk) = e.mechanism.strip_prefix("fanout:") {
                let slot = per_fk.entry(fk).or_insert(0.0);
                if e.epsilon > *slot {
                    *slot = e.epsilon;
                }
            }
        }
    }
    per_fk.values().sum()
}

/// Histogram budgets of all leaves, in visit order.
pub fn leaf_budgets(tree: &SpnNode) -> Vec<f64> {
    let mut out = Vec::new();
    tree.visit(&mut |node, _| {
        if let SpnNode::Leaf { epsilon, .. } = node {
            out.push(*epsilon);
        }
    });
    out
}
