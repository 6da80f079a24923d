//! Tree nodes: sum (row mixture), product (column factorization), histogram
//! leaves, and fanout leaves for foreign-key multiplicities.

use crate::datamodel::IndexPartition;
use crate::error::{Error, Result};
use crate::stats::{FanoutTable, Histogram};

#[derive(Clone, Debug, PartialEq)]
pub enum SpnNode {
    Sum {
        /// Row partition of the table this node was built on, in that
        /// table's local row indices.
        partition: IndexPartition,
        /// |left| / (|left| + |right|); the right weight is the complement.
        weight_left: f64,
        left: Box<SpnNode>,
        right: Box<SpnNode>,
    },
    Product {
        /// Column partition in local attribute indices. Fanout-injected
        /// products use the two-column view {original leaf}/{fanout leaf}.
        partition: IndexPartition,
        left: Box<SpnNode>,
        right: Box<SpnNode>,
    },
    Leaf {
        /// Attribute name and its index in the table the tree was built on.
        attr_name: String,
        attr_index: usize,
        /// Source-table row indices this leaf covers.
        rows: Vec<usize>,
        /// Budget spent perturbing this leaf's histogram.
        epsilon: f64,
        histogram: Histogram,
    },
    FanoutLeaf {
        epsilon: f64,
        fanout: FanoutTable,
    },
}

impl SpnNode {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SpnNode::Sum { .. } => "sum",
            SpnNode::Product { .. } => "product",
            SpnNode::Leaf { .. } => "leaf",
            SpnNode::FanoutLeaf { .. } => "fanout",
        }
    }

    pub fn children(&self) -> Option<(&SpnNode, &SpnNode)> {
        match self {
            SpnNode::Sum { left, right, .. } | SpnNode::Product { left, right, .. } => {
                Some((left, right))
            }
            _ => None,
        }
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self.children() {
            Some((l, r)) => 1 + l.depth().max(r.depth()),
            None => 1,
        }
    }

    pub fn node_count(&self) -> usize {
        match self.children() {
            Some((l, r)) => 1 + l.node_count() + r.node_count(),
            None => 1,
        }
    }

    pub fn counts_by_kind(&self) -> NodeCounts {
        let mut counts = NodeCounts::default();
        self.visit(&mut |node, _| match node {
            SpnNode::Sum { .. } => counts.sums += 1,
            SpnNode::Product { .. } => counts.products += 1,
            SpnNode::Leaf { .. } => counts.leaves += 1,
            SpnNode::FanoutLeaf { .. } => counts.fanout_leaves += 1,
        });
        counts
    }

    /// Pre-order traversal with root-relative paths ("" at the root, then one
    /// 'L'/'R' per level).
    pub fn visit<F: FnMut(&SpnNode, &str)>(&self, f: &mut F) {
        fn walk<F: FnMut(&SpnNode, &str)>(node: &SpnNode, path: &mut String, f: &mut F) {
            f(node, path);
            if let Some((l, r)) = node.children() {
                path.push('L');
                walk(l, path, f);
                path.pop();
                path.push('R');
                walk(r, path, f);
                path.pop();
            }
        }
        walk(self, &mut String::new(), f);
    }

    /// Structural invariants: sum weights match realized side sizes and every
    /// path ends in a leaf (guaranteed by construction; used by tests and the
    /// codec).
    pub fn check_structure(&self) -> Result<()> {
        match self {
            SpnNode::Sum {
                partition,
                weight_left,
                left,
                right,
            } => {
                let l = partition.left().len() as f64;
                let r = partition.right().len() as f64;
                let expect = l / (l + r);
                if !(*weight_left > 0.0 && *weight_left < 1.0) {
                    return Err(Error::Input(format!(
                        "sum weight {weight_left} outside (0, 1)"
                    )));
                }
                if (weight_left - expect).abs() > 1e-9 {
                    return Err(Error::Input(format!(
                        "sum weight {weight_left} does not match side sizes ({expect})"
                    )));
                }
                left.check_structure()?;
                right.check_structure()
            }
            SpnNode::Product { left, right, .. } => {
                left.check_structure()?;
                right.check_structure()
            }
            SpnNode::Leaf { histogram, .. } => {
                if histogram.counts.iter().any(|&c| c < 0.0) {
                    return Err(Error::Input("leaf histogram has negative counts".into()));
                }
                Ok(())
            }
            SpnNode::FanoutLeaf { fanout, .. } => {
                if fanout.entries.values().any(|&c| c < 0.0) {
                    return Err(Error::Input("fanout leaf has negative counts".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NodeCounts {
    pub sums: usize,
    pub products: usize,
    pub leaves: usize,
    pub fanout_leaves: usize,
}
