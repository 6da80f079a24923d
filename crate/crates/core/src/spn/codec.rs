//! Versioned JSON serialization of trees.
//!
//! Counts (histogram and fanout) travel as decimal strings so files are
//! locale-proof and round-trip bit-exactly; `{:?}` formatting emits the
//! shortest representation that parses back to the same f64.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datamodel::{
    AttrDomain, AttrKind, AttrRole, AttributeSpec, Axis, IndexPartition,
};
use crate::error::{Error, Result};
use crate::spn::node::SpnNode;
use crate::stats::{BinSpec, FanoutTable, Histogram};

pub const FORMAT_VERSION: u32 = 1;

/// A serialized tree plus the table facts needed to audit it.
#[derive(Clone, Debug, PartialEq)]
pub struct SpnDocument {
    pub table: String,
    /// Rows of the table the tree was built on.
    pub row_count: usize,
    /// Plain attributes of the table the tree was built on.
    pub attr_count: usize,
    /// Minimum table size the build used.
    pub beta: u64,
    pub root: SpnNode,
}

pub fn serialize_spn(doc: &SpnDocument) -> Result<String> {
    let json = DocJson {
        version: FORMAT_VERSION,
        table: doc.table.clone(),
        row_count: doc.row_count,
        attr_count: doc.attr_count,
        beta: doc.beta,
        root: node_to_json(&doc.root),
    };
    Ok(serde_json::to_string_pretty(&json)?)
}

pub fn deserialize_spn(text: &str) -> Result<SpnDocument> {
    let json: DocJson =
        serde_json::from_str(text).map_err(|e| Error::Codec(format!("malformed tree file: {e}")))?;
    if json.version != FORMAT_VERSION {
        return Err(Error::Codec(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            json.version
        )));
    }
    Ok(SpnDocument {
        table: json.table,
        row_count: json.row_count,
        attr_count: json.attr_count,
        beta: json.beta,
        root: node_from_json(json.root)?,
    })
}

#[derive(Serialize, Deserialize)]
struct DocJson {
    version: u32,
    table: String,
    row_count: usize,
    attr_count: usize,
    beta: u64,
    root: NodeJson,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum NodeJson {
    Sum {
        weight_left: f64,
        partition: PartitionJson,
        left: Box<NodeJson>,
        right: Box<NodeJson>,
    },
    Product {
        partition: PartitionJson,
        left: Box<NodeJson>,
        right: Box<NodeJson>,
    },
    Leaf {
        attr: String,
        attr_index: usize,
        epsilon: f64,
        rows: Vec<usize>,
        histogram: HistogramJson,
    },
    Fanout {
        epsilon: f64,
        fanout: FanoutJson,
    },
}

#[derive(Serialize, Deserialize)]
struct PartitionJson {
    axis: Axis,
    left_size: usize,
    right_size: usize,
    left: Vec<usize>,
    right: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct HistogramJson {
    attribute: AttributeJson,
    bins: Vec<BinSpec>,
    counts: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct FanoutJson {
    fk_attribute: AttributeJson,
    /// Pairs of (referenced key, count as decimal string), sorted by key.
    entries: Vec<(i64, String)>,
}

#[derive(Serialize, Deserialize)]
struct AttributeJson {
    name: String,
    kind: AttrKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<DomainJson>,
    role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fk_target: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DomainJson {
    Categorical(Vec<String>),
    Int([i64; 2]),
    Real([f64; 2]),
}

fn count_to_string(c: f64) -> String {
    format!("{c:?}")
}

fn count_from_string(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Codec(format!("bad count literal `{s}`")))
}

fn attr_to_json(a: &AttributeSpec) -> AttributeJson {
    AttributeJson {
        name: a.name.clone(),
        kind: a.kind,
        domain: a.domain.as_ref().map(|d| match d {
            AttrDomain::Categorical(v) => DomainJson::Categorical(v.clone()),
            AttrDomain::Integer { lo, hi } => DomainJson::Int([*lo, *hi]),
            AttrDomain::Real { lo, hi } => DomainJson::Real([*lo, *hi]),
        }),
        role: match &a.role {
            AttrRole::Plain => "plain".into(),
            AttrRole::PrimaryKey => "primary-key".into(),
            AttrRole::ForeignKey { .. } => "foreign-key".into(),
        },
        fk_target: a.fk_target().map(str::to_string),
    }
}

fn attr_from_json(a: AttributeJson) -> Result<AttributeSpec> {
    let role = match a.role.as_str() {
        "plain" => AttrRole::Plain,
        "primary-key" => AttrRole::PrimaryKey,
        "foreign-key" => AttrRole::ForeignKey {
            target: a
                .fk_target
                .clone()
                .ok_or_else(|| Error::Codec("foreign-key attribute without target".into()))?,
        },
        other => return Err(Error::Codec(format!("unknown role `{other}`"))),
    };
    let domain = match (a.kind, a.domain) {
        (_, None) => None,
        (AttrKind::Categorical, Some(DomainJson::Categorical(v))) => {
            Some(AttrDomain::Categorical(v))
        }
        (AttrKind::Integer, Some(DomainJson::Int([lo, hi]))) => {
            Some(AttrDomain::Integer { lo, hi })
        }
        (AttrKind::Real, Some(DomainJson::Real([lo, hi]))) => Some(AttrDomain::Real { lo, hi }),
        // An integral real range parses as Int first under untagged decoding.
        (AttrKind::Real, Some(DomainJson::Int([lo, hi]))) => Some(AttrDomain::Real {
            lo: lo as f64,
            hi: hi as f64,
        }),
        _ => return Err(Error::Codec(format!("domain mismatch for `{}`", a.name))),
    };
    Ok(AttributeSpec {
        name: a.name,
        kind: a.kind,
        domain,
        role,
    })
}

fn partition_to_json(p: &IndexPartition) -> PartitionJson {
    PartitionJson {
        axis: p.axis(),
        left_size: p.left().len(),
        right_size: p.right().len(),
        left: p.left().to_vec(),
        right: p.right().to_vec(),
    }
}

fn partition_from_json(p: PartitionJson) -> Result<IndexPartition> {
    if p.left.len() != p.left_size || p.right.len() != p.right_size {
        return Err(Error::Codec("partition sizes disagree with index sets".into()));
    }
    IndexPartition::new(p.axis, p.left, p.right, p.left_size + p.right_size)
}

fn node_to_json(node: &SpnNode) -> NodeJson {
    match node {
        SpnNode::Sum {
            partition,
            weight_left,
            left,
            right,
        } => NodeJson::Sum {
            weight_left: *weight_left,
            partition: partition_to_json(partition),
            left: Box::new(node_to_json(left)),
            right: Box::new(node_to_json(right)),
        },
        SpnNode::Product {
            partition,
            left,
            right,
        } => NodeJson::Product {
            partition: partition_to_json(partition),
            left: Box::new(node_to_json(left)),
            right: Box::new(node_to_json(right)),
        },
        SpnNode::Leaf {
            attr_name,
            attr_index,
            rows,
            epsilon,
            histogram,
        } => NodeJson::Leaf {
            attr: attr_name.clone(),
            attr_index: *attr_index,
            epsilon: *epsilon,
            rows: rows.clone(),
            histogram: HistogramJson {
                attribute: attr_to_json(&histogram.attribute),
                bins: histogram.bins.clone(),
                counts: histogram.counts.iter().map(|&c| count_to_string(c)).collect(),
            },
        },
        SpnNode::FanoutLeaf { epsilon, fanout } => NodeJson::Fanout {
            epsilon: *epsilon,
            fanout: FanoutJson {
                fk_attribute: attr_to_json(&fanout.fk_attribute),
                entries: fanout
                    .entries
                    .iter()
                    .map(|(&k, &v)| (k, count_to_string(v)))
                    .collect(),
            },
        },
    }
}

fn node_from_json(node: NodeJson) -> Result<SpnNode> {
    Ok(match node {
        NodeJson::Sum {
            weight_left,
            partition,
            left,
            right,
        } => SpnNode::Sum {
            partition: partition_from_json(partition)?,
            weight_left,
            left: Box::new(node_from_json(*left)?),
            right: Box::new(node_from_json(*right)?),
        },
        NodeJson::Product {
            partition,
            left,
            right,
        } => SpnNode::Product {
            partition: partition_from_json(partition)?,
            left: Box::new(node_from_json(*left)?),
            right: Box::new(node_from_json(*right)?),
        },
        NodeJson::Leaf {
            attr,
            attr_index,
            epsilon,
            rows,
            histogram,
        } => {
            let counts = histogram
                .counts
                .iter()
                .map(|s| count_from_string(s))
                .collect::<Result<Vec<_>>>()?;
            if counts.len() != histogram.bins.len() {
                return Err(Error::Codec("histogram counts/bins length mismatch".into()));
            }
            SpnNode::Leaf {
                attr_name: attr,
                attr_index,
                rows,
                epsilon,
                histogram: Histogram {
                    attribute: attr_from_json(histogram.attribute)?,
                    bins: histogram.bins,
                    counts,
                },
            }
        }
        NodeJson::Fanout { epsilon, fanout } => {
            let mut entries = BTreeMap::new();
            for (k, s) in &fanout.entries {
                if entries.insert(*k, count_from_string(s)?).is_some() {
                    return Err(Error::Codec(format!("duplicate fanout key {k}")));
                }
            }
            SpnNode::FanoutLeaf {
                epsilon,
                fanout: FanoutTable {
                    fk_attribute: attr_from_json(fanout.fk_attribute)?,
                    entries,
                },
            }
        }
    })
}
