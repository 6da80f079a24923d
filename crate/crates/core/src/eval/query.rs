//! Conjunctive queries over PK-FK joins and their exact cardinalities.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::datamodel::{
    AttrDomain, AttrKind, Column, ColumnTable, Database,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

/// Comparison constant: a category label or a number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PredValue {
    Str(String),
    Num(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub table: String,
    pub attribute: String,
    pub op: PredOp,
    pub value: PredValue,
}

/// A conjunctive filter over a connected set of tables joined along their
/// declared PK-FK edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjunctiveQuery {
    pub tables: Vec<String>,
    pub predicates: Vec<Predicate>,
}

/// Exact COUNT(*) of the filtered join: predicate pushdown per table, then
/// multiplicity aggregation along the join tree via hash lookups.
pub fn cardinality(q: &ConjunctiveQuery, db: &Database) -> Result<u64> {
    validate_query(q, db)?;
    let masks: HashMap<&str, Vec<bool>> = q
        .tables
        .iter()
        .map(|name| {
            let table = db.table(name).unwrap();
            predicate_mask(q, table).map(|m| (name.as_str(), m))
        })
        .collect::<Result<_>>()?;

    // Join edges among the selected tables.
    let selected: HashSet<&str> = q.tables.iter().map(String::as_str).collect();
    let mut edges: Vec<(String, String, String)> = Vec::new(); // (fk table, fk attr, pk table)
    for (t, attr, target) in db.schema.fk_edges() {
        if selected.contains(t.as_str()) && selected.contains(target.as_str()) {
            edges.push((t, attr, target));
        }
    }
    if edges.len() + 1 < q.tables.len() {
        return Err(Error::Query("join graph is disconnected".into()));
    }
    if edges.len() + 1 > q.tables.len() {
        return Err(Error::Query(
            "join graph has cycles or parallel edges; only tree joins are supported".into(),
        ));
    }

    // Check connectivity and orient the tree away from the first table.
    let root = q.tables[0].as_str();
    let mut adjacency: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, (t, _, target)) in edges.iter().enumerate() {
        adjacency.entry(t.as_str()).or_default().push(i);
        adjacency.entry(target.as_str()).or_default().push(i);
    }
    let mut visited: HashSet<&str> = HashSet::new();
    visited.insert(root);
    // (table, parent edge) in DFS finish order for bottom-up aggregation.
    let mut order: Vec<(&str, Option<usize>)> = Vec::new();
    let mut stack: Vec<(&str, Option<usize>)> = vec![(root, None)];
    while let Some((t, via)) = stack.pop() {
        order.push((t, via));
        for &ei in adjacency.get(t).map(Vec::as_slice).unwrap_or(&[]) {
            let (ft, _, pt) = &edges[ei];
            let other = if ft == t { pt.as_str() } else { ft.as_str() };
            if visited.insert(other) {
                stack.push((other, Some(ei)));
            }
        }
    }
    if visited.len() != q.tables.len() {
        return Err(Error::Query("join graph is disconnected".into()));
    }

    // Bottom-up: score[t][row] = number of join combinations in t's subtree
    // consistent with that row; fold each child into its parent through the
    // linking key.
    let mut scores: HashMap<&str, Vec<u64>> = q
        .tables
        .iter()
        .map(|name| {
            let mask = &masks[name.as_str()];
            (
                name.as_str(),
                mask.iter().map(|&b| u64::from(b)).collect::<Vec<u64>>(),
            )
        })
        .collect();

    for &(child, via) in order.iter().rev() {
        let Some(ei) = via else { continue };
        let (fk_table, fk_attr, pk_table) = &edges[ei];
        let parent = if fk_table == child {
            pk_table.as_str()
        } else {
            fk_table.as_str()
        };
        let child_scores = scores.remove(child).unwrap();
        let child_table = db.table(child).unwrap();
        let parent_table = db.table(parent).unwrap();
        let parent_scores = scores.get_mut(parent).unwrap();
        if fk_table == child {
            // Child refers to parent: sum child scores per referenced key.
            let fk_col = int_column(child_table, fk_attr)?;
            let mut sums: HashMap<i64, u64> = HashMap::new();
            for (row, &s) in child_scores.iter().enumerate() {
                if s > 0 {
                    *sums.entry(fk_col[row]).or_insert(0) += s;
                }
            }
            let pk_col = int_column(parent_table, pk_name(parent_table)?)?;
            for (row, slot) in parent_scores.iter_mut().enumerate() {
                *slot *= sums.get(&pk_col[row]).copied().unwrap_or(0);
            }
        } else {
            // Parent refers to child: index child scores by its primary key.
            let pk_col = int_column(child_table, pk_name(child_table)?)?;
            let mut by_key: HashMap<i64, u64> = HashMap::new();
            for (row, &s) in child_scores.iter().enumerate() {
                by_key.insert(pk_col[row], s);
            }
            let fk_col = int_column(parent_table, fk_attr)?;
            for (row, slot) in parent_scores.iter_mut().enumerate() {
                *slot *= by_key.get(&fk_col[row]).copied().unwrap_or(0);
            }
        }
    }

    Ok(scores[root].iter().sum())
}

fn pk_name(t: &ColumnTable) -> Result<&str> {
    t.schema
        .pk_index()
        .map(|i| t.schema.attributes[i].name.as_str())
        .ok_or_else(|| Error::Query(format!("table `{}` has no primary key", t.schema.name)))
}

fn int_column<'a>(t: &'a ColumnTable, name: &str) -> Result<&'a [i64]> {
    match t.column_by_name(name) {
        Some(Column::Int(v)) => Ok(v),
        _ => Err(Error::Query(format!(
            "key column `{name}` missing or not integer in `{}`",
            t.schema.name
        ))),
    }
}

fn validate_query(q: &ConjunctiveQuery, db: &Database) -> Result<()> {
    if q.tables.is_empty() {
        return Err(Error::Query("query selects no tables".into()));
    }
    let mut seen = HashSet::new();
    for t in &q.tables {
        if db.table(t).is_none() {
            return Err(Error::Query(format!("unknown table `{t}`")));
        }
        if !seen.insert(t) {
            return Err(Error::Query(format!("table `{t}` listed twice")));
        }
    }
    for p in &q.predicates {
        let Some(table) = db.table(&p.table) else {
            return Err(Error::Query(format!("predicate on unknown table `{}`", p.table)));
        };
        if !q.tables.contains(&p.table) {
            return Err(Error::Query(format!(
                "predicate table `{}` is not part of the query",
                p.table
            )));
        }
        let Some(attr) = table.schema.attr(&p.attribute) else {
            return Err(Error::Query(format!(
                "unknown attribute `{}` in `{}`",
                p.attribute, p.table
            )));
        };
        if !attr.is_plain() {
            return Err(Error::Query(format!(
                "predicates on key attribute `{}` are not supported",
                p.attribute
            )));
        }
        match (attr.kind, &p.value, p.op) {
            (AttrKind::Categorical, PredValue::Str(s), PredOp::Eq) => {
                let Some(AttrDomain::Categorical(values)) = &attr.domain else {
                    unreachable!()
                };
                if !values.iter().any(|v| v == s) {
                    return Err(Error::Query(format!(
                        "constant `{s}` outside the domain of `{}`",
                        p.attribute
                    )));
                }
            }
            (AttrKind::Categorical, _, _) => {
                return Err(Error::Query(format!(
                    "categorical attribute `{}` supports only `=` against a label",
                    p.attribute
                )))
            }
            (AttrKind::Integer | AttrKind::Real, PredValue::Num(_), _) => {}
            (AttrKind::Integer | AttrKind::Real, PredValue::Str(_), _) => {
                return Err(Error::Query(format!(
                    "numeric attribute `{}` needs a numeric constant",
                    p.attribute
                )))
            }
        }
    }
    Ok(())
}

fn predicate_mask(q: &ConjunctiveQuery, table: &ColumnTable) -> Result<Vec<bool>> {
    let mut mask = vec![true; table.row_count];
    for p in q.predicates.iter().filter(|p| p.table == table.schema.name) {
        let idx = table.schema.attr_index(&p.attribute).unwrap();
        let attr = &table.schema.attributes[idx];
        match (table.column(idx), &p.value) {
            (Column::Cat(codes), PredValue::Str(s)) => {
                let Some(AttrDomain::Categorical(values)) = &attr.domain else {
                    unreachable!()
                };
                let code = values.iter().position(|v| v == s).unwrap() as u32;
                for (row, slot) in mask.iter_mut().enumerate() {
                    *slot &= codes[row] == code;
                }
            }
            (Column::Int(vals), PredValue::Num(c)) => {
                for (row, slot) in mask.iter_mut().enumerate() {
                    *slot &= compare(vals[row] as f64, p.op, *c);
                }
            }
            (Column::Real(vals), PredValue::Num(c)) => {
                for (row, slot) in mask.iter_mut().enumerate() {
                    *slot &= compare(vals[row], p.op, *c);
                }
            }
            _ => unreachable!("validated above"),
        }
    }
    Ok(mask)
}

fn compare(lhs: f64, op: PredOp, rhs: f64) -> bool {
    match op {
        PredOp::Eq => lhs == rhs,
        PredOp::Lt => lhs < rhs,
        PredOp::Le => lhs <= rhs,
        PredOp::Gt => lhs > rhs,
        PredOp::Ge => lhs >= rhs,
    }
}

/// Ratio-based cardinality error, 1.0 when the counts agree. A zero on
/// either side shifts both counts by one to keep the ratio finite.
pub fn qerror(q: &ConjunctiveQuery, orig: &Database, synth: &Database) -> Result<f64> {
    let a = cardinality(q, orig)?;
    let b = cardinality(q, synth)?;
    Ok(qerror_from_counts(a, b))
}

pub fn qerror_from_counts(a: u64, b: u64) -> f64 {
    let (a, b) = if a == 0 || b == 0 {
        (a as f64 + 1.0, b as f64 + 1.0)
    } else {
        (a as f64, b as f64)
    };
    (a / b).max(b / a)
}
