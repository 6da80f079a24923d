//! Seeded random workload generation.
//!
//! Each query draws a connected table subset (size 1..=3), one to three
//! predicates on plain attributes, operators by attribute kind (categorical
//! gets equality, numeric gets an inequality), and constants from the
//! original data's empirical deciles.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::{AttrDomain, AttrKind, Column, Database, DatabaseSchema};
use crate::dpcore::RngStream;
use crate::error::{Error, Result};
use crate::eval::query::{ConjunctiveQuery, PredOp, PredValue, Predicate};

pub fn generate_workload(
    schema: &DatabaseSchema,
    orig: &Database,
    count: usize,
    seed: u64,
) -> Result<Vec<ConjunctiveQuery>> {
    if count < 1 {
        return Err(Error::Input("workload needs at least one query".into()));
    }
    let subsets = connected_subsets(schema, 3);
    if subsets.is_empty() {
        return Err(Error::Input("schema yields no joinable table subsets".into()));
    }
    let mut rng = RngStream::new(seed).child("workload").rng();
    let mut queries = Vec::with_capacity(count);
    for _ in 0..count {
        let subset = subsets.choose(&mut rng).unwrap();
        // Predicate candidates: plain attributes of member tables with data.
        let mut candidates: Vec<(String, String)> = Vec::new();
        for name in subset {
            let table = orig
                .table(name)
                .ok_or_else(|| Error::Input(format!("table `{name}` not loaded")))?;
            if table.row_count == 0 {
                continue;
            }
            for i in table.schema.plain_indices() {
                candidates.push((name.clone(), table.schema.attributes[i].name.clone()));
            }
        }
        if candidates.is_empty() {
            return Err(Error::Input(
                "cannot draw predicate constants from empty tables".into(),
            ));
        }
        let n_preds = rng.gen_range(1..=3usize);
        let predicates = (0..n_preds)
            .map(|_| {
                let (table, attribute) = candidates.choose(&mut rng).unwrap().clone();
                make_predicate(orig, &table, &attribute, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        queries.push(ConjunctiveQuery {
            tables: subset.clone(),
            predicates,
        });
    }
    Ok(queries)
}

fn make_predicate<R: Rng + ?Sized>(
    orig: &Database,
    table: &str,
    attribute: &str,
    rng: &mut R,
) -> Result<Predicate> {
    let t = orig.table(table).unwrap();
    let idx = t.schema.attr_index(attribute).unwrap();
    let attr = &t.schema.attributes[idx];
    let (op, value) = match (attr.kind, t.column(idx)) {
        (AttrKind::Categorical, Column::Cat(codes)) => {
            let Some(AttrDomain::Categorical(values)) = &attr.domain else {
                unreachable!()
            };
            let code = codes[rng.gen_range(0..codes.len())];
            (PredOp::Eq, PredValue::Str(values[code as usize].clone()))
        }
        (_, Column::Int(vals)) => {
            let mut sorted = vals.clone();
            sorted.sort_unstable();
            (numeric_op(rng), PredValue::Num(decile(&sorted, rng) as f64))
        }
        (_, Column::Real(vals)) => {
            let mut sorted = vals.clone();
            sorted.sort_by(f64::total_cmp);
            (numeric_op(rng), PredValue::Num(decile(&sorted, rng)))
        }
        _ => unreachable!(),
    };
    Ok(Predicate {
        table: table.to_string(),
        attribute: attribute.to_string(),
        op,
        value,
    })
}

fn numeric_op<R: Rng + ?Sized>(rng: &mut R) -> PredOp {
    *[PredOp::Lt, PredOp::Le, PredOp::Gt, PredOp::Ge]
        .choose(rng)
        .unwrap()
}

/// Empirical quantile at a decile drawn uniformly from {0.1, ..., 0.9}.
fn decile<T: Copy, R: Rng + ?Sized>(sorted: &[T], rng: &mut R) -> T {
    let q = rng.gen_range(1..=9) as f64 / 10.0;
    let pos = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[pos]
}

/// All connected table subsets of size 1..=max_size under the undirected
/// foreign-key graph.
fn connected_subsets(schema: &DatabaseSchema, max_size: usize) -> Vec<Vec<String>> {
    let n = schema.tables.len();
    let mut adjacency = vec![vec![false; n]; n];
    for (t, _, target) in schema.fk_edges() {
        let i = schema.table_index(&t).unwrap();
        let j = schema.table_index(&target).unwrap();
        adjacency[i][j] = true;
        adjacency[j][i] = true;
    }
    let max_size = max_size.min(n);
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > max_size {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if is_connected(&members, &adjacency) {
            out.push(
                members
                    .iter()
                    .map(|&i| schema.tables[i].name.clone())
                    .collect(),
            );
        }
    }
    out
}

fn is_connected(members: &[usize], adjacency: &[Vec<bool>]) -> bool {
    if members.len() <= 1 {
        return true;
    }
    let mut seen = vec![members[0]];
    let mut frontier = vec![members[0]];
    while let Some(cur) = frontier.pop() {
        for &other in members {
            if !seen.contains(&other) && adjacency[cur][other] {
                seen.push(other);
                frontier.push(other);
            }
        }
    }
    seen.len() == members.len()
}

#[derive(Serialize, Deserialize)]
struct WorkloadFile {
    version: u32,
    queries: Vec<ConjunctiveQuery>,
}

pub fn save_workload(queries: &[ConjunctiveQuery], path: &std::path::Path) -> Result<()> {
    let file = WorkloadFile {
        version: 1,
        queries: queries.to_vec(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn load_workload(path: &std::path::Path) -> Result<Vec<ConjunctiveQuery>> {
    let text = std::fs::read_to_string(path)?;
    let file: WorkloadFile = serde_json::from_str(&text)?;
    if file.version != 1 {
        return Err(Error::Codec(format!(
            "unsupported workload version {}",
            file.version
        )));
    }
    Ok(file.queries)
}
