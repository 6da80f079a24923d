//! Column-major tables and index partitions.
//!
//! Tables are immutable after construction and safe to share across threads.
//! Categorical cells are stored as small-integer codes against the declared
//! domain list; numeric cells as 64-bit values.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::datamodel::schema::{AttrDomain, AttrKind, AttributeSpec, TableSchema};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Cat(Vec<u32>),
    Int(Vec<i64>),
    Real(Vec<f64>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Cat(v) => v.len(),
            Column::Int(v) => v.len(),
            Column::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> CellValue {
        match self {
            Column::Cat(v) => CellValue::Cat(v[i]),
            Column::Int(v) => CellValue::Int(v[i]),
            Column::Real(v) => CellValue::Real(v[i]),
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Cat(v) => Column::Cat(rows.iter().map(|&i| v[i]).collect()),
            Column::Int(v) => Column::Int(rows.iter().map(|&i| v[i]).collect()),
            Column::Real(v) => Column::Real(rows.iter().map(|&i| v[i]).collect()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CellValue {
    Cat(u32),
    Int(i64),
    Real(f64),
}

impl CellValue {
    /// 64-bit pattern used for grouping identical values.
    pub fn bits(&self) -> u64 {
        match self {
            CellValue::Cat(c) => *c as u64,
            CellValue::Int(v) => *v as u64,
            CellValue::Real(x) => x.to_bits(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rows,
    Columns,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A two-way split of the row or column index range of a table.
///
/// Both sides are sorted, duplicate-free, non-empty, disjoint, and together
/// cover the full index range.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexPartition {
    left: Vec<usize>,
    right: Vec<usize>,
    axis: Axis,
}

impl IndexPartition {
    pub fn new(axis: Axis, mut left: Vec<usize>, mut right: Vec<usize>, n: usize) -> Result<Self> {
        left.sort_unstable();
        right.sort_unstable();
        if left.is_empty() || right.is_empty() {
            return Err(Error::Partition("both sides must be non-empty".into()));
        }
        if left.len() + right.len() != n {
            return Err(Error::Partition(format!(
                "sides cover {} indices, axis has {n}",
                left.len() + right.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in left.iter().chain(right.iter()) {
            if i >= n {
                return Err(Error::Partition(format!("index {i} out of range 0..{n}")));
            }
            if seen[i] {
                return Err(Error::Partition(format!("index {i} appears twice")));
            }
            seen[i] = true;
        }
        Ok(IndexPartition { left, right, axis })
    }

    pub fn rows(left: Vec<usize>, right: Vec<usize>, n: usize) -> Result<Self> {
        Self::new(Axis::Rows, left, right, n)
    }

    pub fn columns(left: Vec<usize>, right: Vec<usize>, n: usize) -> Result<Self> {
        Self::new(Axis::Columns, left, right, n)
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn side(&self, side: Side) -> &[usize] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn swapped(&self) -> IndexPartition {
        IndexPartition {
            left: self.right.clone(),
            right: self.left.clone(),
            axis: self.axis,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnTable {
    pub schema: TableSchema,
    pub columns: Vec<Column>,
    pub row_count: usize,
}

impl ColumnTable {
    /// Builds a table and checks every cell against its declared domain.
    pub fn new(schema: TableSchema, columns: Vec<Column>) -> Result<Self> {
        if columns.len() != schema.attributes.len() {
            return Err(Error::Input(format!(
                "table `{}`: {} columns for {} attributes",
                schema.name,
                columns.len(),
                schema.attributes.len()
            )));
        }
        let row_count = columns.first().map_or(0, Column::len);
        for (attr, col) in schema.attributes.iter().zip(&columns) {
            if col.len() != row_count {
                return Err(Error::Input(format!(
                    "table `{}`: column `{}` has {} rows, expected {row_count}",
                    schema.name,
                    attr.name,
                    col.len()
                )));
            }
            check_column_domain(&schema.name, attr, col)?;
        }
        Ok(ColumnTable {
            schema,
            columns,
            row_count,
        })
    }

    pub fn attr_count(&self) -> usize {
        self.schema.attributes.len()
    }

    pub fn column(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    pub fn column_by_name(&self, name: &str) -> Option<&Column> {
        self.schema.attr_index(name).map(|i| &self.columns[i])
    }

    pub fn cell(&self, row: usize, col: usize) -> CellValue {
        self.columns[col].get(row)
    }

    /// Restriction to the plain (non-key) attributes. Keys are modeled by the
    /// fanout mechanism and key regeneration, never as histograms.
    pub fn plain_view(&self) -> ColumnTable {
        let keep = self.schema.plain_indices();
        let schema = TableSchema {
            name: self.schema.name.clone(),
            attributes: keep
                .iter()
                .map(|&i| self.schema.attributes[i].clone())
                .collect(),
            is_primary_private: self.schema.is_primary_private,
            max_multiplicity: self.schema.max_multiplicity,
        };
        let columns = keep.iter().map(|&i| self.columns[i].clone()).collect();
        ColumnTable {
            schema,
            columns,
            row_count: self.row_count,
        }
    }

    /// Selected rows or columns of the table, in original order.
    pub fn subtable(&self, p: &IndexPartition, side: Side) -> Result<ColumnTable> {
        let idx = p.side(side);
        match p.axis() {
            Axis::Rows => {
                if let Some(&bad) = idx.iter().find(|&&i| i >= self.row_count) {
                    return Err(Error::Partition(format!(
                        "row index {bad} out of range for table with {} rows",
                        self.row_count
                    )));
                }
                let columns = self.columns.iter().map(|c| c.select(idx)).collect();
                Ok(ColumnTable {
                    schema: self.schema.clone(),
                    columns,
                    row_count: idx.len(),
                })
            }
            Axis::Columns => {
                if let Some(&bad) = idx.iter().find(|&&i| i >= self.attr_count()) {
                    return Err(Error::Partition(format!(
                        "column index {bad} out of range for table with {} attributes",
                        self.attr_count()
                    )));
                }
                let schema = TableSchema {
                    name: self.schema.name.clone(),
                    attributes: idx
                        .iter()
                        .map(|&i| self.schema.attributes[i].clone())
                        .collect(),
                    is_primary_private: self.schema.is_primary_private,
                    max_multiplicity: self.schema.max_multiplicity,
                };
                let columns = idx.iter().map(|&i| self.columns[i].clone()).collect();
                Ok(ColumnTable {
                    schema,
                    columns,
                    row_count: self.row_count,
                })
            }
        }
    }
}

fn check_column_domain(table: &str, attr: &AttributeSpec, col: &Column) -> Result<()> {
    let violation = |row: usize, value: String| Error::DomainViolation {
        table: table.to_string(),
        column: attr.name.clone(),
        row,
        value,
    };
    match (attr.kind, col) {
        (AttrKind::Categorical, Column::Cat(codes)) => {
            let Some(AttrDomain::Categorical(values)) = &attr.domain else {
                return Err(Error::Schema(format!(
                    "table `{table}`: categorical attribute `{}` lacks a domain",
                    attr.name
                )));
            };
            for (row, &code) in codes.iter().enumerate() {
                if code as usize >= values.len() {
                    return Err(violation(row, format!("#code {code}")));
                }
            }
        }
        (AttrKind::Integer, Column::Int(vals)) => {
            if let Some(AttrDomain::Integer { lo, hi }) = &attr.domain {
                for (row, &v) in vals.iter().enumerate() {
                    if v < *lo || v > *hi {
                        return Err(violation(row, v.to_string()));
                    }
                }
            }
        }
        (AttrKind::Real, Column::Real(vals)) => {
            let Some(AttrDomain::Real { lo, hi }) = &attr.domain else {
                return Err(Error::Schema(format!(
                    "table `{table}`: real attribute `{}` lacks a domain",
                    attr.name
                )));
            };
            for (row, &v) in vals.iter().enumerate() {
                if !v.is_finite() || v < *lo || v > *hi {
                    return Err(violation(row, format!("{v}")));
                }
            }
        }
        _ => {
            return Err(Error::Input(format!(
                "table `{table}`: column `{}` storage does not match attribute kind",
                attr.name
            )));
        }
    }
    Ok(())
}

/// A database instance: one loaded table per schema entry, in schema order.
#[derive(Clone, Debug, PartialEq)]
pub struct Database {
    pub schema: crate::datamodel::schema::DatabaseSchema,
    pub tables: Vec<ColumnTable>,
}

impl Database {
    pub fn table(&self, name: &str) -> Option<&ColumnTable> {
        self.tables.iter().find(|t| t.schema.name == name)
    }

    /// Checks cell domains, primary-key uniqueness, and referential integrity.
    pub fn validate(&self) -> Result<()> {
        self.schema.validate()?;
        if self.tables.len() != self.schema.tables.len() {
            return Err(Error::Input(format!(
                "database holds {} tables, schema declares {}",
                self.tables.len(),
                self.schema.tables.len()
            )));
        }
        for (ts, table) in self.schema.tables.iter().zip(&self.tables) {
            if ts != &table.schema {
                return Err(Error::Input(format!(
                    "table `{}` does not match its schema declaration",
                    table.schema.name
                )));
            }
            for (attr, col) in table.schema.attributes.iter().zip(&table.columns) {
                check_column_domain(&table.schema.name, attr, col)?;
            }
            if let Some(pk) = table.schema.pk_index() {
                let Column::Int(vals) = table.column(pk) else {
                    unreachable!("schema validation enforces integer keys");
                };
                let mut seen = HashSet::with_capacity(vals.len());
                for &v in vals {
                    if !seen.insert(v) {
                        return Err(Error::DuplicatePrimaryKey {
                            table: table.schema.name.clone(),
                            value: v,
                        });
                    }
                }
            }
        }
        for table in &self.tables {
            for fk_idx in table.schema.fk_indices() {
                let attr = &table.schema.attributes[fk_idx];
                let target_name = attr.fk_target().unwrap();
                let target = self.table(target_name).ok_or_else(|| {
                    Error::Input(format!("referenced table `{target_name}` not loaded"))
                })?;
                let pk_idx = target.schema.pk_index().unwrap();
                let Column::Int(pks) = target.column(pk_idx) else {
                    unreachable!()
                };
                let pk_set: HashSet<i64> = pks.iter().copied().collect();
                let Column::Int(fks) = table.column(fk_idx) else {
                    unreachable!()
                };
                for (row, &v) in fks.iter().enumerate() {
                    if !pk_set.contains(&v) {
                        return Err(Error::BrokenReference {
                            table: table.schema.name.clone(),
                            column: attr.name.clone(),
                            row,
                            value: v,
                            target: target_name.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}
