//! Declared schemas: attribute domains, key roles, and multiplicity bounds.
//!
//! The schema is the ground truth for sensitivity bounds: every plain
//! attribute must declare a finite domain, and `max_multiplicity` bounds how
//! many records of a secondary table may depend on a single primary record.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrKind {
    Categorical,
    Integer,
    Real,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AttrRole {
    Plain,
    PrimaryKey,
    /// Foreign key referencing the named table's primary key.
    ForeignKey { target: String },
}

#[derive(Clone, Debug, PartialEq)]
pub enum AttrDomain {
    /// Finite, duplicate-free list of category labels.
    Categorical(Vec<String>),
    /// Closed integer range `[lo, hi]`.
    Integer { lo: i64, hi: i64 },
    /// Closed real range `[lo, hi]`.
    Real { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttrKind,
    /// Required for plain attributes; optional for key attributes, whose
    /// values are never modeled directly.
    pub domain: Option<AttrDomain>,
    pub role: AttrRole,
}

impl AttributeSpec {
    pub fn plain(name: &str, kind: AttrKind, domain: AttrDomain) -> Self {
        AttributeSpec {
            name: name.to_string(),
            kind,
            domain: Some(domain),
            role: AttrRole::Plain,
        }
    }

    pub fn primary_key(name: &str) -> Self {
        AttributeSpec {
            name: name.to_string(),
            kind: AttrKind::Integer,
            domain: None,
            role: AttrRole::PrimaryKey,
        }
    }

    pub fn foreign_key(name: &str, target: &str) -> Self {
        AttributeSpec {
            name: name.to_string(),
            kind: AttrKind::Integer,
            domain: None,
            role: AttrRole::ForeignKey {
                target: target.to_string(),
            },
        }
    }

    pub fn is_plain(&self) -> bool {
        self.role == AttrRole::Plain
    }

    pub fn is_key(&self) -> bool {
        !self.is_plain()
    }

    pub fn fk_target(&self) -> Option<&str> {
        match &self.role {
            AttrRole::ForeignKey { target } => Some(target),
            _ => None,
        }
    }

    fn validate(&self, table: &str) -> Result<()> {
        validate_identifier(&self.name, "attribute")?;
        match (&self.role, &self.domain) {
            (AttrRole::Plain, None) => {
                return Err(Error::Schema(format!(
                    "table `{table}`: plain attribute `{}` must declare a domain",
                    self.name
                )));
            }
            (AttrRole::PrimaryKey | AttrRole::ForeignKey { .. }, _) => {
                if self.kind != AttrKind::Integer {
                    return Err(Error::Schema(format!(
                        "table `{table}`: key attribute `{}` must have integer kind",
                        self.name
                    )));
                }
            }
            _ => {}
        }
        if let Some(domain) = &self.domain {
            match (self.kind, domain) {
                (AttrKind::Categorical, AttrDomain::Categorical(values)) => {
                    if values.is_empty() {
                        return Err(Error::Schema(format!(
                            "table `{table}`: categorical attribute `{}` has empty domain",
                            self.name
                        )));
                    }
                    let mut seen = HashSet::new();
                    for v in values {
                        if !seen.insert(v) {
                            return Err(Error::Schema(format!(
                                "table `{table}`: categorical attribute `{}` has duplicate domain value `{v}`",
                                self.name
                            )));
                        }
                    }
                }
                (AttrKind::Integer, AttrDomain::Integer { lo, hi }) => {
                    if lo > hi {
                        return Err(Error::Schema(format!(
                            "table `{table}`: attribute `{}` has inverted range [{lo}, {hi}]",
                            self.name
                        )));
                    }
                }
                (AttrKind::Real, AttrDomain::Real { lo, hi }) => {
                    if !lo.is_finite() || !hi.is_finite() || lo > hi {
                        return Err(Error::Schema(format!(
                            "table `{table}`: attribute `{}` has invalid range [{lo}, {hi}]",
                            self.name
                        )));
                    }
                }
                _ => {
                    return Err(Error::Schema(format!(
                        "table `{table}`: attribute `{}` domain does not match its kind",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableSchema {
    pub name: String,
    pub attributes: Vec<AttributeSpec>,
    pub is_primary_private: bool,
    /// Upper bound on how many records of this table depend on a single
    /// record of the primary private table.
    pub max_multiplicity: u64,
}

impl TableSchema {
    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn attr(&self, name: &str) -> Option<&AttributeSpec> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn pk_index(&self) -> Option<usize> {
        self.attributes
            .iter()
            .position(|a| a.role == AttrRole::PrimaryKey)
    }

    pub fn fk_indices(&self) -> Vec<usize> {
        self.attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.fk_target().is_some())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn plain_indices(&self) -> Vec<usize> {
        self.attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_plain())
            .map(|(i, _)| i)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        validate_identifier(&self.name, "table")?;
        if self.max_multiplicity < 1 {
            return Err(Error::Schema(format!(
                "table `{}`: max_multiplicity must be >= 1",
                self.name
            )));
        }
        if self.attributes.is_empty() {
            return Err(Error::Schema(format!(
                "table `{}`: no attributes declared",
                self.name
            )));
        }
        let mut names = HashSet::new();
        for attr in &self.attributes {
            attr.validate(&self.name)?;
            if !names.insert(&attr.name) {
                return Err(Error::Schema(format!(
                    "table `{}`: duplicate attribute name `{}`",
                    self.name, attr.name
                )));
            }
        }
        let pk_count = self
            .attributes
            .iter()
            .filter(|a| a.role == AttrRole::PrimaryKey)
            .count();
        if pk_count > 1 {
            return Err(Error::Schema(format!(
                "table `{}`: more than one primary-key attribute",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatabaseSchema {
    pub tables: Vec<TableSchema>,
}

impl DatabaseSchema {
    pub fn table(&self, name: &str) -> Option<&TableSchema> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.name == name)
    }

    /// Foreign-key edges as (referencing table, fk attribute, referenced table).
    pub fn fk_edges(&self) -> Vec<(String, String, String)> {
        let mut edges = Vec::new();
        for t in &self.tables {
            for idx in t.fk_indices() {
                let attr = &t.attributes[idx];
                if let Some(target) = attr.fk_target() {
                    edges.push((t.name.clone(), attr.name.clone(), target.to_string()));
                }
            }
        }
        edges
    }

    pub fn validate(&self) -> Result<()> {
        if self.tables.is_empty() {
            return Err(Error::Schema("schema declares no tables".into()));
        }
        let mut names = HashSet::new();
        for t in &self.tables {
            t.validate()?;
            if !names.insert(&t.name) {
                return Err(Error::Schema(format!("duplicate table name `{}`", t.name)));
            }
        }
        let primary_count = self.tables.iter().filter(|t| t.is_primary_private).count();
        if primary_count != 1 {
            return Err(Error::Schema(format!(
                "exactly one table must be marked primary_private (found {primary_count})"
            )));
        }
        for t in &self.tables {
            for idx in t.fk_indices() {
                let attr = &t.attributes[idx];
                let target = attr.fk_target().unwrap();
                if target == t.name {
                    return Err(Error::Schema(format!(
                        "table `{}`: foreign key `{}` may not reference its own table",
                        t.name, attr.name
                    )));
                }
                let Some(target_schema) = self.table(target) else {
                    return Err(Error::Schema(format!(
                        "table `{}`: foreign key `{}` references unknown table `{target}`",
                        t.name, attr.name
                    )));
                };
                if target_schema.pk_index().is_none() {
                    return Err(Error::Schema(format!(
                        "table `{}`: foreign key `{}` references `{target}`, which has no primary key",
                        t.name, attr.name
                    )));
                }
            }
        }
        self.check_fk_acyclic()?;
        Ok(())
    }

    fn check_fk_acyclic(&self) -> Result<()> {
        // DFS over the directed reference graph (table -> referenced table).
        let index: HashMap<&str, usize> = self
            .tables
            .iter()
            .enumerate()
            .map(|(i, t)| (t.name.as_str(), i))
            .collect();
        let mut state = vec![0u8; self.tables.len()]; // 0 unvisited, 1 on stack, 2 done
        fn visit(
            i: usize,
            tables: &[TableSchema],
            index: &HashMap<&str, usize>,
            state: &mut [u8],
        ) -> Result<()> {
            state[i] = 1;
            for idx in tables[i].fk_indices() {
                let target = tables[i].attributes[idx].fk_target().unwrap();
                let j = index[target];
                match state[j] {
                    1 => {
                        return Err(Error::Schema(format!(
                            "reference cycle involving table `{}`",
                            tables[j].name
                        )))
                    }
                    0 => visit(j, tables, index, state)?,
                    _ => {}
                }
            }
            state[i] = 2;
            Ok(())
        }
        for i in 0..self.tables.len() {
            if state[i] == 0 {
                visit(i, &self.tables, &index, &mut state)?;
            }
        }
        Ok(())
    }
}

fn validate_identifier(name: &str, what: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(Error::Schema(format!(
            "{what} name `{name}` must be a non-empty [A-Za-z0-9_-] identifier"
        )))
    }
}

// ---------------------------------------------------------------------------
// JSON wire format.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SchemaFileJson {
    tables: Vec<TableJson>,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    name: String,
    #[serde(default)]
    primary_private: bool,
    #[serde(default = "default_multiplicity")]
    max_multiplicity: u64,
    attributes: Vec<AttributeJson>,
}

fn default_multiplicity() -> u64 {
    1
}

#[derive(Serialize, Deserialize)]
struct AttributeJson {
    name: String,
    kind: AttrKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<serde_json::Value>,
    #[serde(default = "default_role")]
    role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fk_target: Option<String>,
}

fn default_role() -> String {
    "plain".to_string()
}

fn domain_from_json(kind: AttrKind, value: &serde_json::Value) -> Result<AttrDomain> {
    let err = |msg: &str| Error::Schema(format!("invalid domain: {msg}"));
    match kind {
        AttrKind::Categorical => {
            let arr = value
                .as_array()
                .ok_or_else(|| err("categorical domain must be a list of strings"))?;
            let mut values = Vec::with_capacity(arr.len());
            for v in arr {
                values.push(
                    v.as_str()
                        .ok_or_else(|| err("categorical domain entries must be strings"))?
                        .to_string(),
                );
            }
            Ok(AttrDomain::Categorical(values))
        }
        AttrKind::Integer => {
            let arr = value
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| err("integer domain must be [lo, hi]"))?;
            let lo = arr[0]
                .as_i64()
                .ok_or_else(|| err("integer domain bounds must be integers"))?;
            let hi = arr[1]
                .as_i64()
                .ok_or_else(|| err("integer domain bounds must be integers"))?;
            Ok(AttrDomain::Integer { lo, hi })
        }
        AttrKind::Real => {
            let arr = value
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| err("real domain must be [lo, hi]"))?;
            let lo = arr[0]
                .as_f64()
                .ok_or_else(|| err("real domain bounds must be numbers"))?;
            let hi = arr[1]
                .as_f64()
                .ok_or_else(|| err("real domain bounds must be numbers"))?;
            Ok(AttrDomain::Real { lo, hi })
        }
    }
}

fn domain_to_json(domain: &AttrDomain) -> serde_json::Value {
    match domain {
        AttrDomain::Categorical(values) => serde_json::json!(values),
        AttrDomain::Integer { lo, hi } => serde_json::json!([lo, hi]),
        AttrDomain::Real { lo, hi } => serde_json::json!([lo, hi]),
    }
}

pub fn schema_from_json(text: &str) -> Result<DatabaseSchema> {
    let file: SchemaFileJson = serde_json::from_str(text)?;
    let mut tables = Vec::with_capacity(file.tables.len());
    for t in file.tables {
        let mut attributes = Vec::with_capacity(t.attributes.len());
        for a in t.attributes {
            let role = match a.role.as_str() {
                "plain" => AttrRole::Plain,
                "primary-key" => AttrRole::PrimaryKey,
                "foreign-key" => {
                    let target = a.fk_target.clone().ok_or_else(|| {
                        Error::Schema(format!(
                            "table `{}`: foreign-key attribute `{}` needs fk_target",
                            t.name, a.name
                        ))
                    })?;
                    AttrRole::ForeignKey { target }
                }
                other => {
                    return Err(Error::Schema(format!(
                        "table `{}`: unknown role `{other}` for attribute `{}`",
                        t.name, a.name
                    )))
                }
            };
            let domain = match &a.domain {
                Some(v) => Some(domain_from_json(a.kind, v)?),
                None => None,
            };
            attributes.push(AttributeSpec {
                name: a.name,
                kind: a.kind,
                domain,
                role,
            });
        }
        tables.push(TableSchema {
            name: t.name,
            attributes,
            is_primary_private: t.primary_private,
            max_multiplicity: t.max_multiplicity,
        });
    }
    let schema = DatabaseSchema { tables };
    schema.validate()?;
    Ok(schema)
}

pub fn schema_to_json(schema: &DatabaseSchema) -> Result<String> {
    let file = SchemaFileJson {
        tables: schema
            .tables
            .iter()
            .map(|t| TableJson {
                name: t.name.clone(),
                primary_private: t.is_primary_private,
                max_multiplicity: t.max_multiplicity,
                attributes: t
                    .attributes
                    .iter()
                    .map(|a| AttributeJson {
                        name: a.name.clone(),
                        kind: a.kind,
                        domain: a.domain.as_ref().map(domain_to_json),
                        role: match &a.role {
                            AttrRole::Plain => "plain".to_string(),
                            AttrRole::PrimaryKey => "primary-key".to_string(),
                            AttrRole::ForeignKey { .. } => "foreign-key".to_string(),
                        },
                        fk_target: a.fk_target().map(|s| s.to_string()),
                    })
                    .collect(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}
