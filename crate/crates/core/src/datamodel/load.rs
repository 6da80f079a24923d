//! Schema-driven CSV loading and saving.
//!
//! One RFC-4180 file per table, named `<table>.csv`, header row mandatory.
//! Cells outside the declared domain, missing values, duplicate primary keys,
//! and dangling foreign keys are all rejected with the offending location.

use std::path::Path;

use crate::datamodel::schema::{schema_from_json, AttrDomain, AttrKind, AttributeSpec};
use crate::datamodel::table::{Column, ColumnTable, Database};
use crate::error::{Error, Result};

pub fn load_database(schema_file: &Path, csv_dir: &Path) -> Result<Database> {
    let text = std::fs::read_to_string(schema_file)?;
    let schema = schema_from_json(&text)?;
    load_database_with_schema(&schema, csv_dir)
}

pub fn load_database_with_schema(
    schema: &crate::datamodel::schema::DatabaseSchema,
    csv_dir: &Path,
) -> Result<Database> {
    schema.validate()?;
    let mut tables = Vec::with_capacity(schema.tables.len());
    for ts in &schema.tables {
        let path = csv_dir.join(format!("{}.csv", ts.name));
        if !path.is_file() {
            return Err(Error::MissingTableFile {
                table: ts.name.clone(),
                path,
            });
        }
        tables.push(load_table(ts, &path)?);
    }
    let db = Database {
        schema: schema.clone(),
        tables,
    };
    db.validate()?;
    Ok(db)
}

fn load_table(
    ts: &crate::datamodel::schema::TableSchema,
    path: &Path,
) -> Result<ColumnTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut header_to_attr = Vec::with_capacity(headers.len());
    for h in headers.iter() {
        let idx = ts.attr_index(h).ok_or_else(|| {
            Error::Schema(format!(
                "table `{}`: CSV header `{h}` is not a declared attribute",
                ts.name
            ))
        })?;
        header_to_attr.push(idx);
    }
    {
        let mut seen = vec![false; ts.attributes.len()];
        for &i in &header_to_attr {
            if seen[i] {
                return Err(Error::Schema(format!(
                    "table `{}`: duplicate CSV header `{}`",
                    ts.name, ts.attributes[i].name
                )));
            }
            seen[i] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Schema(format!(
                "table `{}`: CSV is missing column `{}`",
                ts.name, ts.attributes[missing].name
            )));
        }
    }

    let mut columns: Vec<Column> = ts
        .attributes
        .iter()
        .map(|a| match a.kind {
            AttrKind::Categorical => Column::Cat(Vec::new()),
            AttrKind::Integer => Column::Int(Vec::new()),
            AttrKind::Real => Column::Real(Vec::new()),
        })
        .collect();

    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header_to_attr.len() {
            return Err(Error::Input(format!(
                "table `{}`, row {}: {} fields, expected {}",
                ts.name,
                row_idx + 1,
                record.len(),
                header_to_attr.len()
            )));
        }
        for (field, &attr_idx) in record.iter().zip(&header_to_attr) {
            let attr = &ts.attributes[attr_idx];
            let cell = parse_cell(&ts.name, attr, field, row_idx + 1)?;
            match (&mut columns[attr_idx], cell) {
                (Column::Cat(v), ParsedCell::Cat(c)) => v.push(c),
                (Column::Int(v), ParsedCell::Int(x)) => v.push(x),
                (Column::Real(v), ParsedCell::Real(x)) => v.push(x),
                _ => unreachable!(),
            }
        }
    }

    ColumnTable::new(ts.clone(), columns)
}

enum ParsedCell {
    Cat(u32),
    Int(i64),
    Real(f64),
}

fn parse_cell(table: &str, attr: &AttributeSpec, field: &str, row: usize) -> Result<ParsedCell> {
    if field.is_empty() {
        return Err(Error::MissingValue {
            table: table.to_string(),
            column: attr.name.clone(),
            row,
        });
    }
    let violation = || Error::DomainViolation {
        table: table.to_string(),
        column: attr.name.clone(),
        row,
        value: field.to_string(),
    };
    match attr.kind {
        AttrKind::Categorical => {
            let Some(AttrDomain::Categorical(values)) = &attr.domain else {
                return Err(Error::Schema(format!(
                    "table `{table}`: categorical attribute `{}` lacks a domain",
                    attr.name
                )));
            };
            let code = values.iter().position(|v| v == field).ok_or_else(violation)?;
            Ok(ParsedCell::Cat(code as u32))
        }
        AttrKind::Integer => {
            let v: i64 = field.trim().parse().map_err(|_| violation())?;
            if let Some(AttrDomain::Integer { lo, hi }) = &attr.domain {
                if v < *lo || v > *hi {
                    return Err(violation());
                }
            }
            Ok(ParsedCell::Int(v))
        }
        AttrKind::Real => {
            let v: f64 = field.trim().parse().map_err(|_| violation())?;
            if !v.is_finite() {
                return Err(violation());
            }
            if let Some(AttrDomain::Real { lo, hi }) = &attr.domain {
                if v < *lo || v > *hi {
                    return Err(violation());
                }
            }
            Ok(ParsedCell::Real(v))
        }
    }
}

/// Writes one `<table>.csv` per table, mirroring the input format.
pub fn save_database(db: &Database, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for table in &db.tables {
        save_table(table, &dir.join(format!("{}.csv", table.schema.name)))?;
    }
    Ok(())
}

pub fn save_table(table: &ColumnTable, path: &Path) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    let header: Vec<&str> = table
        .schema
        .attributes
        .iter()
        .map(|a| a.name.as_str())
        .collect();
    writer.write_record(&header)?;
    let mut record = Vec::with_capacity(table.attr_count());
    for row in 0..table.row_count {
        record.clear();
        for (attr, col) in table.schema.attributes.iter().zip(&table.columns) {
            let text = match col {
                Column::Cat(v) => {
                    let Some(AttrDomain::Categorical(values)) = &attr.domain else {
                        unreachable!()
                    };
                    values[v[row] as usize].clone()
                }
                Column::Int(v) => v[row].to_string(),
                Column::Real(v) => format!("{}", v[row]),
            };
            record.push(text);
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn fixture_schema() -> String {
        r#"{
            "tables": [
                {"name": "household", "primary_private": true, "max_multiplicity": 1,
                 "attributes": [
                    {"name": "h_id", "kind": "integer", "role": "primary-key"},
                    {"name": "rooms", "kind": "integer", "domain": [1, 10]}
                 ]},
                {"name": "person", "max_multiplicity": 3,
                 "attributes": [
                    {"name": "sex", "kind": "integer", "domain": [0, 1]},
                    {"name": "age", "kind": "integer", "domain": [1, 100]},
                    {"name": "h_id", "kind": "integer", "role": "foreign-key", "fk_target": "household"}
                 ]}
            ]
        }"#
        .to_string()
    }

    fn write_fixture(dir: &Path, household: &str, person: &str) -> std::path::PathBuf {
        let schema_path = dir.join("schema.json");
        fs::write(&schema_path, fixture_schema()).unwrap();
        fs::write(dir.join("household.csv"), household).unwrap();
        fs::write(dir.join("person.csv"), person).unwrap();
        schema_path
    }

    #[test]
    fn loads_two_table_database() {
        let dir = tempfile::tempdir().unwrap();
        let schema = write_fixture(
            dir.path(),
            "h_id,rooms\n1,2\n2,5\n3,3\n",
            "sex,age,h_id\n1,27,1\n0,25,1\n0,30,2\n1,32,2\n0,5,2\n1,46,3\n",
        );
        let db = load_database(&schema, dir.path()).unwrap();
        assert_eq!(db.tables[0].row_count, 3);
        assert_eq!(db.tables[1].row_count, 6);
        assert_eq!(
            db.tables[1].column_by_name("h_id").unwrap(),
            &Column::Int(vec![1, 1, 2, 2, 2, 3])
        );
    }

    #[test]
    fn header_only_csv_loads_empty_table() {
        let dir = tempfile::tempdir().unwrap();
        let schema = write_fixture(dir.path(), "h_id,rooms\n", "sex,age,h_id\n");
        let db = load_database(&schema, dir.path()).unwrap();
        assert_eq!(db.tables[0].row_count, 0);
        assert_eq!(db.tables[1].row_count, 0);
    }

    #[test]
    fn out_of_range_cell_is_domain_violation() {
        let dir = tempfile::tempdir().unwrap();
        let schema = write_fixture(dir.path(), "h_id,rooms\n1,11\n", "sex,age,h_id\n");
        let err = load_database(&schema, dir.path()).unwrap_err();
        match err {
            Error::DomainViolation { column, row, value, .. } => {
                assert_eq!(column, "rooms");
                assert_eq!(row, 1);
                assert_eq!(value, "11");
            }
            other => panic!("expected domain violation, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_reported() {
        let dir = tempfile::tempdir().unwrap();
        let schema_path = dir.path().join("schema.json");
        fs::write(&schema_path, fixture_schema()).unwrap();
        fs::write(dir.path().join("household.csv"), "h_id,rooms\n1,2\n").unwrap();
        let err = load_database(&schema_path, dir.path()).unwrap_err();
        assert!(matches!(err, Error::MissingTableFile { table, .. } if table == "person"));
    }

    #[test]
    fn dangling_fk_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let schema = write_fixture(
            dir.path(),
            "h_id,rooms\n1,2\n",
            "sex,age,h_id\n1,27,9\n",
        );
        let err = load_database(&schema, dir.path()).unwrap_err();
        assert!(matches!(err, Error::BrokenReference { value: 9, .. }));
    }

    #[test]
    fn duplicate_pk_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let schema = write_fixture(dir.path(), "h_id,rooms\n1,2\n1,3\n", "sex,age,h_id\n");
        let err = load_database(&schema, dir.path()).unwrap_err();
        assert!(matches!(err, Error::DuplicatePrimaryKey { value: 1, .. }));
    }

    #[test]
    fn missing_value_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let schema = write_fixture(dir.path(), "h_id,rooms\n1,\n", "sex,age,h_id\n");
        let err = load_database(&schema, dir.path()).unwrap_err();
        assert!(matches!(err, Error::MissingValue { .. }));
    }

    #[test]
    fn save_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let schema = write_fixture(
            dir.path(),
            "h_id,rooms\n1,2\n2,5\n3,3\n",
            "sex,age,h_id\n1,27,1\n0,25,1\n0,30,2\n1,32,2\n0,5,2\n1,46,3\n",
        );
        let db = load_database(&schema, dir.path()).unwrap();
        let out = dir.path().join("out");
        save_database(&db, &out).unwrap();
        let reloaded = load_database(&schema, &out).unwrap();
        assert_eq!(db, reloaded);
    }
}
