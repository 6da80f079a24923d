//! Schema and table representations, partitions, and database loading.

mod load;
mod schema;
mod table;

pub use load::{load_database, load_database_with_schema, save_database, save_table};
pub use schema::{
    schema_from_json, schema_to_json, AttrDomain, AttrKind, AttrRole, AttributeSpec,
    DatabaseSchema, TableSchema,
};
pub use table::{Axis, CellValue, Column, ColumnTable, Database, IndexPartition, Side};
