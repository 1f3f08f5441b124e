//! Per-dialect rendering of types, literals and list operations.

use std::fmt;
use std::str::FromStr;

use crate::aggregate::{ListFn, ScalarKind, Value, ValueKind};
use crate::error::CompileError;
use crate::graph::PropertyKind;

/// | construct        | generic (SQLite-compatible)         | duckdb                      |
/// |------------------|-------------------------------------|-----------------------------|
/// | int / timestamp  | `BIGINT`                            | `BIGINT`                    |
/// | float            | `DOUBLE PRECISION`                  | `DOUBLE`                    |
/// | string           | `VARCHAR`                           | `VARCHAR`                   |
/// | list of T        | JSON text (`TEXT`)                  | `T[]`                       |
/// | append           | `json_insert(l, '$[#]', x)`         | `list_append(l, x)`         |
/// | contains         | `EXISTS` over `json_each(l)`        | `list_contains(l, x)`       |
/// | length           | `json_array_length(l)`              | `len(l)`                    |
/// | min / max        | `CASE` skipping NULL                | `LEAST` / `GREATEST`        |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Dialect {
    #[default]
    Generic,
    DuckDb,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dialect::Generic => "generic",
            Dialect::DuckDb => "duckdb",
        })
    }
}

impl FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "generic" | "sqlite" => Ok(Dialect::Generic),
            "duckdb" => Ok(Dialect::DuckDb),
            other => Err(format!("unknown dialect {other:?} (expected generic or duckdb)")),
        }
    }
}

pub fn quote_ident(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "\"\""))
}

pub fn quote_str(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

impl Dialect {
    pub fn scalar_type(self, k: ScalarKind) -> &'static str {
        match (self, k) {
            (_, ScalarKind::Int | ScalarKind::Timestamp) => "BIGINT",
            (Dialect::Generic, ScalarKind::Float) => "DOUBLE PRECISION",
            (Dialect::DuckDb, ScalarKind::Float) => "DOUBLE",
            (_, ScalarKind::String) => "VARCHAR",
            (_, ScalarKind::Boolean) => "BOOLEAN",
        }
    }

    pub fn value_type(self, k: ValueKind) -> String {
        match (self, k) {
            (_, ValueKind::Scalar(s)) => self.scalar_type(s).to_string(),
            (Dialect::Generic, ValueKind::List(_)) => "TEXT".to_string(),
            (Dialect::DuckDb, ValueKind::List(s)) => format!("{}[]", self.scalar_type(s)),
        }
    }

    pub fn property_type(self, k: PropertyKind) -> &'static str {
        self.scalar_type(k.into())
    }

    pub fn literal(self, v: &Value) -> Result<String, CompileError> {
        Ok(match v {
            Value::Null => "NULL".into(),
            Value::Bool(true) => "TRUE".into(),
            Value::Bool(false) => "FALSE".into(),
            Value::Int(i) | Value::Timestamp(i) => i.to_string(),
            Value::Float(f) if f.is_finite() => format!("{f:?}"),
            Value::Float(f) => return Err(CompileError::Literal(f.to_string())),
            Value::Str(s) => quote_str(s),
            Value::List(items) => {
                let parts = items
                    .iter()
                    .map(|i| self.literal(i))
                    .collect::<Result<Vec<_>, _>>()?
                    .join(", ");
                match self {
                    Dialect::Generic => format!("json_array({parts})"),
                    Dialect::DuckDb => format!("[{parts}]"),
                }
            }
        })
    }

    pub fn least(self, a: &str, b: &str) -> String {
        self.extremum(a, b, "<=", "LEAST")
    }

    pub fn greatest(self, a: &str, b: &str) -> String {
        self.extremum(a, b, ">=", "GREATEST")
    }

    fn extremum(self, a: &str, b: &str, op: &str, func: &str) -> String {
        match self {
            Dialect::DuckDb => format!("{func}({a}, {b})"),
            Dialect::Generic => format!(
                "CASE WHEN {a} IS NULL THEN {b} WHEN {b} IS NULL THEN {a} WHEN {a} {op} {b} THEN {a} ELSE {b} END"
            ),
        }
    }

    pub fn divide(self, a: &str, b: &str) -> String {
        match self {
            Dialect::DuckDb => format!("({a} / {b})"),
            Dialect::Generic => format!("(CAST({a} AS DOUBLE PRECISION) / {b})"),
        }
    }

    pub fn list_append(self, l: &str, x: &str) -> String {
        match self {
            Dialect::DuckDb => format!("list_append({l}, {x})"),
            Dialect::Generic => format!("json_insert({l}, '$[#]', {x})"),
        }
    }

    pub fn list_contains(self, l: &str, x: &str) -> String {
        match self {
            Dialect::DuckDb => format!("list_contains({l}, {x})"),
            Dialect::Generic => format!(
                "CASE WHEN {x} IS NULL THEN NULL ELSE EXISTS (SELECT 1 FROM json_each({l}) WHERE value = {x}) END"
            ),
        }
    }

    pub fn list_len(self, l: &str) -> String {
        match self {
            Dialect::DuckDb => format!("len({l})"),
            Dialect::Generic => format!("json_array_length({l})"),
        }
    }

    pub fn list_reduce(self, f: ListFn, l: &str) -> String {
        let adjacent = |cmp: &str| match self {
            Dialect::DuckDb => format!(
                "COALESCE(list_bool_or([{l}[i] {cmp} {l}[i - 1] FOR i IN range(2, len({l}) + 1)]), FALSE)"
            ),
            Dialect::Generic => format!(
                "EXISTS (SELECT 1 FROM json_each({l}) AS a JOIN json_each({l}) AS b ON b.key = a.key + 1 WHERE b.value {cmp} a.value)"
            ),
        };
        match (self, f) {
            (Dialect::DuckDb, ListFn::Max) => format!("list_max({l})"),
            (Dialect::DuckDb, ListFn::Min) => format!("list_min({l})"),
            (Dialect::DuckDb, ListFn::Sum) => format!("list_sum({l})"),
            (Dialect::DuckDb, ListFn::DistinctLen) => format!("len(list_distinct({l}))"),
            (Dialect::Generic, ListFn::Max) => format!("(SELECT max(value) FROM json_each({l}))"),
            (Dialect::Generic, ListFn::Min) => format!("(SELECT min(value) FROM json_each({l}))"),
            (Dialect::Generic, ListFn::Sum) => format!("(SELECT sum(value) FROM json_each({l}))"),
            (Dialect::Generic, ListFn::DistinctLen) => {
                format!("(SELECT count(DISTINCT value) FROM json_each({l}))")
            }
            (_, ListFn::Increasing) => format!("(NOT {})", adjacent("<=")),
            (_, ListFn::AdjacentEq) => adjacent("="),
        }
    }
}
