use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::EvalError;
use crate::graph::{PropertyKind, PropertyValue};

/// Runtime value of dictionary slots and expressions. `Null` stands for an
/// absent property and propagates like SQL NULL.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(Arc<str>),
    Timestamp(i64),
    List(Arc<Vec<Value>>),
}

impl Value {
    pub fn str(s: &str) -> Self {
        Value::Str(Arc::from(s))
    }

    pub fn list(items: Vec<Value>) -> Self {
        Value::List(Arc::new(items))
    }

    pub fn empty_list() -> Self {
        Value::list(Vec::new())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// Guard semantics: only `Bool(true)` counts as true.
    pub fn is_true(&self) -> bool {
        matches!(self, Value::Bool(true))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Str(_) => "string",
            Value::Timestamp(_) => "timestamp",
            Value::List(_) => "list",
        }
    }

    fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) | Value::Timestamp(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            _ => None,
        }
    }

    fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(v) | Value::Timestamp(v) => Some(*v),
            _ => None,
        }
    }

    /// Ordering across comparable kinds. Numbers compare numerically
    /// regardless of int/float/timestamp. `None` for incomparable kinds.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
            (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
            (Value::List(a), Value::List(b)) => {
                for (x, y) in a.iter().zip(b.iter()) {
                    match x.compare(y)? {
                        Ordering::Equal => continue,
                        ord => return Some(ord),
                    }
                }
                Some(a.len().cmp(&b.len()))
            }
            (Value::Null, Value::Null) => Some(Ordering::Equal),
            _ => match (self.as_i64(), other.as_i64()) {
                (Some(a), Some(b)) => Some(a.cmp(&b)),
                _ => self.as_f64()?.partial_cmp(&other.as_f64()?),
            },
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value as J;
        match self {
            Value::Null => J::Null,
            Value::Bool(b) => J::Bool(*b),
            Value::Int(v) | Value::Timestamp(v) => J::from(*v),
            Value::Float(v) => serde_json::Number::from_f64(*v)
                .map(J::Number)
                .unwrap_or(J::Null),
            Value::Str(s) => J::String(s.to_string()),
            Value::List(items) => J::Array(items.iter().map(Value::to_json).collect()),
        }
    }
}

impl From<&PropertyValue> for Value {
    fn from(p: &PropertyValue) -> Self {
        match p {
            PropertyValue::Int(v) => Value::Int(*v),
            PropertyValue::Float(v) => Value::Float(*v),
            PropertyValue::Str(s) => Value::str(s),
            PropertyValue::Timestamp(v) => Value::Timestamp(*v),
            PropertyValue::List(items) => Value::list(items.iter().map(Value::from).collect()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

pub(crate) fn arith(op: ArithOp, a: &Value, b: &Value) -> Result<Value, EvalError> {
    if a.is_null() || b.is_null() {
        return Ok(Value::Null);
    }
    let type_err = || {
        EvalError::Type(format!(
            "cannot apply {} to {} and {}",
            op.symbol(),
            a.kind_name(),
            b.kind_name()
        ))
    };
    if op == ArithOp::Div {
        let (x, y) = (a.as_f64().ok_or_else(type_err)?, b.as_f64().ok_or_else(type_err)?);
        if y == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        return Ok(Value::Float(x / y));
    }
    match (a.as_i64(), b.as_i64()) {
        (Some(x), Some(y)) => {
            let r = match op {
                ArithOp::Add => x.checked_add(y),
                ArithOp::Sub => x.checked_sub(y),
                ArithOp::Mul => x.checked_mul(y),
                ArithOp::Div => unreachable!(),
            }
            .ok_or(EvalError::Overflow)?;
            let a_ts = matches!(a, Value::Timestamp(_));
            let b_ts = matches!(b, Value::Timestamp(_));
            let ts_result = match op {
                ArithOp::Add => a_ts != b_ts,
                ArithOp::Sub => a_ts && !b_ts,
                _ => false,
            };
            Ok(if ts_result { Value::Timestamp(r) } else { Value::Int(r) })
        }
        _ => {
            let (x, y) = (a.as_f64().ok_or_else(type_err)?, b.as_f64().ok_or_else(type_err)?);
            Ok(Value::Float(match op {
                ArithOp::Add => x + y,
                ArithOp::Sub => x - y,
                ArithOp::Mul => x * y,
                ArithOp::Div => unreachable!(),
            }))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Ge => ord != Ordering::Less,
            CmpOp::Gt => ord == Ordering::Greater,
        }
    }
}

/// Scalar kinds a list slot may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    Int,
    Float,
    String,
    Timestamp,
    Boolean,
}

/// Declared kind of a dictionary slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Scalar(ScalarKind),
    List(ScalarKind),
}

impl ValueKind {
    pub const INT: ValueKind = ValueKind::Scalar(ScalarKind::Int);
    pub const FLOAT: ValueKind = ValueKind::Scalar(ScalarKind::Float);
    pub const STRING: ValueKind = ValueKind::Scalar(ScalarKind::String);
    pub const TIMESTAMP: ValueKind = ValueKind::Scalar(ScalarKind::Timestamp);
    pub const BOOLEAN: ValueKind = ValueKind::Scalar(ScalarKind::Boolean);

    pub fn is_list(self) -> bool {
        matches!(self, ValueKind::List(_))
    }
}

impl From<PropertyKind> for ScalarKind {
    fn from(k: PropertyKind) -> Self {
        match k {
            PropertyKind::Int => ScalarKind::Int,
            PropertyKind::Float => ScalarKind::Float,
            PropertyKind::String => ScalarKind::String,
            PropertyKind::Timestamp => ScalarKind::Timestamp,
        }
    }
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalarKind::Int => "int",
            ScalarKind::Float => "float",
            ScalarKind::String => "string",
            ScalarKind::Timestamp => "timestamp",
            ScalarKind::Boolean => "boolean",
        })
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueKind::Scalar(s) => write!(f, "{s}"),
            ValueKind::List(s) => write!(f, "list<{s}>"),
        }
    }
}

impl FromStr for ScalarKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "int" => ScalarKind::Int,
            "float" => ScalarKind::Float,
            "string" => ScalarKind::String,
            "timestamp" => ScalarKind::Timestamp,
            "boolean" | "bool" => ScalarKind::Boolean,
            other => return Err(format!("unknown kind {other:?}")),
        })
    }
}

impl FromStr for ValueKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("list<").and_then(|r| r.strip_suffix('>')) {
            return Ok(ValueKind::List(inner.parse()?));
        }
        Ok(ValueKind::Scalar(s.parse()?))
    }
}
