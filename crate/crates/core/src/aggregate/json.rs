//! JSON encoding of query specs. Expressions use prefix s-expression
//! arrays such as `["<=", -2, ["-", ["edge", "time"], ["dict", "last_time"]]]`;
//! bare JSON scalars are constants.

use std::collections::BTreeMap;
use std::path::Path;

use indexmap::IndexMap;
use serde_json::{json, Map, Value as J};

use crate::error::SpecError;

use super::expr::{Expr, ListFn};
use super::spec::{DictionarySchema, PathQuerySpec, PerTransition, SelectiveAggregateSpec};
use super::value::{ArithOp, CmpOp, Value, ValueKind};

const ARITH: [ArithOp; 4] = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div];
const CMP: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];

fn fmt_err(msg: impl Into<String>) -> SpecError {
    SpecError::Format(msg.into())
}

fn value_to_json(v: &Value) -> J {
    match v {
        Value::Null => J::Null,
        Value::Bool(b) => J::Bool(*b),
        Value::Int(i) => json!(i),
        Value::Float(f) => json!(f),
        Value::Str(s) => J::String(s.to_string()),
        Value::Timestamp(t) => json!(["timestamp", t]),
        Value::List(items) => {
            let mut out = vec![J::from("list")];
            out.extend(items.iter().map(value_to_json));
            J::Array(out)
        }
    }
}

pub fn expr_to_json(e: &Expr) -> J {
    let op = |name: &str, args: Vec<&Expr>| {
        let mut out = vec![J::from(name)];
        out.extend(args.into_iter().map(expr_to_json));
        J::Array(out)
    };
    match e {
        Expr::Const(v) => value_to_json(v),
        Expr::DictRef(k) => json!(["dict", k]),
        Expr::EdgeProp(p) => json!(["edge", p]),
        Expr::EdgeId => json!(["edge_id"]),
        Expr::EdgeLabel => json!(["edge_label"]),
        Expr::FromState => json!(["from_state"]),
        Expr::ToState => json!(["to_state"]),
        Expr::Case(branches, otherwise) => {
            let bs: Vec<J> = branches
                .iter()
                .map(|(g, v)| J::Array(vec![expr_to_json(g), expr_to_json(v)]))
                .collect();
            json!(["case", bs, expr_to_json(otherwise)])
        }
        other => op(other.node_name(), other.children()),
    }
}

fn literal_value(items: &[J]) -> Option<Value> {
    items
        .iter()
        .map(|j| match j {
            J::Array(a) if a.first().and_then(J::as_str) == Some("list") => {
                literal_value(&a[1..])
            }
            J::Array(_) | J::Object(_) => None,
            scalar => scalar_value(scalar).ok(),
        })
        .collect::<Option<Vec<Value>>>()
        .map(Value::list)
}

fn scalar_value(j: &J) -> Result<Value, SpecError> {
    Ok(match j {
        J::Null => Value::Null,
        J::Bool(b) => Value::Bool(*b),
        J::String(s) => Value::str(s),
        J::Number(n) => match n.as_i64() {
            Some(i) => Value::Int(i),
            None => Value::Float(
                n.as_f64()
                    .ok_or_else(|| fmt_err(format!("number {n} out of range")))?,
            ),
        },
        other => return Err(fmt_err(format!("expected scalar, got {other}"))),
    })
}

fn string_arg<'a>(args: &'a [J], op: &str) -> Result<&'a str, SpecError> {
    match args {
        [J::String(s)] => Ok(s),
        _ => Err(fmt_err(format!("{op:?} takes one string argument"))),
    }
}

fn arity<const N: usize>(args: &[J], op: &str) -> Result<[Box<Expr>; N], SpecError> {
    if args.len() != N {
        return Err(fmt_err(format!(
            "{op:?} takes {N} argument(s), got {}",
            args.len()
        )));
    }
    let parsed: Vec<Box<Expr>> = args
        .iter()
        .map(|a| expr_from_json(a).map(Box::new))
        .collect::<Result<_, _>>()?;
    Ok(parsed.try_into().unwrap_or_else(|_| unreachable!()))
}

pub fn expr_from_json(j: &J) -> Result<Expr, SpecError> {
    let J::Array(items) = j else {
        if j.is_object() {
            return Err(fmt_err(format!("expected expression, got object {j}")));
        }
        return Ok(Expr::Const(scalar_value(j)?));
    };
    let (head, args) = items
        .split_first()
        .ok_or_else(|| fmt_err("empty expression array"))?;
    let op = head
        .as_str()
        .ok_or_else(|| fmt_err(format!("operator must be a string, got {head}")))?;
    if let Some(a) = ARITH.into_iter().find(|a| a.symbol() == op) {
        let [x, y] = arity::<2>(args, op)?;
        return Ok(Expr::Arith(a, x, y));
    }
    if let Some(c) = CMP.into_iter().find(|c| c.symbol() == op || (op == "<>" && *c == CmpOp::Ne)) {
        let [x, y] = arity::<2>(args, op)?;
        return Ok(Expr::Cmp(c, x, y));
    }
    if let Some(f) = ListFn::ALL.into_iter().find(|f| f.name() == op) {
        let [x] = arity::<1>(args, op)?;
        return Ok(Expr::ListReduce(f, x));
    }
    let nary = || args.iter().map(expr_from_json).collect::<Result<Vec<_>, _>>();
    Ok(match op {
        "dict" => Expr::DictRef(string_arg(args, op)?.to_string()),
        "edge" => Expr::EdgeProp(string_arg(args, op)?.to_string()),
        "edge_id" | "edge_label" | "from_state" | "to_state" if !args.is_empty() => {
            return Err(fmt_err(format!("{op:?} takes no arguments")))
        }
        "edge_id" => Expr::EdgeId,
        "edge_label" => Expr::EdgeLabel,
        "from_state" => Expr::FromState,
        "to_state" => Expr::ToState,
        "timestamp" => match args {
            [n] => Expr::Const(Value::Timestamp(
                n.as_i64()
                    .filter(|t| *t >= 0)
                    .ok_or_else(|| fmt_err("timestamp takes a non-negative integer"))?,
            )),
            _ => return Err(fmt_err("timestamp takes one argument")),
        },
        "list" => match literal_value(args) {
            Some(v) => Expr::Const(v),
            None => return Err(fmt_err("list literals may only hold constants")),
        },
        "and" => Expr::And(nary()?),
        "or" => Expr::Or(nary()?),
        "not" => {
            let [x] = arity::<1>(args, op)?;
            Expr::Not(x)
        }
        "min" | "max" | "list_append" | "list_contains" | "ifnull" => {
            let [x, y] = arity::<2>(args, op)?;
            match op {
                "min" => Expr::Min(x, y),
                "max" => Expr::Max(x, y),
                "list_append" => Expr::ListAppend(x, y),
                "list_contains" => Expr::ListContains(x, y),
                _ => Expr::IfNull(x, y),
            }
        }
        "list_len" => {
            let [x] = arity::<1>(args, op)?;
            Expr::ListLen(x)
        }
        "case" => {
            let [J::Array(branches), otherwise] = args else {
                return Err(fmt_err("\"case\" takes [[guard, value], ...] and an else value"));
            };
            let branches = branches
                .iter()
                .map(|b| match b.as_array().map(Vec::as_slice) {
                    Some([g, v]) => Ok((expr_from_json(g)?, expr_from_json(v)?)),
                    _ => Err(fmt_err("case branch must be [guard, value]")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Expr::Case(branches, Box::new(expr_from_json(otherwise)?))
        }
        other => return Err(fmt_err(format!("unknown operator {other:?}"))),
    })
}

fn map_to_json(m: &IndexMap<String, Expr>) -> J {
    J::Object(m.iter().map(|(k, e)| (k.clone(), expr_to_json(e))).collect())
}

fn per_transition_to_json<T>(p: &PerTransition<T>, f: impl Fn(&T) -> J) -> J {
    match p {
        PerTransition::Factorized(v) => json!({ "*": f(v) }),
        PerTransition::Keyed(m) => J::Object(
            m.iter()
                .map(|((a, b), v)| (format!("{a}->{b}"), f(v)))
                .collect(),
        ),
    }
}

pub fn spec_to_json(q: &PathQuerySpec) -> J {
    let a = &q.aggregate;
    let mut out = Map::new();
    if let Some(name) = &q.name {
        out.insert("name".into(), J::from(name.as_str()));
    }
    out.insert("start_vertices".into(), json!(q.start_vertices));
    out.insert("regex".into(), J::from(q.regex.as_str()));
    out.insert("max_length".into(), json!(q.max_length));
    out.insert(
        "schema".into(),
        J::Object(
            a.schema
                .entries()
                .iter()
                .map(|(k, kind)| (k.clone(), J::from(kind.to_string())))
                .collect(),
        ),
    );
    out.insert("init".into(), map_to_json(&a.init));
    out.insert("update".into(), per_transition_to_json(&a.update, map_to_json));
    out.insert("viable".into(), per_transition_to_json(&a.viable, expr_to_json));
    out.insert("finalize".into(), map_to_json(&a.finalize));
    out.insert("viable_final".into(), expr_to_json(&a.viable_final));
    J::Object(out)
}

fn field<'a>(obj: &'a Map<String, J>, key: &str) -> Result<&'a J, SpecError> {
    obj.get(key)
        .ok_or_else(|| fmt_err(format!("missing field {key:?}")))
}

fn object<'a>(j: &'a J, what: &str) -> Result<&'a Map<String, J>, SpecError> {
    j.as_object()
        .ok_or_else(|| fmt_err(format!("{what} must be an object")))
}

fn map_from_json(j: &J, what: &str) -> Result<IndexMap<String, Expr>, SpecError> {
    object(j, what)?
        .iter()
        .map(|(k, e)| {
            expr_from_json(e)
                .map(|e| (k.clone(), e))
                .map_err(|err| fmt_err(format!("{what}[{k}]: {err}")))
        })
        .collect()
}

fn parse_transition(key: &str) -> Option<(u32, u32)> {
    let (a, b) = key.split_once("->")?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn per_transition_from_json<T>(
    j: &J,
    what: &str,
    f: impl Fn(&J, &str) -> Result<T, SpecError>,
) -> Result<PerTransition<T>, SpecError> {
    let obj = object(j, what)?;
    if let Some(v) = obj.get("*") {
        if obj.len() != 1 {
            return Err(fmt_err(format!(
                "{what}: \"*\" cannot be mixed with transition keys"
            )));
        }
        return Ok(PerTransition::Factorized(f(v, &format!("{what}[*]"))?));
    }
    let mut keyed = BTreeMap::new();
    for (k, v) in obj {
        let t = parse_transition(k)
            .ok_or_else(|| fmt_err(format!("{what}: bad transition key {k:?}")))?;
        keyed.insert(t, f(v, &format!("{what}[{k}]"))?);
    }
    Ok(PerTransition::Keyed(keyed))
}

pub fn spec_from_json(j: &J) -> Result<PathQuerySpec, SpecError> {
    let obj = object(j, "query spec")?;
    let start_vertices = field(obj, "start_vertices")?
        .as_array()
        .and_then(|a| a.iter().map(|v| v.as_str().map(String::from)).collect())
        .ok_or_else(|| fmt_err("start_vertices must be a list of strings"))?;
    let regex = field(obj, "regex")?
        .as_str()
        .ok_or_else(|| fmt_err("regex must be a string"))?
        .to_string();
    let max_length = field(obj, "max_length")?
        .as_u64()
        .ok_or_else(|| fmt_err("max_length must be a non-negative integer"))?
        as usize;
    let name = match obj.get("name") {
        None | Some(J::Null) => None,
        Some(J::String(s)) => Some(s.clone()),
        Some(_) => return Err(fmt_err("name must be a string")),
    };
    let mut schema = DictionarySchema::default();
    for (k, kind) in object(field(obj, "schema")?, "schema")? {
        let kind: ValueKind = kind
            .as_str()
            .ok_or_else(|| fmt_err(format!("schema[{k}] must be a kind name")))?
            .parse()
            .map_err(|e| fmt_err(format!("schema[{k}]: {e}")))?;
        schema.push(k.clone(), kind);
    }
    let aggregate = SelectiveAggregateSpec {
        schema,
        init: map_from_json(field(obj, "init")?, "init")?,
        update: per_transition_from_json(field(obj, "update")?, "update", map_from_json)?,
        viable: per_transition_from_json(field(obj, "viable")?, "viable", |j, what| {
            expr_from_json(j).map_err(|e| fmt_err(format!("{what}: {e}")))
        })?,
        finalize: map_from_json(field(obj, "finalize")?, "finalize")?,
        viable_final: expr_from_json(field(obj, "viable_final")?)
            .map_err(|e| fmt_err(format!("viable_final: {e}")))?,
    };
    Ok(PathQuerySpec {
        name,
        start_vertices,
        regex,
        aggregate,
        max_length,
    })
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<PathQuerySpec, SpecError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| fmt_err(format!("cannot read {}: {e}", path.display())))?;
    let j: J = serde_json::from_str(&text)
        .map_err(|e| fmt_err(format!("{}: {e}", path.display())))?;
    spec_from_json(&j)
}

pub fn save_spec(q: &PathQuerySpec, path: impl AsRef<Path>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&spec_to_json(q))?;
    std::fs::write(path, text + "\n")
}
