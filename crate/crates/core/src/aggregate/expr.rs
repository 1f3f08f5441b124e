//! Expression IR shared by the native evaluator and the SQL compiler.

use std::collections::HashSet;

use crate::error::EvalError;
use crate::graph::Edge;

use super::value::{arith, ArithOp, CmpOp, Value};

/// Whole-list reductions, used by default-construction predicates that
/// inspect the collected property lists of a complete path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ListFn {
    Max,
    Min,
    Sum,
    /// Number of distinct non-null elements.
    DistinctLen,
    /// Every adjacent non-null pair is strictly increasing.
    Increasing,
    /// Some adjacent non-null pair is equal.
    AdjacentEq,
}

impl ListFn {
    pub const ALL: [ListFn; 6] = [
        ListFn::Max,
        ListFn::Min,
        ListFn::Sum,
        ListFn::DistinctLen,
        ListFn::Increasing,
        ListFn::AdjacentEq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ListFn::Max => "list_max",
            ListFn::Min => "list_min",
            ListFn::Sum => "list_sum",
            ListFn::DistinctLen => "list_distinct_len",
            ListFn::Increasing => "list_increasing",
            ListFn::AdjacentEq => "list_adjacent_eq",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Value),
    DictRef(String),
    EdgeProp(String),
    EdgeId,
    EdgeLabel,
    FromState,
    ToState,
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    ListAppend(Box<Expr>, Box<Expr>),
    ListContains(Box<Expr>, Box<Expr>),
    ListLen(Box<Expr>),
    ListReduce(ListFn, Box<Expr>),
    IfNull(Box<Expr>, Box<Expr>),
    Case(Vec<(Expr, Expr)>, Box<Expr>),
}

// Builders. Kept terse so the builtin catalogue reads close to the
// formulas it encodes.
impl Expr {
    pub fn lit(v: impl Into<Value>) -> Self {
        Expr::Const(v.into())
    }

    pub fn null() -> Self {
        Expr::Const(Value::Null)
    }

    pub fn t() -> Self {
        Expr::Const(Value::Bool(true))
    }

    pub fn f() -> Self {
        Expr::Const(Value::Bool(false))
    }

    pub fn dict(key: &str) -> Self {
        Expr::DictRef(key.to_string())
    }

    pub fn edge(prop: &str) -> Self {
        Expr::EdgeProp(prop.to_string())
    }

    pub fn arith(op: ArithOp, a: Expr, b: Expr) -> Self {
        Expr::Arith(op, Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Self {
        Self::arith(ArithOp::Add, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Self {
        Self::arith(ArithOp::Sub, a, b)
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Self {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn lt(a: Expr, b: Expr) -> Self {
        Self::cmp(CmpOp::Lt, a, b)
    }

    pub fn le(a: Expr, b: Expr) -> Self {
        Self::cmp(CmpOp::Le, a, b)
    }

    pub fn eq(a: Expr, b: Expr) -> Self {
        Self::cmp(CmpOp::Eq, a, b)
    }

    pub fn ge(a: Expr, b: Expr) -> Self {
        Self::cmp(CmpOp::Ge, a, b)
    }

    pub fn gt(a: Expr, b: Expr) -> Self {
        Self::cmp(CmpOp::Gt, a, b)
    }

    /// Conjunction that flattens nested `And`s and drops literal `true`.
    pub fn and(items: impl IntoIterator<Item = Expr>) -> Self {
        let mut out = Vec::new();
        for item in items {
            match item {
                Expr::And(inner) => out.extend(inner),
                e if e.is_true_literal() => {}
                e => out.push(e),
            }
        }
        match out.len() {
            0 => Expr::t(),
            1 => out.pop().unwrap(),
            _ => Expr::And(out),
        }
    }

    pub fn or(items: impl IntoIterator<Item = Expr>) -> Self {
        Expr::Or(items.into_iter().collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Expr) -> Self {
        Expr::Not(Box::new(a))
    }

    pub fn min(a: Expr, b: Expr) -> Self {
        Expr::Min(Box::new(a), Box::new(b))
    }

    pub fn max(a: Expr, b: Expr) -> Self {
        Expr::Max(Box::new(a), Box::new(b))
    }

    pub fn list_append(list: Expr, elem: Expr) -> Self {
        Expr::ListAppend(Box::new(list), Box::new(elem))
    }

    pub fn list_contains(list: Expr, elem: Expr) -> Self {
        Expr::ListContains(Box::new(list), Box::new(elem))
    }

    pub fn list_len(list: Expr) -> Self {
        Expr::ListLen(Box::new(list))
    }

    pub fn reduce(f: ListFn, list: Expr) -> Self {
        Expr::ListReduce(f, Box::new(list))
    }

    pub fn if_null(a: Expr, b: Expr) -> Self {
        Expr::IfNull(Box::new(a), Box::new(b))
    }

    pub fn case(branches: Vec<(Expr, Expr)>, otherwise: Expr) -> Self {
        Expr::Case(branches, Box::new(otherwise))
    }

    pub fn is_true_literal(&self) -> bool {
        matches!(self, Expr::Const(Value::Bool(true)))
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_)
            | Expr::DictRef(_)
            | Expr::EdgeProp(_)
            | Expr::EdgeId
            | Expr::EdgeLabel
            | Expr::FromState
            | Expr::ToState => Vec::new(),
            Expr::Arith(_, a, b)
            | Expr::Cmp(_, a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b)
            | Expr::ListAppend(a, b)
            | Expr::ListContains(a, b)
            | Expr::IfNull(a, b) => vec![a, b],
            Expr::And(items) | Expr::Or(items) => items.iter().collect(),
            Expr::Not(a) | Expr::ListLen(a) | Expr::ListReduce(_, a) => vec![a],
            Expr::Case(branches, otherwise) => branches
                .iter()
                .flat_map(|(g, v)| [g, v])
                .chain(std::iter::once(otherwise.as_ref()))
                .collect(),
        }
    }

    /// Visits every node, parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn references_edge(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            found |= matches!(e, Expr::EdgeProp(_) | Expr::EdgeId | Expr::EdgeLabel)
        });
        found
    }

    pub fn references_state(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::FromState | Expr::ToState));
        found
    }

    pub fn dict_refs(&self) -> HashSet<&str> {
        let mut out = HashSet::new();
        self.walk(&mut |e| {
            if let Expr::DictRef(k) = e {
                out.insert(k.as_str());
            }
        });
        out
    }

    /// Returns a copy with dictionary references renamed through `f`.
    pub fn rename_dict(&self, f: &impl Fn(&str) -> String) -> Expr {
        let r = |e: &Expr| Box::new(e.rename_dict(f));
        match self {
            Expr::DictRef(k) => Expr::DictRef(f(k)),
            Expr::Const(_)
            | Expr::EdgeProp(_)
            | Expr::EdgeId
            | Expr::EdgeLabel
            | Expr::FromState
            | Expr::ToState => self.clone(),
            Expr::Arith(op, a, b) => Expr::Arith(*op, r(a), r(b)),
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, r(a), r(b)),
            Expr::And(items) => Expr::And(items.iter().map(|e| e.rename_dict(f)).collect()),
            Expr::Or(items) => Expr::Or(items.iter().map(|e| e.rename_dict(f)).collect()),
            Expr::Not(a) => Expr::Not(r(a)),
            Expr::Min(a, b) => Expr::Min(r(a), r(b)),
            Expr::Max(a, b) => Expr::Max(r(a), r(b)),
            Expr::ListAppend(a, b) => Expr::ListAppend(r(a), r(b)),
            Expr::ListContains(a, b) => Expr::ListContains(r(a), r(b)),
            Expr::ListLen(a) => Expr::ListLen(r(a)),
            Expr::ListReduce(op, a) => Expr::ListReduce(*op, r(a)),
            Expr::IfNull(a, b) => Expr::IfNull(r(a), r(b)),
            Expr::Case(branches, otherwise) => Expr::Case(
                branches
                    .iter()
                    .map(|(g, v)| (g.rename_dict(f), v.rename_dict(f)))
                    .collect(),
                r(otherwise),
            ),
        }
    }

    /// Short name of the node kind, used in diagnostics.
    pub fn node_name(&self) -> &'static str {
        match self {
            Expr::Const(_) => "const",
            Expr::DictRef(_) => "dict",
            Expr::EdgeProp(_) => "edge",
            Expr::EdgeId => "edge_id",
            Expr::EdgeLabel => "edge_label",
            Expr::FromState => "from_state",
            Expr::ToState => "to_state",
            Expr::Arith(op, ..) => op.symbol(),
            Expr::Cmp(op, ..) => op.symbol(),
            Expr::And(_) => "and",
            Expr::Or(_) => "or",
            Expr::Not(_) => "not",
            Expr::Min(..) => "min",
            Expr::Max(..) => "max",
            Expr::ListAppend(..) => "list_append",
            Expr::ListContains(..) => "list_contains",
            Expr::ListLen(_) => "list_len",
            Expr::ListReduce(f, _) => f.name(),
            Expr::IfNull(..) => "ifnull",
            Expr::Case(..) => "case",
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::str(v)
    }
}

/// Everything an expression may observe.
#[derive(Debug, Clone, Copy)]
pub struct Scope<'a> {
    /// Dictionary keys, aligned with `dict`.
    pub keys: &'a [String],
    pub dict: &'a [Value],
    pub edge: Option<&'a Edge>,
    pub from_state: Option<u32>,
    pub to_state: Option<u32>,
}

impl<'a> Scope<'a> {
    pub fn dictionary(keys: &'a [String], dict: &'a [Value]) -> Self {
        Scope {
            keys,
            dict,
            edge: None,
            from_state: None,
            to_state: None,
        }
    }

    pub fn transition(mut self, edge: &'a Edge, from: u32, to: u32) -> Self {
        self.edge = Some(edge);
        self.from_state = Some(from);
        self.to_state = Some(to);
        self
    }

    fn dict_value(&self, key: &str) -> Result<Value, EvalError> {
        self.keys
            .iter()
            .position(|k| k == key)
            .and_then(|i| self.dict.get(i))
            .cloned()
            .ok_or_else(|| EvalError::Unbound(format!("dictionary key {key:?}")))
    }

    fn edge(&self, what: &str) -> Result<&'a Edge, EvalError> {
        self.edge
            .ok_or_else(|| EvalError::Unbound(format!("{what} outside a transition")))
    }
}

fn bool_of(v: &Value, ctx: &str) -> Result<Option<bool>, EvalError> {
    match v {
        Value::Bool(b) => Ok(Some(*b)),
        Value::Null => Ok(None),
        other => Err(EvalError::Type(format!(
            "{ctx} expects boolean, got {}",
            other.kind_name()
        ))),
    }
}

fn list_of<'v>(v: &'v Value, ctx: &str) -> Result<Option<&'v [Value]>, EvalError> {
    match v {
        Value::List(items) => Ok(Some(items.as_slice())),
        Value::Null => Ok(None),
        other => Err(EvalError::Type(format!(
            "{ctx} expects list, got {}",
            other.kind_name()
        ))),
    }
}

fn extremum(a: Value, b: Value, want: std::cmp::Ordering) -> Result<Value, EvalError> {
    match (a.is_null(), b.is_null()) {
        (true, _) => Ok(b),
        (_, true) => Ok(a),
        _ => {
            let ord = a.compare(&b).ok_or_else(|| {
                EvalError::Type(format!("cannot compare {} and {}", a.kind_name(), b.kind_name()))
            })?;
            Ok(if ord == want || ord == std::cmp::Ordering::Equal { a } else { b })
        }
    }
}

fn reduce(f: ListFn, items: &[Value]) -> Result<Value, EvalError> {
    let present: Vec<&Value> = items.iter().filter(|v| !v.is_null()).collect();
    let incomparable = || EvalError::Type(format!("{} over incomparable elements", f.name()));
    match f {
        ListFn::Max | ListFn::Min => {
            let want = if f == ListFn::Max {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Less
            };
            present
                .into_iter()
                .try_fold(Value::Null, |acc, v| extremum(acc, v.clone(), want))
        }
        ListFn::Sum => present
            .into_iter()
            .try_fold(Value::Null, |acc, v| match acc {
                Value::Null => Ok(v.clone()),
                acc => arith(ArithOp::Add, &acc, v),
            }),
        ListFn::DistinctLen => {
            let mut distinct: Vec<&Value> = Vec::new();
            for v in present {
                if !distinct
                    .iter()
                    .any(|d| d.compare(v) == Some(std::cmp::Ordering::Equal))
                {
                    distinct.push(v);
                }
            }
            Ok(Value::Int(distinct.len() as i64))
        }
        ListFn::Increasing | ListFn::AdjacentEq => {
            let mut hit = false;
            for w in items.windows(2) {
                if w[0].is_null() || w[1].is_null() {
                    continue;
                }
                let ord = w[0].compare(&w[1]).ok_or_else(incomparable)?;
                hit |= match f {
                    ListFn::Increasing => ord != std::cmp::Ordering::Less,
                    _ => ord == std::cmp::Ordering::Equal,
                };
            }
            Ok(Value::Bool(if f == ListFn::Increasing { !hit } else { hit }))
        }
    }
}

/// Strict evaluation with SQL-style null propagation.
pub fn eval_expr(e: &Expr, scope: &Scope<'_>) -> Result<Value, EvalError> {
    Ok(match e {
        Expr::Const(v) => v.clone(),
        Expr::DictRef(k) => scope.dict_value(k)?,
        Expr::EdgeProp(p) => scope
            .edge("edge property")?
            .get_property(p)
            .map(Value::from)
            .unwrap_or(Value::Null),
        Expr::EdgeId => Value::str(&scope.edge("edge id")?.id),
        Expr::EdgeLabel => Value::str(&scope.edge("edge label")?.label),
        Expr::FromState => Value::Int(
            scope
                .from_state
                .ok_or_else(|| EvalError::Unbound("from_state".into()))? as i64,
        ),
        Expr::ToState => Value::Int(
            scope
                .to_state
                .ok_or_else(|| EvalError::Unbound("to_state".into()))? as i64,
        ),
        Expr::Arith(op, a, b) => arith(*op, &eval_expr(a, scope)?, &eval_expr(b, scope)?)?,
        Expr::Cmp(op, a, b) => {
            let (a, b) = (eval_expr(a, scope)?, eval_expr(b, scope)?);
            if a.is_null() || b.is_null() {
                Value::Null
            } else {
                let ord = a.compare(&b).ok_or_else(|| {
                    EvalError::Type(format!(
                        "cannot compare {} {} {}",
                        a.kind_name(),
                        op.symbol(),
                        b.kind_name()
                    ))
                })?;
                Value::Bool(op.holds(ord))
            }
        }
        Expr::And(items) => {
            let mut saw_null = false;
            for item in items {
                match bool_of(&eval_expr(item, scope)?, "and")? {
                    Some(false) => return Ok(Value::Bool(false)),
                    None => saw_null = true,
                    Some(true) => {}
                }
            }
            if saw_null {
                Value::Null
            } else {
                Value::Bool(true)
            }
        }
        Expr::Or(items) => {
            let mut saw_null = false;
            for item in items {
                match bool_of(&eval_expr(item, scope)?, "or")? {
                    Some(true) => return Ok(Value::Bool(true)),
                    None => saw_null = true,
                    Some(false) => {}
                }
            }
            if saw_null {
                Value::Null
            } else {
                Value::Bool(false)
            }
        }
        Expr::Not(a) => match bool_of(&eval_expr(a, scope)?, "not")? {
            Some(b) => Value::Bool(!b),
            None => Value::Null,
        },
        Expr::Min(a, b) => extremum(
            eval_expr(a, scope)?,
            eval_expr(b, scope)?,
            std::cmp::Ordering::Less,
        )?,
        Expr::Max(a, b) => extremum(
            eval_expr(a, scope)?,
            eval_expr(b, scope)?,
            std::cmp::Ordering::Greater,
        )?,
        Expr::ListAppend(l, x) => {
            let list = eval_expr(l, scope)?;
            let elem = eval_expr(x, scope)?;
            match list_of(&list, "list_append")? {
                Some(items) => {
                    let mut v = Vec::with_capacity(items.len() + 1);
                    v.extend_from_slice(items);
                    v.push(elem);
                    Value::list(v)
                }
                None => Value::Null,
            }
        }
        Expr::ListContains(l, x) => {
            let list = eval_expr(l, scope)?;
            let elem = eval_expr(x, scope)?;
            match (list_of(&list, "list_contains")?, elem.is_null()) {
                (Some(items), false) => Value::Bool(
                    items
                        .iter()
                        .any(|i| i.compare(&elem) == Some(std::cmp::Ordering::Equal) && !i.is_null()),
                ),
                _ => Value::Null,
            }
        }
        Expr::ListLen(l) => match list_of(&eval_expr(l, scope)?, "list_len")? {
            Some(items) => Value::Int(items.len() as i64),
            None => Value::Null,
        },
        Expr::ListReduce(f, l) => match list_of(&eval_expr(l, scope)?, f.name())? {
            Some(items) => reduce(*f, items)?,
            None => Value::Null,
        },
        Expr::IfNull(a, b) => match eval_expr(a, scope)? {
            Value::Null => eval_expr(b, scope)?,
            v => v,
        },
        Expr::Case(branches, otherwise) => {
            for (guard, value) in branches {
                if eval_expr(guard, scope)?.is_true() {
                    return eval_expr(value, scope);
                }
            }
            eval_expr(otherwise, scope)?
        }
    })
}
