//! Static checks for query specs: transition coverage, reference
//! resolution and a small type system over [`Expr`].

use std::collections::BTreeSet;

use crate::graph::GraphSchema;
use crate::regex::TransitionTable;

use super::expr::{Expr, ListFn};
use super::spec::{PathQuerySpec, PerTransition, SelectiveAggregateSpec};
use super::value::{ArithOp, ScalarKind, Value, ValueKind};

/// Columns of the path relation that dictionary keys may not shadow.
pub const RESERVED_COLUMNS: [&str; 4] = ["v", "q", "d", "path_length"];

#[derive(Debug, Clone, PartialEq)]
enum Ty {
    /// Null literal or otherwise unconstrained.
    Any,
    Bool,
    Int,
    Float,
    Str,
    Ts,
    List(Box<Ty>),
}

impl Ty {
    fn from_scalar(k: ScalarKind) -> Ty {
        match k {
            ScalarKind::Int => Ty::Int,
            ScalarKind::Float => Ty::Float,
            ScalarKind::String => Ty::Str,
            ScalarKind::Timestamp => Ty::Ts,
            ScalarKind::Boolean => Ty::Bool,
        }
    }

    fn from_kind(k: ValueKind) -> Ty {
        match k {
            ValueKind::Scalar(s) => Ty::from_scalar(s),
            ValueKind::List(s) => Ty::List(Box::new(Ty::from_scalar(s))),
        }
    }

    fn of_value(v: &Value) -> Ty {
        match v {
            Value::Null => Ty::Any,
            Value::Bool(_) => Ty::Bool,
            Value::Int(_) => Ty::Int,
            Value::Float(_) => Ty::Float,
            Value::Str(_) => Ty::Str,
            Value::Timestamp(_) => Ty::Ts,
            Value::List(items) => Ty::List(Box::new(
                items
                    .iter()
                    .map(Ty::of_value)
                    .find(|t| *t != Ty::Any)
                    .unwrap_or(Ty::Any),
            )),
        }
    }

    fn numeric(&self) -> bool {
        matches!(self, Ty::Any | Ty::Int | Ty::Float | Ty::Ts)
    }

    fn compatible(&self, other: &Ty) -> bool {
        match (self, other) {
            (Ty::Any, _) | (_, Ty::Any) => true,
            (Ty::List(a), Ty::List(b)) => a.compatible(b),
            (a, b) if a.numeric() && b.numeric() => true,
            (a, b) => a == b,
        }
    }

    fn join(&self, other: &Ty) -> Ty {
        match (self, other) {
            (Ty::Any, t) | (t, Ty::Any) => t.clone(),
            (Ty::Float, t) | (t, Ty::Float) if t.numeric() => Ty::Float,
            (Ty::List(a), Ty::List(b)) => Ty::List(Box::new(a.join(b))),
            (a, _) => a.clone(),
        }
    }

    /// Whether a value of this type may be stored in a slot of `slot` type.
    fn assignable_to(&self, slot: &Ty) -> bool {
        match (self, slot) {
            (Ty::Any, _) => true,
            (Ty::Int | Ty::Ts, Ty::Int | Ty::Ts | Ty::Float) => true,
            (Ty::List(a), Ty::List(b)) => a.assignable_to(b),
            (a, b) => a == b,
        }
    }

    fn describe(&self) -> String {
        match self {
            Ty::Any => "null".into(),
            Ty::Bool => "boolean".into(),
            Ty::Int => "int".into(),
            Ty::Float => "float".into(),
            Ty::Str => "string".into(),
            Ty::Ts => "timestamp".into(),
            Ty::List(t) => format!("list<{}>", t.describe()),
        }
    }
}

struct Checker<'a> {
    aggregate: &'a SelectiveAggregateSpec,
    graph: &'a GraphSchema,
    diagnostics: Vec<String>,
}

#[derive(Clone, Copy)]
struct Ctx<'w> {
    site: &'w str,
    edge: bool,
    state: bool,
    dict: bool,
}

impl Checker<'_> {
    fn diag(&mut self, ctx: Ctx<'_>, msg: String) {
        self.diagnostics.push(format!("{}: {msg}", ctx.site));
    }

    fn expect(&mut self, ctx: Ctx<'_>, e: &Expr, pred: fn(&Ty) -> bool, what: &str) -> Ty {
        let ty = self.infer(ctx, e);
        if !pred(&ty) {
            self.diag(
                ctx,
                format!("{} expects {what}, found {}", e.node_name(), ty.describe()),
            );
        }
        ty
    }

    fn infer(&mut self, ctx: Ctx<'_>, e: &Expr) -> Ty {
        let is_bool: fn(&Ty) -> bool = |t| matches!(t, Ty::Any | Ty::Bool);
        let is_list: fn(&Ty) -> bool = |t| matches!(t, Ty::Any | Ty::List(_));
        let is_num: fn(&Ty) -> bool = Ty::numeric;
        match e {
            Expr::Const(v) => Ty::of_value(v),
            Expr::DictRef(k) => {
                if !ctx.dict {
                    self.diag(ctx, format!("dictionary reference {k:?} not allowed here"));
                }
                match self.aggregate.schema.kind(k) {
                    Some(kind) => Ty::from_kind(kind),
                    None => {
                        self.diag(ctx, format!("unknown dictionary key {k:?}"));
                        Ty::Any
                    }
                }
            }
            Expr::EdgeProp(p) => {
                if !ctx.edge {
                    self.diag(ctx, format!("edge property {p:?} not allowed here"));
                }
                match self.graph.kind(p) {
                    Some(kind) => Ty::from_scalar(kind.into()),
                    None => {
                        self.diag(ctx, format!("unknown edge property {p:?}"));
                        Ty::Any
                    }
                }
            }
            Expr::EdgeId | Expr::EdgeLabel => {
                if !ctx.edge {
                    self.diag(ctx, format!("{} not allowed here", e.node_name()));
                }
                Ty::Str
            }
            Expr::FromState | Expr::ToState => {
                if !ctx.state {
                    self.diag(ctx, format!("{} not allowed here", e.node_name()));
                }
                Ty::Int
            }
            Expr::Arith(op, a, b) => {
                let ta = self.expect(ctx, a, is_num, "numbers");
                let tb = self.expect(ctx, b, is_num, "numbers");
                match (op, &ta, &tb) {
                    (ArithOp::Div, ..) => Ty::Float,
                    (_, Ty::Float, _) | (_, _, Ty::Float) => Ty::Float,
                    (ArithOp::Sub, Ty::Ts, Ty::Ts) => Ty::Int,
                    (ArithOp::Add | ArithOp::Sub, Ty::Ts, _) => Ty::Ts,
                    (ArithOp::Add, _, Ty::Ts) => Ty::Ts,
                    (_, Ty::Any, Ty::Any) => Ty::Any,
                    _ => Ty::Int,
                }
            }
            Expr::Cmp(op, a, b) => {
                let (ta, tb) = (self.infer(ctx, a), self.infer(ctx, b));
                if !ta.compatible(&tb) {
                    self.diag(
                        ctx,
                        format!(
                            "cannot compare {} {} {}",
                            ta.describe(),
                            op.symbol(),
                            tb.describe()
                        ),
                    );
                }
                Ty::Bool
            }
            Expr::And(items) | Expr::Or(items) => {
                for item in items {
                    self.expect(ctx, item, is_bool, "booleans");
                }
                Ty::Bool
            }
            Expr::Not(a) => {
                self.expect(ctx, a, is_bool, "a boolean");
                Ty::Bool
            }
            Expr::Min(a, b) | Expr::Max(a, b) | Expr::IfNull(a, b) => {
                let (ta, tb) = (self.infer(ctx, a), self.infer(ctx, b));
                if !ta.compatible(&tb) {
                    self.diag(
                        ctx,
                        format!(
                            "{} mixes {} and {}",
                            e.node_name(),
                            ta.describe(),
                            tb.describe()
                        ),
                    );
                }
                ta.join(&tb)
            }
            Expr::ListAppend(l, x) => {
                let tl = self.expect(ctx, l, is_list, "a list");
                let tx = self.infer(ctx, x);
                let elem = match tl {
                    Ty::List(inner) => *inner,
                    _ => Ty::Any,
                };
                if !elem.compatible(&tx) || matches!(tx, Ty::List(_)) {
                    self.diag(
                        ctx,
                        format!(
                            "cannot append {} to list<{}>",
                            tx.describe(),
                            elem.describe()
                        ),
                    );
                }
                Ty::List(Box::new(elem.join(&tx)))
            }
            Expr::ListContains(l, x) => {
                let tl = self.expect(ctx, l, is_list, "a list");
                let tx = self.infer(ctx, x);
                if let Ty::List(inner) = tl {
                    if !inner.compatible(&tx) {
                        self.diag(
                            ctx,
                            format!(
                                "list<{}> cannot contain {}",
                                inner.describe(),
                                tx.describe()
                            ),
                        );
                    }
                }
                Ty::Bool
            }
            Expr::ListLen(l) => {
                self.expect(ctx, l, is_list, "a list");
                Ty::Int
            }
            Expr::ListReduce(f, l) => {
                let tl = self.expect(ctx, l, is_list, "a list");
                let elem = match tl {
                    Ty::List(inner) => *inner,
                    _ => Ty::Any,
                };
                match f {
                    ListFn::Max | ListFn::Min => elem,
                    ListFn::Sum => {
                        if !elem.numeric() {
                            self.diag(ctx, format!("list_sum over {}", elem.describe()));
                        }
                        elem
                    }
                    ListFn::DistinctLen => Ty::Int,
                    ListFn::Increasing | ListFn::AdjacentEq => Ty::Bool,
                }
            }
            Expr::Case(branches, otherwise) => {
                let mut ty = self.infer(ctx, otherwise);
                for (g, v) in branches {
                    self.expect(ctx, g, is_bool, "a boolean guard");
                    let tv = self.infer(ctx, v);
                    if !ty.compatible(&tv) {
                        self.diag(
                            ctx,
                            format!("case arms mix {} and {}", ty.describe(), tv.describe()),
                        );
                    }
                    ty = ty.join(&tv);
                }
                ty
            }
        }
    }

    fn check_assign(&mut self, ctx: Ctx<'_>, key: &str, e: &Expr) {
        let ty = self.infer(ctx, e);
        match self.aggregate.schema.kind(key) {
            None => self.diag(ctx, format!("update of unknown dictionary key {key:?}")),
            Some(kind) => {
                let slot = Ty::from_kind(kind);
                if !ty.assignable_to(&slot) {
                    self.diag(
                        ctx,
                        format!("{key:?} holds {kind} but is assigned {}", ty.describe()),
                    );
                }
            }
        }
    }

    fn check_predicate(&mut self, ctx: Ctx<'_>, e: &Expr) {
        self.expect(ctx, e, |t| matches!(t, Ty::Any | Ty::Bool), "a boolean");
    }
}

fn coverage<T>(
    diagnostics: &mut Vec<String>,
    what: &str,
    entries: &PerTransition<T>,
    table: &TransitionTable,
) {
    if let PerTransition::Keyed(map) = entries {
        let wanted: BTreeSet<(u32, u32)> = table.transitions().into_iter().collect();
        for (from, to) in &wanted {
            if !map.contains_key(&(*from, *to)) {
                diagnostics.push(format!("{what}: no entry for transition {from}->{to}"));
            }
        }
        for (from, to) in map.keys() {
            if !wanted.contains(&(*from, *to)) {
                diagnostics.push(format!(
                    "{what}: entry for {from}->{to}, which is not a transition of the automaton"
                ));
            }
        }
    }
}

fn sites<T>(p: &PerTransition<T>) -> Vec<String> {
    match p {
        PerTransition::Factorized(_) => vec!["*".to_string()],
        PerTransition::Keyed(m) => m.keys().map(|(a, b)| format!("{a}->{b}")).collect(),
    }
}

/// Checks an aggregate against a graph schema and transition table.
pub fn validate_aggregate(
    aggregate: &SelectiveAggregateSpec,
    g_schema: &GraphSchema,
    table: &TransitionTable,
) -> Vec<String> {
    let mut diagnostics = Vec::new();
    let mut seen = BTreeSet::new();
    for (key, _) in aggregate.schema.entries() {
        if !seen.insert(key.to_ascii_lowercase()) {
            diagnostics.push(format!("schema: duplicate key {key:?}"));
        }
        if RESERVED_COLUMNS.contains(&key.to_ascii_lowercase().as_str()) {
            diagnostics.push(format!("schema: key {key:?} is reserved"));
        }
        if !aggregate.init.contains_key(key) {
            diagnostics.push(format!("init: no initial value for {key:?}"));
        }
    }
    for key in aggregate.finalize.keys() {
        if key.eq_ignore_ascii_case("v") {
            diagnostics.push(format!("finalize: output key {key:?} is reserved"));
        }
    }
    coverage(&mut diagnostics, "update", &aggregate.update, table);
    coverage(&mut diagnostics, "viable", &aggregate.viable, table);

    let mut c = Checker {
        aggregate,
        graph: g_schema,
        diagnostics,
    };
    fn dict_only(site: &str) -> Ctx<'_> {
        Ctx {
            site,
            edge: false,
            state: false,
            dict: true,
        }
    }
    fn transition(site: &str) -> Ctx<'_> {
        Ctx {
            site,
            edge: true,
            state: true,
            dict: true,
        }
    }

    for (key, e) in &aggregate.init {
        let site = format!("init[{key}]");
        let ctx = Ctx {
            site: &site,
            edge: false,
            state: false,
            dict: false,
        };
        c.check_assign(ctx, key, e);
    }
    for (label, updates) in sites(&aggregate.update).iter().zip(aggregate.update.values()) {
        for (key, e) in updates {
            let site = format!("update[{label}][{key}]");
            c.check_assign(transition(&site), key, e);
        }
    }
    for (label, e) in sites(&aggregate.viable).iter().zip(aggregate.viable.values()) {
        let site = format!("viable[{label}]");
        c.check_predicate(transition(&site), e);
    }
    for (key, e) in &aggregate.finalize {
        let site = format!("finalize[{key}]");
        c.infer(dict_only(&site), e);
    }
    c.check_predicate(dict_only("viable_final"), &aggregate.viable_final);
    c.diagnostics
}

/// Returns an empty list iff the query is well formed for this graph
/// schema and transition table.
pub fn validate_spec(
    q: &PathQuerySpec,
    g_schema: &GraphSchema,
    table: &TransitionTable,
) -> Vec<String> {
    let mut out = Vec::new();
    if let Err(e) = crate::regex::parse_regex(&q.regex) {
        out.push(format!("regex: {e}"));
    }
    out.extend(validate_aggregate(&q.aggregate, g_schema, table));
    out
}
