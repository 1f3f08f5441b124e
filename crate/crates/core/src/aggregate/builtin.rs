//! Catalogue of ready-made path queries.
//!
//! | name | label pattern                                   | property constraint |
//! |------|-------------------------------------------------|---------------------|
//! | QA   | `labels` / `regex`                              | strictly increasing `time`, `max(amount) - min(amount) <= U` |
//! | QB   | `Domestic+ Foreign`                             | consecutive domestic edges within `range_dd`, last domestic to foreign within `range_df` |
//! | Q1   | `(transfer\|purchase\|sale)+ (phishing\|scam)+` | increasing `time`, one `region`, `risk` range within `risk_range` over the normal prefix, last normal `risk >= min_last_risk`, total `amount >= min_total` |
//! | Q2   | `labels` / `regex`                              | two adjacent edges share a `color` |
//! | Q3   | `labels` / `regex`                              | strictly increasing `property` (default `time`) |
//! | Q4   | `labels` / `regex`                              | `max(time) - min(time) <= window` |
//!
//! All of them enforce trail semantics through an `edge_ids` list. Q1
//! excludes the edge that enters the fraud segment from the risk range.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;

use crate::error::SpecError;
use crate::graph::GraphSchema;
use crate::regex::{compile_regex, StateId};

use super::expr::{Expr, ListFn};
use super::spec::{
    collected_key, default_construction, DictionarySchema, PathQuerySpec, PerTransition,
    SelectiveAggregateSpec, UpdateMap,
};
use super::value::{ScalarKind, Value, ValueKind};

pub type QueryParams = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    QA,
    QB,
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::QA,
        Builtin::QB,
        Builtin::Q1,
        Builtin::Q2,
        Builtin::Q3,
        Builtin::Q4,
    ];

    /// Thresholds the caller must supply.
    pub fn required_params(self) -> &'static [&'static str] {
        match self {
            Builtin::QA => &["U"],
            Builtin::QB => &["range_dd", "range_df"],
            Builtin::Q1 => &["risk_range", "min_last_risk", "min_total"],
            Builtin::Q2 | Builtin::Q3 => &[],
            Builtin::Q4 => &["window"],
        }
    }

    /// Whether the label pattern comes from the `labels`/`regex` params.
    pub fn takes_label_set(self) -> bool {
        matches!(self, Builtin::QA | Builtin::Q2 | Builtin::Q3 | Builtin::Q4)
    }

    /// Whether an equivalent no-early-filtering form is available.
    pub fn has_default_form(self) -> bool {
        self.takes_label_set()
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Builtin::QA => "QA",
            Builtin::QB => "QB",
            Builtin::Q1 => "Q1",
            Builtin::Q2 => "Q2",
            Builtin::Q3 => "Q3",
            Builtin::Q4 => "Q4",
        })
    }
}

impl FromStr for Builtin {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| SpecError::UnknownBuiltin(s.to_string()))
    }
}

struct Params<'a> {
    map: &'a QueryParams,
    graph: &'a GraphSchema,
}

impl Params<'_> {
    fn number(&self, name: &str) -> Result<Value, SpecError> {
        let raw = self
            .map
            .get(name)
            .ok_or_else(|| SpecError::MissingParam(name.to_string()))?;
        let raw = raw.trim();
        if let Ok(v) = raw.parse::<i64>() {
            return Ok(Value::Int(v));
        }
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Value::Float(v)),
            _ => Err(SpecError::BadParam {
                name: name.to_string(),
                reason: format!("{raw:?} is not a number"),
            }),
        }
    }

    fn text(&self, name: &str, default: &str) -> String {
        self.map
            .get(name)
            .map(|s| s.trim().to_string())
            .unwrap_or_else(|| default.to_string())
    }

    fn list(&self, name: &str, default: &str) -> Vec<String> {
        self.text(name, default)
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }

    /// Binds a property column and reports its kind.
    fn column(&self, param: &str, default: &str) -> Result<(String, ScalarKind), SpecError> {
        let name = self.text(param, default);
        let kind = self.graph.kind(&name).ok_or_else(|| SpecError::BadParam {
            name: param.to_string(),
            reason: format!("graph has no property column {name:?}"),
        })?;
        Ok((name, kind.into()))
    }

    fn label_regex(&self) -> Result<String, SpecError> {
        if let Some(re) = self.map.get("regex") {
            return Ok(re.clone());
        }
        let labels = self.list("labels", "");
        if labels.is_empty() {
            return Err(SpecError::MissingParam("labels".into()));
        }
        Ok(format!("({})+", labels.join("|")))
    }

    fn start(&self) -> Vec<String> {
        self.list("start", "")
    }

    fn max_len(&self) -> Result<usize, SpecError> {
        match self.map.get("max_len") {
            None => Ok(4),
            Some(v) => v.trim().parse().map_err(|_| SpecError::BadParam {
                name: "max_len".into(),
                reason: format!("{v:?} is not a non-negative integer"),
            }),
        }
    }
}

fn negate(v: &Value) -> Value {
    match v {
        Value::Int(x) => Value::Int(-x),
        Value::Float(x) => Value::Float(-x),
        other => other.clone(),
    }
}

fn not_revisited() -> Expr {
    Expr::not(Expr::list_contains(Expr::dict("edge_ids"), Expr::EdgeId))
}

fn strictly_after(col: &str, key: &str) -> Expr {
    Expr::if_null(Expr::gt(Expr::edge(col), Expr::dict(key)), Expr::t())
}

/// `max - min <= bound` over the values seen so far; absent values do not
/// constrain.
fn span_within(key_max: &str, key_min: &str, col: &str, bound: &Value) -> Expr {
    Expr::if_null(
        Expr::le(
            Expr::sub(
                Expr::max(Expr::dict(key_max), Expr::edge(col)),
                Expr::min(Expr::dict(key_min), Expr::edge(col)),
            ),
            Expr::lit(bound.clone()),
        ),
        Expr::t(),
    )
}

fn identity(keys: &[&str]) -> IndexMap<String, Expr> {
    keys.iter().map(|k| (k.to_string(), Expr::dict(k))).collect()
}

fn map_of(items: impl IntoIterator<Item = (&'static str, Expr)>) -> UpdateMap {
    items.into_iter().map(|(k, e)| (k.to_string(), e)).collect()
}

const EDGE_IDS: (&str, ValueKind) = ("edge_ids", ValueKind::List(ScalarKind::String));

fn edge_ids_update() -> (&'static str, Expr) {
    ("edge_ids", Expr::list_append(Expr::dict("edge_ids"), Expr::EdgeId))
}

fn edge_ids_init() -> (&'static str, Expr) {
    ("edge_ids", Expr::lit(Value::empty_list()))
}

fn query_a(p: &Params) -> Result<SelectiveAggregateSpec, SpecError> {
    let bound = p.number("U")?;
    let (time, time_kind) = p.column("time_column", "time")?;
    let (amount, amount_kind) = p.column("amount_column", "amount")?;
    Ok(SelectiveAggregateSpec {
        schema: DictionarySchema::new([
            ("last_time", ValueKind::Scalar(time_kind)),
            ("max_amount", ValueKind::Scalar(amount_kind)),
            ("min_amount", ValueKind::Scalar(amount_kind)),
            EDGE_IDS,
        ]),
        init: map_of([
            ("last_time", Expr::null()),
            ("max_amount", Expr::null()),
            ("min_amount", Expr::null()),
            edge_ids_init(),
        ]),
        update: PerTransition::Factorized(map_of([
            ("last_time", Expr::edge(&time)),
            ("max_amount", Expr::max(Expr::dict("max_amount"), Expr::edge(&amount))),
            ("min_amount", Expr::min(Expr::dict("min_amount"), Expr::edge(&amount))),
            edge_ids_update(),
        ])),
        viable: PerTransition::Factorized(Expr::and([
            strictly_after(&time, "last_time"),
            span_within("max_amount", "min_amount", &amount, &bound),
            not_revisited(),
        ])),
        finalize: identity(&["last_time", "max_amount", "min_amount", "edge_ids"]),
        viable_final: Expr::t(),
    })
}

fn within(diff: impl Fn() -> Expr, range: &Value) -> Expr {
    Expr::and([
        Expr::le(Expr::lit(negate(range)), diff()),
        Expr::le(diff(), Expr::lit(range.clone())),
    ])
}

fn query_b(p: &Params, regex: &str) -> Result<SelectiveAggregateSpec, SpecError> {
    let dd = p.number("range_dd")?;
    let df = p.number("range_df")?;
    let (time, time_kind) = p.column("time_column", "time")?;
    let domestic = p.text("domestic_label", "Domestic");
    let table = compile_regex(regex)?;
    let diff = || Expr::sub(Expr::edge(&time), Expr::dict("last_time"));

    let mut viable = BTreeMap::new();
    for row in table.rows() {
        let check = if row.from_state == table.q0() {
            Expr::t()
        } else {
            let range = if row.label == domestic { &dd } else { &df };
            Expr::and([within(diff, range), not_revisited()])
        };
        viable.insert((row.from_state, row.to_state), check);
    }
    Ok(SelectiveAggregateSpec {
        schema: DictionarySchema::new([("last_time", ValueKind::Scalar(time_kind)), EDGE_IDS]),
        init: map_of([("last_time", Expr::null()), edge_ids_init()]),
        update: PerTransition::Factorized(map_of([
            ("last_time", Expr::edge(&time)),
            edge_ids_update(),
        ])),
        viable: PerTransition::Keyed(viable),
        finalize: identity(&["edge_ids"]),
        viable_final: Expr::t(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Segment {
    Start,
    Normal,
    Fraud,
}

fn query_1(
    p: &Params,
    regex: &str,
    normal: &BTreeSet<String>,
) -> Result<SelectiveAggregateSpec, SpecError> {
    let risk_range = p.number("risk_range")?;
    let min_last_risk = p.number("min_last_risk")?;
    let min_total = p.number("min_total")?;
    let (time, time_kind) = p.column("time_column", "time")?;
    let (region, region_kind) = p.column("region_column", "region")?;
    let (risk, risk_kind) = p.column("risk_column", "risk")?;
    let (amount, amount_kind) = p.column("amount_column", "amount")?;
    let table = compile_regex(regex)?;

    // Every non-start state is entered by exactly one label class.
    let mut segment: BTreeMap<StateId, Segment> = BTreeMap::from([(table.q0(), Segment::Start)]);
    for row in table.rows() {
        let seg = if normal.contains(&row.label) {
            Segment::Normal
        } else {
            Segment::Fraud
        };
        segment.insert(row.to_state, seg);
    }

    let mut update = BTreeMap::new();
    let mut viable = BTreeMap::new();
    for (from, to) in table.transitions() {
        let mut checks = vec![
            strictly_after(&time, "last_time"),
            Expr::if_null(Expr::eq(Expr::dict("region"), Expr::edge(&region)), Expr::t()),
            not_revisited(),
        ];
        let mut upd = map_of([
            ("last_time", Expr::edge(&time)),
            ("region", Expr::if_null(Expr::dict("region"), Expr::edge(&region))),
            (
                "total_amount",
                Expr::add(Expr::dict("total_amount"), Expr::edge(&amount)),
            ),
            edge_ids_update(),
        ]);
        match (segment[&from], segment[&to]) {
            (_, Segment::Normal) => {
                checks.push(span_within("risk_max", "risk_min", &risk, &risk_range));
                upd.insert("risk_min".into(), Expr::min(Expr::dict("risk_min"), Expr::edge(&risk)));
                upd.insert("risk_max".into(), Expr::max(Expr::dict("risk_max"), Expr::edge(&risk)));
                upd.insert("last_risk".into(), Expr::edge(&risk));
            }
            (Segment::Normal, Segment::Fraud) => {
                checks.push(Expr::ge(
                    Expr::dict("last_risk"),
                    Expr::lit(min_last_risk.clone()),
                ));
            }
            _ => {}
        }
        update.insert((from, to), upd);
        viable.insert((from, to), Expr::and(checks));
    }

    let total_init = match amount_kind {
        ScalarKind::Float => Value::Float(0.0),
        _ => Value::Int(0),
    };
    let keys = [
        "last_time",
        "region",
        "risk_min",
        "risk_max",
        "last_risk",
        "total_amount",
        "edge_ids",
    ];
    Ok(SelectiveAggregateSpec {
        schema: DictionarySchema::new([
            ("last_time", ValueKind::Scalar(time_kind)),
            ("region", ValueKind::Scalar(region_kind)),
            ("risk_min", ValueKind::Scalar(risk_kind)),
            ("risk_max", ValueKind::Scalar(risk_kind)),
            ("last_risk", ValueKind::Scalar(risk_kind)),
            ("total_amount", ValueKind::Scalar(amount_kind)),
            EDGE_IDS,
        ]),
        init: map_of([
            ("last_time", Expr::null()),
            ("region", Expr::null()),
            ("risk_min", Expr::null()),
            ("risk_max", Expr::null()),
            ("last_risk", Expr::null()),
            ("total_amount", Expr::lit(total_init)),
            edge_ids_init(),
        ]),
        update: PerTransition::Keyed(update),
        viable: PerTransition::Keyed(viable),
        finalize: identity(&keys),
        viable_final: Expr::ge(Expr::dict("total_amount"), Expr::lit(min_total)),
    })
}

fn query_2(p: &Params) -> Result<SelectiveAggregateSpec, SpecError> {
    let (color, color_kind) = p.column("color_column", "color")?;
    Ok(SelectiveAggregateSpec {
        schema: DictionarySchema::new([
            ("last_color", ValueKind::Scalar(color_kind)),
            ("completed", ValueKind::BOOLEAN),
            EDGE_IDS,
        ]),
        init: map_of([
            ("last_color", Expr::null()),
            ("completed", Expr::f()),
            edge_ids_init(),
        ]),
        update: PerTransition::Factorized(map_of([
            ("last_color", Expr::edge(&color)),
            (
                "completed",
                Expr::or([
                    Expr::dict("completed"),
                    Expr::if_null(Expr::eq(Expr::edge(&color), Expr::dict("last_color")), Expr::f()),
                ]),
            ),
            edge_ids_update(),
        ])),
        viable: PerTransition::Factorized(not_revisited()),
        finalize: identity(&["last_color", "completed", "edge_ids"]),
        viable_final: Expr::dict("completed"),
    })
}

fn query_3(p: &Params) -> Result<SelectiveAggregateSpec, SpecError> {
    let (prop, kind) = p.column("property", "time")?;
    Ok(SelectiveAggregateSpec {
        schema: DictionarySchema::new([("last_value", ValueKind::Scalar(kind)), EDGE_IDS]),
        init: map_of([("last_value", Expr::null()), edge_ids_init()]),
        update: PerTransition::Factorized(map_of([
            ("last_value", Expr::edge(&prop)),
            edge_ids_update(),
        ])),
        viable: PerTransition::Factorized(Expr::and([
            strictly_after(&prop, "last_value"),
            not_revisited(),
        ])),
        finalize: identity(&["last_value", "edge_ids"]),
        viable_final: Expr::t(),
    })
}

fn query_4(p: &Params) -> Result<SelectiveAggregateSpec, SpecError> {
    let window = p.number("window")?;
    let (time, kind) = p.column("time_column", "time")?;
    Ok(SelectiveAggregateSpec {
        schema: DictionarySchema::new([
            ("min_time", ValueKind::Scalar(kind)),
            ("max_time", ValueKind::Scalar(kind)),
            EDGE_IDS,
        ]),
        init: map_of([
            ("min_time", Expr::null()),
            ("max_time", Expr::null()),
            edge_ids_init(),
        ]),
        update: PerTransition::Factorized(map_of([
            ("min_time", Expr::min(Expr::dict("min_time"), Expr::edge(&time))),
            ("max_time", Expr::max(Expr::dict("max_time"), Expr::edge(&time))),
            edge_ids_update(),
        ])),
        viable: PerTransition::Factorized(Expr::and([
            span_within("max_time", "min_time", &time, &window),
            not_revisited(),
        ])),
        finalize: identity(&["min_time", "max_time", "edge_ids"]),
        viable_final: Expr::t(),
    })
}

fn wrap(
    name: String,
    p: &Params,
    regex: String,
    aggregate: SelectiveAggregateSpec,
) -> Result<PathQuerySpec, SpecError> {
    let spec = PathQuerySpec {
        name: Some(name),
        start_vertices: p.start(),
        regex,
        aggregate,
        max_length: p.max_len()?,
    };
    let table = compile_regex(&spec.regex)?;
    let diagnostics = super::validate::validate_spec(&spec, p.graph, &table);
    if !diagnostics.is_empty() {
        return Err(SpecError::Invalid(diagnostics));
    }
    Ok(spec)
}

/// Instantiates a builtin query with early filtering.
///
/// Besides the thresholds in [`Builtin::required_params`], `params` may
/// bind column names (`time_column`, `amount_column`, ...), labels, the
/// start vertices (`start`, comma separated) and `max_len` (default 4).
pub fn builtin_query(
    name: &str,
    params: &QueryParams,
    g_schema: &GraphSchema,
) -> Result<PathQuerySpec, SpecError> {
    let which: Builtin = name.parse()?;
    let p = Params {
        map: params,
        graph: g_schema,
    };
    let (regex, aggregate) = match which {
        Builtin::QA => (p.label_regex()?, query_a(&p)?),
        Builtin::QB => {
            let regex = format!(
                "{}+ {}",
                p.text("domestic_label", "Domestic"),
                p.text("foreign_label", "Foreign")
            );
            let agg = query_b(&p, &regex)?;
            (regex, agg)
        }
        Builtin::Q1 => {
            let normal = p.list("normal_labels", "transfer,purchase,sale");
            let fraud = p.list("fraud_labels", "phishing,scam");
            let regex = format!("({})+ ({})+", normal.join("|"), fraud.join("|"));
            let agg = query_1(&p, &regex, &normal.into_iter().collect())?;
            (regex, agg)
        }
        Builtin::Q2 => (p.label_regex()?, query_2(&p)?),
        Builtin::Q3 => (p.label_regex()?, query_3(&p)?),
        Builtin::Q4 => (p.label_regex()?, query_4(&p)?),
    };
    wrap(which.to_string(), &p, regex, aggregate)
}

/// The same query as [`builtin_query`] in default-construction form: edge
/// data is collected into lists and the constraint is checked only on
/// complete paths. Available for QA, Q2, Q3 and Q4.
pub fn builtin_default_query(
    name: &str,
    params: &QueryParams,
    g_schema: &GraphSchema,
) -> Result<PathQuerySpec, SpecError> {
    let which: Builtin = name.parse()?;
    let p = Params {
        map: params,
        graph: g_schema,
    };
    let list = |prop: &str| Expr::dict(&collected_key(prop));
    let distinct_ids = || {
        Expr::eq(
            Expr::reduce(ListFn::DistinctLen, list("id")),
            Expr::list_len(list("id")),
        )
    };
    let span = |prop: &str, bound: Value| {
        Expr::if_null(
            Expr::le(
                Expr::sub(
                    Expr::reduce(ListFn::Max, list(prop)),
                    Expr::reduce(ListFn::Min, list(prop)),
                ),
                Expr::lit(bound),
            ),
            Expr::t(),
        )
    };
    let (phi, props): (Expr, Vec<String>) = match which {
        Builtin::QA => {
            let (time, _) = p.column("time_column", "time")?;
            let (amount, _) = p.column("amount_column", "amount")?;
            (
                Expr::and([
                    Expr::reduce(ListFn::Increasing, list(&time)),
                    span(&amount, p.number("U")?),
                    distinct_ids(),
                ]),
                vec![amount, time, "id".into()],
            )
        }
        Builtin::Q2 => {
            let (color, _) = p.column("color_column", "color")?;
            (
                Expr::and([Expr::reduce(ListFn::AdjacentEq, list(&color)), distinct_ids()]),
                vec![color, "id".into()],
            )
        }
        Builtin::Q3 => {
            let (prop, _) = p.column("property", "time")?;
            (
                Expr::and([Expr::reduce(ListFn::Increasing, list(&prop)), distinct_ids()]),
                vec![prop, "id".into()],
            )
        }
        Builtin::Q4 => {
            let (time, _) = p.column("time_column", "time")?;
            (
                Expr::and([span(&time, p.number("window")?), distinct_ids()]),
                vec![time, "id".into()],
            )
        }
        other => {
            return Err(SpecError::BadParam {
                name: "builtin".into(),
                reason: format!("{other} has no default-construction form"),
            })
        }
    };
    let props: Vec<&str> = props.iter().map(String::as_str).collect();
    let aggregate = default_construction(phi, &props, g_schema);
    wrap(format!("{which}-default"), &p, p.label_regex()?, aggregate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::expr::{eval_expr, Scope};
    use crate::graph::{EdgeRecord, PropertyGraph, PropertyKind, PropertyValue};

    fn bank_schema() -> GraphSchema {
        GraphSchema::new([("amount", PropertyKind::Int), ("time", PropertyKind::Int)])
    }

    fn params(items: &[(&str, &str)]) -> QueryParams {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn qb_viability_is_keyed_per_transition() {
        let q = builtin_query("QB", &params(&[("range_dd", "2"), ("range_df", "3")]), &bank_schema())
            .unwrap();
        let PerTransition::Keyed(viable) = &q.aggregate.viable else {
            panic!("QB viability must depend on the transition");
        };
        assert_eq!(viable.keys().copied().collect::<Vec<_>>(), [(1, 2), (2, 2), (2, 3)]);
        assert_eq!(viable[&(1, 2)], Expr::t());
        assert!(q.aggregate.update.is_factorized());
        assert_eq!(q.aggregate.finalize.keys().collect::<Vec<_>>(), ["edge_ids"]);
    }

    #[test]
    fn missing_threshold_is_reported() {
        let err = builtin_query("QB", &params(&[("range_dd", "2")]), &bank_schema()).unwrap_err();
        assert!(matches!(err, SpecError::MissingParam(p) if p == "range_df"));
        let err = builtin_query("QA", &params(&[("labels", "a")]), &bank_schema()).unwrap_err();
        assert!(matches!(err, SpecError::MissingParam(p) if p == "U"));
        let err = builtin_query("Q3", &QueryParams::new(), &bank_schema()).unwrap_err();
        assert!(matches!(err, SpecError::MissingParam(p) if p == "labels"));
    }

    #[test]
    fn unknown_name_and_bad_column() {
        assert!(matches!(
            builtin_query("Q9", &QueryParams::new(), &bank_schema()),
            Err(SpecError::UnknownBuiltin(_))
        ));
        assert!(matches!(
            builtin_query("Q2", &params(&[("labels", "a")]), &bank_schema()),
            Err(SpecError::BadParam { .. })
        ));
    }

    #[test]
    fn q3_viability_matches_strict_increase() {
        let q = builtin_query("Q3", &params(&[("labels", "Domestic,Foreign")]), &bank_schema())
            .unwrap();
        let viable = q.aggregate.viable.get(1, 2).unwrap().clone();
        let keys = q.aggregate.schema.keys();
        for (last, time) in [(5, 4), (5, 5), (5, 6), (0, 100)] {
            let g = PropertyGraph::from_edges(
                bank_schema(),
                vec![EdgeRecord::new("e1", "a", "b", "Domestic").with("time", PropertyValue::Int(time))],
            )
            .unwrap();
            let dict = vec![Value::Int(last), Value::empty_list()];
            let scope = Scope::dictionary(&keys, &dict).transition(&g.edges()[0], 2, 2);
            assert_eq!(
                eval_expr(&viable, &scope).unwrap().is_true(),
                time > last,
                "last={last} time={time}"
            );
        }
    }

    #[test]
    fn q1_transitions_split_into_segments() {
        let schema = GraphSchema::new([
            ("time", PropertyKind::Int),
            ("region", PropertyKind::String),
            ("risk", PropertyKind::Int),
            ("amount", PropertyKind::Int),
        ]);
        let q = builtin_query(
            "Q1",
            &params(&[("risk_range", "20"), ("min_last_risk", "40"), ("min_total", "1000")]),
            &schema,
        )
        .unwrap();
        let table = compile_regex(&q.regex).unwrap();
        assert_eq!(table.rows().len(), 3 + 9 + 6 + 4);
        let PerTransition::Keyed(update) = &q.aggregate.update else {
            panic!()
        };
        // fraud edges leave the risk summary alone
        let into_fraud = table
            .rows()
            .iter()
            .find(|r| r.label == "scam")
            .map(|r| (r.from_state, r.to_state))
            .unwrap();
        assert!(!update[&into_fraud].contains_key("risk_max"));
        let into_normal = (1, table.rows()[0].to_state);
        assert!(update[&into_normal].contains_key("risk_max"));
    }

    #[test]
    fn default_forms_exist_only_for_label_set_queries() {
        let p = params(&[("labels", "Domestic"), ("U", "5"), ("window", "3")]);
        for name in ["QA", "Q3", "Q4"] {
            let q = builtin_default_query(name, &p, &bank_schema()).unwrap();
            assert!(q.aggregate.is_factorized());
            assert_eq!(q.aggregate.viable, PerTransition::Factorized(Expr::t()));
        }
        assert!(builtin_default_query("QB", &p, &bank_schema()).is_err());
    }
}
