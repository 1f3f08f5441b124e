//! Recursive-CTE code generation: the placeholder form that calls the five
//! aggregate functions, and the flattened and inlined form.

mod dialect;

pub use dialect::{quote_ident, quote_str, Dialect};

use std::fmt;

use crate::aggregate::{ArithOp, Expr, PathQuerySpec, PerTransition, SelectiveAggregateSpec};
use crate::engine::IncludeEmpty;
use crate::error::CompileError;
use crate::graph::{GraphSchema, PropertyGraph, PropertyValue};
use crate::regex::{compile_regex, StateId, TransitionTable};

/// Names of the aggregate functions bound by the target system in the
/// placeholder form.
pub const PLACEHOLDER_FUNCTIONS: [&str; 5] = [
    "init_d",
    "update_d",
    "is_viable_d",
    "finalize_d",
    "is_viable_d_final",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SqlForm {
    Standard,
    #[default]
    Optimized,
}

impl std::str::FromStr for SqlForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(SqlForm::Standard),
            "optimized" => Ok(SqlForm::Optimized),
            other => Err(format!("unknown form {other:?} (expected standard or optimized)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompileOptions {
    pub dialect: Dialect,
    /// Project `count(*)` instead of the finalized columns.
    pub count_only: bool,
    pub include_empty: IncludeEmpty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqlArtifact {
    pub ddl: Vec<String>,
    pub query: String,
    pub dialect: Dialect,
    pub form: SqlForm,
}

impl SqlArtifact {
    /// Semicolon-terminated statements, DDL first when requested.
    pub fn script(&self, with_ddl: bool) -> String {
        let mut out = String::new();
        if with_ddl {
            for s in &self.ddl {
                out.push_str(s);
                out.push_str(";\n");
            }
        }
        out.push_str(&self.query);
        out.push_str(";\n");
        out
    }
}

impl fmt::Display for SqlArtifact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.script(true))
    }
}

pub fn emit_transitions_ddl(t: &TransitionTable) -> Vec<String> {
    let mut out =
        vec!["CREATE TABLE Transitions (from_state INTEGER, to_state INTEGER, label VARCHAR)".to_string()];
    for row in t.rows() {
        out.push(format!(
            "INSERT INTO Transitions VALUES ({}, {}, {})",
            row.from_state,
            row.to_state,
            quote_str(&row.label)
        ));
    }
    out.push("CREATE INDEX transitions_from_label ON Transitions (from_state, label)".to_string());
    out
}

pub fn emit_edges_index_ddl(schema: &GraphSchema, dialect: Dialect) -> Vec<String> {
    let mut cols = vec![
        "id VARCHAR".to_string(),
        "src VARCHAR".to_string(),
        "dst VARCHAR".to_string(),
        "label VARCHAR".to_string(),
    ];
    cols.extend(
        schema
            .properties
            .iter()
            .map(|(k, kind)| format!("{} {}", quote_ident(k), dialect.property_type(*kind))),
    );
    vec![
        format!("CREATE TABLE Edges ({})", cols.join(", ")),
        "CREATE INDEX edges_src ON Edges (src)".to_string(),
    ]
}

fn property_literal(v: Option<&PropertyValue>, dialect: Dialect) -> Result<String, CompileError> {
    match v {
        None => Ok("NULL".into()),
        Some(p) => dialect.literal(&p.into()),
    }
}

/// `INSERT` statements loading every edge of `g`, in batches of `batch` rows.
pub fn emit_edge_inserts(
    g: &PropertyGraph,
    dialect: Dialect,
    batch: usize,
) -> Result<Vec<String>, CompileError> {
    let keys: Vec<&String> = g.schema().properties.keys().collect();
    let rows = g
        .edges()
        .iter()
        .map(|e| {
            let mut vals = vec![
                quote_str(&e.id),
                quote_str(&e.src),
                quote_str(&e.dst),
                quote_str(&e.label),
            ];
            for k in &keys {
                vals.push(property_literal(e.get_property(k), dialect)?);
            }
            Ok(format!("({})", vals.join(", ")))
        })
        .collect::<Result<Vec<_>, CompileError>>()?;
    Ok(rows
        .chunks(batch.max(1))
        .map(|c| format!("INSERT INTO Edges VALUES {}", c.join(", ")))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Site {
    Anchor,
    Recursive,
    Outer,
}

impl Site {
    fn describe(self) -> &'static str {
        match self {
            Site::Anchor => "the anchor (init)",
            Site::Recursive => "the recursive member",
            Site::Outer => "the outer query (finalize, viable_final)",
        }
    }
}

struct Renderer {
    dialect: Dialect,
}

impl Renderer {
    fn context_err(&self, e: &Expr, site: Site) -> CompileError {
        CompileError::Context {
            node: e.node_name().to_string(),
            context: site.describe().to_string(),
        }
    }

    /// Renders without enclosing parentheses for a top-level conjunction.
    fn top(&self, e: &Expr, site: Site) -> Result<String, CompileError> {
        match e {
            Expr::And(items) if !items.is_empty() => Ok(items
                .iter()
                .map(|i| self.expr(i, site))
                .collect::<Result<Vec<_>, _>>()?
                .join(" AND ")),
            _ => self.expr(e, site),
        }
    }

    fn expr(&self, e: &Expr, site: Site) -> Result<String, CompileError> {
        let d = self.dialect;
        let r = |x: &Expr| self.expr(x, site);
        let transition_only = |s: String| {
            if site == Site::Recursive {
                Ok(s)
            } else {
                Err(self.context_err(e, site))
            }
        };
        Ok(match e {
            Expr::Const(v) => d.literal(v)?,
            Expr::DictRef(k) => match site {
                Site::Recursive => format!("P.{}", quote_ident(k)),
                Site::Outer => quote_ident(k),
                Site::Anchor => return Err(self.context_err(e, site)),
            },
            Expr::EdgeProp(p) => transition_only(format!("E.{}", quote_ident(p)))?,
            Expr::EdgeId => transition_only("E.id".into())?,
            Expr::EdgeLabel => transition_only("E.label".into())?,
            Expr::FromState => transition_only("P.q".into())?,
            Expr::ToState => transition_only("T.to_state".into())?,
            Expr::Arith(ArithOp::Div, a, b) => d.divide(&r(a)?, &r(b)?),
            Expr::Arith(op, a, b) => format!("({} {} {})", r(a)?, op.symbol(), r(b)?),
            Expr::Cmp(op, a, b) => {
                let sym = match op.symbol() {
                    "!=" => "<>",
                    s => s,
                };
                format!("({} {sym} {})", r(a)?, r(b)?)
            }
            Expr::And(items) | Expr::Or(items) if items.is_empty() => {
                (if matches!(e, Expr::And(_)) { "TRUE" } else { "FALSE" }).to_string()
            }
            Expr::And(items) | Expr::Or(items) => {
                let sep = if matches!(e, Expr::And(_)) { " AND " } else { " OR " };
                let parts = items.iter().map(r).collect::<Result<Vec<_>, _>>()?;
                format!("({})", parts.join(sep))
            }
            Expr::Not(a) => format!("(NOT {})", r(a)?),
            Expr::Min(a, b) => d.least(&r(a)?, &r(b)?),
            Expr::Max(a, b) => d.greatest(&r(a)?, &r(b)?),
            Expr::ListAppend(l, x) => d.list_append(&r(l)?, &r(x)?),
            Expr::ListContains(l, x) => d.list_contains(&r(l)?, &r(x)?),
            Expr::ListLen(l) => d.list_len(&r(l)?),
            Expr::ListReduce(f, l) => d.list_reduce(*f, &r(l)?),
            Expr::IfNull(a, b) => format!("COALESCE({}, {})", r(a)?, r(b)?),
            Expr::Case(branches, otherwise) => {
                let mut s = String::from("CASE");
                for (g, v) in branches {
                    s.push_str(&format!(" WHEN {} THEN {}", r(g)?, r(v)?));
                }
                s.push_str(&format!(" ELSE {} END", r(otherwise)?));
                s
            }
        })
    }
}

fn guard(t: (StateId, StateId)) -> String {
    format!("P.q = {} AND T.to_state = {}", t.0, t.1)
}

fn anchor_source(starts: &[String]) -> (String, String) {
    match starts {
        [one] => (quote_str(one), String::new()),
        [] => ("CAST(NULL AS VARCHAR)".into(), "\n  WHERE FALSE".into()),
        many => {
            let mut parts = vec![format!("SELECT {} AS v", quote_str(&many[0]))];
            parts.extend(many[1..].iter().map(|s| format!("SELECT {}", quote_str(s))));
            ("S.v".into(), format!("\n  FROM ({}) AS S", parts.join(" UNION ALL ")))
        }
    }
}

fn accepting_list(t: &TransitionTable) -> Option<String> {
    if t.accepting().is_empty() {
        return None;
    }
    Some(
        t.accepting()
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(", "),
    )
}

fn outer_filter(t: &TransitionTable, opts: &CompileOptions, tail: &str) -> String {
    let mut filter = match accepting_list(t) {
        Some(list) => format!("q IN ({list}) AND {tail}"),
        None => "FALSE".into(),
    };
    if opts.include_empty == IncludeEmpty::Never {
        filter.push_str(" AND path_length > 0");
    }
    filter
}

/// The placeholder form: dictionary in one JSON column `D`, aggregate
/// functions called by name.
pub fn emit_standard_sql(
    q: &PathQuerySpec,
    g_schema: &GraphSchema,
    opts: &CompileOptions,
) -> Result<SqlArtifact, CompileError> {
    let table = compile_regex(&q.regex)?;
    let (start, from) = anchor_source(&q.start_vertices);
    let projection = if opts.count_only {
        "count(*)"
    } else {
        "v, finalize_d(D) AS D"
    };
    let query = format!(
        "WITH RECURSIVE Paths AS (
  SELECT
    {start} AS v,
    {q0} AS q,
    init_d() AS D,
    0 AS path_length{from}
  UNION ALL
  SELECT
    E.dst AS v,
    T.to_state AS q,
    update_d(P.D, P.q, T.to_state, E.*) AS D,
    P.path_length + 1 AS path_length
  FROM Paths P
  JOIN Edges E ON P.v = E.src
  JOIN Transitions T ON P.q = T.from_state
  WHERE T.label = E.label
    AND P.path_length < {len}
    AND is_viable_d(P.D, P.q, T.to_state, E.*)
)
SELECT {projection}
FROM Paths
WHERE {filter}",
        q0 = table.q0(),
        len = q.max_length,
        filter = outer_filter(&table, opts, "is_viable_d_final(D)"),
    );
    let mut ddl = emit_edges_index_ddl(g_schema, opts.dialect);
    ddl.extend(emit_transitions_ddl(&table));
    Ok(SqlArtifact {
        ddl,
        query,
        dialect: opts.dialect,
        form: SqlForm::Standard,
    })
}

/// Update expression for `key`, as one expression when every transition
/// computes the same thing.
fn render_update(
    r: &Renderer,
    agg: &SelectiveAggregateSpec,
    table: &TransitionTable,
    key: &str,
) -> Result<String, CompileError> {
    let keep = Expr::dict(key);
    match &agg.update {
        PerTransition::Factorized(m) => r.expr(m.get(key).unwrap_or(&keep), Site::Recursive),
        PerTransition::Keyed(m) => {
            let per: Vec<((StateId, StateId), &Expr)> = table
                .transitions()
                .into_iter()
                .map(|t| (t, m.get(&t).and_then(|u| u.get(key)).unwrap_or(&keep)))
                .collect();
            match per.first() {
                None => r.expr(&keep, Site::Recursive),
                Some((_, first)) if per.iter().all(|(_, e)| e == first) => {
                    r.expr(first, Site::Recursive)
                }
                Some(_) => {
                    let mut s = String::from("CASE");
                    for (t, e) in &per {
                        s.push_str(&format!(
                            "\n      WHEN {} THEN {}",
                            guard(*t),
                            r.expr(e, Site::Recursive)?
                        ));
                    }
                    s.push_str(&format!("\n      ELSE {}\n    END", r.expr(&keep, Site::Recursive)?));
                    Ok(s)
                }
            }
        }
    }
}

/// Inlined viability predicate, `None` when it is identically true.
fn render_viability(
    r: &Renderer,
    agg: &SelectiveAggregateSpec,
    table: &TransitionTable,
) -> Result<Option<String>, CompileError> {
    match &agg.viable {
        PerTransition::Factorized(e) if e.is_true_literal() => Ok(None),
        PerTransition::Factorized(e) => Ok(Some(r.top(e, Site::Recursive)?)),
        PerTransition::Keyed(m) => {
            let transitions = table.transitions();
            let entries: Vec<((StateId, StateId), &Expr)> = transitions
                .iter()
                .filter_map(|t| m.get(t).map(|e| (*t, e)))
                .collect();
            if entries.iter().all(|(_, e)| e.is_true_literal()) && entries.len() == transitions.len() {
                return Ok(None);
            }
            let mut s = String::from("CASE");
            for (t, e) in entries {
                s.push_str(&format!(
                    "\n      WHEN {} THEN {}",
                    guard(t),
                    r.top(e, Site::Recursive)?
                ));
            }
            s.push_str("\n      ELSE FALSE\n    END = TRUE");
            Ok(Some(s))
        }
    }
}

/// The flattened, inlined form: one column per dictionary key and every
/// aggregate function replaced by its body.
pub fn emit_optimized_sql(
    q: &PathQuerySpec,
    g_schema: &GraphSchema,
    opts: &CompileOptions,
) -> Result<SqlArtifact, CompileError> {
    let table = compile_regex(&q.regex)?;
    let agg = &q.aggregate;
    let r = Renderer {
        dialect: opts.dialect,
    };
    let (start, from) = anchor_source(&q.start_vertices);

    let mut anchor = vec![format!("{start} AS v"), format!("{} AS q", table.q0())];
    let mut recursive = vec!["E.dst AS v".to_string(), "T.to_state AS q".to_string()];
    for (key, kind) in agg.schema.entries() {
        let col = quote_ident(key);
        let init = agg.init.get(key).cloned().unwrap_or_else(Expr::null);
        anchor.push(format!(
            "CAST({} AS {}) AS {col}",
            r.expr(&init, Site::Anchor)?,
            opts.dialect.value_type(*kind)
        ));
        recursive.push(format!("{} AS {col}", render_update(&r, agg, &table, key)?));
    }
    anchor.push("0 AS path_length".into());
    recursive.push("P.path_length + 1 AS path_length".into());

    let mut conditions = vec![
        "P.v = E.src AND T.label = E.label AND P.q = T.from_state".to_string(),
        format!("P.path_length < {}", q.max_length),
    ];
    conditions.extend(render_viability(&r, agg, &table)?);

    let projection = if opts.count_only {
        "count(*)".to_string()
    } else {
        let mut cols = vec!["v".to_string()];
        for (key, e) in &agg.finalize {
            let col = quote_ident(key);
            match e {
                Expr::DictRef(k) if k == key => cols.push(col),
                _ => cols.push(format!("{} AS {col}", r.expr(e, Site::Outer)?)),
            }
        }
        cols.join(", ")
    };
    let final_check = if agg.viable_final.is_true_literal() {
        "TRUE".to_string()
    } else {
        r.expr(&agg.viable_final, Site::Outer)?
    };

    let query = format!(
        "WITH RECURSIVE Paths AS (
  SELECT
    {anchor}{from}
  UNION ALL
  SELECT
    {recursive}
  FROM Paths P, Edges E, Transitions T
  WHERE {conditions}
)
SELECT {projection}
FROM Paths
WHERE {filter}",
        anchor = anchor.join(",\n    "),
        recursive = recursive.join(",\n    "),
        conditions = conditions.join("\n    AND "),
        filter = outer_filter(&table, opts, &final_check),
    );
    let mut ddl = emit_edges_index_ddl(g_schema, opts.dialect);
    ddl.extend(emit_transitions_ddl(&table));
    Ok(SqlArtifact {
        ddl,
        query,
        dialect: opts.dialect,
        form: SqlForm::Optimized,
    })
}

pub fn emit_sql(
    q: &PathQuerySpec,
    g_schema: &GraphSchema,
    form: SqlForm,
    opts: &CompileOptions,
) -> Result<SqlArtifact, CompileError> {
    match form {
        SqlForm::Standard => emit_standard_sql(q, g_schema, opts),
        SqlForm::Optimized => emit_optimized_sql(q, g_schema, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::{builtin_query, QueryParams};
    use crate::graph::PropertyKind;

    fn schema() -> GraphSchema {
        GraphSchema::new([("amount", PropertyKind::Int), ("time", PropertyKind::Int)])
    }

    fn params(items: &[(&str, &str)]) -> QueryParams {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn qb() -> PathQuerySpec {
        builtin_query(
            "QB",
            &params(&[("range_dd", "2"), ("range_df", "3"), ("start", "v3"), ("max_len", "5")]),
            &schema(),
        )
        .unwrap()
    }

    fn duck() -> CompileOptions {
        CompileOptions {
            dialect: Dialect::DuckDb,
            ..Default::default()
        }
    }

    #[test]
    fn transitions_ddl_has_one_insert_per_row() {
        let t = compile_regex("Domestic+ Foreign").unwrap();
        let ddl = emit_transitions_ddl(&t);
        assert_eq!(ddl.iter().filter(|s| s.starts_with("INSERT")).count(), 3);
        assert!(ddl.last().unwrap().ends_with("(from_state, label)"));
        let empty = emit_transitions_ddl(&compile_regex("!").unwrap());
        assert_eq!(empty.len(), 2);
    }

    #[test]
    fn edges_ddl_types_and_index() {
        let ddl = emit_edges_index_ddl(&schema(), Dialect::DuckDb);
        assert_eq!(
            ddl[0],
            "CREATE TABLE Edges (id VARCHAR, src VARCHAR, dst VARCHAR, label VARCHAR, \"amount\" BIGINT, \"time\" BIGINT)"
        );
        assert_eq!(ddl[1], "CREATE INDEX edges_src ON Edges (src)");
        let bare = emit_edges_index_ddl(&GraphSchema::default(), Dialect::Generic);
        assert!(bare[0].ends_with("label VARCHAR)"));
    }

    #[test]
    fn qb_optimized_has_one_branch_per_row() {
        let sql = emit_optimized_sql(&qb(), &schema(), &duck()).unwrap().query;
        assert_eq!(sql.matches("WHEN P.q =").count(), 3);
        assert!(sql.contains("WHEN P.q = 1 AND T.to_state = 2 THEN TRUE"));
        assert!(sql.contains("(-2 <= (E.\"time\" - P.\"last_time\"))"));
        assert!(sql.contains("list_append(P.\"edge_ids\", E.id) AS \"edge_ids\""));
        assert!(sql.contains("SELECT v, \"edge_ids\"\nFROM Paths\nWHERE q IN (3) AND TRUE"));
        for f in PLACEHOLDER_FUNCTIONS {
            assert!(!sql.contains(f), "{f}");
        }
    }

    #[test]
    fn factorized_viability_has_no_case() {
        let q = builtin_query("Q3", &params(&[("labels", "Domestic"), ("start", "v1")]), &schema())
            .unwrap();
        let sql = emit_optimized_sql(&q, &schema(), &duck()).unwrap().query;
        assert!(!sql.contains("CASE"));
        assert!(sql.contains("AND COALESCE((E.\"time\" > P.\"last_value\"), TRUE) AND (NOT list_contains"));
    }

    #[test]
    fn always_true_leaves_join_predicates() {
        let q = PathQuerySpec {
            name: None,
            start_vertices: vec!["v1".into(), "v3".into()],
            regex: "Domestic".into(),
            aggregate: SelectiveAggregateSpec::always_true(),
            max_length: 2,
        };
        let sql = emit_optimized_sql(&q, &schema(), &CompileOptions::default())
            .unwrap()
            .query;
        assert!(sql.contains(
            "WHERE P.v = E.src AND T.label = E.label AND P.q = T.from_state\n    AND P.path_length < 2\n)"
        ));
        assert!(sql.contains("FROM (SELECT 'v1' AS v UNION ALL SELECT 'v3') AS S"));
    }

    #[test]
    fn standard_form_calls_placeholders() {
        let a = emit_standard_sql(&qb(), &schema(), &duck()).unwrap();
        assert!(a.query.contains("update_d(P.D, P.q, T.to_state"));
        assert_eq!(a.query.matches("WITH RECURSIVE Paths").count(), 1);
        assert_eq!(a.query.matches("T.label = E.label").count(), 1);
        assert!(a.query.contains("WHERE q IN (3) AND is_viable_d_final(D)"));
    }

    #[test]
    fn emission_is_deterministic() {
        let a = emit_optimized_sql(&qb(), &schema(), &duck()).unwrap();
        let b = emit_optimized_sql(&qb(), &schema(), &duck()).unwrap();
        assert_eq!(a.script(true), b.script(true));
    }

    #[test]
    fn edge_references_outside_transitions_fail() {
        let mut q = qb();
        q.aggregate.init.insert("last_time".into(), Expr::edge("time"));
        let err = emit_optimized_sql(&q, &schema(), &duck()).unwrap_err();
        assert!(matches!(err, CompileError::Context { ref node, .. } if node == "edge"));
    }

    #[test]
    fn keyed_updates_become_case_only_when_they_differ() {
        let s = GraphSchema::new([
            ("time", PropertyKind::Int),
            ("region", PropertyKind::String),
            ("risk", PropertyKind::Int),
            ("amount", PropertyKind::Int),
        ]);
        let q = builtin_query(
            "Q1",
            &params(&[("risk_range", "20"), ("min_last_risk", "40"), ("min_total", "1000"), ("start", "a")]),
            &s,
        )
        .unwrap();
        let sql = emit_optimized_sql(&q, &s, &duck()).unwrap().query;
        assert!(sql.contains("E.\"time\" AS \"last_time\""));
        assert!(sql.contains("ELSE P.\"risk_max\"\n    END AS \"risk_max\""));
        assert!(sql.contains("WHERE q IN ("));
        assert!(sql.contains("(\"total_amount\" >= 1000)"));
    }
}
