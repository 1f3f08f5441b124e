//! Brute-force reference evaluator. Enumerates every walk up to the length
//! bound, matches its word directly against the regex syntax tree and
//! checks the property constraint on the complete walk.

use std::collections::{BTreeMap, BTreeSet};

use crate::aggregate::{eval_expr, Builtin, PathQuerySpec, QueryParams, Scope, Value};
use crate::engine::IncludeEmpty;
use crate::error::{Error, EvalError, SpecError};
use crate::graph::{Edge, EdgeIdx, PropertyGraph, PropertyValue, VertexIdx};
use crate::regex::{compile_regex, parse_regex, RegexAst, StateId, TransitionTable};

/// Positions reachable after matching `ast` from position `i` of `word`.
fn match_ends<S: AsRef<str>>(ast: &RegexAst, word: &[S], i: usize) -> BTreeSet<usize> {
    match ast {
        RegexAst::Never => BTreeSet::new(),
        RegexAst::Empty => BTreeSet::from([i]),
        RegexAst::Label(l) => match word.get(i) {
            Some(w) if w.as_ref() == l => BTreeSet::from([i + 1]),
            _ => BTreeSet::new(),
        },
        RegexAst::Concat(a, b) => match_ends(a, word, i)
            .into_iter()
            .flat_map(|j| match_ends(b, word, j))
            .collect(),
        RegexAst::Alt(a, b) => {
            let mut out = match_ends(a, word, i);
            out.extend(match_ends(b, word, i));
            out
        }
        RegexAst::Opt(a) => {
            let mut out = match_ends(a, word, i);
            out.insert(i);
            out
        }
        RegexAst::Star(a) | RegexAst::Plus(a) => {
            let mut reached = BTreeSet::new();
            if matches!(ast, RegexAst::Star(_)) {
                reached.insert(i);
            }
            let mut todo = vec![i];
            let mut expanded = BTreeSet::new();
            while let Some(j) = todo.pop() {
                if !expanded.insert(j) {
                    continue;
                }
                for k in match_ends(a, word, j) {
                    reached.insert(k);
                    todo.push(k);
                }
            }
            reached
        }
    }
}

/// Reference membership test straight on the syntax tree.
pub fn ast_matches<S: AsRef<str>>(ast: &RegexAst, word: &[S]) -> bool {
    match_ends(ast, word, 0).contains(&word.len())
}

/// Number of accepting runs of `table` over `word`.
pub fn count_runs<S: AsRef<str>>(table: &TransitionTable, word: &[S]) -> u64 {
    let mut at: BTreeMap<StateId, u64> = BTreeMap::from([(table.q0(), 1)]);
    for symbol in word {
        let mut next = BTreeMap::new();
        for (q, n) in &at {
            for row in table.rows() {
                if row.from_state == *q && row.label == symbol.as_ref() {
                    *next.entry(row.to_state).or_insert(0) += n;
                }
            }
        }
        at = next;
    }
    at.iter()
        .filter(|(q, _)| table.is_accepting(**q))
        .map(|(_, n)| n)
        .sum()
}

/// Accepting state sequences of `table` over `word`, each starting at q0.
fn accepting_runs(table: &TransitionTable, word: &[&str]) -> Vec<Vec<StateId>> {
    let mut runs = vec![vec![table.q0()]];
    for symbol in word {
        runs = runs
            .into_iter()
            .flat_map(|run| {
                let q = *run.last().unwrap();
                table
                    .rows()
                    .iter()
                    .filter(move |r| r.from_state == q && r.label == *symbol)
                    .map(move |r| {
                        let mut next = run.clone();
                        next.push(r.to_state);
                        next
                    })
            })
            .collect();
    }
    runs.retain(|r| table.is_accepting(*r.last().unwrap()));
    runs
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Walk {
    pub start: String,
    pub edges: Vec<EdgeIdx>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge_ids(&self, g: &PropertyGraph) -> Vec<String> {
        self.edges.iter().map(|e| g.edge(*e).id.clone()).collect()
    }

    pub fn word<'g>(&self, g: &'g PropertyGraph) -> Vec<&'g str> {
        self.edges.iter().map(|e| g.edge(*e).label.as_str()).collect()
    }

    pub fn edges<'g>(&self, g: &'g PropertyGraph) -> Vec<&'g Edge> {
        self.edges.iter().map(|e| g.edge(*e)).collect()
    }

    pub fn end(&self, g: &PropertyGraph) -> String {
        match self.edges.last() {
            Some(e) => g.edge(*e).dst.clone(),
            None => self.start.clone(),
        }
    }
}

/// Every walk of length `0..=max_len` from each start vertex, ordered by
/// start id and then by edge-id sequence.
pub fn enumerate_walks(g: &PropertyGraph, start_vertices: &[String], max_len: usize) -> Vec<Walk> {
    fn dfs(
        g: &PropertyGraph,
        start: &str,
        v: Option<VertexIdx>,
        max_len: usize,
        prefix: &mut Vec<EdgeIdx>,
        out: &mut Vec<Walk>,
    ) {
        out.push(Walk {
            start: start.to_string(),
            edges: prefix.clone(),
        });
        let Some(v) = v else { return };
        if prefix.len() == max_len {
            return;
        }
        for &e in g.out_edge_indices(v) {
            prefix.push(e);
            dfs(g, start, Some(g.edge_target(e)), max_len, prefix, out);
            prefix.pop();
        }
    }
    let mut starts: Vec<&String> = start_vertices.iter().collect();
    starts.sort();
    let mut out = Vec::new();
    for s in starts {
        dfs(g, s, g.vertex_index(s), max_len, &mut Vec::new(), &mut out);
    }
    out
}

fn num(v: Option<&PropertyValue>) -> Option<f64> {
    match v? {
        PropertyValue::Int(x) | PropertyValue::Timestamp(x) => Some(*x as f64),
        PropertyValue::Float(x) => Some(*x),
        _ => None,
    }
}

fn param_f64(params: &QueryParams, name: &str) -> Result<f64, SpecError> {
    let raw = params
        .get(name)
        .ok_or_else(|| SpecError::MissingParam(name.to_string()))?;
    raw.trim().parse().map_err(|_| SpecError::BadParam {
        name: name.to_string(),
        reason: format!("{raw:?} is not a number"),
    })
}

fn param_str(params: &QueryParams, name: &str, default: &str) -> String {
    params
        .get(name)
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| default.to_string())
}

fn param_set(params: &QueryParams, name: &str, default: &str) -> BTreeSet<String> {
    param_str(params, name, default)
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Whole-walk property constraint of a builtin query, written directly
/// over edge sequences.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinPhi {
    QA {
        bound: f64,
        time: String,
        amount: String,
    },
    QB {
        range_dd: f64,
        range_df: f64,
        time: String,
        domestic: String,
    },
    Q1 {
        risk_range: f64,
        min_last_risk: f64,
        min_total: f64,
        normal: BTreeSet<String>,
        time: String,
        region: String,
        risk: String,
        amount: String,
    },
    Q2 {
        color: String,
    },
    Q3 {
        property: String,
    },
    Q4 {
        window: f64,
        time: String,
    },
}

fn is_trail(edges: &[&Edge]) -> bool {
    let ids: BTreeSet<&str> = edges.iter().map(|e| e.id.as_str()).collect();
    ids.len() == edges.len()
}

/// Adjacent pairs where both values are present strictly increase.
fn adjacent_increasing(edges: &[&Edge], col: &str) -> bool {
    edges.windows(2).all(|w| {
        match (num(w[0].get_property(col)), num(w[1].get_property(col))) {
            (Some(a), Some(b)) => b > a,
            _ => true,
        }
    })
}

/// `max - min <= bound` over present values.
fn span_ok<'e>(edges: impl Iterator<Item = &'e &'e Edge>, col: &str, bound: f64) -> bool {
    let vals: Vec<f64> = edges.filter_map(|e| num(e.get_property(col))).collect();
    if vals.is_empty() {
        return true;
    }
    let max = vals.iter().copied().fold(f64::MIN, f64::max);
    let min = vals.iter().copied().fold(f64::MAX, f64::min);
    max - min <= bound
}

impl BuiltinPhi {
    pub fn new(name: &str, params: &QueryParams) -> Result<Self, SpecError> {
        let which: Builtin = name.parse()?;
        let p = params;
        Ok(match which {
            Builtin::QA => BuiltinPhi::QA {
                bound: param_f64(p, "U")?,
                time: param_str(p, "time_column", "time"),
                amount: param_str(p, "amount_column", "amount"),
            },
            Builtin::QB => BuiltinPhi::QB {
                range_dd: param_f64(p, "range_dd")?,
                range_df: param_f64(p, "range_df")?,
                time: param_str(p, "time_column", "time"),
                domestic: param_str(p, "domestic_label", "Domestic"),
            },
            Builtin::Q1 => BuiltinPhi::Q1 {
                risk_range: param_f64(p, "risk_range")?,
                min_last_risk: param_f64(p, "min_last_risk")?,
                min_total: param_f64(p, "min_total")?,
                normal: param_set(p, "normal_labels", "transfer,purchase,sale"),
                time: param_str(p, "time_column", "time"),
                region: param_str(p, "region_column", "region"),
                risk: param_str(p, "risk_column", "risk"),
                amount: param_str(p, "amount_column", "amount"),
            },
            Builtin::Q2 => BuiltinPhi::Q2 {
                color: param_str(p, "color_column", "color"),
            },
            Builtin::Q3 => BuiltinPhi::Q3 {
                property: param_str(p, "property", "time"),
            },
            Builtin::Q4 => BuiltinPhi::Q4 {
                window: param_f64(p, "window")?,
                time: param_str(p, "time_column", "time"),
            },
        })
    }

    /// Evaluates the constraint on a complete walk whose word already
    /// matches the query's regex.
    pub fn holds(&self, edges: &[&Edge]) -> bool {
        if !is_trail(edges) {
            return false;
        }
        match self {
            BuiltinPhi::QA {
                bound,
                time,
                amount,
            } => adjacent_increasing(edges, time) && span_ok(edges.iter(), amount, *bound),
            BuiltinPhi::QB {
                range_dd,
                range_df,
                time,
                domestic,
            } => edges.windows(2).all(|w| {
                let range = if w[1].label == *domestic {
                    range_dd
                } else {
                    range_df
                };
                match (num(w[0].get_property(time)), num(w[1].get_property(time))) {
                    (Some(a), Some(b)) => (b - a).abs() <= *range,
                    _ => false,
                }
            }),
            BuiltinPhi::Q1 {
                risk_range,
                min_last_risk,
                min_total,
                normal,
                time,
                region,
                risk,
                amount,
            } => {
                let regions: Vec<&PropertyValue> =
                    edges.iter().filter_map(|e| e.get_property(region)).collect();
                let prefix = edges.iter().take_while(|e| normal.contains(&e.label));
                let last_normal_risk = edges
                    .iter()
                    .take_while(|e| normal.contains(&e.label))
                    .last()
                    .and_then(|e| num(e.get_property(risk)));
                let amounts: Option<Vec<f64>> =
                    edges.iter().map(|e| num(e.get_property(amount))).collect();
                adjacent_increasing(edges, time)
                    && regions.windows(2).all(|w| w[0] == w[1])
                    && span_ok(prefix, risk, *risk_range)
                    && last_normal_risk.is_some_and(|r| r >= *min_last_risk)
                    && amounts.is_some_and(|a| a.iter().sum::<f64>() >= *min_total)
            }
            BuiltinPhi::Q2 { color } => edges.windows(2).any(|w| {
                match (w[0].get_property(color), w[1].get_property(color)) {
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                }
            }),
            BuiltinPhi::Q3 { property } => adjacent_increasing(edges, property),
            BuiltinPhi::Q4 { window, time } => span_ok(edges.iter(), time, *window),
        }
    }
}

/// How the oracle decides the property constraint.
#[derive(Debug, Clone, Copy)]
pub enum OraclePhi<'a> {
    /// A hand-written whole-walk predicate.
    Builtin(&'a BuiltinPhi),
    /// Replays the query's aggregate over every accepting run. With
    /// `per_step_viability` false the viability checks are skipped and only
    /// the final acceptance counts.
    Replay { per_step_viability: bool },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OracleOptions {
    pub include_empty: IncludeEmpty,
    pub distinct_paths: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMatch {
    pub walk: Walk,
    /// Accepting runs satisfying the constraint; 1 under distinct paths.
    pub runs: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleResult {
    pub matches: Vec<OracleMatch>,
    pub walks_examined: u64,
}

impl OracleResult {
    pub fn result_count(&self) -> u64 {
        self.matches.iter().map(|m| m.runs).sum()
    }

    /// Result multiset keyed by `(start, edge ids)`.
    pub fn multiset(&self, g: &PropertyGraph) -> BTreeMap<(String, Vec<String>), u64> {
        let mut out = BTreeMap::new();
        for m in &self.matches {
            *out.entry((m.walk.start.clone(), m.walk.edge_ids(g)))
                .or_insert(0) += m.runs;
        }
        out
    }

    /// Number of result walks from `start` that begin with `prefix`.
    pub fn extensions_of(&self, g: &PropertyGraph, start: &str, prefix: &[String]) -> u64 {
        self.matches
            .iter()
            .filter(|m| m.walk.start == start && m.walk.edge_ids(g).starts_with(prefix))
            .map(|m| m.runs)
            .sum()
    }
}

fn replay(
    q: &PathQuerySpec,
    edges: &[&Edge],
    run: &[StateId],
    per_step_viability: bool,
) -> Result<bool, EvalError> {
    let agg = &q.aggregate;
    let keys = agg.schema.keys();
    let empty = Scope::dictionary(&[], &[]);
    let mut dict = agg
        .initial_values()
        .into_iter()
        .map(|e| e.map_or(Ok(Value::Null), |e| eval_expr(e, &empty)))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, edge) in edges.iter().enumerate() {
        let (from, to) = (run[i], run[i + 1]);
        let at = |source| EvalError::AtTransition {
            from,
            to,
            source: Box::new(source),
        };
        let scope = Scope::dictionary(&keys, &dict).transition(edge, from, to);
        if per_step_viability {
            let viable = agg
                .viable
                .get(from, to)
                .ok_or_else(|| at(EvalError::Unbound("viability entry".into())))?;
            if !eval_expr(viable, &scope).map_err(at)?.is_true() {
                return Ok(false);
            }
        }
        let mut next = dict.clone();
        if let Some(updates) = agg.update.get(from, to) {
            for (k, e) in updates {
                let slot = agg
                    .schema
                    .slot(k)
                    .ok_or_else(|| at(EvalError::Unbound(format!("dictionary key {k:?}"))))?;
                next[slot] = eval_expr(e, &scope).map_err(at)?;
            }
        }
        dict = next;
    }
    let scope = Scope::dictionary(&keys, &dict);
    for e in agg.finalize.values() {
        eval_expr(e, &scope)?;
    }
    Ok(eval_expr(&agg.viable_final, &scope)?.is_true())
}

/// Evaluates `q` by exhaustive enumeration.
///
/// # Panics
/// When the transition table and the syntax-tree matcher disagree on a
/// walk's word, which would mean the regex pipeline is broken.
pub fn brute_force_evaluate(
    g: &PropertyGraph,
    q: &PathQuerySpec,
    phi: OraclePhi<'_>,
    opts: OracleOptions,
) -> Result<OracleResult, Error> {
    let ast = parse_regex(&q.regex)?;
    let table = compile_regex(&q.regex)?;
    let mut out = OracleResult::default();
    for walk in enumerate_walks(g, &q.start_vertices, q.max_length) {
        out.walks_examined += 1;
        if walk.is_empty() && opts.include_empty == IncludeEmpty::Never {
            continue;
        }
        let word = walk.word(g);
        let matched = ast_matches(&ast, &word);
        let runs = count_runs(&table, &word);
        assert_eq!(
            matched,
            runs > 0,
            "transition table and regex disagree on {word:?}"
        );
        if !matched {
            continue;
        }
        let edges = walk.edges(g);
        let passing = match phi {
            OraclePhi::Builtin(p) => {
                if p.holds(&edges) {
                    runs
                } else {
                    0
                }
            }
            OraclePhi::Replay { per_step_viability } => {
                let mut n = 0;
                for run in accepting_runs(&table, &word) {
                    if replay(q, &edges, &run, per_step_viability)? {
                        n += 1;
                    }
                }
                n
            }
        };
        if passing > 0 {
            out.matches.push(OracleMatch {
                walk,
                runs: if opts.distinct_paths { 1 } else { passing },
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeRecord, GraphSchema, PropertyKind};

    fn ring(n: usize, k: usize) -> PropertyGraph {
        let mut records = Vec::new();
        for v in 0..n {
            for j in 1..=k {
                records.push(EdgeRecord::new(
                    &format!("e{v:02}_{j}"),
                    &format!("v{v}"),
                    &format!("v{}", (v + j) % n),
                    "a",
                ));
            }
        }
        PropertyGraph::from_edges(GraphSchema::default(), records).unwrap()
    }

    #[test]
    fn walk_count_of_regular_digraph() {
        for (n, k, len) in [(5, 2, 4), (4, 3, 3), (6, 1, 5)] {
            let walks = enumerate_walks(&ring(n, k), &["v0".into()], len);
            let expected: usize = (0..=len as u32).map(|j| k.pow(j)).sum();
            assert_eq!(walks.len(), expected);
        }
    }

    #[test]
    fn length_zero_gives_one_empty_walk_per_start() {
        let starts: Vec<String> = vec!["v1".into(), "v0".into(), "missing".into()];
        let walks = enumerate_walks(&ring(3, 1), &starts, 0);
        assert_eq!(walks.len(), 3);
        assert!(walks.iter().all(Walk::is_empty));
        assert_eq!(walks[0].start, "missing");
    }

    #[test]
    fn matcher_basics() {
        let ast = parse_regex("a+ b").unwrap();
        assert!(ast_matches(&ast, &["a", "b"]));
        assert!(ast_matches(&ast, &["a", "a", "a", "b"]));
        assert!(!ast_matches(&ast, &["b"]));
        assert!(!ast_matches::<&str>(&ast, &[]));
        let nested = parse_regex("(a*)*").unwrap();
        assert!(ast_matches::<&str>(&nested, &[]));
        assert!(ast_matches(&nested, &["a", "a"]));
        assert!(!ast_matches(&parse_regex("!").unwrap(), &["a"]));
    }

    #[test]
    fn run_counts_follow_ambiguity() {
        let t = compile_regex("a|a a*").unwrap();
        assert_eq!(count_runs(&t, &["a"]), 2);
        assert_eq!(count_runs(&t, &["a", "a"]), 1);
        assert_eq!(count_runs::<&str>(&t, &[]), 0);
    }

    #[test]
    fn builtin_phi_checks_trail_and_order() {
        let schema = GraphSchema::new([("time", PropertyKind::Int)]);
        let g = PropertyGraph::from_edges(
            schema,
            vec![
                EdgeRecord::new("e1", "x", "y", "a").with("time", PropertyValue::Int(1)),
                EdgeRecord::new("e2", "y", "x", "a").with("time", PropertyValue::Int(2)),
                EdgeRecord::new("e3", "y", "x", "a"),
            ],
        )
        .unwrap();
        let e = |i: usize| &g.edges()[i];
        let q3 = BuiltinPhi::new("Q3", &QueryParams::new()).unwrap();
        assert!(q3.holds(&[e(0), e(1)]));
        assert!(!q3.holds(&[e(1), e(0)]));
        assert!(!q3.holds(&[e(0), e(2), e(0)]));
        assert!(q3.holds(&[e(2)]));
    }
}
