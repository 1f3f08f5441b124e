//! Native evaluator: breadth-wise product expansion of graph and NFA with
//! per-step viability pruning.

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use rayon::prelude::*;

use crate::aggregate::{
    default_construction, eval_expr, validate_spec, Expr, PathQuerySpec, Scope, Value,
};
use crate::error::{Error, EvalError, SpecError};
use crate::graph::{EdgeIdx, PropertyGraph, VertexIdx};
use crate::regex::{compile_regex, StateId, TransitionTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// Counts only; results are not kept.
    CountOnly,
    /// Keeps finalized dictionaries.
    #[default]
    Materialize,
    /// Keeps finalized dictionaries, edge traces and pruned prefixes.
    Trace,
}

/// Whether zero-length paths may be results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IncludeEmpty {
    /// Exactly when the regex accepts the empty word.
    #[default]
    Auto,
    Never,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub mode: EvalMode,
    pub include_empty: IncludeEmpty,
    /// Collapse results with the same start vertex and edge sequence.
    /// Traces are tracked internally whatever the mode.
    pub distinct_paths: bool,
    /// Worker count; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl EvalOptions {
    pub fn mode(mode: EvalMode) -> Self {
        EvalOptions {
            mode,
            ..Default::default()
        }
    }
}

/// Frontier element.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTuple {
    /// Index into the query's start vertices.
    pub start: usize,
    /// Current vertex; `None` only for the anchor of a start vertex absent
    /// from the graph.
    pub v: Option<VertexIdx>,
    pub q: StateId,
    pub dict: Vec<Value>,
    pub depth: usize,
    pub trace: Option<Vec<EdgeIdx>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub start: String,
    pub v: String,
    pub output: IndexMap<String, Value>,
    pub trace: Option<Vec<String>>,
}

impl PathResult {
    pub fn output_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.output
                .iter()
                .map(|(k, v)| (k.clone(), v.to_json()))
                .collect(),
        )
    }

    /// `<start>,<e1;e2;...>,<finalized dictionary as JSON>`
    pub fn trace_line(&self) -> String {
        format!(
            "{},{},{}",
            self.start,
            self.trace.as_deref().unwrap_or_default().join(";"),
            self.output_json()
        )
    }
}

/// A prefix whose last step failed its viability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedPrefix {
    pub start: String,
    /// Edge ids of the prefix, including the rejected edge.
    pub trace: Vec<String>,
    pub depth: usize,
    pub transition: (StateId, StateId),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalResult {
    pub results: Vec<PathResult>,
    pub result_count: u64,
    /// Tuples generated over all depths, anchors included.
    pub intermediate_count: u64,
    pub per_depth_counts: Vec<u64>,
    /// Filled in trace mode only.
    pub pruned: Vec<PrunedPrefix>,
}

struct Step<'q> {
    updates: Vec<(usize, &'q Expr)>,
    viable: &'q Expr,
}

struct Plan<'a> {
    g: &'a PropertyGraph,
    q: &'a PathQuerySpec,
    table: TransitionTable,
    keys: Vec<String>,
    /// `moves[state][label]` lists `(to_state, step index)`.
    moves: Vec<Vec<Vec<(StateId, usize)>>>,
    steps: Vec<Step<'a>>,
    edge_label: Vec<Option<usize>>,
    start_idx: Vec<Option<VertexIdx>>,
    track: bool,
    record_pruned: bool,
}

#[derive(Default)]
struct Expansion {
    next: Vec<PathTuple>,
    pruned: Vec<PrunedPrefix>,
}

impl<'a> Plan<'a> {
    fn new(g: &'a PropertyGraph, q: &'a PathQuerySpec, opts: &EvalOptions) -> Result<Self, Error> {
        let table = compile_regex(&q.regex)?;
        let diagnostics = validate_spec(q, g.schema(), &table);
        if !diagnostics.is_empty() {
            return Err(SpecError::Invalid(diagnostics).into());
        }
        let agg = &q.aggregate;
        let keys = agg.schema.keys();

        let labels: Vec<&str> = table.labels().into_iter().collect();
        let label_of: HashMap<&str, usize> =
            labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let edge_label = g
            .edges()
            .iter()
            .map(|e| label_of.get(e.label.as_str()).copied())
            .collect();

        let mut moves = vec![vec![Vec::new(); labels.len()]; table.state_count() as usize + 1];
        let mut steps = Vec::new();
        let mut step_of: HashMap<(StateId, StateId), usize> = HashMap::new();
        for row in table.rows() {
            let key = (row.from_state, row.to_state);
            let idx = *step_of.entry(key).or_insert_with(|| {
                let updates = agg
                    .update
                    .get(key.0, key.1)
                    .map(|m| {
                        m.iter()
                            .filter_map(|(k, e)| agg.schema.slot(k).map(|s| (s, e)))
                            .collect()
                    })
                    .unwrap_or_default();
                steps.push(Step {
                    updates,
                    viable: agg.viable.get(key.0, key.1).expect("validated coverage"),
                });
                steps.len() - 1
            });
            moves[row.from_state as usize][label_of[row.label.as_str()]].push((row.to_state, idx));
        }

        let start_idx = q.start_vertices.iter().map(|s| g.vertex_index(s)).collect();
        Ok(Plan {
            g,
            q,
            table,
            keys,
            moves,
            steps,
            edge_label,
            start_idx,
            track: opts.mode == EvalMode::Trace || opts.distinct_paths,
            record_pruned: opts.mode == EvalMode::Trace,
        })
    }

    fn anchors(&self) -> Result<Vec<PathTuple>, EvalError> {
        let scope = Scope::dictionary(&[], &[]);
        let init = self
            .q
            .aggregate
            .initial_values()
            .into_iter()
            .map(|e| e.map_or(Ok(Value::Null), |e| eval_expr(e, &scope)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self
            .start_idx
            .iter()
            .enumerate()
            .map(|(start, v)| PathTuple {
                start,
                v: *v,
                q: self.table.q0(),
                dict: init.clone(),
                depth: 0,
                trace: self.track.then(Vec::new),
            })
            .collect())
    }

    fn trace_ids(&self, trace: &[EdgeIdx]) -> Vec<String> {
        trace.iter().map(|e| self.g.edge(*e).id.clone()).collect()
    }

    fn expand(&self, t: &PathTuple) -> Result<Expansion, EvalError> {
        let mut out = Expansion::default();
        let Some(v) = t.v else { return Ok(out) };
        for &ei in self.g.out_edge_indices(v) {
            let Some(label) = self.edge_label[ei as usize] else {
                continue;
            };
            let edge = self.g.edge(ei);
            for &(to, step) in &self.moves[t.q as usize][label] {
                let step = &self.steps[step];
                let at = |source| EvalError::AtTransition {
                    from: t.q,
                    to,
                    source: Box::new(source),
                };
                let scope = Scope::dictionary(&self.keys, &t.dict).transition(edge, t.q, to);
                let trace = t.trace.as_ref().map(|tr| {
                    let mut tr = tr.clone();
                    tr.push(ei);
                    tr
                });
                if !eval_expr(step.viable, &scope).map_err(at)?.is_true() {
                    if self.record_pruned {
                        out.pruned.push(PrunedPrefix {
                            start: self.q.start_vertices[t.start].clone(),
                            trace: self.trace_ids(trace.as_deref().unwrap_or_default()),
                            depth: t.depth + 1,
                            transition: (t.q, to),
                        });
                    }
                    continue;
                }
                let mut dict = t.dict.clone();
                for &(slot, e) in &step.updates {
                    dict[slot] = eval_expr(e, &scope).map_err(at)?;
                }
                out.next.push(PathTuple {
                    start: t.start,
                    v: Some(self.g.edge_target(ei)),
                    q: to,
                    dict,
                    depth: t.depth + 1,
                    trace,
                });
            }
        }
        Ok(out)
    }

    fn accept(&self, t: &PathTuple) -> Result<bool, EvalError> {
        if !self.table.is_accepting(t.q) {
            return Ok(false);
        }
        let scope = Scope::dictionary(&self.keys, &t.dict);
        Ok(eval_expr(&self.q.aggregate.viable_final, &scope)?.is_true())
    }

    fn finalize(&self, t: &PathTuple) -> Result<PathResult, EvalError> {
        let scope = Scope::dictionary(&self.keys, &t.dict);
        let output = self
            .q
            .aggregate
            .finalize
            .iter()
            .map(|(k, e)| eval_expr(e, &scope).map(|v| (k.clone(), v)))
            .collect::<Result<_, _>>()?;
        let start = self.q.start_vertices[t.start].clone();
        let v = match t.v {
            Some(v) => self.g.vertex(v).id.clone(),
            None => start.clone(),
        };
        Ok(PathResult {
            start,
            v,
            output,
            trace: t.trace.as_deref().map(|tr| self.trace_ids(tr)),
        })
    }
}

struct Collector<'p, 'a> {
    plan: &'p Plan<'a>,
    opts: &'p EvalOptions,
    seen: HashSet<(usize, Vec<EdgeIdx>)>,
    out: EvalResult,
}

impl Collector<'_, '_> {
    fn offer(&mut self, t: &PathTuple) -> Result<(), EvalError> {
        if t.depth == 0 && self.opts.include_empty == IncludeEmpty::Never {
            return Ok(());
        }
        if !self.plan.accept(t)? {
            return Ok(());
        }
        if self.opts.distinct_paths {
            let key = (t.start, t.trace.clone().unwrap_or_default());
            if !self.seen.insert(key) {
                return Ok(());
            }
        }
        self.out.result_count += 1;
        if self.opts.mode != EvalMode::CountOnly {
            let mut r = self.plan.finalize(t)?;
            if self.opts.mode != EvalMode::Trace {
                r.trace = None;
            }
            self.out.results.push(r);
        }
        Ok(())
    }
}

fn run(plan: &Plan, opts: &EvalOptions) -> Result<EvalResult, EvalError> {
    let mut c = Collector {
        plan,
        opts,
        seen: HashSet::new(),
        out: EvalResult::default(),
    };
    let mut frontier = plan.anchors()?;
    let mut depth = 0;
    loop {
        c.out.per_depth_counts.push(frontier.len() as u64);
        for t in &frontier {
            c.offer(t)?;
        }
        if depth == plan.q.max_length || frontier.is_empty() {
            break;
        }
        let parts: Vec<Expansion> = frontier
            .par_iter()
            .map(|t| plan.expand(t))
            .collect::<Result<_, _>>()?;
        frontier = Vec::with_capacity(parts.iter().map(|p| p.next.len()).sum());
        for p in parts {
            frontier.extend(p.next);
            c.out.pruned.extend(p.pruned);
        }
        depth += 1;
    }
    c.out.intermediate_count = c.out.per_depth_counts.iter().sum();
    Ok(c.out)
}

/// Evaluates a path query. Results follow bag semantics over NFA runs
/// unless `distinct_paths` is set.
pub fn evaluate(
    g: &PropertyGraph,
    q: &PathQuerySpec,
    opts: &EvalOptions,
) -> Result<EvalResult, Error> {
    let plan = Plan::new(g, q, opts)?;
    let result = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SpecError::BadParam {
                name: "threads".into(),
                reason: e.to_string(),
            })?
            .install(|| run(&plan, opts)),
        None => run(&plan, opts),
    };
    Ok(result?)
}

/// Evaluates the default construction of `phi` over the listed properties.
pub fn evaluate_default(
    g: &PropertyGraph,
    regex: &str,
    phi: Expr,
    props: &[&str],
    start: &[String],
    max_length: usize,
    opts: &EvalOptions,
) -> Result<EvalResult, Error> {
    let q = PathQuerySpec {
        name: Some("default".into()),
        start_vertices: start.to_vec(),
        regex: regex.to_string(),
        aggregate: default_construction(phi, props, g.schema()),
        max_length,
    };
    evaluate(g, &q, opts)
}

pub fn count_paths(g: &PropertyGraph, q: &PathQuerySpec) -> Result<u64, Error> {
    Ok(evaluate(g, q, &EvalOptions::mode(EvalMode::CountOnly))?.result_count)
}
