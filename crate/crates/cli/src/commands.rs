use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use recap_core::engine::{evaluate, EvalMode, EvalOptions, IncludeEmpty};
use recap_core::generate::{complete_digraph, random_graph, PropertyRange, RandomGraphSpec};
use recap_core::graph::{write_graph_csv, GraphSchema, PropertyKind};
use recap_core::oracle::{brute_force_evaluate, BuiltinPhi, OracleOptions, OraclePhi};
use recap_core::regex::compile_regex;
use recap_core::sql::{emit_edge_inserts, emit_sql, CompileOptions, Dialect, SqlForm};

use crate::input::{example_schema, GraphArgs, QueryArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Count,
    Materialize,
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmptyPaths {
    /// Length-0 paths count when the regex accepts the empty word.
    Auto,
    Never,
}

impl From<EmptyPaths> for IncludeEmpty {
    fn from(e: EmptyPaths) -> Self {
        match e {
            EmptyPaths::Auto => IncludeEmpty::Auto,
            EmptyPaths::Never => IncludeEmpty::Never,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Form {
    Standard,
    Optimized,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DialectArg {
    Generic,
    Duckdb,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long, value_enum, default_value = "materialize")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "auto")]
    include_empty: EmptyPaths,
    /// Report each (start, edge sequence) once.
    #[arg(long)]
    distinct_paths: bool,
    /// Evaluate the builtin without early filtering.
    #[arg(long)]
    default_construction: bool,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
    /// In trace mode, also print the pruned prefixes.
    #[arg(long)]
    pruned: bool,
}

#[derive(Debug, Serialize)]
struct RunReport {
    query: String,
    max_len: usize,
    result_count: u64,
    intermediate_count: u64,
    per_depth_counts: Vec<u64>,
    wall_ms: f64,
    mode: Mode,
    include_empty: EmptyPaths,
    distinct_paths: bool,
    default_construction: bool,
    threads: Option<usize>,
}

fn eval_options(mode: EvalMode, include_empty: EmptyPaths, distinct: bool, threads: Option<usize>) -> EvalOptions {
    EvalOptions {
        mode,
        include_empty: include_empty.into(),
        distinct_paths: distinct,
        threads,
    }
}

pub fn run(a: RunArgs) -> Result<()> {
    let g = a.graph.load()?;
    let q = a.query.load(g.schema(), a.max_len, a.default_construction)?;
    let mode = match a.mode {
        Mode::Count => EvalMode::CountOnly,
        Mode::Materialize => EvalMode::Materialize,
        Mode::Trace => EvalMode::Trace,
    };
    let t0 = Instant::now();
    let r = evaluate(&g, &q, &eval_options(mode, a.include_empty, a.distinct_paths, a.threads))?;
    let wall_ms = t0.elapsed().as_secs_f64() * 1e3;

    let report = RunReport {
        query: q.name.clone().unwrap_or_else(|| q.regex.clone()),
        max_len: q.max_length,
        result_count: r.result_count,
        intermediate_count: r.intermediate_count,
        per_depth_counts: r.per_depth_counts.clone(),
        wall_ms,
        mode: a.mode,
        include_empty: a.include_empty,
        distinct_paths: a.distinct_paths,
        default_construction: a.default_construction,
        threads: a.threads,
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "{}", serde_json::to_string(&report)?)?;
    for res in &r.results {
        if a.mode == Mode::Trace {
            writeln!(out, "{}", res.trace_line())?;
        } else {
            let line = serde_json::json!({"start": res.start, "v": res.v, "output": res.output_json()});
            writeln!(out, "{line}")?;
        }
    }
    if a.pruned {
        for p in &r.pruned {
            let line = serde_json::json!({
                "pruned": p.trace,
                "start": p.start,
                "depth": p.depth,
                "transition": [p.transition.0, p.transition.1],
            });
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Graph whose schema types the Edges table; the bundled example when
    /// neither this nor --graph-schema is given.
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    graph_schema: Option<PathBuf>,
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long, value_enum, default_value = "optimized")]
    form: Form,
    #[arg(long, value_enum, default_value = "duckdb")]
    dialect: DialectArg,
    #[arg(long, value_enum, default_value = "auto")]
    include_empty: EmptyPaths,
    #[arg(long)]
    default_construction: bool,
    /// Project count(*) instead of the result columns.
    #[arg(long)]
    count: bool,
    /// Print only the query, without table and index DDL.
    #[arg(long)]
    no_ddl: bool,
    /// Add INSERT statements for the graph's edges.
    #[arg(long, requires = "graph")]
    load_edges: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

pub fn compile(a: CompileArgs) -> Result<()> {
    let graph = match &a.graph {
        Some(path) => Some(
            GraphArgs {
                graph: path.clone(),
                graph_schema: a.graph_schema.clone(),
            }
            .load()?,
        ),
        None => None,
    };
    let schema = match (&graph, &a.graph_schema) {
        (Some(g), _) => g.schema().clone(),
        (None, Some(p)) => GraphSchema::from_json_file(p)?,
        (None, None) => example_schema(),
    };
    let q = a.query.load(&schema, a.max_len, a.default_construction)?;
    let dialect = match a.dialect {
        DialectArg::Generic => Dialect::Generic,
        DialectArg::Duckdb => Dialect::DuckDb,
    };
    let form = match a.form {
        Form::Standard => SqlForm::Standard,
        Form::Optimized => SqlForm::Optimized,
    };
    let opts = CompileOptions {
        dialect,
        count_only: a.count,
        include_empty: a.include_empty.into(),
    };
    let mut art = emit_sql(&q, &schema, form, &opts)?;
    if let (true, Some(g)) = (a.load_edges, &graph) {
        art.ddl.extend(emit_edge_inserts(g, dialect, 500)?);
    }
    let text = art.script(!a.no_ddl);
    match &a.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct NfaArgs {
    #[arg(long)]
    regex: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
}

pub fn nfa(a: NfaArgs) -> Result<()> {
    let t = compile_regex(&a.regex)?;
    match a.format {
        TableFormat::Csv => {
            print!("{}", t.to_csv());
            eprintln!("{t}");
        }
        TableFormat::Json => {
            let rows: Vec<_> = t
                .rows()
                .iter()
                .map(|r| serde_json::json!({"from_state": r.from_state, "to_state": r.to_state, "label": r.label}))
                .collect();
            let j = serde_json::json!({
                "q0": t.q0(),
                "accepting": t.accepting(),
                "accepts_empty": t.accepts_empty(),
                "states": t.state_count(),
                "rows": rows,
            });
            println!("{}", serde_json::to_string_pretty(&j)?);
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    include_empty: EmptyPaths,
    #[arg(long)]
    distinct_paths: bool,
    /// Replay the query's aggregate instead of the builtin's own predicate.
    #[arg(long)]
    replay: bool,
    /// Print every result walk as `start,edge;edge,runs`.
    #[arg(long)]
    trace: bool,
}

pub fn oracle(a: OracleArgs) -> Result<()> {
    let g = a.graph.load()?;
    let q = a.query.load(g.schema(), a.max_len, false)?;
    let native = match a.query.builtin_params() {
        Some((name, p)) if !a.replay => Some(BuiltinPhi::new(name, &p)?),
        _ => None,
    };
    let phi = match &native {
        Some(p) => OraclePhi::Builtin(p),
        None => OraclePhi::Replay {
            per_step_viability: true,
        },
    };
    let opts = OracleOptions {
        include_empty: a.include_empty.into(),
        distinct_paths: a.distinct_paths,
    };
    let r = brute_force_evaluate(&g, &q, phi, opts)?;
    println!(
        "{}",
        serde_json::json!({
            "query": q.name.clone().unwrap_or_else(|| q.regex.clone()),
            "max_len": q.max_length,
            "result_count": r.result_count(),
            "walks_examined": r.walks_examined,
            "predicate": if native.is_some() { "native" } else { "replay" },
        })
    );
    if a.trace {
        for m in &r.matches {
            println!("{},{},{}", m.walk.start, m.walk.edge_ids(&g).join(";"), m.runs);
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    query: QueryArgs,
    /// Inclusive range such as `2..5`, or a single length.
    #[arg(long, value_parser = parse_len_range)]
    max_len: (usize, usize),
    #[arg(long)]
    default_construction: bool,
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    #[arg(long)]
    threads: Option<usize>,
}

pub fn parse_len_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| format!("{x:?} is not a length"))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (parse(lo)?, parse(hi.trim_start_matches('='))?),
        None => (parse(s)?, parse(s)?),
    };
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok((lo, hi))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

pub fn bench(a: BenchArgs) -> Result<()> {
    if a.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let g = a.graph.load()?;
    let opts = eval_options(EvalMode::CountOnly, EmptyPaths::Auto, false, a.threads);
    println!("ℓ,count,intermediate,median_ms");
    for len in a.max_len.0..=a.max_len.1 {
        let q = a.query.load(g.schema(), Some(len), a.default_construction)?;
        for _ in 0..a.warmup {
            evaluate(&g, &q, &opts)?;
        }
        let mut times = Vec::with_capacity(a.runs);
        let mut last = None;
        for _ in 0..a.runs {
            let t0 = Instant::now();
            let r = evaluate(&g, &q, &opts)?;
            times.push(t0.elapsed().as_secs_f64() * 1e3);
            last = Some(r);
        }
        let r = last.expect("at least one run");
        println!(
            "{len},{},{},{:.3}",
            r.result_count,
            r.intermediate_count,
            median(times)
        );
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 20)]
    vertices: usize,
    #[arg(long, default_value_t = 60)]
    edges: usize,
    #[arg(long, value_delimiter = ',', default_value = "a,b")]
    labels: Vec<String>,
    /// `name:int|float|timestamp:min:max` or `name:string:x|y|z`, repeatable.
    #[arg(long = "prop", value_parser = parse_prop_range)]
    props: Vec<PropertyRange>,
    /// Probability that a property cell is left empty.
    #[arg(long, default_value_t = 0.0)]
    missing: f64,
    /// Complete digraph on --vertices with the first label.
    #[arg(long)]
    complete: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge CSV destination; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Schema JSON destination; next to --out as `<stem>_schema.json` when omitted.
    #[arg(long)]
    schema_out: Option<PathBuf>,
}

pub fn parse_prop_range(s: &str) -> Result<PropertyRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let kind: PropertyKind = parts
        .get(1)
        .ok_or_else(|| format!("expected name:kind:..., got {s:?}"))?
        .parse()
        .map_err(|e: recap_core::GraphError| e.to_string())?;
    match (kind, &parts[..]) {
        (PropertyKind::String, [name, _, choices]) => {
            Ok(PropertyRange::strings(name, &choices.split('|').collect::<Vec<_>>()))
        }
        (_, [name, _, lo, hi]) => {
            let num = |x: &str| x.parse::<i64>().map_err(|_| format!("{x:?} is not an integer"));
            Ok(PropertyRange::numeric(name, kind, num(lo)?, num(hi)?))
        }
        _ => Err(format!("expected name:kind:min:max or name:string:a|b, got {s:?}")),
    }
}

pub fn gen(a: GenArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.missing) {
        bail!("--missing must be a probability");
    }
    let g = if a.complete {
        let label = a.labels.first().map(String::as_str).unwrap_or("a");
        complete_digraph(a.vertices, label, &a.props, a.seed)
    } else {
        let spec = RandomGraphSpec {
            vertices: a.vertices,
            edges: a.edges,
            labels: a.labels.clone(),
            properties: a.props.clone(),
            missing: a.missing,
        };
        random_graph(&spec, a.seed)
    };
    let schema_out = a.schema_out.clone().or_else(|| {
        let out = a.out.as_ref()?;
        let name = out.file_name()?.to_str()?;
        let stem = name.strip_suffix("_edges.csv").or_else(|| name.strip_suffix(".csv"))?;
        Some(out.with_file_name(format!("{stem}_schema.json")))
    });
    match &a.out {
        Some(p) => {
            let f = std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            write_graph_csv(&g, f)?;
        }
        None => write_graph_csv(&g, std::io::stdout().lock())?,
    }
    if let Some(p) = schema_out {
        std::fs::write(&p, serde_json::to_string_pretty(g.schema())? + "\n")
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(())
}
