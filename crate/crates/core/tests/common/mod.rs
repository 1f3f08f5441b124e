#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use recap_core::aggregate::{builtin_default_query, builtin_query, Builtin, QueryParams};
use recap_core::engine::{evaluate, EvalMode, EvalOptions, EvalResult};
use recap_core::generate::{random_graph, PropertyRange, RandomGraphSpec};
use recap_core::graph::{load_graph, GraphSchema, PropertyGraph, PropertyKind};
use recap_core::oracle::{brute_force_evaluate, BuiltinPhi, OracleOptions, OraclePhi, OracleResult};
use recap_core::regex::RegexAst;
use recap_core::PathQuerySpec;

pub type Multiset = BTreeMap<(String, Vec<String>), u64>;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn load_fixture(stem: &str) -> PropertyGraph {
    let schema = GraphSchema::from_json_file(fixture(&format!("{stem}_schema.json"))).unwrap();
    load_graph(fixture(&format!("{stem}_edges.csv")), &schema).unwrap()
}

pub fn bank() -> PropertyGraph {
    load_fixture("bank")
}

pub fn params(items: &[(&str, &str)]) -> QueryParams {
    items
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// One random graph together with a randomized instance of every builtin.
pub struct CorpusCase {
    pub seed: u64,
    pub graph: PropertyGraph,
    pub queries: Vec<(Builtin, QueryParams)>,
}

impl CorpusCase {
    pub fn spec(&self, which: Builtin, p: &QueryParams) -> PathQuerySpec {
        builtin_query(&which.to_string(), p, self.graph.schema())
            .unwrap_or_else(|e| panic!("seed {}: {which} {p:?}: {e}", self.seed))
    }

    pub fn default_spec(&self, which: Builtin, p: &QueryParams) -> Option<PathQuerySpec> {
        which.has_default_form().then(|| {
            builtin_default_query(&which.to_string(), p, self.graph.schema())
                .unwrap_or_else(|e| panic!("seed {}: {which} {p:?}: {e}", self.seed))
        })
    }
}

fn label_subset(rng: &mut ChaCha8Rng, labels: &[String]) -> String {
    let k = rng.gen_range(1..=labels.len());
    let mut picked: Vec<String> = labels.choose_multiple(rng, k).cloned().collect();
    picked.sort();
    picked.join(",")
}

/// Graphs up to `max_vertices` vertices and 80 edges, 2-3 labels, int, float,
/// timestamp and string properties with some cells missing.
pub fn corpus_case(seed: u64, max_vertices: usize) -> CorpusCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let vertices = rng.gen_range(2..=max_vertices);
    let edges = rng.gen_range(vertices..=(3 * vertices).min(80));
    let labels: Vec<String> = ["a", "b", "c"][..rng.gen_range(2..=3)]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let amount_kind = if rng.gen_bool(0.5) {
        PropertyKind::Int
    } else {
        PropertyKind::Float
    };
    let spec = RandomGraphSpec {
        vertices,
        edges,
        labels: labels.clone(),
        properties: vec![
            PropertyRange::numeric("time", PropertyKind::Timestamp, 0, 30),
            PropertyRange::numeric("amount", amount_kind, -10, 30),
            PropertyRange::numeric("risk", PropertyKind::Int, 0, 100),
            PropertyRange::strings("color", &["red", "blue"]),
            PropertyRange::strings("region", &["north", "south"]),
        ],
        missing: if rng.gen_bool(0.5) { 0.0 } else { 0.1 },
    };
    let graph = random_graph(&spec, seed);

    let ids: Vec<String> = graph.vertices().iter().map(|v| v.id.clone()).collect();
    let mut queries = Vec::new();
    for which in Builtin::ALL {
        let k = rng.gen_range(1..=3).min(ids.len());
        let mut starts: Vec<String> = ids
            .choose_multiple(&mut rng, k)
            .cloned()
            .collect();
        starts.sort();
        let mut p = params(&[]);
        p.insert("start".into(), starts.join(","));
        p.insert("max_len".into(), rng.gen_range(0..=5).to_string());
        let mut num = |p: &mut QueryParams, k: &str, lo: i64, hi: i64| {
            p.insert(k.into(), rng.gen_range(lo..=hi).to_string());
        };
        match which {
            Builtin::QA => num(&mut p, "U", 0, 40),
            Builtin::QB => {
                num(&mut p, "range_dd", 0, 12);
                num(&mut p, "range_df", 0, 12);
                p.insert("domestic_label".into(), labels[0].clone());
                p.insert("foreign_label".into(), labels[1].clone());
            }
            Builtin::Q1 => {
                num(&mut p, "risk_range", 0, 70);
                num(&mut p, "min_last_risk", 0, 80);
                num(&mut p, "min_total", -10, 40);
                let (normal, fraud) = labels.split_at(labels.len() - 1);
                p.insert("normal_labels".into(), normal.join(","));
                p.insert("fraud_labels".into(), fraud.join(","));
            }
            Builtin::Q2 => {}
            Builtin::Q3 => {
                let prop = if rng.gen_bool(0.5) { "time" } else { "amount" };
                p.insert("property".into(), prop.into());
            }
            Builtin::Q4 => num(&mut p, "window", 0, 20),
        }
        if which.takes_label_set() {
            p.insert("labels".into(), label_subset(&mut rng, &labels));
        }
        queries.push((which, p));
    }
    CorpusCase {
        seed,
        graph,
        queries,
    }
}

pub fn engine_multiset(r: &EvalResult) -> Multiset {
    let mut out = Multiset::new();
    for res in &r.results {
        let trace = res.trace.clone().expect("trace mode");
        *out.entry((res.start.clone(), trace)).or_insert(0) += 1;
    }
    out
}

pub fn run_traced(g: &PropertyGraph, q: &PathQuerySpec) -> EvalResult {
    evaluate(g, q, &EvalOptions::mode(EvalMode::Trace)).unwrap()
}

pub fn oracle_builtin(
    g: &PropertyGraph,
    q: &PathQuerySpec,
    which: Builtin,
    p: &QueryParams,
) -> OracleResult {
    let phi = BuiltinPhi::new(&which.to_string(), p).unwrap();
    brute_force_evaluate(g, q, OraclePhi::Builtin(&phi), OracleOptions::default()).unwrap()
}

/// Random regex over `alphabet` with syntax-tree depth at most `depth`.
pub fn random_regex(rng: &mut impl Rng, alphabet: &[&str], depth: u32) -> RegexAst {
    let leaf = |rng: &mut dyn rand::RngCore| match rng.gen_range(0..10) {
        0 => RegexAst::Empty,
        1 => RegexAst::Never,
        _ => RegexAst::label(alphabet[rng.gen_range(0..alphabet.len())]),
    };
    if depth <= 1 || rng.gen_bool(0.2) {
        return leaf(rng);
    }
    let sub = |rng: &mut _| random_regex(rng, alphabet, depth - 1);
    match rng.gen_range(0..5) {
        0 => RegexAst::concat(sub(rng), sub(rng)),
        1 => RegexAst::alt(sub(rng), sub(rng)),
        2 => RegexAst::star(sub(rng)),
        3 => RegexAst::Plus(Box::new(sub(rng))),
        _ => RegexAst::Opt(Box::new(sub(rng))),
    }
}

/// Every word over `alphabet` of length at most `max_len`.
pub fn all_words(alphabet: &[&str], max_len: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                alphabet.iter().map(move |a| {
                    let mut w = w.clone();
                    w.push(a.to_string());
                    w
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Runs the artifact against `g` on an in-memory SQLite database and returns
/// the single integer the query produces.
pub fn run_sqlite(art: &recap_core::SqlArtifact, g: &PropertyGraph) -> rusqlite::Result<i64> {
    let conn = rusqlite::Connection::open_in_memory()?;
    let mut script = art.ddl.join(";\n");
    for s in recap_core::sql::emit_edge_inserts(g, art.dialect, 200).unwrap() {
        script.push_str(";\n");
        script.push_str(&s);
    }
    conn.execute_batch(&script)?;
    conn.query_row(&art.query, [], |r| r.get(0))
}

/// Pipes DDL, inserts and the query into `command` (program and arguments
/// separated by whitespace), which must print the last result as headerless
/// CSV.
pub fn run_external(
    command: &str,
    art: &recap_core::SqlArtifact,
    g: &PropertyGraph,
) -> Result<i64, String> {
    use std::io::Write;
    use std::process::{Command, Stdio};

    let mut script = art.script(true);
    let inserts = recap_core::sql::emit_edge_inserts(g, art.dialect, 200).map_err(|e| e.to_string())?;
    let query_at = script.len() - art.query.len() - 2;
    let mut load = String::new();
    for s in inserts {
        load.push_str(&s);
        load.push_str(";\n");
    }
    script.insert_str(query_at, &load);

    let mut parts = command.split_whitespace();
    let program = parts.next().ok_or("empty command")?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| format!("{command}: {e}"))?;
    child
        .stdin
        .take()
        .unwrap()
        .write_all(script.as_bytes())
        .map_err(|e| e.to_string())?;
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let text = String::from_utf8_lossy(&out.stdout);
    let last = text.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("");
    last.trim()
        .parse()
        .map_err(|_| format!("unexpected output {text:?}"))
}
