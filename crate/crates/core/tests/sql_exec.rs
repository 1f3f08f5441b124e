mod common;

use common::*;
use recap_core::aggregate::builtin_query;
use recap_core::engine::{count_paths, IncludeEmpty};
use recap_core::sql::{emit_optimized_sql, CompileOptions, Dialect};
use recap_core::PathQuerySpec;

fn count_opts(dialect: Dialect) -> CompileOptions {
    CompileOptions {
        dialect,
        count_only: true,
        include_empty: IncludeEmpty::Auto,
    }
}

fn check_sqlite(g: &recap_core::PropertyGraph, q: &PathQuerySpec, what: &str) {
    let art = emit_optimized_sql(q, g.schema(), &count_opts(Dialect::Generic)).unwrap();
    let got = run_sqlite(&art, g).unwrap_or_else(|e| panic!("{what}: {e}\n{}", art.query));
    assert_eq!(got as u64, count_paths(g, q).unwrap(), "{what}\n{}", art.query);
}

#[test]
fn fixture_builtins_on_sqlite() {
    let g = bank();
    for len in 0..=4 {
        let l = len.to_string();
        let qa = params(&[("U", "3000"), ("labels", "Domestic,Foreign"), ("start", "v1,v3"), ("max_len", &l)]);
        let qb = params(&[("range_dd", "2"), ("range_df", "3"), ("start", "v3"), ("max_len", &l)]);
        check_sqlite(&g, &builtin_query("QA", &qa, g.schema()).unwrap(), "QA");
        check_sqlite(&g, &builtin_query("QB", &qb, g.schema()).unwrap(), "QB");
    }
}

#[test]
fn random_graphs_on_sqlite() {
    for seed in 0..10 {
        let case = corpus_case(seed, 15);
        for (which, p) in &case.queries {
            let mut p = p.clone();
            let len: usize = p["max_len"].parse().unwrap();
            p.insert("max_len".into(), len.min(4).to_string());
            let q = case.spec(*which, &p);
            check_sqlite(&case.graph, &q, &format!("seed {seed} {which}"));
            if let Some(d) = case.default_spec(*which, &p) {
                check_sqlite(&case.graph, &d, &format!("seed {seed} {which} default"));
            }
        }
    }
}

#[test]
fn materialized_rows_match_result_count() {
    let g = bank();
    let p = params(&[("range_dd", "2"), ("range_df", "3"), ("start", "v3"), ("max_len", "5")]);
    let q = builtin_query("QB", &p, g.schema()).unwrap();
    let art = emit_optimized_sql(&q, g.schema(), &CompileOptions::default()).unwrap();
    let conn = rusqlite::Connection::open_in_memory().unwrap();
    conn.execute_batch(&art.ddl.join(";\n")).unwrap();
    for s in recap_core::sql::emit_edge_inserts(&g, Dialect::Generic, 2).unwrap() {
        conn.execute_batch(&s).unwrap();
    }
    let mut stmt = conn.prepare(&art.query).unwrap();
    let rows: Vec<(String, String)> = stmt
        .query_map([], |r| Ok((r.get(0)?, r.get(1)?)))
        .unwrap()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(rows, vec![("v4".to_string(), "[\"e2\",\"e5\"]".to_string())]);
}

#[test]
fn include_empty_never_drops_the_anchor() {
    let g = bank();
    let q = PathQuerySpec {
        name: None,
        start_vertices: vec!["v3".into()],
        regex: "Domestic*".into(),
        aggregate: recap_core::SelectiveAggregateSpec::always_true(),
        max_length: 0,
    };
    let mut opts = count_opts(Dialect::Generic);
    assert_eq!(run_sqlite(&emit_optimized_sql(&q, g.schema(), &opts).unwrap(), &g).unwrap(), 1);
    opts.include_empty = IncludeEmpty::Never;
    assert_eq!(run_sqlite(&emit_optimized_sql(&q, g.schema(), &opts).unwrap(), &g).unwrap(), 0);
}

/// Runs only when `RECAP_SQL_TEST_DB` names a SQL command; see the README.
#[test]
fn external_engine_when_configured() {
    let Ok(cmd) = std::env::var("RECAP_SQL_TEST_DB") else {
        return;
    };
    let g = bank();
    let p = params(&[("range_dd", "2"), ("range_df", "3"), ("start", "v3"), ("max_len", "4")]);
    let q = builtin_query("QB", &p, g.schema()).unwrap();
    let art = emit_optimized_sql(&q, g.schema(), &count_opts(Dialect::DuckDb)).unwrap();
    assert_eq!(run_external(&cmd, &art, &g).unwrap() as u64, count_paths(&g, &q).unwrap());
}
