//! Workloads shared by the criterion benches.

use recap_core::aggregate::{builtin_default_query, builtin_query, QueryParams};
use recap_core::generate::{complete_digraph, vertex_name, PropertyRange};
use recap_core::graph::{PropertyGraph, PropertyKind};
use recap_core::PathQuerySpec;

/// Complete digraph on `n` vertices labelled `t` with random `time`,
/// `amount` and `color` columns.
pub fn dense_graph(n: usize, seed: u64) -> PropertyGraph {
    complete_digraph(
        n,
        "t",
        &[
            PropertyRange::numeric("time", PropertyKind::Timestamp, 0, 10_000),
            PropertyRange::numeric("amount", PropertyKind::Int, 1, 1_000),
            PropertyRange::strings("color", &["red", "green", "blue"]),
        ],
        seed,
    )
}

fn params(name: &str, max_len: usize) -> QueryParams {
    let mut p: QueryParams = [
        ("labels", "t".to_string()),
        ("start", vertex_name(0)),
        ("max_len", max_len.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    match name {
        "QA" => {
            p.insert("U".into(), "400".into());
        }
        "Q4" => {
            p.insert("window".into(), "2000".into());
        }
        _ => {}
    }
    p
}

/// The builtin `name` over [`dense_graph`], with early filtering and in
/// default-construction form.
pub fn query_pair(g: &PropertyGraph, name: &str, max_len: usize) -> (PathQuerySpec, PathQuerySpec) {
    let p = params(name, max_len);
    (
        builtin_query(name, &p, g.schema()).expect("valid builtin"),
        builtin_default_query(name, &p, g.schema()).expect("valid builtin"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use recap_core::count_paths;

    #[test]
    fn pairs_agree() {
        let g = dense_graph(6, 1);
        for name in ["QA", "Q2", "Q3", "Q4"] {
            let (early, late) = query_pair(&g, name, 3);
            assert_eq!(count_paths(&g, &early).unwrap(), count_paths(&g, &late).unwrap(), "{name}");
        }
    }
}
