//! Seeded random property graphs for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{EdgeRecord, GraphSchema, PropertyGraph, PropertyKind, PropertyValue};

/// Value range of one generated property column. String columns draw from
/// `choices`; numeric columns draw uniformly from `min..=max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyRange {
    pub name: String,
    pub kind: PropertyKind,
    pub min: i64,
    pub max: i64,
    pub choices: Vec<String>,
}

impl PropertyRange {
    pub fn numeric(name: &str, kind: PropertyKind, min: i64, max: i64) -> Self {
        PropertyRange {
            name: name.into(),
            kind,
            min,
            max,
            choices: Vec::new(),
        }
    }

    pub fn strings(name: &str, choices: &[&str]) -> Self {
        PropertyRange {
            name: name.into(),
            kind: PropertyKind::String,
            min: 0,
            max: 0,
            choices: choices.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> PropertyValue {
        match self.kind {
            PropertyKind::Int => PropertyValue::Int(rng.gen_range(self.min..=self.max)),
            PropertyKind::Timestamp => {
                PropertyValue::Timestamp(rng.gen_range(self.min.max(0)..=self.max.max(0)))
            }
            // quarter steps keep sums exact
            PropertyKind::Float => {
                PropertyValue::Float(rng.gen_range(self.min * 4..=self.max * 4) as f64 / 4.0)
            }
            PropertyKind::String => PropertyValue::Str(
                self.choices
                    .choose(rng)
                    .cloned()
                    .unwrap_or_default(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomGraphSpec {
    pub vertices: usize,
    pub edges: usize,
    pub labels: Vec<String>,
    pub properties: Vec<PropertyRange>,
    /// Probability that a property cell is left empty.
    pub missing: f64,
}

impl RandomGraphSpec {
    pub fn schema(&self) -> GraphSchema {
        GraphSchema::new(self.properties.iter().map(|p| (p.name.clone(), p.kind)))
    }
}

pub fn vertex_name(i: usize) -> String {
    format!("v{i:02}")
}

fn edge_name(i: usize) -> String {
    format!("e{i:03}")
}

fn sample_props(
    mut rec: EdgeRecord,
    props: &[PropertyRange],
    missing: f64,
    rng: &mut impl Rng,
) -> EdgeRecord {
    for p in props {
        let v = p.sample(rng);
        if missing <= 0.0 || !rng.gen_bool(missing.min(1.0)) {
            rec = rec.with(&p.name, v);
        }
    }
    rec
}

/// Uniform random multigraph; self-loops and parallel edges allowed.
/// Vertices without edges do not appear in the result.
pub fn random_graph(spec: &RandomGraphSpec, seed: u64) -> PropertyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.vertices.max(1);
    let records = (0..spec.edges)
        .map(|i| {
            let src = vertex_name(rng.gen_range(0..n));
            let dst = vertex_name(rng.gen_range(0..n));
            let label = spec.labels.choose(&mut rng).cloned().unwrap_or_default();
            let rec = EdgeRecord::new(&edge_name(i), &src, &dst, &label);
            sample_props(rec, &spec.properties, spec.missing, &mut rng)
        })
        .collect();
    PropertyGraph::from_edges(spec.schema(), records).expect("generated ids are unique")
}

/// Complete digraph without self-loops on `n` vertices, every edge labelled
/// `label`, with random property values.
pub fn complete_digraph(n: usize, label: &str, properties: &[PropertyRange], seed: u64) -> PropertyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for s in 0..n {
        for d in (0..n).filter(|d| *d != s) {
            let rec = EdgeRecord::new(&edge_name(records.len()), &vertex_name(s), &vertex_name(d), label);
            records.push(sample_props(rec, properties, 0.0, &mut rng));
        }
    }
    let schema = GraphSchema::new(properties.iter().map(|p| (p.name.clone(), p.kind)));
    PropertyGraph::from_edges(schema, records).expect("generated ids are unique")
}
