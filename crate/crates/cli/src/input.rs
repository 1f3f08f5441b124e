//! Graph and query loading shared by the subcommands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use recap_core::aggregate::{builtin_default_query, builtin_query, load_spec, QueryParams};
use recap_core::graph::{read_graph, GraphSchema, PropertyGraph, PropertyKind};
use recap_core::PathQuerySpec;

const EXAMPLE_EDGES: &str = include_str!("../../core/tests/fixtures/bank_edges.csv");
const EXAMPLE_SCHEMA: &str = include_str!("../../core/tests/fixtures/bank_schema.json");

/// Name accepted by `--graph` for the bundled six-edge banking example.
pub const EXAMPLE_GRAPH: &str = "bank";

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge CSV (`id,src,dst,label,<props...>`), or `bank` for the bundled example.
    #[arg(long)]
    pub graph: String,
    /// JSON schema sidecar. Defaults to `<stem>_schema.json` next to an
    /// `<stem>_edges.csv` file, else column kinds are inferred.
    #[arg(long)]
    pub graph_schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Query spec in JSON.
    #[arg(long, conflicts_with = "builtin")]
    pub query: Option<PathBuf>,
    /// Builtin query: QA, QB, Q1, Q2, Q3 or Q4.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Builtin parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, String)>,
    /// Start vertices, comma separated; overrides the query's.
    #[arg(long, value_delimiter = ',')]
    pub start: Vec<String>,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn sibling_schema(path: &Path) -> Option<PathBuf> {
    let name = path.file_name()?.to_str()?;
    let stem = name.strip_suffix("_edges.csv")?;
    let candidate = path.with_file_name(format!("{stem}_schema.json"));
    candidate.exists().then_some(candidate)
}

/// Kind of each property column: int if every present cell parses as an
/// integer, float if as a number, string otherwise.
pub fn infer_schema(csv_text: &str) -> Result<GraphSchema> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(csv_text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let props = header.get(4..).unwrap_or_default().to_vec();
    let mut kinds = vec![PropertyKind::Int; props.len()];
    for rec in rdr.records() {
        let rec = rec?;
        for (i, kind) in kinds.iter_mut().enumerate() {
            let cell = rec.get(i + 4).unwrap_or("").trim();
            if cell.is_empty() {
                continue;
            }
            if *kind == PropertyKind::Int && cell.parse::<i64>().is_err() {
                *kind = PropertyKind::Float;
            }
            if *kind == PropertyKind::Float && cell.parse::<f64>().is_err() {
                *kind = PropertyKind::String;
            }
        }
    }
    Ok(GraphSchema::new(props.into_iter().zip(kinds)))
}

impl GraphArgs {
    pub fn load(&self) -> Result<PropertyGraph> {
        let path = Path::new(&self.graph);
        let (text, default_schema) = if self.graph == EXAMPLE_GRAPH && !path.exists() {
            (EXAMPLE_EDGES.to_string(), Some(example_schema()))
        } else {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read graph {}", path.display()))?;
            (text, None)
        };
        let schema = match (&self.graph_schema, default_schema) {
            (Some(p), _) => GraphSchema::from_json_file(p)?,
            (None, Some(s)) => s,
            (None, None) => match sibling_schema(path) {
                Some(p) => GraphSchema::from_json_file(p)?,
                None => infer_schema(&text)?,
            },
        };
        read_graph(text.as_bytes(), &schema).with_context(|| format!("loading {}", self.graph))
    }
}

pub fn example_schema() -> GraphSchema {
    serde_json::from_str(EXAMPLE_SCHEMA).expect("bundled schema is valid")
}

impl QueryArgs {
    fn params(&self) -> QueryParams {
        self.params.iter().cloned().collect()
    }

    /// Builds the query, in default-construction form when `default_form`.
    pub fn load(
        &self,
        schema: &GraphSchema,
        max_len: Option<usize>,
        default_form: bool,
    ) -> Result<PathQuerySpec> {
        let mut q = match (&self.query, &self.builtin) {
            (Some(path), _) => {
                if default_form {
                    bail!("--default-construction needs --builtin");
                }
                load_spec(path)?
            }
            (None, Some(name)) => {
                let mut p = self.params();
                if let Some(l) = max_len {
                    p.insert("max_len".into(), l.to_string());
                }
                if !self.start.is_empty() {
                    p.insert("start".into(), self.start.join(","));
                }
                if default_form {
                    builtin_default_query(name, &p, schema)?
                } else {
                    builtin_query(name, &p, schema)?
                }
            }
            (None, None) => bail!("give either --query FILE or --builtin NAME"),
        };
        if !self.start.is_empty() {
            q.start_vertices = self.start.clone();
        }
        if let Some(l) = max_len {
            q.max_length = l;
        }
        Ok(q)
    }

    pub fn builtin_params(&self) -> Option<(&str, QueryParams)> {
        let mut p = self.params();
        if !self.start.is_empty() {
            p.insert("start".into(), self.start.join(","));
        }
        self.builtin.as_deref().map(|b| (b, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infers_kinds_from_cells() {
        let s = infer_schema("id,src,dst,label,a,b,c\ne1,x,y,l,1,2.5,red\ne2,y,x,l,,3,7\n").unwrap();
        assert_eq!(s.kind("a"), Some(PropertyKind::Int));
        assert_eq!(s.kind("b"), Some(PropertyKind::Float));
        assert_eq!(s.kind("c"), Some(PropertyKind::String));
    }

    #[test]
    fn params_need_equals() {
        assert_eq!(parse_param("U = 3").unwrap(), ("U".into(), "3".into()));
        assert!(parse_param("U").is_err());
    }

    #[test]
    fn bundled_example_loads() {
        let g = GraphArgs {
            graph: EXAMPLE_GRAPH.into(),
            graph_schema: None,
        }
        .load()
        .unwrap();
        assert_eq!(g.edge_count(), 6);
    }
}
