//! Immutable in-memory property graph with CSV ingestion.
//!
//! Edges are kept sorted by id, and every vertex owns the list of its
//! outgoing edge indices in that same order, which gives deterministic
//! traversal for the engine and the oracle alike.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Dense index of a vertex inside a [`PropertyGraph`].
pub type VertexIdx = u32;
/// Dense index of an edge inside a [`PropertyGraph`].
pub type EdgeIdx = u32;

/// A property value attached to an edge or vertex.
#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    Int(i64),
    Float(f64),
    Str(String),
    /// Epoch seconds.
    Timestamp(i64),
    List(Vec<PropertyValue>),
}

impl PropertyValue {
    /// Builds a list value, rejecting mixed element kinds.
    pub fn list(items: Vec<PropertyValue>) -> Result<Self, GraphError> {
        if let Some(first) = items.first() {
            let kind = std::mem::discriminant(first);
            if items.iter().any(|v| std::mem::discriminant(v) != kind) {
                return Err(GraphError::InvalidValue(
                    "list elements must share one kind".into(),
                ));
            }
        }
        Ok(PropertyValue::List(items))
    }

    pub fn timestamp(secs: i64) -> Result<Self, GraphError> {
        if secs < 0 {
            return Err(GraphError::InvalidValue(format!(
                "negative timestamp {secs}"
            )));
        }
        Ok(PropertyValue::Timestamp(secs))
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Int(v) | PropertyValue::Timestamp(v) => write!(f, "{v}"),
            PropertyValue::Float(v) => write!(f, "{v}"),
            PropertyValue::Str(s) => f.write_str(s),
            PropertyValue::List(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Declared type of a CSV property column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    Int,
    Float,
    String,
    Timestamp,
}

impl std::str::FromStr for PropertyKind {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "int" => Ok(PropertyKind::Int),
            "float" => Ok(PropertyKind::Float),
            "string" => Ok(PropertyKind::String),
            "timestamp" => Ok(PropertyKind::Timestamp),
            other => Err(GraphError::Schema(format!(
                "unknown property kind {other:?} (expected int, float, string or timestamp)"
            ))),
        }
    }
}

impl PropertyKind {
    fn parse_cell(self, cell: &str) -> Result<PropertyValue, String> {
        let cell = cell.trim();
        match self {
            PropertyKind::Int => cell
                .parse::<i64>()
                .map(PropertyValue::Int)
                .map_err(|e| format!("expected int, got {cell:?}: {e}")),
            PropertyKind::Float => cell
                .parse::<f64>()
                .map(PropertyValue::Float)
                .map_err(|e| format!("expected float, got {cell:?}: {e}")),
            PropertyKind::String => Ok(PropertyValue::Str(cell.to_string())),
            PropertyKind::Timestamp => {
                let secs = cell
                    .parse::<i64>()
                    .map_err(|e| format!("expected timestamp, got {cell:?}: {e}"))?;
                PropertyValue::timestamp(secs).map_err(|e| e.to_string())
            }
        }
    }
}

/// Column declarations for the edge CSV, loaded from a JSON sidecar of the
/// form `{ "properties": { "<col>": "<int|float|string|timestamp>" } }`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphSchema {
    #[serde(default)]
    pub properties: IndexMap<String, PropertyKind>,
}

impl GraphSchema {
    pub fn new<I, K>(props: I) -> Self
    where
        I: IntoIterator<Item = (K, PropertyKind)>,
        K: Into<String>,
    {
        GraphSchema {
            properties: props.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| GraphError::Schema(e.to_string()))
    }

    pub fn kind(&self, key: &str) -> Option<PropertyKind> {
        self.properties.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    /// Empty when the vertex was synthesized from edge endpoints.
    pub label: String,
    pub properties: BTreeMap<String, PropertyValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub src: String,
    pub dst: String,
    pub label: String,
    columns: Arc<[String]>,
    values: Vec<Option<PropertyValue>>,
}

impl Edge {
    /// Looks up a property; `None` when the edge does not define it.
    pub fn get_property(&self, key: &str) -> Option<&PropertyValue> {
        let slot = self.columns.iter().position(|c| c == key)?;
        self.values[slot].as_ref()
    }

    /// Property by column slot, as laid out by the graph schema.
    pub fn property_at(&self, slot: usize) -> Option<&PropertyValue> {
        self.values.get(slot).and_then(Option::as_ref)
    }

    pub fn properties(&self) -> impl Iterator<Item = (&str, &PropertyValue)> {
        self.columns
            .iter()
            .zip(&self.values)
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.as_str(), v)))
    }
}

/// Input row for building a graph programmatically.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub id: String,
    pub src: String,
    pub dst: String,
    pub label: String,
    pub properties: BTreeMap<String, PropertyValue>,
}

impl EdgeRecord {
    pub fn new(id: &str, src: &str, dst: &str, label: &str) -> Self {
        EdgeRecord {
            id: id.into(),
            src: src.into(),
            dst: dst.into(),
            label: label.into(),
            properties: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: PropertyValue) -> Self {
        self.properties.insert(key.into(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyGraph {
    schema: GraphSchema,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    vertex_lookup: HashMap<String, VertexIdx>,
    edge_src: Vec<VertexIdx>,
    edge_dst: Vec<VertexIdx>,
    out_index: Vec<Vec<EdgeIdx>>,
}

impl PropertyGraph {
    /// Builds a graph from edge rows. Vertices are synthesized from the
    /// union of endpoint ids.
    pub fn from_edges(
        schema: GraphSchema,
        mut records: Vec<EdgeRecord>,
    ) -> Result<Self, GraphError> {
        let columns: Arc<[String]> = schema.properties.keys().cloned().collect();
        records.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = records.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(GraphError::DuplicateEdge(w[0].id.clone()));
        }

        let ids: BTreeSet<&str> = records
            .iter()
            .flat_map(|r| [r.src.as_str(), r.dst.as_str()])
            .collect();
        let vertices: Vec<Vertex> = ids
            .into_iter()
            .map(|id| Vertex {
                id: id.to_string(),
                label: String::new(),
                properties: BTreeMap::new(),
            })
            .collect();
        let vertex_lookup: HashMap<String, VertexIdx> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.clone(), i as VertexIdx))
            .collect();

        let mut edges = Vec::with_capacity(records.len());
        let mut edge_src = Vec::with_capacity(records.len());
        let mut edge_dst = Vec::with_capacity(records.len());
        let mut out_index = vec![Vec::new(); vertices.len()];
        for (idx, rec) in records.into_iter().enumerate() {
            let mut values = vec![None; columns.len()];
            for (key, value) in rec.properties {
                let slot = columns
                    .iter()
                    .position(|c| *c == key)
                    .ok_or_else(|| GraphError::UnknownProperty {
                        edge: rec.id.clone(),
                        key: key.clone(),
                    })?;
                values[slot] = Some(value);
            }
            let s = vertex_lookup[&rec.src];
            let d = vertex_lookup[&rec.dst];
            out_index[s as usize].push(idx as EdgeIdx);
            edge_src.push(s);
            edge_dst.push(d);
            edges.push(Edge {
                id: rec.id,
                src: rec.src,
                dst: rec.dst,
                label: rec.label,
                columns: columns.clone(),
                values,
            });
        }

        Ok(PropertyGraph {
            schema,
            vertices,
            edges,
            vertex_lookup,
            edge_src,
            edge_dst,
            out_index,
        })
    }

    pub fn schema(&self) -> &GraphSchema {
        &self.schema
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Edges in id order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<VertexIdx> {
        self.vertex_lookup.get(id).copied()
    }

    pub fn vertex(&self, idx: VertexIdx) -> &Vertex {
        &self.vertices[idx as usize]
    }

    pub fn edge(&self, idx: EdgeIdx) -> &Edge {
        &self.edges[idx as usize]
    }

    pub fn edge_by_id(&self, id: &str) -> Option<&Edge> {
        self.edges
            .binary_search_by(|e| e.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.edges[i])
    }

    pub fn edge_target(&self, idx: EdgeIdx) -> VertexIdx {
        self.edge_dst[idx as usize]
    }

    pub fn edge_source(&self, idx: EdgeIdx) -> VertexIdx {
        self.edge_src[idx as usize]
    }

    /// Outgoing edge indices of a vertex, ordered by edge id.
    pub fn out_edge_indices(&self, v: VertexIdx) -> &[EdgeIdx] {
        &self.out_index[v as usize]
    }

    /// All edges leaving `v`, in edge-id order. Unknown ids have none.
    pub fn out_edges(&self, v: &str) -> Vec<&Edge> {
        match self.vertex_index(v) {
            Some(idx) => self
                .out_edge_indices(idx)
                .iter()
                .map(|&e| self.edge(e))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Distinct edge labels, sorted.
    pub fn labels(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.edges.iter().map(|e| e.label.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// Column slot of a property key in every edge's value vector.
    pub fn property_slot(&self, key: &str) -> Option<usize> {
        self.schema.properties.get_index_of(key)
    }
}

const FIXED_COLUMNS: [&str; 4] = ["id", "src", "dst", "label"];

/// Loads an edge CSV whose header is `id,src,dst,label,<props...>`.
pub fn load_graph(
    edge_csv_path: impl AsRef<Path>,
    schema: &GraphSchema,
) -> Result<PropertyGraph, GraphError> {
    let path = edge_csv_path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| GraphError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_graph(file, schema)
}

/// Same as [`load_graph`] but from any reader.
pub fn read_graph<R: std::io::Read>(
    reader: R,
    schema: &GraphSchema,
) -> Result<PropertyGraph, GraphError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| GraphError::Schema(format!("unreadable header: {e}")))?
        .clone();
    let header: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();

    if header.len() < FIXED_COLUMNS.len()
        || header[..FIXED_COLUMNS.len()]
            .iter()
            .zip(FIXED_COLUMNS)
            .any(|(h, f)| h != f)
    {
        return Err(GraphError::Schema(format!(
            "header must start with id,src,dst,label; got {}",
            header.join(",")
        )));
    }
    let prop_cols = &header[FIXED_COLUMNS.len()..];
    let mut kinds = Vec::with_capacity(prop_cols.len());
    for col in prop_cols {
        let kind = schema.kind(col).ok_or_else(|| {
            GraphError::Schema(format!("column {col:?} is not declared in the schema"))
        })?;
        kinds.push(kind);
    }
    if let Some(missing) = schema
        .properties
        .keys()
        .find(|k| !prop_cols.iter().any(|c| c == *k))
    {
        return Err(GraphError::Schema(format!(
            "declared column {missing:?} is missing from the header"
        )));
    }

    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| GraphError::Malformed {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != header.len() {
            return Err(GraphError::Malformed {
                line,
                reason: format!("expected {} fields, found {}", header.len(), row.len()),
            });
        }
        for (i, name) in FIXED_COLUMNS.iter().enumerate() {
            if row[i].trim().is_empty() {
                return Err(GraphError::Malformed {
                    line,
                    reason: format!("missing {name}"),
                });
            }
        }
        let mut rec = EdgeRecord::new(row[0].trim(), row[1].trim(), row[2].trim(), row[3].trim());
        for ((col, kind), cell) in prop_cols.iter().zip(&kinds).zip(row.iter().skip(4)) {
            if cell.trim().is_empty() {
                continue;
            }
            let value = kind
                .parse_cell(cell)
                .map_err(|reason| GraphError::Malformed {
                    line,
                    reason: format!("column {col}: {reason}"),
                })?;
            rec.properties.insert(col.clone(), value);
        }
        if !seen.insert(rec.id.clone()) {
            return Err(GraphError::DuplicateEdge(rec.id));
        }
        records.push(rec);
    }
    PropertyGraph::from_edges(schema.clone(), records)
}

/// Writes the graph back out in the CSV layout [`read_graph`] accepts.
pub fn write_graph_csv<W: std::io::Write>(g: &PropertyGraph, out: W) -> Result<(), GraphError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = FIXED_COLUMNS.to_vec();
    header.extend(g.schema().properties.keys().map(String::as_str));
    let io_err = |e: csv::Error| GraphError::Schema(e.to_string());
    w.write_record(&header).map_err(io_err)?;
    for e in g.edges() {
        let mut row = vec![e.id.clone(), e.src.clone(), e.dst.clone(), e.label.clone()];
        for slot in 0..g.schema().properties.len() {
            row.push(e.property_at(slot).map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| GraphError::Schema(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> GraphSchema {
        GraphSchema::new([("amount", PropertyKind::Int), ("time", PropertyKind::Int)])
    }

    #[test]
    fn header_only_gives_empty_graph() {
        let g = read_graph("id,src,dst,label,amount,time\n".as_bytes(), &schema()).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.vertex_count(), 0);
    }

    #[test]
    fn missing_src_names_the_line() {
        let csv = "id,src,dst,label,amount,time\ne1,v1,v2,A,1,2\ne2,,v2,A,1,2\n";
        let err = read_graph(csv.as_bytes(), &schema()).unwrap_err();
        match err {
            GraphError::Malformed { line, reason } => {
                assert_eq!(line, 3);
                assert!(reason.contains("src"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_arity_and_bad_values_are_rejected() {
        let csv = "id,src,dst,label,amount,time\ne1,v1,v2,A,1\n";
        assert!(matches!(
            read_graph(csv.as_bytes(), &schema()),
            Err(GraphError::Malformed { line: 2, .. })
        ));
        let csv = "id,src,dst,label,amount,time\ne1,v1,v2,A,lots,2\n";
        assert!(matches!(
            read_graph(csv.as_bytes(), &schema()),
            Err(GraphError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn duplicate_edge_id_is_rejected() {
        let csv = "id,src,dst,label,amount,time\ne1,v1,v2,A,1,2\ne1,v2,v1,A,1,2\n";
        assert!(matches!(
            read_graph(csv.as_bytes(), &schema()),
            Err(GraphError::DuplicateEdge(id)) if id == "e1"
        ));
    }

    #[test]
    fn header_must_match_schema() {
        let csv = "id,src,dst,label,amount\n";
        assert!(matches!(
            read_graph(csv.as_bytes(), &schema()),
            Err(GraphError::Schema(_))
        ));
        let csv = "id,src,dst,label,amount,time,color\n";
        assert!(matches!(
            read_graph(csv.as_bytes(), &schema()),
            Err(GraphError::Schema(_))
        ));
    }

    #[test]
    fn empty_cell_means_absent() {
        let csv = "id,src,dst,label,amount,time\ne1,v1,v2,A,,7\n";
        let g = read_graph(csv.as_bytes(), &schema()).unwrap();
        let e = g.edge_by_id("e1").unwrap();
        assert_eq!(e.get_property("amount"), None);
        assert_eq!(e.get_property("time"), Some(&PropertyValue::Int(7)));
    }

    #[test]
    fn negative_timestamp_rejected() {
        let s = GraphSchema::new([("t", PropertyKind::Timestamp)]);
        let csv = "id,src,dst,label,t\ne1,v1,v2,A,-5\n";
        assert!(read_graph(csv.as_bytes(), &s).is_err());
    }

    #[test]
    fn heterogeneous_list_rejected() {
        assert!(PropertyValue::list(vec![PropertyValue::Int(1), PropertyValue::Str("x".into())]).is_err());
        assert!(PropertyValue::list(vec![PropertyValue::Int(1), PropertyValue::Int(2)]).is_ok());
    }

    #[test]
    fn csv_write_reads_back_equal() {
        let csv = "id,src,dst,label,amount,time\ne2,v3,v2,A,5,\ne1,v1,v3,B,,4\n";
        let g = read_graph(csv.as_bytes(), &schema()).unwrap();
        let mut buf = Vec::new();
        write_graph_csv(&g, &mut buf).unwrap();
        let again = read_graph(buf.as_slice(), &schema()).unwrap();
        assert_eq!(g, again);
    }
}
