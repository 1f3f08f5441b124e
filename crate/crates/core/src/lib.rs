//! Regular path queries over property graphs with selective aggregates that
//! prune partial paths early. Queries run on a native product-construction
//! engine or compile to recursive-CTE SQL.

pub mod aggregate;
pub mod engine;
pub mod error;
pub mod generate;
pub mod graph;
pub mod oracle;
pub mod regex;
pub mod sql;

pub use aggregate::{
    builtin_default_query, builtin_query, default_construction, validate_spec, Builtin, Expr,
    PathQuerySpec, QueryParams, SelectiveAggregateSpec, Value,
};
pub use engine::{
    count_paths, evaluate, evaluate_default, EvalMode, EvalOptions, EvalResult, IncludeEmpty,
    PathResult,
};
pub use error::{CompileError, Error, EvalError, GraphError, RegexError, SpecError};
pub use graph::{load_graph, GraphSchema, PropertyGraph, PropertyKind, PropertyValue};
pub use regex::{compile_regex, TransitionTable};
pub use sql::{emit_optimized_sql, emit_standard_sql, CompileOptions, Dialect, SqlArtifact, SqlForm};
