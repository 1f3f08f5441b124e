//! Selective aggregates: dictionary schema, expression IR, evaluation,
//! validation, composition and the builtin query catalogue.

mod builtin;
mod expr;
mod json;
mod spec;
mod validate;
mod value;

pub use builtin::{builtin_default_query, builtin_query, Builtin, QueryParams};
pub use expr::{eval_expr, Expr, ListFn, Scope};
pub use json::{expr_from_json, expr_to_json, load_spec, save_spec, spec_from_json, spec_to_json};
pub use spec::{
    collected_key, compose, default_construction, DictionarySchema, PathQuerySpec, PerTransition,
    SelectiveAggregateSpec, Transition, UpdateMap,
};
pub use validate::{validate_aggregate, validate_spec, RESERVED_COLUMNS};
pub use value::{ArithOp, CmpOp, ScalarKind, Value, ValueKind};
