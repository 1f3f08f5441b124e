use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("duplicate edge id {0:?}")]
    DuplicateEdge(String),
    #[error("edge {edge:?} sets undeclared property {key:?}")]
    UnknownProperty { edge: String, key: String },
    #[error("invalid value: {0}")]
    InvalidValue(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegexError {
    #[error("empty regular expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("type error: {0}")]
    Type(String),
    #[error("unbound reference: {0}")]
    Unbound(String),
    #[error("transition {from}->{to}: {source}")]
    AtTransition {
        from: u32,
        to: u32,
        #[source]
        source: Box<EvalError>,
    },
}

/// Problems with query definitions: unknown builtins, missing parameters,
/// malformed spec files, failed validation.
#[derive(Debug, Error)]
pub enum SpecError {
    #[error("unknown builtin query {0:?}")]
    UnknownBuiltin(String),
    #[error("missing parameter {0:?}")]
    MissingParam(String),
    #[error("bad parameter {name:?}: {reason}")]
    BadParam { name: String, reason: String },
    #[error("malformed query spec: {0}")]
    Format(String),
    #[error(transparent)]
    Regex(#[from] RegexError),
    #[error("spec failed validation:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("{node} has no rendering in the {dialect} dialect")]
    Unsupported { node: String, dialect: String },
    #[error("{node} is not allowed in {context}")]
    Context { node: String, context: String },
    #[error("cannot render literal: {0}")]
    Literal(String),
    #[error(transparent)]
    Regex(#[from] RegexError),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Regex(#[from] RegexError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
