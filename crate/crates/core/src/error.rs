use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("malformed chain file at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error{}{}: {message}", txid.as_ref().map(|t| format!(" in transaction {t}")).unwrap_or_default(), field.as_ref().map(|f| format!(" (field {f})")).unwrap_or_default())]
    Schema {
        txid: Option<String>,
        field: Option<String>,
        message: String,
    },
    #[error("outpoint {txid}:{vout} does not resolve to an output")]
    Lookup { txid: String, vout: u32 },
}

impl ChainError {
    pub(crate) fn schema(
        txid: Option<String>,
        field: Option<String>,
        message: impl Into<String>,
    ) -> Self {
        Self::Schema {
            txid,
            field,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatementError {
    #[error("cannot parse statement `{0}`")]
    Syntax(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{predicate}` takes {expected} argument(s), got {got}")]
    Arity {
        predicate: String,
        expected: usize,
        got: usize,
    },
    #[error("invalid constant `{0}`")]
    Constant(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error("variable `{variable}` of scheme `{scheme}` is not bound")]
    Unbound { scheme: String, variable: String },
    #[error("scheme `{scheme}` has no variable `{variable}`")]
    UnknownVariable { scheme: String, variable: String },
    #[error("binding for `{variable}` is invalid: {source}")]
    BadBinding {
        variable: String,
        #[source]
        source: StatementError,
    },
    #[error("premise {index} `{premise}` has no supporting evidence or argument")]
    Ungrounded { index: usize, premise: String },
    #[error("support `{support}` does not establish premise {index} `{premise}`")]
    SupportMismatch {
        index: usize,
        premise: String,
        support: String,
    },
    #[error("supporting argument `{0}` would create a cycle")]
    Cycle(String),
    #[error("argument `{0}` not found")]
    ArgumentNotFound(String),
    #[error("critical question `{cq}` not found for argument `{arg}`")]
    CqNotFound { arg: String, cq: String },
    #[error("argument id `{0}` is invalid or already in use")]
    BadArgumentId(String),
    #[error("argument `{arg}` is still used by {dependents:?}")]
    HasDependents {
        arg: String,
        dependents: Vec<String>,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AfError {
    #[error("framework has {nodes} nodes; enumeration is limited to {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("apx line {line}: {message}")]
    Apx { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("case file JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported case format_version {found:?} (expected {expected})")]
    Version { found: Option<u64>, expected: u64 },
    #[error("referential integrity: {0}")]
    Integrity(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Af(#[from] AfError),
    #[error("invalid heuristic parameters: {0}")]
    Params(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
