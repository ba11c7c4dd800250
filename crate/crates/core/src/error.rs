use std::path::PathBuf;

/// Errors produced by the analysis library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("edge references unknown node id `{0}`")]
    UnknownNode(String),

    #[error("graph is empty")]
    EmptyGraph,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate node id `{id}` in {path}")]
    DuplicateNode { id: String, path: PathBuf },

    #[error("adjacency matrix is not square: row {row} has {found} entries, expected {expected}")]
    NonSquareMatrix {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("invalid value `{value}` for attribute {attribute}")]
    InvalidValue { attribute: String, value: String },

    #[error("invalid feature encoding: {0}")]
    InvalidFeature(String),

    #[error("need at least {needed} complete-case nodes, found {found}")]
    TooFewNodes { needed: usize, found: usize },

    #[error("feature column `{0}` is constant")]
    ConstantColumn(String),

    #[error("response has no variation: {ties} ties among {dyads} dyads")]
    NoResponseVariation { ties: usize, dyads: usize },

    #[error("information matrix is singular")]
    SingularInformation,

    #[error("network has a single sex among sex-observed nodes")]
    SingleSex,

    #[error(
        "only {valid} of {attempts} permutations met the degree tolerance {tolerance}; \
         acceptance rate below 0.1%, try a larger tolerance"
    )]
    LowAcceptance {
        valid: usize,
        attempts: usize,
        tolerance: f64,
    },

    #[error("group `{group}` has {size} nodes, need at least 2")]
    GroupTooSmall { group: &'static str, size: usize },

    #[error("no labeled nodes in common")]
    NoCommonLabels,

    #[error("no edges among labeled nodes")]
    NoLabeledEdges,

    #[error("no within-community edges among labeled nodes")]
    NoWithinEdges,

    #[error("no between-community edges among labeled nodes")]
    NoBetweenEdges,

    #[error("no community holds at least {0} of the nodes")]
    NoCommunityRetained(f64),

    #[error("no villages found in {}", .0.display())]
    NoVillages(PathBuf),

    #[error("artifacts disagree: {0}")]
    InconsistentBundles(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
