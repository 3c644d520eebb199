use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schema error at line {line}: expected {expected} values per frame, found {found}")]
    Schema {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("dataset contains no samples")]
    EmptyDataset,

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("degenerate walk: root has no horizontal displacement")]
    DegenerateWalk,

    #[error("degenerate geometry at frame {frame}: zero-length limb vector")]
    DegenerateGeometry { frame: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("at least two classes are required, found {0}")]
    InsufficientClasses(usize),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("shape mismatch: expected dimension {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("coincident class centroids for classes {0} and {1}")]
    CoincidentCentroids(String, String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("undefined relative score: {0}")]
    UndefinedScore(String),

    #[error("gallery is empty")]
    EmptyGallery,

    #[error("gallery file is corrupt: {0}")]
    CorruptGallery(String),

    #[error("unknown joint name `{0}`")]
    UnknownJoint(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// I/O error whose message names the file involved.
    pub fn io_at(path: &std::path::Path, e: std::io::Error) -> Self {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    }
}
