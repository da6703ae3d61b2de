use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("token {token} is not in the vocabulary")]
    VocabularyMismatch { token: u32 },

    #[error("all points coincide; the dataset diameter is zero and distances cannot be normalized (pass a max-dis override)")]
    DegenerateDiameter,

    #[error("invalid {name} threshold {value}: {reason}")]
    InvalidThreshold {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("records must be sorted ascending by total token weight then id (violation at position {position})")]
    Unsorted { position: usize },

    #[error("records must be canonical (deduplicated, ordered by global rank); record {id} is not")]
    NotCanonical { id: u64 },

    #[error("duplicate record id {0}")]
    DuplicateId(u64),

    #[error("geographic threshold must be positive to build a spatial partition")]
    ZeroGeoThreshold,

    #[error("grid would need {cells} cells (cap {cap}); use a larger geographic threshold")]
    GridTooLarge { cells: u128, cap: u64 },

    #[error("coordinate ({col}, {row}) out of range for depth {depth}")]
    MortonOutOfRange { col: u32, row: u32, depth: u32 },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("join exceeded its deadline")]
    Timeout,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
