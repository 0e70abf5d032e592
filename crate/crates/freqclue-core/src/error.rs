use std::path::PathBuf;

/// Errors raised by the feature pipeline and its surrounding plumbing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A plane, tensor or feature vector contained NaN or infinity.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// Dimensions disagree with what an operation requires.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: String,
        expected: String,
        got: String,
    },

    /// A block grid does not evenly tile the plane it is applied to.
    #[error(
        "grid {grid_rows}x{grid_cols} does not partition plane {height}x{width}: \
         height divisible: {}, width divisible: {}",
        height % grid_rows == 0,
        width % grid_cols == 0
    )]
    Partition {
        height: usize,
        width: usize,
        grid_rows: usize,
        grid_cols: usize,
    },

    /// Spectrum too short for three frequency bands.
    #[error("spectrum height {height} is too small for low/mid/high bands (need >= 3)")]
    DegenerateBands { height: usize },

    /// Invalid configuration value or spec string.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A crop box reaches outside the frame.
    #[error("crop box ({x},{y}) {w}x{h} exceeds frame bounds {width}x{height}")]
    Geometry {
        x: u32,
        y: u32,
        w: u32,
        h: u32,
        width: u32,
        height: u32,
    },

    /// A video with no frames cannot be sampled.
    #[error("video '{id}' has no frames")]
    EmptyVideo { id: String },

    /// A serialized artifact (manifest, tensor file, feature file, head) failed to parse.
    #[error("malformed {kind}: {detail}")]
    Format { kind: String, detail: String },

    /// Filesystem failure, with the offending path.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Image decode/encode failure, with the offending path.
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    /// A training set without both classes cannot fit a binary head.
    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    /// Metric is undefined on the given inputs (e.g. single-class AUC).
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    /// Two artifacts were produced under different effective configurations.
    #[error("config fingerprint mismatch: {left} vs {right} (pass --force to override)")]
    FingerprintMismatch { left: String, right: String },

    /// Scoring requires a trained head.
    #[error("classifier head is not trained")]
    UntrainedHead,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(kind: &str, detail: impl Into<String>) -> Self {
        Error::Format {
            kind: kind.to_string(),
            detail: detail.into(),
        }
    }

    pub fn shape(context: &str, expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::Shape {
            context: context.to_string(),
            expected: expected.into(),
            got: got.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
