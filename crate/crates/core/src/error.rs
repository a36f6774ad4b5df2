use std::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Each variant maps to a stable short code (see [`Error::code`]) that the
/// command-line front end prints as a prefix, so scripts can match on it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("mismatched group orders: D{left} vs D{right}")]
    OrderMismatch { left: u32, right: u32 },

    #[error("invalid group order {0}: n must be at least 1")]
    InvalidOrder(i64),

    #[error("matrix representation only available for D4, got D{0}")]
    UnsupportedOrder(u32),

    #[error("unknown group element name {0:?}")]
    UnknownElement(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema violation for point {id}: {message}")]
    Schema { id: usize, message: String },

    #[error("point id {0} out of range 0..24")]
    PointIdOutOfRange(usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate face: {0}")]
    DegenerateFace(String),

    #[error("need at least {needed} complete left/right pairs, found {found}")]
    InsufficientPairs { needed: usize, found: usize },

    #[error("need at least 2 frames, found {0}")]
    InsufficientFrames(usize),

    #[error("unrecoverable occluded points: {}", IdList(.0))]
    Unrecoverable(Vec<usize>),

    #[error("invalid sequence: {0}")]
    Sequence(String),

    #[error("malformed image: {0}")]
    Image(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rectangle {x0},{y0},{x1},{y1} outside {width}x{height} image")]
    RectOutOfBounds {
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
        width: usize,
        height: usize,
    },

    #[error("edge map has no nonzero pixels")]
    EmptyEdgeMap,

    #[error("image is {width}x{height}, orbit requires a square image (use pad_to_square)")]
    NotSquare { width: usize, height: usize },

    #[error("invalid kernel: {0}")]
    Kernel(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Stable machine-readable category code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::OrderMismatch { .. } | Error::InvalidOrder(_) | Error::UnknownElement(_) => {
                "E-GROUP"
            }
            Error::UnsupportedOrder(_) => "E-GROUP-ORDER",
            Error::Parse { .. } => "E-PARSE",
            Error::Schema { .. } | Error::PointIdOutOfRange(_) => "E-SCHEMA",
            Error::InsufficientData(_) => "E-DATA",
            Error::DegenerateFace(_) => "E-DEGENERATE",
            Error::InsufficientPairs { .. } => "E-PAIRS",
            Error::InsufficientFrames(_) | Error::Sequence(_) => "E-SEQUENCE",
            Error::Unrecoverable(_) => "E-OCCLUDED",
            Error::Image(_) => "E-IMAGE",
            Error::InvalidParameter(_) => "E-PARAM",
            Error::RectOutOfBounds { .. } | Error::EmptyEdgeMap => "E-RECT",
            Error::NotSquare { .. } => "E-SHAPE",
            Error::Kernel(_) => "E-KERNEL",
            Error::Io { .. } => "E-IO",
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

struct IdList<'a>(&'a [usize]);

impl fmt::Display for IdList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        Ok(())
    }
}
