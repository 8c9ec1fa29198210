use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The target projects to zero pixels, so a ratio is undefined.
    #[error("degenerate view: {0}")]
    DegenerateView(String),

    #[error("sun is below the horizon (elevation {elevation_deg:.3} deg)")]
    NightTime { elevation_deg: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("no valid viewpoint: {0}")]
    NoValidViewpoint(String),

    #[error("inconsistent gesture: {0}")]
    InconsistentGesture(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable identifier, used in CLI error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyInput(_) => "empty_input",
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::NotFound(_) => "not_found",
            Error::Dimension(_) => "dimension",
            Error::DegenerateView(_) => "degenerate_view",
            Error::NightTime { .. } => "night_time",
            Error::Validation(_) => "validation",
            Error::NoValidViewpoint(_) => "no_valid_viewpoint",
            Error::InconsistentGesture(_) => "inconsistent_gesture",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
