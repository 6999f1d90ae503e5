use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular integrand: {0}")]
    Singularity(String),

    /// A factorization failed or produced an unusable inverse.
    #[error("conditioning failure in {block}: {detail}")]
    Conditioning { block: String, detail: String },

    #[error("resource guard: {0}")]
    Resources(String),

    #[error("scene validation failed at `{path}`: {message}")]
    Scene { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn scene(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Scene {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Scene { .. } | Error::Domain(_) => 2,
            Error::Singularity(_) | Error::Conditioning { .. } => 3,
            Error::Resources(_) => 4,
            Error::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
