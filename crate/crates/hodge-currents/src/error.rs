use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("chart error: coordinate {chart} vanishes at the point")]
    Chart { chart: usize },
    #[error("singular kernel: {factor} vanishes at the evaluation point")]
    SingularKernel { factor: String },
    #[error("tube parametrization failed: {0}")]
    Tube(String),
    #[error(
        "current is not dbar-closed: tangential residual {residual:.3e} exceeds {tolerance:.3e}"
    )]
    NotClosed { residual: f64, tolerance: f64 },
    #[error("evaluation point lies in the cutoff set |g| <= {eta:.3e}")]
    Cutoff { eta: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error("cache error: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
