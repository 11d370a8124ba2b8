use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension {dim} exceeds the dense cap of {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("matrix is not Hermitian at ({row}, {col})")]
    NotHermitian { row: usize, col: usize },

    #[error("no sites within radius {radius} of {center:?}")]
    EmptyTruncation { center: Vec<f64>, radius: f64 },

    #[error("site index {index} out of range for {len} sites")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("energy window `{0}` has no Fourier data")]
    NoFourierData(String),

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error("reference energy {energy} lies within 1e-12 of eigenvalue {eigenvalue}")]
    OnEigenvalue { energy: f64, eigenvalue: f64 },

    #[error("windowed operator has eigenvalue {0} below -1e-10")]
    NegativeEigenvalue(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no bulk gap around {0}")]
    NoGap(f64),

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("cell (x = {x}, E = {energy}): {source}")]
    Cell {
        x: f64,
        energy: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
