use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("chart {chart} is undefined at this point (|Z_{chart}| ≈ 0)")]
    ChartUndefined { chart: usize },

    #[error("operation requires n = 1, got n = {0}")]
    NotBinary(usize),

    #[error("section is zero or numerically zero")]
    ZeroSection,

    #[error("point lies on the zero locus of the section")]
    ZeroLocus,

    #[error("point is not critical (residual {residual:e})")]
    NotCritical { residual: f64 },

    #[error("quadric is not generic: {0}")]
    NotGeneric(String),

    #[error("zeros are not contained in an open hemisphere")]
    HemisphereViolation,

    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not symmetric (defect {0:e})")]
    NotSymmetric(f64),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
