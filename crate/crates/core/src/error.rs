use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({re}, {im}) is not inside the open unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("evaluation on the unit circle is not supported (|z| = {modulus})")]
    OnCircle { modulus: f64 },

    #[error("pole: z is the reflection of a Blaschke zero")]
    Pole,

    #[error("quadrature bound {achieved:e} exceeds tolerance {requested:e} at depth budget")]
    QuadratureBudget { achieved: f64, requested: f64 },

    #[error("Blaschke zero lies on the circle of radius {radius}; minimum modulus is zero")]
    ZeroOnCircle { radius: f64 },

    #[error("constant inner function where a non-constant one is required")]
    ConstantInner,

    #[error("Taylor coefficients up to degree {degree} not reliable (error bound {bound:e})")]
    TaylorPrecision { degree: usize, bound: f64 },

    #[error("t = {t:e} is at or below the last stored breakpoint {last:e}; prefix exhausted")]
    PrefixExhausted { t: f64, last: f64 },

    #[error("cover at stage {stage} violates the 4^-n length budget")]
    CoverBudget { stage: usize },

    #[error("need deeper covers: stage {stage} required")]
    NeedDeeperCovers { stage: usize },

    #[error("support check failed: {0}")]
    SupportCheck(String),

    #[error("operator is not invertible: {0}")]
    NotInvertible(String),

    #[error("Gram matrix numerically singular (min eigenvalue {min_eigenvalue:e} at M = {size}); reduce M or raise D")]
    GramDegenerate { min_eigenvalue: f64, size: usize },

    #[error("norm routes disagree (relative gap {relative_gap:e}); conditioning problem")]
    MethodDisagreement { relative_gap: f64 },

    #[error("matrix is not a contraction: norm {norm}")]
    NotContraction { norm: f64 },

    #[error("defect spaces are degenerate: {0}")]
    DegenerateDefect(String),

    #[error("I - lambda T* is singular at lambda = ({re}, {im})")]
    Resolvent { re: f64, im: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
