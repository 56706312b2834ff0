use thiserror::Error;

use crate::expr::{ChartPoint, EvalError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("degenerate frame at {point}: |det| = {det:e}")]
    DegenerateFrame { point: ChartPoint, det: f64 },
    #[error("degenerate frame: determinant changes sign between {a} and {b}")]
    FrameSignChange { a: ChartPoint, b: ChartPoint },
    #[error("frame component is not real at {point}")]
    ComplexFrame { point: ChartPoint },
    #[error("singular metric at {point}")]
    SingularMetric { point: ChartPoint },
    #[error("metric is not real and symmetric at {point}")]
    AsymmetricMetric { point: ChartPoint },
    #[error("metric signature at {point} is ({found}), expected ({expected})")]
    Signature {
        point: ChartPoint,
        expected: String,
        found: String,
    },
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("unsupported bundle rank {0}; expected 1, 2 or 3")]
    UnsupportedRank(usize),
    #[error("tensor rank {0} exceeds the supported maximum of 8")]
    RankTooLarge(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degenerate skew tensor at {point}")]
    DegenerateSkew { point: ChartPoint },
    #[error("degenerate gauge map at {point}")]
    DegenerateMap { point: ChartPoint },
    #[error("hermitian metric is not positive definite at {point}")]
    NonpositiveHermitian { point: ChartPoint },
    #[error("hermitian metric is not hermitian at {point}")]
    NonHermitian { point: ChartPoint },
    #[error("skew tensor is not antisymmetric at {point}")]
    AsymmetricSkew { point: ChartPoint },
    #[error("gauge map is not unitary at {point}")]
    NotUnitary { point: ChartPoint },
    #[error("gauge map does not have unit determinant at {point}")]
    NotSpecial { point: ChartPoint },
    #[error("{what} is not defined for bundle rank {q}")]
    NotApplicable { what: &'static str, q: usize },
    #[error("could only place {found} of {wanted} sample points inside the admissible region")]
    Sampling { wanted: usize, found: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
