use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::solvers::ConditionCheck;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("generator count {0} is outside 1..=12")]
    InvalidSignature(usize),
    #[error("signature mismatch: C(V_{left}) vs C(V_{right})")]
    SignatureMismatch { left: usize, right: usize },
    #[error("blade mask {mask:#b} is out of range for n = {n}")]
    MaskOutOfRange { mask: u32, n: usize },
    #[error("expected {expected} coefficients, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("element has no inverse")]
    SingularElement,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonogenicError {
    #[error("hypercomplex variable index {j} is outside 1..={n}")]
    IndexOutOfRange { j: usize, n: usize },
    #[error("multi-index degree {degree} exceeds the cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },
    #[error("multi-index has length {got}, expected {expected}")]
    MultiIndexLength { expected: usize, got: usize },
    #[error("kernel evaluated at the pole w = 0")]
    PoleAtOrigin,
    #[error("finite-difference stencil passes through the pole at 0")]
    StencilCrossesOrigin,
    #[error("derivative order {0} exceeds 3")]
    DerivativeOrderTooHigh(usize),
    #[error("stencil point leaves the field's domain")]
    StencilOutsideDomain,
    #[error("field is undefined at a sample point")]
    OutsideDomain,
    #[error("finite-difference step must be positive")]
    InvalidStep,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("blade at byte {position} uses e{generator}; boundary data must be para-real")]
    ParaRealViolation { position: usize, generator: usize },
    #[error("blade index {index} at byte {position} is outside 1..={n}")]
    BladeIndex { position: usize, index: usize, n: usize },
    #[error("variable x{index} at byte {position} does not exist for n = {n}")]
    UnknownVariable { position: usize, index: usize, n: usize },
    #[error("multivector literal contains a variable at byte {position}")]
    NotConstant { position: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundaryError {
    #[error("division by a non-invertible value")]
    DivisionByZero,
    #[error("{func} needs a scalar argument")]
    NonScalarArgument { func: &'static str },
    #[error("sqrt of a negative number")]
    NegativeSqrt,
    #[error("evaluation produced a non-finite value")]
    NonFinite,
    #[error("point has {got} coordinates, expected {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("sample table is empty or malformed: {0}")]
    BadTable(String),
    #[error("sampler produced only coincident pairs")]
    DegenerateSampler,
    #[error("sample at the origin is not allowed for the inverse-distance estimator")]
    SampleAtOrigin,
    #[error("boundary value has an e_n component; data must be para-real")]
    NotParaReal,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid quadrature scheme: {0}")]
    InvalidScheme(&'static str),
    #[error("datum does not decay and no decay hint was given; the truncated integral has no finite tail bound")]
    NonDecayingDatum,
    #[error("evaluation point lies on the hyperplane (w_n = 0)")]
    EvaluationOnHyperplane,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("λ is not invertible")]
    SingularLambda,
    #[error("solvability conditions violated ({} checked)", .0.len())]
    ConditionViolated(Vec<ConditionCheck>),
    #[error("datum does not vanish at infinity (|c(∞)| ≈ {0:e})")]
    DatumLimitNonzero(f64),
    #[error("order m = {m} is outside the range of this operation")]
    OutOfCase { m: i32 },
    #[error("datum must be para-real")]
    NotParaReal,
    #[error("point is outside the upper half space")]
    OutsideUpperHalfSpace,
    #[error("point lies on the jump surface w_n = 0")]
    OnJumpSurface,
    #[error("multi-index {alpha} is not in the free polynomial basis")]
    NotInBasis { alpha: String },
}

/// Crate-wide error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Monogenic(#[from] MonogenicError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}
