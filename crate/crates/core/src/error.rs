use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite coordinate {0}")]
    NonFinite(f64),

    #[error("matrix determinant is {0}, expected 1")]
    Determinant(i64),
    #[error("dominant eigenvalue {0:.6} is not larger than 5")]
    WeakExpansion(f64),
    #[error("matrix has {0} fixed points, at least 5 are required")]
    TooFewFixedPoints(usize),
    #[error("matrix has eigenvalue 1, fixed points are not isolated")]
    DegenerateFixedPoints,

    #[error("point at distance {distance:.6} is outside the chart radius {radius}")]
    OutsideChart { distance: f64, radius: f64 },

    #[error("k = {0} must be a positive multiple of 6")]
    CircleCount(usize),
    #[error("special point index {0} is out of range (base has {1} fixed points)")]
    SpecialIndex(usize, usize),
    #[error("special points {0} and {1} coincide")]
    DuplicateSpecial(usize, usize),
    #[error("bump radius {rho_b} exceeds half the minimum special-point distance {limit:.6}")]
    BumpRadius { rho_b: f64, limit: f64 },
    #[error("g_plus = {g_plus} exceeds nu/2 = {limit}")]
    GPlus { g_plus: f64, limit: f64 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("surgered point is not a source: (1 + delta_da) * lambda_s = {0:.6} <= 1")]
    NotASource(f64),
    #[error("DA deformation is not invertible: monotonicity margin {0:.4} < 0.1")]
    DiffeoMargin(f64),
    #[error("supports overlap: {0}")]
    Overlap(String),
    #[error("stage {0} requires {1}")]
    Stage(&'static str, &'static str),

    #[error("curve did not reach length {target} within {iters} iterations (length {reached:.4})")]
    CurveTooShort {
        target: f64,
        reached: f64,
        iters: usize,
    },
    #[error("numerical overflow before the first re-orthonormalisation (period {0})")]
    Overflow(usize),
    #[error("empty grid")]
    EmptyGrid,
    #[error("palette has no colour for label {0}")]
    Palette(usize),
    #[error("property {property} violated: {detail}")]
    Property { property: String, detail: String },
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
