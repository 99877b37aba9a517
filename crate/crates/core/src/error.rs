use thiserror::Error;

/// Errors surfaced by the library.
///
/// Domain errors (singular input, budget limits, …) are distinguished from
/// certificate violations, which always indicate an implementation bug rather
/// than a mathematical failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular curve: the discriminant -16(4A^3 + 27B^2) vanishes")]
    SingularCurve,

    #[error("points do not lie on the same curve")]
    CurveMismatch,

    #[error("point ({x}, {y}) does not satisfy the curve equation")]
    NotOnCurve { x: String, y: String },

    #[error("projective coordinates must not all be zero")]
    AllZero,

    #[error("psi_{m} vanishes at the point (the point is {m}-torsion)")]
    TorsionDenominator { m: u32 },

    #[error("degree law violated for m = {m}: {what} = {measured}, law allows {law}")]
    DegreeLawViolation {
        m: u32,
        what: &'static str,
        measured: i64,
        law: i64,
    },

    #[error("requested tolerance needs doubling depth {needed}, cap is {cap}")]
    PrecisionUnreachable { needed: u32, cap: u32 },

    #[error("height envelope violated (implementation bug): {0}")]
    EnvelopeViolation(String),

    #[error("enumeration budget exceeded: examined {examined}, budget {budget}")]
    BudgetExceeded { examined: u64, budget: u64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("certificate violated (implementation bug): {0}")]
    CertificateViolation(String),

    #[error("every coefficient-height product vanishes (all-torsion input)")]
    AllTorsion,

    #[error("vector search exhausted its provable radius (implementation bug): {0}")]
    SearchExhausted(String),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("parse error: {0}")]
    Parse(String),
}
