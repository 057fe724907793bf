use alloc::string::String;

/// Errors raised by the algebraic, tensor and combinatorial layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("root data: N must be odd and at least 3, with k coprime to N (got N={n}, k={k})")]
    InvalidRoot { n: usize, k: usize },
    #[error("group element has x = {x}, outside I")]
    ZeroX { x: f64 },
    #[error("non-generic pair: |v_g - v_gh w^{m}| = {gap:e}")]
    Resonance { m: usize, gap: f64 },
    #[error("nu evaluated too close to 1 (|1 - x| = {gap:e})")]
    NearOne { gap: f64 },
    #[error("bad operands: {0}")]
    BadOperands(&'static str),
    #[error("matrix is singular")]
    Singular,
    #[error("composite is not a scalar multiple of the identity (residual {residual:e})")]
    NotScalar { residual: f64 },
    #[error("square root of a non-positive base {base}")]
    NegativeBase { base: f64 },
    #[error("operator word does not compose: {0}")]
    BlockMismatch(String),
    #[error("invalid label set: {0}")]
    InvalidLabels(String),
    #[error("charge constraint violated: {0}")]
    ChargeConstraint(String),
    #[error("face ({tet}, {face}) is not glued")]
    NotClosed { tet: usize, face: usize },
    #[error("face ({tet}, {face}) is glued more than once or inconsistently")]
    BadGluing { tet: usize, face: usize },
    #[error("edge ({tet}, {edge}) has both endpoints at the same vertex")]
    NotQuasiRegular { tet: usize, edge: usize },
    #[error("gluing of ({tet}, {face}) preserves orientation")]
    NotOrientable { tet: usize, face: usize },
    #[error("the link of vertex {vertex} has Euler characteristic {euler}, expected 2")]
    NotManifold { vertex: usize, euler: i64 },
    #[error("vertex {vertex} lies on {degree} link edges, expected 2")]
    NotHamiltonian { vertex: usize, degree: usize },
    #[error("no charge exists: {0}")]
    NoCharge(String),
    #[error("invalid charge: {0}")]
    InvalidCharge(String),
    #[error("invalid coloring: {0}")]
    InvalidColoring(String),
    #[error("move not applicable: {0}")]
    MoveNotApplicable(String),
    #[error("bad loop: {0}")]
    BadLoop(String),
    #[error("could not make the coloring admissible after {tries} attempts")]
    AdmissibilityFailed { tries: usize },
    #[error("face class {face} receives two legs of the same type")]
    TypeMismatch { face: usize },
    #[error("value is zero")]
    ZeroValue,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
