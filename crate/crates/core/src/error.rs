use thiserror::Error;

use crate::triangle::BoundaryCondition;

/// Errors raised by the toolkit. Mathematical preconditions that the caller
/// can violate are reported here; internal invariants panic instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero in Q(sqrt(d)) arithmetic")]
    DivisionByZero,

    #[error("radicand mismatch: sqrt({0}) cannot be combined with sqrt({1})")]
    RadicandMismatch(u64, u64),

    #[error("radicand must be a positive integer, got {0}")]
    BadRadicand(u64),

    #[error("cannot parse surd {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("lattice matrix is singular")]
    SingularMatrix,

    #[error("Gram form entry {entry} is irrational; the torus is not rational")]
    IrrationalGram { entry: String },

    #[error("mode ({m},{n}) is not admissible for {bc} boundary conditions: {reason}")]
    InadmissibleMode {
        m: i64,
        n: i64,
        bc: BoundaryCondition,
        reason: String,
    },

    #[error("point ({x}, {y}) lies outside the closed triangle")]
    OutsideTriangle { x: f64, y: f64 },

    #[error("quadrature resolves wavenumbers up to {resolved:.3} but {required:.3} is needed")]
    UnderResolved { resolved: f64, required: f64 },

    #[error("quadrature sample count {got} does not match the rule ({expected} nodes)")]
    SampleCount { got: usize, expected: usize },

    #[error("frequencies lie on different shells (levels {0} and {1})")]
    MixedShells(u64, u64),

    #[error("quadruple is not resonant: m1 - mbar1 + m2 - mbar2 = ({0}, {1})")]
    NotResonant(i64, i64),

    #[error("the level-0 shell is excluded from resonance counting")]
    ZeroLevel,

    #[error("localization sample {value} at node {index} is negative")]
    NegativeSample { index: usize, value: f64 },

    #[error("the truncation mode set is empty")]
    EmptyModes,

    #[error("wavenumber {0} is not an integer multiple of 2*pi")]
    NotLatticeWavenumber(f64),

    #[error("field belongs to a different torus")]
    TorusMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
