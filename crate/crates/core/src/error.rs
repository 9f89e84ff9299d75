use thiserror::Error;

/// A real point of the cylinder, given by its angle on the circle and its
/// height `y`, together with the value observed there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub angle: f64,
    pub y: f64,
    pub value: f64,
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "angle={:.12} (x1={:.12}, x2={:.12}), y={:.12}, value={:.6e}",
            self.angle,
            self.angle.cos(),
            self.angle.sin(),
            self.y,
            self.value
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("polynomial is negative at {0}")]
    Negative(Witness),

    #[error("odd vanishing order {order} at angle {angle}")]
    OddOrder { angle: f64, order: usize },

    #[error("not divisible: remainder norm {remainder:.3e}")]
    NotDivisible { remainder: f64 },

    #[error("square {index} is not divisible by the factor (remainder norm {remainder:.3e})")]
    DivisionFailed { index: usize, remainder: f64 },

    #[error("spectral factorization failed (condition estimate {condition:.3e})")]
    SpectralFactorization { condition: f64 },

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bound violated for coefficient {index} at angle {angle}")]
    BoundViolation { index: usize, angle: f64 },

    #[error("no certificate at this degree (best residual {best_residual:.3e})")]
    Infeasible { best_residual: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("surrogate limitation: {0}")]
    SurrogateLimitation(String),

    #[error("rounding failed: margin {margin:.3e} below required {required:.3e}")]
    Rounding { margin: f64, required: f64 },

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },

    #[error("malformed certificate: {0}")]
    Schema(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with the pipeline stage it came from.
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
