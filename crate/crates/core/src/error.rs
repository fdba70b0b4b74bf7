use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singular metric at {at:?}: |det a| = {det:e}")]
    SingularMetric { det: f64, at: [f64; 4] },

    #[error("coefficients (c1, c2, c3) must not all be zero: vectorial nonmetricity needs a nonzero constant")]
    ZeroCoefficients,

    #[error("point outside the admissible cone: x = {x:?}, v = {v:?}")]
    Inadmissible { x: [f64; 4], v: [f64; 4] },

    #[error("degenerate Hessian at x = {x:?}, v = {v:?} (Hadamard ratio {ratio:e})")]
    DegenerateHessian { x: [f64; 4], v: [f64; 4], ratio: f64 },

    #[error("no subcase applies: {0}")]
    NoSubcase(String),

    #[error("case (i) needs a free function F")]
    MissingFreeFunction,

    #[error("constructed Lagrangian is degenerate: {0}")]
    DegenerateResult(String),

    #[error("fit not satisfied: {0}")]
    FitNotSatisfied(String),

    #[error("only {usable} usable directions (need at least 10)")]
    InsufficientDirections { usable: usize },

    #[error("no usable samples: {0}")]
    NoUsableSamples(String),

    #[error("null one-form at {at:?}: |<b,b>| = {norm:e}")]
    NullOneForm { at: [f64; 4], norm: f64 },

    #[error("residual undefined: {0}")]
    UndefinedResidual(String),

    #[error("integration blew up at step {step}")]
    BlowUp { step: usize },

    #[error("trajectory left the domain at step {step}: x = {x:?}")]
    LeftDomain { step: usize, x: [f64; 4] },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
