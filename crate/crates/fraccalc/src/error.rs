use thiserror::Error;

/// Failure modes of the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("gamma function pole at {0}")]
    GammaPole(String),
    #[error("kernel of integer order {0} is a derivative of the delta function, not a pointwise function")]
    NotAFunction(i64),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("accuracy target missed, estimated error {est_error:e}")]
    Accuracy { est_error: f64 },
    #[error("function has a pole at the evaluation point x = {0}")]
    PoleAtEvaluationPoint(f64),
    #[error("grid values do not decay at the boundary: {0}")]
    Boundary(String),
    #[error("zero-frequency component is nonzero for a negative order: {0}")]
    Dc(String),
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },
}

impl Error {
    /// Short machine-readable tag used in JSON diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::GammaPole(_) => "gamma_pole",
            Error::NotAFunction(_) => "not_a_function",
            Error::Geometry(_) => "geometry",
            Error::Input(_) => "input",
            Error::Convergence(_) => "convergence",
            Error::Accuracy { .. } => "accuracy",
            Error::PoleAtEvaluationPoint(_) => "pole_at_evaluation_point",
            Error::Boundary(_) => "boundary",
            Error::Dc(_) => "dc",
            Error::Syntax { .. } => "syntax",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
