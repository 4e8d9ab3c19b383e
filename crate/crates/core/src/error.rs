use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("Dirichlet condition violated: f(0) = {0}")]
    DirichletViolation(f64),
    #[error("coefficient bounds: {0}")]
    CoefficientBounds(String),
    #[error("bilinear form is not coercive: {0}")]
    NotCoercive(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("incompatible data (Fredholm obstruction): ∫ f dV = {integral:e} exceeds {limit:e}")]
    IncompatibleData { integral: f64, limit: f64 },
    #[error("factorization failure: {0}")]
    FactorizationFailure(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("degenerate kernel: W(t) - W(s) = {0:e}")]
    DegenerateKernel(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by rejected input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidMeasure(_)
                | Error::InvalidMesh(_)
                | Error::MeshMismatch(_)
                | Error::ConstraintViolation(_)
                | Error::DirichletViolation(_)
                | Error::CoefficientBounds(_)
                | Error::NotCoercive(_)
                | Error::IncompatibleData { .. }
                | Error::InvalidArgument(_)
                | Error::Config(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
