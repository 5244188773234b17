use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precision must be at least 15 decimal digits, got {0}")]
    InvalidPrecision(u32),
    #[error("could not parse number {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("series constant term must be positive for log, got {0}")]
    NonPositiveConstantTerm(f64),
    #[error("inner series of a composition must vanish at 0, got {0}")]
    NonzeroInnerConstant(f64),

    #[error("kernel sum did not converge after {terms} terms (last term {last:e})")]
    NonConvergence { terms: usize, last: f64 },
    #[error("leading coefficient a_{degree} = {value:e} must be positive to normalise")]
    NonPositiveLeadingCoefficient { degree: usize, value: f64 },
    #[error("series of order {have} is too short, need order {need}")]
    SeriesTooShort { have: usize, need: usize },
    #[error("double-scaling coupling g = {0:e} is not positive")]
    NonPositiveG(f64),

    #[error("Q_{0} basis is degenerate: degree below index")]
    DegenerateBasis(usize),
    #[error("root finder did not converge after {sweeps} sweeps (max backward error {backward_error:e})")]
    NoConvergence { sweeps: usize, backward_error: f64 },
    #[error("polynomial has degree 0 or a vanishing leading coefficient")]
    DegeneratePolynomial,

    #[error("integrand tail e^-U(x) = {value:e} at the cutoff is not negligible")]
    TailNotNegligible { value: f64 },
    #[error("found only {found} of {wanted} zeros below z = {limit}")]
    InsufficientZerosFound { found: usize, wanted: usize, limit: f64 },
    #[error("unknown reference table {0:?}")]
    UnknownReference(String),
    #[error("kernel {0} is not even; real-axis sign scanning does not apply")]
    NotEven(String),

    #[error("anchor roots coincide; cannot fit a linear map")]
    DegenerateFit,
    #[error("anchor root {index} is complex")]
    ComplexAnchor { index: usize },
    #[error("need at least {need} real roots, have {have}")]
    NotEnoughRoots { need: usize, have: usize },
    #[error("table row {0} was not produced")]
    MissingPipeline(String),

    #[error("saddle-point Jacobian is singular")]
    SingularJacobian,
    #[error("no saddle point: {0}")]
    NoSaddle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 2 for configuration/spec problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidPrecision(_)
            | Error::Parse(_)
            | Error::Config(_)
            | Error::UnknownReference(_)
            | Error::NotEven(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => 2,
            Error::NonPositiveConstantTerm(_)
            | Error::NonzeroInnerConstant(_)
            | Error::NonConvergence { .. }
            | Error::NonPositiveLeadingCoefficient { .. }
            | Error::SeriesTooShort { .. }
            | Error::NonPositiveG(_) => 2,
            _ => 3,
        }
    }
}
