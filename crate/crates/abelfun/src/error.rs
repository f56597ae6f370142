use thiserror::Error;

/// Errors shared by every subsystem of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("bad normalization: {0}")]
    BadNormalization(String),
    #[error("unsupported normalization pair: {0}")]
    UnsupportedPair(String),
    #[error("x lies at a branch point (|f(x)| = {0:.3e})")]
    AtBranchPoint(f64),
    #[error("quadrature failed to converge (last relative change {0:.3e})")]
    QuadratureDiverged(f64),
    #[error("complex branch points are not supported by the periods module")]
    ComplexBranchPoints,
    #[error("Im(tau) is not positive definite (min eigenvalue {0:.3e})")]
    NonconvergentTau(f64),
    #[error("theta summation radius {0:.1} exceeds the cap {1:.1}")]
    RadiusOverflow(f64, f64),
    #[error("theta constant vanishes for the requested characteristic (|theta| = {0:.3e})")]
    SingularCharacteristic(f64),
    #[error("sigma calibration inconsistent: ray dispersion {0:.3e}")]
    CalibrationInconsistent(f64),
    #[error("argument lies on the theta divisor (|sigma| = {0:.3e})")]
    OnThetaDivisor(f64),
    #[error("series weight unavailable: {0}")]
    WeightUnavailable(String),
    #[error("special divisor: points {0} and {1} are hyperelliptic involutes")]
    SpecialDivisor(usize, usize),
    #[error("integration path passes within {0:.3e} of a branch point; perturb the request")]
    PathThroughBranchPoint(f64),
    #[error("polynomial root finding failed to converge")]
    RootFindFailure,
    #[error("hat-sigma vanishes at the requested point")]
    OnHatDivisor,
    #[error("groupoid operands project to different moduli (mismatch {0:.3e})")]
    ProjectionMismatch(f64),
    #[error("singular groupoid configuration: {0}")]
    SingularConfiguration(String),
    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
