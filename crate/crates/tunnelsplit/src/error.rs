use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("root finder did not converge (residual {residual:.3e})")]
    NonConvergence { residual: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("square root branch point at the expansion origin")]
    BranchAtOrigin,
    #[error("{0} is not a branch point")]
    NotABranchPoint(Complex64),
    #[error("discriminant vanishes identically (non-reduced curve)")]
    DiscriminantDegenerate,
    #[error("sheet collision near q = {0}")]
    SheetCollision(Complex64),
    #[error("path passes within clearance of singular point {0}")]
    PathThroughSingularity(Complex64),
    #[error("dH/dp vanishes on the path near q = {0}")]
    TimeSingularity(Complex64),
    #[error("another branch point lies between the segment endpoints")]
    NotAdjacent,
    #[error("series expansion failed: {0}")]
    ExpansionFailure(String),
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("energy {energy} outside admissible range [{lo}, {hi}]")]
    EnergyOutOfRange { energy: f64, lo: f64, hi: f64 },
    #[error("no bound state with N = {0} in the well")]
    NoBoundState(usize),
    #[error("winding sum diverges (resonance)")]
    DivergentSum,
    #[error("resonance: sine factor {0:.3e} too close to zero")]
    ResonanceSingularity(f64),
    #[error("Hamiltonian is not parity symmetric")]
    NonSymmetricModel,
    #[error("no doublet near target energy {0}")]
    NoDoubletNearTarget(f64),
    #[error("validity condition violated: {0}")]
    ValidityViolation(String),
    #[error("unknown loop {0}")]
    UnknownLoop(String),
    #[error("{0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
