use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid angular momentum input: {0}")]
    Angular(String),

    #[error("coincident points: the vacuum propagator is singular at zero separation")]
    CoincidentPoints,

    #[error("spherical Hankel function requires x > 0, got {0}")]
    HankelArgument(f64),

    #[error("unsupported spherical Hankel order {0} (only 0 and 2 are implemented)")]
    HankelOrder(u32),

    #[error("invalid medium model: {0}")]
    Medium(String),

    #[error("no causal root of the permittivity cubic at omega = {omega}; candidates: {roots:?}")]
    NoCausalRoot { omega: f64, roots: Vec<Complex64> },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("disordered placement failed after {attempts} attempts ({placed} of {requested} placed); lower the density or r_min")]
    Placement { attempts: usize, placed: usize, requested: usize },

    #[error("atom placement: {0}")]
    AtomSite(String),

    #[error("medium block needs {needed} bytes, budget is {budget} bytes")]
    MemoryBudget { needed: u64, budget: u64 },

    #[error("singular medium block (pivot ratio estimate {condition:e})")]
    SingularMedium { condition: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("van der Waals evaluation: {0}")]
    Vdw(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("oracle check failed: {0}")]
    Oracle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Geometry(_)
            | Error::AtomSite(_)
            | Error::Medium(_)
            | Error::Angular(_)
            | Error::MemoryBudget { .. } => 1,
            Error::Oracle(_) => 3,
            _ => 2,
        }
    }
}
