use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("column {column} is constant and cannot be standardized")]
    ConstantColumn { column: usize },
    #[error(
        "design is rank deficient (column {column} is numerically dependent on earlier columns)"
    )]
    RankDeficient { column: usize },
    #[error("LARS-LASSO exceeded {cap} steps")]
    MaxStepsExceeded { cap: usize },
    #[error("coordinate descent did not converge within {sweeps} sweeps")]
    MaxIterationsExceeded { sweeps: usize },
    #[error("lambda {lambda} coincides with transition point {transition}")]
    AtTransitionPoint { lambda: f64, transition: f64 },
    #[error("active set is empty")]
    EmptyActiveSet,
    #[error("no candidate lambda values")]
    EmptyCandidateSet,
    #[error("n = {n} is not a multiple of m = {m}")]
    IndivisibleGrid { n: usize, m: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("Monte-Carlo estimate of E||mu_hat||^2 is zero")]
    DegenerateDenominator,
    #[error("path was computed for a different design or response")]
    PathMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    /// True for failures caused by the numbers rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::MaxStepsExceeded { .. }
                | Error::MaxIterationsExceeded { .. }
                | Error::AtTransitionPoint { .. }
                | Error::DegenerateDenominator
        )
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
