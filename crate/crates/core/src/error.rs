use thiserror::Error;

/// Errors raised by the geometry, interpolation and bound estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {what} = {re}{im:+}i is outside the {domain}")]
    OutsideDomain {
        what: &'static str,
        re: f64,
        im: f64,
        domain: &'static str,
    },

    #[error("two-point problem has coincident nodes")]
    CoincidentNodes,

    #[error("no Schur-class interpolant exists (Pick margin {margin:e})")]
    InfeasibleProblem { margin: f64 },

    #[error("degenerate interpolation nodes: {0}")]
    DegenerateNodes(&'static str),

    #[error("degenerate target: {0}")]
    DegenerateTarget(&'static str),

    #[error("preimage {which} has modulus {modulus} >= 1")]
    PreimageOutsideDisk { which: &'static str, modulus: f64 },

    #[error("disk image leaves the bidisk (containment margin {margin:e})")]
    ContainmentFailed { margin: f64 },

    #[error("evaluation point coincides with a pole preimage")]
    CoincidentPoint,

    #[error("point coincides with a pole")]
    PoleHit,

    #[error("no feasible candidate found across {starts} starts ({detail})")]
    NoFeasiblePoint { starts: usize, detail: String },

    #[error("parameters outside the certified regime: {0}")]
    OutsideRegime(String),

    #[error("feasible candidate below the Lempert threshold (objective {objective}, threshold {threshold})")]
    CounterexampleFound { objective: f64, threshold: f64 },

    #[error("{0} is not in the unit ball")]
    NotInBall(&'static str),

    #[error("point leaves the sector 1/2|z2|^(3/2) <= |z1| <= |z2|^(3/2)")]
    SectorViolation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by inputs outside the supported regime or
    /// degenerate data, as opposed to a failed numerical check.
    pub fn is_out_of_regime(&self) -> bool {
        !matches!(
            self,
            Error::NoFeasiblePoint { .. } | Error::CounterexampleFound { .. }
        )
    }
}
