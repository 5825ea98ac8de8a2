use thiserror::Error;

/// Errors raised by the workbench.
///
/// Variants split into two families: input errors (malformed or
/// inconsistent data) and domain errors (well-formed requests that fall
/// outside the region where a computation is defined, such as a target
/// Birkhoff average on the boundary of the admissible range).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("degenerate SFT: no admissible bi-infinite orbit remains after trimming")]
    DegenerateSft,

    #[error("SFT is not irreducible ({0})")]
    NotIrreducible(String),

    #[error("enumeration too large: {count} words exceed the budget of {budget}")]
    EnumerationTooLarge { count: u128, budget: u128 },

    #[error("inadmissible word {0:?}")]
    InadmissibleWord(Vec<usize>),

    #[error("word {0:?} is not cyclically closable")]
    NonClosableWord(Vec<usize>),

    #[error("non-unique stationary distribution: {0} closed classes")]
    NonUniqueStationary(usize),

    #[error("memory mismatch: {0}")]
    MemoryMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: String, iterations: usize },

    #[error("outside L_g: alpha {alpha} not in [{lo}, {hi}]")]
    OutsideRange { alpha: f64, lo: f64, hi: f64 },

    #[error("boundary: spectrum not computed at alpha {alpha} (endpoint of [{lo}, {hi}])")]
    Boundary { alpha: f64, lo: f64, hi: f64 },

    #[error("degenerate: observable has a single Birkhoff average {value}")]
    Degenerate { value: f64 },

    #[error("exterior: target {0:?} lies outside the rotation set")]
    Exterior(Vec<f64>),

    #[error("boundary: target {0:?} is not certified interior to the rotation set")]
    NotInterior(Vec<f64>),

    #[error("entropy cap {cap} unreachable; smallest achieved entropy {achieved}")]
    EntropyCapUnreachable { cap: f64, achieved: f64 },

    #[error("target level {c} outside admissible band ({lo}, {hi}]")]
    OutsideBand { c: f64, lo: f64, hi: f64 },

    #[error("tilt solve diverged: {0}")]
    TiltDivergence(String),

    #[error("proximity {zeta} not achievable; witness lies at d* = {achieved}")]
    ProximityUnachievable { zeta: f64, achieved: f64 },

    #[error("SMB depth insufficient: increase n_max (best entropy deficits {deficits:?} at n = {n})")]
    DepthInsufficient { n: usize, deficits: Vec<f64> },

    #[error("orthant precondition violated: candidate {candidate}, coordinate {coordinate}")]
    OrthantViolation { candidate: usize, coordinate: usize },

    #[error("initial point lies on the singular line x = 0")]
    SingularInitialPoint,
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateSft => "degenerate_sft",
            Error::NotIrreducible(_) => "not_irreducible",
            Error::EnumerationTooLarge { .. } => "enumeration_too_large",
            Error::InadmissibleWord(_) => "inadmissible_word",
            Error::NonClosableWord(_) => "non_closable_word",
            Error::NonUniqueStationary(_) => "non_unique_stationary",
            Error::MemoryMismatch(_) => "memory_mismatch",
            Error::InvalidInput(_) => "invalid_input",
            Error::NotConverged { .. } => "not_converged",
            Error::OutsideRange { .. } => "outside_l_g",
            Error::Boundary { .. } => "boundary",
            Error::Degenerate { .. } => "degenerate",
            Error::Exterior(_) => "exterior",
            Error::NotInterior(_) => "not_interior",
            Error::EntropyCapUnreachable { .. } => "entropy_cap_unreachable",
            Error::OutsideBand { .. } => "outside_band",
            Error::TiltDivergence(_) => "tilt_divergence",
            Error::ProximityUnachievable { .. } => "proximity_unachievable",
            Error::DepthInsufficient { .. } => "smb_depth_insufficient",
            Error::OrthantViolation { .. } => "orthant_violation",
            Error::SingularInitialPoint => "singular_initial_point",
        }
    }

    /// Domain errors: the request is well formed but lies outside the
    /// region where the computation is defined.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::OutsideRange { .. }
                | Error::Boundary { .. }
                | Error::Degenerate { .. }
                | Error::Exterior(_)
                | Error::NotInterior(_)
                | Error::EntropyCapUnreachable { .. }
                | Error::OutsideBand { .. }
                | Error::TiltDivergence(_)
                | Error::ProximityUnachievable { .. }
                | Error::DepthInsufficient { .. }
                | Error::OrthantViolation { .. }
                | Error::NotIrreducible(_)
                | Error::NotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
