use thiserror::Error;

/// Errors raised by cone, tube, momentum and reduction operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("point is not in the open cone (margin {margin:e})")]
    NotInCone { margin: f64 },

    #[error("vector is not in the open dual cone (dual margin {margin:e})")]
    NotInDualCone { margin: f64 },

    #[error("point is not in the tube domain (imaginary margin {margin:e})")]
    NotInDomain { margin: f64 },

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("subspace basis is rank deficient")]
    RankDeficient,

    #[error("subspace meets the closed cone; the zero level set is empty")]
    NotAdmissible,

    #[error("admissibility search did not certify either side")]
    Undecided,

    #[error("Newton iteration budget exhausted after {iterations} steps (gradient {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("imaginary part is not in cone + subspace")]
    NotInZ,

    #[error("feasibility witness does not verify: {0}")]
    InvalidWitness(String),

    #[error("point is not on the zero level set (momentum {residual:e})")]
    NotOnZeroSet { residual: f64 },

    #[error("singular values straddle the rank cutoff ({value:e} near {cutoff:e})")]
    RankAmbiguous { value: f64, cutoff: f64 },

    #[error("generator is not in the Lie algebra of the cone automorphism group (residual {residual:e})")]
    NotConeCompatible { residual: f64 },

    #[error("orbit sampling left the domain too often ({draws} draws)")]
    SamplingExhausted { draws: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
