//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site state code {0} is not in 0..=3")]
    InvalidSiteState(u8),

    #[error("unknown model variant '{0}' (expected 'noscreening' or 'screening')")]
    UnknownModel(String),

    #[error("ring size {0} is too small; neighborhoods need at least 3 sites")]
    RingTooSmall(usize),

    #[error("ring size {0} is outside the oracle bound 3..=8")]
    OracleSizeOutOfRange(usize),

    #[error("frozen site index {index} is out of range for size {size}")]
    FrozenIndexOutOfRange { index: usize, size: usize },

    #[error("duplicate frozen site index {0}")]
    DuplicateFrozenIndex(usize),

    #[error("all {0} sites are frozen; no dynamics possible")]
    AllSitesFrozen(usize),

    #[error("sample times must be nondecreasing and within [0, t_max]")]
    BadSampleTimes,

    #[error("horizon t_max must be finite and nonnegative, got {0}")]
    BadHorizon(f64),

    #[error("at least one replica is required")]
    NoReplicas,

    #[error("replica index {index} is out of range for {replicas} replicas")]
    ReplicaOutOfRange { index: usize, replicas: usize },

    #[error("pattern length {pattern} exceeds ring size {size}")]
    PatternTooLong { pattern: usize, size: usize },

    #[error("empty pattern")]
    EmptyPattern,

    #[error("no window free of frozen sites exists for this pattern")]
    NoAdmissibleWindow,

    #[error("one-sided runs need frozen sites {{0}} or {{0,2}}")]
    BadOneSidedFreeze,

    #[error("one-sided runs need size >= 200 to stand in for the semi-infinite chain, got {0}")]
    OneSidedRingTooSmall(usize),

    #[error("integration step must be positive and finite, got {0}")]
    BadStep(f64),

    #[error("record stride must be positive")]
    BadRecordStride,

    #[error("state became nonfinite at t = {0}; the true solution is bounded")]
    NonfiniteState(f64),

    #[error("trajectory ends at t = {0}; limit extraction needs t_max >= 20")]
    HorizonTooShort(f64),

    #[error("residual drift {0:e} at the endpoint exceeds 1e-4; horizon too short")]
    NotStationary(f64),

    #[error("standard error needs at least 2 replicas, got {0}")]
    TooFewReplicas(usize),

    #[error("first-line density must be positive to form an increase factor, got {0}")]
    NonpositiveLine(f64),

    #[error("pair ({0}, {1}) is outside the admissible factorization set")]
    InadmissiblePair(u8, u8),

    #[error("time {0} is not recorded in the trajectory")]
    TimeNotRecorded(f64),
}
