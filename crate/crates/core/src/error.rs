use thiserror::Error;

use crate::rings::CoefficientRing;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("ring mismatch: expected {expected}, found {found}")]
    RingMismatch {
        expected: CoefficientRing,
        found: CoefficientRing,
    },
    #[error("unsupported ring {ring}: {reason}")]
    UnsupportedRing {
        ring: CoefficientRing,
        reason: String,
        /// Primes whose inversion would remove the obstruction, when known.
        primes: Vec<u64>,
    },
    #[error("inadmissible ring map {from} -> {target}")]
    InadmissibleMap {
        from: CoefficientRing,
        target: CoefficientRing,
    },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("value {value} does not lie in {ring}")]
    NotInRing { value: String, ring: CoefficientRing },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("invalid chain map: {0}")]
    InvalidChainMap(String),
    #[error("invalid homotopy: {0}")]
    InvalidHomotopy(String),
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("unsupported algebra: {0}")]
    UnsupportedAlgebra(String),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("duplicate cell name {0:?}")]
    DuplicateName(String),
    #[error("not a morphism at generator {generator:?}: {reason}")]
    NotAMorphism { generator: String, reason: String },
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("invalid idempotent: {0}")]
    InvalidIdempotent(String),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("certificate does not match input: {0}")]
    CertificateMismatch(String),
    #[error("no splitting found: {0}")]
    NoSplitFound(String),
    #[error("split witness fails at stage {stage}: {reason}")]
    NotSplit { stage: usize, reason: String },
    #[error("square {stage} does not commute up to the given homotopy")]
    InvalidSquare { stage: usize },
    #[error("not a quasi-isomorphism: {0}")]
    NotAQuasiIso(String),
    #[error("stage needs {needed} primes, cap is {cap}")]
    StageJoinOverflow { needed: usize, cap: usize },
    #[error("invalid object: {0}")]
    InvalidObject(String),
    #[error("size bound exceeded: {0}")]
    Overflow(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
