pub mod cellular;
pub mod cli;
pub mod complexes;
pub mod descent;
pub mod dga;
pub mod error;
pub mod format;
pub mod karoubi;
pub mod linalg;
pub mod perfect;
pub mod random;
pub mod rings;
pub mod smooth;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use rings::{CoefficientRing, ExactData, RingElement, RingMap, Scalar};
pub use complexes::{ChainMap, Complex, Homotopy};
