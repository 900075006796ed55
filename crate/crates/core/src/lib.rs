//! Measurement models built from Kac-Takesaki operators of finite abelian
//! groups, their amplification through probe cascades, and a split-operator
//! Stern-Gerlach simulator.

pub mod amplification;
pub mod error;
pub mod group;
pub mod hilbert;
pub mod kt;
pub mod measurement;
pub mod random;
pub mod sterngerlach;

pub use error::{Error, Result};
pub use group::{Character, Element, FiniteAbelianGroup};
pub use hilbert::{DenseOperator, LegSpace, StateVector};
pub use measurement::{Outcome, SpectralRepresentation};

pub type C64 = num_complex::Complex64;
