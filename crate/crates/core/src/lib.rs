//! Numerical laboratory for anisotropic mixed-norm function spaces on the
//! torus: dilation groups and quasi-norms, Littlewood-Paley filter banks,
//! Triebel-Lizorkin / Besov quasi-norms, difference and maximal operators,
//! and norm-equivalence campaigns.

pub mod anisotropy;
pub mod error;
pub mod filterbank;
pub mod grid;
pub mod lab;
pub mod mixed_norm;
pub mod numeric;
pub mod smoothness;
pub mod spaces;

pub use error::{Error, Result};
