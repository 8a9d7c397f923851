//! Difference, maximal and oscillation characterizations of smoothness.

mod difference;
mod maximal;
mod oscillation;

pub use difference::{
    averaged_difference, difference, difference_field, difference_iterated, difference_lattice, difference_norm,
    difference_spectral, gauss_legendre, lattice_steps, unit_ball_rule, validate_window, BallShape, DifferenceNorm,
    DifferenceProfile, HSampling,
};
pub use maximal::{maximal, maximal_field, peetre_maximal};
pub use oscillation::{monomials, oscillation, DyadicCube, Oscillation, IRLS_MAX_ITER, IRLS_TOL};
