//! Bundled test case: a pair of offset Gaussians evolving in smooth,
//! localized rational potentials. All built-in convergence studies and the
//! CLI case id `nm` refer to this data.

use num_complex::Complex64;

use crate::field::{ScalarField, SpinorField};
use crate::grid::Grid;
use crate::potential::PotentialSampler;

/// `V(x) = (1-x)/(1+x^2)`, `A1(x) = (x+1)^2/(1+x^2)`; time-independent.
#[derive(Debug, Clone, Copy, Default)]
pub struct RationalPotential;

impl PotentialSampler for RationalPotential {
    fn sample(&self, _t: f64, x: f64) -> (f64, f64) {
        let d = 1.0 + x * x;
        ((1.0 - x) / d, (x + 1.0) * (x + 1.0) / d)
    }

    fn is_time_independent(&self) -> bool {
        true
    }
}

/// Initial spinor `(exp(-x^2/2), exp(-(x-1)^2/2))`.
pub fn gaussian_initial(grid: Grid) -> SpinorField {
    SpinorField::from_fn(grid, |x| {
        (
            Complex64::new((-x * x / 2.0).exp(), 0.0),
            Complex64::new((-(x - 1.0) * (x - 1.0) / 2.0).exp(), 0.0),
        )
    })
}

/// First component of [`gaussian_initial`] as a scalar field.
pub fn gaussian_initial_up(grid: Grid) -> ScalarField {
    ScalarField::from_fn(grid, |x| Complex64::new((-x * x / 2.0).exp(), 0.0))
}

/// Second component of [`gaussian_initial`] as a scalar field.
pub fn gaussian_initial_dn(grid: Grid) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        Complex64::new((-(x - 1.0) * (x - 1.0) / 2.0).exp(), 0.0)
    })
}
