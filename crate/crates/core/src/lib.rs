//! Spectral solver core for the 1D two-component Dirac equation with the
//! dimensionless light-speed parameter `eps` in `(0, 1]`.
//!
//! For small `eps` the solution oscillates in time with period
//! `O(eps^2)`, which ruins fixed-step integrators unless the step resolves
//! the oscillation. The integrator in [`mti`] splits the state into
//! carrier-modulated branch components in Fourier space, integrates each
//! component's oscillator exactly, and applies second-order quadrature to
//! the potential term; its accuracy degrades gracefully to first order
//! uniformly over the whole `eps` range instead of collapsing.
//!
//! The crate also carries everything needed to measure that behavior:
//!
//! - [`spectral`], [`modes`]: periodic grid transforms, per-mode symbols
//!   and branch projectors;
//! - [`tsfp`]: a Strang-splitting integrator with unitary substeps, used
//!   to generate reference solutions;
//! - [`limiting`]: small-`eps` limiting-model solvers and their error
//!   functionals;
//! - [`diagnostics`]: mass/energy functionals and weighted l2 norms;
//! - [`validate`]: independent reference implementations (direct
//!   transforms, quadrature, a straight-line step transcription) and the
//!   invariant battery behind `dirac-mti validate`.

pub mod cases;
pub mod coefficients;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod limiting;
pub mod modes;
pub mod mti;
pub mod potential;
pub mod spectral;
pub mod tsfp;
pub mod validate;

pub use coefficients::StepCoefficients;
pub use error::{CoreError, Result};
pub use field::{ScalarField, SpinorField};
pub use grid::Grid;
pub use modes::{Branch, ModeTable, Sym2};
pub use mti::{evolve, MtiIntegrator, MtiState, Observer, ObserverSlot};
pub use potential::{ClosurePotential, NodalPotential, PotentialSampler, ZeroPotential};
pub use spectral::{ModeCoefficients, Spectral};
pub use tsfp::{free_propagator, tsfp_evolve, TsfpIntegrator};
