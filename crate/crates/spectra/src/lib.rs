//! Sharp constants for one-dimensional low-temperature Gibbs measures.
//!
//! The measure `mu_t` has density `e^{-V(x)/t} / Z_t` for a convex potential
//! `V` that vanishes exactly on a plateau `[a, b]` and grows like a power of
//! the distance on either side. As `t` drops, `mu_t` converges to the uniform
//! measure on the plateau, and the Poincare and log-Sobolev constants
//! approach `(b-a)^2 / pi^2` at the rate `t^{1/alpha}`, where `alpha` is the
//! wing growth power. This crate computes those constants numerically
//! (finite elements for the spectral gap, gradient ascent on the entropy
//! quotient for log-Sobolev), evaluates the closed-form first-order
//! expansions, and compares the two: in particular, the square-root rate of
//! the log-Sobolev constant contradicts a conjectured linear rate.
//!
//! The spectral gap of the counterexample potential
//! `V = dist(x, [-pi/2, pi/2])^2 / 2` expands as
//! `c_p(t) = 1 + sqrt(8t/pi) + O(t)`:
//!
//! ```
//! use spectra::asymptotics::poincare_expansion_1d;
//! use spectra::potential::PiecewisePotential;
//! use spectra::quadrature::GridSpec;
//! use spectra::spectral::poincare_constant;
//!
//! let pot = PiecewisePotential::counterexample();
//! let c_p = poincare_constant(&pot, 1e-3, &GridSpec::default())?.c_p;
//! let model = poincare_expansion_1d(&pot)?;
//! assert!((c_p - model.evaluate(1e-3)).abs() < 1e-3);
//! # Ok::<(), spectra::SpectraError>(())
//! ```
//!
//! The heavy lifting is organized by module: [`potential`] describes plateau
//! potentials, [`quadrature`] integrates against `mu_t` with boundary-layer
//! accuracy, [`spectral`] solves the gap eigenproblem, [`entropy`] brackets
//! the log-Sobolev constant, [`asymptotics`] holds the closed-form models,
//! [`sweep`] runs temperature sweeps and power-law fits, [`langevin`]
//! cross-checks by simulation, and [`verify`] packages the acceptance
//! criteria. The `spectra` binary exposes all of it on the command line.

pub mod asymptotics;
pub mod config;
pub mod entropy;
pub mod error;
pub mod langevin;
pub mod potential;
pub mod quadrature;
pub mod spectral;
pub mod sweep;
pub mod tridiag;
pub mod verify;

pub use error::{Result, SpectraError};

/// Full-precision decimal formatting (17 significant digits).
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}
