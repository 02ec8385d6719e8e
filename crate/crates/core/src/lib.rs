//! Resonant state expansion (RSE) for one-dimensional open quantum systems
//! built from Dirac delta spikes.
//!
//! Units: `hbar = 1`, `m = 1/2`, so that `E = k^2`. The half-width `a` of the
//! unperturbed double well is the natural length unit.
//!
//! The crate is organised bottom-up:
//!
//! * [`basis`] finds, classifies and normalises every resonant state of the
//!   symmetric double-delta well inside a disk of the complex `k` plane and
//!   audits completeness with the argument principle.
//! * [`rse`] assembles the symmetrised RSE matrix for an arbitrary set of
//!   delta-spike perturbations and diagonalises it.
//! * [`exact`] holds independent reference solutions: the triple-well secular
//!   equation and the Kronig-Penney band structure.
//! * [`analysis`] matches spectra, builds convergence ladders and extracts
//!   quasi-periodic groups of resonances.

pub mod analysis;
pub mod basis;
mod error;
pub mod exact;
pub mod roots;
pub mod rse;

pub use error::{Error, Result};

/// Complex double used for every wavenumber and amplitude.
pub type C64 = num_complex::Complex64;

/// Numerical tolerances shared across modules.
pub mod tol {
    /// Relative residual accepted for a secular-equation root.
    pub const ROOT_TOL: f64 = 1e-12;
    /// Two roots closer than this (in units of `1/a`) are the same state.
    pub const DEDUP_TOL: f64 = 1e-9;
    /// Required accuracy of the Siegert normalisation quadrature.
    pub const QUAD_TOL: f64 = 1e-8;
    /// Smallest admissible modulus of the normalisation radicand.
    pub const DEGENERATE_TOL: f64 = 1e-10;
    /// Minimum distance between an audit contour and a root (units of `1/a`).
    pub const CONTOUR_MARGIN: f64 = 1e-3;
    /// Wavenumbers below this modulus (units of `1/a`) are not states.
    pub const K_FLOOR: f64 = 1e-8;
    /// Starting node count of the winding-number quadrature.
    pub const WINDING_NODES: usize = 4096;
    /// Eigen-residual tolerance relative to the infinity norm of `H`.
    pub const EIG_TOL: f64 = 1e-9;
    /// `|Re k|` below this (units of `1/a`) puts a perturbed state on the axis.
    pub const AXIS_TOL: f64 = 1e-6;
    /// Distance to a pole of the triple-well secular function (units of `1/a`).
    pub const POLE_TOL: f64 = 1e-8;
    /// Bisection tolerance of Kronig-Penney band edges.
    pub const BAND_TOL: f64 = 1e-10;
}
