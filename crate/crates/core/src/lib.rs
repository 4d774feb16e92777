//! Time-domain electromagnetic scattering from homogeneous dispersive
//! penetrable obstacles.
//!
//! The solver couples a boundary integral formulation of the transmission
//! problem (exterior vacuum, dispersive interior) with a Runge-Kutta
//! convolution quadrature time discretization and Raviart-Thomas boundary
//! elements in space.  All frequency-domain work happens at the nodes of a
//! scaled Fourier contour, which decouples the time steps into independent
//! complex-frequency solves.

pub mod config;
pub mod convergence;
pub mod cq;
pub mod error;
pub mod materials;
pub mod mesh;
pub mod ops;
pub mod oracle;
pub mod quad;
pub mod scattering;

pub use error::{Error, Result};

/// Complex scalar used throughout the frequency-domain layers.
pub type C64 = num_complex::Complex64;
