//! Independent reference solutions used to validate the boundary-operator
//! and scattering machinery.
//!
//! Two oracles live here:
//!
//! * a multipole (Mie-type) solution of the time-harmonic penetrable-sphere
//!   transmission problem at complex frequencies, together with the exact
//!   spectrum of the boundary operators on the unit sphere, and
//! * closed-form fractional-integral references for validating the scalar
//!   convolution-quadrature path.
//!
//! The oracles work at fixed complex frequencies only; time-domain
//! references are produced by feeding them through the convolution
//! quadrature engine, never by an independent time stepper.

pub mod bessel;
pub mod fractional;
pub mod mie;

pub use bessel::{modified_spherical_bessel, modified_spherical_bessel_with_derivatives, riccati};
pub use fractional::fractional_integral_oracle;
pub use mie::{
    mie_traces, operator_spectrum, solve_modes, vsh_axisymmetric, IncidentModes,
    ModalCoefficient, ModalSolution, OperatorSpectrum, Polarization,
};
