//! Numerical laboratory for radial harmonic analysis on Damek-Ricci spaces
//! and real hyperbolic spaces.
//!
//! The crate is organized bottom-up:
//!
//! * [`space`] - geometry parameters, volume density `A(s)` and its log-derivative
//! * [`specfun`] - complex log-gamma, Bessel functions, the Harish-Chandra
//!   `c`-function and the Plancherel density `|c(lambda)|^-2`
//! * [`spherical`] - spherical function evaluators (ODE oracle, Bessel-series
//!   and plane-wave leading terms, dispatcher) plus per-space calibration
//! * [`quad`] - Gauss-Legendre panels and oscillatory-aware panel budgeting
//! * [`transforms`] - spherical Fourier transform pair, Sobolev and L^q norms,
//!   weak-L^2 quasinorm, Euclidean comparison transforms
//! * [`schrodinger`] - Schrodinger propagator, linearized and maximal operators
//! * [`experiments`] - concentration families, ratio sweeps and the
//!   oscillatory-kernel / global-comparison checks

pub mod experiments;
pub mod quad;
pub mod schrodinger;
pub mod space;
pub mod specfun;
pub mod spherical;
pub mod transforms;

pub use space::SpaceParams;
