//! Numerical laboratory for the zeros of high derivatives of random
//! polynomials `P_n(z) = (z - X_1)...(z - X_n)` with i.i.d. roots.
//!
//! Modules, bottom-up:
//!
//! * [`sampler`]: root measures, reproducible counter-based sampling, and the
//!   inverse-distance moment of a measure.
//! * [`polycore`]: log-domain complex arithmetic, coefficient construction,
//!   differentiation and `L_n^{(k)}(z) = P_n^{(k)}(z) / (k! P_n(z))`.
//! * [`rootfind`]: Aberth-Ehrlich root finding and the empirical measure of
//!   the zeros of `P_n^{(k)}`.
//! * [`measures`]: smooth bump test functions, integration against empirical
//!   and reference measures, discrepancy and energy distance.
//! * [`potential`]: the Poisson kernel and integral, Poisson-Jensen and
//!   distributional-Laplacian residuals, and the log-field statistics.
//! * [`anticonc`]: small-ball probabilities of elementary symmetric
//!   polynomials and the bounds around them.
//! * [`experiment`]: config parsing and the reproducible sweep runner.
//!
//! All logarithms are natural.

pub mod anticonc;
pub mod error;
pub mod experiment;
pub mod measures;
pub mod par;
pub mod polycore;
pub mod potential;
pub mod quad;
pub mod rootfind;
pub mod sampler;

pub use error::{Error, Result};
pub use num_complex::Complex64;
