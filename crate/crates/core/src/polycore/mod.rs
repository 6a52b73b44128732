//! Polynomial construction, differentiation and overflow-safe evaluation of
//! `L_n^{(k)}(z) = P_n^{(k)}(z) / (k! P_n(z))`.

pub mod compensated;
mod logcomplex;
mod poly;
mod symmetric;

pub use logcomplex::LogComplex;
pub use poly::{coeffs_from_roots, derivative, log_factorial, poly_eval, PolyCoefficients};
pub use symmetric::{
    elem_sym, elem_sym_all, eval_lnk, inverse_distances, log_abs_elem_sym, log_abs_lnk,
};

use num_complex::Complex64;

use crate::error::Result;

/// `P^{(k)}(z) / (k! P(z))` through the coefficient basis: expand, differentiate,
/// evaluate both polynomials, divide. An independent route to [`eval_lnk`].
pub fn lnk_via_coefficients(roots: &[Complex64], z: Complex64, k: usize) -> Result<LogComplex> {
    let p = coeffs_from_roots(roots);
    let dk = derivative(&p, k)?;
    let num = poly_eval(&dk, z);
    let den = poly_eval(&p, z);
    if den.is_zero() {
        return Err(crate::error::Error::Pole(z));
    }
    Ok((num * den.recip()).scale_log(-log_factorial(k)))
}
