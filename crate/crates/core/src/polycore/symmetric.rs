use num_complex::Complex64;

use super::logcomplex::LogComplex;
use crate::error::{Error, Result};

/// Elementary symmetric polynomial `e_k(values)` in log-domain arithmetic.
///
/// Runs the recurrence `e_j <- e_j + y_m e_{j-1}` over the inputs, keeping
/// only the `k + 1` running values; cost `O(nk)`.
pub fn elem_sym(values: &[LogComplex], k: usize) -> Result<LogComplex> {
    if k > values.len() {
        return Err(Error::OrderTooLarge {
            order: k,
            degree: values.len(),
        });
    }
    Ok(elem_sym_all(values, k)[k])
}

/// All of `e_0, ..., e_k` over `values` (requires `k <= values.len()`).
pub fn elem_sym_all(values: &[LogComplex], k: usize) -> Vec<LogComplex> {
    let mut e = vec![LogComplex::ZERO; k + 1];
    e[0] = LogComplex::ONE;
    for (m, &y) in values.iter().enumerate() {
        let top = k.min(m + 1);
        for j in (1..=top).rev() {
            e[j] = e[j] + y * e[j - 1];
        }
    }
    e
}

/// `Y_i = 1 / (z - X_i)` in log form. Fails if `z` is one of the roots.
pub fn inverse_distances(roots: &[Complex64], z: Complex64) -> Result<Vec<LogComplex>> {
    roots
        .iter()
        .map(|&x| {
            let d = z - x;
            if d.re == 0.0 && d.im == 0.0 {
                Err(Error::Pole(z))
            } else {
                Ok(LogComplex::from_complex(d).recip())
            }
        })
        .collect()
}

/// `L_n^{(k)}(z) = P_n^{(k)}(z) / (k! P_n(z))`, computed as `e_k` of the
/// values `1 / (z - X_i)`.
pub fn eval_lnk(roots: &[Complex64], z: Complex64, k: usize) -> Result<LogComplex> {
    if k > roots.len() {
        return Err(Error::OrderTooLarge {
            order: k,
            degree: roots.len(),
        });
    }
    if k == 0 {
        return Ok(LogComplex::ONE);
    }
    elem_sym(&inverse_distances(roots, z)?, k)
}

/// `ln|e_k(values)|` by a rescaled plain-complex recurrence.
///
/// Inputs are divided by `max|y| * C(n, k)^{1/k}`, which keeps `e_k` of the
/// scaled magnitudes at most 1, and the scale is added back as a logarithm.
/// If the scaled magnitudes underflow or overflow the log-domain recurrence
/// of [`elem_sym`] is used instead. Much faster than [`elem_sym`] when many
/// evaluations are needed.
pub fn log_abs_elem_sym(values: &[Complex64], k: usize) -> Result<f64> {
    let n = values.len();
    if k > n {
        return Err(Error::OrderTooLarge {
            order: k,
            degree: n,
        });
    }
    if k == 0 {
        return Ok(0.0);
    }
    let smax = values.iter().map(|y| y.norm()).fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let log_binom: f64 = (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum();
    let log_scale = smax.ln() + log_binom / k as f64;
    let inv = (-log_scale).exp();
    let mut e = vec![Complex64::new(0.0, 0.0); k + 1];
    let mut a = vec![0.0; k + 1];
    e[0] = Complex64::new(1.0, 0.0);
    a[0] = 1.0;
    for (m, &y) in values.iter().enumerate() {
        let t = y * inv;
        let ta = t.norm();
        for j in (1..=k.min(m + 1)).rev() {
            let prev = e[j - 1];
            e[j] += t * prev;
            a[j] += ta * a[j - 1];
        }
    }
    if a[k].is_finite() && a[k] > 1e-280 && e[k].norm().is_finite() {
        Ok(e[k].norm().ln() + k as f64 * log_scale)
    } else {
        let logs: Vec<LogComplex> = values
            .iter()
            .map(|&y| LogComplex::from_complex(y))
            .collect();
        Ok(elem_sym(&logs, k)?.log_mag)
    }
}

/// `ln|L_n^{(k)}(z)|` through [`log_abs_elem_sym`]. Fails at a root.
pub fn log_abs_lnk(roots: &[Complex64], z: Complex64, k: usize) -> Result<f64> {
    let ys = roots
        .iter()
        .map(|&x| {
            let d = z - x;
            if d.re == 0.0 && d.im == 0.0 {
                Err(Error::Pole(z))
            } else {
                Ok(d.inv())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    log_abs_elem_sym(&ys, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lc(re: f64, im: f64) -> LogComplex {
        LogComplex::from_complex(Complex64::new(re, im))
    }

    #[test]
    fn binomial_count() {
        let v = vec![lc(1.0, 0.0); 3];
        let e2 = elem_sym(&v, 2).unwrap().to_complex();
        assert!((e2.re - 3.0).abs() < 1e-14 && e2.im.abs() < 1e-14);
    }

    #[test]
    fn pairs_of_one_two_three() {
        // 1*2 + 1*3 + 2*3 = 11
        let v = vec![lc(1.0, 0.0), lc(2.0, 0.0), lc(3.0, 0.0)];
        let e2 = elem_sym(&v, 2).unwrap().to_complex();
        assert!((e2.re - 11.0).abs() < 1e-13 && e2.im.abs() < 1e-13);
    }

    #[test]
    fn empty_product_convention() {
        let v = vec![lc(0.3, 2.0), lc(-1.0, 0.5)];
        assert_eq!(elem_sym(&v, 0).unwrap(), LogComplex::ONE);
        assert_eq!(elem_sym(&[], 0).unwrap(), LogComplex::ONE);
    }

    #[test]
    fn order_beyond_length_is_rejected() {
        let v = vec![lc(1.0, 0.0); 2];
        assert!(matches!(
            elem_sym(&v, 3),
            Err(Error::OrderTooLarge {
                order: 3,
                degree: 2
            })
        ));
    }

    #[test]
    fn lnk_examples() {
        let roots = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(eval_lnk(&roots, z, 0).unwrap(), LogComplex::ONE);
        // Y = -1 and +1 cancel exactly
        assert!(eval_lnk(&roots, z, 1).unwrap().is_zero());
        // single term 1 / (0 - 2)
        let v = eval_lnk(&[Complex64::new(2.0, 0.0)], z, 1)
            .unwrap()
            .to_complex();
        assert!((v - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scaled_log_magnitude_matches_log_domain() {
        let roots: Vec<Complex64> = (0..40)
            .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let z = Complex64::new(0.05, 0.11);
        for k in [1, 2, 5, 17, 40] {
            let a = log_abs_lnk(&roots, z, k).unwrap();
            let b = eval_lnk(&roots, z, k).unwrap().log_mag;
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "k={k}: {a} vs {b}");
        }
        // values far outside double range
        let tiny = vec![Complex64::new(1e-200, 1e-200); 8];
        let want = elem_sym(
            &tiny
                .iter()
                .map(|&y| LogComplex::from_complex(y))
                .collect::<Vec<_>>(),
            8,
        )
        .unwrap()
        .log_mag;
        assert!((log_abs_elem_sym(&tiny, 8).unwrap() - want).abs() < 1e-9);
        let cancel = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        assert_eq!(log_abs_elem_sym(&cancel, 1).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn evaluation_at_a_root_is_a_pole() {
        let roots = [Complex64::new(2.0, 1.0)];
        assert!(matches!(
            eval_lnk(&roots, Complex64::new(2.0, 1.0), 1),
            Err(Error::Pole(_))
        ));
    }
}
