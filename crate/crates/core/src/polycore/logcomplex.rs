//! Complex numbers stored in polar log form.
//!
//! `L_n^{(k)}` routinely takes magnitudes like `e^{±εn}` with `n` in the
//! thousands, far outside the `f64` range, so these values are carried as
//! `(ln|x|, arg x)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Mul, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex value `exp(log_mag) * exp(i * arg)`.
///
/// `log_mag == -inf` encodes zero; `arg` is kept in `(-π, π]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_mag: f64,
    pub arg: f64,
}

/// Wraps an angle in `(-2π, 2π]`-ish range into `(-π, π]`.
#[inline]
pub(crate) fn wrap_angle(mut a: f64) -> f64 {
    if a > PI || a <= -PI {
        a = a.rem_euclid(TAU);
        if a > PI {
            a -= TAU;
        }
    }
    a
}

/// `exp(i d)` with exact values on the axes, so that real and purely
/// imaginary sums cancel exactly.
#[inline]
fn unit_phase(d: f64) -> Complex64 {
    let d = wrap_angle(d);
    if d == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if d == PI {
        Complex64::new(-1.0, 0.0)
    } else if d == FRAC_PI_2 {
        Complex64::new(0.0, 1.0)
    } else if d == -FRAC_PI_2 {
        Complex64::new(0.0, -1.0)
    } else {
        let (s, c) = d.sin_cos();
        Complex64::new(c, s)
    }
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mag: f64::NEG_INFINITY,
        arg: 0.0,
    };
    pub const ONE: LogComplex = LogComplex {
        log_mag: 0.0,
        arg: 0.0,
    };

    pub fn new(log_mag: f64, arg: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex {
            log_mag,
            arg: wrap_angle(arg),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        let arg = z.im.atan2(z.re);
        LogComplex {
            log_mag: z.re.hypot(z.im).ln(),
            arg: if arg == -PI { PI } else { arg },
        }
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_complex(Complex64::new(x, 0.0))
    }

    /// Converts back to an ordinary complex number. Overflows to infinity
    /// or underflows to zero outside the `f64` range.
    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let r = self.log_mag.exp();
        let u = unit_phase(self.arg);
        Complex64::new(r * u.re, r * u.im)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    /// Multiplicative inverse; the inverse of zero has `log_mag = +inf`.
    pub fn recip(self) -> Self {
        if self.is_zero() {
            return LogComplex {
                log_mag: f64::INFINITY,
                arg: 0.0,
            };
        }
        LogComplex {
            log_mag: -self.log_mag,
            arg: wrap_angle(-self.arg),
        }
    }

    /// Multiplies by `exp(s)` for real `s`.
    pub fn scale_log(self, s: f64) -> Self {
        if self.is_zero() {
            return self;
        }
        LogComplex {
            log_mag: self.log_mag + s,
            arg: self.arg,
        }
    }

    /// `self^p` for a non-negative integer power.
    pub fn powi(self, p: u32) -> Self {
        if p == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return self;
        }
        LogComplex::new(self.log_mag * p as f64, self.arg * p as f64)
    }

    /// `|self / other - 1|`, the relative difference measured in the
    /// direction of `other`. Zero when both are zero, infinite when only
    /// `other` is.
    pub fn relative_diff(self, other: Self) -> f64 {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => 0.0,
            (_, true) => f64::INFINITY,
            (true, false) => 1.0,
            _ => {
                let dl = self.log_mag - other.log_mag;
                let da = wrap_angle(self.arg - other.arg);
                // exp(dl + i da) - 1 without cancellation for small dl, da
                let re = dl.exp_m1() * da.cos() - 2.0 * (0.5 * da).sin().powi(2);
                let im = dl.exp() * da.sin();
                re.hypot(im)
            }
        }
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;

    #[inline]
    fn mul(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() || rhs.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex {
            log_mag: self.log_mag + rhs.log_mag,
            arg: wrap_angle(self.arg + rhs.arg),
        }
    }
}

impl Add for LogComplex {
    type Output = LogComplex;

    /// Factors out the operand with the larger magnitude, so the only
    /// exponential evaluated is `exp(smaller - larger) <= 1`.
    #[inline]
    fn add(self, rhs: LogComplex) -> LogComplex {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return rhs;
        }
        let (big, small) = if self.log_mag >= rhs.log_mag {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let ratio = (small.log_mag - big.log_mag).exp();
        let u = unit_phase(small.arg - big.arg);
        let w = Complex64::new(1.0 + ratio * u.re, ratio * u.im);
        if w.re == 0.0 && w.im == 0.0 {
            return LogComplex::ZERO;
        }
        LogComplex {
            log_mag: big.log_mag + w.re.hypot(w.im).ln(),
            arg: wrap_angle(big.arg + w.im.atan2(w.re)),
        }
    }
}

impl Neg for LogComplex {
    type Output = LogComplex;

    fn neg(self) -> LogComplex {
        if self.is_zero() {
            return self;
        }
        LogComplex {
            log_mag: self.log_mag,
            arg: wrap_angle(self.arg + PI),
        }
    }
}

impl From<Complex64> for LogComplex {
    fn from(z: Complex64) -> Self {
        LogComplex::from_complex(z)
    }
}
