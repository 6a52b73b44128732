//! Double-double complex arithmetic built from error-free transformations.
//!
//! Used for coefficient construction and Horner evaluation, where plain
//! `f64` loses up to `log10(Σ|c_j||z|^j / |p(z)|)` digits: around degree 60
//! with Gaussian roots that is already more than seven.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> Dd {
        let (p, e) = two_prod(self.hi, x);
        let (hi, lo) = quick_two_sum(p, e + self.lo * x);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Complex number with double-double parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub const ZERO: CDd = CDd {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };
    pub const ONE: CDd = CDd {
        re: Dd { hi: 1.0, lo: 0.0 },
        im: Dd::ZERO,
    };

    #[inline]
    pub fn from_c64(z: Complex64) -> Self {
        CDd {
            re: Dd::from_f64(z.re),
            im: Dd::from_f64(z.im),
        }
    }

    /// Builds `hi + lo` from two complex parts.
    #[inline]
    pub fn from_parts(hi: Complex64, lo: Complex64) -> Self {
        CDd {
            re: Dd::from_f64(hi.re) + Dd::from_f64(lo.re),
            im: Dd::from_f64(hi.im) + Dd::from_f64(lo.im),
        }
    }

    #[inline]
    pub fn hi(self) -> Complex64 {
        Complex64::new(self.re.hi, self.im.hi)
    }

    #[inline]
    pub fn lo(self) -> Complex64 {
        Complex64::new(self.re.lo, self.im.lo)
    }

    #[inline]
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> CDd {
        CDd {
            re: self.re.mul_f64(x),
            im: self.im.mul_f64(x),
        }
    }

    /// `1 / z` to double-double accuracy via one Newton correction of the
    /// `f64` reciprocal.
    pub fn recip_of(z: Complex64) -> CDd {
        let w0 = CDd::from_c64(z.inv());
        // r = 1 - z * w0, then w = w0 + w0 * r
        let r = CDd::ONE + -(CDd::from_c64(z) * w0);
        w0 + w0 * r
    }
}

impl Add for Dd {
    type Output = Dd;

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;

    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;

    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }
}

impl Mul for Dd {
    type Output = Dd;

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Add for CDd {
    type Output = CDd;

    #[inline]
    fn add(self, o: CDd) -> CDd {
        CDd {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }
}

impl Neg for CDd {
    type Output = CDd;

    #[inline]
    fn neg(self) -> CDd {
        CDd {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }
}

impl Mul for CDd {
    type Output = CDd;

    #[inline]
    fn mul(self, o: CDd) -> CDd {
        CDd {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }
}
