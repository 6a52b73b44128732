use num_complex::Complex64;

use super::compensated::CDd;
use super::logcomplex::LogComplex;
use crate::error::{Error, Result};
use crate::par;

/// Below this many roots a product-tree node is expanded sequentially.
const PAR_PRODUCT_CUTOFF: usize = 256;

/// Polynomial in the monomial basis; `coeffs[j]` multiplies `z^j`.
///
/// Each coefficient is stored as a double-double pair: `coeffs` holds the
/// leading `f64` part and `correction` the low-order part, so that
/// `coeffs[j] + correction[j]` carries about 32 significant digits. Plain
/// `f64` consumers (such as the root finder) read `coeffs` only.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCoefficients {
    coeffs: Vec<Complex64>,
    correction: Vec<Complex64>,
    monic: bool,
}

impl PolyCoefficients {
    /// Wraps plain coefficients. Trailing (highest-order) zeros are kept;
    /// callers that need a nonzero leading term should check `leading()`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("polynomial", "empty coefficient list"));
        }
        let monic = *coeffs.last().unwrap() == Complex64::new(1.0, 0.0);
        let correction = vec![Complex64::new(0.0, 0.0); coeffs.len()];
        Ok(PolyCoefficients {
            coeffs,
            correction,
            monic,
        })
    }

    fn from_dd(c: Vec<CDd>) -> Self {
        let coeffs: Vec<Complex64> = c.iter().map(|x| x.hi()).collect();
        let correction = c.iter().map(|x| x.lo()).collect();
        let monic = *coeffs.last().unwrap() == Complex64::new(1.0, 0.0)
            && c.last().unwrap().lo() == Complex64::new(0.0, 0.0);
        PolyCoefficients {
            coeffs,
            correction,
            monic,
        }
    }

    fn dd(&self) -> impl Iterator<Item = CDd> + '_ {
        self.coeffs
            .iter()
            .zip(&self.correction)
            .map(|(&h, &l)| CDd::from_parts(h, l))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Low-order parts of the double-double coefficients.
    pub fn correction(&self) -> &[Complex64] {
        &self.correction
    }

    pub fn is_monic(&self) -> bool {
        self.monic
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }
}

/// Expands `(z - r_1)...(z - r_n)` with a balanced product tree.
///
/// Roots are ordered by angle about their centroid and each node splits
/// its list into even and odd positions, so every subtree spreads around
/// the whole root set. Subtrees of clustered roots would otherwise carry
/// binomial-sized coefficients that cancel only at the top of the tree.
/// The split is fixed, so the output is bit-identical regardless of how
/// subtrees are scheduled.
pub fn coeffs_from_roots(roots: &[Complex64]) -> PolyCoefficients {
    if roots.is_empty() {
        return PolyCoefficients::from_dd(vec![CDd::ONE]);
    }
    let centroid = roots.iter().sum::<Complex64>() / roots.len() as f64;
    let mut order = roots.to_vec();
    order.sort_by(|a, b| {
        let (da, db) = (a - centroid, b - centroid);
        da.arg()
            .total_cmp(&db.arg())
            .then(da.norm().total_cmp(&db.norm()))
            .then(a.re.total_cmp(&b.re))
            .then(a.im.total_cmp(&b.im))
    });
    PolyCoefficients::from_dd(product_tree(&order))
}

fn product_tree(roots: &[Complex64]) -> Vec<CDd> {
    match roots.len() {
        1 => vec![CDd::from_c64(-roots[0]), CDd::ONE],
        len => {
            let even: Vec<Complex64> = roots.iter().step_by(2).copied().collect();
            let odd: Vec<Complex64> = roots.iter().skip(1).step_by(2).copied().collect();
            let (a, b) = if len >= PAR_PRODUCT_CUTOFF {
                par::join(|| product_tree(&even), || product_tree(&odd))
            } else {
                (product_tree(&even), product_tree(&odd))
            };
            multiply(&a, &b)
        }
    }
}

fn multiply(a: &[CDd], b: &[CDd]) -> Vec<CDd> {
    let mut out = vec![CDd::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j] + x * y;
        }
    }
    out
}

/// The `k`-th derivative. The factor `(j+k)!/j!` for each output
/// coefficient is accumulated as the running product `(j+1)(j+2)...(j+k)`.
pub fn derivative(p: &PolyCoefficients, k: usize) -> Result<PolyCoefficients> {
    let d = p.degree();
    if k > d {
        return Err(Error::OrderTooLarge {
            order: k,
            degree: d,
        });
    }
    if k == 0 {
        return Ok(p.clone());
    }
    let c: Vec<CDd> = p.dd().collect();
    let out = (0..=d - k)
        .map(|j| {
            let mut v = c[j + k];
            for i in 1..=k {
                v = v.mul_f64((j + i) as f64);
            }
            v
        })
        .collect();
    Ok(PolyCoefficients::from_dd(out))
}

/// Evaluates `p(z)` in compensated arithmetic and returns it in log form.
///
/// For `|z| > 1` the reversed polynomial is evaluated at `1/z` and the
/// factor `z^degree` is applied in the log domain, so large degrees do not
/// overflow.
pub fn poly_eval(p: &PolyCoefficients, z: Complex64) -> LogComplex {
    let d = p.degree();
    if z.norm() <= 1.0 || d == 0 {
        let zz = CDd::from_c64(z);
        let mut acc = CDd::ZERO;
        for c in p.dd().collect::<Vec<_>>().into_iter().rev() {
            acc = acc * zz + c;
        }
        LogComplex::from_complex(acc.to_c64())
    } else {
        let w = CDd::recip_of(z);
        let mut acc = CDd::ZERO;
        for c in p.dd() {
            acc = acc * w + c;
        }
        let lz = LogComplex::from_complex(z);
        LogComplex::from_complex(acc.to_c64()) * lz.powi(d as u32)
    }
}

/// `ln k!` as a sum of logarithms (exact enough for every `k` in use here,
/// and never overflows).
pub fn log_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}
