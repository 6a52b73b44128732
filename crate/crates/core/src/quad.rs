//! One-dimensional quadrature used by the measure and moment integrals.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Limits for adaptive quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadBudget {
    /// Target absolute error of the whole integral.
    pub abs_tol: f64,
    /// Maximum bisection depth of adaptive Gauss-Legendre, and maximum number
    /// of doublings of periodic trapezoid rules.
    pub max_depth: u32,
}

impl Default for QuadBudget {
    fn default() -> Self {
        QuadBudget {
            abs_tol: 1e-10,
            max_depth: 40,
        }
    }
}

/// A quadrature result with its error estimate; `converged` is false when
/// the budget ran out before the tolerance was met.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl QuadEstimate {
    pub const ZERO: QuadEstimate = QuadEstimate {
        value: 0.0,
        error: 0.0,
        converged: true,
    };

    pub fn exact(value: f64) -> Self {
        QuadEstimate {
            value,
            error: 0.0,
            converged: true,
        }
    }

    pub fn plus(self, o: QuadEstimate) -> QuadEstimate {
        QuadEstimate {
            value: self.value + o.value,
            error: self.error + o.error,
            converged: self.converged && o.converged,
        }
    }

    pub fn scaled(self, w: f64) -> QuadEstimate {
        QuadEstimate {
            value: self.value * w,
            error: self.error * w.abs(),
            converged: self.converged,
        }
    }
}

const GL_ORDER: usize = 15;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre polynomial.
fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, 0.0);
                for j in 0..n {
                    let p2 = p1;
                    p1 = p0;
                    p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
                }
                dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
                let dz = p0 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
            w[n - 1 - i] = w[i];
        }
        (x, w)
    })
}

fn gl_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = gauss_legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(w)
        .map(|(&xi, &wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

/// `floor` is the rounding level of the whole integral: halving `tol` per
/// level would otherwise ask for accuracy below it near kinks.
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    floor: f64,
    depth: u32,
) -> QuadEstimate {
    let m = 0.5 * (a + b);
    let left = gl_panel(f, a, m);
    let right = gl_panel(f, m, b);
    let err = (left + right - whole).abs();
    if err <= tol.max(floor) || m <= a || m >= b {
        return QuadEstimate {
            value: left + right,
            error: err,
            converged: true,
        };
    }
    if depth == 0 {
        return QuadEstimate {
            value: left + right,
            error: err,
            converged: false,
        };
    }
    adapt(f, a, m, left, 0.5 * tol, floor, depth - 1).plus(adapt(
        f,
        m,
        b,
        right,
        0.5 * tol,
        floor,
        depth - 1,
    ))
}

/// Adaptive Gauss-Legendre over `[breaks[0], breaks[last]]`, treating each
/// interior breakpoint as a segment boundary (place kinks there).
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], budget: QuadBudget) -> QuadEstimate {
    let segments: Vec<(f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    if segments.is_empty() {
        return QuadEstimate::ZERO;
    }
    let tol = budget.abs_tol / segments.len() as f64;
    let panels: Vec<f64> = segments.iter().map(|&(a, b)| gl_panel(&f, a, b)).collect();
    let floor = 16.0 * f64::EPSILON * panels.iter().map(|p| p.abs()).sum::<f64>();
    segments
        .into_iter()
        .zip(panels)
        .map(|((a, b), whole)| adapt(&f, a, b, whole, tol, floor, budget.max_depth))
        .fold(QuadEstimate::ZERO, QuadEstimate::plus)
}

/// Mean of a `2π`-periodic function, `(1/2π) ∫_0^{2π} f`, by trapezoid rules
/// doubled until two successive rules agree.
pub fn periodic_mean<F: Fn(f64) -> f64>(f: F, budget: QuadBudget) -> QuadEstimate {
    let mut n = 16usize;
    let mut prev = trapezoid_mean(&f, n, 0.0);
    for _ in 0..budget.max_depth.min(20) {
        // reuse old nodes: the doubled rule is the average of the old rule
        // and the rule on the shifted midpoints
        let mid = trapezoid_mean(&f, n, PI / n as f64);
        let next = 0.5 * (prev + mid);
        n *= 2;
        let err = (next - prev).abs();
        if err <= budget.abs_tol {
            return QuadEstimate {
                value: next,
                error: err,
                converged: true,
            };
        }
        prev = next;
    }
    QuadEstimate {
        value: prev,
        error: f64::NAN,
        converged: false,
    }
}

fn trapezoid_mean<F: Fn(f64) -> f64>(f: &F, n: usize, offset: f64) -> f64 {
    let h = 2.0 * PI / n as f64;
    (0..n).map(|i| f(offset + i as f64 * h)).sum::<f64>() / n as f64
}

/// Exponentially scaled modified Bessel function `e^{-x} I_0(x)`, `x >= 0`.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= 25.0 {
        // power series Σ (x²/4)^k / (k!)², scaled by e^{-x}
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // asymptotic expansion Σ ((2k-1)!!)² / (k! (8x)^k)
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            let kf = k as f64;
            let next = term * (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// Complete elliptic integral of the first kind `K` in terms of the
/// complementary modulus `k' = sqrt(1 - k²)`, via the AGM.
pub fn elliptic_k_complementary(kp: f64) -> f64 {
    let (mut a, mut b) = (1.0f64, kp);
    for _ in 0..60 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    PI / (2.0 * a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let r = integrate(
            |x| x.powi(7) - 3.0 * x * x,
            &[0.0, 2.0],
            QuadBudget::default(),
        );
        assert!((r.value - (32.0 - 8.0)).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn handles_integrable_endpoint_singularity() {
        let r = integrate(|x| x.ln(), &[0.0, 1.0], QuadBudget::default());
        assert!((r.value + 1.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn periodic_mean_of_cosine_power() {
        // mean of cos² = 1/2
        let r = periodic_mean(|t| t.cos().powi(2), QuadBudget::default());
        assert!((r.value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn bessel_matches_integral_definition() {
        for &x in &[0.0, 0.5, 3.0, 24.9, 25.1, 80.0, 400.0] {
            let direct = periodic_mean(
                |t: f64| (x * (t.cos() - 1.0)).exp(),
                QuadBudget {
                    abs_tol: 1e-15,
                    max_depth: 20,
                },
            );
            assert!((bessel_i0e(x) - direct.value).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn elliptic_k_at_zero_modulus() {
        assert!((elliptic_k_complementary(1.0) - PI / 2.0).abs() < 1e-15);
        // K(1/√2) = Γ(1/4)² / (4√π) ≈ 1.8540746773013719
        let kp = (0.5f64).sqrt();
        assert!((elliptic_k_complementary(kp) - 1.854_074_677_301_372).abs() < 1e-14);
    }
}
