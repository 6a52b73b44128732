//! Simultaneous root finding and the empirical measure of the zeros of
//! `P_n^{(k)}`.
//!
//! Two evaluation routes feed the same Aberth-Ehrlich iteration:
//!
//! * the coefficient route runs on a [`PolyCoefficients`] with Horner
//!   evaluation ([`all_roots`]);
//! * the implicit route never forms coefficients. It uses
//!   `P^{(k+1)} / P^{(k)} = (k+1) e_{k+1}(Y) / e_k(Y)` with
//!   `Y_i = 1 / (w - X_i)`, which stays well conditioned at degrees where the
//!   monomial coefficients of `P_n` exceed `10^300`. Repeated roots are
//!   handled exactly: a root of multiplicity `m > k` is a zero of `P^{(k)}`
//!   of multiplicity `m - k` and is reported without iteration.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::EmpiricalMeasure;
use crate::par;
use crate::polycore::{coeffs_from_roots, derivative, PolyCoefficients};

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Largest degree for which [`RootRoute::Auto`] uses the coefficient route.
pub const AUTO_COEFFICIENT_MAX_DEGREE: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootRoute {
    /// Coefficients for small polynomials with distinct roots, implicit
    /// otherwise.
    Auto,
    Coefficients,
    Implicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RootFindConfig {
    pub max_iterations: usize,
    /// Bound on the scaled residual for a root to count as converged:
    /// `|p(w)| / Σ|c_j||w|^j` on the coefficient route, `|e_k(Y)|` over its
    /// first-order backward-error bound on the implicit one.
    pub residual_tol: f64,
    pub polish_steps: usize,
    pub route: RootRoute,
}

impl Default for RootFindConfig {
    fn default() -> Self {
        RootFindConfig {
            max_iterations: 200,
            residual_tol: 1e-10,
            polish_steps: 3,
            route: RootRoute::Auto,
        }
    }
}

impl RootFindConfig {
    pub fn validation_errors(&self, path: &str) -> Vec<String> {
        let mut errs = Vec::new();
        if self.max_iterations == 0 {
            errs.push(format!("{path}.max_iterations: must be positive"));
        }
        if !(self.residual_tol.is_finite() && self.residual_tol > 0.0) {
            errs.push(format!(
                "{path}.residual_tol: must be a positive finite number"
            ));
        }
        errs
    }
}

/// All zeros of a polynomial with their scaled residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedRoots {
    pub roots: Vec<Complex64>,
    pub residuals: Vec<f64>,
    /// True iff every residual is within `residual_tol`.
    pub converged: bool,
    pub iterations: usize,
}

impl CertifiedRoots {
    pub fn worst_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    fn finish(roots: Vec<Complex64>, residuals: Vec<f64>, iterations: usize, tol: f64) -> Self {
        let converged = residuals.iter().all(|&r| r <= tol);
        CertifiedRoots {
            roots,
            residuals,
            converged,
            iterations,
        }
    }
}

/// One evaluation of the function whose zeros are sought.
#[derive(Clone, Copy, Debug)]
struct Step {
    /// Newton correction `f / f'`.
    newton: Complex64,
    /// Scaled backward residual.
    residual: f64,
    /// The value is indistinguishable from zero at working precision.
    at_rounding: bool,
}

trait Target: Sync {
    fn step(&self, w: Complex64) -> Step;

    /// Residual reported to callers; may be sharper (and dearer) than the
    /// one used to steer iterations.
    fn residual(&self, w: Complex64) -> f64 {
        self.step(w).residual
    }
}

/// Aberth-Ehrlich with Jacobi updates: every sweep reads the previous sweep's
/// iterates only, so the result does not depend on evaluation order. Roots
/// whose correction reaches rounding level are frozen.
fn aberth<T: Target>(
    target: &T,
    mut z: Vec<Complex64>,
    cfg: &RootFindConfig,
) -> (Vec<Complex64>, usize) {
    let m = z.len();
    let mut active = vec![true; m];
    let mut iterations = 0;
    while iterations < cfg.max_iterations && active.iter().any(|&a| a) {
        iterations += 1;
        let prev = &z;
        let updates: Vec<Option<Complex64>> = par::map_range(m, |i| {
            if !active[i] {
                return None;
            }
            let wi = prev[i];
            let s = target.step(wi);
            if s.at_rounding {
                return Some(wi);
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for (j, &wj) in prev.iter().enumerate() {
                if j != i {
                    sum += (wi - wj).inv();
                }
            }
            let delta = s.newton / (Complex64::new(1.0, 0.0) - s.newton * sum);
            if !delta.re.is_finite() || !delta.im.is_finite() {
                return Some(wi);
            }
            Some(wi - delta)
        });
        let mut next = z.clone();
        for (i, u) in updates.into_iter().enumerate() {
            if let Some(w) = u {
                let moved = (w - z[i]).norm();
                if moved <= 4.0 * f64::EPSILON * w.norm().max(f64::MIN_POSITIVE) {
                    active[i] = false;
                }
                next[i] = w;
            }
        }
        z = next;
    }
    (z, iterations)
}

/// Newton steps, each kept only if it lowers the residual.
fn polish<T: Target>(target: &T, z: &mut [Complex64], steps: usize) -> Vec<f64> {
    par::map_slice(z, |&w0| {
        let mut w = w0;
        let mut s = target.step(w);
        for _ in 0..steps {
            if s.at_rounding {
                break;
            }
            let cand = w - s.newton;
            if !(cand.re.is_finite() && cand.im.is_finite()) {
                break;
            }
            let sc = target.step(cand);
            if sc.residual < s.residual {
                w = cand;
                s = sc;
            } else {
                break;
            }
        }
        (w, target.residual(w))
    })
    .into_iter()
    .zip(z.iter_mut())
    .map(|((w, r), slot)| {
        *slot = w;
        r
    })
    .collect()
}

struct Monomial<'a> {
    c: &'a [Complex64],
}

impl Target for Monomial<'_> {
    fn step(&self, z: Complex64) -> Step {
        let d = self.c.len() - 1;
        let one = Complex64::new(1.0, 0.0);
        let (p, dp, sabs, newton);
        if z.norm() <= 1.0 {
            let (mut a, mut b, mut s) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
            let r = z.norm();
            for &cj in self.c.iter().rev() {
                b = b * z + a;
                a = a * z + cj;
                s = s * r + cj.norm();
            }
            p = a;
            dp = b;
            sabs = s;
            newton = p / dp;
        } else {
            // p(z) = z^d q(w), w = 1/z, q(w) = Σ c_j w^{d-j}
            let w = one / z;
            let r = w.norm();
            let (mut a, mut b, mut s) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
            for &cj in self.c.iter() {
                b = b * w + a;
                a = a * w + cj;
                s = s * r + cj.norm();
            }
            p = a;
            dp = b;
            sabs = s;
            // p / p' = z q / (d q - w q')
            newton = z * p / (p * d as f64 - w * dp);
        }
        let mag = p.norm();
        Step {
            newton,
            residual: if sabs > 0.0 { mag / sabs } else { 0.0 },
            at_rounding: mag <= 4.0 * (d as f64 + 1.0) * f64::EPSILON * sabs,
        }
    }
}

fn initial_circle(center: Complex64, radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|i| center + Complex64::from_polar(radius, 0.4 + GOLDEN_ANGLE * i as f64))
        .collect()
}

/// Starting points from the upper convex hull of `(j, ln|c_j|)`: an edge
/// from `i` to `j` contributes `j - i` points on the circle of radius
/// `(|c_i| / |c_j|)^{1/(j-i)}`, angles advancing by the golden angle. Radii
/// are capped by the Cauchy bound `1 + max|c_j| / |c_d|`.
fn newton_polygon_guesses(c: &[Complex64]) -> Vec<Complex64> {
    let d = c.len() - 1;
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, x)| x.norm() > 0.0)
        .map(|(j, x)| (j, x.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or below the chord from a to p
            let cross = (b.0 - a.0) as f64 * (p.1 - a.1) - (p.0 - a.0) as f64 * (b.1 - a.1);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let cauchy = 1.0 + c[..d].iter().map(|x| x.norm()).fold(0.0, f64::max) / c[d].norm();
    let mut out = Vec::with_capacity(d);
    for w in hull.windows(2) {
        let (i, j) = (w[0].0, w[1].0);
        let radius = ((w[0].1 - w[1].1) / (j - i) as f64).exp().min(cauchy);
        for m in 0..j - i {
            let idx = out.len();
            let angle =
                TAU * m as f64 / (j - i) as f64 + 0.4 + GOLDEN_ANGLE * idx as f64 / d as f64;
            out.push(Complex64::from_polar(radius, angle));
        }
    }
    out
}

/// All `degree(p)` zeros of `p`, with multiplicity, by Aberth-Ehrlich
/// started from Newton-polygon radii (see [`newton_polygon_guesses`]).
/// Exact zero low-order coefficients are deflated as exact zeros at the
/// origin.
pub fn all_roots(p: &PolyCoefficients, cfg: &RootFindConfig) -> Result<CertifiedRoots> {
    let c = p.coeffs();
    let d = p.degree();
    if d < 1 {
        return Err(Error::invalid("polynomial", "degree must be at least 1"));
    }
    if p.leading() == Complex64::new(0.0, 0.0) {
        return Err(Error::invalid("polynomial", "leading coefficient is zero"));
    }
    let zeros_at_origin = c
        .iter()
        .take_while(|x| **x == Complex64::new(0.0, 0.0))
        .count();
    let reduced = &c[zeros_at_origin..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    let mut residuals = vec![0.0; zeros_at_origin];
    let rd = reduced.len() - 1;
    if rd == 0 {
        return Ok(CertifiedRoots::finish(
            roots,
            residuals,
            0,
            cfg.residual_tol,
        ));
    }
    let lead = reduced[rd];
    let target = Monomial { c: reduced };
    let (mut z, iterations) = if rd == 1 {
        (vec![-reduced[0] / lead], 0)
    } else {
        aberth(&target, newton_polygon_guesses(reduced), cfg)
    };
    let res = polish(&target, &mut z, cfg.polish_steps);
    roots.extend(z);
    residuals.extend(res);
    Ok(CertifiedRoots::finish(
        roots,
        residuals,
        iterations,
        cfg.residual_tol,
    ))
}

/// Zeros of `P^{(k)}` that are not shared with `P`, seen through
/// `f = P^{(k)} / Π (w - a)^{m_a - k}` over atoms of multiplicity `m_a > k`.
struct Implicit<'a> {
    roots: &'a [Complex64],
    k: usize,
    pinned: Vec<(Complex64, usize)>,
    /// `ln C(n, k+1) / (k+1)`, used to keep `e_j(Y / s)` near unit scale.
    log_binom_root: f64,
}

impl Implicit<'_> {
    /// `e_0..=e_top` of `t = Y / s`, with `e_top(|t|)` and, if requested,
    /// the first-order perturbation bound `Σ_S Π_{i∈S}|t_i| Σ_{i∈S} η_i` of
    /// `e_top`, where `η_i = (|w| + |X_i|) / |w - X_i|` is the relative
    /// condition of `Y_i` under relative perturbation of `w` and `X_i`.
    fn sums(&self, w: Complex64, skip: Option<usize>, top: usize, with_bound: bool) -> Sums {
        let wa = w.norm();
        let ys: Vec<(Complex64, f64)> = self
            .roots
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, &x)| {
                let d = w - x;
                let inv = 1.0 / d.norm_sqr();
                let y = Complex64::new(d.re * inv, -d.im * inv);
                (y, inv.sqrt())
            })
            .collect();
        let mean_abs = ys.iter().map(|y| y.1).sum::<f64>() / ys.len().max(1) as f64;
        let s = (mean_abs * self.log_binom_root.exp()).max(f64::MIN_POSITIVE);
        let inv_s = 1.0 / s;
        let mut e = vec![Complex64::new(0.0, 0.0); top + 1];
        let mut a = vec![0.0; top + 1];
        e[0] = Complex64::new(1.0, 0.0);
        a[0] = 1.0;
        let mut b = if with_bound {
            vec![0.0; top + 1]
        } else {
            Vec::new()
        };
        for (m, &(y, ya)) in ys.iter().enumerate() {
            let t = y * inv_s;
            let ta = ya * inv_s;
            if with_bound {
                let eta = (wa
                    + self.roots[if skip.is_some_and(|k| m >= k) {
                        m + 1
                    } else {
                        m
                    }]
                    .norm())
                    * ya;
                for j in (1..=top).rev() {
                    b[j] += ta * (b[j - 1] + eta * a[j - 1]);
                }
            }
            for j in (1..=top).rev() {
                let prev = e[j - 1];
                e[j] += t * prev;
                a[j] += ta * a[j - 1];
            }
        }
        Sums {
            a,
            b_top: if with_bound { b[top] } else { f64::NAN },
            e,
            s,
        }
    }
}

struct Sums {
    e: Vec<Complex64>,
    a: Vec<f64>,
    b_top: f64,
    s: f64,
}

impl Target for Implicit<'_> {
    fn step(&self, w: Complex64) -> Step {
        let k = self.k;
        let Sums { e, a, s, .. } = self.sums(w, None, k + 1, false);
        let ek = e[k];
        if ek == Complex64::new(0.0, 0.0) {
            return Step {
                newton: Complex64::new(0.0, 0.0),
                residual: 0.0,
                at_rounding: true,
            };
        }
        let mut logder = e[k + 1] * ((k + 1) as f64 * s) / ek;
        for &(x, d) in &self.pinned {
            logder -= d as f64 / (w - x);
        }
        let scale = a[k];
        let n = self.roots.len() as f64;
        let mag = ek.norm();
        Step {
            newton: logder.inv(),
            residual: mag / scale,
            at_rounding: mag <= 4.0 * (n + k as f64) * f64::EPSILON * scale,
        }
    }

    fn residual(&self, w: Complex64) -> f64 {
        let sm = self.sums(w, None, self.k, true);
        let ek = sm.e[self.k].norm();
        if ek == 0.0 {
            0.0
        } else {
            ek / sm.b_top
        }
    }
}

fn log_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// Distinct root values (exact equality) with multiplicities, in order of
/// first appearance.
fn group_exact(roots: &[Complex64]) -> Vec<(Complex64, usize, usize)> {
    let mut idx: Vec<usize> = (0..roots.len()).collect();
    idx.sort_by(|&a, &b| {
        roots[a]
            .re
            .total_cmp(&roots[b].re)
            .then(roots[a].im.total_cmp(&roots[b].im))
            .then(a.cmp(&b))
    });
    let mut groups: Vec<(Complex64, usize, usize)> = Vec::new();
    for i in idx {
        match groups.last_mut() {
            Some(g) if g.0 == roots[i] => g.1 += 1,
            _ => groups.push((roots[i], 1, i)),
        }
    }
    groups.sort_by_key(|g| g.2);
    groups
}

fn implicit_zeros(roots: &[Complex64], k: usize, cfg: &RootFindConfig) -> CertifiedRoots {
    let n = roots.len();
    let groups = group_exact(roots);
    let pinned: Vec<(Complex64, usize)> = groups
        .iter()
        .filter(|g| g.1 > k)
        .map(|g| (g.0, g.1 - k))
        .collect();
    let pinned_count: usize = pinned.iter().map(|p| p.1).sum();
    let free = n - k - pinned_count;
    let target = Implicit {
        roots,
        k,
        pinned,
        log_binom_root: log_binomial(n, k + 1) / (k + 1) as f64,
    };

    let mut out_roots = Vec::with_capacity(n - k);
    let mut out_res = Vec::with_capacity(n - k);
    for &(x, d) in &target.pinned {
        out_roots.extend(std::iter::repeat_n(x, d));
        out_res.extend(std::iter::repeat_n(0.0, d));
    }
    if free == 0 {
        return CertifiedRoots::finish(out_roots, out_res, 0, cfg.residual_tol);
    }

    let guesses = implicit_guesses(&target, &groups, free);
    let (mut z, iterations) = aberth(&target, guesses, cfg);
    let res = polish(&target, &mut z, cfg.polish_steps);
    out_roots.extend(z);
    out_res.extend(res);
    CertifiedRoots::finish(out_roots, out_res, iterations, cfg.residual_tol)
}

/// Starting points for the free zeros. Near a simple root `x_i` of `P`,
/// `e_k(Y) = 0` gives `w ≈ x_i - e_{k-1}(Y') / e_k(Y')` with `Y'` the other
/// inverse distances at `x_i`; the `free` candidates with the smallest shifts
/// are kept, and any shortfall is filled from a circle around the roots.
fn implicit_guesses(
    target: &Implicit<'_>,
    groups: &[(Complex64, usize, usize)],
    free: usize,
) -> Vec<Complex64> {
    let k = target.k;
    let roots = target.roots;
    let centroid = roots.iter().sum::<Complex64>() / roots.len() as f64;
    let spread = roots
        .iter()
        .map(|x| (x - centroid).norm())
        .fold(0.0, f64::max);
    let scale = spread.max(1e-3);

    let mut cands: Vec<(f64, usize, Complex64)> = par::map_range(groups.len(), |g| {
        let (x, mult, first) = groups[g];
        if mult > 1 {
            let off = Complex64::from_polar(0.05 * scale, 0.4 + GOLDEN_ANGLE * g as f64);
            return (f64::INFINITY, g, x + off);
        }
        let Sums { e, s, .. } = target.sums(x, Some(first), k, false);
        let shift = -e[k - 1] / (e[k] * s);
        if shift.re.is_finite() && shift.im.is_finite() && shift.norm() > 0.0 {
            (shift.norm(), g, x + shift)
        } else {
            let off = Complex64::from_polar(0.05 * scale, 0.4 + GOLDEN_ANGLE * g as f64);
            (f64::INFINITY, g, x + off)
        }
    });
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut guesses: Vec<Complex64> = cands.into_iter().take(free).map(|c| c.2).collect();
    if guesses.len() < free {
        let extra = free - guesses.len();
        guesses.extend(initial_circle(centroid, 1.1 * scale + 1e-3, extra));
    }
    separate(&mut guesses, roots, scale);
    guesses
}

/// Nudges guesses that coincide with a root or with an earlier guess.
fn separate(guesses: &mut [Complex64], roots: &[Complex64], scale: f64) {
    let mut sorted: Vec<usize> = (0..guesses.len()).collect();
    sorted.sort_by(|&a, &b| guesses[a].re.total_cmp(&guesses[b].re));
    let eps = 1e-7 * scale;
    for (turn, w) in sorted.windows(2).enumerate() {
        if guesses[w[0]] == guesses[w[1]] {
            guesses[w[1]] += Complex64::from_polar(eps, GOLDEN_ANGLE * (turn + 1) as f64);
        }
    }
    for (i, g) in guesses.iter_mut().enumerate() {
        if roots.contains(g) {
            *g += Complex64::from_polar(eps, TAU * 0.3 + GOLDEN_ANGLE * i as f64);
        }
    }
}

/// Zeros of `P^{(k)}` for `P` with the given roots, `0 <= k < n`. For
/// `k = 0` the roots themselves are returned.
pub fn derivative_zeros(
    roots: &[Complex64],
    k: usize,
    cfg: &RootFindConfig,
) -> Result<CertifiedRoots> {
    let n = roots.len();
    if k >= n {
        return Err(Error::OrderTooLarge {
            order: k,
            degree: n,
        });
    }
    if roots
        .iter()
        .any(|x| !(x.re.is_finite() && x.im.is_finite()))
    {
        return Err(Error::invalid("roots", "non-finite root"));
    }
    if k == 0 {
        return Ok(CertifiedRoots::finish(
            roots.to_vec(),
            vec![0.0; n],
            0,
            cfg.residual_tol,
        ));
    }
    let coefficient_route = match cfg.route {
        RootRoute::Coefficients => true,
        RootRoute::Implicit => false,
        RootRoute::Auto => n <= AUTO_COEFFICIENT_MAX_DEGREE && group_exact(roots).len() == n,
    };
    if coefficient_route {
        let p = derivative(&coeffs_from_roots(roots), k)?;
        all_roots(&p, cfg)
    } else {
        Ok(implicit_zeros(roots, k, cfg))
    }
}

/// The empirical measure `μ_n^{(k)}`: the `n - k` zeros of `P^{(k)}`, each
/// with weight `1 / (n - k)`.
pub fn derivative_zero_measure(
    roots: &[Complex64],
    k: usize,
    cfg: &RootFindConfig,
) -> Result<EmpiricalMeasure> {
    let z = derivative_zeros(roots, k, cfg)?;
    if !z.converged {
        return Err(Error::NonConvergence {
            worst_residual: z.worst_residual(),
            iterations: z.iterations,
        });
    }
    EmpiricalMeasure::new(z.roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_roots, RootDistribution, SeedSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn difference_of_squares_roots() {
        let p = PolyCoefficients::new(vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let r = all_roots(&p, &RootFindConfig::default()).unwrap();
        assert!(r.converged);
        assert!(r.residuals.iter().all(|&x| x <= 1e-12));
        let s = sorted_by_re(r.roots);
        assert!((s[0] - c(-1.0, 0.0)).norm() < 1e-12 && (s[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cubic_with_known_factorisation() {
        let p = PolyCoefficients::new(vec![c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        let s = sorted_by_re(all_roots(&p, &RootFindConfig::default()).unwrap().roots);
        for (r, want) in s.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - c(want, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn double_root_within_loose_tolerance() {
        // (z - i)^2 = z^2 - 2iz - 1
        let p = PolyCoefficients::new(vec![c(-1.0, 0.0), c(0.0, -2.0), c(1.0, 0.0)]).unwrap();
        let r = all_roots(&p, &RootFindConfig::default()).unwrap();
        assert_eq!(r.roots.len(), 2);
        assert!(
            r.roots.iter().all(|z| (z - c(0.0, 1.0)).norm() < 1e-5),
            "{:?}",
            r.roots
        );
    }

    #[test]
    fn degree_zero_is_rejected() {
        let p = PolyCoefficients::new(vec![c(1.0, 0.0)]).unwrap();
        assert!(all_roots(&p, &RootFindConfig::default()).is_err());
    }

    #[test]
    fn derivative_measure_examples() {
        let cfg = RootFindConfig::default();
        let m = derivative_zero_measure(&[c(1.0, 0.0), c(-1.0, 0.0)], 1, &cfg).unwrap();
        assert_eq!(m.points().len(), 1);
        assert!(m.points()[0].norm() < 1e-14);
        assert_eq!(m.weight(), 1.0);
        // P'' = 6z - 12
        let m = derivative_zero_measure(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], 2, &cfg).unwrap();
        assert!((m.points()[0] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn roots_of_unity_have_all_critical_points_at_origin() {
        // P = z^n - 1, P' = n z^{n-1}; n = 2 and 4 give exactly representable roots
        let cfg = RootFindConfig::default();
        for roots in [
            vec![c(1.0, 0.0), c(-1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)],
        ] {
            let n = roots.len();
            let m = derivative_zero_measure(&roots, 1, &cfg).unwrap();
            assert_eq!(m.points().len(), n - 1);
            assert!(
                m.points().iter().all(|z| z.norm() <= 1e-8),
                "{:?}",
                m.points()
            );
        }
    }

    #[test]
    fn repeated_atoms_are_exact_zeros() {
        let a = c(0.5, -0.25);
        let roots = vec![a; 30];
        let cfg = RootFindConfig::default();
        for k in 1..5 {
            let z = derivative_zeros(&roots, k, &cfg).unwrap();
            assert_eq!(z.roots.len(), 30 - k);
            assert!(z.roots.iter().all(|&w| w == a));
        }
        // two atoms of multiplicity 20: P' has a single free zero at the
        // weighted midpoint
        let mut two = vec![c(-1.0, 0.0); 20];
        two.extend(vec![c(1.0, 0.0); 20]);
        let z = derivative_zeros(&two, 1, &cfg).unwrap();
        assert!(z.converged);
        let free: Vec<_> = z.roots.iter().filter(|w| w.re.abs() != 1.0).collect();
        assert_eq!(free.len(), 1);
        assert!(free[0].norm() < 1e-12);
    }

    #[test]
    fn order_must_be_below_root_count() {
        let roots = [c(0.0, 0.0), c(1.0, 0.0)];
        assert!(derivative_zeros(&roots, 2, &RootFindConfig::default()).is_err());
    }

    #[test]
    fn routes_agree_on_moderate_degree() {
        let d = RootDistribution::complex_gaussian(c(0.0, 0.0), 1.0);
        for seed in 0..5 {
            let roots = sample_roots(&d, 14, SeedSpec::new(3, seed)).unwrap();
            for k in [1, 2, 4] {
                let coef = RootFindConfig {
                    route: RootRoute::Coefficients,
                    ..Default::default()
                };
                let imp = RootFindConfig {
                    route: RootRoute::Implicit,
                    ..Default::default()
                };
                let a = derivative_zeros(&roots, k, &coef).unwrap();
                let b = derivative_zeros(&roots, k, &imp).unwrap();
                assert!(a.converged && b.converged);
                for w in &a.roots {
                    let nearest = b
                        .roots
                        .iter()
                        .map(|v| (v - w).norm())
                        .fold(f64::INFINITY, f64::min);
                    assert!(nearest < 1e-9, "seed {seed} k {k}: {nearest}");
                }
            }
        }
    }

    #[test]
    fn large_degree_implicit_route_converges() {
        let d = RootDistribution::uniform_circle(1.0);
        let roots = sample_roots(&d, 800, SeedSpec::new(9, 0)).unwrap();
        let z = derivative_zeros(&roots, 3, &RootFindConfig::default()).unwrap();
        assert!(z.converged, "worst residual {}", z.worst_residual());
        assert_eq!(z.roots.len(), 797);
    }
}
