//! Empirical measures, smooth bump test functions, and distances between an
//! empirical measure and a reference distribution.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::quad::{self, QuadBudget, QuadEstimate};
use crate::sampler::{disk_arc_angle, RootDistribution};

/// Uniform probability measure on a finite list of points (repeats allowed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    points: Vec<Complex64>,
    weight: f64,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("measure", "no points"));
        }
        let weight = 1.0 / points.len() as f64;
        Ok(EmpiricalMeasure { points, weight })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A real function on the plane.
pub trait PlaneFunction: Sync {
    fn eval(&self, z: Complex64) -> f64;
}

/// The bump `exp(1 - 1/(1 - t))`, `t = |z - center|² / radius²`, supported
/// in the closed disk of the given radius and equal to 1 at the centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: Complex64,
    pub radius: f64,
}

fn bump_profile(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t)).exp()
    }
}

impl TestFunction {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(
                "test_function.radius",
                "must be a positive finite number",
            ));
        }
        Ok(TestFunction { center, radius })
    }

    fn t(&self, z: Complex64) -> f64 {
        (z - self.center).norm_sqr() / (self.radius * self.radius)
    }

    pub fn value(&self, z: Complex64) -> f64 {
        bump_profile(self.t(z))
    }

    /// Closed-form Laplacian. With `u = 1/(1-t)`, `g' = -g u²` and
    /// `g'' = g (u⁴ - 2u³)`, so `Δφ = (4/ρ²)(t g'' + g')`.
    pub fn laplacian(&self, z: Complex64) -> f64 {
        let t = self.t(z);
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 / (1.0 - t);
        let g = bump_profile(t);
        let u2 = u * u;
        4.0 / (self.radius * self.radius) * g * (t * (u2 * u2 - 2.0 * u2 * u) - u2)
    }

    /// Wrapper that evaluates to the Laplacian.
    pub fn as_laplacian(self) -> BumpLaplacian {
        BumpLaplacian(self)
    }
}

impl PlaneFunction for TestFunction {
    fn eval(&self, z: Complex64) -> f64 {
        self.value(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpLaplacian(pub TestFunction);

impl PlaneFunction for BumpLaplacian {
    fn eval(&self, z: Complex64) -> f64 {
        self.0.laplacian(z)
    }
}

/// `weight * Σ f(points)`.
pub fn integrate_empirical<F: PlaneFunction + ?Sized>(m: &EmpiricalMeasure, f: &F) -> f64 {
    m.weight * m.points.iter().map(|&z| f.eval(z)).sum::<f64>()
}

/// `∫ φ dμ` for a bump `φ`. Atoms are summed exactly; the circle reduces to
/// an arc integral in the angle, the disk and the Gaussian to radial
/// integrals in polar coordinates about the bump centre.
pub fn integrate_distribution(
    dist: &RootDistribution,
    f: &TestFunction,
    budget: QuadBudget,
) -> QuadEstimate {
    let rho = f.radius;
    match dist {
        RootDistribution::FiniteAtomic { atoms } => {
            QuadEstimate::exact(atoms.iter().map(|a| a.weight * f.value(a.point)).sum())
        }
        RootDistribution::Mixture { components } => components
            .iter()
            .map(|c| integrate_distribution(&c.distribution, f, budget).scaled(c.weight))
            .fold(QuadEstimate::ZERO, QuadEstimate::plus),
        RootDistribution::UniformCircle { radius: a } => {
            let a = *a;
            let d = f.center.norm();
            if d == 0.0 {
                return QuadEstimate::exact(bump_profile(a * a / (rho * rho)));
            }
            // |a e^{iθ} - c|² < ρ²  <=>  cos(θ - α) > C
            let cth = (a * a + d * d - rho * rho) / (2.0 * a * d);
            if cth >= 1.0 {
                return QuadEstimate::ZERO;
            }
            let half = if cth <= -1.0 { PI } else { cth.acos() };
            let alpha = f.center.arg();
            quad::integrate(
                |th| f.value(Complex64::from_polar(a, th)),
                &[alpha - half, alpha, alpha + half],
                budget,
            )
            .scaled(1.0 / TAU)
        }
        RootDistribution::UniformDisk { radius: a } => {
            let a = *a;
            let r = f.center.norm();
            let mut breaks = vec![0.0, rho];
            for b in [(a - r).abs(), a + r] {
                if b > 0.0 && b < rho {
                    breaks.push(b);
                }
            }
            breaks.sort_by(f64::total_cmp);
            quad::integrate(
                |s| bump_profile(s * s / (rho * rho)) * s * disk_arc_angle(a, r, s),
                &breaks,
                budget,
            )
            .scaled(1.0 / (PI * a * a))
        }
        RootDistribution::ComplexGaussian { mean, sigma } => {
            // angular mean of exp(-|c + s e^{iθ} - m|²/σ²) is
            // exp(-(s - d)²/σ²) e^{-x} I_0(x) with x = 2sd/σ²
            let d = (f.center - mean).norm();
            let s2 = sigma * sigma;
            let mut breaks = vec![0.0, rho];
            if d > 0.0 && d < rho {
                breaks.insert(1, d);
            }
            quad::integrate(
                |s| {
                    bump_profile(s * s / (rho * rho))
                        * 2.0
                        * s
                        * (-(s - d) * (s - d) / s2).exp()
                        * quad::bessel_i0e(2.0 * s * d / s2)
                        / s2
                },
                &breaks,
                budget,
            )
        }
    }
}

/// Bumps at radii `scale`, `scale/2`, `scale/4` (with `scale` the support
/// radius, at least 1), centred on square lattices of spacing equal to the
/// radius that cover the support disk enlarged by 2.
pub fn default_family(dist: &RootDistribution) -> Vec<TestFunction> {
    let (c, r0) = dist.support_disk();
    let scale = r0.max(1.0);
    let reach = r0 + 2.0;
    let mut out = Vec::new();
    for level in 0..3 {
        let rho = scale / f64::from(1u32 << level);
        let m = (reach / rho).ceil() as i64;
        for i in -m..=m {
            for j in -m..=m {
                out.push(TestFunction {
                    center: c + Complex64::new(i as f64 * rho, j as f64 * rho),
                    radius: rho,
                });
            }
        }
    }
    out
}

/// Reference integrals of a test-function family against a fixed
/// distribution, computed once and reused across empirical measures.
#[derive(Clone, Debug)]
pub struct DiscrepancyProbe {
    family: Vec<TestFunction>,
    reference: Vec<f64>,
}

impl DiscrepancyProbe {
    pub fn new(
        dist: &RootDistribution,
        family: Vec<TestFunction>,
        budget: QuadBudget,
    ) -> Result<Self> {
        dist.validate()?;
        if family.is_empty() {
            return Err(Error::invalid("family", "no test functions"));
        }
        let est = par::map_slice(&family, |f| integrate_distribution(dist, f, budget));
        if let Some((i, e)) = est.iter().enumerate().find(|(_, e)| !e.converged) {
            return Err(Error::Quadrature(format!(
                "bump {i} (centre {}, radius {}) unconverged, error estimate {:e}",
                family[i].center, family[i].radius, e.error
            )));
        }
        Ok(DiscrepancyProbe {
            family,
            reference: est.into_iter().map(|e| e.value).collect(),
        })
    }

    pub fn with_default_family(dist: &RootDistribution, budget: QuadBudget) -> Result<Self> {
        Self::new(dist, default_family(dist), budget)
    }

    pub fn family(&self) -> &[TestFunction] {
        &self.family
    }

    /// `max_f |∫ f dm - ∫ f dμ|`.
    pub fn discrepancy(&self, m: &EmpiricalMeasure) -> f64 {
        par::map_range(self.family.len(), |i| {
            (integrate_empirical(m, &self.family[i]) - self.reference[i]).abs()
        })
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// One-shot form of [`DiscrepancyProbe::discrepancy`].
pub fn discrepancy(
    m: &EmpiricalMeasure,
    dist: &RootDistribution,
    family: &[TestFunction],
    budget: QuadBudget,
) -> Result<f64> {
    Ok(DiscrepancyProbe::new(dist, family.to_vec(), budget)?.discrepancy(m))
}

fn mean_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let rows = par::map_slice(a, |&x| b.iter().map(|&y| (x - y).norm()).sum::<f64>());
    rows.iter().sum::<f64>() / (a.len() as f64 * b.len() as f64)
}

/// Energy distance `2 E|X - Y| - E|X - X'| - E|Y - Y'|` with all pairs
/// included (V-statistic), so it is non-negative and vanishes for identical
/// point sets.
pub fn energy_distance(m: &EmpiricalMeasure, ref_sample: &[Complex64]) -> Result<f64> {
    if ref_sample.is_empty() {
        return Err(Error::invalid("ref_sample", "no points"));
    }
    let x = m.points();
    // cross term in a fixed argument order so that swapping the two sets
    // reproduces the same rounding
    let key = |s: &[Complex64]| {
        (
            s.len(),
            s.iter()
                .map(|z| (z.re.to_bits(), z.im.to_bits()))
                .collect::<Vec<_>>(),
        )
    };
    let cross = if key(x) <= key(ref_sample) {
        mean_distance(x, ref_sample)
    } else {
        mean_distance(ref_sample, x)
    };
    let (sx, sy) = (mean_distance(x, x), mean_distance(ref_sample, ref_sample));
    // order the self terms too: a - b - c and a - c - b can round apart
    let (lo, hi) = if sx <= sy { (sx, sy) } else { (sy, sx) };
    let v = 2.0 * cross - lo - hi;
    Ok(v.max(0.0))
}
