//! The log-field `(1/n) log|L_n^{(k)}|`, Poisson integrals over a circle,
//! and numerical checks of the Poisson-Jensen and distributional-Laplacian
//! identities.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::TestFunction;
use crate::par;
use crate::polycore::{eval_lnk, log_abs_lnk};
use crate::rootfind::{derivative_zeros, RootFindConfig};

/// Minimum distance kept between singularities of `log|L|` and the circle
/// `|w| = R` or quadrature nodes on it.
pub const CIRCLE_CLEARANCE: f64 = 1e-6;

/// A root set with the zeros of its `k`-th derivative, computed once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LnkProblem {
    pub roots: Vec<Complex64>,
    pub k: usize,
    /// Zeros of `P^{(k)}`; for `k = 0` these are the roots themselves.
    pub zeros: Vec<Complex64>,
}

impl LnkProblem {
    pub fn new(roots: Vec<Complex64>, k: usize, cfg: &RootFindConfig) -> Result<Self> {
        let z = derivative_zeros(&roots, k, cfg)?;
        if !z.converged {
            return Err(Error::NonConvergence {
                worst_residual: z.worst_residual(),
                iterations: z.iterations,
            });
        }
        Ok(LnkProblem {
            roots,
            k,
            zeros: z.roots,
        })
    }

    pub fn n(&self) -> usize {
        self.roots.len()
    }

    fn singularities(&self) -> impl Iterator<Item = &Complex64> {
        self.roots.iter().chain(&self.zeros)
    }
}

/// Inner radius `r` (where `z` may range) and outer radius `R` (the circle
/// carrying the Poisson integral).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusConfig {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
}

fn default_quad_nodes() -> usize {
    4096
}

impl AnnulusConfig {
    pub fn new(r: f64, big_r: f64, quad_nodes: usize) -> Result<Self> {
        let cfg = AnnulusConfig {
            r,
            big_r,
            quad_nodes,
        };
        let errs = cfg.validation_errors("annulus");
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errs))
        }
    }

    /// `R = 2 (1 + max|root|)`, moved outwards in steps of 0.1% until every
    /// root and derivative zero is at least [`CIRCLE_CLEARANCE`] from the
    /// circle.
    pub fn for_problem(problem: &LnkProblem, r: f64, quad_nodes: usize) -> Result<Self> {
        let rmax = problem.roots.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let mut cfg = AnnulusConfig::new(r, (2.0 * (1.0 + rmax)).max(2.0 * r), quad_nodes)?;
        cfg.clear_of(problem)?;
        Ok(cfg)
    }

    /// Re-jitters `R` (as in [`AnnulusConfig::for_problem`]) if a
    /// singularity lies too close to the circle.
    pub fn clear_of(&mut self, problem: &LnkProblem) -> Result<()> {
        let base = self.big_r;
        for j in 0..1000 {
            let cand = base * (1.0 + 1e-3 * j as f64);
            if problem
                .singularities()
                .all(|w| (w.norm() - cand).abs() >= CIRCLE_CLEARANCE)
            {
                self.big_r = cand;
                return Ok(());
            }
        }
        Err(Error::invalid(
            "annulus.R",
            "no admissible radius near the requested one",
        ))
    }

    pub fn validation_errors(&self, path: &str) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.r.is_finite() && self.r > 0.0) {
            errs.push(format!("{path}.r: must be a positive finite number"));
        }
        if !(self.big_r.is_finite() && self.big_r > self.r) {
            errs.push(format!("{path}.R: must be finite and greater than r"));
        }
        if !self.quad_nodes.is_power_of_two() {
            errs.push(format!("{path}.quad_nodes: must be a power of two"));
        }
        errs
    }
}

/// `P_R(r, φ) = (R² - r²) / (R² + r² - 2Rr cos φ)` for `0 <= r < R`.
pub fn poisson_kernel(big_r: f64, r: f64, phi: f64) -> Result<f64> {
    if !(r >= 0.0 && r < big_r) {
        return Err(Error::invalid(
            "poisson_kernel",
            format!("need 0 <= r < R, got r={r}, R={big_r}"),
        ));
    }
    // denominator as (R-r)^2 + 4Rr sin^2(phi/2) avoids cancellation near phi = 0;
    // the clamp keeps the distortion bounds exact under rounding
    let (lo, hi) = ((big_r - r) / (big_r + r), (big_r + r) / (big_r - r));
    let s = (0.5 * phi).sin();
    let den = (big_r - r) * (big_r - r) + 4.0 * big_r * r * s * s;
    Ok(((big_r - r) * (big_r + r) / den).clamp(lo, hi))
}

/// `(1/2π) ∫ log|L_n^{(k)}(R e^{iθ})| P_R(|z|, θ - arg z) dθ` by the
/// trapezoid rule on `quad_nodes` equispaced angles.
///
/// If a node falls within [`CIRCLE_CLEARANCE`] of a root, or lands on a
/// zero, the nodes are rotated by half a spacing and the sum retried once.
pub fn poisson_integral(
    roots: &[Complex64],
    k: usize,
    z: Complex64,
    cfg: &AnnulusConfig,
) -> Result<f64> {
    let errs = cfg.validation_errors("annulus");
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    if z.norm() >= cfg.r {
        return Err(Error::invalid(
            "z",
            format!("|z| = {} is not inside B_r (r = {})", z.norm(), cfg.r),
        ));
    }
    let n = cfg.quad_nodes;
    let h = TAU / n as f64;
    for offset in [0.0, 0.5 * h] {
        let terms: Vec<Option<f64>> = par::map_range(n, |j| {
            let w = Complex64::from_polar(cfg.big_r, offset + j as f64 * h);
            if roots.iter().any(|x| (w - x).norm() < CIRCLE_CLEARANCE) {
                return None;
            }
            let lm = eval_lnk(roots, w, k).ok()?.log_mag;
            if !lm.is_finite() {
                return None;
            }
            let kernel = (cfg.big_r * cfg.big_r - z.norm_sqr()) / (w - z).norm_sqr();
            Some(lm * kernel)
        });
        if terms.iter().all(Option::is_some) {
            return Ok(terms.into_iter().map(Option::unwrap).sum::<f64>() / n as f64);
        }
    }
    Err(Error::Quadrature(
        "quadrature nodes meet a zero or pole of L on both node sets".into(),
    ))
}

/// `log|R(z - a) / (R² - ā z)|`, the Blaschke factor of the disk `B_R`.
fn blaschke_log(big_r: f64, z: Complex64, a: Complex64) -> f64 {
    (big_r * (z - a)).norm().ln() - (big_r * big_r - a.conj() * z).norm().ln()
}

/// Both sides of the Poisson-Jensen formula for `L_n^{(k)}` on `B_R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonJensen {
    pub lhs: f64,
    pub poisson: f64,
    pub zero_sum: f64,
    pub pole_sum: f64,
    pub residual: f64,
}

/// `log|L(z)|` against `I(z; R) + Σ_zeros log|B| - Σ_poles log|B|`, zeros
/// and poles restricted to `B_R`.
pub fn poisson_jensen(
    problem: &LnkProblem,
    z: Complex64,
    cfg: &AnnulusConfig,
) -> Result<PoissonJensen> {
    let lhs = eval_lnk(&problem.roots, z, problem.k)?.log_mag;
    if !lhs.is_finite() {
        return Err(Error::Pole(z));
    }
    let poisson = poisson_integral(&problem.roots, problem.k, z, cfg)?;
    let inside = |a: &&Complex64| a.norm() < cfg.big_r;
    let zero_sum: f64 = problem
        .zeros
        .iter()
        .filter(inside)
        .map(|&y| blaschke_log(cfg.big_r, z, y))
        .sum();
    let pole_sum: f64 = problem
        .roots
        .iter()
        .filter(inside)
        .map(|&x| blaschke_log(cfg.big_r, z, x))
        .sum();
    let rhs = poisson + zero_sum - pole_sum;
    Ok(PoissonJensen {
        lhs,
        poisson,
        zero_sum,
        pole_sum,
        residual: (lhs - rhs).abs(),
    })
}

pub fn poisson_jensen_residual(
    problem: &LnkProblem,
    z: Complex64,
    cfg: &AnnulusConfig,
) -> Result<f64> {
    Ok(poisson_jensen(problem, z, cfg)?.residual)
}

/// Result of the distributional-Laplacian check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplacianCheck {
    /// `(1/(2πn)) ∫ log|L| Δφ dm` by grid quadrature.
    pub lhs: f64,
    /// `(1/n) (Σ_{P^{(k)}=0} φ - Σ_{P=0} φ)`.
    pub rhs: f64,
    pub residual: f64,
    /// Whether the grid origin was shifted to keep nodes off singularities.
    pub jittered: bool,
}

/// Square lattice of `m × m` cells of side `h`; node `(i, j)` is the
/// midpoint of cell `(i, j)`.
#[derive(Clone, Copy, Debug)]
struct Grid {
    base: Complex64,
    m: usize,
    h: f64,
}

impl Grid {
    /// Cells covering `[c - ρ, c + ρ]²`, symmetric about the centre, then
    /// shifted.
    fn covering(center: Complex64, half_width: f64, h: f64, shift: Complex64) -> Grid {
        let m = (2.0 * half_width / h - 1e-9).ceil().max(1.0) as usize;
        let base = center + shift - Complex64::new(0.5 * m as f64 * h, 0.5 * m as f64 * h);
        Grid { base, m, h }
    }

    fn node(&self, i: usize, j: usize) -> Complex64 {
        self.base + Complex64::new((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    fn nodes(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.m * self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                out.push(self.node(i, j));
            }
        }
        out
    }

    /// Index of the cell containing `z`, which may lie outside the grid.
    fn cell_of(&self, z: Complex64) -> (i64, i64) {
        let d = (z - self.base) / self.h;
        (d.re.floor() as i64, d.im.floor() as i64)
    }
}

/// `∫∫ ln(x² + y²) dx dy` antiderivative:
/// `xy (ln(x² + y²) - 3) + x² atan(y/x) + y² atan(x/y)`.
fn log_sq_antiderivative(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return 0.0;
    }
    let mut v = x * y * (r2.ln() - 3.0);
    if x != 0.0 {
        v += x * x * (y / x).atan();
    }
    if y != 0.0 {
        v += y * y * (x / y).atan();
    }
    v
}

/// Mean of `log|z - a|` over the square cell of side `h` centred at `w`.
fn cell_mean_log(w: Complex64, a: Complex64, h: f64) -> f64 {
    let d = w - a;
    let (x0, x1, y0, y1) = (
        d.re - 0.5 * h,
        d.re + 0.5 * h,
        d.im - 0.5 * h,
        d.im + 0.5 * h,
    );
    let g = log_sq_antiderivative;
    0.5 * (g(x1, y1) - g(x0, y1) - g(x1, y0) + g(x0, y0)) / (h * h)
}

/// Quadrature rule for the Laplacian check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianRule {
    /// Plain midpoint rule.
    Midpoint,
    /// Midpoint rule in which, on the `(2 near + 1)²` cells around each root
    /// and zero, the factor `log|z - a|` is replaced by its exact cell mean.
    /// `log|L|` is a constant plus signed sums of such logarithms, so this
    /// removes the offset-dependent error of the singular cells and leaves a
    /// smooth `O(h²)` error.
    Corrected { near: usize },
}

impl Default for LaplacianRule {
    fn default() -> Self {
        LaplacianRule::Corrected { near: 2 }
    }
}

/// Checks `(1/(2πn)) ∫ log|L| Δφ dm = (1/n)(Σ_{P^{(k)}=0} φ - Σ_{P=0} φ)`
/// with the default [`LaplacianRule`]; the `1/(2π)` is the normalisation of
/// the logarithmic kernel, `Δ log|z| = 2π δ_0`.
pub fn laplacian_identity_residual(
    problem: &LnkProblem,
    f: &TestFunction,
    grid_step: f64,
) -> Result<LaplacianCheck> {
    laplacian_identity_with(problem, f, grid_step, LaplacianRule::default())
}

/// As [`laplacian_identity_residual`] with an explicit rule.
///
/// A grid node closer than `10^{-3} h` to a root or zero would dominate the
/// midpoint sum; in that case the grid origin is shifted once by a fixed
/// irrational fraction of `h`.
pub fn laplacian_identity_with(
    problem: &LnkProblem,
    f: &TestFunction,
    grid_step: f64,
    rule: LaplacianRule,
) -> Result<LaplacianCheck> {
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::invalid(
            "grid_step",
            "must be a positive finite number",
        ));
    }
    let n = problem.n() as f64;
    let h = grid_step;
    let relevant: Vec<(Complex64, f64)> = problem
        .zeros
        .iter()
        .map(|&y| (y, 1.0))
        .chain(problem.roots.iter().map(|&x| (x, -1.0)))
        .filter(|(a, _)| (a - f.center).norm() < f.radius + 4.0 * h)
        .collect();
    let too_close = |g: &Grid| {
        relevant.iter().any(|&(a, _)| {
            let (i, j) = g.cell_of(a);
            (i - 1..=i + 1).any(|ii| {
                (j - 1..=j + 1).any(|jj| {
                    ii >= 0
                        && jj >= 0
                        && (ii as usize) < g.m
                        && (jj as usize) < g.m
                        && (g.node(ii as usize, jj as usize) - a).norm() < 1e-3 * h
                })
            })
        })
    };
    let mut grid = Grid::covering(f.center, f.radius, h, Complex64::new(0.0, 0.0));
    let mut jittered = false;
    if too_close(&grid) {
        let shift = Complex64::new(0.381_966_011_250_105, 0.236_067_977_499_790) * h;
        grid = Grid::covering(f.center, f.radius, h, shift);
        jittered = true;
    }
    let nodes = grid.nodes();
    let terms = par::map_slice(&nodes, |&w| -> Result<f64> {
        let lap = f.laplacian(w);
        if lap == 0.0 {
            return Ok(0.0);
        }
        Ok(log_abs_lnk(&problem.roots, w, problem.k)? * lap)
    });
    let mut sum = 0.0;
    for t in terms {
        sum += t?;
    }
    if let LaplacianRule::Corrected { near } = rule {
        let near = near as i64;
        for &(a, sign) in &relevant {
            let (ci, cj) = grid.cell_of(a);
            for i in ci - near..=ci + near {
                for j in cj - near..=cj + near {
                    if i < 0 || j < 0 || i as usize >= grid.m || j as usize >= grid.m {
                        continue;
                    }
                    let w = grid.node(i as usize, j as usize);
                    let lap = f.laplacian(w);
                    if lap != 0.0 {
                        sum += sign * lap * (cell_mean_log(w, a, h) - (w - a).norm().ln());
                    }
                }
            }
        }
    }
    let lhs = sum * h * h / (TAU * n);
    let rhs = (problem.zeros.iter().map(|&y| f.value(y)).sum::<f64>()
        - problem.roots.iter().map(|&x| f.value(x)).sum::<f64>())
        / n;
    Ok(LaplacianCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        jittered,
    })
}

/// `(1/n) log|L_n^{(k)}|` on the midpoint lattice inside `B_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogField {
    pub n: usize,
    pub k: usize,
    pub r: f64,
    pub step: f64,
    /// Rotation applied to the lattice, radians.
    pub rotation: f64,
    pub points: Vec<Complex64>,
    pub values: Vec<f64>,
    /// Number of values clipped to `±10⁶/n`.
    pub clipped: usize,
}

impl LogField {
    pub fn clip_level(&self) -> f64 {
        1e6 / self.n as f64
    }

    /// Writes `x,y,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,value")?;
        for (p, v) in self.points.iter().zip(&self.values) {
            writeln!(out, "{},{},{}", p.re, p.im, v)?;
        }
        Ok(())
    }
}

/// The log-field on the axis-aligned lattice of spacing `grid_step`.
pub fn log_field(roots: &[Complex64], k: usize, r: f64, grid_step: f64) -> Result<LogField> {
    log_field_rotated(roots, k, r, grid_step, 0.0)
}

/// As [`log_field`], with the lattice rotated by `rotation` about 0.
/// Values at zeros and poles are clipped to `∓10⁶/n`.
pub fn log_field_rotated(
    roots: &[Complex64],
    k: usize,
    r: f64,
    grid_step: f64,
    rotation: f64,
) -> Result<LogField> {
    if roots.is_empty() {
        return Err(Error::invalid("roots", "no roots"));
    }
    if k > roots.len() {
        return Err(Error::OrderTooLarge {
            order: k,
            degree: roots.len(),
        });
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("r", "must be a positive finite number"));
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::invalid(
            "grid_step",
            "must be a positive finite number",
        ));
    }
    let n = roots.len();
    let clip = 1e6 / n as f64;
    let turn = Complex64::from_polar(1.0, rotation);
    let points: Vec<Complex64> = Grid::covering(
        Complex64::new(0.0, 0.0),
        r,
        grid_step,
        Complex64::new(0.0, 0.0),
    )
    .nodes()
    .into_iter()
    .filter(|w| w.norm() < r)
    .map(|w| w * turn)
    .collect();
    let raw = par::map_slice(&points, |&w| match log_abs_lnk(roots, w, k) {
        Ok(v) => v / n as f64,
        Err(_) => f64::INFINITY,
    });
    let mut clipped = 0;
    let values = raw
        .into_iter()
        .map(|v| {
            if v.abs() > clip {
                clipped += 1;
                v.clamp(-clip, clip)
            } else {
                v
            }
        })
        .collect();
    Ok(LogField {
        n,
        k,
        r,
        step: grid_step,
        rotation,
        points,
        values,
        clipped,
    })
}

/// Midpoint approximation of `(1/n²) ∫_{B_r} (log|L|)² dm`.
pub fn l2_statistic(field: &LogField) -> f64 {
    field.values.iter().map(|v| v * v).sum::<f64>() * field.step * field.step
}

/// `(1/2π) ∫ log⁺|L(R e^{iθ})| dθ`, the circle mean of the positive part.
pub fn log_plus_circle_mean(roots: &[Complex64], k: usize, cfg: &AnnulusConfig) -> Result<f64> {
    let n = cfg.quad_nodes;
    let h = TAU / n as f64;
    let terms = par::map_range(n, |j| -> Result<f64> {
        let w = Complex64::from_polar(cfg.big_r, (j as f64 + 0.5) * h);
        eval_lnk(roots, w, k).map(|v| v.log_mag.max(0.0))
    });
    let mut s = 0.0;
    for t in terms {
        s += t?;
    }
    Ok(s / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    use crate::quad::{self, QuadBudget};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn problem(roots: Vec<Complex64>, k: usize) -> LnkProblem {
        LnkProblem::new(roots, k, &RootFindConfig::default()).unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(poisson_kernel(2.0, 0.0, 1.234).unwrap(), 1.0);
        assert!((poisson_kernel(2.0, 0.5, 0.0).unwrap() - 2.5 / 1.5).abs() < 1e-15);
        assert!((poisson_kernel(2.0, 0.5, PI).unwrap() - 1.5 / 2.5).abs() < 1e-15);
        assert!(poisson_kernel(2.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn poisson_integral_examples() {
        let cfg = AnnulusConfig::new(1.0, 2.0, 4096).unwrap();
        let origin = [c(0.0, 0.0)];
        assert_eq!(
            poisson_integral(&origin, 0, c(0.3, 0.1), &cfg).unwrap(),
            0.0
        );
        let v = poisson_integral(&origin, 1, c(0.0, 0.0), &cfg).unwrap();
        assert!((v - 0.5f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn poisson_jensen_examples() {
        let p = problem(vec![c(0.0, 0.0)], 0);
        let cfg = AnnulusConfig::new(1.0, 2.0, 4096).unwrap();
        assert!(poisson_jensen_residual(&p, c(0.3, -0.2), &cfg).unwrap() < 1e-14);
        let p = problem(vec![c(1.0, 0.0), c(-1.0, 0.0)], 1);
        assert!(poisson_jensen_residual(&p, c(0.0, 0.3), &cfg).unwrap() <= 1e-6);
    }

    #[test]
    fn laplacian_identity_example_and_second_order() {
        let p = problem(vec![c(1.0, 0.0), c(-1.0, 0.0)], 1);
        let f = TestFunction::new(c(0.0, 0.0), 3.0).unwrap();
        let a = laplacian_identity_residual(&p, &f, 0.01).unwrap();
        let b = laplacian_identity_residual(&p, &f, 0.005).unwrap();
        // P'/P vanishes at 0 (the zero of P') and has poles at ±1
        assert!(
            (a.rhs - (1.0 - 2.0 * (-1.0f64 / 0.888_888_888_888_889 + 1.0).exp()) / 2.0).abs()
                < 1e-12
        );
        assert!(a.residual <= 5e-3, "{a:?}");
        assert!(b.residual * 3.0 <= a.residual, "{a:?} {b:?}");
    }

    #[test]
    fn cell_mean_of_log_matches_fine_sum() {
        let a = c(0.013, -0.004);
        let w = c(0.0, 0.0);
        let h = 0.04;
        let m = 2000;
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                let z = w + c(
                    -0.5 * h + (i as f64 + 0.5) * h / m as f64,
                    -0.5 * h + (j as f64 + 0.5) * h / m as f64,
                );
                s += (z - a).norm().ln();
            }
        }
        s /= (m * m) as f64;
        assert!(
            (cell_mean_log(w, a, h) - s).abs() < 1e-5,
            "{} vs {s}",
            cell_mean_log(w, a, h)
        );
        // far from the cell the mean approaches the midpoint value
        assert!((cell_mean_log(w, c(5.0, 3.0), h) - (c(5.0, 3.0)).norm().ln()).abs() < 1e-5);
    }

    #[test]
    fn laplacian_of_far_singularities_is_small() {
        let p = problem(vec![c(10.0, 0.0), c(12.0, 1.0), c(11.0, -2.0)], 1);
        let f = TestFunction::new(c(0.0, 0.0), 1.0).unwrap();
        let chk = laplacian_identity_residual(&p, &f, 0.01).unwrap();
        assert_eq!(chk.rhs, 0.0);
        assert!(chk.lhs.abs() < 1e-6, "{chk:?}");
    }

    #[test]
    fn log_field_examples() {
        let f = log_field(&[c(0.0, 0.0)], 0, 1.0, 0.05).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
        assert_eq!(l2_statistic(&f), 0.0);

        // L = 1/z: field is -log|z|; ∫_{B_{1/2}} (log|z|)² dm = 2π ∫ s ln² s ds
        let f = log_field(&[c(0.0, 0.0)], 1, 0.5, 0.002).unwrap();
        let oracle = quad::integrate(
            |s| TAU * s * s.ln().powi(2),
            &[0.0, 0.5],
            QuadBudget::default(),
        )
        .value;
        assert!(
            (l2_statistic(&f) - oracle).abs() < 2e-3 * oracle,
            "{} vs {oracle}",
            l2_statistic(&f)
        );
        assert_eq!(f.clipped, 0);
    }

    #[test]
    fn annulus_rejitters_radius() {
        let p = problem(vec![c(0.0, 0.0), c(4.0, 0.0)], 0);
        let a = AnnulusConfig::for_problem(&p, 1.0, 64).unwrap();
        assert_eq!(a.big_r, 10.0);
        let mut b = AnnulusConfig::new(1.0, 4.0, 64).unwrap();
        b.clear_of(&p).unwrap();
        assert!(b.big_r > 4.0);
        assert!(p
            .roots
            .iter()
            .all(|x| (x.norm() - b.big_r).abs() >= CIRCLE_CLEARANCE));
        assert!(AnnulusConfig::new(1.0, 2.0, 1000).is_err());
    }
}
