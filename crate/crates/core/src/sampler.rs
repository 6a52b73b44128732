//! Root measures on the complex plane, reproducible sampling, and the
//! inverse-distance moment `∫ |y - z|^{-1} dμ(y)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadBudget, QuadEstimate};

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Complex64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub distribution: RootDistribution,
}

/// A probability measure μ on ℂ from which roots are drawn.
///
/// Disk and circle are centred at the origin. `ComplexGaussian` has density
/// `exp(-|z - mean|² / sigma²) / (π sigma²)`, so real and imaginary parts are
/// independent with variance `sigma² / 2` and `E|X - mean|² = sigma²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RootDistribution {
    UniformDisk { radius: f64 },
    UniformCircle { radius: f64 },
    ComplexGaussian { mean: Complex64, sigma: f64 },
    FiniteAtomic { atoms: Vec<Atom> },
    Mixture { components: Vec<Component> },
}

impl RootDistribution {
    pub fn uniform_disk(radius: f64) -> Self {
        RootDistribution::UniformDisk { radius }
    }

    pub fn uniform_circle(radius: f64) -> Self {
        RootDistribution::UniformCircle { radius }
    }

    pub fn complex_gaussian(mean: Complex64, sigma: f64) -> Self {
        RootDistribution::ComplexGaussian { mean, sigma }
    }

    pub fn atomic(atoms: impl IntoIterator<Item = (Complex64, f64)>) -> Self {
        RootDistribution::FiniteAtomic {
            atoms: atoms
                .into_iter()
                .map(|(point, weight)| Atom { point, weight })
                .collect(),
        }
    }

    /// Collects every parameter problem, each prefixed with its field path.
    pub fn validation_errors(&self, path: &str) -> Vec<String> {
        let mut errs = Vec::new();
        let positive = |v: f64, field: &str, errs: &mut Vec<String>| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!(
                    "{path}.{field}: must be a positive finite number, got {v}"
                ));
            }
        };
        match self {
            RootDistribution::UniformDisk { radius }
            | RootDistribution::UniformCircle { radius } => positive(*radius, "radius", &mut errs),
            RootDistribution::ComplexGaussian { mean, sigma } => {
                positive(*sigma, "sigma", &mut errs);
                if !(mean.re.is_finite() && mean.im.is_finite()) {
                    errs.push(format!("{path}.mean: must be finite"));
                }
            }
            RootDistribution::FiniteAtomic { atoms } => {
                if atoms.is_empty() {
                    errs.push(format!("{path}.atoms: at least one atom is required"));
                }
                for (i, a) in atoms.iter().enumerate() {
                    positive(a.weight, &format!("atoms[{i}].weight"), &mut errs);
                    if !(a.point.re.is_finite() && a.point.im.is_finite()) {
                        errs.push(format!("{path}.atoms[{i}].point: must be finite"));
                    }
                }
                check_weight_sum(
                    atoms.iter().map(|a| a.weight),
                    &format!("{path}.atoms"),
                    &mut errs,
                );
            }
            RootDistribution::Mixture { components } => {
                if components.is_empty() {
                    errs.push(format!(
                        "{path}.components: at least one component is required"
                    ));
                }
                for (i, c) in components.iter().enumerate() {
                    positive(c.weight, &format!("components[{i}].weight"), &mut errs);
                    errs.extend(
                        c.distribution
                            .validation_errors(&format!("{path}.components[{i}].distribution")),
                    );
                }
                check_weight_sum(
                    components.iter().map(|c| c.weight),
                    &format!("{path}.components"),
                    &mut errs,
                );
            }
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validation_errors("distribution");
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid("distribution", errs.join("; ")))
        }
    }

    /// True iff the support is a single point.
    pub fn is_degenerate(&self) -> bool {
        self.single_point().is_some()
    }

    /// The unique support point of a degenerate measure.
    pub fn single_point(&self) -> Option<Complex64> {
        match self {
            RootDistribution::FiniteAtomic { atoms } => {
                let first = atoms.first()?.point;
                atoms.iter().all(|a| a.point == first).then_some(first)
            }
            RootDistribution::Mixture { components } => {
                let first = components.first()?.distribution.single_point()?;
                components
                    .iter()
                    .all(|c| c.distribution.single_point() == Some(first))
                    .then_some(first)
            }
            _ => None,
        }
    }

    /// Positive mass sitting exactly at `z`.
    pub fn atom_mass_at(&self, z: Complex64) -> f64 {
        match self {
            RootDistribution::FiniteAtomic { atoms } => atoms
                .iter()
                .filter(|a| a.point == z)
                .map(|a| a.weight)
                .sum(),
            RootDistribution::Mixture { components } => components
                .iter()
                .map(|c| c.weight * c.distribution.atom_mass_at(z))
                .sum(),
            _ => 0.0,
        }
    }

    /// A centre and radius such that the disk holds the support (for the
    /// Gaussian, all but a `e^{-16}` fraction of the mass).
    pub fn support_disk(&self) -> (Complex64, f64) {
        match self {
            RootDistribution::UniformDisk { radius }
            | RootDistribution::UniformCircle { radius } => (Complex64::new(0.0, 0.0), *radius),
            RootDistribution::ComplexGaussian { mean, sigma } => (*mean, 4.0 * sigma),
            RootDistribution::FiniteAtomic { atoms } => {
                let total: f64 = atoms.iter().map(|a| a.weight).sum();
                let c = atoms.iter().map(|a| a.point * a.weight).sum::<Complex64>() / total;
                let r = atoms
                    .iter()
                    .map(|a| (a.point - c).norm())
                    .fold(0.0, f64::max);
                (c, r)
            }
            RootDistribution::Mixture { components } => {
                let disks: Vec<_> = components
                    .iter()
                    .map(|c| c.distribution.support_disk())
                    .collect();
                let c = disks.iter().map(|d| d.0).sum::<Complex64>() / disks.len() as f64;
                let r = disks
                    .iter()
                    .map(|d| (d.0 - c).norm() + d.1)
                    .fold(0.0, f64::max);
                (c, r)
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self {
            RootDistribution::UniformDisk { radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                Complex64::from_polar(r, TAU * rng.random::<f64>())
            }
            RootDistribution::UniformCircle { radius } => {
                Complex64::from_polar(*radius, TAU * rng.random::<f64>())
            }
            RootDistribution::ComplexGaussian { mean, sigma } => {
                let s = sigma * std::f64::consts::FRAC_1_SQRT_2;
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                mean + Complex64::new(s * re, s * im)
            }
            RootDistribution::FiniteAtomic { atoms } => {
                let i = pick(atoms.iter().map(|a| a.weight), rng);
                atoms[i].point
            }
            RootDistribution::Mixture { components } => {
                let i = pick(components.iter().map(|c| c.weight), rng);
                components[i].distribution.draw(rng)
            }
        }
    }
}

fn check_weight_sum(weights: impl Iterator<Item = f64>, path: &str, errs: &mut Vec<String>) {
    let s: f64 = weights.sum();
    if (s - 1.0).abs() > WEIGHT_SUM_TOL {
        errs.push(format!("{path}: weights must sum to 1, got {s}"));
    }
}

fn pick<R: Rng + ?Sized>(weights: impl Iterator<Item = f64> + Clone, rng: &mut R) -> usize {
    let n = weights.clone().count();
    if n == 1 {
        return 0;
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    n - 1
}

/// Identifies one random stream: `(master_seed, stream_index)` fully
/// determines every draw, independent of scheduling or thread count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_index,
        }
    }

    /// ChaCha8 keyed by the master seed, positioned on its own stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// A sub-stream for a labelled purpose (e.g. trial `i` of this cell).
    pub fn child(&self, label: u64) -> SeedSpec {
        SeedSpec {
            master_seed: self.master_seed,
            stream_index: splitmix64(self.stream_index ^ splitmix64(label.wrapping_add(1))),
        }
    }
}

/// Draws `n` i.i.d. roots from `dist` on the stream named by `seed`.
pub fn sample_roots(dist: &RootDistribution, n: usize, seed: SeedSpec) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    dist.validate()?;
    let mut rng = seed.rng();
    Ok((0..n).map(|_| dist.draw(&mut rng)).collect())
}

/// `∫ |y - z|^{-1} dμ(y)`, possibly `+inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl From<QuadEstimate> for MomentEstimate {
    fn from(q: QuadEstimate) -> Self {
        MomentEstimate {
            value: q.value,
            error: q.error,
            converged: q.converged,
        }
    }
}

impl MomentEstimate {
    fn infinite() -> Self {
        MomentEstimate {
            value: f64::INFINITY,
            error: 0.0,
            converged: true,
        }
    }
}

/// The inverse-distance moment of μ at `z`: closed form for atoms and the
/// circle (complete elliptic integral), radial quadrature centred at `z` for
/// the disk and the Gaussian. `+inf` exactly when `z` is an atom (or lies on
/// a circle support).
pub fn mu_inverse_moment(
    dist: &RootDistribution,
    z: Complex64,
    budget: QuadBudget,
) -> MomentEstimate {
    moment_shell(dist, z, 0.0, f64::INFINITY, budget)
}

/// The inverse moment split into the part with `|y - z| < 1` and the part
/// with `|y - z| >= 1`. The far part never exceeds 1 for a probability
/// measure.
pub fn mu_inverse_moment_split(
    dist: &RootDistribution,
    z: Complex64,
    budget: QuadBudget,
) -> (MomentEstimate, MomentEstimate) {
    (
        moment_shell(dist, z, 0.0, 1.0, budget),
        moment_shell(dist, z, 1.0, f64::INFINITY, budget),
    )
}

/// `∫_{lo <= |y-z| < hi} |y - z|^{-1} dμ(y)`.
fn moment_shell(
    dist: &RootDistribution,
    z: Complex64,
    lo: f64,
    hi: f64,
    budget: QuadBudget,
) -> MomentEstimate {
    match dist {
        RootDistribution::FiniteAtomic { atoms } => {
            let mut total = 0.0;
            for a in atoms {
                let d = (a.point - z).norm();
                if d >= lo && d < hi {
                    if d == 0.0 {
                        return MomentEstimate::infinite();
                    }
                    total += a.weight / d;
                }
            }
            MomentEstimate {
                value: total,
                error: 0.0,
                converged: true,
            }
        }
        RootDistribution::UniformCircle { radius } => {
            circle_shell(*radius, z.norm(), lo, hi, budget)
        }
        RootDistribution::UniformDisk { radius } => {
            let a = *radius;
            let r = z.norm();
            let top = hi.min(a + r);
            if top <= lo {
                return MomentEstimate::from(QuadEstimate::ZERO);
            }
            let mut breaks = vec![lo, top];
            for b in [(a - r).abs()] {
                if b > lo && b < top {
                    breaks.insert(1, b);
                }
            }
            let est = quad::integrate(|s| disk_arc_angle(a, r, s), &breaks, budget);
            est.scaled(1.0 / (PI * a * a)).into()
        }
        RootDistribution::ComplexGaussian { mean, sigma } => {
            let d = (z - mean).norm();
            let top = hi.min(d + 10.0 * sigma);
            if top <= lo {
                return MomentEstimate::from(QuadEstimate::ZERO);
            }
            let mut breaks = vec![lo, top];
            if d > lo && d < top {
                breaks.insert(1, d);
            }
            let s2 = sigma * sigma;
            // angular mean of the density on the circle |y - z| = s, times 2π
            let ring = |s: f64| {
                2.0 / s2 * (-(s - d).powi(2) / s2).exp() * quad::bessel_i0e(2.0 * s * d / s2)
            };
            quad::integrate(ring, &breaks, budget).into()
        }
        RootDistribution::Mixture { components } => {
            let mut acc = QuadEstimate::ZERO;
            for c in components {
                let m = moment_shell(&c.distribution, z, lo, hi, budget);
                if m.value.is_infinite() {
                    return MomentEstimate::infinite();
                }
                acc = acc.plus(
                    QuadEstimate {
                        value: m.value,
                        error: m.error,
                        converged: m.converged,
                    }
                    .scaled(c.weight),
                );
            }
            acc.into()
        }
    }
}

/// Angular measure (radians) of the circle `|y - z| = s` lying inside the
/// disk `|y| <= a`, where `r = |z|`.
pub(crate) fn disk_arc_angle(a: f64, r: f64, s: f64) -> f64 {
    if s + r <= a {
        TAU
    } else if s >= a + r || s <= r - a {
        0.0
    } else {
        let c = ((s * s + r * r - a * a) / (2.0 * s * r)).clamp(-1.0, 1.0);
        2.0 * c.acos()
    }
}

fn circle_shell(a: f64, r: f64, lo: f64, hi: f64, budget: QuadBudget) -> MomentEstimate {
    if r == 0.0 {
        let v = if a >= lo && a < hi { 1.0 / a } else { 0.0 };
        return MomentEstimate {
            value: v,
            error: 0.0,
            converged: true,
        };
    }
    if r == a && lo == 0.0 {
        return MomentEstimate::infinite();
    }
    if lo == 0.0 && hi.is_infinite() {
        // (1/2π) ∫ dθ / sqrt(a² + r² - 2ar cos θ) = 2K(k) / (π (a + r)),
        // k² = 4ar / (a + r)²
        let kp = (a - r).abs() / (a + r);
        return MomentEstimate {
            value: 2.0 * quad::elliptic_k_complementary(kp) / (PI * (a + r)),
            error: 0.0,
            converged: true,
        };
    }
    // distance s(θ) = |a e^{iθ} - r| grows on [0, π]; map the shell to θ
    let theta_of = |s: f64| {
        if s.is_infinite() {
            PI
        } else {
            ((a * a + r * r - s * s) / (2.0 * a * r))
                .clamp(-1.0, 1.0)
                .acos()
        }
    };
    let (t0, t1) = (theta_of(lo), theta_of(hi));
    let dist = |t: f64| (a * a + r * r - 2.0 * a * r * t.cos()).max(0.0).sqrt();
    quad::integrate(|t| 1.0 / dist(t), &[t0, t1], budget)
        .scaled(1.0 / PI)
        .into()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_atom_repeats() {
        let d = RootDistribution::atomic([(c(2.0, 1.0), 1.0)]);
        let s = sample_roots(&d, 3, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(s, vec![c(2.0, 1.0); 3]);
        assert!(d.is_degenerate());
    }

    #[test]
    fn circle_samples_stay_on_circle() {
        let d = RootDistribution::uniform_circle(1.0);
        let s = sample_roots(&d, 1000, SeedSpec::new(7, 3)).unwrap();
        assert!(s.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn gaussian_sample_mean_is_near_zero() {
        // standard error per coordinate is sqrt(1/2 / 1e5) ≈ 0.00224, so a
        // 3σ band of the complex mean sits well inside 0.02
        let d = RootDistribution::complex_gaussian(c(0.0, 0.0), 1.0);
        let s = sample_roots(&d, 100_000, SeedSpec::new(11, 0)).unwrap();
        let mean = s.iter().sum::<Complex64>() / s.len() as f64;
        assert!(mean.norm() < 0.02, "{mean}");
        let second: f64 = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / s.len() as f64;
        assert!((second - 1.0).abs() < 0.02);
    }

    #[test]
    fn sampling_is_deterministic_and_streams_differ() {
        let d = RootDistribution::uniform_disk(2.0);
        let a = sample_roots(&d, 50, SeedSpec::new(5, 9)).unwrap();
        let b = sample_roots(&d, 50, SeedSpec::new(5, 9)).unwrap();
        let other = sample_roots(&d, 50, SeedSpec::new(5, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn invalid_parameters_are_reported() {
        let d = RootDistribution::uniform_disk(-1.0);
        let errs = d.validation_errors("distribution");
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("distribution.radius"));
        let bad = RootDistribution::atomic([(c(0.0, 0.0), 0.5), (c(1.0, 0.0), 0.4)]);
        assert!(bad.validate().is_err());
        assert!(sample_roots(
            &RootDistribution::complex_gaussian(c(0.0, 0.0), 0.0),
            3,
            SeedSpec::new(0, 0)
        )
        .is_err());
        assert!(sample_roots(
            &RootDistribution::uniform_circle(1.0),
            0,
            SeedSpec::new(0, 0)
        )
        .is_err());
    }

    #[test]
    fn mixture_degeneracy() {
        let atom = RootDistribution::atomic([(c(1.0, 1.0), 1.0)]);
        let m = RootDistribution::Mixture {
            components: vec![
                Component {
                    weight: 0.5,
                    distribution: atom.clone(),
                },
                Component {
                    weight: 0.5,
                    distribution: atom,
                },
            ],
        };
        assert!(m.is_degenerate());
        assert!(!RootDistribution::uniform_disk(1.0).is_degenerate());
        let two = RootDistribution::atomic([(c(-1.0, 0.0), 0.5), (c(1.0, 0.0), 0.5)]);
        assert!(!two.is_degenerate());
    }

    #[test]
    fn inverse_moment_examples() {
        let b = QuadBudget::default();
        let a = c(0.5, -2.0);
        let atom = RootDistribution::atomic([(a, 1.0)]);
        assert_eq!(mu_inverse_moment(&atom, a, b).value, f64::INFINITY);
        let circle = RootDistribution::uniform_circle(1.0);
        assert!((mu_inverse_moment(&circle, c(0.0, 0.0), b).value - 1.0).abs() < 1e-15);
        // (1/π) ∫_0^{2π} ∫_0^1 dr dθ = 2
        let disk = RootDistribution::uniform_disk(1.0);
        assert!((mu_inverse_moment(&disk, c(0.0, 0.0), b).value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn circle_closed_form_matches_angular_quadrature() {
        let b = QuadBudget::default();
        let circle = RootDistribution::uniform_circle(1.3);
        for &z in &[c(0.2, 0.1), c(1.0, 0.5), c(3.0, -2.0)] {
            let closed = mu_inverse_moment(&circle, z, b).value;
            let (near, far) = mu_inverse_moment_split(&circle, z, b);
            let direct = quad::periodic_mean(
                |t| 1.0 / (Complex64::from_polar(1.3, t) - z).norm(),
                QuadBudget {
                    abs_tol: 1e-13,
                    max_depth: 20,
                },
            );
            assert!((closed - direct.value).abs() < 1e-10, "z={z}");
            assert!((near.value + far.value - closed).abs() < 1e-8, "z={z}");
        }
    }

    #[test]
    fn disk_and_gaussian_moments_match_monte_carlo_free_oracles() {
        let b = QuadBudget::default();
        // Gaussian at its mean: ∫ (1/s) (2s/σ²) e^{-s²/σ²} ds = √π / σ
        let g = RootDistribution::complex_gaussian(c(1.0, 1.0), 0.7);
        let v = mu_inverse_moment(&g, c(1.0, 1.0), b).value;
        assert!((v - PI.sqrt() / 0.7).abs() < 1e-9, "{v}");
        // far outside the disk the moment tends to 1/|z|
        let disk = RootDistribution::uniform_disk(1.0);
        let v = mu_inverse_moment(&disk, c(100.0, 0.0), b).value;
        assert!((v - 0.01).abs() < 1e-6);
    }

    #[test]
    fn far_field_is_at_most_one() {
        let b = QuadBudget::default();
        let dists = [
            RootDistribution::uniform_disk(3.0),
            RootDistribution::uniform_circle(2.0),
            RootDistribution::complex_gaussian(c(0.0, 0.0), 2.0),
            RootDistribution::atomic([(c(1.5, 0.0), 0.3), (c(-4.0, 1.0), 0.7)]),
        ];
        for d in &dists {
            for &z in &[c(0.0, 0.0), c(1.0, 1.0), c(-3.0, 0.5), c(10.0, 0.0)] {
                let (_, far) = mu_inverse_moment_split(d, z, b);
                assert!(far.value <= 1.0 + 1e-9, "{d:?} at {z}: {}", far.value);
            }
        }
    }
}
