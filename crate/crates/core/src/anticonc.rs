//! Anti-concentration of elementary symmetric polynomials: Monte Carlo
//! small-ball estimates for `e_k(Y_1, ..., Y_n)`, the Meka-Nguyen-Vu bound
//! for biased multilinear polynomials, the block rank statistic of the
//! Bernoulli decomposition, and schedules for the derivative order `k(n)`.
//!
//! All logarithms are natural.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::polycore::log_abs_elem_sym;
use crate::sampler::{sample_roots, RootDistribution, SeedSpec};

/// How the derivative order grows with `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum KSchedule {
    /// `max(1, ⌊ln n / (5 ln ln n)⌋)`.
    Paper,
    Fixed {
        k: usize,
    },
    /// `⌊n^β⌋`, `0 < β < 1`, clamped to `[1, n - 1]`.
    Sublinear {
        beta: f64,
    },
}

impl KSchedule {
    pub fn validation_errors(&self, path: &str) -> Vec<String> {
        match self {
            KSchedule::Fixed { k } if *k == 0 => vec![format!("{path}.k: must be positive")],
            KSchedule::Sublinear { beta } if !(*beta > 0.0 && *beta < 1.0) => {
                vec![format!("{path}.beta: must lie in (0, 1)")]
            }
            _ => Vec::new(),
        }
    }
}

/// The order `k` for degree `n >= 3`.
pub fn k_schedule(n: usize, s: KSchedule) -> Result<usize> {
    if n < 3 {
        return Err(Error::invalid("n", "k schedules need n >= 3"));
    }
    let nf = n as f64;
    match s {
        KSchedule::Paper => Ok(((nf.ln() / (5.0 * nf.ln().ln())).floor() as usize).max(1)),
        KSchedule::Fixed { k } => {
            if k == 0 || k >= n {
                Err(Error::OrderTooLarge {
                    order: k,
                    degree: n,
                })
            } else {
                Ok(k)
            }
        }
        KSchedule::Sublinear { beta } => {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::invalid("k_schedule.beta", "must lie in (0, 1)"));
            }
            let v = nf.powf(beta);
            // exact powers such as 400^0.5 must not round down
            let r = v.round();
            let k = if (v - r).abs() <= 1e-9 * r {
                r
            } else {
                v.floor()
            };
            Ok((k as usize).clamp(1, n - 1))
        }
    }
}

/// Where the `Y_i` come from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum YSource {
    /// `Y = 1 / (z - X)` with `X` drawn from the distribution.
    Transform { z: Complex64 },
    /// `Y` drawn from the distribution itself.
    Direct,
}

impl YSource {
    fn apply(&self, x: Complex64) -> Complex64 {
        match self {
            YSource::Transform { z } => {
                let d = z - x;
                if d.re == 0.0 && d.im == 0.0 {
                    Complex64::new(f64::INFINITY, 0.0)
                } else {
                    d.inv()
                }
            }
            YSource::Direct => x,
        }
    }
}

/// Parameters of a small-ball estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallBall {
    pub source: YSource,
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub trials: usize,
    /// Reject distributions for which `Y` is almost surely constant.
    pub degeneracy_guard: bool,
}

impl SmallBall {
    fn validate(&self, dist: &RootDistribution) -> Result<()> {
        dist.validate()?;
        if self.n == 0 || self.k == 0 || self.k > self.n {
            return Err(Error::invalid(
                "small_ball",
                format!("need 1 <= k <= n, got n={}, k={}", self.n, self.k),
            ));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid(
                "small_ball.epsilon",
                "must be a positive finite number",
            ));
        }
        if self.trials == 0 {
            return Err(Error::invalid("small_ball.trials", "must be positive"));
        }
        if let YSource::Transform { z } = self.source {
            if dist.atom_mass_at(z) > 0.0 {
                return Err(Error::Hypothesis(format!(
                    "z = {z} is an atom, so 1/(z - X) is undefined with positive probability"
                )));
            }
        }
        if self.degeneracy_guard && dist.is_degenerate() {
            return Err(Error::Hypothesis("Y is almost surely constant".into()));
        }
        Ok(())
    }
}

/// Monte Carlo estimate of `P(|e_k(Y_1..Y_n)| <= e^{-εn})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntiConcEstimate {
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub ci95: (f64, f64),
    pub seed: SeedSpec,
}

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95%.
pub fn wilson_interval(hits: usize, trials: usize) -> (f64, f64) {
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// `ln|e_k(Y)|` for each trial. Trial `t` draws from the stream
/// `seed.child(t)`, so the values do not depend on execution order.
pub fn small_ball_log_magnitudes(
    dist: &RootDistribution,
    q: &SmallBall,
    seed: SeedSpec,
) -> Result<Vec<f64>> {
    q.validate(dist)?;
    let out = par::map_range(q.trials, |t| -> Result<f64> {
        let xs = sample_roots(dist, q.n, seed.child(t as u64))?;
        let ys: Vec<Complex64> = xs.iter().map(|&x| q.source.apply(x)).collect();
        if ys.iter().any(|y| !y.re.is_finite()) {
            return Ok(f64::INFINITY);
        }
        log_abs_elem_sym(&ys, q.k)
    });
    out.into_iter().collect()
}

pub fn estimate_small_ball(
    dist: &RootDistribution,
    q: &SmallBall,
    seed: SeedSpec,
) -> Result<AntiConcEstimate> {
    let logs = small_ball_log_magnitudes(dist, q, seed)?;
    Ok(estimate_from_logs(&logs, q, seed))
}

/// Counts hits `ln|e_k| <= -εn` among precomputed log-magnitudes.
pub fn estimate_from_logs(logs: &[f64], q: &SmallBall, seed: SeedSpec) -> AntiConcEstimate {
    let threshold = -q.epsilon * q.n as f64;
    let hits = logs.iter().filter(|&&v| v <= threshold).count();
    let trials = logs.len();
    AntiConcEstimate {
        n: q.n,
        k: q.k,
        epsilon: q.epsilon,
        trials,
        hits,
        p_hat: hits as f64 / trials as f64,
        ci95: wilson_interval(hits, trials),
        seed,
    }
}

/// `B d^{4/3} (ln r̃)^{1/2} / r̃^{1/(4d+1)}` with `r̃ = 2^d α^d r`,
/// `α = min(p, 1 - p)`, evaluated in the log domain. `B` is an unknown
/// absolute constant supplied by the caller. Requires `r̃ >= 3`.
pub fn mnv_bound(d: usize, p: f64, r: f64, b: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("d", "must be positive"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", "must lie in (0, 1)"));
    }
    if !(r.is_finite() && r > 0.0) || !(b.is_finite() && b > 0.0) {
        return Err(Error::invalid(
            "mnv_bound",
            "r and B must be positive finite numbers",
        ));
    }
    let df = d as f64;
    let alpha = p.min(1.0 - p);
    let log_rt = df * 2f64.ln() + df * alpha.ln() + r.ln();
    if log_rt < 3f64.ln() {
        return Err(Error::Hypothesis(format!("r̃ = {} < 3", log_rt.exp())));
    }
    // B stays outside the exponential so that the bound is exactly linear in it
    Ok(b * ((4.0 / 3.0) * df.ln() + 0.5 * log_rt.ln() - log_rt / (4.0 * df + 1.0)).exp())
}

/// Number of consecutive `k`-blocks `S` (of `⌊n/k⌋`) with
/// `Π_{j∈S} |y⁺_j - y⁻_j| >= 2^k`, the product taken as a sum of `log₂`.
pub fn rank_statistic(y_plus: &[Complex64], y_minus: &[Complex64], k: usize) -> Result<usize> {
    if y_plus.len() != y_minus.len() {
        return Err(Error::invalid(
            "rank_statistic",
            "y_plus and y_minus differ in length",
        ));
    }
    if k == 0 || k > y_plus.len() {
        return Err(Error::OrderTooLarge {
            order: k,
            degree: y_plus.len(),
        });
    }
    let gaps: Vec<f64> = y_plus
        .iter()
        .zip(y_minus)
        .map(|(a, b)| (a - b).norm().log2())
        .collect();
    Ok(gaps
        .chunks_exact(k)
        .filter(|block| block.iter().sum::<f64>() >= k as f64)
        .count())
}

/// `(1/2 - 1/(8ε)) ln ln n`, the leading term of the log of the final
/// small-ball bound when `k = ε ln n / ln ln n`.
pub fn epsilon_threshold_check(n: usize, eps: f64) -> Result<f64> {
    if n < 16 {
        return Err(Error::invalid("n", "must be at least 16"));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::invalid("eps", "must lie in (0, 1/2]"));
    }
    Ok((0.5 - 1.0 / (8.0 * eps)) * (n as f64).ln().ln())
}

/// `2 exp(-c q^{2k} n / k)`, the failure probability of the block claim;
/// `c` is an unknown constant supplied by the caller.
pub fn claim_failure_bound(q: f64, k: usize, n: usize, c: f64) -> f64 {
    2.0 * (-c * q.powi(2 * k as i32) * n as f64 / k as f64).exp()
}

/// Empirical choice of the recentring `t`, scale `κ` and mass `q` with
/// `P(Re Y - t > κ) >= q` and `P(Re Y - t < -κ) >= q`.
///
/// Rule: `t` is the midpoint of the sample quartiles of `Re Y` and `κ` a
/// quarter of the interquartile range, so a two-point law splits evenly;
/// `q` is the smaller empirical tail mass beyond `t ± κ`. If `Re Y` has no spread, `Y` is replaced by `iY` (so the
/// imaginary part is used) and `rotated` is set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pilot {
    pub t: f64,
    pub kappa: f64,
    pub q: f64,
    /// `P(Re Y - t > 0)`, the Bernoulli parameter.
    pub p: f64,
    pub rotated: bool,
    pub samples: usize,
}

fn pilot_values(
    dist: &RootDistribution,
    source: YSource,
    samples: usize,
    seed: SeedSpec,
) -> Result<Vec<Complex64>> {
    Ok(sample_roots(dist, samples, seed)?
        .into_iter()
        .map(|x| source.apply(x))
        .filter(|y| y.re.is_finite() && y.im.is_finite())
        .collect())
}

pub fn pilot_decomposition(
    dist: &RootDistribution,
    source: YSource,
    samples: usize,
    seed: SeedSpec,
) -> Result<Pilot> {
    if samples < 4 {
        return Err(Error::invalid("pilot.samples", "need at least 4 samples"));
    }
    let ys = pilot_values(dist, source, samples, seed)?;
    for rotated in [false, true] {
        let mut re: Vec<f64> = ys
            .iter()
            .map(|y| if rotated { -y.im } else { y.re })
            .collect();
        re.sort_by(f64::total_cmp);
        let m = re.len();
        let (q1, q3) = (re[m / 4], re[(3 * m) / 4]);
        let t = 0.5 * (q1 + q3);
        let kappa = 0.25 * (q3 - q1);
        if kappa > 0.0 {
            let above = re.iter().filter(|&&v| v - t > kappa).count() as f64 / m as f64;
            let below = re.iter().filter(|&&v| v - t < -kappa).count() as f64 / m as f64;
            let p = re.iter().filter(|&&v| v - t > 0.0).count() as f64 / m as f64;
            return Ok(Pilot {
                t,
                kappa,
                q: above.min(below),
                p,
                rotated,
                samples: m,
            });
        }
    }
    Err(Error::Hypothesis(
        "neither Re Y nor Im Y shows spread in the pilot sample".into(),
    ))
}

/// Block statistic of one Bernoulli decomposition draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankDiagnostic {
    pub n: usize,
    pub k: usize,
    pub pilot: Pilot,
    pub blocks: usize,
    /// Blocks whose coefficient `b_S` has modulus at least `2^k`.
    pub big_blocks: usize,
    /// `q^{2k} n / (2k)`, the count the block claim guarantees w.h.p.
    pub claim_threshold: f64,
    pub claim_holds: bool,
    /// `2 exp(-c q^{2k} n / k)` with the caller's `c`.
    pub failure_bound: f64,
}

/// Draws `Y⁺_j` (from `(Y - t)/κ` given `Re Y > t`) and `Y⁻_j` (given
/// `Re Y <= t`) by rejection and counts the big blocks.
pub fn rank_diagnostic(
    dist: &RootDistribution,
    source: YSource,
    n: usize,
    k: usize,
    pilot: &Pilot,
    c: f64,
    seed: SeedSpec,
) -> Result<RankDiagnostic> {
    if k == 0 || k > n {
        return Err(Error::OrderTooLarge {
            order: k,
            degree: n,
        });
    }
    let turn = if pilot.rotated {
        Complex64::new(0.0, 1.0)
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    let batch = (2 * n).max(64);
    for round in 0..10_000u64 {
        if plus.len() >= n && minus.len() >= n {
            break;
        }
        for y in pilot_values(dist, source, batch, seed.child(round))? {
            let w = (y * turn - pilot.t) / pilot.kappa;
            if w.re > 0.0 {
                if plus.len() < n {
                    plus.push(w);
                }
            } else if minus.len() < n {
                minus.push(w);
            }
        }
    }
    if plus.len() < n || minus.len() < n {
        return Err(Error::Hypothesis(
            "one side of the decomposition has negligible mass".into(),
        ));
    }
    let big_blocks = rank_statistic(&plus, &minus, k)?;
    let claim_threshold = pilot.q.powi(2 * k as i32) * n as f64 / (2.0 * k as f64);
    Ok(RankDiagnostic {
        n,
        k,
        pilot: *pilot,
        blocks: n / k,
        big_blocks,
        claim_threshold,
        claim_holds: big_blocks as f64 >= claim_threshold,
        failure_bound: claim_failure_bound(pilot.q, k, n, c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(k_schedule(1_000_000, KSchedule::Paper).unwrap(), 1);
        assert_eq!(k_schedule(20, KSchedule::Paper).unwrap(), 1);
        assert_eq!(
            k_schedule(400, KSchedule::Sublinear { beta: 0.5 }).unwrap(),
            20
        );
        assert!(k_schedule(5, KSchedule::Fixed { k: 5 }).is_err());
        assert!(k_schedule(2, KSchedule::Paper).is_err());
    }

    #[test]
    fn constant_direct_values_never_hit() {
        let q = SmallBall {
            source: YSource::Direct,
            n: 10,
            k: 1,
            epsilon: 0.1,
            trials: 50,
            degeneracy_guard: false,
        };
        let one = RootDistribution::atomic([(c(1.0, 0.0), 1.0)]);
        let est = estimate_small_ball(&one, &q, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(est.hits, 0);
        assert_eq!(est.p_hat, 0.0);
        let guarded = SmallBall {
            degeneracy_guard: true,
            ..q
        };
        assert!(estimate_small_ball(&one, &guarded, SeedSpec::new(1, 0)).is_err());
    }

    #[test]
    fn transform_at_an_atom_is_rejected() {
        let d = RootDistribution::atomic([(c(0.0, 0.0), 0.5), (c(1.0, 0.0), 0.5)]);
        let q = SmallBall {
            source: YSource::Transform { z: c(1.0, 0.0) },
            n: 5,
            k: 1,
            epsilon: 0.1,
            trials: 10,
            degeneracy_guard: true,
        };
        assert!(estimate_small_ball(&d, &q, SeedSpec::new(1, 0)).is_err());
    }

    #[test]
    fn wilson_interval_brackets_estimate() {
        for (h, n) in [(0, 10), (3, 10), (10, 10), (2461, 10_000)] {
            let (lo, hi) = wilson_interval(h, n);
            let p = h as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
    }

    #[test]
    fn mnv_examples() {
        let v = mnv_bound(1, 0.5, 100.0, 1.0).unwrap();
        let direct = 100f64.ln().sqrt() / 100f64.powf(0.2);
        assert!((v - direct).abs() < 1e-12 * direct);
        assert!((v - 0.8543).abs() < 5e-4);
        assert_eq!(mnv_bound(1, 0.5, 100.0, 2.0).unwrap(), 2.0 * v);
        assert!(matches!(
            mnv_bound(1, 0.5, 2.0, 1.0),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn rank_examples() {
        let zero = vec![c(0.0, 0.0); 6];
        let two = vec![c(2.0, 0.0); 6];
        let one = vec![c(1.0, 0.0); 6];
        for k in 1..=6 {
            assert_eq!(rank_statistic(&two, &zero, k).unwrap(), 6 / k);
            assert_eq!(rank_statistic(&one, &zero, k).unwrap(), 0);
        }
        let gaps: Vec<Complex64> = [3.0, 3.0, 1.0, 1.0, 3.0, 3.0]
            .iter()
            .map(|&g| c(g, 0.0))
            .collect();
        assert_eq!(rank_statistic(&gaps, &zero, 2).unwrap(), 2);
    }

    #[test]
    fn epsilon_threshold_examples() {
        // 1/2 - 1/(8/5) = -1/8, ln ln 10^6 ≈ 2.6258
        let v = epsilon_threshold_check(1_000_000, 0.2).unwrap();
        assert!((v - (-0.125 * 1e6f64.ln().ln())).abs() < 1e-12);
        assert!((v + 0.328_23).abs() < 1e-4);
        assert_eq!(epsilon_threshold_check(1000, 0.25).unwrap(), 0.0);
        assert!(epsilon_threshold_check(15, 0.2).is_err());
    }

    #[test]
    fn pilot_of_symmetric_signs() {
        let d = RootDistribution::atomic([(c(-1.0, 0.0), 0.5), (c(1.0, 0.0), 0.5)]);
        let p = pilot_decomposition(&d, YSource::Direct, 1000, SeedSpec::new(2, 0)).unwrap();
        assert!(!p.rotated && p.t == 0.0 && p.kappa == 0.5);
        assert!((p.q - 0.5).abs() < 0.06 && (p.p - 0.5).abs() < 0.06);
        let point = RootDistribution::atomic([(c(0.5, 0.0), 1.0)]);
        assert!(pilot_decomposition(&point, YSource::Direct, 100, SeedSpec::new(2, 0)).is_err());
        let g = RootDistribution::complex_gaussian(c(0.0, 0.0), 1.0);
        let p = pilot_decomposition(&g, YSource::Direct, 10_000, SeedSpec::new(2, 0)).unwrap();
        assert!(p.t.abs() < 0.05 && p.kappa > 0.1 && p.q > 0.1 && (p.p - 0.5).abs() < 0.02);
        let diag =
            rank_diagnostic(&g, YSource::Direct, 400, 2, &p, 1.0, SeedSpec::new(3, 0)).unwrap();
        assert_eq!(diag.blocks, 200);
        assert!(diag.big_blocks <= diag.blocks);
    }
}
