//! Config-driven experiment sweeps.
//!
//! A run is a grid of cells `(n, replicate)`. Cell `c = i * trials + r`
//! (for the `i`-th entry of `n_values`) draws everything from the stream
//! `SeedSpec::new(master_seed, c)`, so its result does not depend on which
//! worker ran it or when. Cells are gathered back in index order before
//! anything is written. A failing cell records its error and the sweep
//! moves on.

mod config;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

pub use config::{parse_config, ExperimentConfig, ExperimentKind, YSourceKind};
pub use output::{flatten_metrics, RunOutput};

use crate::anticonc::{
    claim_failure_bound, epsilon_threshold_check, estimate_small_ball, k_schedule, mnv_bound,
    pilot_decomposition, rank_diagnostic, AntiConcEstimate, Pilot, SmallBall,
};
use crate::error::{Error, Result};
use crate::measures::{energy_distance, DiscrepancyProbe, EmpiricalMeasure};
use crate::par;
use crate::polycore::log_abs_lnk;
use crate::potential::{
    l2_statistic, laplacian_identity_residual, log_field, poisson_jensen, AnnulusConfig,
    LnkProblem, LogField,
};
use crate::rootfind::derivative_zeros;
use crate::sampler::{mu_inverse_moment, sample_roots, SeedSpec};

pub const TOOL: &str = "derivzeros";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Streams reserved for run-level draws; cell streams count up from 0.
const RESERVED_STREAM: u64 = u64::MAX;

/// Overrides from the command line.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    /// Size of the worker pool; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Replaces `master_seed`.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceMetrics {
    pub k: usize,
    pub zeros: usize,
    /// Against μ, for the roots themselves (`k = 0`).
    pub discrepancy_roots: f64,
    pub discrepancy_zeros: f64,
    pub energy_roots: f64,
    pub energy_zeros: f64,
    pub rootfind_iterations: usize,
    pub rootfind_worst_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnticoncMetrics {
    pub k: usize,
    pub epsilon: f64,
    pub mc_trials: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialMetrics {
    pub k: usize,
    pub annulus_r: f64,
    #[serde(rename = "annulus_R")]
    pub annulus_big_r: f64,
    pub pj_lhs: f64,
    pub pj_residual: f64,
    pub laplacian_lhs: f64,
    pub laplacian_rhs: f64,
    pub laplacian_residual: f64,
    pub laplacian_jittered: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogFieldMetrics {
    pub k: usize,
    pub l2: f64,
    /// `(1/n) log|L_n^{(k)}(z)|`; null when `z` is a root.
    pub field_at_z: Option<f64>,
    pub grid_points: usize,
    pub clipped: usize,
    pub clip_level: f64,
    /// File holding the whole grid (first replicate of each `n` only).
    pub field_csv: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Metrics {
    Convergence(ConvergenceMetrics),
    Anticonc(AnticoncMetrics),
    Potential(PotentialMetrics),
    LogField(LogFieldMetrics),
}

/// Outcome of one `(n, replicate)` cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellRecord {
    pub cell: usize,
    pub n: usize,
    pub replicate: usize,
    pub seed: SeedSpec,
    pub metrics: Option<Metrics>,
    pub error: Option<String>,
}

impl CellRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Per-`n` medians over successful cells, plus experiment-specific extras.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NSummary {
    pub n: usize,
    pub k: Option<usize>,
    pub cells_ok: usize,
    pub cells_failed: usize,
    pub medians: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub extra: Value,
}

/// Everything in `results.json`. Contains no wall-clock data, so equal
/// configs give byte-identical reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub run_info: Value,
    pub summaries: Vec<NSummary>,
    pub records: Vec<CellRecord>,
}

impl Report {
    pub fn failed_cells(&self) -> usize {
        self.records.iter().filter(|r| !r.ok()).count()
    }

    /// The per-`n` median of a metric, if present.
    pub fn median(&self, n: usize, metric: &str) -> Option<f64> {
        self.summaries
            .iter()
            .find(|s| s.n == n)?
            .medians
            .get(metric)
            .copied()
    }
}

/// A finished run before anything is written.
#[derive(Clone, Debug)]
pub struct RunData {
    pub report: Report,
    /// Wall-clock seconds per cell, in cell order.
    pub cell_seconds: Vec<f64>,
    /// Field grids of the first replicate of each `n` (log-field scans).
    pub fields: Vec<(usize, LogField)>,
    /// Small-ball estimates in cell order (anti-concentration sweeps).
    pub estimates: Vec<AntiConcEstimate>,
}

struct CellOutput {
    record: CellRecord,
    field: Option<LogField>,
    estimate: Option<AntiConcEstimate>,
    seconds: f64,
}

/// Shared read-only state prepared once per run.
enum Shared {
    Convergence {
        probe: DiscrepancyProbe,
        reference: Vec<Complex64>,
    },
    Anticonc,
    Potential,
    LogField,
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    Some(if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    })
}

fn run_cell(
    cfg: &ExperimentConfig,
    shared: &Shared,
    n: usize,
    replicate: usize,
    seed: SeedSpec,
) -> Result<(Metrics, Option<LogField>, Option<AntiConcEstimate>)> {
    let k = k_schedule(n, cfg.k_schedule)?;
    let dist = &cfg.distribution;
    match shared {
        Shared::Convergence { probe, reference } => {
            let roots = sample_roots(dist, n, seed)?;
            let zeros = derivative_zeros(&roots, k, &cfg.rootfind)?;
            if !zeros.converged {
                return Err(Error::NonConvergence {
                    worst_residual: zeros.worst_residual(),
                    iterations: zeros.iterations,
                });
            }
            let worst = zeros.worst_residual();
            let m0 = EmpiricalMeasure::new(roots)?;
            let mk = EmpiricalMeasure::new(zeros.roots)?;
            Ok((
                Metrics::Convergence(ConvergenceMetrics {
                    k,
                    zeros: mk.len(),
                    discrepancy_roots: probe.discrepancy(&m0),
                    discrepancy_zeros: probe.discrepancy(&mk),
                    energy_roots: energy_distance(&m0, reference)?,
                    energy_zeros: energy_distance(&mk, reference)?,
                    rootfind_iterations: zeros.iterations,
                    rootfind_worst_residual: worst,
                }),
                None,
                None,
            ))
        }
        Shared::Anticonc => {
            let q = SmallBall {
                source: cfg.y_source(),
                n,
                k,
                epsilon: cfg.epsilon,
                trials: cfg.mc_trials,
                degeneracy_guard: cfg.degeneracy_guard,
            };
            let est = estimate_small_ball(dist, &q, seed)?;
            Ok((
                Metrics::Anticonc(AnticoncMetrics {
                    k,
                    epsilon: cfg.epsilon,
                    mc_trials: est.trials,
                    hits: est.hits,
                    p_hat: est.p_hat,
                    ci95_lo: est.ci95.0,
                    ci95_hi: est.ci95.1,
                }),
                None,
                Some(est),
            ))
        }
        Shared::Potential => {
            let roots = sample_roots(dist, n, seed)?;
            let problem = LnkProblem::new(roots, k, &cfg.rootfind)?;
            let annulus = match cfg.annulus {
                Some(mut a) => {
                    a.clear_of(&problem)?;
                    a
                }
                None => AnnulusConfig::for_problem(
                    &problem,
                    (2.0 * cfg.z.norm()).max(1.0),
                    cfg.quad_nodes,
                )?,
            };
            let pj = poisson_jensen(&problem, cfg.z, &annulus)?;
            let lap = laplacian_identity_residual(&problem, &cfg.test_function, cfg.grid_step)?;
            Ok((
                Metrics::Potential(PotentialMetrics {
                    k,
                    annulus_r: annulus.r,
                    annulus_big_r: annulus.big_r,
                    pj_lhs: pj.lhs,
                    pj_residual: pj.residual,
                    laplacian_lhs: lap.lhs,
                    laplacian_rhs: lap.rhs,
                    laplacian_residual: lap.residual,
                    laplacian_jittered: lap.jittered,
                }),
                None,
                None,
            ))
        }
        Shared::LogField => {
            let roots = sample_roots(dist, n, seed)?;
            let field = log_field(&roots, k, cfg.field_radius, cfg.grid_step)?;
            let at_z = match log_abs_lnk(&roots, cfg.z, k) {
                Ok(v) => Some(v / n as f64),
                Err(Error::Pole(_)) => None,
                Err(e) => return Err(e),
            };
            let keep = replicate == 0;
            Ok((
                Metrics::LogField(LogFieldMetrics {
                    k,
                    l2: l2_statistic(&field),
                    field_at_z: at_z,
                    grid_points: field.points.len(),
                    clipped: field.clipped,
                    clip_level: field.clip_level(),
                    field_csv: keep.then(|| output::field_file_name(n)),
                }),
                keep.then_some(field),
                None,
            ))
        }
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<(Shared, Value)> {
    let run_seed = SeedSpec::new(cfg.master_seed, RESERVED_STREAM);
    Ok(match cfg.experiment {
        ExperimentKind::ConvergenceSweep => {
            let probe = DiscrepancyProbe::with_default_family(&cfg.distribution, cfg.quad)?;
            let reference =
                sample_roots(&cfg.distribution, cfg.reference_samples, run_seed.child(0))?;
            let info = json!({
                "test_functions": probe.family(),
                "reference_samples": cfg.reference_samples,
            });
            (Shared::Convergence { probe, reference }, info)
        }
        ExperimentKind::AnticoncSweep => (Shared::Anticonc, Value::Null),
        ExperimentKind::PotentialCheck => (
            Shared::Potential,
            json!({ "test_function": cfg.test_function }),
        ),
        ExperimentKind::LogFieldScan => {
            let moment = mu_inverse_moment(&cfg.distribution, cfg.z, cfg.quad);
            let info = json!({
                "z": cfg.z,
                "mu_inverse_moment": moment,
                // z may sit in the exceptional null set when the moment
                // could not be certified finite
                "z_unverified": !(moment.converged && moment.value.is_finite()),
            });
            (Shared::LogField, info)
        }
    })
}

/// Run-level anti-concentration quantities: the pilot decomposition and,
/// per `n`, the bound formulas evaluated at the pilot's parameters.
fn anticonc_extras(cfg: &ExperimentConfig) -> (Value, Vec<Value>) {
    let run_seed = SeedSpec::new(cfg.master_seed, RESERVED_STREAM);
    let source = cfg.y_source();
    let pilot = pilot_decomposition(
        &cfg.distribution,
        source,
        cfg.pilot_samples,
        run_seed.child(1),
    );
    let constants = json!({ "mnv_b": cfg.mnv_b, "claim_c": cfg.claim_c, "note": "non-paper constants, caller supplied" });
    let info = match &pilot {
        Ok(p) => json!({ "pilot": p, "constants": constants }),
        Err(e) => json!({ "pilot_error": e.to_string(), "constants": constants }),
    };
    let per_n = par::map_range(cfg.n_values.len(), |i| {
        let n = cfg.n_values[i];
        let Ok(k) = k_schedule(n, cfg.k_schedule) else {
            return Value::Null;
        };
        let lnn = (n as f64).ln();
        let eps_k = k as f64 * lnn.ln() / lnn;
        let threshold = epsilon_threshold_check(n, eps_k).ok();
        let mut out = json!({ "eps_k": eps_k, "epsilon_threshold": threshold });
        if let Ok(p) = &pilot {
            out["mnv"] = mnv_entry(p, n, k, cfg.mnv_b);
            out["claim_failure_bound"] = json!(claim_failure_bound(p.q, k, n, cfg.claim_c));
            out["rank"] = match rank_diagnostic(
                &cfg.distribution,
                source,
                n,
                k,
                p,
                cfg.claim_c,
                run_seed.child(2 + i as u64),
            ) {
                Ok(d) => json!(d),
                Err(e) => json!({ "error": e.to_string() }),
            };
        }
        out
    });
    (info, per_n)
}

fn mnv_entry(p: &Pilot, n: usize, k: usize, b: f64) -> Value {
    let r = p.q.powi(2 * k as i32) * n as f64 / (4.0 * k as f64);
    let alpha = p.p.min(1.0 - p.p);
    let r_tilde = (2.0 * alpha).powi(k as i32) * r;
    match mnv_bound(k, p.p, r, b) {
        Ok(v) => json!({ "d": k, "p": p.p, "r": r, "r_tilde": r_tilde, "bound": v }),
        Err(e) => {
            json!({ "d": k, "p": p.p, "r": r, "r_tilde": r_tilde, "bound": null, "reason": e.to_string() })
        }
    }
}

/// Runs every cell of `cfg` and returns the report without touching the
/// file system. Used by [`run_experiment`] and handy for tests.
pub fn run_in_memory(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<RunData> {
    let errs = cfg.validation_errors();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    par::with_workers(workers, || {
        let (shared, mut run_info) = prepare(cfg)?;
        let mut extras = vec![Value::Null; cfg.n_values.len()];
        if cfg.experiment == ExperimentKind::AnticoncSweep {
            let (info, per_n) = anticonc_extras(cfg);
            run_info = info;
            extras = per_n;
        }
        let trials = cfg.trials;
        let cells = cfg.n_values.len() * trials;
        let outputs: Vec<CellOutput> = par::map_range(cells, |c| {
            let (ni, replicate) = (c / trials, c % trials);
            let n = cfg.n_values[ni];
            let seed = SeedSpec::new(cfg.master_seed, c as u64);
            let start = Instant::now();
            let result = run_cell(cfg, &shared, n, replicate, seed);
            let seconds = start.elapsed().as_secs_f64();
            let (metrics, error, field, estimate) = match result {
                Ok((m, f, e)) => (Some(m), None, f, e),
                Err(e) => (None, Some(e.to_string()), None, None),
            };
            CellOutput {
                record: CellRecord {
                    cell: c,
                    n,
                    replicate,
                    seed,
                    metrics,
                    error,
                },
                field,
                estimate,
                seconds,
            }
        });
        let mut records = Vec::with_capacity(cells);
        let mut seconds = Vec::with_capacity(cells);
        let mut fields = Vec::new();
        let mut estimates = Vec::new();
        for o in outputs {
            if let Some(f) = o.field {
                fields.push((o.record.n, f));
            }
            estimates.extend(o.estimate);
            seconds.push(o.seconds);
            records.push(o.record);
        }
        let summaries = cfg
            .n_values
            .iter()
            .zip(extras)
            .map(|(&n, extra)| summarize(cfg, &records, n, extra))
            .collect();
        let report = Report {
            tool: TOOL.into(),
            version: VERSION.into(),
            config_hash: cfg.hash(),
            experiment: cfg.experiment,
            config: cfg.clone(),
            run_info,
            summaries,
            records,
        };
        Ok(RunData {
            report,
            cell_seconds: seconds,
            fields,
            estimates,
        })
    })
}

fn summarize(cfg: &ExperimentConfig, records: &[CellRecord], n: usize, extra: Value) -> NSummary {
    let mine: Vec<&CellRecord> = records.iter().filter(|r| r.n == n).collect();
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in mine.iter().filter(|r| r.ok()) {
        if let Some(m) = &r.metrics {
            for (key, v) in flatten_metrics(m) {
                if let Some(x) = v.as_f64() {
                    columns.entry(key).or_default().push(x);
                }
            }
        }
    }
    let medians = columns
        .into_iter()
        .filter_map(|(key, mut v)| median(&mut v).map(|m| (key, m)))
        .collect();
    NSummary {
        n,
        k: k_schedule(n, cfg.k_schedule).ok(),
        cells_ok: mine.iter().filter(|r| r.ok()).count(),
        cells_failed: mine.iter().filter(|r| !r.ok()).count(),
        medians,
        extra,
    }
}

/// Runs the experiment and writes `results.json`, `results.csv`,
/// `timing.json` (and `estimates.json` or field grids where relevant) into
/// a fresh directory `<out>/<UTC timestamp>-<hash prefix>`.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    let mut cfg = cfg.clone();
    if let Some(s) = opts.seed {
        cfg.master_seed = s;
    }
    if let Some(dir) = &opts.out_dir {
        cfg.output_dir = dir.clone();
    }
    let start = Instant::now();
    let data = run_in_memory(&cfg, opts.workers)?;
    output::write_run(&cfg, data, start.elapsed().as_secs_f64())
}
