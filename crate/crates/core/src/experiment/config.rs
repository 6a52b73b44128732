//! The experiment config document (TOML) and its validation.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::anticonc::{k_schedule, KSchedule, YSource};
use crate::error::{Error, Result};
use crate::measures::TestFunction;
use crate::potential::AnnulusConfig;
use crate::quad::QuadBudget;
use crate::rootfind::RootFindConfig;
use crate::sampler::RootDistribution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ConvergenceSweep,
    AnticoncSweep,
    PotentialCheck,
    LogFieldScan,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ConvergenceSweep => "convergence_sweep",
            ExperimentKind::AnticoncSweep => "anticonc_sweep",
            ExperimentKind::PotentialCheck => "potential_check",
            ExperimentKind::LogFieldScan => "log_field_scan",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YSourceKind {
    /// `Y = 1 / (z - X)`.
    Transform,
    /// `Y = X`.
    Direct,
}

/// A fully validated experiment description.
///
/// `trials` is the number of independent replicates (seeds) per `n`;
/// `mc_trials` is the number of Monte Carlo draws inside one small-ball
/// estimate. `output_dir` does not enter the config hash.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub distribution: RootDistribution,
    pub n_values: Vec<usize>,
    pub k_schedule: KSchedule,
    pub master_seed: u64,
    pub trials: usize,
    pub mc_trials: usize,
    pub epsilon: f64,
    pub z: Complex64,
    pub y_source: YSourceKind,
    pub degeneracy_guard: bool,
    pub quad_nodes: usize,
    pub annulus: Option<AnnulusConfig>,
    pub grid_step: f64,
    pub test_function: TestFunction,
    pub field_radius: f64,
    pub reference_samples: usize,
    pub pilot_samples: usize,
    /// Unknown absolute constant of the Littlewood-Offord bound. Not a
    /// published value.
    pub mnv_b: f64,
    /// Unknown constant of the block-count failure bound. Not a published
    /// value.
    pub claim_c: f64,
    pub rootfind: RootFindConfig,
    pub quad: QuadBudget,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

const REQUIRED: [&str; 3] = ["experiment", "distribution", "n_values"];

const KNOWN: [&str; 24] = [
    "experiment",
    "distribution",
    "n_values",
    "k_schedule",
    "master_seed",
    "trials",
    "mc_trials",
    "epsilon",
    "z",
    "y_source",
    "degeneracy_guard",
    "quad_nodes",
    "annulus",
    "grid_step",
    "test_function",
    "field_radius",
    "reference_samples",
    "pilot_samples",
    "mnv_b",
    "claim_c",
    "rootfind",
    "quad",
    "output_dir",
    "seeds",
];

impl ExperimentConfig {
    /// Minimal config with every optional field at its default.
    pub fn new(
        experiment: ExperimentKind,
        distribution: RootDistribution,
        n_values: Vec<usize>,
    ) -> Self {
        ExperimentConfig {
            experiment,
            distribution,
            n_values,
            k_schedule: KSchedule::Paper,
            master_seed: 0,
            trials: 20,
            mc_trials: 10_000,
            epsilon: 0.1,
            z: Complex64::new(0.3, 0.2),
            y_source: YSourceKind::Transform,
            degeneracy_guard: true,
            quad_nodes: 4096,
            annulus: None,
            grid_step: 0.01,
            test_function: TestFunction {
                center: Complex64::new(0.0, 0.0),
                radius: 3.0,
            },
            field_radius: 1.0,
            reference_samples: 2000,
            pilot_samples: 10_000,
            mnv_b: 1.0,
            claim_c: 1.0,
            rootfind: RootFindConfig::default(),
            quad: QuadBudget::default(),
            output_dir: PathBuf::from("results"),
        }
    }

    pub fn y_source(&self) -> YSource {
        match self.y_source {
            YSourceKind::Transform => YSource::Transform { z: self.z },
            YSourceKind::Direct => YSource::Direct,
        }
    }

    /// Every semantic problem with the config, each prefixed by its field.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = self.distribution.validation_errors("distribution");
        errs.extend(self.k_schedule.validation_errors("k_schedule"));
        errs.extend(self.rootfind.validation_errors("rootfind"));
        if self.n_values.is_empty() {
            errs.push("n_values: at least one value is required".into());
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            errs.push("n_values not increasing".into());
        }
        if self.k_schedule.validation_errors("").is_empty() {
            for &n in &self.n_values {
                if let Err(e) = k_schedule(n, self.k_schedule) {
                    errs.push(format!("k_schedule: n = {n}: {e}"));
                }
            }
        }
        let positive = |v: f64, field: &str, errs: &mut Vec<String>| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!(
                    "{field}: must be a positive finite number, got {v}"
                ));
            }
        };
        positive(self.epsilon, "epsilon", &mut errs);
        positive(self.grid_step, "grid_step", &mut errs);
        positive(self.field_radius, "field_radius", &mut errs);
        positive(self.test_function.radius, "test_function.radius", &mut errs);
        positive(self.mnv_b, "mnv_b", &mut errs);
        positive(self.claim_c, "claim_c", &mut errs);
        positive(self.quad.abs_tol, "quad.abs_tol", &mut errs);
        for (v, field) in [
            (self.trials, "trials"),
            (self.mc_trials, "mc_trials"),
            (self.reference_samples, "reference_samples"),
        ] {
            if v == 0 {
                errs.push(format!("{field}: must be positive"));
            }
        }
        if self.pilot_samples < 4 {
            errs.push("pilot_samples: must be at least 4".into());
        }
        if !(self.z.re.is_finite() && self.z.im.is_finite()) {
            errs.push("z: must be finite".into());
        }
        if !self.quad_nodes.is_power_of_two() {
            errs.push("quad_nodes: must be a power of two".into());
        }
        if let Some(a) = &self.annulus {
            errs.extend(a.validation_errors("annulus"));
            if self.experiment == ExperimentKind::PotentialCheck && self.z.norm() >= a.r {
                errs.push(format!(
                    "z: |z| = {} must be below annulus.r = {}",
                    self.z.norm(),
                    a.r
                ));
            }
        }
        if self.experiment == ExperimentKind::AnticoncSweep && errs.is_empty() {
            if self.y_source == YSourceKind::Transform
                && self.distribution.atom_mass_at(self.z) > 0.0
            {
                errs.push(format!("z: {} is an atom of the distribution", self.z));
            }
            if self.degeneracy_guard && self.distribution.is_degenerate() {
                errs.push("distribution: Y is almost surely constant (set degeneracy_guard = false to allow)".into());
            }
        }
        errs
    }

    /// SHA-256 (hex) of the canonical JSON form of the config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

fn take<T: DeserializeOwned>(
    table: &mut toml::Table,
    key: &str,
    errs: &mut Vec<String>,
) -> Option<T> {
    let v = table.remove(key)?;
    match v.try_into::<T>() {
        Ok(t) => Some(t),
        Err(e) => {
            errs.push(format!("{key}: {}", e.message().trim()));
            None
        }
    }
}

/// Parses and validates a config document, reporting every problem found
/// rather than stopping at the first.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        Error::Config(vec![format!("syntax: {}", e.message().trim())])
    })?;
    let mut errs = Vec::new();
    for key in table.keys() {
        if !KNOWN.contains(&key.as_str()) {
            errs.push(format!("{key}: unknown field"));
        }
    }
    for key in REQUIRED {
        if !table.contains_key(key) {
            errs.push(format!("{key}: missing required field"));
        }
    }
    if table.contains_key("seeds") && table.contains_key("trials") {
        errs.push("seeds: give either trials or seeds, not both".into());
    }

    let experiment: Option<ExperimentKind> = take(&mut table, "experiment", &mut errs);
    let distribution: Option<RootDistribution> = take(&mut table, "distribution", &mut errs);
    let n_values: Option<Vec<usize>> = take(&mut table, "n_values", &mut errs);
    let mut cfg = ExperimentConfig::new(
        experiment.unwrap_or(ExperimentKind::ConvergenceSweep),
        distribution.unwrap_or(RootDistribution::uniform_disk(1.0)),
        n_values.unwrap_or_default(),
    );
    macro_rules! field {
        ($name:ident) => {
            if let Some(v) = take(&mut table, stringify!($name), &mut errs) {
                cfg.$name = v;
            }
        };
    }
    field!(k_schedule);
    field!(master_seed);
    field!(trials);
    if let Some(v) = take(&mut table, "seeds", &mut errs) {
        cfg.trials = v;
    }
    field!(mc_trials);
    field!(epsilon);
    field!(z);
    field!(y_source);
    field!(degeneracy_guard);
    field!(quad_nodes);
    if let Some(toml::Value::Table(a)) = table.get_mut("annulus") {
        if !a.contains_key("quad_nodes") {
            a.insert(
                "quad_nodes".into(),
                toml::Value::Integer(cfg.quad_nodes as i64),
            );
        }
    }
    if let Some(a) = take(&mut table, "annulus", &mut errs) {
        cfg.annulus = Some(a);
    }
    field!(grid_step);
    field!(test_function);
    field!(field_radius);
    field!(reference_samples);
    field!(pilot_samples);
    field!(mnv_b);
    field!(claim_c);
    field!(rootfind);
    field!(quad);
    field!(output_dir);

    if errs.is_empty() {
        errs = cfg.validation_errors();
    }
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(errs))
    }
}
