use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datagen::{BasisSelection, NoiseStreams, Physics, TaskKind, TaskSpec};
use crate::dynamics::{TimeGrid, DEFAULT_STEP_NS};
use crate::error::{Error, Result};
use crate::geometry::{configuration_by_name, InteractionMode};
use crate::ml::ModelKind;

/// Environment variable that replaces the configured master seed.
pub const SEED_ENV: &str = "RYDBERG_ID_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Svm,
    Rfc,
    #[default]
    Both,
}

impl ModelChoice {
    pub fn kinds(self) -> Vec<ModelKind> {
        match self {
            ModelChoice::Svm => vec![ModelKind::Svm],
            ModelChoice::Rfc => vec![ModelKind::Rfc],
            ModelChoice::Both => ModelKind::ALL.to_vec(),
        }
    }
}

/// The parameter swept by an ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationAxis {
    #[default]
    None,
    InteractionMode,
    NoiseLevel,
    TotalTime,
    ObserveEvery,
}

impl FromStr for AblationAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => AblationAxis::None,
            "interaction-mode" => AblationAxis::InteractionMode,
            "noise-level" => AblationAxis::NoiseLevel,
            "total-time" => AblationAxis::TotalTime,
            "observe-every" => AblationAxis::ObserveEvery,
            other => return Err(Error::Config(format!("unknown ablation axis `{other}`"))),
        })
    }
}

impl fmt::Display for AblationAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AblationAxis::None => "none",
            AblationAxis::InteractionMode => "interaction-mode",
            AblationAxis::NoiseLevel => "noise-level",
            AblationAxis::TotalTime => "total-time",
            AblationAxis::ObserveEvery => "observe-every",
        })
    }
}

/// A flat key/value experiment description, read from TOML.
///
/// Every key except `name` and `task` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub task: TaskKind,
    /// Defaults to the task's standard configuration list.
    #[serde(default)]
    pub configurations: Vec<String>,
    #[serde(default)]
    pub basis: Option<BasisSelection>,
    #[serde(default)]
    pub mode: InteractionMode,
    #[serde(default = "default_samples")]
    pub samples_per_class: usize,
    #[serde(default = "default_total")]
    pub total_time_ns: u64,
    #[serde(default = "default_observe")]
    pub observe_every_ns: u64,
    #[serde(default = "default_step")]
    pub step_ns: f64,
    #[serde(default = "default_rabi")]
    pub rabi_mhz: f64,
    #[serde(default = "default_c6")]
    pub c6_ghz_um6: f64,
    #[serde(default = "default_dephasing")]
    pub dephasing_mhz: f64,
    #[serde(default = "default_decay")]
    pub decay_mhz: f64,
    #[serde(default = "default_noise_mean")]
    pub noise_mean: f64,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
    #[serde(default)]
    pub noise_streams: NoiseStreams,
    #[serde(default)]
    pub models: ModelChoice,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub learning_curve: bool,
    /// Explicit learning-curve totals; otherwise evenly spaced.
    #[serde(default)]
    pub learning_curve_sizes: Vec<usize>,
    #[serde(default = "default_curve_points")]
    pub learning_curve_points: usize,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    #[serde(default)]
    pub ablation: AblationAxis,
    /// Configuration sets swept by the ablation, each written as names
    /// joined by `+`. Defaults to the experiment's own configurations.
    #[serde(default)]
    pub ablation_sets: Vec<String>,
    #[serde(default)]
    pub ablation_modes: Vec<InteractionMode>,
    /// `[mean, std]` pairs.
    #[serde(default)]
    pub ablation_noise_levels: Vec<[f64; 2]>,
    #[serde(default)]
    pub ablation_total_times_ns: Vec<u64>,
    #[serde(default)]
    pub ablation_observe_every_ns: Vec<u64>,
    /// Save the generated dataset next to the report.
    #[serde(default = "default_true")]
    pub save_dataset: bool,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    300
}
fn default_total() -> u64 {
    1000
}
fn default_observe() -> u64 {
    50
}
fn default_step() -> f64 {
    DEFAULT_STEP_NS
}
fn default_rabi() -> f64 {
    Physics::default().rabi_mhz
}
fn default_c6() -> f64 {
    Physics::default().c6_ghz_um6
}
fn default_dephasing() -> f64 {
    Physics::default().dephasing_mhz
}
fn default_decay() -> f64 {
    Physics::default().decay_mhz
}
fn default_noise_mean() -> f64 {
    Physics::default().noise_mean
}
fn default_noise_std() -> f64 {
    Physics::default().noise_std
}
fn default_test_fraction() -> f64 {
    0.2
}
fn default_curve_points() -> usize {
    10
}
fn default_folds() -> usize {
    10
}
fn default_true() -> bool {
    true
}
fn default_output() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    /// A config with every default filled in.
    pub fn new(name: &str, task: TaskKind) -> Self {
        let text = format!("name = {name:?}\ntask = \"{task}\"\n");
        toml::from_str(&text).expect("defaults deserialize")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, applies the seed override from the environment and validates.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| e.context(path.display().to_string()))?;
        cfg.apply_env()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(value) = std::env::var(SEED_ENV) {
            self.seed = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}=`{value}` is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn physics(&self) -> Physics {
        Physics {
            rabi_mhz: self.rabi_mhz,
            c6_ghz_um6: self.c6_ghz_um6,
            dephasing_mhz: self.dephasing_mhz,
            decay_mhz: self.decay_mhz,
            noise_mean: self.noise_mean,
            noise_std: self.noise_std,
            mode: self.mode,
        }
    }

    pub fn task_spec(&self) -> TaskSpec {
        let mut spec = TaskSpec::new(self.task);
        if !self.configurations.is_empty() {
            spec.configurations = self.configurations.clone();
        }
        if let Some(b) = self.basis {
            spec.basis = b;
        }
        spec.physics = self.physics();
        spec.samples_per_class = self.samples_per_class;
        spec.grid = TimeGrid {
            total_ns: self.total_time_ns,
            observe_every_ns: self.observe_every_ns,
        };
        spec.step_ns = self.step_ns;
        spec.seed = self.seed;
        spec.noise_streams = self.noise_streams;
        spec
    }

    /// Configuration lists swept by the ablation.
    pub fn ablation_configuration_sets(&self) -> Vec<Vec<String>> {
        if self.ablation_sets.is_empty() {
            vec![self.task_spec().configurations]
        } else {
            self.ablation_sets
                .iter()
                .map(|s| s.split('+').map(|n| n.trim().to_string()).collect())
                .collect()
        }
    }

    pub fn modes(&self) -> Vec<InteractionMode> {
        if self.ablation_modes.is_empty() {
            vec![InteractionMode::Nnn, InteractionMode::Nn]
        } else {
            self.ablation_modes.clone()
        }
    }

    pub fn noise_levels(&self) -> Vec<[f64; 2]> {
        if self.ablation_noise_levels.is_empty() {
            vec![[0.03, 0.01], [0.07, 0.02], [0.10, 0.05]]
        } else {
            self.ablation_noise_levels.clone()
        }
    }

    pub fn total_times(&self) -> Vec<u64> {
        if self.ablation_total_times_ns.is_empty() {
            vec![250, 500, 750, 1000]
        } else {
            self.ablation_total_times_ns.clone()
        }
    }

    pub fn observe_intervals(&self) -> Vec<u64> {
        if self.ablation_observe_every_ns.is_empty() {
            vec![50, 100, 200, 250]
        } else {
            self.ablation_observe_every_ns.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("experiment name is empty".into()));
        }
        let spec = self.task_spec();
        for name in spec
            .configurations
            .iter()
            .chain(self.ablation_configuration_sets().iter().flatten())
        {
            configuration_by_name(name).map_err(|e| e.context(format!("experiment `{}`", self.name)))?;
        }
        spec.validate()?;
        if !(0.0..1.0).contains(&self.test_fraction) || self.test_fraction == 0.0 {
            return Err(Error::Config(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        if self.learning_curve && self.learning_curve_sizes.is_empty() && self.learning_curve_points == 0 {
            return Err(Error::Config("learning_curve_points must be positive".into()));
        }
        for [mean, std] in self.noise_levels() {
            if !(mean >= 0.0 && std >= 0.0) {
                return Err(Error::Config(format!("noise level ({mean}, {std}) is negative")));
            }
        }
        match self.ablation {
            AblationAxis::TotalTime => {
                for t in self.total_times() {
                    TimeGrid::new(t, self.observe_every_ns)?;
                }
            }
            AblationAxis::ObserveEvery => {
                for o in self.observe_intervals() {
                    TimeGrid::new(self.total_time_ns, o)?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}
