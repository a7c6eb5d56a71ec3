use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::{build_basis_catalog, BasisCatalog};
use crate::dynamics::{mhz, HamiltonianParams, NoiseParams, TimeGrid, DEFAULT_STEP_NS};
use crate::error::{Error, Result};
use crate::geometry::{blockade_radius, configuration_by_name, AtomConfiguration, InteractionMode};

/// The classification questions the dataset can pose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    /// Ground-state profiles of S1, B2 and chains of 3–6 atoms.
    AtomCountLinear,
    /// Ground-state profiles of S1, B2, T3, C4, P5 and H6.
    AtomCountClosed,
    /// Ground-state profiles of the four-atom graphs S4, K4, C4, K4e.
    GraphsFour,
    /// Every base state of a single configuration.
    Excitation,
    /// Every base state of several configurations together.
    Combined,
}

impl TaskKind {
    pub fn default_configurations(self) -> Vec<String> {
        let names: &[&str] = match self {
            TaskKind::AtomCountLinear => &["S1", "B2", "chain-3", "chain-4", "chain-5", "chain-6"],
            TaskKind::AtomCountClosed => &["S1", "B2", "T3", "C4", "P5", "H6"],
            TaskKind::GraphsFour => &["S4", "K4", "C4", "K4e"],
            TaskKind::Excitation => &["T3"],
            TaskKind::Combined => &["C4", "chain-4"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn default_basis(self) -> BasisSelection {
        match self {
            TaskKind::Excitation | TaskKind::Combined => BasisSelection::Full,
            _ => BasisSelection::Ground,
        }
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "atom-count-linear" => TaskKind::AtomCountLinear,
            "atom-count-closed" => TaskKind::AtomCountClosed,
            "graphs-four" => TaskKind::GraphsFour,
            "excitation" => TaskKind::Excitation,
            "combined" => TaskKind::Combined,
            other => return Err(Error::Config(format!("unknown task `{other}`"))),
        })
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::AtomCountLinear => "atom-count-linear",
            TaskKind::AtomCountClosed => "atom-count-closed",
            TaskKind::GraphsFour => "graphs-four",
            TaskKind::Excitation => "excitation",
            TaskKind::Combined => "combined",
        })
    }
}

/// Which catalog states of each configuration become classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisSelection {
    Ground,
    Full,
}

/// How noise realizations are keyed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseStreams {
    /// One trajectory per (configuration, sample index) feeds every class of
    /// that configuration.
    #[default]
    PerConfiguration,
    /// Every (class, sample index) pair has its own trajectory.
    PerClass,
}

impl FromStr for NoiseStreams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-configuration" => Ok(NoiseStreams::PerConfiguration),
            "per-class" => Ok(NoiseStreams::PerClass),
            other => Err(Error::Config(format!("unknown noise stream policy `{other}`"))),
        }
    }
}

/// Physical constants in laboratory units, as they appear in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    pub rabi_mhz: f64,
    pub c6_ghz_um6: f64,
    pub dephasing_mhz: f64,
    pub decay_mhz: f64,
    pub noise_mean: f64,
    pub noise_std: f64,
    pub mode: InteractionMode,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            rabi_mhz: 1.0,
            c6_ghz_um6: 863.0,
            dephasing_mhz: 0.05,
            decay_mhz: 0.01,
            noise_mean: 0.03,
            noise_std: 0.01,
            mode: InteractionMode::Nnn,
        }
    }
}

impl Physics {
    pub fn hamiltonian(&self) -> HamiltonianParams {
        HamiltonianParams {
            rabi: mhz(self.rabi_mhz),
            c6: mhz(self.c6_ghz_um6 * 1e3),
            mode: self.mode,
        }
    }

    pub fn noise(&self) -> NoiseParams {
        NoiseParams {
            intensity_mean: self.noise_mean,
            intensity_std: self.noise_std,
            base_dephasing: mhz(self.dephasing_mhz),
            base_decay: mhz(self.decay_mhz),
            ..NoiseParams::default()
        }
    }

    pub fn blockade_radius(&self) -> Result<f64> {
        let h = self.hamiltonian();
        blockade_radius(h.c6, h.rabi)
    }

    pub fn validate(&self) -> Result<()> {
        self.hamiltonian().validate()?;
        self.noise().validate()
    }
}

/// Everything needed to regenerate a dataset bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub configurations: Vec<String>,
    pub basis: BasisSelection,
    pub physics: Physics,
    pub samples_per_class: usize,
    pub grid: TimeGrid,
    pub step_ns: f64,
    pub seed: u64,
    #[serde(default)]
    pub noise_streams: NoiseStreams,
}

impl TaskSpec {
    pub fn new(kind: TaskKind) -> Self {
        TaskSpec {
            kind,
            configurations: kind.default_configurations(),
            basis: kind.default_basis(),
            physics: Physics::default(),
            samples_per_class: 300,
            grid: TimeGrid::default(),
            step_ns: DEFAULT_STEP_NS,
            seed: 0,
            noise_streams: NoiseStreams::default(),
        }
    }

    pub fn with_configurations(mut self, names: &[&str]) -> Self {
        self.configurations = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_samples(mut self, samples_per_class: usize) -> Self {
        self.samples_per_class = samples_per_class;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: InteractionMode) -> Self {
        self.physics.mode = mode;
        self
    }

    pub fn with_grid(mut self, grid: TimeGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_physics(mut self, physics: Physics) -> Self {
        self.physics = physics;
        self
    }

    pub fn with_noise_streams(mut self, streams: NoiseStreams) -> Self {
        self.noise_streams = streams;
        self
    }

    /// Features per sample.
    pub fn feature_count(&self) -> usize {
        self.grid.points()
    }

    pub fn validate(&self) -> Result<()> {
        if self.configurations.is_empty() {
            return Err(Error::Config("task names no configurations".into()));
        }
        if self.samples_per_class == 0 {
            return Err(Error::Config("samples_per_class must be positive".into()));
        }
        self.physics.validate()?;
        if self.step_ns.is_nan() || self.step_ns <= 0.0 {
            return Err(Error::Config(format!("step_ns must be positive, got {}", self.step_ns)));
        }
        TimeGrid::new(self.grid.total_ns, self.grid.observe_every_ns)?;
        if self.classes()?.len() < 2 {
            return Err(Error::Config("a classification task needs at least two classes".into()));
        }
        Ok(())
    }

    /// Configurations with their basis catalogs, in task order.
    pub fn catalogs(&self) -> Result<Vec<(AtomConfiguration, BasisCatalog)>> {
        let radius = self.physics.blockade_radius()?;
        self.configurations
            .iter()
            .map(|name| {
                let config = configuration_by_name(name)?;
                let catalog = build_basis_catalog(&config, radius);
                Ok((config, catalog))
            })
            .collect()
    }

    /// Class table: label `i` is `classes()[i]`.
    pub fn classes(&self) -> Result<Vec<ClassSpec>> {
        let mut classes = Vec::new();
        let multi = self.configurations.len() > 1;
        for (position, (config, catalog)) in self.catalogs()?.into_iter().enumerate() {
            let states = match self.basis {
                BasisSelection::Ground => &catalog.states[..1],
                BasisSelection::Full => &catalog.states[..],
            };
            for w in states {
                let name = match (self.basis, multi) {
                    (BasisSelection::Ground, _) => config.name().to_string(),
                    (BasisSelection::Full, true) => format!("{}:{}", config.name(), w.label),
                    (BasisSelection::Full, false) => w.label.clone(),
                };
                classes.push(ClassSpec {
                    configuration: position,
                    state: w.id,
                    name,
                });
            }
        }
        Ok(classes)
    }
}

/// One class: a catalog state of one of the task's configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSpec {
    /// Index into [`TaskSpec::configurations`].
    pub configuration: usize,
    pub state: usize,
    pub name: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_tables() {
        let closed = TaskSpec::new(TaskKind::AtomCountClosed).classes().unwrap();
        let names: Vec<_> = closed.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["S1", "B2", "T3", "C4", "P5", "H6"]);

        let t3 = TaskSpec::new(TaskKind::Excitation).classes().unwrap();
        assert_eq!(t3.len(), 2);
        assert_eq!(t3[1].name, "W1");

        let combined = TaskSpec::new(TaskKind::Combined)
            .with_configurations(&["P5", "chain-5"])
            .classes()
            .unwrap();
        assert_eq!(combined.len(), 12);
        assert_eq!(combined[3].name, "chain-5:W0");
    }

    #[test]
    fn validation() {
        assert!(TaskSpec::new(TaskKind::GraphsFour).validate().is_ok());
        let single = TaskSpec::new(TaskKind::Excitation).with_configurations(&["S1"]);
        assert!(single.validate().is_ok());
        let mut lonely = TaskSpec::new(TaskKind::AtomCountClosed).with_configurations(&["T3"]);
        assert!(lonely.validate().is_err());
        lonely.configurations.clear();
        assert!(lonely.validate().is_err());
        let unknown = TaskSpec::new(TaskKind::AtomCountClosed).with_configurations(&["Q7", "T3"]);
        assert!(unknown.validate().is_err());
        assert!("atom-count-closed".parse::<TaskKind>().is_ok());
        assert!("bogus".parse::<TaskKind>().is_err());
    }
}
