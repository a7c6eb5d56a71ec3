use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{AblationAxis, ExperimentConfig};
use crate::datagen::{generate_dataset_with, save_dataset, stratified_split, Dataset, ProfileCache, TaskSpec};
use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::ml::{
    agresti_coull, default_sizes, evaluate, fit_model, learning_curve, ConfidenceInterval, ConfusionMatrix,
    LearningCurve, ModelKind, ModelParams,
};
use crate::parallel::Jobs;

const REPORT_VERSION: u32 = 1;
const Z_95: f64 = 1.96;

/// Test-set performance of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: ModelKind,
    pub accuracy: f64,
    pub correct: u64,
    pub total: u64,
    pub interval: ConfidenceInterval,
    pub confusion: ConfusionMatrix,
}

impl ModelReport {
    fn from_confusion(model: ModelKind, confusion: ConfusionMatrix) -> Result<Self> {
        let (correct, total) = (confusion.trace(), confusion.total());
        Ok(ModelReport {
            model,
            accuracy: confusion.accuracy(),
            correct,
            total,
            interval: agresti_coull(correct, total, Z_95)?,
            confusion,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    /// Configurations of the swept task, joined by `+`.
    pub set: String,
    pub value: String,
    pub models: Vec<ModelReport>,
}

impl AblationRow {
    pub fn accuracy(&self, kind: ModelKind) -> Option<f64> {
        self.models.iter().find(|m| m.model == kind).map(|m| m.accuracy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub axis: AblationAxis,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn row(&self, set: &str, value: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.set == set && r.value == value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub class_names: Vec<String>,
    pub feature_count: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub test_per_class: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub report_version: u32,
    pub crate_version: String,
    pub name: String,
    pub config: ExperimentConfig,
    pub task: TaskSpec,
    pub dataset: DatasetSummary,
    pub models: Vec<ModelReport>,
    /// Learning-curve sizes count all generated samples; each point
    /// cross-validates the training share of that total.
    pub learning_curves: Vec<LearningCurve>,
    pub ablation: Option<AblationTable>,
}

impl ExperimentReport {
    pub fn model(&self, kind: ModelKind) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.model == kind)
    }

    /// Accuracy equals trace/total and the interval brackets the estimate.
    pub fn check_consistency(&self) -> Result<()> {
        let all = self
            .models
            .iter()
            .chain(self.ablation.iter().flat_map(|t| t.rows.iter().flat_map(|r| &r.models)));
        for m in all {
            let c = &m.confusion;
            if m.accuracy != c.accuracy() || m.correct != c.trace() || m.total != c.total() {
                return Err(Error::Invariant {
                    time_ns: 0,
                    detail: format!("{} accuracy disagrees with its confusion matrix", m.model),
                });
            }
            let ci = &m.interval;
            if !(0.0 <= ci.lower && ci.lower <= ci.estimate && ci.estimate <= ci.upper && ci.upper <= 1.0) {
                return Err(Error::Invariant {
                    time_ns: 0,
                    detail: format!("{} interval is malformed", m.model),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Shared state for a run: worker policy and trajectory cache.
pub struct Runner {
    pub jobs: Jobs,
    pub cache: ProfileCache,
}

impl Default for Runner {
    fn default() -> Self {
        Runner::new(Jobs::Auto)
    }
}

impl Runner {
    pub fn new(jobs: Jobs) -> Self {
        Runner {
            jobs,
            cache: ProfileCache::new(),
        }
    }

    pub fn generate(&self, spec: &TaskSpec) -> Result<Dataset> {
        generate_dataset_with(spec, self.jobs, Some(&self.cache))
    }

    /// Split, train every model on the training share and score the rest.
    pub fn train_and_test(
        &self,
        ds: &Dataset,
        kinds: &[ModelKind],
        test_fraction: f64,
        seed: u64,
    ) -> Result<(Dataset, Dataset, Vec<ModelReport>)> {
        let (train, test) = stratified_split(ds, test_fraction, seed)?;
        let params = ModelParams::seeded(seed);
        let reports = kinds
            .iter()
            .map(|&kind| {
                let model =
                    fit_model(kind, &train, &params, self.jobs).map_err(|e| e.context(format!("training {kind}")))?;
                ModelReport::from_confusion(kind, evaluate(&model, &test, self.jobs)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((train, test, reports))
    }

    fn ablation_row(&self, cfg: &ExperimentConfig, spec: &TaskSpec, value: String) -> Result<AblationRow> {
        let ds = self
            .generate(spec)
            .map_err(|e| e.context(format!("ablation value {value}")))?;
        let (_, _, models) = self.train_and_test(&ds, &cfg.models.kinds(), cfg.test_fraction, cfg.seed)?;
        Ok(AblationRow {
            set: spec.configurations.join("+"),
            value,
            models,
        })
    }

    /// Sweeps `axis` over its configured values for every configuration set.
    pub fn run_ablation(&self, cfg: &ExperimentConfig, axis: AblationAxis) -> Result<AblationTable> {
        let base = cfg.task_spec();
        let mut rows = Vec::new();
        for set in cfg.ablation_configuration_sets() {
            let mut spec = base.clone();
            spec.configurations = set;
            match axis {
                AblationAxis::None => {}
                AblationAxis::InteractionMode => {
                    for mode in cfg.modes() {
                        rows.push(self.ablation_row(cfg, &spec.clone().with_mode(mode), mode.to_string())?);
                    }
                }
                AblationAxis::NoiseLevel => {
                    for [mean, std] in cfg.noise_levels() {
                        let mut s = spec.clone();
                        s.physics.noise_mean = mean;
                        s.physics.noise_std = std;
                        rows.push(self.ablation_row(cfg, &s, format!("{mean}:{std}"))?);
                    }
                }
                AblationAxis::TotalTime | AblationAxis::ObserveEvery => {
                    let grids: Vec<TimeGrid> = if axis == AblationAxis::TotalTime {
                        cfg.total_times()
                            .into_iter()
                            .map(|t| TimeGrid::new(t, cfg.observe_every_ns))
                            .collect::<Result<_>>()?
                    } else {
                        cfg.observe_intervals()
                            .into_iter()
                            .map(|o| TimeGrid::new(cfg.total_time_ns, o))
                            .collect::<Result<_>>()?
                    };
                    // Simulate once on a grid containing every row's grid;
                    // the rows are then served from the cache.
                    if let Some(cover) = covering_grid(&grids) {
                        self.generate(&spec.clone().with_grid(cover))?;
                    }
                    for grid in grids {
                        let value = if axis == AblationAxis::TotalTime {
                            grid.total_ns.to_string()
                        } else {
                            grid.observe_every_ns.to_string()
                        };
                        rows.push(self.ablation_row(cfg, &spec.clone().with_grid(grid), value)?);
                    }
                }
            }
        }
        Ok(AblationTable { axis, rows })
    }

    /// Generate, split, train, evaluate, then the optional learning curve and
    /// ablation, writing every artifact under `out` when given.
    pub fn run_experiment(&self, cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ExperimentReport> {
        let context = |e: Error| e.context(format!("experiment `{}`", cfg.name));
        cfg.validate().map_err(context)?;
        let spec = cfg.task_spec();
        let kinds = cfg.models.kinds();
        let ds = self.generate(&spec).map_err(context)?;
        let (train, test, models) = self
            .train_and_test(&ds, &kinds, cfg.test_fraction, cfg.seed)
            .map_err(context)?;

        let learning_curves = if cfg.learning_curve {
            self.learning_curves(cfg, &train, &kinds).map_err(context)?
        } else {
            Vec::new()
        };
        let ablation = match cfg.ablation {
            AblationAxis::None => None,
            axis => Some(self.run_ablation(cfg, axis).map_err(context)?),
        };

        let report = ExperimentReport {
            report_version: REPORT_VERSION,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            name: cfg.name.clone(),
            config: cfg.clone(),
            task: spec,
            dataset: DatasetSummary {
                class_names: ds.class_names.clone(),
                feature_count: ds.feature_count,
                train_size: train.len(),
                test_size: test.len(),
                test_per_class: test.class_counts(),
            },
            models,
            learning_curves,
            ablation,
        };
        report.check_consistency()?;
        if let Some(dir) = out {
            write_artifacts(&report, cfg.save_dataset.then_some(&ds), dir).map_err(context)?;
        }
        Ok(report)
    }

    pub fn learning_curves(
        &self,
        cfg: &ExperimentConfig,
        train: &Dataset,
        kinds: &[ModelKind],
    ) -> Result<Vec<LearningCurve>> {
        let sizes = if cfg.learning_curve_sizes.is_empty() {
            default_sizes(train.class_count(), cfg.samples_per_class, cfg.learning_curve_points)
        } else {
            cfg.learning_curve_sizes.clone()
        };
        let fraction = 1.0 - cfg.test_fraction;
        kinds
            .iter()
            .map(|&kind| {
                learning_curve(
                    train,
                    kind,
                    &ModelParams::seeded(cfg.seed),
                    cfg.cv_folds,
                    &sizes,
                    fraction,
                    cfg.seed,
                    self.jobs,
                )
            })
            .collect()
    }
}

/// Finest grid whose points include every grid in `grids`.
fn covering_grid(grids: &[TimeGrid]) -> Option<TimeGrid> {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let total = grids.iter().map(|g| g.total_ns).max()?;
    let step = grids.iter().fold(0, |acc, g| gcd(acc, g.observe_every_ns));
    TimeGrid::new(total, step)
        .ok()
        .filter(|c| grids.iter().all(|g| c.contains(g)))
}

/// [`Runner::run_experiment`] with a fresh runner.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Jobs, out: Option<&Path>) -> Result<ExperimentReport> {
    Runner::new(jobs).run_experiment(cfg, out)
}

/// Sweeps total time or observation interval.
pub fn run_time_ablation(cfg: &ExperimentConfig, axis: AblationAxis, jobs: Jobs) -> Result<AblationTable> {
    if !matches!(axis, AblationAxis::TotalTime | AblationAxis::ObserveEvery) {
        return Err(Error::Config(format!("`{axis}` is not a time axis")));
    }
    Runner::new(jobs).run_ablation(cfg, axis)
}

pub fn run_noise_ablation(cfg: &ExperimentConfig, jobs: Jobs) -> Result<AblationTable> {
    Runner::new(jobs).run_ablation(cfg, AblationAxis::NoiseLevel)
}

/// Writes `report.json`, `confusion-<model>.csv`, optional learning-curve and
/// ablation CSVs, and the dataset.
pub fn write_artifacts(report: &ExperimentReport, dataset: Option<&Dataset>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report.to_json()?)?;
    for m in &report.models {
        fs::write(
            dir.join(format!("confusion-{}.csv", m.model)),
            m.confusion.to_csv(&report.dataset.class_names),
        )?;
    }
    for curve in &report.learning_curves {
        let mut csv = String::from("size,used,mean,std\n");
        for p in &curve.points {
            csv += &format!("{},{},{},{}\n", p.size, p.used, p.mean, p.std);
        }
        fs::write(dir.join(format!("learning-curve-{}.csv", curve.model)), csv)?;
    }
    if let Some(table) = &report.ablation {
        let mut csv = String::from("set,value,model,accuracy,lower,upper\n");
        for row in &table.rows {
            for m in &row.models {
                csv += &format!(
                    "{},{},{},{},{},{}\n",
                    row.set, row.value, m.model, m.accuracy, m.interval.lower, m.interval.upper
                );
            }
        }
        fs::write(dir.join("ablation.csv"), csv)?;
    }
    if let Some(ds) = dataset {
        save_dataset(ds, &dir.join("dataset.csv"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::TaskKind;

    fn quick(task: TaskKind, configs: &[&str]) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new("quick", task);
        cfg.configurations = configs.iter().map(|s| s.to_string()).collect();
        cfg.samples_per_class = 10;
        cfg.seed = 3;
        cfg
    }

    #[test]
    fn end_to_end_writes_artifacts() {
        let mut cfg = quick(TaskKind::Excitation, &["T3"]);
        cfg.learning_curve = true;
        cfg.learning_curve_sizes = vec![15, 20];
        cfg.cv_folds = 3;
        let dir = tempfile::tempdir().unwrap();
        let report = run_experiment(&cfg, Jobs::Auto, Some(dir.path())).unwrap();
        assert_eq!(report.models.len(), 2);
        assert_eq!(report.dataset.test_per_class, [2, 2]);
        assert_eq!(report.learning_curves.len(), 2);
        for name in [
            "report.json",
            "confusion-svm.csv",
            "confusion-rfc.csv",
            "learning-curve-rfc.csv",
            "dataset.csv",
        ] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        let again = run_experiment(&cfg, Jobs::Sequential, None).unwrap();
        assert_eq!(report.to_json().unwrap(), again.to_json().unwrap());
    }

    #[test]
    fn time_rows_are_served_from_one_simulation() {
        let mut cfg = quick(TaskKind::AtomCountClosed, &["S1", "B2"]);
        cfg.ablation_total_times_ns = vec![1000, 250, 1000];
        let runner = Runner::default();
        let table = runner.run_ablation(&cfg, AblationAxis::TotalTime).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.rows[0], table.rows[2]);
        assert_eq!(runner.cache.len(), 20);
        let endpoints = run_time_ablation(
            &ExperimentConfig {
                ablation_observe_every_ns: vec![1000],
                ..cfg.clone()
            },
            AblationAxis::ObserveEvery,
            Jobs::Auto,
        )
        .unwrap();
        assert_eq!(endpoints.rows.len(), 1);
        assert!(run_time_ablation(&cfg, AblationAxis::NoiseLevel, Jobs::Auto).is_err());
    }

    #[test]
    fn zero_noise_level_gives_duplicates() {
        let mut cfg = quick(TaskKind::Excitation, &["S1"]);
        cfg.ablation_noise_levels = vec![[0.0, 0.0]];
        let table = run_noise_ablation(&cfg, Jobs::Auto).unwrap();
        assert_eq!(table.rows[0].value, "0:0");
        assert_eq!(table.rows[0].accuracy(ModelKind::Rfc), Some(1.0));
    }

    #[test]
    fn covering_grids() {
        let g = |t, o| TimeGrid::new(t, o).unwrap();
        assert_eq!(covering_grid(&[g(250, 50), g(1000, 50)]), Some(g(1000, 50)));
        assert_eq!(covering_grid(&[g(1000, 100), g(1000, 250)]), Some(g(1000, 50)));
        assert_eq!(covering_grid(&[]), None);
    }
}
