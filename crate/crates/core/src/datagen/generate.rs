use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::task::{ClassSpec, NoiseStreams, Physics, TaskSpec};
use crate::dynamics::{sample_noise, NoiseRealization, ProfileSimulator, TimeGrid};
use crate::error::{Error, Result};
use crate::parallel::{try_map_indexed, Jobs};
use crate::seed;

/// One labelled probability profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilitySample {
    pub label: usize,
    pub features: Vec<f64>,
}

/// An ordered collection of samples plus the class-name table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<ProbabilitySample>,
    pub class_names: Vec<String>,
    pub feature_count: usize,
    /// The task that produced the data, when known.
    pub provenance: Option<TaskSpec>,
}

impl Dataset {
    /// Builds a dataset after checking labels and feature lengths.
    pub fn new(samples: Vec<ProbabilitySample>, class_names: Vec<String>, feature_count: usize) -> Result<Self> {
        let ds = Dataset {
            samples,
            class_names,
            feature_count,
            provenance: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_names.is_empty() {
            return Err(Error::Dataset("dataset has no classes".into()));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if s.label >= self.class_names.len() {
                return Err(Error::Dataset(format!(
                    "sample {i} has label {} but only {} classes exist",
                    s.label,
                    self.class_names.len()
                )));
            }
            if s.features.len() != self.feature_count {
                return Err(Error::DimensionMismatch {
                    expected: self.feature_count,
                    found: s.features.len(),
                }
                .context(format!("sample {i}")));
            }
            if s.features.iter().any(|x| !x.is_finite()) {
                return Err(Error::Dataset(format!("sample {i} has a non-finite feature")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// Samples at `indices`, in that order, with the same class table.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            class_names: self.class_names.clone(),
            feature_count: self.feature_count,
            provenance: self.provenance.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TrajectoryKey {
    configuration: String,
    physics: [u64; 6],
    mode: String,
    step_bits: u64,
    stream: u64,
}

type Profiles = Arc<Vec<Vec<f64>>>;

/// Memoizes noisy trajectories across datasets.
///
/// A trajectory is identified by configuration, physics, step and noise
/// stream. Because the integrator takes the same fixed steps whatever the
/// observation grid, a cached profile on a finer or longer grid serves any
/// grid it contains by subsampling, bit for bit.
#[derive(Debug, Default)]
pub struct ProfileCache {
    entries: Mutex<HashMap<TrajectoryKey, Vec<(TimeGrid, Profiles)>>>,
}

impl ProfileCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of stored trajectories.
    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: &TrajectoryKey, grid: TimeGrid) -> Option<Vec<Vec<f64>>> {
        let entries = self.entries.lock().expect("cache lock");
        let (stored, profiles) = entries.get(key)?.iter().find(|(g, _)| g.contains(&grid))?;
        let stride = (grid.observe_every_ns / stored.observe_every_ns) as usize;
        Some(
            profiles
                .iter()
                .map(|p| (0..grid.points()).map(|k| p[k * stride]).collect())
                .collect(),
        )
    }

    fn insert(&self, key: TrajectoryKey, grid: TimeGrid, profiles: Vec<Vec<f64>>) {
        let mut entries = self.entries.lock().expect("cache lock");
        let slot = entries.entry(key).or_default();
        if slot.iter().any(|(g, _)| g.contains(&grid)) {
            return;
        }
        slot.retain(|(g, _)| !grid.contains(g));
        slot.push((grid, Arc::new(profiles)));
    }
}

fn physics_bits(p: &Physics) -> [u64; 6] {
    [
        p.rabi_mhz,
        p.c6_ghz_um6,
        p.dephasing_mhz,
        p.decay_mhz,
        p.noise_mean,
        p.noise_std,
    ]
    .map(f64::to_bits)
}

/// One trajectory to integrate: configuration `position`, noise `stream`.
struct Job {
    position: usize,
    stream: u64,
    sample: usize,
}

/// Noise stream of a trajectory. Per-configuration streams are keyed by the
/// configuration name so that tasks sharing a configuration share noise.
fn stream_counter(spec: &TaskSpec, class: &ClassSpec, class_index: usize) -> u64 {
    match spec.noise_streams {
        NoiseStreams::PerConfiguration => seed::hash_str(&spec.configurations[class.configuration]),
        NoiseStreams::PerClass => seed::derive(class_index as u64, &[u64::MAX]),
    }
}

fn draw(spec: &TaskSpec, stream: u64, sample: usize) -> NoiseRealization {
    let mut rng = seed::rng(spec.seed, &[stream, sample as u64]);
    sample_noise(&spec.physics.noise(), &mut rng)
}

/// The noise realization behind sample `sample` of class `class_index`.
pub fn sample_realization(spec: &TaskSpec, class_index: usize, sample: usize) -> Result<NoiseRealization> {
    let classes = spec.classes()?;
    let class = classes.get(class_index).ok_or(Error::IndexOutOfRange {
        index: class_index,
        len: classes.len(),
    })?;
    Ok(draw(spec, stream_counter(spec, class, class_index), sample))
}

/// [`generate_dataset_with`] on the default worker pool without caching.
pub fn generate_dataset(spec: &TaskSpec) -> Result<Dataset> {
    generate_dataset_with(spec, Jobs::Auto, None)
}

/// Simulates every (class, sample) profile of the task.
///
/// Samples are ordered class by class, and within a class by sample index.
/// The result is identical for every `jobs` setting and with or without a
/// cache.
pub fn generate_dataset_with(spec: &TaskSpec, jobs: Jobs, cache: Option<&ProfileCache>) -> Result<Dataset> {
    spec.validate()?;
    let catalogs = spec.catalogs()?;
    let classes = spec.classes()?;
    let hamiltonian = spec.physics.hamiltonian();
    let simulators = catalogs
        .iter()
        .map(|(config, catalog)| ProfileSimulator::new(config, catalog, &hamiltonian))
        .collect::<Result<Vec<_>>>()?;

    // Distinct trajectories, and for every class the job index of sample 0.
    let mut job_list: Vec<Job> = Vec::new();
    let mut first_job: HashMap<(usize, u64), usize> = HashMap::new();
    let mut class_jobs = Vec::with_capacity(classes.len());
    for (c, class) in classes.iter().enumerate() {
        let stream = stream_counter(spec, class, c);
        let start = *first_job.entry((class.configuration, stream)).or_insert_with(|| {
            let start = job_list.len();
            job_list.extend((0..spec.samples_per_class).map(|sample| Job {
                position: class.configuration,
                stream,
                sample,
            }));
            start
        });
        class_jobs.push(start);
    }

    let mode = spec.physics.mode.to_string();
    let trajectories = try_map_indexed(jobs, job_list.len(), |j| {
        let job = &job_list[j];
        let name = &spec.configurations[job.position];
        let key = TrajectoryKey {
            configuration: name.clone(),
            physics: physics_bits(&spec.physics),
            mode: mode.clone(),
            step_bits: spec.step_ns.to_bits(),
            stream: seed::derive(spec.seed, &[job.stream, job.sample as u64]),
        };
        if let Some(hit) = cache.and_then(|c| c.get(&key, spec.grid)) {
            return Ok(hit);
        }
        let realization = draw(spec, job.stream, job.sample);
        let profiles = simulators[job.position]
            .profiles(&realization, spec.grid, spec.step_ns)
            .map_err(|e| e.context(format!("configuration {name}, sample {}", job.sample)))?;
        if let Some(c) = cache {
            c.insert(key, spec.grid, profiles.clone());
        }
        Ok::<_, Error>(profiles)
    })?;

    let mut samples = Vec::with_capacity(classes.len() * spec.samples_per_class);
    for (label, (class, &start)) in classes.iter().zip(&class_jobs).enumerate() {
        for s in 0..spec.samples_per_class {
            samples.push(ProbabilitySample {
                label,
                features: trajectories[start + s][class.state].clone(),
            });
        }
    }
    let mut ds = Dataset::new(
        samples,
        classes.into_iter().map(|c| c.name).collect(),
        spec.feature_count(),
    )?;
    ds.provenance = Some(spec.clone());
    Ok(ds)
}
