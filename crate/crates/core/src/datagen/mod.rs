//! Labelled profile datasets: generation, stratified splitting, feature
//! standardization and CSV persistence.

mod generate;
mod io;
mod scaler;
mod split;
mod task;

pub use generate::{
    generate_dataset, generate_dataset_with, sample_realization, Dataset, ProbabilitySample, ProfileCache,
};
pub use io::{load_dataset, load_dataset_expecting, provenance_path, save_dataset, Provenance};
pub use scaler::FeatureScaler;
pub use split::{stratified_folds, stratified_split, stratified_subsample};
pub use task::{BasisSelection, ClassSpec, NoiseStreams, Physics, TaskKind, TaskSpec};
