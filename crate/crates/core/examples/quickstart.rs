//! Generate a small chain-4 excitation dataset, train both models and print their
//! test accuracy.

use rydberg_id::datagen::{generate_dataset, stratified_split, TaskKind, TaskSpec};
use rydberg_id::ml::{evaluate, fit_model, ModelKind, ModelParams};
use rydberg_id::parallel::Jobs;

fn main() -> rydberg_id::Result<()> {
    let spec = TaskSpec::new(TaskKind::Excitation)
        .with_configurations(&["chain-4"])
        .with_samples(100)
        .with_seed(7);
    let data = generate_dataset(&spec)?;
    let (train, test) = stratified_split(&data, 0.2, spec.seed)?;
    for kind in ModelKind::ALL {
        let model = fit_model(kind, &train, &ModelParams::seeded(spec.seed), Jobs::Auto)?;
        let confusion = evaluate(&model, &test, Jobs::Auto)?;
        println!(
            "{kind}: accuracy {:.3} on {} test samples",
            confusion.accuracy(),
            test.len()
        );
    }
    Ok(())
}
