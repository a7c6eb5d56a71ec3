use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rydberg_id::basis::build_basis_catalog;
use rydberg_id::datagen::{load_dataset, save_dataset, stratified_split};
use rydberg_id::experiment::{
    audit_invariants, emit_profiles, profile_table, AblationAxis, ExperimentConfig, ExperimentReport, Runner,
};
use rydberg_id::geometry::{blockade_graph, configuration_by_name, interaction_pairs, InteractionMode, CATALOG};
use rydberg_id::ml::{agresti_coull, evaluate, fit_model, load_model, save_model, ModelKind, ModelParams};
use rydberg_id::parallel::Jobs;

#[derive(Parser)]
#[command(
    name = "rydberg-id",
    version,
    about = "Simulate Rydberg-atom arrays and identify them with SVM and random-forest classifiers"
)]
struct Cli {
    /// Worker threads (1 runs sequentially; default uses every core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in atom configurations.
    ListConfigs,
    /// Print the symmetrized basis of a configuration in ket notation.
    ListBasis { config: String },
    /// Noiseless probability curves of every base state, as CSV.
    Profiles {
        config: String,
        #[arg(long, default_value_t = 21)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the dataset described by an experiment file.
    Generate {
        experiment: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train one model on a dataset CSV and save it as JSON.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score a saved model on a dataset CSV.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Write the confusion matrix here as CSV.
        #[arg(long)]
        confusion: Option<PathBuf>,
    },
    /// Split a dataset CSV into stratified train and test files.
    Split {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        test_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Run an experiment end to end and write its artifacts.
    Run {
        experiment: PathBuf,
        /// Defaults to the experiment's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run an experiment with k-fold learning curves enabled.
    LearningCurve {
        experiment: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run an experiment with the given ablation axis.
    Ablate {
        experiment: PathBuf,
        #[arg(long)]
        axis: AblationAxis,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check density-matrix invariants on the first samples of an experiment.
    Audit {
        experiment: PathBuf,
        #[arg(long, default_value_t = 2)]
        samples: usize,
    },
}

#[derive(clap::Args)]
struct Overrides {
    /// Replace `samples_per_class`.
    #[arg(long)]
    samples: Option<usize>,
    /// Replace the master seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn load_experiment(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(s) = overrides.samples {
        cfg.samples_per_class = s;
    }
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(report: &ExperimentReport) {
    println!(
        "{}: {} classes, {} test samples",
        report.name,
        report.dataset.class_names.len(),
        report.dataset.test_size
    );
    for m in &report.models {
        println!(
            "  {:3} accuracy {:.4} ({}/{})  95% CI [{:.4}, {:.4}]",
            m.model, m.accuracy, m.correct, m.total, m.interval.lower, m.interval.upper
        );
    }
    for curve in &report.learning_curves {
        if let Some(last) = curve.points.last() {
            println!(
                "  {:3} {}-fold CV at N={}: {:.4} ± {:.4}",
                curve.model, curve.k, last.size, last.mean, last.std
            );
        }
    }
    if let Some(table) = &report.ablation {
        println!("  ablation over {}:", table.axis);
        for row in &table.rows {
            let scores: Vec<String> = row
                .models
                .iter()
                .map(|m| format!("{} {:.4}", m.model, m.accuracy))
                .collect();
            println!("    {:14} {:10} {}", row.set, row.value, scores.join("  "));
        }
    }
}

fn run_and_report(cfg: &ExperimentConfig, out: Option<PathBuf>, jobs: Jobs) -> Result<()> {
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    let report = Runner::new(jobs).run_experiment(cfg, Some(&dir))?;
    print_report(&report);
    println!("artifacts written to {}", dir.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let jobs = Jobs::from_count(cli.jobs);
    match cli.command {
        Command::ListConfigs => {
            for name in CATALOG {
                let config = configuration_by_name(name)?;
                println!(
                    "{:8} atoms={} nn_pairs={} nnn_pairs={}",
                    name,
                    config.atom_count(),
                    interaction_pairs(&config, InteractionMode::Nn).len(),
                    interaction_pairs(&config, InteractionMode::Nnn).len()
                );
            }
        }
        Command::ListBasis { config } => {
            let physics = rydberg_id::datagen::Physics::default();
            let c = configuration_by_name(&config)?;
            let radius = physics.blockade_radius()?;
            let catalog = build_basis_catalog(&c, radius);
            println!(
                "{}: N_ID = {} (blockade radius {:.3} μm, {} blockade edges)",
                config,
                catalog.len(),
                radius,
                blockade_graph(&c, radius).edges().len()
            );
            for w in &catalog.states {
                println!(
                    "{:3} {:4} N_Ryd={} {}",
                    w.id,
                    w.label,
                    w.excitations,
                    w.display(c.atom_count())
                );
            }
        }
        Command::Profiles { config, points, out } => {
            let physics = rydberg_id::datagen::Physics::default();
            match out {
                Some(path) => {
                    emit_profiles(&config, points, &physics, &path)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{}", profile_table(&config, points, &physics)?.to_csv()),
            }
        }
        Command::Generate {
            experiment,
            out,
            overrides,
        } => {
            let cfg = load_experiment(&experiment, &overrides)?;
            let ds = Runner::new(jobs).generate(&cfg.task_spec())?;
            save_dataset(&ds, &out)?;
            println!(
                "wrote {} samples × {} features to {}",
                ds.len(),
                ds.feature_count,
                out.display()
            );
        }
        Command::Train { data, model, out, seed } => {
            let ds = load_dataset(&data)?;
            let m = fit_model(model, &ds, &ModelParams::seeded(seed), jobs)?;
            save_model(&m, &ds.class_names, &out)?;
            println!("trained {model} on {} samples, saved to {}", ds.len(), out.display());
        }
        Command::Evaluate { model, data, confusion } => {
            let (m, names) = load_model(&model)?;
            let ds = load_dataset(&data)?;
            if names != ds.class_names {
                bail!(
                    "model classes {names:?} differ from dataset classes {:?}",
                    ds.class_names
                );
            }
            let cm = evaluate(&m, &ds, jobs)?;
            let ci = agresti_coull(cm.trace(), cm.total(), 1.96)?;
            println!(
                "{} accuracy {:.4} ({}/{})  95% CI [{:.4}, {:.4}]",
                m.kind(),
                cm.accuracy(),
                cm.trace(),
                cm.total(),
                ci.lower,
                ci.upper
            );
            let csv = cm.to_csv(&names);
            match confusion {
                Some(path) => fs::write(&path, csv).with_context(|| path.display().to_string())?,
                None => print!("{csv}"),
            }
        }
        Command::Split {
            data,
            test_fraction,
            seed,
            train_out,
            test_out,
        } => {
            let ds = load_dataset(&data)?;
            let (train, test) = stratified_split(&ds, test_fraction, seed)?;
            save_dataset(&train, &train_out)?;
            save_dataset(&test, &test_out)?;
            println!("train {} / test {}", train.len(), test.len());
        }
        Command::Run {
            experiment,
            out,
            overrides,
        } => {
            let cfg = load_experiment(&experiment, &overrides)?;
            run_and_report(&cfg, out, jobs)?;
        }
        Command::LearningCurve {
            experiment,
            out,
            overrides,
        } => {
            let mut cfg = load_experiment(&experiment, &overrides)?;
            cfg.learning_curve = true;
            cfg.ablation = AblationAxis::None;
            run_and_report(&cfg, out, jobs)?;
        }
        Command::Ablate {
            experiment,
            axis,
            out,
            overrides,
        } => {
            let mut cfg = load_experiment(&experiment, &overrides)?;
            if axis == AblationAxis::None {
                bail!("choose an ablation axis other than `none`");
            }
            cfg.ablation = axis;
            cfg.learning_curve = false;
            run_and_report(&cfg, out, jobs)?;
        }
        Command::Audit { experiment, samples } => {
            let cfg = ExperimentConfig::from_file(&experiment)?;
            let audit = audit_invariants(&cfg.task_spec(), samples)?;
            for c in &audit.configurations {
                println!(
                    "{:8} trace {:.1e}  hermiticity {:.1e}  min eigenvalue {:.1e}  step halving {:.1e}  reduced vs full {:.1e}  {}",
                    c.configuration,
                    c.max_trace_drift,
                    c.max_hermiticity_residual,
                    c.min_eigenvalue,
                    c.max_step_halving_delta,
                    c.max_reduced_vs_full,
                    if c.passed() { "ok" } else { "FAIL" }
                );
            }
            if !audit.passed {
                bail!("invariant audit failed");
            }
        }
    }
    Ok(())
}
