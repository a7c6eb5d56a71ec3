use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydberg-id"))
        .args(args)
        .env_remove("RYDBERG_ID_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_experiment(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn list_basis_prints_kets() {
    let text = stdout(&cli(&["list-basis", "chain-5"]));
    assert!(text.contains("N_ID = 9"));
    assert!(text.contains("(|10000⟩+|00001⟩)/√2"));
    assert!(text.contains("|10101⟩"));
    assert!(!cli(&["list-basis", "Q7"]).status.success());
}

#[test]
fn list_configs_covers_catalog() {
    let text = stdout(&cli(&["list-configs"]));
    for name in ["S1", "H6", "chain-6", "K4e"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn profiles_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t3.csv");
    stdout(&cli(&[
        "profiles",
        "T3",
        "--points",
        "11",
        "--out",
        path.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t_ns,W0,W1");
    assert_eq!(lines.len(), 12);
    assert!(!cli(&["profiles", "T3", "--points", "7"]).status.success());
}

#[test]
fn generate_split_train_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let exp = write_experiment(
        dir.path(),
        "name = \"cli\"\ntask = \"excitation\"\nconfigurations = [\"B2\"]\nsamples_per_class = 20\n",
    );
    let p = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    stdout(&cli(&["--jobs", "1", "generate", &exp, "--out", &p("data.csv")]));
    stdout(&cli(&[
        "split",
        "--data",
        &p("data.csv"),
        "--train-out",
        &p("train.csv"),
        "--test-out",
        &p("test.csv"),
    ]));
    for model in ["svm", "rfc"] {
        let saved = p(&format!("{model}.json"));
        stdout(&cli(&[
            "train",
            "--data",
            &p("train.csv"),
            "--model",
            model,
            "--out",
            &saved,
        ]));
        let text = stdout(&cli(&["evaluate", "--model", &saved, "--data", &p("test.csv")]));
        assert!(text.starts_with(&format!("{model} accuracy 1.0000 (8/8)")), "{text}");
        assert!(text.contains("W0"));
    }
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let exp = write_experiment(
        dir.path(),
        "name = \"cli\"\ntask = \"excitation\"\nconfigurations = [\"T3\"]\nsamples_per_class = 20\nlearning_curve = true\nlearning_curve_sizes = [20, 32]\ncv_folds = 4\n",
    );
    let out = dir.path().join("out");
    let text = stdout(&cli(&["run", &exp, "--out", out.to_str().unwrap()]));
    assert!(text.contains("svm accuracy"));
    assert!(text.contains("4-fold CV"));
    for f in [
        "report.json",
        "confusion-svm.csv",
        "confusion-rfc.csv",
        "learning-curve-rfc.csv",
        "dataset.csv",
    ] {
        assert!(out.join(f).exists(), "{f} missing");
    }
}

#[test]
fn ablate_over_interaction_mode() {
    let dir = tempfile::tempdir().unwrap();
    let exp = write_experiment(
        dir.path(),
        "name = \"cli\"\ntask = \"combined\"\nconfigurations = [\"chain-3\"]\nsamples_per_class = 10\nmodels = \"rfc\"\nsave_dataset = false\n",
    );
    let out = dir.path().join("out");
    let text = stdout(&cli(&[
        "ablate",
        &exp,
        "--axis",
        "interaction-mode",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert!(text.contains("ablation over interaction-mode"));
    let csv = fs::read_to_string(out.join("ablation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(!cli(&["ablate", &exp, "--axis", "sideways"]).status.success());
}

#[test]
fn bad_experiment_file_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let exp = write_experiment(dir.path(), "name = \"cli\"\ntask = \"excitation\"\nsurprise = 3\n");
    let out = cli(&["run", &exp]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("surprise"));
}

#[test]
fn shipped_experiments_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = cli(&["audit", path.to_str().unwrap(), "--samples", "0"]);
            assert!(
                out.status.success(),
                "{}: {}",
                path.display(),
                String::from_utf8_lossy(&out.stderr)
            );
            count += 1;
        }
    }
    assert!(count >= 17);
}
