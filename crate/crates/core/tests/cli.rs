use std::path::Path;
use std::process::{Command, Output};

fn twostage(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twostage"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

#[test]
fn version_prints_package_version() {
    let dir = tempfile::tempdir().unwrap();
    let out = twostage(&["version"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn validate_reports_bad_keys() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ok.toml"), "experiment = \"lemma_suite\"\n").unwrap();
    std::fs::write(dir.path().join("bad.toml"), "experiment = \"lemma_suite\"\n[optimizer]\neta_c = -1.0\n").unwrap();
    assert!(twostage(&["validate", "ok.toml"], dir.path()).status.success());
    let out = twostage(&["validate", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta_c"));
    let out = twostage(&["validate", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lemma_suite_verb_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = twostage(&["lemma-suite", "--output-dir", "suite"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("suite/lemma_suite.json").exists());
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = "experiment = \"cloning_layer_sweep\"\noutput_dir = \"out\"\n\n\
                  [optimizer]\nmax_epochs_stage1 = 3\nmax_epochs_stage2 = 3\n\n\
                  [cloning]\nlayers = [1, 2]\nseeds = 2\n";
    std::fs::write(dir.path().join("sweep.toml"), config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_twostage"))
        .args(["run", "sweep.toml"])
        .current_dir(dir.path())
        .env("TWOSTAGE_WORKERS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["layer_sweep.csv", "convergence.json", "config.toml", "plot_figures.py"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("out/layer_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 2 * 3 * 2);

    let out = twostage(&["run", "sweep.toml"], dir.path());
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("out/layer_sweep.csv")).unwrap(), csv);
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            twostage::cli::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 4);
}
