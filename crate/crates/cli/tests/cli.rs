use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tailgating::hamgrid::{load_grid, write_grid, DisplacementLabel, HamiltonianGrid};

fn manifest(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(format!("{name}.json"))
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tailgate"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("TAILGATE_THREADS", "1")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn h2_checkpoint(dir: &Path) -> PathBuf {
    let m = manifest("h2");
    let o = run(&["adapt", "--manifest", m.to_str().unwrap()], dir);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    dir.join("checkpoint.json")
}

#[test]
fn ham_summary_for_h2() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest("h2");
    let o = run(&["ham", "--manifest", m.to_str().unwrap(), "--validate"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4 qubits"), "{}", stdout(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ham.json")).unwrap()).unwrap();
    assert_eq!(summary["qubits"], 4);
    assert!((summary["ground_energy"].as_f64().unwrap() + 1.137).abs() < 2e-3);
}

#[test]
fn missing_manifest_exits_with_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["ham", "--manifest", "/nonexistent/grid.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn mismatched_step_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest("h2");
    let o = run(
        &["ham", "--manifest", m.to_str().unwrap(), "--fd-step", "0.01"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn h2_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest("h2");
    let m = m.to_str().unwrap();
    let ckpt = h2_checkpoint(dir.path());
    let ckpt = ckpt.to_str().unwrap();

    let o = run(
        &["tailgate", "--manifest", m, "--checkpoint", ckpt, "--epsilon", "inf"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("0 of "), "{}", stdout(&o));
    let o = run(&["tailgate", "--manifest", m, "--checkpoint", ckpt], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let tailgated = dir.path().join("tailgated.json");
    assert!(dir.path().join("selection.json").exists());

    let o = run(
        &["freq", "--manifest", m, "--checkpoint", tailgated.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.starts_with('ω'))
        .map(String::from)
        .collect();
    assert_eq!(lines.len(), 1, "{}", stdout(&o));
    let modes: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("modes.json")).unwrap()).unwrap();
    assert_eq!(modes["modes"]["frequencies"].as_array().unwrap().len(), 1);

    let o = run(
        &["hessian", "--manifest", m, "--checkpoint", tailgated.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let hp = dir.path().join("hessian.json");
    let o = run(
        &["freq", "--manifest", m, "--hessian", hp.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with('ω')).count(), 1);

    let o = run(
        &[
            "fidelity",
            "--manifest",
            m,
            "--checkpoint",
            tailgated.to_str().unwrap(),
            "--direction",
            "6",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fidelity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "{csv}");
}

#[test]
fn off_grid_delta_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest("h2");
    let ckpt = h2_checkpoint(dir.path());
    let o = run(
        &[
            "fidelity",
            "--manifest",
            m.to_str().unwrap(),
            "--checkpoint",
            ckpt.to_str().unwrap(),
            "--direction",
            "6",
            "--delta-min",
            "0.0015",
            "--delta-max",
            "0.0015",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

fn flipped_copy(dir: &Path) -> PathBuf {
    let g = load_grid(manifest("h2")).unwrap();
    let bad = DisplacementLabel::from_steps([(5, 1)]);
    let mut points = BTreeMap::new();
    for l in g.labels() {
        let mut ints = g.integrals(l).unwrap().clone();
        if *l == bad {
            let n = ints.n_orbitals;
            for q in 0..n {
                let v = ints.h1(0, q);
                ints.h1[q] = -v;
                if q != 0 {
                    ints.h1[q * n] = -v;
                }
            }
        }
        points.insert(l.clone(), ints);
    }
    let corrupted = HamiltonianGrid::new(g.molecule(), g.geometry().clone(), g.step(), points).unwrap();
    write_grid(dir, "flipped", &corrupted).unwrap()
}

#[test]
fn validate_passes_clean_grid_and_fails_sign_flip() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest("h2");
    let o = run(&["validate", "--manifest", m.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(dir.path().join("validation.json").exists());

    let flipped = flipped_copy(dir.path());
    let o = run(&["validate", "--manifest", flipped.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL gauge continuity"));
    let o = run(
        &["ham", "--manifest", flipped.to_str().unwrap(), "--validate"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}
