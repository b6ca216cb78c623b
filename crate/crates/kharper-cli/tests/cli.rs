use std::fs;
use std::path::Path;
use std::process::Command;

fn run(args: &[&str], dir: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_kharper"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .status()
        .unwrap();
    assert!(status.success(), "kharper {args:?} failed");
}

#[test]
fn evolve_writes_expected_artifacts_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let args = [
        "evolve", "--method", "slice", "--n-r", "4", "-K", "1", "-L", "5", "-t", "20",
        "--record-every", "5", "--epsilons", "0,0.001", "--realizations", "2",
        "--seed", "7",
    ];
    run(&args, &a);
    run(&args, &b);
    let csv = fs::read_to_string(a.join("series.csv")).unwrap();
    assert!(csv.starts_with("seed,realization,t,n_g,epsilon,ipr,ipr_full,second_moment,loc_length"));
    assert!(csv.lines().count() > 10);
    assert_eq!(csv, fs::read_to_string(b.join("series.csv")).unwrap());
    let manifest = fs::read_to_string(a.join("manifest.json")).unwrap();
    assert!(manifest.contains("series.csv"));
    assert!(a.join("config.txt").exists());
}

#[test]
fn ndjson_format_and_spectrum_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("n");
    run(
        &[
            "evolve", "--n-r", "4", "-t", "5", "--format", "ndjson", "--seed", "3",
        ],
        &d,
    );
    let nd = fs::read_to_string(d.join("records.ndjson")).unwrap();
    for line in nd.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("rows").is_some());
    }
    let s = tmp.path().join("s");
    run(
        &[
            "spectrum", "--n-r", "4", "-K", "0.001", "-L", "0.001", "--solver", "diag",
            "--seed", "3",
        ],
        &s,
    );
    let eig = fs::read_to_string(s.join("eigenphases.csv")).unwrap();
    // 16 phases plus header
    assert_eq!(eig.lines().count(), 17);
}
