use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mstc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mstc"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("failed to run mstc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn synth_fixtures(dir: &Path) {
    let blob = r#"{"kind": "gaussian_blob", "height": 32, "width": 32, "params": {"center": [15.5, 15.5], "sigma": 4}}"#;
    let noise = r#"{"kind": "uniform_noise", "height": 32, "width": 32, "seed": 4}"#;
    assert!(mstc(&["synth", "--spec", blob, "--out", "blob.npy"], dir)
        .status
        .success());
    fs::write(dir.join("noise.json"), noise).unwrap();
    assert!(mstc(
        &["synth", "--spec", "noise.json", "--out", "noise.csv"],
        dir
    )
    .status
    .success());
}

#[test]
fn score_writes_results_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_fixtures(d);
    fs::write(d.join("maps.txt"), "blob.npy,blob\nnoise.csv,noise\n").unwrap();
    let o = mstc(
        &[
            "score",
            "--manifest",
            "maps.txt",
            "--k",
            "8",
            "--on-disconnect",
            "escalate_k",
            "--out",
            "out",
            "--dot",
        ],
        d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = fs::read_to_string(d.join("out/results.csv")).unwrap();
    assert_eq!(results.lines().count(), 3);
    assert!(results.starts_with("sample,label,sweep_axis,sweep_value,height,width,n_nodes,k,"));
    assert!(d.join("out/aggregates.csv").exists());
    assert!(d.join("out/overlays/blob.dot").exists());

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("out/reports/blob.json")).unwrap())
            .unwrap();
    assert_eq!(report["n_nodes"], 205);
    assert_eq!(report["k"], 8);
    assert_eq!(report["scale_mode"], "paper_diag_x100");
    assert!(report.as_object().unwrap().values().all(|v| !v.is_object()));
}

#[test]
fn score_without_out_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    synth_fixtures(dir.path());
    let o = mstc(
        &[
            "score",
            "blob.npy",
            "--scale-mode",
            "none",
            "--percentile",
            "90",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("scale_mode"), "none");
    assert_eq!(col("percentile"), "90.0");
    assert_eq!(col("mstc_raw"), col("mstc_scaled"));
}

#[test]
fn failed_sample_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    synth_fixtures(dir.path());
    let o = mstc(&["score", "blob.npy", "absent.npy"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("FileNotFound"));

    // disconnected under the default policy
    let o = mstc(&["score", "blob.npy", "--k", "1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("DisconnectedGraph"));
}

#[test]
fn sweep_and_correlate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_fixtures(d);
    let o = mstc(
        &[
            "sweep",
            "blob.npy",
            "noise.csv",
            "--axis",
            "percentile",
            "--values",
            "50,70,90",
            "--k",
            "8",
            "--on-disconnect",
            "escalate_k",
            "--out",
            "sw",
            "--workers",
            "2",
        ],
        d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = fs::read_to_string(d.join("sw/results.csv")).unwrap();
    assert_eq!(results.lines().count(), 7);
    assert_eq!(
        fs::read_to_string(d.join("sw/aggregates.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
    assert!(d.join("sw/reports/blob__percentile_70.json").exists());

    let o = mstc(
        &[
            "correlate",
            "sw/results.csv",
            "--b",
            "mstc_scaled",
            "--group-by",
            "sweep_value",
        ],
        d,
    );
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.contains(",2,1.0,")));

    let o = mstc(
        &[
            "correlate",
            "sw/results.csv",
            "--matrix",
            "--out",
            "matrix.csv",
        ],
        d,
    );
    assert!(o.status.success());
    let matrix = fs::read_to_string(d.join("matrix.csv")).unwrap();
    assert_eq!(
        matrix.lines().next(),
        Some("group,n,sparseness,complexity,effective_complexity")
    );
}

#[test]
fn sweep_rejects_unsorted_values() {
    let dir = tempfile::tempdir().unwrap();
    synth_fixtures(dir.path());
    let o = mstc(
        &["sweep", "blob.npy", "--axis", "k", "--values", "5,2"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("strictly increasing"));
}

#[test]
fn export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_fixtures(d);
    for out in ["e1", "e2"] {
        let o = mstc(
            &[
                "export",
                "noise.csv",
                "--k",
                "8",
                "--on-disconnect",
                "escalate_k",
                "--out",
                out,
            ],
            d,
        );
        assert!(o.status.success());
        assert_eq!(stdout(&o).lines().count(), 5);
    }
    for name in [
        "noise.dot",
        "noise_points.csv",
        "noise_mst.csv",
        "noise_knn.csv",
    ] {
        assert_eq!(
            fs::read(d.join("e1").join(name)).unwrap(),
            fs::read(d.join("e2").join(name)).unwrap()
        );
    }
    let dot = fs::read_to_string(d.join("e1/noise.dot")).unwrap();
    assert_eq!(dot.matches("pos=").count(), 205);
    assert_eq!(dot.matches(" -- ").count(), 204);
}

#[test]
fn synth_rejects_bad_spec() {
    let dir = tempfile::tempdir().unwrap();
    let o = mstc(
        &[
            "synth",
            "--spec",
            r#"{"kind": "uniform_noise", "height": 0, "width": 3}"#,
            "--out",
            "x.npy",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("x.npy").exists());
}
