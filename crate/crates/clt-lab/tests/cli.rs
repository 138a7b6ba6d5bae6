//! End-to-end exercises of the compiled binary: exit codes, report
//! round-trips, manifest integrity, and thread-count determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_clt-lab"))
}

fn write_instance(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

/// a = delta, Gamma = 10 x 10: sigma = 10, rho = 0.1 exactly.
const DELTA_10: &str = r#"{
    "a": {"origin": [0, 0], "values": [[1.0]]},
    "gamma": {"rects": [[0, 9, 0, 9]]}
}"#;

fn parse(output: &[u8]) -> serde_json::Value {
    serde_json::from_slice(output).unwrap()
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {:?}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn analyze_delta_square_reports_expected_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = write_instance(tmp.path(), "inst.json", DELTA_10);
    let out = run_ok(bin().arg("analyze").arg("--instance").arg(&inst));
    let doc = parse(&out.stdout);
    assert_eq!(doc["sigma"].as_f64().unwrap(), 10.0);
    assert_eq!(doc["rho"].as_f64().unwrap(), 0.1);
    assert_eq!(doc["crude"]["p1"].as_f64().unwrap(), 0.1);
    assert!(doc["rectangle"]["value"].as_f64().unwrap() >= 0.1);
    assert_eq!(doc["window_bounds"].as_array().unwrap().len(), 8);
    assert!(doc["ks_upper"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn analyze_output_reingests_to_identical_sigma_rho() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = write_instance(
        tmp.path(),
        "inst.json",
        r#"{
            "a": {"origin": [-1, -1], "values": [[0.125, -0.5, 0.25], [1.0, 0.75, -0.375]]},
            "gamma": {"rects": [[0, 4, 0, 6], [9, 12, 0, 6]]}
        }"#,
    );
    let out1 = tmp.path().join("run1");
    run_ok(bin()
        .arg("analyze")
        .arg("--instance")
        .arg(&inst)
        .arg("--out")
        .arg(&out1));
    let weights_path = out1.join("weights.json");
    let first: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&weights_path).unwrap()).unwrap();

    // The weights artifact doubles as an instance file.
    let out2 = tmp.path().join("run2");
    run_ok(bin()
        .arg("analyze")
        .arg("--instance")
        .arg(&weights_path)
        .arg("--out")
        .arg(&out2));
    let second: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out2.join("weights.json")).unwrap()).unwrap();

    for key in ["sigma", "rho"] {
        let a = first[key].as_f64().unwrap();
        let b = second[key].as_f64().unwrap();
        assert_eq!(a.to_bits(), b.to_bits(), "field {key}");
    }
    assert_eq!(first["instance"], second["instance"]);
}

#[test]
fn manifest_lists_every_artifact_with_correct_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = write_instance(tmp.path(), "inst.json", DELTA_10);
    let out = tmp.path().join("artifacts");
    run_ok(bin()
        .arg("analyze")
        .arg("--instance")
        .arg(&inst)
        .arg("--out")
        .arg(&out)
        .arg("--format")
        .arg("csv"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let entries = manifest["outputs"].as_array().unwrap();
    let names: Vec<&str> = entries.iter().map(|e| e["file"].as_str().unwrap()).collect();
    assert_eq!(names, ["weights.json", "bounds.json", "weights.csv"]);
    for entry in entries {
        let bytes = fs::read(out.join(entry["file"].as_str().unwrap())).unwrap();
        let digest = format!("{:x}", <sha2::Sha256 as sha2::Digest>::digest(&bytes));
        assert_eq!(entry["sha256"].as_str().unwrap(), digest);
        assert_eq!(entry["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    let csv = fs::read_to_string(out.join("weights.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "r,s,value");
}

#[test]
fn missing_instance_exits_2_with_error_json() {
    let out = bin()
        .arg("analyze")
        .arg("--instance")
        .arg("/no/such/file.json")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "io");
    assert!(err["error"]["message"].as_str().unwrap().contains("file.json"));
}

#[test]
fn invalid_parameters_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = write_instance(tmp.path(), "inst.json", DELTA_10);

    let bad_dist = bin()
        .arg("simulate")
        .arg("--instance")
        .arg(&inst)
        .arg("--dist")
        .arg("cauchy")
        .output()
        .unwrap();
    assert_eq!(bad_dist.status.code(), Some(2));

    let bad_alpha = bin()
        .arg("simulate")
        .arg("--instance")
        .arg(&inst)
        .arg("--alpha")
        .arg("1.5")
        .output()
        .unwrap();
    assert_eq!(bad_alpha.status.code(), Some(2));

    let plots_without_out = bin()
        .arg("simulate")
        .arg("--instance")
        .arg(&inst)
        .arg("--emit-plots")
        .output()
        .unwrap();
    assert_eq!(plots_without_out.status.code(), Some(2));

    let bad_epsilon = bin()
        .arg("certify")
        .arg("--epsilon")
        .arg("2.0")
        .output()
        .unwrap();
    assert_eq!(bad_epsilon.status.code(), Some(2));
}

#[test]
fn certify_tenth_prints_prop_constants() {
    let out = run_ok(bin()
        .arg("certify")
        .arg("--epsilon")
        .arg("0.1")
        .arg("--class")
        .arg("rademacher"));
    let doc = parse(&out.stdout);
    assert_eq!(doc["t"].as_f64().unwrap(), 960.0);
    assert_eq!(doc["sharp"].as_f64().unwrap(), 1.0);
    let eta = doc["eta"].as_f64().unwrap();
    assert_eq!(eta.to_bits(), (0.4f64 / 884_736_000.0).to_bits());
    assert_eq!(doc["delta"].as_f64().unwrap().to_bits(), eta.to_bits());
    assert_eq!(doc["class"][0], "rademacher");
}

#[test]
fn simulate_is_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = write_instance(tmp.path(), "inst.json", DELTA_10);
    let mut reports = Vec::new();
    for (label, threads) in [("t1", "1"), ("t8", "8")] {
        let out = tmp.path().join(label);
        run_ok(bin()
            .arg("simulate")
            .arg("--instance")
            .arg(&inst)
            .arg("--samples")
            .arg("2000")
            .arg("--seed")
            .arg("42")
            .arg("--out")
            .arg(&out)
            .arg("--emit-plots")
            .env("CLT_LAB_THREADS", threads));
        reports.push((
            fs::read(out.join("simulation.json")).unwrap(),
            fs::read(out.join("histogram.svg")).unwrap(),
            fs::read(out.join("manifest.json")).unwrap(),
        ));
    }
    assert_eq!(reports[0].0, reports[1].0, "simulation report differs");
    assert_eq!(reports[0].1, reports[1].1, "histogram differs");
    assert_eq!(reports[0].2, reports[1].2, "manifest differs");
}

#[test]
fn sweep_writes_contracted_csv_and_ascending_kappa() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    run_ok(bin()
        .arg("sweep")
        .arg("--sizes")
        .arg("4,2,8")
        .arg("--samples")
        .arg("4000")
        .arg("--emit-plots")
        .arg("--out")
        .arg(&out));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "kappa,rho,ks_empirical,ks_upper,n_samples,seed"
    );
    let kappas: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(kappas.len(), 3);
    assert!(kappas.windows(2).all(|w| w[0] < w[1]), "kappa not ascending");

    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        // iid Rademacher family: rho = 1/n exactly and the closed-form
        // oracle is present.
        let n = row["n"].as_i64().unwrap() as f64;
        assert_eq!(row["rho"].as_f64().unwrap(), 1.0 / n);
        assert!(row["ks_exact"].as_f64().is_some());
    }
    assert!(fs::read_to_string(out.join("sweep.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn selftest_smoke_run_passes() {
    let out = run_ok(bin().arg("selftest").arg("--instances").arg("25"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 4);
}
