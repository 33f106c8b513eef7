use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bosonic(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bosonic"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("BOSONIC_OUT")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Rows of a CSV file as header-keyed maps.
fn read_csv(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records().map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(String::from)).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: `{s}`"))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn sweep_m_matches_first_order_prediction() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bosonic(&["sweep-m", "input=fock:1", "m=5..17"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&tmp.path().join("sweep_m.csv"));
    assert_eq!(rows.len(), 13);
    for r in &rows {
        let (sim, pred) = (num(&r["infidelity"]), num(&r["predicted_infidelity"]));
        assert!((sim - pred).abs() < 1e-4, "m={}: {sim} vs {pred}", r["m"]);
        assert_eq!(r["status"], "ok");
    }
}

#[test]
fn ep_optimized_series_is_perfect() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bosonic(&["ep", "k=1,1", "m=2..7", "--trunc", "16"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&tmp.path().join("ep.csv"));
    assert_eq!(rows.iter().map(|r| r["m"].clone()).collect::<Vec<_>>(), ["2", "3", "4", "5", "6", "7"]);
    for r in &rows {
        assert!(num(&r["infidelity"]).abs() < 1e-6, "m={}: {}", r["m"], r["infidelity"]);
    }
    assert!(tmp.path().join("ep_trace_optimized_m7.csv").exists());
}

#[test]
fn corrected_cat_wigner_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bosonic(&["wigner", "input=cat:1.2", "m=11", "correction=true", "points=41"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("wigner_fidelity.json")).unwrap()).unwrap();
    let f = side["fidelity"].as_f64().unwrap();
    assert!((f - 0.9922).abs() <= 0.002, "{f}");
    let grid = read_csv(&tmp.path().join("wigner.csv"));
    assert_eq!(grid.len(), 41 * 41);
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["sweep-temp", "input=fock:1", "m=8", "temperature=0..1:3", "--workers", "2"];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(bosonic(&args, &a).status.success());
    assert!(bosonic(&args, &b).status.success());
    let text = fs::read(a.join("sweep_temp.csv")).unwrap();
    assert_eq!(text, fs::read(b.join("sweep_temp.csv")).unwrap());
    let header = String::from_utf8(text).unwrap().lines().next().unwrap().to_string();
    assert!(header.contains("temperature [omega]") && header.contains("tau [1/omega]"), "{header}");
    assert_eq!(manifest(&a)["config_hash"], manifest(&b)["config_hash"]);
}

#[test]
fn manifest_lists_every_output_once() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bosonic(&["sweep-phase", "alpha=1", "m=6", "phases=8"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(tmp.path());
    let listed: Vec<String> =
        m["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap().to_string()).collect();
    let unique: BTreeSet<String> = listed.iter().cloned().collect();
    assert_eq!(unique.len(), listed.len());
    let on_disk: BTreeSet<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    assert_eq!(unique, on_disk);
    assert_eq!(m["status"], "complete");
    assert_eq!(m["runs"].as_array().unwrap().len(), 8);
    for run in m["runs"].as_array().unwrap() {
        assert!(run["pulse"]["tau"].as_f64().unwrap() > 0.0);
        assert!(!run["dims"].as_array().unwrap().is_empty());
    }
    assert!(m["integrator_step"].as_f64().unwrap() > 0.0);
    assert!(m["tool_version"].is_string());
}

#[test]
fn validation_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bosonic(&["ep", "m=1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unbounded potential"), "{}", stderr(&o));
    let o = bosonic(&["qst", "input=fock:1", "m=8", "method=rwa", "apply_correction=true"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let o = bosonic(&["qst", "input=fock:1", "m=8", "speed=2"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown key `speed`"));
    let o = bosonic(&["qst", "input=fock:1", "m=8", "--dt", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!tmp.path().join("manifest.json").exists());
}

#[test]
fn config_file_errors_report_line_and_column() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# transfer\ncommand = qst\ninput = fock:1\nm = 8\ntemperature = warm\n").unwrap();
    let o = bosonic(&["--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("run.cfg:5:15"), "{}", stderr(&o));
    // Inline pairs override the file.
    let o = bosonic(&["--config", cfg.to_str().unwrap(), "temperature=0.5"], &tmp.path().join("out"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(manifest(&tmp.path().join("out"))["params"]["temperature"], "0.5");
}

#[test]
fn non_convergence_keeps_partial_results() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bosonic(&["sweep-m", "input=fock:1", "m=5,17", "--trunc", "4"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let rows = read_csv(&tmp.path().join("sweep_m.csv"));
    assert!(rows[0]["status"].starts_with("failed") && rows[0]["infidelity"].is_empty());
    assert_eq!(rows[1]["status"], "ok");
    assert_eq!(manifest(tmp.path())["status"], "partial");
}

#[test]
fn unwritable_output_exits_with_code_four() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = bosonic(&["qst", "input=fock:1", "m=8"], &blocker.join("out"));
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bosonic"))
        .args(["tradeoff", "e_tol=0.01", "mean_n=1", "verify=true", "m=5..7"])
        .env("BOSONIC_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let row = &read_csv(&tmp.path().join("tradeoff.csv"))[0];
    assert!(num(&row["simulated_infidelity"]) <= 0.01);
    assert_eq!(read_csv(&tmp.path().join("tradeoff_curve.csv")).len(), 3);
}
