use std::path::Path;
use std::process::{Command, Output};

use csf::formats::{read_json, read_signal_csv, AssessOutput, ClassifyOutput, FilterMethod, FilterReport, SimulationSidecar};

fn csf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csf"))
        .current_dir(dir)
        .env_remove("CSF_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--fault", "outer", "--snr-db", "-8", "--seed", "7"];
    ok(&csf(dir.path(), &[&args[..], &["-o", "a.csv"]].concat()));
    ok(&csf(dir.path(), &[&args[..], &["-o", "b.csv"]].concat()));

    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(std::fs::read(dir.path().join("a.json")).unwrap(), std::fs::read(dir.path().join("b.json")).unwrap());

    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("sample\n"));
    assert_eq!(text.lines().count(), 20481);

    let sidecar: SimulationSidecar = read_json(&dir.path().join("a.json")).unwrap();
    let config = sidecar.fault_config.unwrap();
    assert_eq!((sidecar.seed, config.seed), (7, 7));
    assert_eq!(config.snr_db, -8.0);
    assert!((sidecar.measured_snr_db.unwrap() + 8.0).abs() < 1e-9);
}

#[test]
fn combined_fault_and_outlier_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    ok(&csf(dir.path(), &["simulate", "--fault", "outer,inner,roller", "--n-samples", "4096", "-o", "f8.csv"]));
    let sidecar: SimulationSidecar = read_json(&dir.path().join("f8.json")).unwrap();
    let faults = sidecar.fault_config.unwrap().faults;
    assert!(faults.outer && faults.inner && faults.roller);

    ok(&csf(dir.path(), &["simulate", "--outlier-sigma", "8", "--n-samples", "1024", "-o", "o.csv"]));
    let x = read_signal_csv(&dir.path().join("o.csv")).unwrap();
    assert_eq!(x.len(), 1024);
    let sidecar: SimulationSidecar = read_json(&dir.path().join("o.json")).unwrap();
    assert_eq!(sidecar.outlier_sigma, Some(8.0));
    assert!(sidecar.fault_config.is_none());
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_csf"))
        .current_dir(dir.path())
        .env("CSF_OUT_DIR", "results")
        .args(["simulate", "--n-samples", "1024"])
        .output()
        .unwrap();
    ok(&out);
    assert!(dir.path().join("results/simulated.csv").exists());
    assert!(dir.path().join("results/simulated.json").exists());
}

#[test]
fn filter_reports_descent_for_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    ok(&csf(dir.path(), &["simulate", "--n-samples", "4096", "--seed", "3", "-o", "s.csv"]));
    ok(&csf(dir.path(), &["filter", "s.csv", "--max-iterations", "60"]));
    ok(&csf(dir.path(), &["filter", "s.csv", "--method", "med", "--max-iterations", "20"]));

    let csf_report: FilterReport = read_json(&dir.path().join("s_csf.json")).unwrap();
    assert_eq!(csf_report.method, FilterMethod::Csf);
    assert!(csf_report.final_cost < csf_report.initial_cost);
    assert!(csf_report.cost_history.windows(2).all(|p| p[1] <= p[0]));
    assert_eq!(csf_report.w.len(), 100);
    assert!(csf_report.wall_time_s > 0.0);
    assert_eq!(read_signal_csv(&dir.path().join("s_csf.csv")).unwrap().len(), 4096 - 99);

    let med_report: FilterReport = read_json(&dir.path().join("s_med.json")).unwrap();
    assert_eq!(med_report.method, FilterMethod::Med);
    assert!(med_report.final_cost <= med_report.initial_cost);
    assert_eq!(med_report.w.len(), 100);
}

#[test]
fn degenerate_signal_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let body: String = std::iter::once("sample\n".to_owned()).chain((0..300).map(|_| "0\n".to_owned())).collect();
    std::fs::write(dir.path().join("zero.csv"), body).unwrap();
    let out = csf(dir.path(), &["filter", "zero.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn io_and_parse_failures_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(csf(dir.path(), &["filter", "missing.csv"]).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.csv"), "sample\n1.0\nabc\n").unwrap();
    let out = csf(dir.path(), &["filter", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('3'));
    assert_eq!(csf(dir.path(), &["assess", "--dir", "."]).status.code(), Some(2));
}

#[test]
fn fault_frequency_sources_are_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    ok(&csf(dir.path(), &["simulate", "--n-samples", "4096", "-o", "s.csv"]));
    let out = csf(dir.path(), &["features", "s.csv", "--bpfo", "100", "--rolling-elements", "8"]);
    assert_eq!(out.status.code(), Some(2));

    ok(&csf(dir.path(), &["features", "s.csv", "--bpfo", "100", "--bpfi", "160", "--bsf", "70"]));
    let csv = std::fs::read_to_string(dir.path().join("features.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("input,kurtosis,l1_l2,blehnr_bpfo,blehnr_bpfi,blehnr_bsf"));
    assert_eq!(csv.lines().count(), 2);
    assert!(dir.path().join("features.json").exists());

    let geometry = [
        "features", "s.csv", "--rolling-elements", "16", "--roller-diameter", "0.331", "--pitch-diameter", "2.815",
        "--contact-angle-deg", "15.17", "--shaft-hz", "33.3", "--format", "json", "-o", "g.json",
    ];
    ok(&csf(dir.path(), &geometry));
    let report: serde_json::Value = read_json(&dir.path().join("g.json")).unwrap();
    let bpfo = report["features"]["faults"]["bpfo_hz"].as_f64().unwrap();
    assert!((bpfo - 236.4).abs() < 1.0, "bpfo {bpfo}");
}

#[test]
fn gradcheck_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = csf(dir.path(), &["gradcheck", "--filter-length", "32", "--n", "256", "--trials", "20"]);
    ok(&out);
    let report: serde_json::Value = read_json(&dir.path().join("gradcheck.json")).unwrap();
    assert_eq!(report["trials"].as_array().unwrap().len(), 20);
    assert!(report["max_relative_error"].as_f64().unwrap() <= 1e-6);

    let out = csf(dir.path(), &["gradcheck", "--trials", "2", "--tolerance", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn assess_small_simulated_run() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["assess", "--simulate", "--n-files", "26", "--onset", "22", "--n-samples", "2048", "--max-iterations", "40"];
    ok(&csf(dir.path(), &args));
    let csv = std::fs::read_to_string(dir.path().join("assess_mqe.csv")).unwrap();
    assert_eq!(csv.lines().count(), 27);
    let output: AssessOutput = read_json(&dir.path().join("assess.json")).unwrap();
    assert_eq!(output.names.len(), 26);
    assert_eq!(output.report.raw.mqe.len(), 26);
    assert_eq!(output.report.filtered.training_mqe.len(), 20);
    assert_eq!(output.filter.max_iterations, 40);

    let short = ["assess", "--simulate", "--n-files", "20", "--onset", "10", "--n-samples", "1024"];
    assert_eq!(csf(dir.path(), &short).status.code(), Some(1));
}

#[test]
fn classify_small_simulated_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["classify", "--simulate", "--per-class", "2", "--n-samples", "2048", "--max-iterations", "30"];
    ok(&csf(dir.path(), &args));
    let output: ClassifyOutput = read_json(&dir.path().join("classify.json")).unwrap();
    assert_eq!(output.classes.len(), 8);
    assert_eq!(output.report.truth.len(), 16);
    assert_eq!(output.report.filtered.vat_matrix.len(), 16);
    let vat = std::fs::read_to_string(dir.path().join("classify_vat_raw.csv")).unwrap();
    assert_eq!(vat.lines().count(), 16);
    assert!(vat.lines().all(|l| l.split(',').count() == 16));
    let scores = std::fs::read_to_string(dir.path().join("classify_scores.csv")).unwrap();
    assert_eq!(scores.lines().count(), 1 + 2 * 16);
}

#[test]
fn classify_labeled_directory() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    std::fs::create_dir(&data).unwrap();
    for (label, fault) in [("normal", "normal"), ("outer", "outer")] {
        for seed in 0..3 {
            let file = format!("data/{label}_{seed}.csv");
            let seed = seed.to_string();
            ok(&csf(dir.path(), &["simulate", "--fault", fault, "--snr-db", "0", "--n-samples", "2048", "--seed", &seed, "-o", &file]));
        }
    }
    // Sidecars are not signals.
    for entry in std::fs::read_dir(&data).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            std::fs::remove_file(path).unwrap();
        }
    }
    ok(&csf(dir.path(), &["classify", "--dir", "data", "--n-components", "2", "--max-iterations", "30"]));
    let output: ClassifyOutput = read_json(&dir.path().join("classify.json")).unwrap();
    assert_eq!(output.classes, vec!["normal", "outer"]);
    assert_eq!(output.report.truth, vec![0, 0, 0, 1, 1, 1]);
}
