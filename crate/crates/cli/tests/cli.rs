use std::fs;
use std::path::Path;

use serde_json::Value;
use tempfile::TempDir;
use transs_cli::output::{parse_trajectory_csv, trajectory_csv};
use transs_cli::{run_command, EXIT_ERROR, EXIT_FAILED, EXIT_OK};
use transs_core::catalog::{c_space_spec, standard_s_space};
use transs_core::serialize_model;
use transs_core::trajectory::{integrate_trajectory, legendre_project};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn transs(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("transs").chain(args.iter().copied());
    let code = run_command(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn out_dir(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_certifies_standard_s_space() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "v");
    let run = transs(&["validate", "standard:1:2", "--out", &out, "--seed", "3"]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    assert!(run.stdout.contains("certified"));
    let report = json(&Path::new(&out).join("validate.json"));
    assert_eq!(report["seed"], 3);
    for axiom in report["report"]["axioms"].as_array().unwrap() {
        assert!(axiom["residual"].as_f64().unwrap() < 1e-8, "{axiom}");
    }
}

#[test]
fn mis_scaled_model_file_is_rejected() {
    let dir = TempDir::new().unwrap();
    let mut spec = c_space_spec(1, 1).unwrap();
    spec.eta[0][2] = "2".into();
    let path = dir.path().join("bad.json");
    fs::write(&path, serialize_model(&spec)).unwrap();
    let run = transs(&["validate", path.to_str().unwrap(), "--out", &out_dir(&dir, "v")]);
    assert_ne!(run.code, EXIT_OK);
    assert!(run.stderr.contains("eta_i(xi_j) = delta_ij"), "{}", run.stderr);
}

#[test]
fn model_file_matches_catalog_validation() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, serialize_model(&c_space_spec(1, 1).unwrap())).unwrap();
    let run = transs(&["validate", path.to_str().unwrap(), "--out", &out_dir(&dir, "v")]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
}

#[test]
fn sweep_kappa_one_tracks_q() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "s");
    let run = transs(&["sweep", "standard:1:2", "--q-list=-2,-1,-0.5,0.5,1,2", "--out", &out]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    let mut reader = csv::Reader::from_path(Path::new(&out).join("sweep.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let mut rows = 0;
    for record in reader.records() {
        let r = record.unwrap();
        let q: f64 = r[col("q")].parse().unwrap();
        let k1: f64 = r[col("kappa_1")].parse().unwrap();
        let delta: f64 = r[col("delta")].parse().unwrap();
        assert!((k1 - q.abs()).abs() < 1e-3);
        assert_eq!(delta, -q.signum());
        assert_eq!(&r[col("seed")], "0");
        assert_eq!(&r[col("classification")], "holds");
        assert_eq!(&r[col("cparallel_t")], "fails");
        rows += 1;
    }
    assert_eq!(rows, 6);
}

#[test]
fn c_parallel_tangent_reports_nonexistence() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "c");
    let run = transs(&[
        "check",
        "standard:1:1",
        "--q",
        "1.5",
        "--t-end",
        "3",
        "--theorem",
        "cparallel-t",
        "--out",
        &out,
    ]);
    assert_eq!(run.code, EXIT_FAILED);
    assert!(run.stdout.contains("nonexistence confirmed"), "{}", run.stdout);
    let report = json(&Path::new(&out).join("report.json"));
    assert_eq!(report["all_hold"], false);
    assert_eq!(report["reports"][0]["verdict"]["status"], "fails");
}

#[test]
fn classification_holds_on_standard_s_space() {
    let dir = TempDir::new().unwrap();
    let run = transs(&[
        "check",
        "standard:1:2",
        "--q",
        "-1",
        "--t-end",
        "3",
        "--theorem",
        "classification",
        "--out",
        &out_dir(&dir, "c"),
    ]);
    assert_eq!(run.code, EXIT_OK, "{}{}", run.stdout, run.stderr);
}

#[test]
fn integrate_is_deterministic_and_echoes_the_seed() {
    let dir = TempDir::new().unwrap();
    let files = ["trajectory.csv", "diagnostics.csv", "run.json"];
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = out_dir(&dir, name);
        let run = transs(&[
            "integrate",
            "standard:1:1",
            "--q",
            "0.7",
            "--t-end",
            "1",
            "--legendre",
            "--seed",
            "42",
            "--out",
            &out,
        ]);
        assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
        outputs.push(files.map(|f| fs::read(Path::new(&out).join(f)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let summary: Value = serde_json::from_slice(&outputs[0][2]).unwrap();
    assert_eq!(summary["seed"], 42);
    assert!(summary["legendre_defect"].as_f64().unwrap() < 1e-10);
    let text = String::from_utf8(outputs[0][0].clone()).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("t,x1,x2,x3,v1,v2,v3\n"));
}

#[test]
fn trajectory_csv_round_trips_exactly() {
    let m = standard_s_space(1, 1).unwrap();
    let v = legendre_project(&m, &[0.1, 0.2, 0.3], &nalgebra::DVector::from_vec(vec![1.0, 0.3, 0.0])).unwrap();
    let tr = integrate_trajectory(&m, &[0.1, 0.2, 0.3], &v.components, -0.8, 0.5, 1e-2).unwrap();
    let text = String::from_utf8(trajectory_csv(&tr).unwrap()).unwrap();
    let back = parse_trajectory_csv(&text, &tr.model_name, tr.q).unwrap();
    assert_eq!(back.positions, tr.positions);
    assert_eq!(back.velocities, tr.velocities);
    assert_eq!(back.times, tr.times);
}

#[test]
fn frenet_of_integrated_geodesic_has_no_kappa_columns() {
    let dir = TempDir::new().unwrap();
    let traj_dir = out_dir(&dir, "i");
    let run = transs(&[
        "integrate",
        "cspace:1:1",
        "--q",
        "0",
        "--t-end",
        "1",
        "--v0",
        "1,1,0",
        "--out",
        &traj_dir,
    ]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    let csv_path = Path::new(&traj_dir).join("trajectory.csv");
    let out = out_dir(&dir, "f");
    let run = transs(&[
        "frenet",
        csv_path.to_str().unwrap(),
        "--model",
        "cspace:1:1",
        "--out",
        &out,
    ]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    assert!(run.stdout.contains("geodesic"));
    let apparatus = fs::read_to_string(Path::new(&out).join("apparatus.csv")).unwrap();
    assert_eq!(apparatus.lines().next().unwrap(), "t,E1_1,E1_2,E1_3");
}

#[test]
fn frenet_recovers_helix_curvatures() {
    let dir = TempDir::new().unwrap();
    let traj_dir = out_dir(&dir, "i");
    transs(&[
        "integrate",
        "standard:1:2",
        "--q",
        "-1",
        "--t-end",
        "2",
        "--legendre",
        "--out",
        &traj_dir,
    ]);
    let csv_path = Path::new(&traj_dir).join("trajectory.csv");
    let out = out_dir(&dir, "f");
    let run = transs(&[
        "frenet",
        csv_path.to_str().unwrap(),
        "--model",
        "standard:1:2",
        "--q",
        "-1",
        "--out",
        &out,
    ]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    let summary = json(&Path::new(&out).join("frenet.json"));
    assert_eq!(summary["order"], 3);
    let k = summary["mean_curvatures"].as_array().unwrap();
    assert!((k[0].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert!((k[1].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-3);
    assert!(summary["max_lorentz_residual"].as_f64().unwrap() < 1e-4);
}

#[test]
fn usage_and_input_errors_exit_with_code_two() {
    assert_eq!(transs(&["validate", "standard:1:2", "--bogus"]).code, EXIT_ERROR);
    assert_eq!(transs(&["validate", "nosuch:1:1"]).code, EXIT_ERROR);
    let run = transs(&["frenet", "/nonexistent/traj.csv", "--model", "cspace:1:1"]);
    assert_eq!(run.code, EXIT_ERROR);
    assert!(run.stderr.contains("/nonexistent/traj.csv"));
    assert_eq!(transs(&["integrate", "cspace:1:1", "--x0", "1,2"]).code, EXIT_ERROR);
}

#[test]
fn leaving_the_chart_writes_partial_output() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "i");
    let run = transs(&[
        "integrate",
        "cspace:1:1",
        "--q",
        "0",
        "--x0",
        "49,0,0",
        "--v0",
        "1,0,0",
        "--t-end",
        "5",
        "--out",
        &out,
    ]);
    assert_eq!(run.code, EXIT_ERROR);
    let summary = json(&Path::new(&out).join("run.json"));
    assert!(summary["left_domain_at"].as_f64().unwrap() > 0.9);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let mut texts = Vec::new();
    for name in ["a", "b"] {
        let out = out_dir(&dir, name);
        transs(&[
            "check",
            "cspace:1:2",
            "--q",
            "1",
            "--t-end",
            "2",
            "--seed",
            "9",
            "--out",
            &out,
        ]);
        texts.push(fs::read(Path::new(&out).join("report.json")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let report: Value = serde_json::from_slice(&texts[0]).unwrap();
    assert_eq!(report["seed"], 9);
}
