use std::path::Path;
use std::process::{Command, Output};

use lindep_core::jets::sample_outputs;
use lindep_core::{integrate, models, Tolerances};
use serde_json::Value;

const LV: &str = r#"
theta = [0.6666666666666666, 1.3333333333333333, 1.0, 1.0]
x0 = [1.0, 2.0]

[model]
name = "lotka_volterra"
"#;

fn lindep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindep")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn run_ok(dir: &Path, config: &str) -> Value {
    let path = write(dir, "run.toml", config);
    let out = lindep(&["run", &path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Exit code and the parsed single-line error object.
fn run_err(dir: &Path, config: &str) -> (i32, Value) {
    let path = write(dir, "run.toml", config);
    let out = lindep(&["run", &path]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1, "{stderr}");
    (out.status.code().unwrap(), serde_json::from_str(&stderr).unwrap())
}

fn max_rel(v: &Value) -> f64 {
    v["relative_error"]["theta_max"].as_f64().unwrap()
}

fn lv_csv(dir: &Path, dt: f64, perturb: impl Fn(usize, &mut Vec<f64>)) -> String {
    let m = models::lotka_volterra();
    let th = [2.0 / 3.0, 4.0 / 3.0, 1.0, 1.0];
    let times: Vec<f64> = (0..=(10.0 / dt) as usize).map(|k| k as f64 * dt).collect();
    let traj = integrate(&m.spec, &[1.0, 2.0], &th, (0.0, 10.0), &Tolerances::default()).unwrap();
    let table = sample_outputs(&m.spec, &traj, &th, &times).unwrap();
    let mut text = String::from("t,y1,y2\n");
    for (k, (t, y)) in table.times.iter().zip(&table.values).enumerate() {
        let mut row = vec![*t, y[0], y[1]];
        perturb(k, &mut row);
        text += &format!("{:e},{:e},{:e}\n", row[0], row[1], row[2]);
    }
    write(dir, "lv.csv", &text)
}

#[test]
fn simulated_lotka_volterra_run_reports_small_errors() {
    let dir = tempfile::tempdir().unwrap();
    let rep = run_ok(dir.path(), &format!("{LV}\n[sim]\nt_end = 10.0\n"));
    assert!(max_rel(&rep) <= 1e-6);
    assert!(rep["relative_error"]["x0_max"].as_f64().unwrap() <= 1e-6);
    assert_eq!(rep["tool"]["name"], "lindep");
    assert_eq!(rep["config"]["model"]["name"], "lotka_volterra");
    assert_eq!(rep["blocks"].as_array().unwrap().len(), 2);
    assert_eq!(rep["grid_points"], 200);
}

#[test]
fn reports_are_deterministic_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{LV}\n[sim]\nt_end = 5.0\n[derivatives]\nmode = \"numeric\"\n[noise]\nsigma = 1e-9\nseed = 11\n\
         [output]\npath = \"report.json\"\n"
    );
    let path = write(dir.path(), "run.toml", &cfg);
    let strip = || {
        assert!(lindep(&["run", &path]).status.success());
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(), strip());
}

#[test]
fn sim_and_data_sections_are_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run_err(dir.path(), &format!("{LV}\n[sim]\nt_end = 1.0\n[data]\ncsv = \"x.csv\"\n"));
    assert_eq!(code, 2);
    assert_eq!(err["error"], "schema");
}

#[test]
fn csv_data_run_recovers_parameters() {
    let dir = tempfile::tempdir().unwrap();
    lv_csv(dir.path(), 1e-3, |_, _| {});
    let rep = run_ok(
        dir.path(),
        &format!("{LV}\n[data]\ncsv = \"lv.csv\"\n[derivatives]\nmode = \"numeric\"\nstencil = 5\n"),
    );
    assert!(max_rel(&rep) <= 1e-3, "{}", max_rel(&rep));
    assert_eq!(rep["derivatives"], "numeric");
}

#[test]
fn non_monotone_csv_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    lv_csv(dir.path(), 1e-2, |k, row| {
        if k == 7 {
            row[0] = 0.0;
        }
    });
    let (code, err) = run_err(
        dir.path(),
        &format!("{LV}\n[data]\ncsv = \"lv.csv\"\n[derivatives]\nmode = \"numeric\"\n"),
    );
    assert_eq!(code, 4);
    assert_eq!(err["error"], "non_monotone_time");
    assert_eq!(err["row"], 8);
}

#[test]
fn bad_csv_header_and_data_with_analytic_mode() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.csv", "time,y1,y2\n0,1,2\n");
    let (code, err) = run_err(
        dir.path(),
        &format!("{LV}\n[data]\ncsv = \"bad.csv\"\n[derivatives]\nmode = \"numeric\"\n"),
    );
    assert_eq!((code, err["error"].as_str().unwrap()), (4, "bad_header"));
    let (_, err) = run_err(dir.path(), &format!("{LV}\n[data]\ncsv = \"bad.csv\"\n"));
    assert_eq!(err["error"], "schema");
}

#[test]
fn reactor_run_masks_unobserved_state() {
    let dir = tempfile::tempdir().unwrap();
    let rep = run_ok(
        dir.path(),
        "theta = [1.0, 2.0, 100.0]\nx0 = [1.0, 0.0, 350.0]\n[model]\nname = \"reactor\"\n[sim]\nt_end = 10.0\n",
    );
    assert!(max_rel(&rep) <= 1e-6);
    assert_eq!(rep["recoverable"], serde_json::json!([true, false, true]));
    assert!(rep["x0_hat"][1].is_null());
    assert!(rep["relative_error"]["x0"][1].is_null());
    assert_eq!(rep["ratios"][0]["parameter"], "h1");
}

#[test]
fn henon_heiles_and_linparam_runs() {
    let dir = tempfile::tempdir().unwrap();
    let rep = run_ok(
        dir.path(),
        "theta = [0.5, 0.5, 0.5, 0.5, 1.0, -0.3333333333333333]\nx0 = [0.1, 0.2, 0.3, -0.1]\n\
         [model]\nname = \"henon_heiles\"\n[sim]\nt_end = 10.0\n[selection]\nmode = \"square\"\n",
    );
    assert!(max_rel(&rep) <= 1e-6);
    assert_eq!(rep["solve_mode"], "square");

    let linparam = |a: &str| {
        format!(
            "theta = [0.3, -1.2, 2.0]\nx0 = [1.0, 0.0]\n[model]\nname = \"linparam\"\na = {a}\n\
             n = [1.0, 0.0, 1.0]\nrho = [[0.0], [1.0]]\nu = {{ kind = \"sinusoid\", amplitude = 1.0, frequency = 2.0 }}\n\
             [sim]\nt_end = 2.0\n"
        )
    };
    let rep = run_ok(
        dir.path(),
        &linparam("[[0.3, -0.8, 0.5], [0.9, 0.1, -0.4], [-0.2, 0.6, 0.7], [0.4, -0.5, 0.2]]"),
    );
    assert!(max_rel(&rep) <= 1e-6);
    let (code, err) = run_err(
        dir.path(),
        &linparam("[[1.0, 2.0, 3.0], [0.5, 1.0, 1.5], [2.0, 4.0, 6.0], [1.0, 2.0, 3.0]]"),
    );
    assert_eq!((code, err["error"].as_str().unwrap()), (5, "non_identifiable"));
}

#[test]
fn noise_requires_numeric_derivatives() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run_err(dir.path(), &format!("{LV}\n[sim]\nt_end = 1.0\n[noise]\nsigma = 0.01\n"));
    assert_eq!((code, err["error"].as_str().unwrap()), (2, "schema"));
}

#[test]
fn pipeline_errors_carry_block_labels() {
    let dir = tempfile::tempdir().unwrap();
    // starting at the equilibrium is rejected before anything runs
    let (_, err) = run_err(
        dir.path(),
        "theta = [0.6666666666666666, 1.3333333333333333, 1.0, 1.0]\nx0 = [1.0, 0.5]\n\
         [model]\nname = \"lotka_volterra\"\n[sim]\nt_end = 1.0\n",
    );
    assert_eq!(err["error"], "schema");
    // a near-one rank tolerance rejects every time set of the first block
    let (code, err) = run_err(dir.path(), &format!("{LV}\n[sim]\nt_end = 1.0\n[window]\ngrid_n = 3\n[selection]\ntol = 0.9\n"));
    assert_eq!(code, 5);
    assert_eq!(err["block"], "ydot1");
}

#[test]
fn models_validate_and_usage() {
    let out = lindep(&["--models"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["lotka_volterra", "reactor", "henon_heiles", "linparam"] {
        assert!(text.contains(name));
    }

    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "ok.toml", &format!("{LV}\n[sim]\nt_end = 1.0\n"));
    let out = lindep(&["--validate", &path]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid"], true);

    let path = write(dir.path(), "broken.toml", "[model\nname = 1");
    let out = lindep(&["--validate", &path]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"], "config_parse");

    let out = lindep(&["run", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(3));
    let out = lindep(&[]);
    assert_eq!(out.status.code(), Some(2));
}
