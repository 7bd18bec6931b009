use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_disperse-lab");

const CYCLIC_H3: &str = r#"{
  "model": "upper_half_space_H3",
  "generators": [[[[2.718281828459045, 0], [0, 0]], [[0, 0], [0.36787944117144233, 0]]]],
  "label": "cyclic, translation length 2"
}"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], threads: &str) -> Output {
    Command::new(BIN)
        .args(args)
        .env("DISPERSE_LAB_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_group(dir: &Path) -> String {
    let p = dir.join("cyclic.json");
    fs::write(&p, CYCLIC_H3).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_all_default_passes_on_h3() {
    let o = run(&["verify-all"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}{}", stderr(&o));
    assert!(out.contains("11 of 11 checks passed"), "{out}");
    assert_eq!(out.lines().filter(|l| l.contains(" PASS ")).count(), 11);
}

#[test]
fn wrong_decay_exponent_is_a_verification_failure() {
    let o = run(&["verify-all", "--checks", "3", "--override", "decay_exponent=-1.0"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn unknown_override_is_a_usage_error() {
    let o = run(&["verify-all", "--checks", "11", "--override", "decay_exponnent=-1.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("decay_exponnent"), "{}", stderr(&o));
}

#[test]
fn malformed_group_file_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, r#"{"model": "upper_half_space_H3", "generators": [[[[1,0],[0,0]],[[0,0],["x",0]]]], "label": "bad"}"#).unwrap();
    let o = run(&["group", "--group", p.to_str().unwrap(), "--op", "delta"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("generators[0][1][1]"), "{err}");
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn bad_flags_exit_with_usage_code() {
    assert_eq!(run(&["kernel", "--q", "four"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_schema_errors_report_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cfg.json");
    fs::write(&p, "{\n  \"schema_version\": 1,\n  \"command\": \"kernel\",\n  \"params\": {\"qq\": 4}\n}\n").unwrap();
    let o = run(&["run", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 4") && err.contains("qq"), "{err}");

    fs::write(&p, r#"{"schema_version": 1, "command": "group", "group": "missing.json"}"#).unwrap();
    let o = run(&["run", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("does not exist"));
}

#[test]
fn lie_dumps_the_catalog() {
    let o = run(&["lie"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 9);
    let h3 = arr.iter().find(|s| s["family"] == "R" && s["n"] == 3).unwrap();
    assert_eq!(h3["rho"], 1.0);
    assert_eq!(h3["m_alpha"], 2);
}

#[test]
fn kernel_csv_has_described_columns() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("k.csv");
    let o = run(&["kernel", "--space", "H3", "--t-list", "2,4", "--grid-n", "21", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    for name in ["t [time]", "Lq_norm [", "fitted_c [", "branch_coverage ["] {
        assert!(header.contains(name), "{header}");
    }
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    // ‖s_t‖_{L⁴} ∝ t^{−3/2} on H³ for large t.
    let slope = (rows[1][1] / rows[0][1]).ln() / 2f64.ln();
    assert!((slope + 1.5).abs() < 0.1, "{slope}");
}

#[test]
fn group_poincare_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_group(dir.path());
    let o = run(&["group", "--group", &g, "--op", "poincare", "--s", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sum = v["result"]["partial_sum"].as_f64().unwrap();
    // coth(sℓ/2) with s = 1, ℓ = 2.
    assert!((sum - 1.0 / 1f64.tanh()).abs() < 1e-10, "{sum}");
}

#[test]
fn fixed_seed_gives_identical_bytes_for_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_group(dir.path());
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3", "1"].iter().enumerate() {
        let csv = dir.path().join(format!("d{i}.csv"));
        let svg = dir.path().join(format!("d{i}.svg"));
        let o = run_env(
            &[
                "dispersive",
                "--group",
                &g,
                "--t-range",
                "1:8:5",
                "--samples",
                "4000",
                "--seed",
                "7",
                "--fit",
                "--out",
                csv.to_str().unwrap(),
                "--plot",
                svg.to_str().unwrap(),
            ],
            threads,
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push((fs::read(&csv).unwrap(), fs::read(&svg).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let svg = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(svg.contains("slope \u{2212}"), "{svg}");
}

#[test]
fn single_time_plot_has_no_fit() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("one.svg");
    let o = run(&["dispersive", "--space", "H3", "--t-range", "2:2:1", "--plot", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<circle").count(), 1);
    assert!(!text.contains("slope"));
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let a = run(&["--save-config", cfg.to_str().unwrap(), "kernel", "--t-list", "3", "--grid-n", "5"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let saved = fs::read_to_string(&cfg).unwrap();
    assert!(saved.contains("\"schema_version\": 1"), "{saved}");
    let b = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn nls_writes_norms_and_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.json");
    let o = run(&["nls", "--gamma", "2", "--eps", "1e-3", "--T", "4", "--pairs", "inf,2;inf,2", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(v["contracted"], true);
    assert!(v["norms"]["times"].as_array().unwrap().len() > 100);
    let q = v["strichartz"]["quotient"]["value"].as_f64().unwrap();
    // L^∞_t L²_x over ‖f‖₂ + forcing: at most 1 and close to it for small data.
    assert!(q <= 1.0 + 1e-9 && q > 0.99, "{q}");
    let res = v["scattering_residuals"].as_array().unwrap();
    assert!(!res.is_empty());
    assert!(v["ygamma"]["total"].as_f64().unwrap() > 0.0);
}

#[test]
fn nls_refuses_large_data_and_other_spaces() {
    assert_eq!(run(&["nls", "--eps", "0.5", "--T", "1"]).status.code(), Some(1));
    assert_eq!(run(&["nls", "--space", "H2", "--T", "1"]).status.code(), Some(1));
}
