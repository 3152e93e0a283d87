use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bimonetary_core::synth;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bimonetary"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// The single error line printed on failure.
fn error_line(o: &Output) -> serde_json::Value {
    let err = stderr(o);
    let line = err.lines().find(|l| l.starts_with("{\"error\"")).unwrap_or_else(|| panic!("no error line in {err}"));
    serde_json::from_str(line).unwrap()
}

fn canonical_csv(dir: &Path, rows: usize) -> PathBuf {
    let path = dir.join("panel.csv");
    synth::canonical_panel(11, rows).unwrap().write_csv(&path).unwrap();
    path
}

fn three_variable_csv(dir: &Path) -> PathBuf {
    let path = dir.join("three.csv");
    let p = synth::canonical_panel(12, 400).unwrap();
    p.select(&["Ipc Argentina", "M2", "Short Interest"]).unwrap().write_csv(&path).unwrap();
    path
}

#[test]
fn validate_accepts_canonical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = canonical_csv(dir.path(), 20);
    let o = run(&["validate", "--input", s(&input)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cols = report["columns"].as_array().unwrap();
    assert_eq!(cols.len(), 16);
    assert!(cols.iter().all(|c| c["status"] == "present"));
    assert_eq!(report["date_ordering"], "strictly increasing");
}

#[test]
fn validate_names_missing_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("no_e.csv");
    let p = synth::canonical_panel(11, 10).unwrap();
    let keep: Vec<String> = p.column_names().filter(|c| c.as_str() != "E").map(|c| c.to_string()).collect();
    p.select(&keep).unwrap().write_csv(&path).unwrap();
    let o = run(&["validate", "--input", s(&path)]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_line(&o);
    assert_eq!(e["error"]["kind"], "MissingColumn");
    assert!(e["error"]["message"].as_str().unwrap().ends_with(": E"));
}

#[test]
fn validate_names_duplicate_date() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dup.csv");
    std::fs::write(&path, "Date,x\n2018-01-01,1\n2018-01-02,2\n2018-01-02,3\n").unwrap();
    let o = run(&["validate", "--input", s(&path)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(error_line(&o)["error"]["message"].as_str().unwrap().contains("2018-01-02"));
}

#[test]
fn pipeline_on_three_variables_writes_var_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let input = three_variable_csv(dir.path());
    let out = dir.path().join("out");
    let o = run(&["pipeline", "--input", s(&input), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["var_summary.txt", "var_summary.json", "fevd.csv", "irf.csv", "granger.csv", "ljung_box.csv", "johansen.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let fevd = std::fs::read_to_string(out.join("fevd.csv")).unwrap();
    assert!(fevd.starts_with("response,step,shock,share\n"));
    // First-ordered variable, step 1: all variance is its own.
    assert!(fevd.contains("\nIpc Argentina,1,Ipc Argentina,1\n"), "{}", &fevd[..200]);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "pipeline");
    assert_eq!(manifest["input"]["sha256"].as_str().unwrap().len(), 64);
    assert!(!manifest.to_string().contains(s(&out)));
}

#[test]
fn equilibrium_stage_writes_contract_columns() {
    let dir = tempfile::tempdir().unwrap();
    let input = canonical_csv(dir.path(), 30);
    let out = dir.path().join("out");
    let o = run(&["pipeline", "--stages", "equilibrium", "--input", s(&input), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("equilibrium.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    for col in ["Date", "e_star", "gap", "equilibrio_tipo_de_cambio"] {
        assert!(header.contains(&col), "{col}");
    }
    assert_eq!(text.lines().count(), 31);
    assert!(!out.join("fevd.csv").exists());
}

#[test]
fn scenario_command_writes_one_csv_per_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let input = canonical_csv(dir.path(), 300);
    let out = dir.path().join("out");
    let o = run(&["scenario", "--input", s(&input), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["m2_up_50pct", "long_interest_up_5", "combined"] {
        let text = std::fs::read_to_string(out.join(format!("scenario_{name}.csv"))).unwrap();
        assert!(text.starts_with("Date,baseline,shocked,difference,residual\n"));
    }
    assert!(out.join("dual_forecast.csv").is_file());
}

#[test]
fn empty_scenario_list_warns_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = canonical_csv(dir.path(), 100);
    let scen = dir.path().join("empty.json");
    std::fs::write(&scen, "[]").unwrap();
    let out = dir.path().join("out");
    let o = run(&["scenario", "--scenarios", s(&scen), "--input", s(&input), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    let csvs = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(csvs, 0);
}

#[test]
fn unknown_scenario_variable_exits_1_with_name() {
    let dir = tempfile::tempdir().unwrap();
    let input = canonical_csv(dir.path(), 100);
    let scen = dir.path().join("bad.json");
    std::fs::write(&scen, r#"[{"name": "x", "shocks": [{"variable": "M3", "kind": "additive", "magnitude": 1.0}]}]"#)
        .unwrap();
    let o = run(&["scenario", "--scenarios", s(&scen), "--input", s(&input), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_line(&o);
    assert_eq!(e["error"]["kind"], "UnknownVariable");
    assert!(e["error"]["message"].as_str().unwrap().contains("M3"));
}

#[test]
fn rank_deficiency_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("collinear.csv");
    let p = synth::canonical_panel(13, 200).unwrap();
    let mut q = p.select(&["M2", "Short Interest"]).unwrap();
    // An exact linear combination of the other two columns.
    let twin = q.column("M2").unwrap().clone();
    let sum: Vec<f64> = twin
        .present()
        .zip(q.column("Short Interest").unwrap().present())
        .map(|(a, b)| 2.0 * a - b)
        .collect();
    q.set_column("combo", bimonetary_core::Series::from_values(sum)).unwrap();
    q.write_csv(&path).unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(&config, r#"{"var": {"max_lags": 2}}"#).unwrap();
    let o = run(&["pipeline", "--config", s(&config), "--input", s(&path), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert_eq!(error_line(&o)["error"]["code"], 2);
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(&config, r#"{"vra": {}}"#).unwrap();
    let o = run(&["pipeline", "--config", s(&config)]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::write(&config, r#"{"input": "nowhere.csv"}"#).unwrap();
    let o = run(&["pipeline", "--config", s(&config)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(error_line(&o)["error"]["message"].as_str().unwrap().contains("nowhere.csv"));
}

#[test]
fn functor_check_passes_on_defaults_and_fails_on_a_broken_diagram() {
    let dir = tempfile::tempdir().unwrap();
    let input = canonical_csv(dir.path(), 60);
    let out = dir.path().join("out");
    let o = run(&["functor-check", "--input", s(&input), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("functor_check.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["laws_hold"], true);
    assert_eq!(report["summary"]["max_law_deviation"], 0.0);

    let diagram = dir.path().join("d.json");
    std::fs::write(
        &diagram,
        r#"{"nodes": [{"id": "M2"}, {"id": "V"}],
            "edges": [{"name": "f", "source": "M2", "target": "V", "kind": "affine", "a": 2.0, "b": 0.0},
                      {"name": "g", "source": "M2", "target": "V", "kind": "affine", "a": 3.0, "b": 0.0}],
            "equal_paths": [{"left": ["f"], "right": ["g"]}]}"#,
    )
    .unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(&config, r#"{"functor_check": {"diagram": "d.json"}}"#).unwrap();
    let o = run(&["functor-check", "--config", s(&config), "--input", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"]["kind"], "CheckFailed");
}

#[test]
fn calibrate_simulate_and_synth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("synth");
    let o = run(&["synth", "--rows", "120", "--seed", "5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let input = out.join("panel.csv");
    let o = run(&["simulate", "--input", s(&input), "--out", s(&dir.path().join("sim"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["calibration.json", "simulation.csv", "residuals.csv", "run_manifest.json"] {
        assert!(dir.path().join("sim").join(f).is_file(), "{f}");
    }
    let o = run(&["calibrate", "--input", s(&input), "--out", s(&dir.path().join("cal"))]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn colimit_command_writes_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let input = canonical_csv(dir.path(), 300);
    let out = dir.path().join("out");
    let o = run(&["colimit", "--input", s(&input), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("colimit.csv")).unwrap();
    assert!(text.starts_with("Date,pca_aggregate,weighted_aggregate,scaled,smoothed,E,Embi+ARG\n"));
    assert!(out.join("colimit_granger.csv").is_file());
    assert!(out.join("colimit_forecast.csv").is_file());
}
