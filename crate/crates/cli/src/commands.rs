//! One function per subcommand plus the pipeline stages they share.

use std::collections::BTreeSet;
use std::path::Path;

use bimonetary_core::category::{
    apply_functor, check_commutes, check_functor_laws, compose_path, random_morphisms, standard_diagram, Diagram,
    Functor, Morphism, MorphismMap,
};
use bimonetary_core::colimit::{build_indicator, validate_and_forecast};
use bimonetary_core::econometrics::{
    fevd, fit_var, granger, irf, johansen_trace, ljung_box, stationarity_pipeline, forecast,
};
use bimonetary_core::equilibrium::{gap_report, solve_panel};
use bimonetary_core::panel::{ids, parse_date, CANONICAL_COLUMNS};
use bimonetary_core::scenarios::{
    dual_model_compare, builtin_scenarios, run_sensitivity, scenarios_from_json, CategorySpec, ScenarioSpec,
    SensitivityOptions,
};
use bimonetary_core::structural::{calibrate, residuals, simulate};
use bimonetary_core::{synth, Panel, VariableId};
use serde::Serialize;

use crate::artifacts::{fmt_f64, sha256_hex, Artifacts, InputRecord, Manifest};
use crate::config::{RunConfig, DEFAULT_VAR_VARIABLES};
use crate::error::{AtStage, CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Var,
    Equilibrium,
    Colimit,
    Sensitivity,
    All,
}

impl Stage {
    const CONCRETE: [Stage; 4] = [Stage::Var, Stage::Equilibrium, Stage::Colimit, Stage::Sensitivity];

    fn name(self) -> &'static str {
        match self {
            Stage::Var => "var",
            Stage::Equilibrium => "equilibrium",
            Stage::Colimit => "colimit",
            Stage::Sensitivity => "sensitivity",
            Stage::All => "all",
        }
    }
}

/// Expands `all` and sorts into execution order.
pub fn resolve_stages(requested: &[Stage]) -> Vec<Stage> {
    let set: BTreeSet<Stage> = if requested.is_empty() {
        [Stage::Var].into()
    } else if requested.contains(&Stage::All) {
        Stage::CONCRETE.into()
    } else {
        requested.iter().copied().collect()
    };
    set.into_iter().collect()
}

pub struct Loaded {
    pub panel: Panel,
    pub record: InputRecord,
}

/// Reads `cfg.input`, or generates the seeded synthetic canonical panel when
/// no input is configured.
pub fn load_input(cfg: &RunConfig) -> CliResult<Loaded> {
    match &cfg.input {
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| CliError::input("load", "Io", format!("{}: {e}", path.display())))?;
            let panel = Panel::read_csv(bytes.as_slice(), None).at("load")?;
            Ok(Loaded {
                panel,
                record: InputRecord {
                    path: Some(path.display().to_string()),
                    sha256: Some(sha256_hex(&bytes)),
                    synthetic_rows: None,
                },
            })
        }
        None => {
            let panel = synth::canonical_panel(cfg.seed(), cfg.synth.rows).at("load")?;
            Ok(Loaded {
                panel,
                record: InputRecord { path: None, sha256: None, synthetic_rows: Some(cfg.synth.rows) },
            })
        }
    }
}

fn manifest(command: &str, stages: &[Stage], cfg: &RunConfig, input: InputRecord) -> Manifest {
    Manifest {
        command: command.into(),
        stages: stages.iter().map(|s| s.name().to_owned()).collect(),
        seed: cfg.seed(),
        input,
        config: serde_json::to_value(cfg).expect("config serializes"),
    }
}

fn out_dir(cfg: &RunConfig) -> &Path {
    cfg.out.as_deref().unwrap_or(Path::new("out"))
}

// ---------------------------------------------------------------------------
// validate

#[derive(Debug, Serialize)]
pub struct ColumnStatus {
    pub column: String,
    pub status: &'static str,
    pub missing_values: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct SchemaReport {
    pub rows: usize,
    pub first_date: Option<String>,
    pub last_date: Option<String>,
    pub date_ordering: String,
    pub columns: Vec<ColumnStatus>,
    pub valid: bool,
}

/// Scans the raw date column: returns the ordering status, or the first
/// duplicated date.
fn scan_dates(bytes: &[u8]) -> CliResult<String> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let csv_err = |e: csv::Error| CliError::input("validate", "Csv", e.to_string());
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let idx = headers
        .iter()
        .position(|h| h.trim() == "Date")
        .ok_or_else(|| CliError::input("validate", "MissingColumn", "missing column: Date"))?;
    let mut seen = BTreeSet::new();
    let mut previous = None;
    let mut first_disorder = None;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let raw = rec.get(idx).unwrap_or("");
        let row = k + 2;
        let date = parse_date(raw).ok_or_else(|| {
            CliError::input("validate", "UnparseableValue", format!("unparseable date {raw:?} at row {row}"))
        })?;
        if !seen.insert(date) {
            return Err(CliError::input("validate", "DuplicateDate", format!("duplicate date: {date}")));
        }
        if previous.is_some_and(|p| date < p) && first_disorder.is_none() {
            first_disorder = Some(row);
        }
        previous = Some(date);
    }
    Ok(match first_disorder {
        None => "strictly increasing".into(),
        Some(row) => format!("not sorted (first out-of-order row {row}); rows are sorted on load"),
    })
}

pub fn cmd_validate(cfg: &RunConfig) -> CliResult<SchemaReport> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::input("validate", "MissingInput", "validate needs --input"))?;
    let bytes = std::fs::read(path).map_err(|e| CliError::input("validate", "Io", format!("{}: {e}", path.display())))?;
    let date_ordering = scan_dates(&bytes)?;
    let panel = Panel::read_csv(bytes.as_slice(), None).at("validate")?;

    let required: Vec<String> = match &cfg.schema {
        Some(s) => s.clone(),
        None => CANONICAL_COLUMNS.iter().map(|c| c.to_string()).collect(),
    };
    let mut columns: Vec<ColumnStatus> = required
        .iter()
        .map(|c| match panel.column(c) {
            Ok(s) => ColumnStatus { column: c.clone(), status: "present", missing_values: Some(s.missing_count()) },
            Err(_) => ColumnStatus { column: c.clone(), status: "missing", missing_values: None },
        })
        .collect();
    for name in panel.column_names().filter(|n| !required.iter().any(|r| r == n.as_str())) {
        columns.push(ColumnStatus {
            column: name.to_string(),
            status: "extra",
            missing_values: Some(panel.column(name.as_str()).at("validate")?.missing_count()),
        });
    }
    let missing: Vec<String> = columns.iter().filter(|c| c.status == "missing").map(|c| c.column.clone()).collect();
    let report = SchemaReport {
        rows: panel.len(),
        first_date: panel.dates().first().map(|d| d.to_string()),
        last_date: panel.dates().last().map(|d| d.to_string()),
        date_ordering,
        valid: missing.is_empty(),
        columns,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if let Some(dir) = &cfg.out {
        let mut art = Artifacts::create(dir)?;
        art.write_json("validation.json", &report)?;
        let record = InputRecord {
            path: Some(path.display().to_string()),
            sha256: Some(sha256_hex(&bytes)),
            synthetic_rows: None,
        };
        art.finish(manifest("validate", &[], cfg, record))?;
    }
    if !missing.is_empty() {
        return Err(CliError::input(
            "validate",
            "MissingColumn",
            format!("missing column{}: {}", if missing.len() > 1 { "s" } else { "" }, missing.join(", ")),
        ));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// pipeline stages

fn var_variables(cfg: &RunConfig, panel: &Panel) -> Vec<String> {
    match &cfg.var.variables {
        Some(v) => v.clone(),
        None if DEFAULT_VAR_VARIABLES.iter().all(|v| panel.has(v)) => {
            DEFAULT_VAR_VARIABLES.iter().map(|s| s.to_string()).collect()
        }
        None => panel.column_names().map(|v| v.to_string()).collect(),
    }
}

fn ensure_nonempty(panel: &Panel, stage: &str) -> CliResult<()> {
    if panel.is_empty() {
        return Err(CliError::core(stage, &bimonetary_core::Error::EmptyResult));
    }
    Ok(())
}

pub fn stage_var(panel: &Panel, cfg: &RunConfig, art: &mut Artifacts) -> CliResult<()> {
    let opts = &cfg.var;
    let vars = var_variables(cfg, panel);
    let names = ids(&vars);
    let levels = panel.select(&vars).at("var")?.clean();
    ensure_nonempty(&levels, "var")?;

    let (stationary, report) = stationarity_pipeline(&levels).at("stationarity")?;
    art.write_json("stationarity.json", &report)?;
    art.write_panel("stationary_panel.csv", &stationary)?;

    if (2..=11).contains(&vars.len()) {
        let j = johansen_trace(&levels.dense_matrix(&vars).at("johansen")?, opts.johansen_k_ar_diff).at("johansen")?;
        art.write_json("johansen.json", &j)?;
    } else {
        art.warn(format!("johansen skipped: needs 2 to 11 variables, got {}", vars.len()));
        art.write_json("johansen.json", &serde_json::json!({ "skipped": "needs 2 to 11 variables" }))?;
    }

    let dense: Vec<Vec<f64>> = vars.iter().map(|v| stationary.dense_column(v)).collect::<Result<_, _>>().at("granger")?;
    let mut tidy = Vec::new();
    let mut matrix = Vec::new();
    for (i, cause) in vars.iter().enumerate() {
        let mut row = vec![cause.clone()];
        for (j, effect) in vars.iter().enumerate() {
            if i == j {
                row.push(String::new());
                continue;
            }
            let g = granger(&dense[i], &dense[j], opts.granger_max_lag).at("granger")?;
            row.push(fmt_f64(g.min_p_value()));
            for l in &g.lags {
                tidy.push(vec![
                    cause.clone(),
                    effect.clone(),
                    l.lag.to_string(),
                    fmt_f64(l.f_stat),
                    fmt_f64(l.p_value),
                    l.df_num.to_string(),
                    l.df_den.to_string(),
                ]);
            }
        }
        matrix.push(row);
    }
    art.write_table("granger.csv", &["cause", "effect", "lag", "f_stat", "p_value", "df_num", "df_den"], &tidy)?;
    let mut header = vec!["cause"];
    header.extend(vars.iter().map(String::as_str));
    art.write_table("granger_matrix.csv", &header, &matrix)?;

    let y = stationary.dense_matrix(&vars).at("var")?;
    let model = fit_var(&y, &names, opts.max_lags, opts.criterion).at("var")?;
    let summary = model.summary().at("var")?;
    art.write_text("var_summary.txt", &summary.to_text())?;
    art.write_json("var_summary.json", &summary)?;
    if let Some(sel) = &model.lag_selection {
        let rows: Vec<Vec<String>> = sel
            .table
            .iter()
            .map(|c| vec![c.p.to_string(), fmt_f64(c.aic), fmt_f64(c.bic), fmt_f64(c.hqic), fmt_f64(c.fpe)])
            .collect();
        art.write_table("lag_selection.csv", &["p", "aic", "bic", "hqic", "fpe"], &rows)?;
    }

    let responses = irf(&model, opts.horizon);
    let mut rows = Vec::new();
    for (h, psi) in responses.psi.iter().enumerate() {
        for (i, response) in vars.iter().enumerate() {
            for (j, impulse) in vars.iter().enumerate() {
                let theta = responses.theta.as_ref().map(|t| fmt_f64(t[h][(i, j)])).unwrap_or_default();
                rows.push(vec![h.to_string(), response.clone(), impulse.clone(), fmt_f64(psi[(i, j)]), theta]);
            }
        }
    }
    art.write_table("irf.csv", &["horizon", "response", "impulse", "psi", "theta"], &rows)?;

    let decomposition = fevd(&model, opts.horizon.max(1)).at("fevd")?;
    let mut rows = Vec::new();
    for (i, response) in vars.iter().enumerate() {
        let shares = &decomposition.shares[i];
        for h in 0..shares.nrows() {
            for (j, shock) in vars.iter().enumerate() {
                rows.push(vec![response.clone(), (h + 1).to_string(), shock.clone(), fmt_f64(shares[(h, j)])]);
            }
        }
    }
    art.write_table("fevd.csv", &["response", "step", "shock", "share"], &rows)?;

    let mut rows = Vec::new();
    for (i, eq) in vars.iter().enumerate() {
        let resid: Vec<f64> = model.residuals.column(i).iter().copied().collect();
        let lb = ljung_box(&resid, opts.ljung_box_lags).at("ljung_box")?;
        rows.push(vec![eq.clone(), lb.lags.to_string(), fmt_f64(lb.q), fmt_f64(lb.p_value)]);
    }
    art.write_table("ljung_box.csv", &["equation", "lags", "q", "p_value"], &rows)?;

    let f = forecast(&model, &y, opts.forecast_steps).at("forecast")?;
    let rows: Vec<Vec<String>> = (0..f.nrows())
        .map(|s| std::iter::once((s + 1).to_string()).chain(f.row(s).iter().map(|v| fmt_f64(*v))).collect())
        .collect();
    let mut header = vec!["step"];
    header.extend(vars.iter().map(String::as_str));
    art.write_table("forecast.csv", &header, &rows)?;
    Ok(())
}

pub fn stage_equilibrium(panel: &Panel, cfg: &RunConfig, art: &mut Artifacts) -> CliResult<()> {
    let series = solve_panel(panel, &cfg.equilibrium).at("equilibrium")?;
    let rows: Vec<Vec<String>> = series
        .rows
        .iter()
        .map(|r| {
            vec![
                r.date.to_string(),
                fmt_f64(r.e_star),
                fmt_f64(r.e_star),
                fmt_f64(r.observed),
                fmt_f64(r.gap),
                fmt_f64(r.penalty_at_min),
                r.converged.to_string(),
            ]
        })
        .collect();
    art.write_table(
        "equilibrium.csv",
        &["Date", "equilibrio_tipo_de_cambio", "e_star", "observed", "gap", "penalty", "converged"],
        &rows,
    )?;
    let report = gap_report(&series).at("equilibrium")?;
    let not_converged = series.rows.iter().filter(|r| !r.converged).count();
    if not_converged > 0 {
        art.warn(format!("equilibrium: {not_converged} rows hit the iteration limit"));
    }
    art.write_json(
        "equilibrium_report.json",
        &serde_json::json!({ "gaps": report, "not_converged": not_converged, "skipped": series.skipped }),
    )?;
    Ok(())
}

pub fn stage_colimit(panel: &Panel, cfg: &RunConfig, art: &mut Artifacts) -> CliResult<()> {
    let indicator = build_indicator(panel, &cfg.colimit).at("colimit")?;
    let v = &cfg.colimit_validation;
    let table = indicator.to_panel(panel, &[v.reference.as_str(), v.external.as_str()]).at("colimit")?;
    art.write_panel("colimit.csv", &table)?;
    let pca = &indicator.pca;
    let rows: Vec<Vec<String>> = pca
        .variables
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut r = vec![name.to_string(), fmt_f64(indicator.dynamic_weights[name])];
            r.extend((0..pca.n_components()).map(|c| fmt_f64(pca.loadings[(i, c)])));
            r
        })
        .collect();
    let loading_names: Vec<String> = (1..=pca.n_components()).map(|c| format!("loading_pc{c}")).collect();
    let mut header = vec!["variable", "dynamic_weight"];
    header.extend(loading_names.iter().map(String::as_str));
    art.write_table("colimit_weights.csv", &header, &rows)?;
    art.write_json(
        "colimit_pca.json",
        &serde_json::json!({
            "explained_variance": pca.explained_variance,
            "explained_variance_ratio": pca.explained_variance_ratio,
        }),
    )?;

    let validation = validate_and_forecast(panel, &indicator, v).at("colimit_validation")?;
    let rows: Vec<Vec<String>> = validation
        .granger
        .lags
        .iter()
        .map(|l| vec![l.lag.to_string(), fmt_f64(l.f_stat), fmt_f64(l.p_value), l.df_num.to_string(), l.df_den.to_string()])
        .collect();
    art.write_table("colimit_granger.csv", &["lag", "f_stat", "p_value", "df_num", "df_den"], &rows)?;
    let f = &validation.forecast;
    let rows: Vec<Vec<String>> = (0..f.nrows())
        .map(|s| std::iter::once((s + 1).to_string()).chain(f.row(s).iter().map(|x| fmt_f64(*x))).collect())
        .collect();
    let mut header = vec!["step"];
    header.extend(validation.columns.iter().map(String::as_str));
    art.write_table("colimit_forecast.csv", &header, &rows)?;
    art.write_json(
        "colimit_validation.json",
        &serde_json::json!({
            "granger_min_p_value": validation.granger.min_p_value(),
            "var_p": validation.var_p,
            "last_date": validation.last_date,
        }),
    )?;
    Ok(())
}

fn load_scenarios(cfg: &RunConfig) -> CliResult<Vec<ScenarioSpec>> {
    match cfg.scenario_file.as_deref() {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::input("scenario", "Io", format!("{}: {e}", path.display())))?;
            scenarios_from_json(&text).at("scenario")
        }
        None => Ok(builtin_scenarios()),
    }
}

/// File-name-safe form of a scenario name.
fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn stage_sensitivity(
    panel: &Panel,
    cfg: &RunConfig,
    scenarios: &[ScenarioSpec],
    art: &mut Artifacts,
) -> CliResult<()> {
    if scenarios.is_empty() {
        art.warn("scenario list is empty; no comparison files written");
        return Ok(());
    }
    let mut seen = BTreeSet::new();
    for s in scenarios {
        if !seen.insert(slug(&s.name)) {
            return Err(CliError::input("scenario", "DuplicateScenario", format!("duplicate scenario name: {}", s.name)));
        }
        for shock in &s.shocks {
            if !panel.has(shock.variable.as_str()) {
                return Err(CliError::input(
                    "scenario",
                    "UnknownVariable",
                    format!("unknown variable: {} (scenario {})", shock.variable, s.name),
                ));
            }
        }
    }
    let sc = &cfg.sensitivity;
    let model_vars = sc.variables.clone().unwrap_or_else(|| var_variables(cfg, panel));
    let spec = CategorySpec::new("model", &model_vars);
    for s in scenarios {
        for shock in s.shocks.iter().filter(|k| !model_vars.iter().any(|v| v == k.variable.as_str())) {
            art.warn(format!("scenario {}: {} is not a model variable, the shock has no effect", s.name, shock.variable));
        }
    }
    let mut cols: Vec<String> = model_vars.clone();
    for v in scenarios.iter().flat_map(|s| &s.shocks).map(|k| k.variable.to_string()) {
        if !cols.contains(&v) {
            cols.push(v);
        }
    }
    let work = panel.select(&cols).at("sensitivity")?.clean();
    ensure_nonempty(&work, "sensitivity")?;
    let opts = SensitivityOptions { max_lags: sc.max_lags, criterion: sc.criterion, window: sc.window };
    let comparisons = run_sensitivity(&work, &sc.target, scenarios, &spec, &opts).at("sensitivity")?;
    let mut summary = Vec::new();
    for c in &comparisons {
        let rows: Vec<Vec<String>> = (0..c.dates.len())
            .map(|t| {
                vec![
                    c.dates[t].to_string(),
                    fmt_f64(c.baseline[t]),
                    fmt_f64(c.shocked[t]),
                    fmt_f64(c.difference[t]),
                    fmt_f64(c.residuals[t]),
                ]
            })
            .collect();
        art.write_table(
            &format!("scenario_{}.csv", slug(&c.name)),
            &["Date", "baseline", "shocked", "difference", "residual"],
            &rows,
        )?;
        let scale = c.baseline.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if c.max_abs_difference <= 1e-9 * scale {
            art.warn(format!(
                "scenario {}: difference is at rounding level; shocks covering every row are absorbed by the refit (set a window)",
                c.name
            ));
        }
        summary.push(serde_json::json!({
            "name": c.name,
            "target": sc.target,
            "mean_abs_difference": c.mean_abs_difference,
            "max_abs_difference": c.max_abs_difference,
        }));
    }
    art.write_json("sensitivity_summary.json", &summary)?;

    if let Some(shock) = &sc.dual_shock {
        let dom = &cfg.categories.domestic;
        let ext = &cfg.categories.external;
        let all: Vec<&VariableId> = dom.variables.iter().chain(&ext.variables).collect();
        let missing: Vec<String> = all.iter().filter(|v| !panel.has(v.as_str())).map(|v| v.to_string()).collect();
        if !missing.is_empty() {
            art.warn(format!("dual forecast skipped: missing {}", missing.join(", ")));
            return Ok(());
        }
        let work = panel.select(&all.iter().map(|v| v.as_str()).collect::<Vec<_>>()).at("dual_forecast")?.clean();
        let dual = dual_model_compare(&work, dom, ext, &sc.target, shock, sc.dual_steps, &opts).at("dual_forecast")?;
        let rows: Vec<Vec<String>> = (0..dual.domestic.len())
            .map(|s| vec![(s + 1).to_string(), fmt_f64(dual.domestic[s]), fmt_f64(dual.enriched[s])])
            .collect();
        art.write_table("dual_forecast.csv", &["step", "domestic", "enriched"], &rows)?;
    }
    Ok(())
}

/// Runs the listed stages on the input and writes the artifact directory.
pub fn cmd_pipeline(command: &str, cfg: &RunConfig, stages: &[Stage]) -> CliResult<()> {
    let loaded = load_input(cfg)?;
    let scenarios = if stages.contains(&Stage::Sensitivity) { load_scenarios(cfg)? } else { vec![] };
    let mut art = Artifacts::create(out_dir(cfg))?;
    for stage in stages {
        match stage {
            Stage::Var => stage_var(&loaded.panel, cfg, &mut art)?,
            Stage::Equilibrium => stage_equilibrium(&loaded.panel, cfg, &mut art)?,
            Stage::Colimit => stage_colimit(&loaded.panel, cfg, &mut art)?,
            Stage::Sensitivity => stage_sensitivity(&loaded.panel, cfg, &scenarios, &mut art)?,
            Stage::All => unreachable!("expanded by resolve_stages"),
        }
    }
    art.finish(manifest(command, stages, cfg, loaded.record))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// structural

pub fn cmd_calibrate(cfg: &RunConfig) -> CliResult<()> {
    let loaded = load_input(cfg)?;
    let cal = calibrate(&loaded.panel.clean(), &cfg.calibration).at("calibrate")?;
    let mut art = Artifacts::create(out_dir(cfg))?;
    art.write_json("calibration.json", &cal)?;
    art.finish(manifest("calibrate", &[], cfg, loaded.record))?;
    Ok(())
}

pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<()> {
    let loaded = load_input(cfg)?;
    let panel = loaded.panel.clean();
    let proxies = &cfg.calibration.proxies;
    let mut art = Artifacts::create(out_dir(cfg))?;
    let coefficients = match &cfg.simulation.coefficients {
        Some(c) => c.clone(),
        None => {
            let cal = calibrate(&panel, &cfg.calibration).at("calibrate")?;
            art.write_json("calibration.json", &cal)?;
            cal.coefficients
        }
    };
    let sim = simulate(&panel, &coefficients, proxies).at("simulate")?;
    art.write_panel("simulation.csv", &sim)?;
    let mut resid = Panel::new(sim.dates().to_vec(), Default::default()).at("simulate")?;
    for (name, values) in residuals(&sim, proxies).at("simulate")? {
        resid.set_column(name, bimonetary_core::Series::from_values(values)).at("simulate")?;
    }
    art.write_panel("residuals.csv", &resid)?;
    art.finish(manifest("simulate", &[], cfg, loaded.record))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// functor-check

#[derive(Debug, Serialize)]
struct FunctorCheckSummary {
    diagram_commutes: bool,
    image_commutes: bool,
    laws_hold: bool,
    law_checks: usize,
    max_law_deviation: f64,
    samples: usize,
}

pub fn cmd_functor_check(cfg: &RunConfig) -> CliResult<bool> {
    let stage = "functor_check";
    let fc = &cfg.functor_check;
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|e| CliError::input(stage, "Io", format!("{}: {e}", p.display())))
    };
    let diagram = match &fc.diagram {
        Some(p) => Diagram::from_json(&read(p)?).at(stage)?,
        None => standard_diagram(),
    };
    let functor = match &fc.functor {
        Some(p) => Functor::from_json(&read(p)?).at(stage)?,
        None => Functor::identity(diagram.nodes.iter().map(|n| &n.id)),
    };
    let loaded = load_input(cfg)?;
    let panel = &loaded.panel;

    let commutes = check_commutes(&diagram, panel, fc.tolerance).at(stage)?;
    let image = apply_functor(&functor, &diagram).at(stage)?;
    let image_commutes = check_commutes(&image, panel, fc.tolerance).at(stage)?;

    // Edges, the declared composites, and (for rule-based functors) random
    // morphisms between the diagram objects that are panel columns.
    let mut samples: Vec<Morphism> = diagram.edges.iter().map(|e| e.morphism.clone()).collect();
    for pair in &diagram.equal_paths {
        for path in [&pair.left, &pair.right].into_iter().filter(|p| p.len() > 1) {
            let members: Vec<&Morphism> =
                path.iter().map(|n| diagram.edge(n).map(|e| &e.morphism)).collect::<Result<_, _>>().at(stage)?;
            samples.push(compose_path(&members).at(stage)?);
        }
    }
    if !matches!(functor.morphism_map, MorphismMap::Table { .. }) && fc.random_samples > 0 {
        let objects: Vec<VariableId> = diagram
            .nodes
            .iter()
            .map(|n| n.id.clone())
            .filter(|id| panel.has(id.as_str()) && functor.object_map.contains_key(id))
            .collect();
        let params: Vec<VariableId> = panel.column_names().cloned().collect();
        if objects.is_empty() || params.is_empty() {
            return Err(CliError::input(stage, "NoSampleObjects", "no diagram object is a panel column"));
        }
        let mut rng = synth::rng(cfg.seed());
        samples.extend(random_morphisms(&mut rng, &objects, &params, fc.random_samples));
    }
    let laws = check_functor_laws(&functor, &samples, panel, fc.tolerance.unwrap_or(0.0)).at(stage)?;

    let summary = FunctorCheckSummary {
        diagram_commutes: commutes.passed,
        image_commutes: image_commutes.passed,
        laws_hold: laws.passed,
        law_checks: laws.checks.len(),
        max_law_deviation: laws.max_deviation,
        samples: samples.len(),
    };
    let mut art = Artifacts::create(out_dir(cfg))?;
    art.write_json(
        "functor_check.json",
        &serde_json::json!({
            "summary": summary,
            "diagram": commutes,
            "image": image_commutes,
            "laws": laws,
        }),
    )?;
    art.write_json("diagram.json", &diagram)?;
    art.write_json("functor.json", &functor)?;
    art.finish(manifest("functor-check", &[], cfg, loaded.record))?;
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    Ok(summary.diagram_commutes && summary.image_commutes && summary.laws_hold)
}

// ---------------------------------------------------------------------------
// synth

pub fn cmd_synth(cfg: &RunConfig, rows: usize) -> CliResult<()> {
    let panel = synth::canonical_panel(cfg.seed(), rows).at("synth")?;
    let mut art = Artifacts::create(out_dir(cfg))?;
    art.write_panel("panel.csv", &panel)?;
    let record = InputRecord { path: None, sha256: None, synthetic_rows: Some(rows) };
    art.finish(manifest("synth", &[], cfg, record))?;
    Ok(())
}
