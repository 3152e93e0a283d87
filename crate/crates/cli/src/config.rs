//! The JSON run configuration. Every block is optional; missing fields take
//! the module defaults.

use std::path::{Path, PathBuf};

use bimonetary_core::colimit::{ColimitConfig, ValidationOptions};
use bimonetary_core::econometrics::Criterion;
use bimonetary_core::equilibrium::EquilibriumOptions;
use bimonetary_core::scenarios::{CategorySpec, DateWindow, Shock};
use bimonetary_core::structural::{CalibrationOptions, StructuralCoefficients};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Variables of the six-equation VAR; inflation is ordered first.
pub const DEFAULT_VAR_VARIABLES: [&str; 6] =
    ["Ipc Argentina", "M2", "Long Interest", "Short Interest", "Embi+ARG", "Historical Ars Usd"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// Never echoed: the manifest must not depend on where outputs land.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Columns `validate` requires; defaults to the canonical schema.
    pub schema: Option<Vec<String>>,
    pub scenario_file: Option<PathBuf>,
    pub categories: Categories,
    pub var: VarStage,
    pub equilibrium: EquilibriumOptions,
    pub colimit: ColimitConfig,
    pub colimit_validation: ValidationOptions,
    pub sensitivity: SensitivityStage,
    pub calibration: CalibrationOptions,
    pub simulation: SimulationStage,
    pub functor_check: FunctorCheckStage,
    pub synth: SynthStage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Categories {
    pub domestic: CategorySpec,
    pub external: CategorySpec,
}

impl Default for Categories {
    fn default() -> Self {
        Categories {
            domestic: CategorySpec::new(
                "domestic",
                &["Ipc Argentina", "M2", "Long Interest", "Short Interest", "Historical Ars Usd"],
            ),
            external: CategorySpec::new("external", &["Usa Pi Exp", "Short Term Usd Rate", "Embi+ARG"]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarStage {
    /// `None`: the six default variables when all are present, otherwise
    /// every column of the input.
    pub variables: Option<Vec<String>>,
    pub max_lags: usize,
    pub criterion: Criterion,
    pub horizon: usize,
    pub forecast_steps: usize,
    pub granger_max_lag: usize,
    pub ljung_box_lags: usize,
    pub johansen_k_ar_diff: usize,
}

impl Default for VarStage {
    fn default() -> Self {
        VarStage {
            variables: None,
            max_lags: 10,
            criterion: Criterion::Aic,
            horizon: 10,
            forecast_steps: 10,
            granger_max_lag: 5,
            ljung_box_lags: 10,
            johansen_k_ar_diff: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityStage {
    pub target: String,
    /// `None`: the VAR stage's variables.
    pub variables: Option<Vec<String>>,
    pub max_lags: usize,
    pub criterion: Criterion,
    pub window: Option<DateWindow>,
    /// Shock for the domestic-vs-enriched forecast comparison.
    pub dual_shock: Option<Shock>,
    pub dual_steps: usize,
}

impl Default for SensitivityStage {
    fn default() -> Self {
        SensitivityStage {
            target: "Ipc Argentina".into(),
            variables: None,
            max_lags: 5,
            criterion: Criterion::Aic,
            window: None,
            dual_shock: Some(Shock::multiplicative("M2", 1.5)),
            dual_steps: 10,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationStage {
    /// `None`: calibrate on the input first.
    pub coefficients: Option<StructuralCoefficients>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctorCheckStage {
    pub diagram: Option<PathBuf>,
    pub functor: Option<PathBuf>,
    pub random_samples: usize,
    /// `None`: exact (zero) for the law checks, relative default for commutativity.
    pub tolerance: Option<f64>,
}

impl Default for FunctorCheckStage {
    fn default() -> Self {
        FunctorCheckStage { diagram: None, functor: None, random_samples: 50, tolerance: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthStage {
    pub rows: usize,
}

impl Default for SynthStage {
    fn default() -> Self {
        SynthStage { rows: 1000 }
    }
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input("config", "Io", format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::input("config", "Json", format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(q) = p.as_mut().filter(|q| q.is_relative()) {
                *q = base.join(&*q);
            }
        };
        rebase(&mut cfg.input);
        rebase(&mut cfg.out);
        rebase(&mut cfg.scenario_file);
        rebase(&mut cfg.functor_check.diagram);
        rebase(&mut cfg.functor_check.functor);
        Ok(cfg)
    }

    /// Checks that every referenced file exists.
    pub fn validate(&self) -> CliResult<()> {
        let files = [
            ("input", &self.input),
            ("scenario_file", &self.scenario_file),
            ("functor_check.diagram", &self.functor_check.diagram),
            ("functor_check.functor", &self.functor_check.functor),
        ];
        for (field, path) in files {
            if let Some(p) = path.as_ref().filter(|p| !p.is_file()) {
                return Err(CliError::input(
                    "config",
                    "MissingFile",
                    format!("{field}: {} does not exist", p.display()),
                ));
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(bimonetary_core::synth::FIXTURE_SEED)
    }
}
