//! Experiment configuration: a sectioned TOML schema with strict validation,
//! dotted-path overrides, and a canonical serialization used for round-trip
//! checks and run metadata.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Error kind mapped to the process exit codes: config errors exit 2,
/// numerical-contract violations exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical contract violation: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<qudit_rabi::RabiError> for CliError {
    fn from(e: qudit_rabi::RabiError) -> Self {
        use qudit_rabi::RabiError::*;
        match e {
            TruncationInadequate(_)
            | Resonance(_)
            | SingularDenominator(_)
            | ContractViolation(_)
            | Eigensolver(_)
            | DegenerateBranches(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Spectrum,
    GhzFidelity,
    NegativityMap,
    Quench,
    Adiabatic,
    SplittingScaling,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::GhzFidelity => "ghz-fidelity",
            ExperimentKind::NegativityMap => "negativity-map",
            ExperimentKind::Quench => "quench",
            ExperimentKind::Adiabatic => "adiabatic",
            ExperimentKind::SplittingScaling => "splitting-scaling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ModelSection {
    pub d: usize,
    /// Resonator frequency; inputs are rescaled to omega = 1 on ingestion.
    #[serde(default = "default_omega")]
    pub omega: f64,
    pub omega1: f64,
    pub omega2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<f64>,
    /// Fock cutoff; computed from the adequacy rule when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

fn default_omega() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepSection {
    pub g_min: f64,
    pub g_max: f64,
    pub points: usize,
    /// Number of exact levels written (spectrum experiment only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GridSection {
    pub g1_min: f64,
    pub g1_max: f64,
    pub g1_points: usize,
    pub g2_min: f64,
    pub g2_max: f64,
    pub g2_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TimeSection {
    /// Total duration in units of 1/omega; the grid is endpoint-exclusive.
    pub t_max: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RampSection {
    /// "I" switches the couplings on; "II" lowers the atomic frequencies.
    pub scheme: String,
    pub t_f: f64,
    pub slices: usize,
    /// Initial Omega1 = Omega2 for scheme II.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_initial: Option<f64>,
    /// GHZ target branch, "+" (default) or "-".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ghz_sign: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SplittingSection {
    pub g: f64,
    pub omega2_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Reserved for randomized property checks; echoed into the metadata so
    /// a run is fully reproducible from it.
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<RampSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splitting: Option<SplittingSection>,
}

impl ExperimentConfig {
    /// Parse, apply `key=value` overrides (dotted paths into the TOML tree),
    /// and validate.
    pub fn from_text(text: &str, overrides: &[String]) -> CliResult<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let config: ExperimentConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical serialization: parsing it back yields an identical value,
    /// and serializing again yields identical bytes.
    pub fn canonical(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn require<'a, T>(
        section: &'a Option<T>,
        name: &str,
        kind: ExperimentKind,
    ) -> CliResult<&'a T> {
        section.as_ref().ok_or_else(|| {
            CliError::Config(format!(
                "experiment `{}` requires a [{name}] section",
                kind.name()
            ))
        })
    }

    fn forbid<T>(section: &Option<T>, name: &str, kind: ExperimentKind) -> CliResult<()> {
        if section.is_some() {
            return Err(CliError::Config(format!(
                "experiment `{}` does not use a [{name}] section",
                kind.name()
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        let kind = self.experiment;
        let m = &self.model;
        if !(m.omega.is_finite() && m.omega > 0.0) {
            return Err(CliError::Config(format!(
                "model.omega must be positive, got {}",
                m.omega
            )));
        }

        let need_couplings = |required: bool| -> CliResult<()> {
            match (required, m.g1.is_some() || m.g2.is_some()) {
                (true, _) if m.g1.is_none() || m.g2.is_none() => Err(CliError::Config(format!(
                    "experiment `{}` requires model.g1 and model.g2",
                    kind.name()
                ))),
                (false, true) => Err(CliError::Config(format!(
                    "experiment `{}` sweeps the couplings; remove model.g1/g2",
                    kind.name()
                ))),
                _ => Ok(()),
            }
        };

        match kind {
            ExperimentKind::Spectrum | ExperimentKind::GhzFidelity => {
                let sweep = Self::require(&self.sweep, "sweep", kind)?;
                Self::forbid(&self.grid, "grid", kind)?;
                Self::forbid(&self.time, "time", kind)?;
                Self::forbid(&self.ramp, "ramp", kind)?;
                Self::forbid(&self.splitting, "splitting", kind)?;
                need_couplings(false)?;
                if sweep.points < 2 {
                    return Err(CliError::Config("sweep.points must be >= 2".into()));
                }
                if !(sweep.g_min >= 0.0 && sweep.g_max > sweep.g_min) {
                    return Err(CliError::Config("sweep requires 0 <= g-min < g-max".into()));
                }
                if kind == ExperimentKind::GhzFidelity && sweep.levels.is_some() {
                    return Err(CliError::Config(
                        "sweep.levels applies to the spectrum experiment only".into(),
                    ));
                }
                if kind == ExperimentKind::Spectrum && !(2..=4).contains(&m.d) {
                    return Err(CliError::Config(
                        "the spectrum experiment has dispersive-limit columns for d in 2..=4 only"
                            .into(),
                    ));
                }
            }
            ExperimentKind::NegativityMap => {
                let grid = Self::require(&self.grid, "grid", kind)?;
                Self::forbid(&self.sweep, "sweep", kind)?;
                Self::forbid(&self.time, "time", kind)?;
                Self::forbid(&self.ramp, "ramp", kind)?;
                Self::forbid(&self.splitting, "splitting", kind)?;
                need_couplings(false)?;
                for (name, lo, hi, pts) in [
                    ("g1", grid.g1_min, grid.g1_max, grid.g1_points),
                    ("g2", grid.g2_min, grid.g2_max, grid.g2_points),
                ] {
                    if pts < 1 || !(lo >= 0.0) || (pts > 1 && hi <= lo) {
                        return Err(CliError::Config(format!(
                            "grid axis {name}: need points >= 1 and 0 <= min < max"
                        )));
                    }
                }
            }
            ExperimentKind::Quench => {
                let time = Self::require(&self.time, "time", kind)?;
                Self::forbid(&self.sweep, "sweep", kind)?;
                Self::forbid(&self.grid, "grid", kind)?;
                Self::forbid(&self.ramp, "ramp", kind)?;
                Self::forbid(&self.splitting, "splitting", kind)?;
                need_couplings(true)?;
                if time.samples < 64 {
                    return Err(CliError::Config(
                        "time.samples must be >= 64 (spectral analysis)".into(),
                    ));
                }
                if !(time.t_max > 0.0) {
                    return Err(CliError::Config("time.t-max must be positive".into()));
                }
            }
            ExperimentKind::Adiabatic => {
                let ramp = Self::require(&self.ramp, "ramp", kind)?;
                Self::forbid(&self.sweep, "sweep", kind)?;
                Self::forbid(&self.grid, "grid", kind)?;
                Self::forbid(&self.time, "time", kind)?;
                Self::forbid(&self.splitting, "splitting", kind)?;
                need_couplings(true)?;
                match ramp.scheme.as_str() {
                    "I" => {
                        if ramp.omega_initial.is_some() {
                            return Err(CliError::Config(
                                "ramp.omega-initial applies to scheme II only".into(),
                            ));
                        }
                    }
                    "II" => {
                        if ramp.omega_initial.is_none() {
                            return Err(CliError::Config(
                                "scheme II requires ramp.omega-initial".into(),
                            ));
                        }
                    }
                    other => {
                        return Err(CliError::Config(format!(
                            "ramp.scheme must be \"I\" or \"II\", got {other:?}"
                        )))
                    }
                }
                if let Some(sign) = &ramp.ghz_sign {
                    if sign != "+" && sign != "-" {
                        return Err(CliError::Config(format!(
                            "ramp.ghz-sign must be \"+\" or \"-\", got {sign:?}"
                        )));
                    }
                }
                if ramp.slices == 0 || !(ramp.t_f > 0.0) {
                    return Err(CliError::Config(
                        "ramp needs t-f > 0 and slices >= 1".into(),
                    ));
                }
            }
            ExperimentKind::SplittingScaling => {
                let sp = Self::require(&self.splitting, "splitting", kind)?;
                Self::forbid(&self.sweep, "sweep", kind)?;
                Self::forbid(&self.grid, "grid", kind)?;
                Self::forbid(&self.time, "time", kind)?;
                Self::forbid(&self.ramp, "ramp", kind)?;
                need_couplings(false)?;
                if sp.omega2_values.is_empty() || sp.omega2_values.iter().any(|&x| x <= 0.0) {
                    return Err(CliError::Config(
                        "splitting.omega2-values must be positive and non-empty".into(),
                    ));
                }
                if !(sp.g > 0.0) {
                    return Err(CliError::Config("splitting.g must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Apply one `dotted.path=value` override to the parsed TOML tree. The value
/// is parsed as a TOML scalar (fall back to a string).
fn apply_override(table: &mut toml::Table, spec: &str) -> CliResult<()> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| {
        CliError::Config(format!("override {spec:?} is not of the form key=value"))
    })?;
    let value = parse_scalar(raw.trim());
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!(
            "override key {path:?} is malformed"
        )));
    }
    let mut current = table;
    for key in &keys[..keys.len() - 1] {
        current = current
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                CliError::Config(format!("override path {path:?} crosses a non-table"))
            })?;
    }
    current.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

fn parse_scalar(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
