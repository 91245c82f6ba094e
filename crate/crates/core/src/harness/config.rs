use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SqueezedParams;
use crate::qcore::FockSpace;
use crate::spectrum::{
    default_scan, find_avoided_crossing_for, resonance_frequency_analytic, resonance_frequency_subspace, RabiModel,
};

/// Experiments known to the harness.
pub const EXPERIMENTS: [&str; 7] = ["fig1", "fig3", "fig4", "fig5", "fig6", "fig7", "custom"];

const PRESETS: [(&str, &str); 6] = [
    ("fig1", include_str!("../../presets/fig1.toml")),
    ("fig3", include_str!("../../presets/fig3.toml")),
    ("fig4", include_str!("../../presets/fig4.toml")),
    ("fig5", include_str!("../../presets/fig5.toml")),
    ("fig6", include_str!("../../presets/fig6.toml")),
    ("fig7", include_str!("../../presets/fig7.toml")),
];

/// Names of the packaged presets.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Raw TOML text of a packaged preset.
pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::Usage(format!("unknown experiment {name:?}; expected one of {}", preset_names().join(", "))))
}

/// How a resonance frequency is obtained.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonanceMode {
    /// Second-order closed form.
    #[serde(alias = "auto-resonance")]
    Analytic,
    /// Exact root of the effective two-level diagonal condition.
    Subspace,
    /// Minimum of the numerical avoided crossing.
    Numeric,
}

/// Cavity frequency: a number or a resonance rule.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaC {
    Value(f64),
    Mode(ResonanceMode),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Crossing,
    Rabi,
    Splitting,
    Periods,
    Sweep,
    Lindblad,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default = "one")]
    pub omega_q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<OmegaC>,
    #[serde(default = "anisotropic")]
    pub model: RabiModel,
}

impl Default for Physics {
    fn default() -> Self {
        Self { g: None, r: None, omega_q: 1.0, omega_c: None, model: RabiModel::Anisotropic }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Target number of stored rows for time-dependent runs.
    #[serde(default = "default_rows")]
    pub rows: usize,
    /// Static runs: length in units of `π/|Ω_eff|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Static runs: spacing of the written time series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
    #[serde(default = "default_wigner_points")]
    pub wigner_points: usize,
    #[serde(default = "default_wigner_half_width")]
    pub wigner_half_width: f64,
    /// Skip the convergence re-runs.
    #[serde(default)]
    pub fast: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n_max: default_n_max(),
            dt: None,
            rows: default_rows(),
            duration: None,
            sample_dt: None,
            wigner_points: default_wigner_points(),
            wigner_half_width: default_wigner_half_width(),
            fast: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scan {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_values: Option<Vec<f64>>,
    /// `[first, last, count]`, evenly spaced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_range: Option<(f64, f64, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_range: Option<(f64, f64, usize)>,
    /// Cavity-frequency interval searched for avoided crossings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c_window: Option<(f64, f64)>,
    /// Squeezing of the time-domain period cross-check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_r: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// `ω_c(0) = ω_c* − detuning · ω_q`.
    #[serde(default = "default_detuning")]
    pub detuning: f64,
    /// `v = rate_factor · Ω_eff²`.
    #[serde(default = "default_rate_factor")]
    pub rate_factor: f64,
    /// Where the sweep halts.
    #[serde(default = "numeric")]
    pub stop: ResonanceMode,
    /// Continue past the stop point by this many `ω_q` (exploratory only).
    #[serde(default)]
    pub overshoot: f64,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            detuning: default_detuning(),
            rate_factor: default_rate_factor(),
            stop: ResonanceMode::Numeric,
            overshoot: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipativeSet {
    pub label: String,
    pub kappa: f64,
    pub gamma: f64,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dissipation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<DissipativeSet>,
    /// Also run the first set with `κ = γ = 0`.
    #[serde(default)]
    pub include_control: bool,
    /// Also run the first set with `κ` multiplied by this factor (0 disables).
    #[serde(default)]
    pub kappa_scale: f64,
}

impl Default for Dissipation {
    fn default() -> Self {
        Self { kappa: None, gamma: None, sets: Vec::new(), include_control: false, kappa_scale: 0.0 }
    }
}

/// One experiment, as read from a config document or a preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<Operation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Reserved; the pipeline is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub scan: Scan,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub dissipation: Dissipation,
}

/// Command-line overrides applied on top of a config.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub n_max: Option<usize>,
    pub dt: Option<f64>,
    pub fast: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::from_toml(preset_source(name)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.output = Some(out.clone());
        }
        if let Some(n) = o.n_max {
            self.numerics.n_max = n;
        }
        if let Some(dt) = o.dt {
            self.numerics.dt = Some(dt);
        }
        if o.fast {
            self.numerics.fast = true;
        }
    }

    /// Checks everything that can be checked without running the physics.
    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(Error::Usage(format!(
                "unknown experiment {:?}; expected one of {}",
                self.experiment,
                EXPERIMENTS.join(", ")
            )));
        }
        if self.experiment == "custom" && self.operation.is_none() {
            return Err(missing("operation"));
        }
        FockSpace::new(self.numerics.n_max)?;
        let p = &self.physics;
        positive("physics.omega_q", p.omega_q)?;
        if let Some(g) = p.g {
            positive("physics.g", g)?;
        }
        if let Some(r) = p.r {
            if !r.is_finite() || r.abs() > 3.0 {
                return Err(Error::Config(format!("physics.r = {r} outside [-3, 3]")));
            }
        }
        if let Some(OmegaC::Value(w)) = p.omega_c {
            positive("physics.omega_c", w)?;
        }
        if let Some(dt) = self.numerics.dt {
            positive("numerics.dt", dt)?;
        }
        if self.numerics.rows == 0 {
            return Err(Error::Config("numerics.rows must be positive".into()));
        }
        if self.numerics.wigner_points < 2 {
            return Err(Error::Config("numerics.wigner_points must be at least 2".into()));
        }
        positive("numerics.wigner_half_width", self.numerics.wigner_half_width)?;
        positive("sweep.rate_factor", self.sweep.rate_factor)?;
        positive("sweep.detuning", self.sweep.detuning)?;
        if self.sweep.overshoot < 0.0 {
            return Err(Error::Config("sweep.overshoot must be non-negative".into()));
        }
        for s in &self.dissipation.sets {
            crate::dynamics::DissipationParams::new(s.kappa, s.gamma)?;
        }
        if let Some(k) = self.dissipation.kappa {
            crate::dynamics::DissipationParams::new(k, 0.0)?;
        }
        if let Some(gm) = self.dissipation.gamma {
            crate::dynamics::DissipationParams::new(0.0, gm)?;
        }
        if let Some(v) = &self.scan.g_values {
            check_list("scan.g_values", v)?;
        }
        if let Some(v) = &self.scan.r_values {
            check_list("scan.r_values", v)?;
        }
        for (name, range) in [("scan.g_range", self.scan.g_range), ("scan.r_range", self.scan.r_range)] {
            if let Some((a, b, n)) = range {
                if n == 0 || !(b >= a) {
                    return Err(Error::Config(format!("{name} must be [first, last, count] with last >= first")));
                }
            }
        }
        Ok(())
    }

    pub fn space(&self) -> Result<FockSpace> {
        FockSpace::new(self.numerics.n_max)
    }

    pub fn g(&self) -> Result<f64> {
        self.physics.g.ok_or_else(|| missing("physics.g"))
    }

    pub fn r(&self) -> Result<f64> {
        self.physics.r.ok_or_else(|| missing("physics.r"))
    }

    pub fn g_values(&self) -> Result<Vec<f64>> {
        list(&self.scan.g_values, self.scan.g_range, "scan.g_values")
    }

    pub fn r_values(&self) -> Result<Vec<f64>> {
        list(&self.scan.r_values, self.scan.r_range, "scan.r_values")
    }

    pub fn omega_c_window(&self) -> (f64, f64) {
        self.scan.omega_c_window.unwrap_or_else(|| default_scan(self.physics.omega_q))
    }

    /// Resolves `physics.omega_c` for the given `g`, `r` (default: subspace root).
    pub fn resolve_omega_c(&self, g: f64, r: f64, space: FockSpace) -> Result<f64> {
        let mode = self.physics.omega_c.unwrap_or(OmegaC::Mode(ResonanceMode::Subspace));
        resolve(mode, self.physics.model, g, r, self.physics.omega_q, self.omega_c_window(), space)
    }
}

/// Evaluates a cavity-frequency rule.
pub fn resolve(
    rule: OmegaC,
    model: RabiModel,
    g: f64,
    r: f64,
    omega_q: f64,
    window: (f64, f64),
    space: FockSpace,
) -> Result<f64> {
    Ok(match rule {
        OmegaC::Value(w) => w,
        OmegaC::Mode(ResonanceMode::Analytic) => resonance_frequency_analytic(g, r, omega_q),
        OmegaC::Mode(ResonanceMode::Subspace) => resonance_frequency_subspace(g, r, omega_q),
        OmegaC::Mode(ResonanceMode::Numeric) => {
            let tmpl = SqueezedParams::new(g, r, window.0, omega_q);
            find_avoided_crossing_for(model, &tmpl, window, space)?.omega_c_star
        }
    })
}

pub(crate) fn missing(field: &str) -> Error {
    Error::Config(format!("missing required field `{field}`"))
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Config(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

fn check_list(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("{name} is empty")));
    }
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(format!("{name} must be strictly ascending")));
    }
    Ok(())
}

fn list(values: &Option<Vec<f64>>, range: Option<(f64, f64, usize)>, name: &str) -> Result<Vec<f64>> {
    if let Some(v) = values {
        return Ok(v.clone());
    }
    match range {
        Some((a, _, 1)) => Ok(vec![a]),
        Some((a, b, n)) => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
        None => Err(missing(name)),
    }
}

fn one() -> f64 {
    1.0
}
fn anisotropic() -> RabiModel {
    RabiModel::Anisotropic
}
fn default_n_max() -> usize {
    40
}
fn default_rows() -> usize {
    2000
}
fn default_wigner_points() -> usize {
    81
}
fn default_wigner_half_width() -> f64 {
    7.0
}
fn default_detuning() -> f64 {
    0.01
}
fn default_rate_factor() -> f64 {
    0.05
}
fn numeric() -> ResonanceMode {
    ResonanceMode::Numeric
}
