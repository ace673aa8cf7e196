//! Declarative experiment description, read from TOML.
//!
//! Powers are given in dBm and converted to watts here; everything downstream
//! works in linear units. Every field has a default taken from the reference
//! scenario, so a config only needs `family` and `sweep`.

use std::path::{Path, PathBuf};

use ris_secrecy::channel::{dbm_to_watt, PathLossExponents};
use ris_secrecy::circuit::{fit_ris_params, CircuitParams, FIT_SAMPLES};
use ris_secrecy::{CpdmOptions, Geometry, PathLossModel, PgmOptions, RisParams, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RateVsPower,
    #[serde(rename = "rate_vs_M")]
    RateVsM,
    #[serde(rename = "rate_vs_R")]
    RateVsR,
    #[serde(rename = "runtime_vs_M")]
    RuntimeVsM,
    ConvergenceTrace,
    StepsizeCompare,
    #[serde(rename = "cpdm_vs_M")]
    CpdmVsM,
    CpdmRuntime,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::RateVsPower => "rate_vs_power",
            Family::RateVsM => "rate_vs_M",
            Family::RateVsR => "rate_vs_R",
            Family::RuntimeVsM => "runtime_vs_M",
            Family::ConvergenceTrace => "convergence_trace",
            Family::StepsizeCompare => "stepsize_compare",
            Family::CpdmVsM => "cpdm_vs_M",
            Family::CpdmRuntime => "cpdm_runtime",
        }
    }

    /// What the sweep values mean.
    pub fn x_label(self) -> &'static str {
        match self {
            Family::RateVsPower => "transmit power (dBm)",
            Family::RateVsR => "element resistance (ohm)",
            Family::ConvergenceTrace => "outer iteration",
            _ => "RIS elements M",
        }
    }

    pub fn is_runtime(self) -> bool {
        matches!(self, Family::RuntimeVsM | Family::CpdmRuntime)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PracticalPgm,
    IdealPgm,
    RandomRis,
    NoRis,
    Cpdm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PracticalPgm => "practical_pgm",
            Method::IdealPgm => "ideal_pgm",
            Method::RandomRis => "random_ris",
            Method::NoRis => "no_ris",
            Method::Cpdm => "cpdm",
        }
    }
}

/// Step-size rule of one `stepsize_compare` series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepVariant {
    /// `"adaptive"`
    Named(AdaptiveTag),
    /// Fixed step used for both blocks.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptiveTag {
    Adaptive,
}

impl StepVariant {
    pub fn label(&self) -> String {
        match self {
            StepVariant::Named(AdaptiveTag::Adaptive) => "pgm_adaptive".into(),
            StepVariant::Fixed(v) => format!("pgm_fixed_{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub na: usize,
    pub nb: usize,
    pub ne: usize,
    pub ns: usize,
    pub m: usize,
    pub power_dbm: f64,
    pub sigma2_b_dbm: f64,
    pub sigma2_e_dbm: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            na: 4,
            nb: 4,
            ne: 4,
            ns: 4,
            m: 50,
            power_dbm: 30.0,
            sigma2_b_dbm: -110.0,
            sigma2_e_dbm: -110.0,
        }
    }
}

impl SystemSection {
    pub fn to_config(&self, seed: u64) -> SystemConfig {
        SystemConfig {
            na: self.na,
            nb: self.nb,
            ne: self.ne,
            ns: self.ns,
            m: self.m,
            power: dbm_to_watt(self.power_dbm),
            sigma2_b: dbm_to_watt(self.sigma2_b_dbm),
            sigma2_e: dbm_to_watt(self.sigma2_e_dbm),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RisSection {
    /// Element resistance of the practical model, ohm.
    pub resistance: f64,
    pub fit_samples: usize,
    /// Circuit the amplitude law is fitted to.
    pub circuit: CircuitParams,
    /// Use these constants for the practical model instead of fitting.
    pub params: Option<RisParams>,
}

impl Default for RisSection {
    fn default() -> Self {
        Self {
            resistance: 2.0,
            circuit: CircuitParams::reference(2.0),
            params: None,
            fit_samples: FIT_SAMPLES,
        }
    }
}

impl RisSection {
    /// Fitted (or given) constants at resistance `r`.
    pub fn params_at(&self, r: f64) -> Result<RisParams, BenchError> {
        if let Some(p) = self.params {
            if r == self.resistance {
                return Ok(p);
            }
        }
        let fit = fit_ris_params(&self.circuit.with_resistance(r), self.fit_samples)?;
        Ok(fit.params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    /// Values of the swept quantity; their meaning depends on `family`.
    pub sweep: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub n_seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Series of the `stepsize_compare` family.
    #[serde(default = "default_step_variants")]
    pub step_variants: Vec<StepVariant>,
    /// Timing repeats per cell for the runtime families; the median is kept.
    #[serde(default = "default_repeats")]
    pub timing_repeats: usize,
    #[serde(default = "default_out")]
    pub output: PathBuf,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default = "Geometry::reference")]
    pub geometry: Geometry,
    #[serde(default = "PathLossModel::reference")]
    pub path_loss: PathLossModel,
    #[serde(default)]
    pub ris: RisSection,
    #[serde(default)]
    pub pgm: PgmOptions,
    #[serde(default)]
    pub cpdm: CpdmOptions,
}

fn default_seeds() -> usize {
    50
}

fn default_methods() -> Vec<Method> {
    vec![Method::PracticalPgm, Method::IdealPgm, Method::RandomRis, Method::NoRis]
}

fn default_step_variants() -> Vec<StepVariant> {
    vec![
        StepVariant::Named(AdaptiveTag::Adaptive),
        StepVariant::Fixed(0.1),
        StepVariant::Fixed(0.01),
        StepVariant::Fixed(0.001),
    ]
}

fn default_repeats() -> usize {
    3
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let cfg: Self = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let err = |m: String| Err(BenchError::Config(m));
        if self.sweep.is_empty() {
            return err("sweep must not be empty".into());
        }
        if self.sweep.iter().any(|v| !v.is_finite()) || self.sweep.windows(2).any(|w| w[0] >= w[1]) {
            return err("sweep values must be finite and strictly increasing".into());
        }
        if self.n_seeds == 0 {
            return err("n_seeds must be at least 1".into());
        }
        if self.timing_repeats == 0 {
            return err("timing_repeats must be at least 1".into());
        }
        if self.family == Family::StepsizeCompare {
            if self.step_variants.is_empty() {
                return err("stepsize_compare needs at least one step variant".into());
            }
            if self.step_variants.iter().any(|v| matches!(v, StepVariant::Fixed(s) if !(*s > 0.0))) {
                return err("fixed step sizes must be positive".into());
            }
        } else if self.methods.is_empty() {
            return err("method list must not be empty".into());
        }
        if self.family == Family::ConvergenceTrace
            && self.methods.iter().any(|m| !matches!(m, Method::PracticalPgm | Method::Cpdm))
        {
            return err("convergence_trace supports the practical_pgm and cpdm methods only".into());
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return err("method list has duplicates".into());
        }
        let counts = matches!(
            self.family,
            Family::RateVsM | Family::RuntimeVsM | Family::StepsizeCompare | Family::CpdmVsM | Family::CpdmRuntime
        );
        let integral = counts || self.family == Family::ConvergenceTrace;
        if integral && self.sweep.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return err(format!("{} sweeps take non-negative integers", self.family.name()));
        }
        if counts && self.sweep[0] < 1.0 {
            return err("M must be at least 1".into());
        }
        if self.family == Family::RateVsR && self.sweep[0] < 0.0 {
            return err("resistance must be non-negative".into());
        }
        self.system.to_config(0).validate()?;
        self.geometry.validate()?;
        self.path_loss.validate()?;
        self.ris.circuit.validate()?;
        if let Some(p) = self.ris.params {
            p.validate()?;
        }
        Ok(())
    }
}

/// Exponents in the order `ar, rb, re, ab, ae`, for display.
pub fn exponents(p: &PathLossExponents) -> [f64; 5] {
    [p.ar, p.rb, p.re, p.ab, p.ae]
}
