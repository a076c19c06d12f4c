//! TOML run configuration with explicit unit tags on every physical
//! quantity, strict unknown-key rejection, and a canonical echo used as
//! the provenance header of every output artifact.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::feasibility::{DeltaSign, ExperimentParams};
use crate::hamiltonian::Truncation;
use crate::modes::{CavityProfile, Geometry, ModelParams};

fn split_quantity(s: &str) -> std::result::Result<(f64, &str), String> {
    let mut it = s.split_whitespace();
    let value = it.next().ok_or_else(|| "empty quantity".to_string())?;
    let unit = it.next().ok_or_else(|| format!("`{s}` is missing a unit tag (write e.g. `1.0 natural`)"))?;
    if it.next().is_some() {
        return Err(format!("`{s}` has trailing tokens; expected `<value> <unit>`"));
    }
    let v: f64 = value.parse().map_err(|e| format!("`{value}`: {e}"))?;
    Ok((v, unit))
}

macro_rules! quantity {
    ($name:ident, $base:literal, [$(($unit:literal, $scale:expr)),+]) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub f64);

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                let (v, unit) = split_quantity(s)?;
                match unit {
                    $($unit => Ok($name(v * $scale)),)+
                    other => Err(format!(
                        "unknown unit `{other}` (expected one of: {})",
                        [$($unit),+].join(", ")
                    )),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} {}", self.0, $base)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(de::Error::custom)
            }
        }
    };
}

quantity!(Nat, "natural", [("natural", 1.0)]);
quantity!(Freq, "Hz", [("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)]);
quantity!(Len, "m", [("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("nm", 1e-9), ("pm", 1e-12)]);
quantity!(Mass, "kg", [("kg", 1.0), ("u", 1.660_539_066_60e-27)]);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub ell: Nat,
    pub d: Nat,
    pub mass: Nat,
    pub g0: Nat,
    #[serde(default = "nat_zero")]
    pub omega_a: Nat,
    #[serde(default = "nat_zero")]
    pub omega_b: Nat,
    /// Closed-form detuning; give either this or `omega_c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Nat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<Nat>,
    #[serde(default = "nat_one")]
    pub profile_constant: Nat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_values: Option<Vec<f64>>,
    #[serde(default = "nat_one")]
    pub hbar: Nat,
}

fn nat_zero() -> Nat {
    Nat(0.0)
}

fn nat_one() -> Nat {
    Nat(1.0)
}

impl ModelConfig {
    pub fn to_model_params(&self) -> Result<ModelParams> {
        for (key, v) in [("model.ell", self.ell.0), ("model.d", self.d.0), ("model.mass", self.mass.0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(key, format!("must be a positive finite number, got {v}")));
            }
        }
        if !(self.g0.0 >= 0.0) {
            return Err(Error::config("model.g0", format!("must be >= 0, got {}", self.g0.0)));
        }
        if !(self.hbar.0 > 0.0) {
            return Err(Error::config("model.hbar", format!("must be > 0, got {}", self.hbar.0)));
        }
        let geometry = Geometry::new(self.ell.0, self.d.0)
            .map_err(|e| Error::config("model", e.to_string()))?;
        let cavity_profile = match (&self.profile_x, &self.profile_values) {
            (None, None) => CavityProfile::Constant(self.profile_constant.0),
            (Some(x), Some(values)) => {
                if x.len() != values.len() || x.len() < 2 {
                    return Err(Error::config(
                        "model.profile_x",
                        "profile_x and profile_values need equal lengths >= 2",
                    ));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::config("model.profile_x", "must be strictly increasing"));
                }
                CavityProfile::Sampled { x: x.clone(), values: values.clone() }
            }
            _ => {
                return Err(Error::config(
                    "model.profile_x",
                    "give both profile_x and profile_values, or neither",
                ))
            }
        };
        let mut params = ModelParams {
            geometry,
            mass: self.mass.0,
            omega_internal_a: self.omega_a.0,
            omega_internal_b: self.omega_b.0,
            omega_cavity: 0.0,
            g0: self.g0.0,
            cavity_profile,
            hbar: self.hbar.0,
        };
        params.omega_cavity = match (self.delta, self.omega_c) {
            (Some(delta), None) => delta.0 + params.omega_a1() - params.omega_internal_b,
            (None, Some(omega_c)) => omega_c.0,
            (Some(_), Some(_)) => {
                return Err(Error::config("model.delta", "give either delta or omega_c, not both"))
            }
            (None, None) => return Err(Error::config("model.delta", "one of delta or omega_c is required")),
        };
        params.validate().map_err(|e| Error::config("model", e.to_string()))?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationConfig {
    pub j_max: u32,
    pub n_max: u32,
    pub parity_reduced: bool,
    pub rwa: bool,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig { j_max: 64, n_max: 3, parity_reduced: true, rwa: false }
    }
}

impl TruncationConfig {
    pub fn to_truncation(&self) -> Result<Truncation> {
        Truncation::new(self.j_max, self.n_max, self.parity_reduced)
            .map_err(|e| Error::config("truncation.j_max", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    /// End of the sampled interval; omit to span one slow half-period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<Nat>,
    pub n_samples: usize,
    /// Initial basis state, e.g. `a,L,0` or `b,2,1`.
    pub initial: String,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig { t_max: None, n_samples: 1000, initial: "a,L,0".to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeltaEConfig {
    pub tol: f64,
}

impl Default for DeltaEConfig {
    fn default() -> Self {
        DeltaEConfig { tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub n_points: usize,
    pub j_max: u32,
    /// End time of the emitted two-mode series; omit for one full period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_mode_t_max: Option<Nat>,
    pub two_mode_samples: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { n_points: 2401, j_max: 40, two_mode_t_max: None, two_mode_samples: 400 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    D,
    Ell,
    Delta,
    G0,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SweepAxis::D => "d",
            SweepAxis::Ell => "ell",
            SweepAxis::Delta => "delta",
            SweepAxis::G0 => "g0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepObservable {
    /// Series and closed-form splitting per point.
    DeltaE,
    /// Splitting extracted from the truncated spectrum.
    Splitting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub start: Nat,
    pub stop: Nat,
    pub points: usize,
    #[serde(default = "default_observable")]
    pub observable: SweepObservable,
}

fn default_observable() -> SweepObservable {
    SweepObservable::DeltaE
}

impl SweepConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::config("sweep.points", "must be >= 1"));
        }
        if self.points == 1 {
            return Ok(vec![self.start.0]);
        }
        let step = (self.stop.0 - self.start.0) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.start.0 + i as f64 * step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityConfig {
    pub atom_mass: Mass,
    pub rabi_coupling: Freq,
    pub transition: Freq,
    pub cavity_decay: Freq,
    pub ell: Len,
    pub d: Len,
    pub delta_sign: DeltaSign,
}

impl FeasibilityConfig {
    pub fn to_experiment_params(&self) -> ExperimentParams {
        ExperimentParams {
            atom_mass_kg: self.atom_mass.0,
            rabi_coupling_hz: self.rabi_coupling.0,
            transition_hz: self.transition.0,
            cavity_decay_hz: self.cavity_decay.0,
            ell_m: self.ell.0,
            d_m: self.d.0,
            delta_sign: self.delta_sign,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Output directory; the `T3K_OUT_DIR` environment variable and the
    /// `--out-dir` flag take precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

impl OutputConfig {
    pub fn prefix(&self) -> &str {
        self.prefix.as_deref().unwrap_or("t3k")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub delta_e: DeltaEConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilityConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Model parameters; errors when the `[model]` block is absent.
    pub fn model_params(&self) -> Result<ModelParams> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::config("model", "a [model] block is required for this subcommand"))?
            .to_model_params()
    }

    /// Canonical echo with all materialized defaults; reparses to an
    /// identical `RunConfig`.
    pub fn echo_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }
}

/// Parse and validate a config document. `origin` names the source in
/// diagnostics.
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text)
        .map_err(|e| Error::config(origin, e.message().to_string()))?;
    // surface value-range errors at parse time with key diagnostics
    if let Some(model) = &cfg.model {
        model.to_model_params()?;
    }
    cfg.truncation.to_truncation()?;
    if let Some(sweep) = &cfg.sweep {
        sweep.values()?;
    }
    if let Some(f) = &cfg.feasibility {
        f.to_experiment_params().validate()?;
    }
    if !(cfg.delta_e.tol > 0.0) {
        return Err(Error::config("delta_e.tol", format!("must be > 0, got {}", cfg.delta_e.tol)));
    }
    Ok(cfg)
}
