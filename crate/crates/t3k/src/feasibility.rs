//! SI-units experiment-design calculator: characteristic scales, the
//! maximum viable wall thickness against cavity decay, and a feasibility
//! verdict.
//!
//! All other modules work in natural units; SI quantities are confined
//! to this one. The single-photon Rabi frequency `Omega/2pi` is mapped
//! to the coupling as `g~0 = 2pi * value` (angular); this identification
//! carries a conventional factor-of-2 ambiguity noted in the report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{CavityProfile, Geometry, ModelParams};
use crate::selfenergy::{delta_e_closed, xi_length};

/// Reduced Planck constant, J s (CODATA 2018).
pub const HBAR_SI: f64 = 1.054_571_817e-34;

const TAU: f64 = std::f64::consts::TAU;

/// Margin over the cavity decay rate required for a positive verdict:
/// "significantly greater" is read as a factor of 10.
pub const DECAY_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaSign {
    Positive,
    Negative,
}

/// Laboratory parameters in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    /// Atom mass, kg.
    pub atom_mass_kg: f64,
    /// Single-photon Rabi frequency Omega/2pi, Hz.
    pub rabi_coupling_hz: f64,
    /// Two-level transition frequency |Delta|/2pi, Hz.
    pub transition_hz: f64,
    /// Cavity decay rate kappa/2pi, Hz.
    pub cavity_decay_hz: f64,
    /// Well width, m.
    pub ell_m: f64,
    /// Barrier thickness, m.
    pub d_m: f64,
    pub delta_sign: DeltaSign,
}

impl ExperimentParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("atom_mass_kg", self.atom_mass_kg),
            ("rabi_coupling_hz", self.rabi_coupling_hz),
            ("transition_hz", self.transition_hz),
            ("cavity_decay_hz", self.cavity_decay_hz),
            ("ell_m", self.ell_m),
            ("d_m", self.d_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config {
                    path: name.to_string(),
                    reason: format!("must be a positive finite number, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Coupling as an angular frequency, rad/s.
    pub fn g_tilde0(&self) -> f64 {
        TAU * self.rabi_coupling_hz
    }

    /// Detuning magnitude as an angular frequency, rad/s.
    pub fn delta_mag(&self) -> f64 {
        TAU * self.transition_hz
    }

    /// Cavity decay as an angular rate, rad/s.
    pub fn kappa(&self) -> f64 {
        TAU * self.cavity_decay_hz
    }

    fn model_params(&self) -> Result<ModelParams> {
        let signed_delta = match self.delta_sign {
            DeltaSign::Positive => self.delta_mag(),
            DeltaSign::Negative => -self.delta_mag(),
        };
        let geometry = Geometry::new(self.ell_m, self.d_m)?;
        let mut p = ModelParams {
            geometry,
            mass: self.atom_mass_kg,
            omega_internal_a: 0.0,
            omega_internal_b: 0.0,
            omega_cavity: 0.0,
            g0: self.g_tilde0(),
            cavity_profile: CavityProfile::Constant(1.0),
            hbar: HBAR_SI,
        };
        // place the detuning entirely in the internal-b level so that the
        // closed-form detuning equals the signed transition frequency
        p.omega_internal_b = signed_delta + p.omega_a1() - p.omega_cavity;
        p
            .validate()
            .map(|()| p)
    }
}

/// Machine-readable verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Non-locality length, m.
    pub xi_m: f64,
    /// Upper-bound splitting rate epsilon/hbar, rad/s.
    pub epsilon_over_hbar: f64,
    /// Same in ordinary frequency, Hz.
    pub epsilon_over_hbar_hz: f64,
    /// Closed-form splitting rate at the given (ell, d), rad/s;
    /// absent when the configuration sits on a pole.
    pub delta_e_over_hbar: Option<f64>,
    pub delta_e_over_hbar_hz: Option<f64>,
    /// Cavity decay, rad/s.
    pub kappa: f64,
    /// Ratio (delta E/hbar)/kappa; users may apply their own margin.
    pub delta_e_to_kappa: Option<f64>,
    /// Maximum viable barrier, m; non-positive means no thickness works.
    pub d_max_m: f64,
    pub feasible: bool,
    pub notes: Vec<String>,
}

/// `(xi, epsilon/hbar)` from the experiment parameters:
/// `xi = sqrt(hbar/(2 m |Delta|))`, `epsilon/hbar = 2 pi^2 g~0^2/|Delta| (xi/ell)^3`.
pub fn characteristic_scales(p: &ExperimentParams) -> Result<(f64, f64)> {
    p.validate()?;
    scales_in(HBAR_SI, p.atom_mass_kg, p.delta_mag(), p.g_tilde0(), p.ell_m)
}

/// Unit-system-agnostic core of `characteristic_scales`; all inputs in
/// one coherent unit system.
pub fn scales_in(hbar: f64, mass: f64, delta_mag: f64, g_tilde0: f64, ell: f64) -> Result<(f64, f64)> {
    let xi = xi_length(mass, delta_mag, hbar)?;
    let eps_over_hbar =
        2.0 * std::f64::consts::PI.powi(2) * g_tilde0 * g_tilde0 / delta_mag * (xi / ell).powi(3);
    Ok((xi, eps_over_hbar))
}

/// Maximum barrier thickness `xi * ln((epsilon/hbar)/kappa)`, signed;
/// non-positive means no viable thickness. `kappa = 0` reports an
/// unbounded (infinite) thickness.
pub fn max_wall_thickness(xi_m: f64, epsilon_over_hbar: f64, kappa: f64) -> Result<f64> {
    if !(xi_m > 0.0) {
        return Err(Error::InvalidParameter { name: "xi_m", reason: format!("must be > 0, got {xi_m}") });
    }
    if kappa < 0.0 || epsilon_over_hbar < 0.0 {
        return Err(Error::InvalidParameter { name: "kappa", reason: "rates must be >= 0".into() });
    }
    Ok(xi_m * (epsilon_over_hbar / kappa).ln())
}

/// Full verdict combining the scales, the thickness bound and the
/// closed-form splitting on the selected detuning branch.
pub fn feasibility_report(p: &ExperimentParams) -> Result<FeasibilityReport> {
    p.validate()?;
    let (xi_m, eps_over_hbar) = characteristic_scales(p)?;
    let kappa = p.kappa();
    let d_max_m = max_wall_thickness(xi_m, eps_over_hbar, kappa)?;
    let mut notes = Vec::new();
    notes.push(format!(
        "coupling convention: g~0 = 2pi * {:.6e} Hz taken as the angular single-photon Rabi frequency \
         (a factor-of-2 convention choice)",
        p.rabi_coupling_hz
    ));

    let model = p.model_params()?;
    let (delta_e_over_hbar, pole_note) = match delta_e_closed(&model) {
        Ok(cf) => {
            let note = cf.pole.filter(|pp| pp.is_warning()).map(|pp| {
                format!(
                    "resonance proximity: (2*ell+d)/xi = {:.9} is within {:.3e} of {}*pi; \
                     the splitting value is pole-dominated",
                    pp.argument, pp.distance, pp.nearest_k
                )
            });
            (Some(cf.value / HBAR_SI), note)
        }
        Err(Error::Pole { argument, distance, k }) => (
            None,
            Some(format!(
                "resonance proximity: (2*ell+d)/xi = {argument:.9} lies within {distance:.3e} of {k}*pi; \
                 no finite splitting on this branch"
            )),
        ),
        Err(e) => return Err(e),
    };
    if let Some(n) = pole_note {
        notes.push(n);
    }
    if p.delta_sign == DeltaSign::Negative {
        notes.push("negative detuning: the splitting oscillates with d instead of decaying exponentially".into());
    }

    let delta_e_to_kappa = delta_e_over_hbar.map(|r| r.abs() / kappa);
    let rate_ok = delta_e_to_kappa.is_some_and(|r| r >= DECAY_MARGIN);
    let thickness_ok = d_max_m > 0.0 && p.d_m < d_max_m;
    let feasible = rate_ok && thickness_ok;
    match delta_e_to_kappa {
        Some(r) if rate_ok => notes.push(format!(
            "splitting rate exceeds the cavity decay rate by {r:.3}x (margin required: {DECAY_MARGIN}x)"
        )),
        Some(r) => notes.push(format!(
            "splitting rate is only {r:.3}x the cavity decay rate; tunnelling would be overdamped \
             (margin required: {DECAY_MARGIN}x)"
        )),
        None => notes.push("no finite splitting value; verdict is infeasible".into()),
    }
    if !thickness_ok {
        if d_max_m <= 0.0 {
            notes.push(format!(
                "no viable wall thickness: epsilon/hbar = {eps_over_hbar:.3e} rad/s does not exceed \
                 kappa = {kappa:.3e} rad/s"
            ));
        } else {
            notes.push(format!("barrier d = {:.3e} m exceeds the bound d_max = {d_max_m:.3e} m", p.d_m));
        }
    }

    Ok(FeasibilityReport {
        xi_m,
        epsilon_over_hbar: eps_over_hbar,
        epsilon_over_hbar_hz: eps_over_hbar / TAU,
        delta_e_over_hbar,
        delta_e_over_hbar_hz: delta_e_over_hbar.map(|v| v / TAU),
        kappa,
        delta_e_to_kappa,
        d_max_m,
        feasible,
        notes,
    })
}
