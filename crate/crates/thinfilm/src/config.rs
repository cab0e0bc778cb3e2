//! Run configuration: strict JSON schema, resolution into solver inputs, and
//! the nondimensionalization helper.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{young_angle, InterfaceEnergies};
use crate::error::{Error, Result};
use crate::evolution::{Geometry, Scheme, StepperConfig};
use crate::solid::SolidProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Periodic,
    Halfline,
}

/// Contact angle: a number, or the string "young" to derive it from the
/// interface energies and the solid slope at the reference contact point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ContactAngle {
    Value(f64),
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Energies {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// The analytic steady state (periodic) or the compatible exponential
    /// matching profile (half-line).
    Steady,
    /// Steady state plus `eps` times a smooth volume-neutral mode;
    /// `mode_shape = None` draws seeded random mode amplitudes.
    SteadyPlusPerturbation {
        eps: f64,
        #[serde(default)]
        mode_shape: Option<usize>,
    },
    /// Load the initial state from a snapshot file.
    ExplicitSamples { path: String },
}

fn default_scheme() -> String {
    "bdf1".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSettings {
    pub dt: f64,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default)]
    pub newton_tol: Option<f64>,
    #[serde(default)]
    pub newton_maxit: Option<usize>,
    #[serde(default)]
    pub dt_min: Option<f64>,
    #[serde(default)]
    pub dt_max: Option<f64>,
}

impl StepperSettings {
    pub fn build(&self) -> Result<StepperConfig<f64>> {
        let mut cfg = StepperConfig::with_dt(self.dt);
        cfg.scheme = match self.scheme.as_str() {
            "bdf1" => Scheme::Bdf1,
            "bdf2" => Scheme::Bdf2,
            other => {
                return Err(Error::Parse(format!(
                    "unknown scheme {other:?}; expected \"bdf1\" or \"bdf2\""
                )))
            }
        };
        if let Some(v) = self.newton_tol {
            cfg.newton_tol = v;
        }
        if let Some(v) = self.newton_maxit {
            cfg.newton_maxit = v;
        }
        if let Some(v) = self.dt_min {
            cfg.dt_min = v;
        }
        if let Some(v) = self.dt_max {
            cfg.dt_max = v;
        }
        if !(cfg.dt_min <= cfg.dt && cfg.dt <= cfg.dt_max) || !(cfg.newton_tol > 0.0) {
            return Err(Error::Parse(
                "stepper requires dt_min <= dt <= dt_max and newton_tol > 0".into(),
            ));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub profile: SolidProfile<f64>,
    pub k: ContactAngle,
    pub energies: Energies,
    /// Symmetry point (periodic mode).
    #[serde(default)]
    pub l: Option<f64>,
    /// Reference/equilibrium contact point (periodic mode).
    #[serde(default)]
    pub lambda_bar: Option<f64>,
    /// Truncation length (half-line mode).
    #[serde(default)]
    pub x_max: Option<f64>,
    /// Far-field film height (half-line mode).
    #[serde(default)]
    pub far_height: Option<f64>,
    /// Initial contact point; defaults to lambda_bar in periodic mode.
    #[serde(default)]
    pub lambda0: Option<f64>,
    pub grid_n: usize,
    pub t_end: f64,
    pub initial: InitialSpec,
    pub stepper: StepperSettings,
    #[serde(default)]
    pub seed: u64,
}

/// Everything the CLI needs to construct a solver.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub geometry: Geometry<f64>,
    pub k: f64,
    pub energies: InterfaceEnergies<f64>,
    pub lambda0: f64,
    pub stepper: StepperConfig<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.grid_n < 7 {
            return Err(Error::Parse(format!(
                "grid_n = {} too small (need >= 7)",
                self.grid_n
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Parse("t_end must be positive".into()));
        }
        if let InitialSpec::SteadyPlusPerturbation { eps, .. } = self.initial {
            if !(eps.abs() < 0.1) {
                return Err(Error::Parse(format!(
                    "perturbation eps = {eps} outside the small-perturbation regime (|eps| < 0.1)"
                )));
            }
        }
        match self.mode {
            Mode::Periodic => {
                if self.l.is_none() || self.lambda_bar.is_none() {
                    return Err(Error::Parse(
                        "periodic mode requires `l` and `lambda_bar`".into(),
                    ));
                }
            }
            Mode::Halfline => {
                if self.x_max.is_none() || self.lambda0.is_none() {
                    return Err(Error::Parse(
                        "halfline mode requires `x_max` and `lambda0`".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let energies = InterfaceEnergies::new(self.energies.a, self.energies.b, self.energies.c)?;
        let (geometry, lambda0) = match self.mode {
            Mode::Periodic => {
                let l = self.l.unwrap();
                let lambda_bar = self.lambda_bar.unwrap();
                (
                    Geometry::Periodic { l, lambda_bar },
                    self.lambda0.unwrap_or(lambda_bar),
                )
            }
            Mode::Halfline => (
                Geometry::HalfLine {
                    x_max: self.x_max.unwrap(),
                    far_height: self.far_height.unwrap_or(1.0),
                },
                self.lambda0.unwrap(),
            ),
        };
        let k = match &self.k {
            ContactAngle::Value(v) => {
                if *v < 0.0 {
                    return Err(Error::Parse("contact angle k must be >= 0".into()));
                }
                *v
            }
            ContactAngle::Named(name) if name == "young" => {
                let gx = self.profile.eval_g_derivs(lambda0, 0.0)?.gx;
                young_angle(&energies, gx)?
            }
            ContactAngle::Named(other) => {
                return Err(Error::Parse(format!(
                    "contact angle must be a number or \"young\" (got {other:?})"
                )))
            }
        };
        Ok(ResolvedRun {
            geometry,
            k,
            energies,
            lambda0,
            stepper: self.stepper.build()?,
        })
    }
}

/// Physical inputs to the scaling relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Film thickness (m).
    pub h: f64,
    /// Surface tension (scaled, order one).
    pub sigma: f64,
    /// Liquid viscosity.
    pub mu_l: f64,
    /// Physical angle deficit (rad).
    pub theta: f64,
    /// Physical slip coefficient.
    pub beta_phys: f64,
    /// Solid time scale.
    pub t0: f64,
}

/// Output of the scaling relations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondimResult {
    pub k: f64,
    pub beta_bar: f64,
    pub time_scale: f64,
    pub length_scale: f64,
    /// Non-fatal validity note when k exceeds 1.
    pub warning: Option<String>,
}

/// Scaling relations: `k = theta/epsilon`, `length = H/epsilon`,
/// `beta_bar = epsilon * length / mu_l * beta_phys`,
/// `time = length * mu_l / sigma`.
pub fn nondimensionalize(p: &PhysicalParams, epsilon: f64) -> Result<NondimResult> {
    if !(epsilon > 0.0 && epsilon < 0.3) {
        return Err(Error::Parse(format!(
            "epsilon = {epsilon} outside the lubrication range (0, 0.3)"
        )));
    }
    if [p.h, p.sigma, p.mu_l, p.theta, p.t0].iter().any(|&v| !(v > 0.0)) || p.beta_phys < 0.0 {
        return Err(Error::Parse(
            "physical parameters must be positive (beta_phys may be zero)".into(),
        ));
    }
    let k = p.theta / epsilon;
    let length_scale = p.h / epsilon;
    let beta_bar = epsilon * length_scale / p.mu_l * p.beta_phys;
    let time_scale = length_scale * p.mu_l / p.sigma;
    let warning = if k > 1.0 {
        Some(format!(
            "k = {k} exceeds 1: the angle is not small relative to epsilon; lubrication regime questionable"
        ))
    } else {
        None
    };
    Ok(NondimResult {
        k,
        beta_bar,
        time_scale,
        length_scale,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn minimal_periodic_json() -> String {
        r#"{
            "mode": "periodic",
            "profile": {"kind": "stationary", "shape": [0.9, 0.2]},
            "k": 0.1,
            "energies": {"a": 0.0, "b": 1.0, "c": 0.0},
            "l": 2.0,
            "lambda_bar": 0.5,
            "grid_n": 101,
            "t_end": 0.01,
            "initial": {"type": "steady"},
            "stepper": {"dt": 1e-4}
        }"#
        .to_string()
    }

    #[test]
    fn parse_roundtrip() {
        let cfg = RunConfig::parse(&minimal_periodic_json()).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let cfg2 = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, cfg2);
        let r = cfg.resolve().unwrap();
        assert_eq!(r.k, 0.1);
        assert_eq!(r.lambda0, 0.5);
    }

    #[test]
    fn unknown_key_rejected_by_name() {
        let bad = minimal_periodic_json().replace("\"l\": 2.0,", "\"l\": 2.0, \"gamma\": 1,");
        let err = RunConfig::parse(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gamma"), "message does not name the key: {msg}");
    }

    #[test]
    fn young_angle_resolution() {
        let cfg = minimal_periodic_json()
            .replace("\"k\": 0.1", "\"k\": \"young\"")
            .replace(
                "\"energies\": {\"a\": 0.0, \"b\": 1.0, \"c\": 0.0}",
                "\"energies\": {\"a\": 0.5, \"b\": 1.0, \"c\": 0.25}",
            );
        let r = RunConfig::parse(&cfg).unwrap().resolve().unwrap();
        // k = sqrt(0.75) * gx with gx = 0.2
        assert!((r.k - 0.75f64.sqrt() * 0.2).abs() < 1e-14);
    }

    #[test]
    fn validation_errors() {
        let small = minimal_periodic_json().replace("\"grid_n\": 101", "\"grid_n\": 5");
        assert!(RunConfig::parse(&small).is_err());
        let eps = minimal_periodic_json().replace(
            "{\"type\": \"steady\"}",
            "{\"type\": \"steady_plus_perturbation\", \"eps\": 0.5}",
        );
        assert!(RunConfig::parse(&eps).is_err());
        let missing = minimal_periodic_json().replace("\"lambda_bar\": 0.5,", "");
        assert!(RunConfig::parse(&missing).is_err());
    }

    #[test]
    fn nondim_examples() {
        let p = PhysicalParams {
            h: 0.1,
            sigma: 1.0,
            mu_l: 1.0,
            theta: 0.02,
            beta_phys: 0.0,
            t0: 1.0,
        };
        let r = nondimensionalize(&p, 0.01).unwrap();
        assert!((r.k - 2.0).abs() < 1e-15);
        assert!(r.warning.is_some());
        assert_eq!(r.beta_bar, 0.0);
        let r2 = nondimensionalize(&p, 0.1).unwrap();
        assert!((r2.length_scale - 1.0).abs() < 1e-15);
        assert!(r2.warning.is_none());
        assert!(nondimensionalize(&p, 0.5).is_err());
    }
}
