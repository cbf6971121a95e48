//! TOML run configuration with `[vehicle]`, `[loop]` and `[scenario]` sections.
//! Every key is optional and defaults to the reference design.

use std::path::Path;

use anyhow::{Context, Result};
use pathdob_core::control::{PdGains, QFilter};
use pathdob_core::vehicle::nominal_tf;
use pathdob_core::{Architecture, LoopConfig, PlantSpec, Profile, Scenario, VehicleParams};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub vehicle: VehicleSection,
    #[serde(rename = "loop")]
    pub loop_: LoopSection,
    pub scenario: ScenarioSection,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleSection {
    pub m: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub lf: f64,
    pub lr: f64,
    pub cf: f64,
    pub cr: f64,
    pub v_kmh: f64,
    pub mu: f64,
}

impl Default for VehicleSection {
    fn default() -> Self {
        let p = VehicleParams::default();
        Self {
            m: p.m,
            j: p.j,
            lf: p.lf,
            lr: p.lr,
            cf: p.cf,
            cr: p.cr,
            v_kmh: p.v_kmh,
            mu: p.mu,
        }
    }
}

impl VehicleSection {
    pub fn params(&self) -> VehicleParams {
        VehicleParams {
            m: self.m,
            j: self.j,
            lf: self.lf,
            lr: self.lr,
            cf: self.cf,
            cr: self.cr,
            v_kmh: self.v_kmh,
            mu: self.mu,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PlantChoice {
    /// Single-track model from `[vehicle]`.
    #[default]
    Parametric,
    /// The fixed design model the observers invert.
    Nominal,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LoopSection {
    pub architecture: String,
    pub kp: f64,
    pub kd: f64,
    pub tau_d: f64,
    /// DOB Q-filter cutoff [rad/s].
    pub omega_dob: f64,
    /// CDOB Q-filter cutoff [rad/s].
    pub omega_cdob: f64,
    /// Actuation delay [s].
    pub delay: f64,
    pub plant: PlantChoice,
}

impl Default for LoopSection {
    fn default() -> Self {
        let g = PdGains::default();
        let l = LoopConfig::default();
        Self {
            architecture: l.architecture.name().into(),
            kp: g.kp,
            kd: g.kd,
            tau_d: g.tau_d,
            omega_dob: l.q_dob.omega_c,
            omega_cdob: l.q_cdob.omega_c,
            delay: l.delay,
            plant: PlantChoice::Parametric,
        }
    }
}

impl LoopSection {
    pub fn gains(&self) -> PdGains {
        PdGains {
            kp: self.kp,
            kd: self.kd,
            tau_d: self.tau_d,
        }
    }

    pub fn architecture(&self) -> Result<Architecture> {
        Ok(self.architecture.parse()?)
    }
}

/// A time profile, written as an inline table tagged by `kind`, for example
/// `{ kind = "step", at = 20.0, amplitude = 0.1 }`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Zero,
    Constant {
        value: f64,
    },
    Step {
        at: f64,
        amplitude: f64,
    },
    RampHold {
        start: f64,
        ramp: f64,
        level: f64,
    },
    Sine {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl ProfileSpec {
    pub fn profile(&self) -> Profile {
        match *self {
            Self::Zero => Profile::Zero,
            Self::Constant { value } => Profile::Constant(value),
            Self::Step { at, amplitude } => Profile::Step { at, amplitude },
            Self::RampHold { start, ramp, level } => Profile::RampHold { start, ramp, level },
            Self::Sine {
                amplitude,
                omega,
                phase,
            } => Profile::Sine {
                amplitude,
                omega,
                phase,
            },
        }
    }

    pub fn from_profile(p: &Profile) -> Option<Self> {
        Some(match *p {
            Profile::Zero => Self::Zero,
            Profile::Constant(value) => Self::Constant { value },
            Profile::Step { at, amplitude } => Self::Step { at, amplitude },
            Profile::RampHold { start, ramp, level } => Self::RampHold { start, ramp, level },
            Profile::Sine {
                amplitude,
                omega,
                phase,
            } => Self::Sine {
                amplitude,
                omega,
                phase,
            },
            Profile::Sum(_) => return None,
        })
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub duration: f64,
    pub step: f64,
    pub curvature: ProfileSpec,
    pub disturbance: ProfileSpec,
    pub reference: ProfileSpec,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let s = Scenario::default();
        Self {
            duration: s.duration,
            step: s.step,
            curvature: ProfileSpec::from_profile(&s.curvature).expect("simple profile"),
            disturbance: ProfileSpec::Zero,
            reference: ProfileSpec::Zero,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Loads `path` when given, otherwise the defaults.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn plant(&self, params: VehicleParams) -> PlantSpec {
        match self.loop_.plant {
            PlantChoice::Parametric => PlantSpec::Parametric(params),
            PlantChoice::Nominal => PlantSpec::Transfer {
                g: nominal_tf(),
                v_kmh: params.v_kmh,
            },
        }
    }

    pub fn loop_config(&self) -> Result<LoopConfig> {
        let l = &self.loop_;
        let cfg = LoopConfig {
            architecture: l.architecture()?,
            gains: l.gains(),
            q_dob: QFilter::new(l.omega_dob)?,
            q_cdob: QFilter::new(l.omega_cdob)?,
            delay: l.delay,
            nominal: nominal_tf(),
            plant: self.plant(self.vehicle.params()),
        };
        cfg.gains.validate()?;
        Ok(cfg)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let s = &self.scenario;
        Ok(Scenario {
            loop_cfg: self.loop_config()?,
            duration: s.duration,
            step: s.step,
            curvature: s.curvature.profile(),
            disturbance: s.disturbance.profile(),
            reference: s.reference.profile(),
        })
    }
}
