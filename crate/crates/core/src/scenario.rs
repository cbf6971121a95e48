//! Path-following scenarios, scalar metrics and the vertex comparison table.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::loops::{Architecture, ClosedLoop, Exogenous, LoopConfig, PlantSpec, SimTrace};
use crate::vehicle::{UncertaintyBox, Vertex};

/// A scalar signal of time.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Zero,
    Constant(f64),
    /// `amplitude` for `t >= at`.
    Step {
        at: f64,
        amplitude: f64,
    },
    /// Zero until `start`, linear over `ramp` seconds to `level`, then held.
    RampHold {
        start: f64,
        ramp: f64,
        level: f64,
    },
    /// `amplitude * sin(omega t + phase)`.
    Sine {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    Sum(Vec<Profile>),
}

impl Profile {
    /// The default test path: a 20 m radius curve entered over 2 s at t = 5 s.
    pub fn default_curvature() -> Self {
        Self::RampHold {
            start: 5.0,
            ramp: 2.0,
            level: 1.0 / 20.0,
        }
    }

    /// 0.1 m output step at t = 20 s.
    pub fn step_disturbance() -> Self {
        Self::Step {
            at: 20.0,
            amplitude: 0.1,
        }
    }

    /// 0.05 sin(0.5 t) m.
    pub fn sine_disturbance() -> Self {
        Self::Sine {
            amplitude: 0.05,
            omega: 0.5,
            phase: 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(v) => *v,
            Self::Step { at, amplitude } => {
                if t >= *at {
                    *amplitude
                } else {
                    0.0
                }
            }
            Self::RampHold { start, ramp, level } => {
                if t < *start {
                    0.0
                } else if *ramp <= 0.0 || t >= start + ramp {
                    *level
                } else {
                    level * (t - start) / ramp
                }
            }
            Self::Sine {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).sin(),
            Self::Sum(parts) => parts.iter().map(|p| p.eval(t)).sum(),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        match self {
            Self::Zero => Self::Zero,
            Self::Constant(v) => Self::Constant(k * v),
            Self::Step { at, amplitude } => Self::Step {
                at: *at,
                amplitude: k * amplitude,
            },
            Self::RampHold { start, ramp, level } => Self::RampHold {
                start: *start,
                ramp: *ramp,
                level: k * level,
            },
            Self::Sine {
                amplitude,
                omega,
                phase,
            } => Self::Sine {
                amplitude: k * amplitude,
                omega: *omega,
                phase: *phase,
            },
            Self::Sum(parts) => Self::Sum(parts.iter().map(|p| p.scaled(k)).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub loop_cfg: LoopConfig,
    /// Seconds; must be an integer multiple of `step`.
    pub duration: f64,
    pub step: f64,
    pub curvature: Profile,
    pub disturbance: Profile,
    pub reference: Profile,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            loop_cfg: LoopConfig::default(),
            duration: 60.0,
            step: 1e-3,
            curvature: Profile::default_curvature(),
            disturbance: Profile::Zero,
            reference: Profile::Zero,
        }
    }
}

impl Scenario {
    /// Reference tracking: a step in `r`, no curvature, no disturbance.
    pub fn tracking(amplitude: f64) -> Self {
        Self {
            curvature: Profile::Zero,
            reference: Profile::Step { at: 0.0, amplitude },
            ..Self::default()
        }
    }

    pub fn with_architecture(mut self, arch: Architecture) -> Self {
        self.loop_cfg.architecture = arch;
        self
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.loop_cfg.delay = delay;
        self
    }

    pub fn with_plant(mut self, plant: PlantSpec) -> Self {
        self.loop_cfg.plant = plant;
        self
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.step > 0.0
            && self.step.is_finite()
            && self.duration >= 0.0
            && self.duration.is_finite())
        {
            return Err(Error::InvalidInput(
                "duration must be >= 0 and step > 0".into(),
            ));
        }
        let n = (self.duration / self.step).round();
        if (n * self.step - self.duration).abs() > 1e-9 * self.duration.max(self.step) {
            return Err(Error::InvalidInput(
                "duration is not an integer number of steps".into(),
            ));
        }
        Ok(n as usize)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Metrics {
    pub rms_y: f64,
    pub peak_y: f64,
    pub rms_steer: f64,
    /// `h * sum(y^2)` [m^2 s].
    pub ise_y: f64,
}

/// Root mean square with uniform weights.
pub fn rms(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::InvalidInput("rms of an empty series".into()));
    }
    Ok((series.iter().map(|v| v * v).sum::<f64>() / series.len() as f64).sqrt())
}

pub fn metrics(trace: &SimTrace, h: f64) -> Result<Metrics> {
    Ok(Metrics {
        rms_y: rms(&trace.y)?,
        peak_y: trace.y.iter().fold(0.0, |m, v| m.max(v.abs())),
        rms_steer: rms(&trace.delta_f)?,
        ise_y: h * trace.y.iter().map(|v| v * v).sum::<f64>(),
    })
}

pub fn run_scenario(s: &Scenario) -> Result<(SimTrace, Metrics)> {
    let steps = s.steps()?;
    let lp = ClosedLoop::new(&s.loop_cfg, s.step)?;
    let trace = lp.run(steps, |t| Exogenous {
        r: s.reference.eval(t),
        rho: s.curvature.eval(t),
        d: s.disturbance.eval(t),
    })?;
    let m = metrics(&trace, s.step)?;
    Ok((trace, m))
}

/// PD against PD+DOB at every corner of the box.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexTable {
    pub vertices: Vec<Vertex>,
    pub rms_pd: Vec<f64>,
    pub rms_dob: Vec<f64>,
}

impl VertexTable {
    /// `100 (1 - dob / pd)` per vertex.
    pub fn reduction_pct(&self) -> Vec<f64> {
        self.rms_pd
            .iter()
            .zip(&self.rms_dob)
            .map(|(p, d)| 100.0 * (1.0 - d / p))
            .collect()
    }
}

/// Column order of the comparison table: (V min, m~ min), (V min, m~ max),
/// (V max, m~ min), (V max, m~ max).
pub const TABLE_ORDER: [char; 4] = ['a', 'c', 'b', 'd'];

/// Runs `base` with PD and PD+DOB on each vertex plant of `bx`. The delay
/// from `base` is used as given.
pub fn compare_vertices(base: &Scenario, bx: &UncertaintyBox) -> Result<VertexTable> {
    let by_label = bx.vertices()?;
    let vertices: Vec<Vertex> = TABLE_ORDER
        .iter()
        .map(|l| {
            *by_label
                .iter()
                .find(|v| v.label == *l)
                .expect("four labelled vertices")
        })
        .collect();
    let mut rms_pd = Vec::with_capacity(4);
    let mut rms_dob = Vec::with_capacity(4);
    for v in &vertices {
        for (arch, out) in [
            (Architecture::Pd, &mut rms_pd),
            (Architecture::PdDob, &mut rms_dob),
        ] {
            let s = base
                .clone()
                .with_architecture(arch)
                .with_plant(PlantSpec::Parametric(v.params));
            out.push(run_scenario(&s)?.1.rms_y);
        }
    }
    Ok(VertexTable {
        vertices,
        rms_pd,
        rms_dob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rms_examples() {
        assert_eq!(rms(&[1.0; 17]).unwrap(), 1.0);
        assert_eq!(rms(&[0.3, -0.3, 0.3, -0.3]).unwrap(), 0.3);
        assert!(rms(&[]).is_err());
        let n = 10_000;
        let two_pi = 2.0 * core::f64::consts::PI;
        let s: Vec<f64> = (0..n)
            .map(|k| (two_pi * 3.0 * k as f64 / n as f64).sin())
            .collect();
        assert!((rms(&s).unwrap() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
    }

    #[test]
    fn default_path_shape() {
        let p = Profile::default_curvature();
        assert_eq!(p.eval(4.999), 0.0);
        assert!((p.eval(6.0) - 0.025).abs() < 1e-15);
        assert_eq!(p.eval(7.0), 0.05);
        assert_eq!(p.eval(60.0), 0.05);
    }

    #[test]
    fn step_count_must_be_integral() {
        let s = Scenario {
            duration: 1.0005,
            step: 1e-3,
            ..Default::default()
        };
        assert!(s.steps().is_err());
        assert_eq!(Scenario::default().steps().unwrap(), 60_000);
    }

    #[test]
    fn zero_scenario_zero_metrics() {
        let s = Scenario {
            duration: 2.0,
            curvature: Profile::Zero,
            ..Default::default()
        };
        let (tr, m) = run_scenario(&s).unwrap();
        assert_eq!(tr.len(), 2001);
        assert_eq!(m, Metrics::default());
    }

    #[test]
    fn sum_profile() {
        let p = Profile::Sum(vec![
            Profile::Constant(1.0),
            Profile::Step {
                at: 1.0,
                amplitude: 2.0,
            },
        ]);
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(1.0), 3.0);
        assert_eq!(p.scaled(2.0).eval(1.0), 6.0);
    }
}
