//! Time-domain closed loops: block interconnection, the four controller
//! architectures and the fixed-step runner.
//!
//! Every loop is linear, so the whole diagram is folded into one state-space
//! model driven by the exogenous vector `[r, rho_ref, d, u_delayed]`. The
//! transport delay sits outside that model as a [`DelayLine`] whose output is
//! fed back in as the fourth exogenous channel.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::control::{pd_tf, q_over_gn, PdGains, QFilter};
use crate::delay::{delay_steps, DelayLine};
use crate::error::{Error, Result};
use crate::linalg::{solve, Matrix};
use crate::ss::{Rk4, StateSpaceModel};
use crate::tf::TransferFunction;
use crate::vehicle::{build_plant_with_heading, curvature_tf, nominal_tf, VehicleParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Architecture {
    Pd,
    PdDob,
    PdCdob,
    PdDdob,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [Self::Pd, Self::PdDob, Self::PdCdob, Self::PdDdob];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pd => "pd",
            Self::PdDob => "pd_dob",
            Self::PdCdob => "pd_cdob",
            Self::PdDdob => "pd_ddob",
        }
    }

    pub fn has_dob(self) -> bool {
        matches!(self, Self::PdDob | Self::PdDdob)
    }

    pub fn has_cdob(self) -> bool {
        matches!(self, Self::PdCdob | Self::PdDdob)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '+'], "_").as_str() {
            "pd" => Ok(Self::Pd),
            "pd_dob" | "dob" => Ok(Self::PdDob),
            "pd_cdob" | "cdob" => Ok(Self::PdCdob),
            "pd_ddob" | "ddob" => Ok(Self::PdDdob),
            other => Err(Error::InvalidInput(alloc::format!(
                "unknown architecture `{other}`"
            ))),
        }
    }
}

/// The controlled plant.
#[derive(Clone, Debug, PartialEq)]
pub enum PlantSpec {
    /// Single-track model built from physical parameters.
    Parametric(VehicleParams),
    /// An explicit steering-to-deviation transfer function. Curvature enters
    /// through `-V^2 / s^2` at `v_kmh`; there is no heading output.
    Transfer { g: TransferFunction, v_kmh: f64 },
}

impl Default for PlantSpec {
    fn default() -> Self {
        Self::Parametric(VehicleParams::default())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopConfig {
    pub architecture: Architecture,
    pub gains: PdGains,
    pub q_dob: QFilter,
    pub q_cdob: QFilter,
    /// Actuation delay [s].
    pub delay: f64,
    /// Design model the observers invert.
    pub nominal: TransferFunction,
    pub plant: PlantSpec,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            architecture: Architecture::PdDob,
            gains: PdGains::default(),
            q_dob: QFilter { omega_c: 5.0 },
            q_cdob: QFilter { omega_c: 200.0 },
            delay: 0.08,
            nominal: nominal_tf(),
            plant: PlantSpec::default(),
        }
    }
}

/// Uniformly sampled closed-loop signals.
///
/// `d_hat` carries the observer estimate of the architecture: the network
/// disturbance estimate when a CDOB is present, otherwise the DOB's lumped
/// disturbance estimate `e_hat`, otherwise zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimTrace {
    pub t: Vec<f64>,
    /// Lateral deviation of the plant [m].
    pub y: Vec<f64>,
    /// Heading error [rad]; zero for transfer-function plants.
    pub dpsi: Vec<f64>,
    /// Steering angle applied to the plant [rad].
    pub delta_f: Vec<f64>,
    /// PD controller output.
    pub u_new: Vec<f64>,
    pub d_hat: Vec<f64>,
    /// DOB disturbance estimate `u_new - u` at the DOB input; zero without a DOB.
    pub e_hat: Vec<f64>,
    pub r: Vec<f64>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn with_capacity(n: usize) -> Self {
        Self {
            t: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
            dpsi: Vec::with_capacity(n),
            delta_f: Vec::with_capacity(n),
            u_new: Vec::with_capacity(n),
            d_hat: Vec::with_capacity(n),
            e_hat: Vec::with_capacity(n),
            r: Vec::with_capacity(n),
        }
    }
}

const EXT_R: usize = 0;
const EXT_RHO: usize = 1;
const EXT_D: usize = 2;
const EXT_UDEL: usize = 3;
const N_EXT: usize = 4;

#[derive(Clone, Copy, Debug)]
enum Src {
    Ext(usize),
    Out(usize, usize),
}

type Combo = Vec<(Src, f64)>;

struct Block {
    model: StateSpaceModel,
    inputs: Vec<Combo>,
}

#[derive(Default)]
struct Diagram {
    blocks: Vec<Block>,
}

impl Diagram {
    fn add(&mut self, model: StateSpaceModel) -> usize {
        let m = model.inputs();
        self.blocks.push(Block {
            model,
            inputs: vec![Vec::new(); m],
        });
        self.blocks.len() - 1
    }

    fn add_tf(&mut self, g: &TransferFunction) -> Result<usize> {
        Ok(self.add(StateSpaceModel::from_tf(g)?))
    }

    fn connect(&mut self, block: usize, input: usize, combo: Combo) {
        self.blocks[block].inputs[input] = combo;
    }

    /// Folds the diagram into `x' = A x + B w`, `Y = Yx x + Yw w`, where `Y`
    /// stacks every block output.
    fn assemble(&self) -> Result<Assembled> {
        let n: usize = self.blocks.iter().map(|b| b.model.states()).sum();
        let p: usize = self.blocks.iter().map(|b| b.model.outputs()).sum();
        let m: usize = self.blocks.iter().map(|b| b.model.inputs()).sum();
        let mut out_offset = Vec::with_capacity(self.blocks.len());
        let (mut a, mut b, mut c, mut d) = (
            Matrix::zeros(n, n),
            Matrix::zeros(n, m),
            Matrix::zeros(p, n),
            Matrix::zeros(p, m),
        );
        let (mut xo, mut yo, mut uo) = (0, 0, 0);
        let mut in_offset = Vec::with_capacity(self.blocks.len());
        for blk in &self.blocks {
            let g = &blk.model;
            a.set_block(xo, xo, g.a());
            b.set_block(xo, uo, g.b());
            c.set_block(yo, xo, g.c());
            d.set_block(yo, uo, g.d());
            out_offset.push(yo);
            in_offset.push(uo);
            xo += g.states();
            yo += g.outputs();
            uo += g.inputs();
        }
        let mut conn = Matrix::zeros(m, p);
        let mut ext = Matrix::zeros(m, N_EXT);
        for (bi, blk) in self.blocks.iter().enumerate() {
            for (ii, combo) in blk.inputs.iter().enumerate() {
                let row = in_offset[bi] + ii;
                for (src, k) in combo {
                    match *src {
                        Src::Ext(e) => ext[(row, e)] += k,
                        Src::Out(ob, oi) => conn[(row, out_offset[ob] + oi)] += k,
                    }
                }
            }
        }
        // (I - D M) Y = C x + D W w
        let lhs = Matrix::identity(p).add(&d.matmul(&conn).scale(-1.0));
        let dw = d.matmul(&ext);
        let mut rhs = Matrix::zeros(p, n + N_EXT);
        rhs.set_block(0, 0, &c);
        rhs.set_block(0, n, &dw);
        let sol = solve(&lhs, &rhs).ok_or(Error::AlgebraicLoop)?;
        let mut yx = Matrix::zeros(p, n);
        let mut yw = Matrix::zeros(p, N_EXT);
        for i in 0..p {
            for j in 0..n {
                yx[(i, j)] = sol[(i, j)];
            }
            for j in 0..N_EXT {
                yw[(i, j)] = sol[(i, n + j)];
            }
        }
        let a_cl = a.add(&b.matmul(&conn.matmul(&yx)));
        let b_cl = b.matmul(&conn.matmul(&yw).add(&ext));
        Ok(Assembled {
            a: a_cl,
            b: b_cl,
            yx,
            yw,
            out_offset,
        })
    }
}

struct Assembled {
    a: Matrix,
    b: Matrix,
    yx: Matrix,
    yw: Matrix,
    out_offset: Vec<usize>,
}

/// A signal of interest as a row over `[x; w]`.
#[derive(Clone, Debug)]
struct Probe {
    cx: Vec<f64>,
    cw: [f64; N_EXT],
}

impl Probe {
    fn new(asm: &Assembled, combo: &Combo) -> Self {
        let n = asm.a.rows();
        let mut cx = vec![0.0; n];
        let mut cw = [0.0; N_EXT];
        for (src, k) in combo {
            match *src {
                Src::Ext(e) => cw[e] += k,
                Src::Out(b, o) => {
                    let row = asm.out_offset[b] + o;
                    for (j, c) in cx.iter_mut().enumerate() {
                        *c += k * asm.yx[(row, j)];
                    }
                    for (j, c) in cw.iter_mut().enumerate() {
                        *c += k * asm.yw[(row, j)];
                    }
                }
            }
        }
        Self { cx, cw }
    }

    fn eval(&self, x: &[f64], w: &[f64; N_EXT]) -> f64 {
        let mut s = 0.0;
        for (c, v) in self.cx.iter().zip(x) {
            s += c * v;
        }
        for (c, v) in self.cw.iter().zip(w) {
            s += c * v;
        }
        s
    }
}

struct Probes {
    y: Probe,
    dpsi: Probe,
    delta_f: Probe,
    u_new: Probe,
    u_cmd: Probe,
    d_hat: Option<Probe>,
    e_hat: Option<Probe>,
}

/// Exogenous signals sampled at time `t`: reference, path curvature and
/// output disturbance.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Exogenous {
    pub r: f64,
    pub rho: f64,
    pub d: f64,
}

/// An assembled loop ready to run at a fixed step.
pub struct ClosedLoop {
    cfg: LoopConfig,
    step: f64,
    delay_steps: usize,
    a: Matrix,
    b: Matrix,
    probes: Probes,
}

fn plant_model(spec: &PlantSpec) -> Result<StateSpaceModel> {
    match spec {
        PlantSpec::Parametric(p) => build_plant_with_heading(p),
        PlantSpec::Transfer { g, v_kmh } => {
            let steer = StateSpaceModel::from_tf(g)?;
            let curve = StateSpaceModel::from_tf(&curvature_tf(*v_kmh)?)?;
            let (n1, n2) = (steer.states(), curve.states());
            let mut a = Matrix::zeros(n1 + n2, n1 + n2);
            a.set_block(0, 0, steer.a());
            a.set_block(n1, n1, curve.a());
            let mut b = Matrix::zeros(n1 + n2, 2);
            b.set_block(0, 0, steer.b());
            b.set_block(n1, 1, curve.b());
            let mut c = Matrix::zeros(2, n1 + n2);
            c.set_block(0, 0, steer.c());
            c.set_block(0, n1, curve.c());
            let mut d = Matrix::zeros(2, 2);
            d[(0, 0)] = steer.d()[(0, 0)];
            d[(0, 1)] = curve.d()[(0, 0)];
            StateSpaceModel::new(a, b, c, d)
        }
    }
}

impl ClosedLoop {
    /// Realizes every block of `cfg` and folds the diagram for step `h`.
    pub fn new(cfg: &LoopConfig, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(
                "step must be positive and finite".into(),
            ));
        }
        cfg.gains.validate()?;
        let n_delay = delay_steps(cfg.delay, h)?;
        let arch = cfg.architecture;
        let gn = &cfg.nominal;

        let mut dg = Diagram::default();
        let plant = dg.add(plant_model(&cfg.plant)?);
        let ctrl = dg.add_tf(&pd_tf(&cfg.gains, true))?;
        let y_meas: Combo = vec![(Src::Out(plant, 0), 1.0), (Src::Ext(EXT_D), 1.0)];

        // controller-side command and feedback signal
        let mut u_cmd: Combo = vec![(Src::Out(ctrl, 0), 1.0)];
        let mut feedback = y_meas.clone();
        let mut e_hat = None;
        let mut d_hat = None;

        let dob_blocks = if arch.has_dob() {
            let q = dg.add_tf(&cfg.q_dob.tf())?;
            let qg = dg.add_tf(&q_over_gn(&cfg.q_dob.tf(), gn)?)?;
            let sum = dg.add(StateSpaceModel::gain(1.0));
            dg.connect(qg, 0, y_meas.clone());
            dg.connect(q, 0, vec![(Src::Out(sum, 0), 1.0)]);
            e_hat = Some(vec![(Src::Out(qg, 0), 1.0), (Src::Out(q, 0), -1.0)]);
            Some((q, qg, sum))
        } else {
            None
        };

        if arch.has_cdob() {
            let q = dg.add_tf(&cfg.q_cdob.tf())?;
            let qg = dg.add_tf(&q_over_gn(&cfg.q_cdob.tf(), gn)?)?;
            let est = dg.add(StateSpaceModel::gain(1.0));
            let comp = dg.add_tf(gn)?;
            dg.connect(q, 0, u_cmd.clone());
            dg.connect(qg, 0, y_meas.clone());
            dg.connect(est, 0, vec![(Src::Out(q, 0), 1.0), (Src::Out(qg, 0), -1.0)]);
            dg.connect(comp, 0, vec![(Src::Out(est, 0), 1.0)]);
            feedback.push((Src::Out(comp, 0), 1.0));
            d_hat = Some(vec![(Src::Out(est, 0), 1.0)]);
        }

        if arch == Architecture::PdDob {
            let (q, qg, sum) = dob_blocks.expect("dob blocks");
            dg.connect(
                sum,
                0,
                vec![
                    (Src::Out(ctrl, 0), 1.0),
                    (Src::Out(q, 0), 1.0),
                    (Src::Out(qg, 0), -1.0),
                ],
            );
            u_cmd = vec![(Src::Out(sum, 0), 1.0)];
        }

        let actuated: Combo = if n_delay > 0 {
            vec![(Src::Ext(EXT_UDEL), 1.0)]
        } else {
            u_cmd.clone()
        };
        let delta_f: Combo = if arch == Architecture::PdDdob {
            let (q, qg, sum) = dob_blocks.expect("dob blocks");
            let mut c = actuated;
            c.push((Src::Out(q, 0), 1.0));
            c.push((Src::Out(qg, 0), -1.0));
            dg.connect(sum, 0, c);
            vec![(Src::Out(sum, 0), 1.0)]
        } else {
            actuated
        };

        let error: Combo = core::iter::once((Src::Ext(EXT_R), 1.0))
            .chain(feedback.iter().map(|(s, k)| (*s, -k)))
            .collect();
        dg.connect(ctrl, 0, error);
        dg.connect(plant, 0, delta_f.clone());
        dg.connect(plant, 1, vec![(Src::Ext(EXT_RHO), 1.0)]);

        let asm = dg.assemble()?;
        let probes = Probes {
            y: Probe::new(&asm, &vec![(Src::Out(plant, 0), 1.0)]),
            dpsi: Probe::new(&asm, &vec![(Src::Out(plant, 1), 1.0)]),
            delta_f: Probe::new(&asm, &delta_f),
            u_new: Probe::new(&asm, &vec![(Src::Out(ctrl, 0), 1.0)]),
            u_cmd: Probe::new(&asm, &u_cmd),
            d_hat: d_hat.map(|c| Probe::new(&asm, &c)),
            e_hat: e_hat.map(|c| Probe::new(&asm, &c)),
        };
        Ok(Self {
            cfg: cfg.clone(),
            step: h,
            delay_steps: n_delay,
            a: asm.a,
            b: asm.b,
            probes,
        })
    }

    pub fn config(&self) -> &LoopConfig {
        &self.cfg
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn states(&self) -> usize {
        self.a.rows()
    }

    /// Integer number of steps the actuation delay was rounded to.
    pub fn delay_steps(&self) -> usize {
        self.delay_steps
    }

    /// Closed-loop system matrix with the delay path opened.
    pub fn system_matrix(&self) -> &Matrix {
        &self.a
    }

    /// Runs `steps` steps from rest, sampling `exo(t)` at `t = k h` for
    /// `k = 0..=steps`. The trace has `steps + 1` rows.
    pub fn run(&self, steps: usize, mut exo: impl FnMut(f64) -> Exogenous) -> Result<SimTrace> {
        let h = self.step;
        let n = self.states();
        let mut x = vec![0.0; n];
        let mut prev = vec![0.0; n];
        let mut line = DelayLine::new(self.delay_steps as f64 * h, h)?;
        let mut rk = Rk4::new(n, N_EXT);
        let mut trace = SimTrace::with_capacity(steps + 1);
        let sample = |e: Exogenous, line: &DelayLine| [e.r, e.rho, e.d, line.peek().unwrap_or(0.0)];
        let mut t = 0.0;
        let mut w = sample(exo(t), &line);
        for k in 0..=steps {
            let p = &self.probes;
            let u_new = p.u_new.eval(&x, &w);
            let e_hat = p.e_hat.as_ref().map_or(0.0, |q| q.eval(&x, &w));
            trace.t.push(t);
            trace.y.push(p.y.eval(&x, &w));
            trace.dpsi.push(p.dpsi.eval(&x, &w));
            trace.delta_f.push(p.delta_f.eval(&x, &w));
            trace.u_new.push(u_new);
            trace.e_hat.push(e_hat);
            trace
                .d_hat
                .push(p.d_hat.as_ref().map_or(e_hat, |q| q.eval(&x, &w)));
            trace.r.push(w[EXT_R]);
            line.push(p.u_cmd.eval(&x, &w));
            if k == steps {
                break;
            }
            t = (k + 1) as f64 * h;
            let w_next = sample(exo(t), &line);
            prev.copy_from_slice(&x);
            rk.step(&self.a, &self.b, &mut x, &w, &w_next, h);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence {
                    step: k + 1,
                    last_state: prev,
                });
            }
            w = w_next;
        }
        Ok(trace)
    }
}
