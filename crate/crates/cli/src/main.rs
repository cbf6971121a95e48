use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pathdob::config::Config;
use pathdob::export::{self, fmt_f64};
use pathdob::plot::{self, Axes, Series};
use pathdob_core::control::{cdob_response, dob_transfers, pd_tf, QFilter};
use pathdob_core::dstability::{check_gains, feasible_map, GridSpec};
use pathdob_core::freq::logspace;
use pathdob_core::robustness::{
    cdob_nominal_loop, cdob_small_gain, delay_uncertainty, delta_m_envelope, dob_small_gain,
    EnvelopeReference, StabilityReport,
};
use pathdob_core::scenario::{compare_vertices, run_scenario};
use pathdob_core::vehicle::{nominal_tf, plant_tf};
use pathdob_core::{Architecture, DRegion, Profile, UncertaintyBox};

const EXIT_USAGE: u8 = 1;
const EXIT_ROBUSTNESS: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;

/// Disturbance-observer path-following control toolkit.
#[derive(Parser)]
#[command(name = "pathdob", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one closed-loop scenario and export its trace.
    Sim(SimArgs),
    /// Compare PD and PD+DOB at the four corners of the operating box.
    Table2(Table2Args),
    /// Tabulate frequency responses used in the robustness analysis.
    Sweep(SweepArgs),
    /// Map the D-stable region of the PD gain plane.
    Design(DesignArgs),
    /// Run a small-gain robust stability check (exit 2 on failure).
    Robust(RobustArgs),
}

#[derive(Args)]
struct Common {
    /// TOML file with [vehicle], [loop] and [scenario] sections.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// CSV destination; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write an SVG plot here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Corner {
    A,
    B,
    C,
    D,
}

#[derive(Clone, Copy, ValueEnum)]
enum Disturbance {
    None,
    Step,
    Sine,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    common: Common,
    /// pd, pd_dob, pd_cdob or pd_ddob.
    #[arg(long)]
    architecture: Option<String>,
    /// Simulate a corner of the default operating box instead of [vehicle].
    #[arg(long, value_enum)]
    vertex: Option<Corner>,
    /// Actuation delay [s].
    #[arg(long)]
    delay: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    /// Integration step [s].
    #[arg(long)]
    step: Option<f64>,
    /// Preset output disturbance, replacing the configured one.
    #[arg(long, value_enum)]
    disturbance: Option<Disturbance>,
}

#[derive(Args)]
struct Table2Args {
    #[command(flatten)]
    common: Common,
    /// Actuation delay [s].
    #[arg(long, default_value_t = 0.0)]
    delay: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    /// |Q| against the vertex uncertainty envelope.
    Envelope,
    /// Open-loop and DOB-compensated magnitudes of every vertex plant.
    Vertices,
    /// Delayed CDOB closed loop and its small-gain test.
    Cdob,
}

#[derive(Args)]
struct Grid {
    /// Lowest frequency [rad/s].
    #[arg(long, default_value_t = 1e-2)]
    omega_min: f64,
    /// Highest frequency [rad/s].
    #[arg(long, default_value_t = 1e4)]
    omega_max: f64,
    #[arg(long, default_value_t = 400)]
    points: usize,
}

impl Grid {
    fn values(&self) -> Result<Vec<f64>> {
        Ok(logspace(self.omega_min, self.omega_max, self.points)?)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "envelope")]
    kind: SweepKind,
    #[command(flatten)]
    grid: Grid,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.0)]
    kp_min: f64,
    #[arg(long, default_value_t = 3.0)]
    kp_max: f64,
    #[arg(long, default_value_t = 0.0)]
    kd_min: f64,
    #[arg(long, default_value_t = 3.0)]
    kd_max: f64,
    #[arg(long, default_value_t = 0.02)]
    resolution: f64,
    /// Minimum decay rate [1/s].
    #[arg(long, default_value_t = 0.3)]
    sigma: f64,
    /// Damping boundary angle from the positive real axis [deg].
    #[arg(long, default_value_t = 135.0)]
    theta: f64,
    /// Maximum dominant-pole magnitude [rad/s].
    #[arg(long, default_value_t = 1.3)]
    radius: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Observer {
    Dob,
    Cdob,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reference {
    /// The fixed design model.
    Design,
    /// The single-track model at the box's nominal point.
    Parametric,
}

#[derive(Args)]
struct RobustArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "dob")]
    observer: Observer,
    /// Q-filter cutoff [rad/s]; defaults to the configured one for the observer.
    #[arg(long)]
    omega_c: Option<f64>,
    /// Delay T [s] for the CDOB check.
    #[arg(long)]
    delay: Option<f64>,
    /// Plant the DOB uncertainty is measured against.
    #[arg(long, value_enum, default_value = "design")]
    reference: Reference,
    #[command(flatten)]
    grid: Grid,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let diverged = matches!(
                e.downcast_ref::<pathdob_core::Error>(),
                Some(pathdob_core::Error::Divergence { .. })
            );
            ExitCode::from(if diverged {
                EXIT_DIVERGENCE
            } else {
                EXIT_USAGE
            })
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Sim(a) => sim(a),
        Command::Table2(a) => table2(a),
        Command::Sweep(a) => sweep(a),
        Command::Design(a) => design(a),
        Command::Robust(a) => robust(a),
    }
}

/// Runs `write` against `path`, or standard output.
fn emit(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = export::create(p)?;
            write(&mut f).with_context(|| format!("writing {}", p.display()))?;
            f.flush()
                .with_context(|| format!("writing {}", p.display()))
        }
        None => write(&mut io::stdout().lock()),
    }
}

fn sim(a: SimArgs) -> Result<u8> {
    let cfg = Config::load_or_default(a.common.config.as_deref())?;
    let mut s = cfg.scenario()?;
    if let Some(arch) = &a.architecture {
        s.loop_cfg.architecture = arch.parse::<Architecture>()?;
    }
    if let Some(corner) = a.vertex {
        let label = ['a', 'b', 'c', 'd'][corner as usize];
        let bx = UncertaintyBox {
            base: cfg.vehicle.params(),
            ..Default::default()
        };
        let v = bx
            .vertices()?
            .into_iter()
            .find(|v| v.label == label)
            .expect("four corners");
        s.loop_cfg.plant = cfg.plant(v.params);
    }
    if let Some(d) = a.delay {
        s.loop_cfg.delay = d;
    }
    if let Some(d) = a.duration {
        s.duration = d;
    }
    if let Some(h) = a.step {
        s.step = h;
    }
    match a.disturbance {
        Some(Disturbance::None) => s.disturbance = Profile::Zero,
        Some(Disturbance::Step) => s.disturbance = Profile::step_disturbance(),
        Some(Disturbance::Sine) => s.disturbance = Profile::sine_disturbance(),
        None => {}
    }
    let (trace, m) = run_scenario(&s)?;
    emit(a.common.out.as_deref(), |w| export::write_trace(w, &trace))?;
    if let Some(p) = &a.common.svg {
        let title = format!("{} (T = {} s)", s.loop_cfg.architecture, s.loop_cfg.delay);
        plot::trace_chart(p, &trace, &title)?;
    }
    eprintln!(
        "{}: rms_y {} m, peak_y {} m, rms_steer {} rad, ise_y {} m^2 s",
        s.loop_cfg.architecture, m.rms_y, m.peak_y, m.rms_steer, m.ise_y
    );
    Ok(0)
}

fn table2(a: Table2Args) -> Result<u8> {
    let cfg = Config::load_or_default(a.common.config.as_deref())?;
    let base = cfg.scenario()?.with_delay(a.delay);
    let bx = UncertaintyBox {
        base: cfg.vehicle.params(),
        ..Default::default()
    };
    let table = compare_vertices(&base, &bx)?;
    emit(a.common.out.as_deref(), |w| {
        export::write_vertex_table(w, &table)
    })?;
    if let Some(p) = &a.common.svg {
        let idx: Vec<f64> = (0..table.vertices.len()).map(|i| i as f64).collect();
        plot::line_chart(
            p,
            &Axes {
                title: "rms lateral deviation per corner (a, c, b, d)",
                x_desc: "corner",
                y_desc: "rms y [m]",
                log_x: false,
            },
            &[
                Series {
                    label: "PD",
                    x: &idx,
                    y: &table.rms_pd,
                },
                Series {
                    label: "PD+DOB",
                    x: &idx,
                    y: &table.rms_dob,
                },
            ],
        )?;
    }
    Ok(0)
}

fn db(v: f64) -> f64 {
    20.0 * v.log10()
}

fn sweep(a: SweepArgs) -> Result<u8> {
    let cfg = Config::load_or_default(a.common.config.as_deref())?;
    let lc = cfg.loop_config()?;
    let grid = a.grid.values()?;
    let gn = nominal_tf();
    let bx = UncertaintyBox {
        base: cfg.vehicle.params(),
        ..Default::default()
    };
    let mut header: Vec<String> = vec!["omega".into()];
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let title;
    match a.kind {
        SweepKind::Envelope => {
            title = "uncertainty envelope against the DOB filter";
            let env = delta_m_envelope(&bx, &grid, EnvelopeReference::DesignNominal)?;
            let q = lc.q_dob.tf();
            let q_db = grid
                .iter()
                .map(|w| Ok(db(q.eval_jw(*w)?.norm())))
                .collect::<Result<Vec<_>>>()?;
            header.extend(["q_db", "inv_delta_m_db"].map(String::from));
            cols.push(q_db);
            cols.push(env.magnitude.iter().map(|m| -db(*m)).collect());
        }
        SweepKind::Vertices => {
            title = "vertex plants, open loop and with DOB";
            let q = lc.q_dob.tf();
            header.push("nominal_db".into());
            cols.push(
                grid.iter()
                    .map(|w| Ok(db(gn.eval_jw(*w)?.norm())))
                    .collect::<Result<_>>()?,
            );
            for v in bx.vertices()? {
                let g = plant_tf(&v.params)?;
                let reg = dob_transfers(&g, &gn, &q)?.regulation;
                header.push(format!("open_{}_db", v.label));
                cols.push(
                    grid.iter()
                        .map(|w| Ok(db(g.eval_jw(*w)?.norm())))
                        .collect::<Result<_>>()?,
                );
                header.push(format!("dob_{}_db", v.label));
                cols.push(
                    grid.iter()
                        .map(|w| Ok(db(reg.eval_jw(*w)?.norm())))
                        .collect::<Result<_>>()?,
                );
            }
        }
        SweepKind::Cdob => {
            title = "delayed CDOB loop";
            let c = pd_tf(&lc.gains, false);
            let q = lc.q_cdob.tf();
            let (mut closed, mut test, mut bound) = (Vec::new(), Vec::new(), Vec::new());
            for &w in &grid {
                closed.push(db(cdob_response(&c, &gn, &q, lc.delay, w)?.norm()));
                let ln = cdob_nominal_loop(&c, &gn, &q, lc.delay, w)?;
                test.push(db((ln / (1.0 + ln)).norm()));
                bound.push(-db(delay_uncertainty(lc.delay, w).norm()));
            }
            header.extend(["closed_loop_db", "test_db", "bound_db"].map(String::from));
            cols.extend([closed, test, bound]);
        }
    }
    let head: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..grid.len()).map(|k| {
        std::iter::once(grid[k])
            .chain(cols.iter().map(|c| c[k]))
            .map(fmt_f64)
            .collect()
    });
    emit(a.common.out.as_deref(), |w| {
        export::write_rows(w, &head, rows)
    })?;
    if let Some(p) = &a.common.svg {
        let series: Vec<Series> = cols
            .iter()
            .zip(&header[1..])
            .map(|(c, h)| Series {
                label: h,
                x: &grid,
                y: c,
            })
            .collect();
        plot::line_chart(
            p,
            &Axes {
                title,
                x_desc: "omega [rad/s]",
                y_desc: "magnitude [dB]",
                log_x: true,
            },
            &series,
        )?;
    }
    Ok(0)
}

fn design(a: DesignArgs) -> Result<u8> {
    let cfg = Config::load_or_default(a.common.config.as_deref())?;
    let region = DRegion {
        sigma: a.sigma,
        theta_deg: a.theta,
        radius: a.radius,
    };
    let spec = GridSpec {
        kp: (a.kp_min, a.kp_max),
        kd: (a.kd_min, a.kd_max),
        resolution: a.resolution,
    };
    let gn = nominal_tf();
    let grid = feasible_map(&gn, &spec, &region)?;
    emit(a.common.out.as_deref(), |w| {
        export::write_gain_grid(w, &grid)
    })?;
    let g = cfg.loop_.gains();
    if let Some(p) = &a.common.svg {
        plot::feasibility_chart(p, &grid, (g.kp, g.kd))?;
    }
    let chk = check_gains(&gn, g.kp, g.kd, &region)?;
    eprintln!(
        "{} of {} cells feasible; (K_p, K_d) = ({}, {}) {} with dominant pole {} {:+}j",
        grid.feasible_count(),
        grid.cells.len(),
        g.kp,
        g.kd,
        if chk.feasible {
            "feasible"
        } else {
            "infeasible"
        },
        chk.dominant.re,
        chk.dominant.im
    );
    Ok(0)
}

fn robust(a: RobustArgs) -> Result<u8> {
    let cfg = Config::load_or_default(a.common.config.as_deref())?;
    let lc = cfg.loop_config()?;
    let grid = a.grid.values()?;
    let report: StabilityReport = match a.observer {
        Observer::Dob => {
            if a.delay.is_some() {
                bail!("--delay applies to the CDOB check only");
            }
            let q = QFilter::new(a.omega_c.unwrap_or(lc.q_dob.omega_c))?.tf();
            let bx = UncertaintyBox {
                base: cfg.vehicle.params(),
                ..Default::default()
            };
            let reference = match a.reference {
                Reference::Design => EnvelopeReference::DesignNominal,
                Reference::Parametric => EnvelopeReference::ParametricNominal,
            };
            dob_small_gain(&q, &delta_m_envelope(&bx, &grid, reference)?)?
        }
        Observer::Cdob => {
            let q = QFilter::new(a.omega_c.unwrap_or(lc.q_cdob.omega_c))?.tf();
            let c = pd_tf(&lc.gains, false);
            cdob_small_gain(&c, &nominal_tf(), &q, a.delay.unwrap_or(lc.delay), &grid)?
        }
    };
    emit(a.common.out.as_deref(), |w| {
        export::write_report(w, &report)
    })?;
    if let Some(p) = &a.common.svg {
        let test: Vec<f64> = report.points.iter().map(|p| db(p.test)).collect();
        let bound: Vec<f64> = report.points.iter().map(|p| db(p.bound)).collect();
        plot::line_chart(
            p,
            &Axes {
                title: "small-gain test",
                x_desc: "omega [rad/s]",
                y_desc: "magnitude [dB]",
                log_x: true,
            },
            &[
                Series {
                    label: "test",
                    x: &grid,
                    y: &test,
                },
                Series {
                    label: "bound",
                    x: &grid,
                    y: &bound,
                },
            ],
        )?;
    }
    if let Some(w) = report.nominal_singular_at {
        eprintln!("nominal loop numerically singular at omega = {w}");
    }
    eprintln!(
        "{}: minimum margin {} dB at omega = {} rad/s",
        if report.pass { "PASS" } else { "FAIL" },
        report.margin_db,
        report.critical_omega
    );
    Ok(if report.pass { 0 } else { EXIT_ROBUSTNESS })
}
