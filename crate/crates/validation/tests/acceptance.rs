//! Acceptance suite: one PASS/FAIL line per criterion, each with its
//! tolerances and a wall-clock limit. Exits nonzero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use pathdob_core::control::{cdob_response, dob_transfers, pd_tf, PdGains, QFilter};
use pathdob_core::dstability::{char_poly, check_gains, feasible_map, GridSpec};
use pathdob_core::freq::{default_grid, logspace};
use pathdob_core::loops::Exogenous;
use pathdob_core::robustness::{
    cdob_small_gain, delay_uncertainty, delta_m_envelope, dob_small_gain, EnvelopeReference,
};
use pathdob_core::scenario::{compare_vertices, run_scenario};
use pathdob_core::vehicle::nominal_tf;
use pathdob_core::{
    Architecture, ClosedLoop, DRegion, DelayLine, LoopConfig, Polynomial, Profile, Scenario,
    StateSpaceModel, TransferFunction, UncertaintyBox,
};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "nominal-model identity",
            limit: secs(1),
            run: nominal_identity,
        },
        Criterion {
            id: 2,
            name: "DOB robust stability",
            limit: secs(1),
            run: dob_robust,
        },
        Criterion {
            id: 3,
            name: "CDOB robust stability",
            limit: secs(1),
            run: cdob_robust,
        },
        Criterion {
            id: 4,
            name: "D-stability of selected gains",
            limit: secs(30),
            run: d_stability,
        },
        Criterion {
            id: 5,
            name: "vertex table PD vs PD+DOB",
            limit: secs(60),
            run: vertex_table,
        },
        Criterion {
            id: 6,
            name: "delay scenario PD vs PD+CDOB",
            limit: secs(20),
            run: delay_scenario,
        },
        Criterion {
            id: 7,
            name: "DDOB vs CDOB ordering",
            limit: secs(20),
            run: ddob_ordering,
        },
        Criterion {
            id: 8,
            name: "numerical kernel properties",
            limit: secs(30),
            run: kernel_properties,
        },
        Criterion {
            id: 9,
            name: "CDOB response degenerations",
            limit: secs(1),
            run: cdob_degenerations,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed < c.limit;
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {} {}: {}; runtime {:.3} s (limit {} s{})",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", exceeded" },
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn nominal_identity() -> Outcome {
    let gn = nominal_tf();
    let q = QFilter::new(5.0).map_err(err)?.tf();
    let reg = dob_transfers(&gn, &gn, &q).map_err(err)?.regulation;
    let lhs = reg.num() * gn.den();
    let resid = (&lhs - &(reg.den() * gn.num())).norm2() / lhs.norm2();
    let mut worst = 0.0f64;
    for w in logspace(1e-2, 1e2, 400).map_err(err)? {
        let a = reg.eval_jw(w).map_err(err)?;
        let b = gn.eval_jw(w).map_err(err)?;
        worst = worst.max(common::rel_err(a, b));
    }
    let tol = 1e-9;
    Ok((
        resid <= tol && worst <= tol,
        format!("coefficient residual {resid:.2e}, response error {worst:.2e} on [1e-2, 1e2] (tol {tol:e})"),
    ))
}

fn dob_robust() -> Outcome {
    let env = delta_m_envelope(
        &UncertaintyBox::default(),
        &default_grid(),
        EnvelopeReference::DesignNominal,
    )
    .map_err(err)?;
    let rep = dob_small_gain(&QFilter::new(5.0).map_err(err)?.tf(), &env).map_err(err)?;
    let all_positive = rep.points.iter().all(|p| p.margin_db > 0.0);
    Ok((
        rep.pass && all_positive,
        format!(
            "wc 5 rad/s, min margin {:.4} dB at {:.4} rad/s over {} points (need > 0 everywhere)",
            rep.margin_db,
            rep.critical_omega,
            rep.points.len()
        ),
    ))
}

fn cdob_robust() -> Outcome {
    let t = 0.08;
    let grid = default_grid();
    let identity = grid
        .iter()
        .map(|&w| (delay_uncertainty(t, w).norm() - 2.0 * (w * t / 2.0).sin().abs()).abs())
        .fold(0.0, f64::max);
    let c = pd_tf(&PdGains::default(), false);
    let q = QFilter::new(200.0).map_err(err)?.tf();
    let rep = cdob_small_gain(&c, &nominal_tf(), &q, t, &grid).map_err(err)?;
    Ok((
        rep.pass && identity <= 1e-12,
        format!(
            "wc 200 rad/s, T 0.08 s: {} with min margin {:.4} dB at {:.4} rad/s; |dm| identity error {identity:.2e} (tol 1e-12)",
            if rep.pass { "pass" } else { "fail" },
            rep.margin_db,
            rep.critical_omega
        ),
    ))
}

/// Extracts the quadratic factor `s^2 + u s + v` of `p` nearest the initial
/// guess by Newton iteration on the division remainder.
fn quadratic_factor(p: &Polynomial, mut u: f64, mut v: f64) -> (f64, f64) {
    let remainder = |u: f64, v: f64| {
        let mut r = p.coeffs().to_vec();
        for k in 0..r.len() - 2 {
            let lead = r[k];
            r[k + 1] -= lead * u;
            r[k + 2] -= lead * v;
        }
        let n = r.len();
        (r[n - 2], r[n - 1])
    };
    for _ in 0..100 {
        let (r1, r0) = remainder(u, v);
        let hu = 1e-7 * (1.0 + u.abs());
        let hv = 1e-7 * (1.0 + v.abs());
        let (a1, a0) = remainder(u + hu, v);
        let (b1, b0) = remainder(u, v + hv);
        let j = [
            [(a1 - r1) / hu, (b1 - r1) / hv],
            [(a0 - r0) / hu, (b0 - r0) / hv],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let du = (r1 * j[1][1] - r0 * j[0][1]) / det;
        let dv = (j[0][0] * r0 - j[1][0] * r1) / det;
        u -= du;
        v -= dv;
        if du.abs() + dv.abs() < 1e-14 {
            break;
        }
    }
    (u, v)
}

fn d_stability() -> Outcome {
    let gn = nominal_tf();
    let region = DRegion::default();
    let g = PdGains::default();
    let chk = check_gains(&gn, g.kp, g.kd, &region).map_err(err)?;
    let cp = char_poly(
        &TransferFunction::from_coeffs(&[g.kd, g.kp], &[1.0]).map_err(err)?,
        &gn,
    )
    .map_err(err)?;
    let (u, v) = quadratic_factor(&cp, 1.1, 0.34);
    let disc = u * u - 4.0 * v;
    let oracle = Complex64::new(-u / 2.0, disc.min(0.0).abs().sqrt() / 2.0);
    let target = Complex64::new(-0.548, 0.20);
    let oracle_gap = (oracle - target).norm();
    let solver_gap = (chk.dominant - oracle).norm();
    let map = feasible_map(&gn, &GridSpec::default(), &region).map_err(err)?;
    let connected = map.connected_around(g.kp, g.kd);
    let ok = chk.feasible
        && oracle_gap <= 0.02
        && solver_gap <= 0.02
        && map.feasible_count() > 0
        && connected;
    Ok((
        ok,
        format!(
            "feasible {}, dominant {:.6}{:+.6}j, oracle {:.6}{:+.6}j ({oracle_gap:.4} from -0.548+0.20j, tol 0.02), {} feasible cells, connected {}",
            chk.feasible, chk.dominant.re, chk.dominant.im, oracle.re, oracle.im,
            map.feasible_count(), connected
        ),
    ))
}

fn vertex_table() -> Outcome {
    let base = Scenario::default().with_delay(0.0);
    let table = compare_vertices(&base, &UncertaintyBox::default()).map_err(err)?;
    let red = table.reduction_pct();
    let finite = table
        .rms_pd
        .iter()
        .chain(&table.rms_dob)
        .all(|v| v.is_finite() && *v > 0.0);
    let ok = finite
        && table.rms_dob.iter().zip(&table.rms_pd).all(|(d, p)| d < p)
        && red.iter().all(|r| *r >= 20.0);
    let cols: Vec<String> = table
        .vertices
        .iter()
        .zip(red.iter().zip(table.rms_pd.iter().zip(&table.rms_dob)))
        .map(|(v, (r, (p, d)))| format!("{}: {p:.5} -> {d:.5} ({r:.1}%)", v.label))
        .collect();
    Ok((
        ok,
        format!("rms_y PD -> PD+DOB {} (need >= 20% each)", cols.join(", ")),
    ))
}

fn delay_scenario() -> Outcome {
    let base = Scenario::default().with_delay(0.08);
    let (_, pd) = run_scenario(&base.clone().with_architecture(Architecture::Pd)).map_err(err)?;
    let (_, cdob) = run_scenario(&base.with_architecture(Architecture::PdCdob)).map_err(err)?;
    let y_ok = cdob.rms_y < pd.rms_y;
    let steer_ok = cdob.rms_steer <= pd.rms_steer;
    Ok((
        y_ok && steer_ok,
        format!(
            "rms_y PD {:.5} vs PD+CDOB {:.5} ({}), rms_steer PD {:.5} vs PD+CDOB {:.3e} ({})",
            pd.rms_y,
            cdob.rms_y,
            if y_ok { "ok" } else { "not smaller" },
            pd.rms_steer,
            cdob.rms_steer,
            if steer_ok { "ok" } else { "not smaller" }
        ),
    ))
}

fn ddob_ordering() -> Outcome {
    let base = Scenario {
        disturbance: Profile::step_disturbance(),
        ..Default::default()
    }
    .with_delay(0.08);
    let (_, cdob) =
        run_scenario(&base.clone().with_architecture(Architecture::PdCdob)).map_err(err)?;
    let (_, ddob) = run_scenario(&base.with_architecture(Architecture::PdDdob)).map_err(err)?;
    Ok((
        ddob.rms_y <= cdob.rms_y,
        format!(
            "rms_y PD+DDOB {:.5} vs PD+CDOB {:.5}",
            ddob.rms_y, cdob.rms_y
        ),
    ))
}

fn sample<S: Strategy>(runner: &mut TestRunner, s: &S) -> S::Value {
    s.new_tree(runner).expect("strategy").current()
}

fn kernel_properties() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let mut notes = Vec::new();
    let mut ok = true;

    let mut worst_real = 0.0f64;
    let mut worst_root = 0.0f64;
    for _ in 0..50 {
        let poles = sample(
            &mut runner,
            &proptest::collection::vec(-30.0..-0.05f64, 2..6),
        );
        let num = sample(
            &mut runner,
            &proptest::collection::vec(-10.0..10.0f64, 1..4),
        );
        let den = poles.iter().fold(Polynomial::constant(1.0), |p, r| {
            &p * &Polynomial::new(vec![1.0, -r])
        });
        let g = TransferFunction::new(Polynomial::new(num), den.clone()).map_err(err)?;
        let ss = StateSpaceModel::from_tf(&g).map_err(err)?;
        for k in -2..=2 {
            let s = Complex64::new(0.0, 10f64.powi(k));
            let a = g.eval(s).map_err(err)?;
            worst_real =
                worst_real.max((a - ss.eval(s).map_err(err)?[0]).norm() / (1.0 + a.norm()));
        }
        for r in den.roots().map_err(err)? {
            let bound = (1.0 + den.norm_inf()) * (1.0 + r.norm()).powi(den.degree() as i32);
            worst_root = worst_root.max(den.eval_complex(r).norm() / bound);
        }
    }
    ok &= worst_real <= 1e-9 && worst_root <= 1e-8;
    notes.push(format!(
        "realization {worst_real:.1e} (tol 1e-9), root residual {worst_root:.1e} (tol 1e-8)"
    ));

    let h = 1e-3;
    let g = TransferFunction::from_coeffs(&[40.0], &[1.0, 6.0, 40.0]).map_err(err)?;
    let ss = StateSpaceModel::from_tf(&g).map_err(err)?;
    let mut worst_gain = 0.0f64;
    for w in [0.5, 3.0, 20.0] {
        let window = 3.0 * std::f64::consts::TAU / w;
        let n = ((5.0 + window) / h).round() as usize;
        let t: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
        let u: Vec<f64> = t.iter().map(|t| (w * t).sin()).collect();
        let y = ss.simulate_siso(&u, h).map_err(err)?;
        let k0 = (5.0 / h) as usize;
        let gain = common::fit_phasor(&t[k0..], &y[k0..], w).norm()
            / common::fit_phasor(&t[k0..], &u[k0..], w).norm();
        let expect = g.eval_jw(w).map_err(err)?.norm();
        worst_gain = worst_gain.max((gain - expect).abs() / expect);
    }
    ok &= worst_gain <= 0.01;
    notes.push(format!(
        "sim vs frequency gain {:.3}% (tol 1%)",
        100.0 * worst_gain
    ));

    let xs = sample(&mut runner, &proptest::collection::vec(-1e6..1e6f64, 500));
    let line = DelayLine::new(0.08, h).map_err(err)?;
    let out = line.apply(&xs);
    let exact = line.steps() == 80
        && out[..80].iter().all(|v| v.to_bits() == 0.0f64.to_bits())
        && out[80..]
            .iter()
            .zip(&xs)
            .all(|(a, b)| a.to_bits() == b.to_bits());
    ok &= exact;
    notes.push(format!("80-step delay bit-exact {exact}"));

    let mut worst_lin = 0.0f64;
    let mut worst_sup = 0.0f64;
    for arch in Architecture::ALL {
        let cfg = LoopConfig {
            architecture: arch,
            ..Default::default()
        };
        let lp = ClosedLoop::new(&cfg, h).map_err(err)?;
        let r = |t: f64| 0.3 * (0.4 * t).sin();
        let d = |t: f64| if t >= 2.0 { 0.1 } else { 0.0 };
        let run = |kr: f64, kd: f64| {
            lp.run(8000, |t| Exogenous {
                r: kr * r(t),
                rho: 0.0,
                d: kd * d(t),
            })
        };
        let one = run(1.0, 0.0).map_err(err)?;
        let two = run(2.0, 0.0).map_err(err)?;
        let dist = run(0.0, 1.0).map_err(err)?;
        let both = run(1.0, 1.0).map_err(err)?;
        let doubled: Vec<f64> = one.y.iter().map(|v| 2.0 * v).collect();
        worst_lin = worst_lin.max(common::max_abs_diff(&doubled, &two.y) / common::max_abs(&two.y));
        let sum: Vec<f64> = one.y.iter().zip(&dist.y).map(|(a, b)| a + b).collect();
        worst_sup = worst_sup.max(common::max_abs_diff(&sum, &both.y) / common::max_abs(&both.y));
    }
    ok &= worst_lin <= 1e-6 && worst_sup <= 1e-6;
    notes.push(format!(
        "linearity {worst_lin:.1e}, superposition {worst_sup:.1e} (tol 1e-6)"
    ));

    Ok((ok, notes.join(", ")))
}

fn cdob_degenerations() -> Outcome {
    let gn = nominal_tf();
    let c = pd_tf(&PdGains::default(), false);
    let q = QFilter::new(200.0).map_err(err)?.tf();
    let one = TransferFunction::constant(1.0);
    let t = TransferFunction::feedback(&c.series(&gn), &one).map_err(err)?;
    let (mut worst_t0, mut worst_q1) = (0.0f64, 0.0f64);
    let grid = default_grid();
    for &w in &grid {
        let tv = t.eval_jw(w).map_err(err)?;
        let a = cdob_response(&c, &gn, &q, 0.0, w).map_err(err)?;
        worst_t0 = worst_t0.max((a - tv).norm() / (1.0 + tv.norm()));
        let e = Complex64::new(0.0, -w * 0.08).exp();
        let b = cdob_response(&c, &gn, &one, 0.08, w).map_err(err)?;
        worst_q1 = worst_q1.max((b - tv * e).norm() / (1.0 + tv.norm()));
    }
    Ok((
        worst_t0 <= 1e-12 && worst_q1 <= 1e-12,
        format!(
            "T = 0 error {worst_t0:.1e}, Q = 1 error {worst_q1:.1e} at {} points (tol 1e-12)",
            grid.len()
        ),
    ))
}
