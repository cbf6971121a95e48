mod common;

use num_complex::Complex64;
use pathdob_core::control::{cdob_response, dob_transfers, pd_tf, PdGains, QFilter};
use pathdob_core::freq::{default_grid, logspace};
use pathdob_core::linalg::eigenvalues;
use pathdob_core::vehicle::{build_plant, nominal_tf, plant_tf, UncertaintyBox, VehicleParams};
use pathdob_core::TransferFunction;

fn j(w: f64) -> Complex64 {
    Complex64::new(0.0, w)
}

fn closed(c: &TransferFunction, g: &TransferFunction) -> TransferFunction {
    TransferFunction::feedback(&c.series(g), &TransferFunction::constant(1.0)).unwrap()
}

#[test]
fn nominal_plant_poles() {
    let a = build_plant(&VehicleParams::default()).unwrap();
    let mut ev = eigenvalues(a.a()).unwrap();
    ev.sort_by(|a, b| b.re.total_cmp(&a.re));
    assert!(ev[0].norm() < 1e-12 && ev[1].norm() < 1e-12);
    // numpy.linalg.eigvals on the same matrix
    assert!((ev[2].re + 40.470241117317386).abs() < 1e-9);
    assert!((ev[3].re + 134.5147366444852).abs() < 1e-9);
}

#[test]
fn friction_folding_identity() {
    let dry = VehicleParams::default();
    let wet = VehicleParams {
        m: dry.m / 2.0,
        j: dry.j / 2.0,
        mu: 0.5,
        ..dry
    };
    assert_eq!(plant_tf(&dry).unwrap(), plant_tf(&wet).unwrap());
}

#[test]
fn plant_structure() {
    for v in UncertaintyBox::default().vertices().unwrap() {
        let g = plant_tf(&v.params).unwrap();
        assert_eq!((g.num().degree(), g.den().degree()), (2, 4));
        let den = g.den();
        let n = den.coeffs().len();
        assert_eq!(den.coeffs()[n - 1], 0.0);
        assert_eq!(den.coeffs()[n - 2], 0.0);
        let poles = g.poles().unwrap();
        assert_eq!(poles.iter().filter(|p| p.norm() == 0.0).count(), 2);
        assert_eq!(poles.iter().filter(|p| p.re < 0.0).count(), 2);
    }
}

#[test]
fn plant_tf_matches_realization() {
    for v in UncertaintyBox::default().vertices().unwrap() {
        let g = plant_tf(&v.params).unwrap();
        let ss = build_plant(&v.params).unwrap();
        let fl = ss.channel_tf(0, 0).unwrap();
        for w in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let a = g.eval_jw(w).unwrap();
            assert!(common::rel_err(ss.eval_channel(j(w), 0, 0).unwrap(), a) < 1e-9);
            assert!(common::rel_err(fl.eval_jw(w).unwrap(), a) < 1e-9);
        }
    }
}

#[test]
fn far_vertex_at_unit_frequency() {
    let bx = UncertaintyBox::default();
    let d = bx.params_at(7.0, 5000.0);
    assert_eq!((d.m, d.mu), (2000.0, 0.4));
    // numpy: C (jI - A)^-1 B with the assembled matrices
    let frozen = Complex64::new(-1.4089504855265653, -0.9404009023582989);
    assert!(common::rel_err(plant_tf(&d).unwrap().eval_jw(1.0).unwrap(), frozen) < 1e-9);
}

#[test]
fn parametric_and_design_nominal_stay_finite_apart() {
    let gp = plant_tf(&VehicleParams::default()).unwrap();
    let gn = nominal_tf();
    for w in logspace(0.01, 1000.0, 200).unwrap() {
        let ratio = (gp.eval_jw(w).unwrap() / gn.eval_jw(w).unwrap()).norm();
        assert!(ratio.is_finite() && ratio > 0.0);
    }
}

#[test]
fn regulation_equals_nominal_for_nominal_plant() {
    let gn = nominal_tf();
    let q = QFilter::new(5.0).unwrap().tf();
    let t = dob_transfers(&gn, &gn, &q).unwrap();
    let resid = &(t.regulation.num() * gn.den()) - &(t.regulation.den() * gn.num());
    let scale = (t.regulation.num() * gn.den()).norm2();
    assert!(resid.norm2() <= 1e-9 * scale);
}

#[test]
fn rejection_vanishes_at_low_frequency() {
    let gn = nominal_tf();
    let q = QFilter::new(5.0).unwrap().tf();
    let t = dob_transfers(&gn, &gn, &q).unwrap();
    let lo = t.rejection.eval_jw(1e-3).unwrap().norm();
    let one = t.rejection.eval_jw(1.0).unwrap().norm();
    assert!(lo < 1e-2 * one);
}

#[test]
fn dob_pulls_far_vertex_toward_nominal() {
    let gn = nominal_tf();
    let g = plant_tf(&UncertaintyBox::default().params_at(7.0, 5000.0)).unwrap();
    let q = QFilter::new(5.0).unwrap().tf();
    let reg = dob_transfers(&g, &gn, &q).unwrap().regulation;
    let w = 0.1;
    let gnv = gn.eval_jw(w).unwrap();
    let with_dob = (reg.eval_jw(w).unwrap() - gnv).norm() / gnv.norm();
    let without = (g.eval_jw(w).unwrap() - gnv).norm() / gnv.norm();
    assert!(with_dob < without, "{with_dob} vs {without}");
}

#[test]
fn observer_mismatch_below_plant_spread_at_low_frequency() {
    let gn = nominal_tf();
    let c = pd_tf(&PdGains::default(), false);
    let q = QFilter::new(5.0).unwrap().tf();
    let plants: Vec<_> = UncertaintyBox::default()
        .vertices()
        .unwrap()
        .iter()
        .map(|v| plant_tf(&v.params).unwrap())
        .collect();
    let tn = closed(&c, &gn);
    for w in logspace(0.01, 0.5, 60).unwrap() {
        let gnv = gn.eval_jw(w).unwrap();
        let tnv = tn.eval_jw(w).unwrap();
        let mut open_spread: f64 = 0.0;
        let mut closed_spread: f64 = 0.0;
        let mut open_dob: f64 = 0.0;
        let mut closed_dob: f64 = 0.0;
        for g in &plants {
            let reg = dob_transfers(g, &gn, &q).unwrap().regulation;
            open_spread = open_spread.max((g.eval_jw(w).unwrap() - gnv).norm());
            open_dob = open_dob.max((reg.eval_jw(w).unwrap() - gnv).norm());
            closed_spread = closed_spread.max((closed(&c, g).eval_jw(w).unwrap() - tnv).norm());
            closed_dob = closed_dob.max((closed(&c, &reg).eval_jw(w).unwrap() - tnv).norm());
        }
        assert!(
            open_dob <= open_spread,
            "open loop at {w}: {open_dob} > {open_spread}"
        );
        assert!(
            closed_dob <= closed_spread,
            "closed loop at {w}: {closed_dob} > {closed_spread}"
        );
    }
}

#[test]
fn cdob_response_degenerations() {
    let gn = nominal_tf();
    let c = pd_tf(&PdGains::default(), false);
    let q = QFilter::new(200.0).unwrap().tf();
    let t = closed(&c, &gn);
    let one = TransferFunction::constant(1.0);
    for w in default_grid() {
        let tv = t.eval_jw(w).unwrap();
        let a = cdob_response(&c, &gn, &q, 0.0, w).unwrap();
        assert!((a - tv).norm() <= 1e-12 * (1.0 + tv.norm()));
        let e = Complex64::new(0.0, -w * 0.08).exp();
        let b = cdob_response(&c, &gn, &one, 0.08, w).unwrap();
        assert!((b - tv * e).norm() <= 1e-12 * (1.0 + tv.norm()));
    }
    let dc = cdob_response(&c, &gn, &q, 0.08, 1e-4).unwrap().norm();
    assert!((dc - 1.0).abs() < 1e-3);
}
