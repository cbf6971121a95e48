//! Small-gain robust stability tests on a sampled frequency grid.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::control::delay_factor;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::freq::validate_grid;
use crate::tf::TransferFunction;
use crate::vehicle::{nominal_tf, plant_tf, UncertaintyBox};

/// Margins at or below this many dB count as failures.
pub const TIE_DB: f64 = 1e-9;

/// What the vertex plants are compared against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnvelopeReference {
    /// The fixed design model the observers invert.
    #[default]
    DesignNominal,
    /// The parametric builder evaluated at the box's nominal point.
    ParametricNominal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyEnvelope {
    pub grid: Vec<f64>,
    /// `max_v |G_v(jw) / G_ref(jw) - 1|`.
    pub magnitude: Vec<f64>,
    /// Index of the vertex attaining the max at each grid point.
    pub argmax: Vec<usize>,
}

/// Pointwise worst-case multiplicative error of `plants` against `reference`.
pub fn envelope_of(
    plants: &[TransferFunction],
    reference: &TransferFunction,
    grid: &[f64],
) -> Result<UncertaintyEnvelope> {
    validate_grid(grid)?;
    if plants.is_empty() {
        return Err(Error::InvalidInput("no plants in the envelope".into()));
    }
    let mut magnitude = Vec::with_capacity(grid.len());
    let mut argmax = Vec::with_capacity(grid.len());
    for &w in grid {
        let gref = reference.eval_jw(w)?;
        let mut best = (0usize, 0.0f64);
        for (i, g) in plants.iter().enumerate() {
            let dm = (g.eval_jw(w)? / gref - 1.0).norm();
            if i == 0 || dm > best.1 {
                best = (i, dm);
            }
        }
        argmax.push(best.0);
        magnitude.push(best.1);
    }
    Ok(UncertaintyEnvelope {
        grid: grid.to_vec(),
        magnitude,
        argmax,
    })
}

/// Envelope over the four corners of `bx`.
pub fn delta_m_envelope(
    bx: &UncertaintyBox,
    grid: &[f64],
    reference: EnvelopeReference,
) -> Result<UncertaintyEnvelope> {
    let plants = bx
        .vertices()?
        .iter()
        .map(|v| plant_tf(&v.params))
        .collect::<Result<Vec<_>>>()?;
    let gref = match reference {
        EnvelopeReference::DesignNominal => nominal_tf(),
        EnvelopeReference::ParametricNominal => plant_tf(&bx.nominal())?,
    };
    envelope_of(&plants, &gref, grid)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportPoint {
    pub omega: f64,
    pub test: f64,
    /// May be `+inf` where the uncertainty vanishes.
    pub bound: f64,
    /// `20 log10(bound / test)`; `+inf` when the bound is infinite or the
    /// test value is zero.
    pub margin_db: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub pass: bool,
    /// Minimum margin over the grid [dB].
    pub margin_db: f64,
    pub critical_omega: f64,
    pub points: Vec<ReportPoint>,
    /// First grid frequency at which the nominal loop was numerically
    /// singular, if any. Such a report always fails.
    pub nominal_singular_at: Option<f64>,
}

fn margin_db(test: f64, bound: f64) -> f64 {
    if bound.is_infinite() || test == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (bound / test).log10()
    }
}

fn report(points: Vec<ReportPoint>, nominal_singular_at: Option<f64>) -> StabilityReport {
    let (critical_omega, margin) = points.iter().map(|p| (p.omega, p.margin_db)).fold(
        (points[0].omega, f64::INFINITY),
        |acc, (w, m)| if m < acc.1 { (w, m) } else { acc },
    );
    let pass = nominal_singular_at.is_none() && points.iter().all(|p| p.margin_db > TIE_DB);
    StabilityReport {
        pass,
        margin_db: margin,
        critical_omega,
        points,
        nominal_singular_at,
    }
}

/// `|Q(jw)| < 1 / env(w)` at every grid point.
pub fn dob_small_gain(q: &TransferFunction, env: &UncertaintyEnvelope) -> Result<StabilityReport> {
    let mut points = Vec::with_capacity(env.grid.len());
    for (&w, &e) in env.grid.iter().zip(&env.magnitude) {
        let test = q.eval_jw(w)?.norm();
        let bound = if e == 0.0 { f64::INFINITY } else { 1.0 / e };
        points.push(ReportPoint {
            omega: w,
            test,
            bound,
            margin_db: margin_db(test, bound),
        });
    }
    Ok(report(points, None))
}

/// `exp(-j w T) - 1`, the delay viewed as multiplicative uncertainty.
pub fn delay_uncertainty(delay: f64, omega: f64) -> Complex64 {
    delay_factor(delay, omega) - 1.0
}

/// `C (1 - Q) Gn e / (1 + C Gn Q)`, the loop seen by the delay uncertainty.
pub fn cdob_nominal_loop(
    c: &TransferFunction,
    gn: &TransferFunction,
    q: &TransferFunction,
    delay: f64,
    omega: f64,
) -> Result<Complex64> {
    let s = Complex64::new(0.0, omega);
    let cg = c.eval(s)? * gn.eval(s)?;
    let qv = q.eval(s)?;
    let den = 1.0 + cg * qv;
    if den.norm() < 1e-12 {
        return Err(Error::NearSingular {
            omega,
            magnitude: den.norm(),
        });
    }
    Ok(cg * (1.0 - qv) * delay_factor(delay, omega) / den)
}

/// `|Ln / (1 + Ln)| < 1 / |exp(-j w T) - 1|` at every grid point.
pub fn cdob_small_gain(
    c: &TransferFunction,
    gn: &TransferFunction,
    q: &TransferFunction,
    delay: f64,
    grid: &[f64],
) -> Result<StabilityReport> {
    if delay < 0.0 {
        return Err(Error::NegativeDelay(delay));
    }
    validate_grid(grid)?;
    let mut points = Vec::with_capacity(grid.len());
    let mut singular = None;
    for &w in grid {
        let ln = cdob_nominal_loop(c, gn, q, delay, w)?;
        let dm = delay_uncertainty(delay, w).norm();
        let bound = if dm == 0.0 { f64::INFINITY } else { 1.0 / dm };
        let one_plus = (1.0 + ln).norm();
        let test = if one_plus < 1e-12 {
            singular.get_or_insert(w);
            f64::INFINITY
        } else {
            ln.norm() / one_plus
        };
        let margin = if test.is_infinite() {
            f64::NEG_INFINITY
        } else {
            margin_db(test, bound)
        };
        points.push(ReportPoint {
            omega: w,
            test,
            bound,
            margin_db: margin,
        });
    }
    Ok(report(points, singular))
}

/// Largest cutoff among `candidates` whose Q filter passes the DOB test.
pub fn largest_passing_cutoff(
    candidates: &[f64],
    env: &UncertaintyEnvelope,
) -> Result<Option<f64>> {
    let mut best = None;
    for &wc in candidates {
        let q = crate::control::QFilter::new(wc)?.tf();
        if dob_small_gain(&q, env)?.pass {
            best = Some(best.map_or(wc, |b: f64| b.max(wc)));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freq::default_grid;

    #[test]
    fn delay_magnitude_identity() {
        let t = 0.08;
        let pi = core::f64::consts::PI;
        assert!((delay_uncertainty(t, pi / t).norm() - 2.0).abs() < 1e-12);
        for w in default_grid() {
            let expect = 2.0 * (w * t / 2.0).sin().abs();
            assert!((delay_uncertainty(t, w).norm() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_envelope_passes_with_infinite_margin() {
        let g = nominal_tf();
        let env = envelope_of(core::slice::from_ref(&g), &g, &default_grid()).unwrap();
        assert!(env.magnitude.iter().all(|m| *m == 0.0));
        let rep = dob_small_gain(&crate::control::QFilter::new(5.0).unwrap().tf(), &env).unwrap();
        assert!(rep.pass);
        assert!(rep.margin_db.is_infinite());
    }

    #[test]
    fn zero_delay_passes_with_infinite_margin() {
        let c = crate::control::pd_tf(&Default::default(), false);
        let q = crate::control::QFilter::new(200.0).unwrap().tf();
        let rep = cdob_small_gain(&c, &nominal_tf(), &q, 0.0, &default_grid()).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.margin_db, f64::INFINITY);
    }

    #[test]
    fn ties_fail() {
        let pts = alloc::vec![ReportPoint {
            omega: 1.0,
            test: 1.0,
            bound: 1.0,
            margin_db: 0.0
        }];
        assert!(!report(pts, None).pass);
    }
}
