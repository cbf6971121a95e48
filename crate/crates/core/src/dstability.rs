//! Parameter-space PD design against a D-stability region.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::tf::TransferFunction;

/// Admissible pole region: decay rate at least `sigma`, inside the damping
/// cone of half-angle `theta_deg - 90` around the negative real axis, and
/// (for the dominant pair) within radius `radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DRegion {
    pub sigma: f64,
    pub theta_deg: f64,
    pub radius: f64,
}

impl Default for DRegion {
    fn default() -> Self {
        Self {
            sigma: 0.3,
            theta_deg: 135.0,
            radius: 1.3,
        }
    }
}

impl DRegion {
    pub fn validate(&self) -> Result<()> {
        if self.sigma.is_nan() || self.sigma <= 0.0 {
            return Err(Error::InvalidInput("sigma must be positive".into()));
        }
        if !(self.theta_deg > 90.0 && self.theta_deg <= 180.0) {
            return Err(Error::InvalidInput(
                "theta must lie in (90, 180] degrees".into(),
            ));
        }
        if self.radius.is_nan() || self.radius <= self.sigma {
            return Err(Error::InvalidInput("radius must exceed sigma".into()));
        }
        Ok(())
    }

    /// Half-angle of the damping cone [deg].
    pub fn cone_deg(&self) -> f64 {
        self.theta_deg - 90.0
    }
}

/// Angle between `pole` and the negative real axis [deg], in `[0, 180]`.
pub fn cone_angle_deg(pole: Complex64) -> f64 {
    pole.im.abs().atan2(-pole.re).to_degrees()
}

pub fn in_d_region(pole: Complex64, region: &DRegion, dominant: bool) -> bool {
    pole.re <= -region.sigma
        && cone_angle_deg(pole) <= region.cone_deg()
        && (!dominant || pole.norm() <= region.radius)
}

/// Monic `den(C) den(Gn) + num(C) num(Gn)`.
pub fn char_poly(c: &TransferFunction, gn: &TransferFunction) -> Result<Polynomial> {
    let p = &(c.den() * gn.den()) + &(c.num() * gn.num());
    if p.is_zero() {
        return Err(Error::DegenerateLoop);
    }
    Ok(p.monic())
}

/// Per-pole slack against the region: positive means strictly inside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Margins {
    /// `min(-Re p) - sigma` over all poles.
    pub sigma: f64,
    /// `cone - max angle` over all poles [deg].
    pub cone_deg: f64,
    /// `R - |p_dom|`.
    pub radius: f64,
}

impl Margins {
    pub fn all_positive(&self) -> bool {
        self.sigma > 0.0 && self.cone_deg > 0.0 && self.radius > 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoleCheck {
    pub feasible: bool,
    pub poles: Vec<Complex64>,
    /// Pole with the largest real part (the upper one of a complex pair).
    pub dominant: Complex64,
    pub margins: Margins,
}

/// The dominant-pair rule: every pole must meet the decay and damping
/// constraints; only the slowest pole is held to the radius.
pub fn check_poles(poles: Vec<Complex64>, region: &DRegion) -> Result<PoleCheck> {
    let dominant = poles
        .iter()
        .copied()
        .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)))
        .ok_or_else(|| Error::InvalidInput("no poles to check".into()))?;
    let feasible =
        in_d_region(dominant, region, true) && poles.iter().all(|p| in_d_region(*p, region, false));
    let margins = Margins {
        sigma: poles.iter().map(|p| -p.re).fold(f64::INFINITY, f64::min) - region.sigma,
        cone_deg: region.cone_deg() - poles.iter().map(|p| cone_angle_deg(*p)).fold(0.0, f64::max),
        radius: region.radius - dominant.norm(),
    };
    Ok(PoleCheck {
        feasible,
        poles,
        dominant,
        margins,
    })
}

/// Closed-loop poles of `kp + kd s` around `gn`, checked against `region`.
pub fn check_gains(gn: &TransferFunction, kp: f64, kd: f64, region: &DRegion) -> Result<PoleCheck> {
    let c = TransferFunction::from_coeffs(&[kd, kp], &[1.0])?;
    check_poles(char_poly(&c, gn)?.roots()?, region)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub kp: (f64, f64),
    pub kd: (f64, f64),
    pub resolution: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            kp: (0.0, 3.0),
            kd: (0.0, 3.0),
            resolution: 0.02,
        }
    }
}

fn axis(range: (f64, f64), res: f64) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(res > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidInput(
            "gain grid needs lo < hi and resolution > 0".into(),
        ));
    }
    let n = ((hi - lo) / res + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * res).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub feasible: bool,
    /// `None` when the characteristic polynomial could not be solved.
    pub dominant: Option<Complex64>,
}

/// Feasibility of every `(kp, kd)` grid point, stored `kp`-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GainGrid {
    pub kp: Vec<f64>,
    pub kd: Vec<f64>,
    pub cells: Vec<Cell>,
}

pub fn feasible_map(gn: &TransferFunction, spec: &GridSpec, region: &DRegion) -> Result<GainGrid> {
    region.validate()?;
    let kp = axis(spec.kp, spec.resolution)?;
    let kd = axis(spec.kd, spec.resolution)?;
    let mut cells = Vec::with_capacity(kp.len() * kd.len());
    for &p in &kp {
        for &d in &kd {
            cells.push(match check_gains(gn, p, d, region) {
                Ok(chk) => Cell {
                    feasible: chk.feasible,
                    dominant: Some(chk.dominant),
                },
                Err(_) => Cell {
                    feasible: false,
                    dominant: None,
                },
            });
        }
    }
    Ok(GainGrid { kp, kd, cells })
}

impl GainGrid {
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.kd.len() + j]
    }

    pub fn feasible_count(&self) -> usize {
        self.cells.iter().filter(|c| c.feasible).count()
    }

    /// Grid indices nearest to `(kp, kd)`.
    pub fn nearest(&self, kp: f64, kd: f64) -> (usize, usize) {
        let near = |axis: &[f64], v: f64| {
            (0..axis.len())
                .min_by(|&a, &b| (axis[a] - v).abs().total_cmp(&(axis[b] - v).abs()))
                .unwrap_or(0)
        };
        (near(&self.kp, kp), near(&self.kd, kd))
    }

    fn neighbors(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> {
        let (ni, nj) = (self.kp.len() as isize, self.kd.len() as isize);
        [(-1, 0), (1, 0), (0, -1), (0, 1)]
            .into_iter()
            .filter_map(move |(di, dj)| {
                let (a, b) = (i as isize + di, j as isize + dj);
                (a >= 0 && b >= 0 && a < ni && b < nj).then_some((a as usize, b as usize))
            })
    }

    /// 4-connected feasible component containing `(i, j)`; empty when that
    /// cell is infeasible.
    pub fn component(&self, i: usize, j: usize) -> Vec<(usize, usize)> {
        if !self.cell(i, j).feasible {
            return Vec::new();
        }
        let mut seen = vec![false; self.cells.len()];
        let mut stack = vec![(i, j)];
        let mut out = Vec::new();
        seen[i * self.kd.len() + j] = true;
        while let Some((a, b)) = stack.pop() {
            out.push((a, b));
            for (c, d) in self.neighbors(a, b) {
                let k = c * self.kd.len() + d;
                if !seen[k] && self.cells[k].feasible {
                    seen[k] = true;
                    stack.push((c, d));
                }
            }
        }
        out
    }

    /// True when the nearest cell to `(kp, kd)` is feasible and every
    /// feasible cell belongs to its 4-connected component.
    pub fn connected_around(&self, kp: f64, kd: f64) -> bool {
        let (i, j) = self.nearest(kp, kd);
        let comp = self.component(i, j);
        !comp.is_empty() && comp.len() == self.feasible_count()
    }

    /// Feasible cells with at least one infeasible or out-of-grid neighbor.
    pub fn boundary(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.kp.len() {
            for j in 0..self.kd.len() {
                if !self.cell(i, j).feasible {
                    continue;
                }
                let interior = self.neighbors(i, j).count() == 4
                    && self.neighbors(i, j).all(|(a, b)| self.cell(a, b).feasible);
                if !interior {
                    out.push((i, j));
                }
            }
        }
        out
    }
}
