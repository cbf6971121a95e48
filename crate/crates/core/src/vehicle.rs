//! Linear single-track path-following plant and its parametric uncertainty box.
//!
//! States are `[beta, r, dpsi, y]` (side slip, yaw rate, heading error to the
//! path, lateral deviation); inputs are `[delta_f, rho_ref]` (front steering
//! angle, path curvature). Friction enters through the virtual mass and
//! inertia `m / mu`, `J / mu`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::poly::Polynomial;
use crate::ss::StateSpaceModel;
use crate::tf::TransferFunction;

pub const KMH_PER_MS: f64 = 3.6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleParams {
    /// Mass [kg].
    pub m: f64,
    /// Yaw moment of inertia [kg m^2].
    pub j: f64,
    /// CG to front axle [m].
    pub lf: f64,
    /// CG to rear axle [m].
    pub lr: f64,
    /// Front cornering stiffness [N/rad].
    pub cf: f64,
    /// Rear cornering stiffness [N/rad].
    pub cr: f64,
    /// Forward speed [km/h].
    pub v_kmh: f64,
    /// Road friction coefficient.
    pub mu: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            m: 2000.0,
            j: 3728.0,
            lf: 1.3008,
            lr: 1.5453,
            cf: 195000.0,
            cr: 50000.0,
            v_kmh: 5.0,
            mu: 1.0,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("m", self.m),
            ("J", self.j),
            ("lf", self.lf),
            ("lr", self.lr),
            ("cf", self.cf),
            ("cr", self.cr),
            ("mu", self.mu),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.mu > 1.0 {
            return Err(Error::InvalidInput(format!(
                "mu must lie in (0, 1], got {}",
                self.mu
            )));
        }
        if self.v_kmh == 0.0 {
            return Err(Error::SingularModel("zero forward speed".into()));
        }
        if !(self.v_kmh > 0.0 && self.v_kmh.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "speed must be positive, got {}",
                self.v_kmh
            )));
        }
        Ok(())
    }

    pub fn v_ms(&self) -> f64 {
        self.v_kmh / KMH_PER_MS
    }

    pub fn virtual_mass(&self) -> f64 {
        self.m / self.mu
    }

    pub fn virtual_inertia(&self) -> f64 {
        self.j / self.mu
    }

    /// The 2x2 side-slip / yaw-rate block `(a11, a12, a21, a22)` and steering
    /// column `(b1, b2)`.
    fn lateral_block(&self) -> ([f64; 4], [f64; 2]) {
        let (mt, jt, v) = (self.virtual_mass(), self.virtual_inertia(), self.v_ms());
        let (cf, cr, lf, lr) = (self.cf, self.cr, self.lf, self.lr);
        let a11 = -(cf + cr) / (mt * v);
        let a12 = -1.0 + (cr * lr - cf * lf) / (mt * v * v);
        let a21 = (cr * lr - cf * lf) / jt;
        let a22 = -(cf * lf * lf + cr * lr * lr) / (jt * v);
        ([a11, a12, a21, a22], [cf / (mt * v), cf * lf / jt])
    }
}

/// Four-state, two-input (`delta_f`, `rho_ref`), one-output (`y`) plant.
pub fn build_plant(p: &VehicleParams) -> Result<StateSpaceModel> {
    p.validate()?;
    let v = p.v_ms();
    let ([a11, a12, a21, a22], [b1, b2]) = p.lateral_block();
    let a = Matrix::from_rows(&[
        &[a11, a12, 0.0, 0.0],
        &[a21, a22, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[v, 0.0, v, 0.0],
    ])?;
    let b = Matrix::from_rows(&[&[b1, 0.0], &[b2, 0.0], &[0.0, -v], &[0.0, 0.0]])?;
    let c = Matrix::from_rows(&[&[0.0, 0.0, 0.0, 1.0]])?;
    StateSpaceModel::new(a, b, c, Matrix::zeros(1, 2))
}

/// As [`build_plant`] with a second output, the heading error `dpsi`.
pub fn build_plant_with_heading(p: &VehicleParams) -> Result<StateSpaceModel> {
    let plant = build_plant(p)?;
    let c = Matrix::from_rows(&[&[0.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 1.0, 0.0]])?;
    plant.with_outputs(c, Matrix::zeros(2, 2))
}

/// `y / delta_f`, assembled from the block structure so that the double
/// integrator factor `s^2` of the denominator is exact.
pub fn plant_tf(p: &VehicleParams) -> Result<TransferFunction> {
    p.validate()?;
    let v = p.v_ms();
    let ([a11, a12, a21, a22], [b1, b2]) = p.lateral_block();
    // beta = (b1 (s - a22) + a12 b2) / det, r = (b2 (s - a11) + a21 b1) / det,
    // y = v (s beta + r) / s^2
    let num = Polynomial::new([
        v * b1,
        v * (a12 * b2 - a22 * b1 + b2),
        v * (a21 * b1 - a11 * b2),
    ]);
    let den = Polynomial::new([1.0, -(a11 + a22), a11 * a22 - a12 * a21, 0.0, 0.0]);
    TransferFunction::new(num, den)
}

/// `y / rho_ref = -V^2 / s^2` for speed `v_kmh`.
pub fn curvature_tf(v_kmh: f64) -> Result<TransferFunction> {
    if v_kmh == 0.0 {
        return Err(Error::SingularModel("zero forward speed".into()));
    }
    let v = v_kmh / KMH_PER_MS;
    TransferFunction::from_coeffs(&[-v * v], &[1.0, 0.0, 0.0])
}

/// The design nominal `(227.6 s^2 + 84790 s + 36270) / (s^4 + 459.2 s^3 + 33290 s^2)`.
pub fn nominal_tf() -> TransferFunction {
    TransferFunction::from_coeffs(&[227.6, 84790.0, 36270.0], &[1.0, 459.2, 33290.0, 0.0, 0.0])
        .expect("static coefficients")
}

/// Operating region spanned by speed and virtual mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncertaintyBox {
    pub v_kmh: (f64, f64),
    pub virtual_mass: (f64, f64),
    pub nominal_v_kmh: f64,
    pub nominal_virtual_mass: f64,
    /// Supplies the parameters the box does not vary (geometry, stiffnesses,
    /// inertia) and the physical mass used to realize each vertex.
    pub base: VehicleParams,
}

impl Default for UncertaintyBox {
    fn default() -> Self {
        Self {
            v_kmh: (4.0, 7.0),
            virtual_mass: (1600.0, 5000.0),
            nominal_v_kmh: 5.0,
            nominal_virtual_mass: 2000.0,
            base: VehicleParams::default(),
        }
    }
}

/// One corner of the box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    pub label: char,
    pub v_kmh: f64,
    pub virtual_mass: f64,
    pub params: VehicleParams,
}

impl UncertaintyBox {
    /// A degenerate box whose corners all coincide with its nominal point.
    pub fn collapsed(base: VehicleParams) -> Self {
        let mt = base.virtual_mass();
        Self {
            v_kmh: (base.v_kmh, base.v_kmh),
            virtual_mass: (mt, mt),
            nominal_v_kmh: base.v_kmh,
            nominal_virtual_mass: mt,
            base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (v0, v1) = self.v_kmh;
        let (m0, m1) = self.virtual_mass;
        if !(v0 > 0.0 && v1 >= v0 && m0 > 0.0 && m1 >= m0) {
            return Err(Error::InvalidInput(
                "box ranges must be positive and ordered".into(),
            ));
        }
        if !(v0..=v1).contains(&self.nominal_v_kmh)
            || !(m0..=m1).contains(&self.nominal_virtual_mass)
        {
            return Err(Error::InvalidInput(
                "nominal point lies outside the box".into(),
            ));
        }
        self.base.validate()
    }

    /// Parameters at `(v_kmh, virtual_mass)`: the physical mass is the base
    /// mass capped at the target, and friction makes up the rest.
    pub fn params_at(&self, v_kmh: f64, virtual_mass: f64) -> VehicleParams {
        let m = self.base.m.min(virtual_mass);
        VehicleParams {
            m,
            v_kmh,
            mu: m / virtual_mass,
            ..self.base
        }
    }

    pub fn nominal(&self) -> VehicleParams {
        self.params_at(self.nominal_v_kmh, self.nominal_virtual_mass)
    }

    /// Corners in the fixed order a = (V min, m~ min), b = (V max, m~ min),
    /// c = (V min, m~ max), d = (V max, m~ max).
    pub fn vertices(&self) -> Result<Vec<Vertex>> {
        self.validate()?;
        let (v0, v1) = self.v_kmh;
        let (m0, m1) = self.virtual_mass;
        Ok([('a', v0, m0), ('b', v1, m0), ('c', v0, m1), ('d', v1, m1)]
            .into_iter()
            .map(|(label, v, mt)| Vertex {
                label,
                v_kmh: v,
                virtual_mass: mt,
                params: self.params_at(v, mt),
            })
            .collect())
    }
}
