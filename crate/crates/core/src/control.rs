//! PD controller, observer Q filters and the frequency-domain forms of the
//! DOB and CDOB loops.

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::tf::TransferFunction;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdGains {
    pub kp: f64,
    /// Derivative gain [s].
    pub kd: f64,
    /// Derivative filter time constant [s], used only when realizing the
    /// controller for simulation.
    pub tau_d: f64,
}

impl Default for PdGains {
    fn default() -> Self {
        Self {
            kp: 1.0596,
            kd: 0.939,
            tau_d: 0.002,
        }
    }
}

impl PdGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.kp > 0.0 && self.kp.is_finite()) {
            return Err(Error::InvalidInput("kp must be positive".into()));
        }
        if !(self.kd >= 0.0 && self.kd.is_finite()) {
            return Err(Error::InvalidInput("kd must be non-negative".into()));
        }
        if !(self.tau_d > 0.0 && self.tau_d.is_finite()) {
            return Err(Error::InvalidInput("tau_d must be positive".into()));
        }
        Ok(())
    }
}

/// `kp + kd s`, or `kp + kd s / (tau_d s + 1)` when `filtered`.
pub fn pd_tf(g: &PdGains, filtered: bool) -> TransferFunction {
    if filtered {
        TransferFunction::new(
            Polynomial::new([g.kp * g.tau_d + g.kd, g.kp]),
            Polynomial::new([g.tau_d, 1.0]),
        )
        .expect("nonzero denominator")
    } else {
        TransferFunction::new(Polynomial::new([g.kd, g.kp]), Polynomial::constant(1.0))
            .expect("nonzero denominator")
    }
}

/// Second-order unity-gain low-pass `1 / (tau s + 1)^2`, `tau = 1 / omega_c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QFilter {
    pub omega_c: f64,
}

impl QFilter {
    pub fn new(omega_c: f64) -> Result<Self> {
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(Error::InvalidInput("Q cutoff must be positive".into()));
        }
        Ok(Self { omega_c })
    }

    pub fn tau(&self) -> f64 {
        1.0 / self.omega_c
    }

    pub fn tf(&self) -> TransferFunction {
        q_tf(self)
    }
}

pub fn q_tf(q: &QFilter) -> TransferFunction {
    let tau = q.tau();
    TransferFunction::new(
        Polynomial::constant(1.0),
        Polynomial::new([tau * tau, 2.0 * tau, 1.0]),
    )
    .expect("nonzero denominator")
}

/// `Q / Gn` as one rational function, rejecting it when improper.
pub fn q_over_gn(q: &TransferFunction, gn: &TransferFunction) -> Result<TransferFunction> {
    let num = q.num() * gn.den();
    let den = q.den() * gn.num();
    let rd = den.degree() as i64 - num.degree() as i64;
    if rd < 0 || gn.num().is_zero() {
        return Err(Error::Causality {
            relative_degree: rd,
        });
    }
    TransferFunction::new(num, den)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DobTransfers {
    /// `Gn G / (G Q + Gn (1 - Q))`, from the command `u_new` to `y`.
    pub regulation: TransferFunction,
    /// `Gn (1 - Q) / (G Q + Gn (1 - Q))`, from the output disturbance to `y`.
    pub rejection: TransferFunction,
}

/// Closed forms of the inner DOB loop with plant `g`, design model `gn` and
/// filter `q`. Common factors are kept: with `g == gn` the regulation
/// transfer equals `gn` only after clearing denominators.
pub fn dob_transfers(
    g: &TransferFunction,
    gn: &TransferFunction,
    q: &TransferFunction,
) -> Result<DobTransfers> {
    q_over_gn(q, gn)?;
    let (ng, dg) = (g.num(), g.den());
    let (nn, dn) = (gn.num(), gn.den());
    let (nq, dq) = (q.num(), q.den());
    let one_minus_q = dq - nq;
    let den = &(&(ng * nq) * dn) + &(&(nn * &one_minus_q) * dg);
    if den.is_zero() {
        return Err(Error::DegenerateLoop);
    }
    let regulation = TransferFunction::new(&(nn * ng) * dq, den.clone())?;
    let rejection = TransferFunction::new(&(nn * &one_minus_q) * dg, den)?;
    Ok(DobTransfers {
        regulation,
        rejection,
    })
}

/// `C Gn e / (1 + C Gn Q + C Gn (1 - Q) e)` with `e = exp(-j omega T)`: the
/// reference-to-output response of the delayed CDOB loop.
pub fn cdob_response(
    c: &TransferFunction,
    gn: &TransferFunction,
    q: &TransferFunction,
    delay: f64,
    omega: f64,
) -> Result<Complex64> {
    if delay < 0.0 {
        return Err(Error::NegativeDelay(delay));
    }
    let s = Complex64::new(0.0, omega);
    let cg = c.eval(s)? * gn.eval(s)?;
    let qv = q.eval(s)?;
    let e = delay_factor(delay, omega);
    let den = 1.0 + cg * qv + cg * (1.0 - qv) * e;
    if den.norm() < 1e-12 {
        return Err(Error::NearSingular {
            omega,
            magnitude: den.norm(),
        });
    }
    Ok(cg * e / den)
}

/// `exp(-j omega T)`.
pub fn delay_factor(delay: f64, omega: f64) -> Complex64 {
    let phi = -omega * delay;
    Complex64::new(phi.cos(), phi.sin())
}
