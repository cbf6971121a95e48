//! Rational transfer functions of the Laplace variable.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// `num(s) / den(s)` with real coefficients.
///
/// Composition never cancels common factors; see [`TransferFunction::minimal`].
#[derive(Clone, Debug, PartialEq)]
pub struct TransferFunction {
    num: Polynomial,
    den: Polynomial,
}

impl TransferFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput(
                "transfer function denominator is zero".into(),
            ));
        }
        Ok(Self { num, den })
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))
    }

    pub fn constant(k: f64) -> Self {
        Self {
            num: Polynomial::constant(k),
            den: Polynomial::constant(1.0),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    /// `deg(den) - deg(num)`. The zero function counts as degree `deg(den)`.
    pub fn relative_degree(&self) -> i64 {
        self.den.degree() as i64 - self.num.degree() as i64
    }

    pub fn is_proper(&self) -> bool {
        self.relative_degree() >= 0
    }

    /// Evaluates at `s`. Landing on a root of the denominator (to within
    /// rounding of the nested evaluation) is an error rather than infinity.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let d = self.den.eval_complex(s);
        if d.norm() <= 8.0 * f64::EPSILON * self.den.eval_abs_scale(s) {
            return Err(Error::PoleEvaluation { s });
        }
        Ok(self.num.eval_complex(s) / d)
    }

    pub fn eval_jw(&self, omega: f64) -> Result<Complex64> {
        self.eval(Complex64::new(0.0, omega))
    }

    pub fn dc_gain(&self) -> Result<f64> {
        self.eval(Complex64::new(0.0, 0.0)).map(|v| v.re)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn series(&self, other: &Self) -> Self {
        Self {
            num: &self.num * &other.num,
            den: &self.den * &other.den,
        }
    }

    pub fn parallel(&self, other: &Self) -> Self {
        Self {
            num: &(&self.num * &other.den) + &(&other.num * &self.den),
            den: &self.den * &other.den,
        }
    }

    /// `self - other`.
    pub fn difference(&self, other: &Self) -> Self {
        self.parallel(&other.scale(-1.0))
    }

    /// Reciprocal `den / num`.
    pub fn inverse(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    /// `forward / (1 + forward * feedback_path)` (negative feedback) as a
    /// single rational function.
    pub fn feedback(forward: &Self, feedback_path: &Self) -> Result<Self> {
        let num = &forward.num * &feedback_path.den;
        let den = &(&forward.den * &feedback_path.den) + &(&forward.num * &feedback_path.num);
        if den.is_zero() {
            return Err(Error::DegenerateLoop);
        }
        Ok(Self { num, den })
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        if self.den.degree() == 0 {
            return Ok(Vec::new());
        }
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.is_zero() || self.num.degree() == 0 {
            return Ok(Vec::new());
        }
        self.num.roots()
    }

    /// Cancels pole/zero pairs closer than `tol * (1 + |p|)`.
    ///
    /// Diagnostic only: the result is rebuilt from roots, so coefficients are
    /// not bit-identical to the input even when nothing cancels.
    pub fn minimal(&self, tol: f64) -> Result<Self> {
        if self.num.is_zero() {
            return Ok(Self {
                num: Polynomial::zero(),
                den: Polynomial::constant(1.0),
            });
        }
        let mut zeros = self.zeros()?;
        let mut poles = self.poles()?;
        let mut i = 0;
        while i < poles.len() {
            let p = poles[i];
            let hit = zeros
                .iter()
                .enumerate()
                .filter(|(_, z)| (**z - p).norm() <= tol * (1.0 + p.norm()))
                .min_by(|a, b| (*a.1 - p).norm().total_cmp(&(*b.1 - p).norm()))
                .map(|(k, _)| k);
            match hit {
                Some(k) => {
                    zeros.swap_remove(k);
                    poles.swap_remove(i);
                }
                None => i += 1,
            }
        }
        let gain = self.num.leading() / self.den.leading();
        Self::new(
            Polynomial::from_roots(&zeros).scale(gain),
            Polynomial::from_roots(&poles),
        )
    }
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}
