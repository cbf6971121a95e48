//! Real polynomials in the Laplace variable, coefficients in descending powers.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{hessenberg_eigenvalues, Matrix};

/// `c[0] s^n + c[1] s^(n-1) + ... + c[n]`.
///
/// Leading zeros are stripped on construction. The zero polynomial is stored
/// as the single coefficient `[0.0]` and reports degree 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs: Vec<f64> = coeffs.into();
        let first = coeffs.iter().position(|c| *c != 0.0);
        match first {
            Some(i) => {
                coeffs.drain(..i);
            }
            None => coeffs = vec![0.0],
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monic polynomial with the given roots. Complex roots should come
    /// in conjugate pairs; imaginary residue is discarded.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (i, c) in acc.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * r;
            }
            acc = next;
        }
        Self::new(acc.into_iter().map(|c| c.re).collect::<Vec<_>>())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn norm2(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Divides through by the leading coefficient. The zero polynomial is
    /// returned unchanged.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lead = self.leading();
        Self::new(self.coeffs.iter().map(|c| c / lead).collect::<Vec<_>>())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect::<Vec<_>>())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
    }

    /// `sum |c_i| |s|^i`, the natural scale for judging whether `|p(s)|` is
    /// numerically zero.
    pub fn eval_abs_scale(&self, s: Complex64) -> f64 {
        let r = s.norm();
        self.coeffs.iter().fold(0.0, |acc, c| acc * r + c.abs())
    }

    pub fn derivative(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return Self::zero();
        }
        Self::new(
            self.coeffs[..n]
                .iter()
                .enumerate()
                .map(|(i, c)| c * (n - i) as f64)
                .collect::<Vec<_>>(),
        )
    }

    /// Coefficients in ascending order padded to `len`, which is what the
    /// canonical realizations want.
    pub(crate) fn ascending_padded(&self, len: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.coeffs.iter().rev().copied().collect();
        v.resize(len.max(v.len()), 0.0);
        v
    }

    /// All roots with multiplicity.
    ///
    /// Exact zero roots (trailing zero coefficients) are split off first; the
    /// remaining roots are the eigenvalues of the companion matrix of the
    /// monic reduced polynomial, each refined by a few guarded Newton steps.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::InvalidInput("roots of the zero polynomial".into()));
        }
        if self.degree() == 0 {
            return Err(Error::InvalidInput("roots of a constant polynomial".into()));
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(
                "non-finite polynomial coefficient".into(),
            ));
        }
        let zeros_at_origin = self.coeffs.iter().rev().take_while(|c| **c == 0.0).count();
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
        let reduced = Polynomial::new(self.coeffs[..self.coeffs.len() - zeros_at_origin].to_vec());
        let n = reduced.degree();
        if n == 0 {
            return Ok(roots);
        }
        let lead = reduced.leading();
        let mut companion = Matrix::zeros(n, n);
        for j in 0..n {
            companion[(0, j)] = -reduced.coeffs[j + 1] / lead;
        }
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        let deriv = reduced.derivative();
        for mut r in hessenberg_eigenvalues(companion)? {
            for _ in 0..3 {
                let pr = reduced.eval_complex(r);
                let dp = deriv.eval_complex(r);
                if dp.norm() == 0.0 || pr.norm() == 0.0 {
                    break;
                }
                let cand = r - pr / dp;
                if reduced.eval_complex(cand).norm() < pr.norm() {
                    r = cand;
                } else {
                    break;
                }
            }
            // keep real roots exactly real
            if r.im.abs() <= 1e-14 * (1.0 + r.re.abs()) {
                r.im = 0.0;
            }
            roots.push(r);
        }
        Ok(roots)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 && !(first && i == n) {
                continue;
            }
            let p = n - i;
            if !first {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
            } else if *c < 0.0 {
                write!(f, "-")?;
            }
            let a = c.abs();
            match p {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}s")?,
                _ => write!(f, "{a}s^{p}")?,
            }
            first = false;
        }
        Ok(())
    }
}

fn add_coeffs(a: &[f64], b: &[f64], sign: f64) -> Polynomial {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, c) in a.iter().enumerate() {
        out[n - a.len() + i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[n - b.len() + i] += sign * c;
    }
    Polynomial::new(out)
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        add_coeffs(&self.coeffs, &rhs.coeffs, 1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        add_coeffs(&self.coeffs, &rhs.coeffs, -1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut r: Vec<Complex64>) -> Vec<Complex64> {
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        r
    }

    #[test]
    fn normalization_strips_leading_zeros() {
        let p = Polynomial::new(vec![0.0, 0.0, 2.0, 1.0]);
        assert_eq!(p.coeffs(), &[2.0, 1.0]);
        assert_eq!(p.degree(), 1);
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
        assert_eq!(Polynomial::new(Vec::new()), Polynomial::zero());
    }

    #[test]
    fn factorable_quadratic() {
        let r = sorted(Polynomial::new(vec![1.0, 3.0, 2.0]).roots().unwrap());
        assert!((r[0].re + 2.0).abs() < 1e-12 && r[0].im == 0.0);
        assert!((r[1].re + 1.0).abs() < 1e-12 && r[1].im == 0.0);
    }

    #[test]
    fn repeated_origin_root() {
        let r = Polynomial::new(vec![1.0, 0.0, 0.0]).roots().unwrap();
        assert_eq!(r, vec![Complex64::new(0.0, 0.0); 2]);
    }

    #[test]
    fn roots_reject_constants() {
        assert!(matches!(
            Polynomial::zero().roots(),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            Polynomial::constant(3.0).roots(),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn arithmetic() {
        let a = Polynomial::new(vec![1.0, 1.0]);
        let b = Polynomial::new(vec![1.0, -1.0]);
        assert_eq!((&a * &b).coeffs(), &[1.0, 0.0, -1.0]);
        assert_eq!((&a + &b).coeffs(), &[2.0, 0.0]);
        assert_eq!((&a - &a), Polynomial::zero());
        assert_eq!(
            Polynomial::new(vec![3.0, 2.0, 1.0]).derivative().coeffs(),
            &[6.0, 2.0]
        );
    }

    #[test]
    fn from_roots_roundtrip() {
        let roots = [
            Complex64::new(-1.0, 2.0),
            Complex64::new(-1.0, -2.0),
            Complex64::new(-3.0, 0.0),
        ];
        let p = Polynomial::from_roots(&roots);
        assert_eq!(p.coeffs(), &[1.0, 5.0, 11.0, 15.0]);
    }

    #[test]
    fn display() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.0, 3.5]);
        assert_eq!(alloc::format!("{p}"), "1s^3 - 2s^2 + 3.5");
    }
}
