//! State-space models and fixed-step RK4 integration.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{solve_complex, Matrix};
use crate::poly::Polynomial;
use crate::tf::TransferFunction;

/// `x' = A x + B u`, `y = C x + D u`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpaceModel {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl StateSpaceModel {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch("A must be square".into()));
        }
        if b.rows() != n || c.cols() != n {
            return Err(Error::DimensionMismatch(
                "B rows and C columns must equal the state count".into(),
            ));
        }
        if d.rows() != c.rows() || d.cols() != b.cols() {
            return Err(Error::DimensionMismatch(
                "D must be outputs x inputs".into(),
            ));
        }
        Ok(Self { a, b, c, d })
    }

    /// A memoryless gain `y = k u`.
    pub fn gain(k: f64) -> Self {
        Self {
            a: Matrix::zeros(0, 0),
            b: Matrix::zeros(0, 1),
            c: Matrix::zeros(1, 0),
            d: Matrix::from_vec(1, 1, vec![k]).expect("1x1"),
        }
    }

    /// Controllable canonical realization of a proper transfer function.
    ///
    /// The state count equals the denominator degree; a constant has no
    /// states. `D` is nonzero only when the relative degree is zero.
    pub fn from_tf(g: &TransferFunction) -> Result<Self> {
        let rd = g.relative_degree();
        if rd < 0 {
            return Err(Error::Improper {
                relative_degree: rd,
            });
        }
        let n = g.den().degree();
        let lead = g.den().leading();
        // ascending: den = a_0 + a_1 s + ... + s^n, num = b_0 + ... + b_n s^n
        let a_asc: Vec<f64> = g
            .den()
            .ascending_padded(n + 1)
            .iter()
            .map(|v| v / lead)
            .collect();
        let b_asc: Vec<f64> = g
            .num()
            .ascending_padded(n + 1)
            .iter()
            .map(|v| v / lead)
            .collect();
        let d0 = b_asc[n];
        let mut a = Matrix::zeros(n, n);
        let mut b = Matrix::zeros(n, 1);
        let mut c = Matrix::zeros(1, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        if n > 0 {
            for j in 0..n {
                a[(n - 1, j)] = -a_asc[j];
                c[(0, j)] = b_asc[j] - d0 * a_asc[j];
            }
            b[(n - 1, 0)] = 1.0;
        }
        let d = Matrix::from_vec(1, 1, vec![d0])?;
        Ok(Self { a, b, c, d })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn d(&self) -> &Matrix {
        &self.d
    }

    pub fn states(&self) -> usize {
        self.a.rows()
    }
    pub fn inputs(&self) -> usize {
        self.b.cols()
    }
    pub fn outputs(&self) -> usize {
        self.c.rows()
    }

    /// Replaces the output map, keeping the dynamics.
    pub fn with_outputs(&self, c: Matrix, d: Matrix) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), c, d)
    }

    /// Keeps only the listed input columns.
    pub fn select_inputs(&self, cols: &[usize]) -> Result<Self> {
        let n = self.states();
        let mut b = Matrix::zeros(n, cols.len());
        let mut d = Matrix::zeros(self.outputs(), cols.len());
        for (k, &j) in cols.iter().enumerate() {
            if j >= self.inputs() {
                return Err(Error::DimensionMismatch("input index out of range".into()));
            }
            for i in 0..n {
                b[(i, k)] = self.b[(i, j)];
            }
            for i in 0..self.outputs() {
                d[(i, k)] = self.d[(i, j)];
            }
        }
        Self::new(self.a.clone(), b, self.c.clone(), d)
    }

    /// `C (sI - A)^-1 B + D`, row-major `outputs x inputs`.
    pub fn eval(&self, s: Complex64) -> Result<Vec<Complex64>> {
        let n = self.states();
        let (p, m) = (self.outputs(), self.inputs());
        let mut out: Vec<Complex64> = self
            .d
            .as_slice()
            .iter()
            .map(|v| Complex64::new(*v, 0.0))
            .collect();
        if n == 0 {
            return Ok(out);
        }
        let mut lhs = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                lhs[i * n + j] = Complex64::new(-self.a[(i, j)], 0.0);
            }
            lhs[i * n + i] += s;
        }
        let rhs: Vec<Complex64> = self
            .b
            .as_slice()
            .iter()
            .map(|v| Complex64::new(*v, 0.0))
            .collect();
        let x = solve_complex(lhs, n, rhs, m).ok_or(Error::PoleEvaluation { s })?;
        for i in 0..p {
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.c[(i, k)] * x[k * m + j];
                }
                out[i * m + j] += acc;
            }
        }
        Ok(out)
    }

    pub fn eval_channel(&self, s: Complex64, output: usize, input: usize) -> Result<Complex64> {
        if output >= self.outputs() || input >= self.inputs() {
            return Err(Error::DimensionMismatch(
                "channel index out of range".into(),
            ));
        }
        Ok(self.eval(s)?[output * self.inputs() + input])
    }

    /// Transfer function of one input/output channel, from the Faddeev-LeVerrier
    /// expansion of `adj(sI - A)` and `det(sI - A)`. No cancellation is done,
    /// so the denominator always has degree `states()`.
    pub fn channel_tf(&self, output: usize, input: usize) -> Result<TransferFunction> {
        if output >= self.outputs() || input >= self.inputs() {
            return Err(Error::DimensionMismatch(
                "channel index out of range".into(),
            ));
        }
        let n = self.states();
        // char[k] is the coefficient of s^(n-k)
        let mut charp = vec![0.0; n + 1];
        charp[0] = 1.0;
        // adjugate coefficient of s^(n-k) is m_k, for k = 1..n
        let mut num = vec![0.0; n + 1];
        let mut m = Matrix::zeros(n, n);
        for k in 1..=n {
            let mut next = self.a.matmul(&m);
            for i in 0..n {
                next[(i, i)] += charp[k - 1];
            }
            m = next;
            let am = self.a.matmul(&m);
            charp[k] = -am.trace() / k as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let mut row = 0.0;
                for j in 0..n {
                    row += m[(i, j)] * self.b[(j, input)];
                }
                acc += self.c[(output, i)] * row;
            }
            num[k] = acc;
        }
        let d = self.d[(output, input)];
        for k in 0..=n {
            num[k] += d * charp[k];
        }
        TransferFunction::new(Polynomial::new(num), Polynomial::new(charp))
    }

    /// SISO convenience for [`StateSpaceModel::channel_tf`].
    pub fn to_tf(&self) -> Result<TransferFunction> {
        self.channel_tf(0, 0)
    }

    /// Integrates from `x(0) = 0` with classic RK4 and step `h`, holding the
    /// input piecewise linear between samples. `inputs[k]` is the input vector
    /// at `t = k h`; the returned outputs are sampled at the same instants.
    pub fn simulate(&self, inputs: &[Vec<f64>], h: f64) -> Result<Vec<Vec<f64>>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(
                "step must be positive and finite".into(),
            ));
        }
        if inputs.is_empty() {
            return Err(Error::InvalidInput("input signal is empty".into()));
        }
        if inputs.iter().any(|u| u.len() != self.inputs()) {
            return Err(Error::DimensionMismatch(
                "input sample width != model inputs".into(),
            ));
        }
        let mut x = vec![0.0; self.states()];
        let mut rk = Rk4::new(self.states(), self.inputs());
        let mut out = Vec::with_capacity(inputs.len());
        for k in 0..inputs.len() {
            let mut y = vec![0.0; self.outputs()];
            self.c.mul_vec_into(&x, &mut y);
            self.d.mul_vec_acc(&inputs[k], &mut y);
            out.push(y);
            if k + 1 < inputs.len() {
                let prev = x.clone();
                rk.step(&self.a, &self.b, &mut x, &inputs[k], &inputs[k + 1], h);
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Divergence {
                        step: k + 1,
                        last_state: prev,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Single-input single-output form of [`StateSpaceModel::simulate`].
    pub fn simulate_siso(&self, input: &[f64], h: f64) -> Result<Vec<f64>> {
        if self.inputs() != 1 || self.outputs() != 1 {
            return Err(Error::DimensionMismatch(
                "simulate_siso needs a 1x1 model".into(),
            ));
        }
        let u: Vec<Vec<f64>> = input.iter().map(|v| vec![*v]).collect();
        Ok(self.simulate(&u, h)?.into_iter().map(|y| y[0]).collect())
    }
}

/// Scratch space for one RK4 step of `x' = A x + B u(t)`, `u` linear over the step.
pub(crate) struct Rk4 {
    k: [Vec<f64>; 4],
    xt: Vec<f64>,
    um: Vec<f64>,
}

impl Rk4 {
    pub(crate) fn new(n: usize, m: usize) -> Self {
        Self {
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            xt: vec![0.0; n],
            um: vec![0.0; m],
        }
    }

    pub(crate) fn step(
        &mut self,
        a: &Matrix,
        b: &Matrix,
        x: &mut [f64],
        u0: &[f64],
        u1: &[f64],
        h: f64,
    ) {
        for (m, (p, q)) in self.um.iter_mut().zip(u0.iter().zip(u1)) {
            *m = 0.5 * (p + q);
        }
        let [k1, k2, k3, k4] = &mut self.k;
        deriv(a, b, x, u0, k1);
        for i in 0..x.len() {
            self.xt[i] = x[i] + 0.5 * h * k1[i];
        }
        deriv(a, b, &self.xt, &self.um, k2);
        for i in 0..x.len() {
            self.xt[i] = x[i] + 0.5 * h * k2[i];
        }
        deriv(a, b, &self.xt, &self.um, k3);
        for i in 0..x.len() {
            self.xt[i] = x[i] + h * k3[i];
        }
        deriv(a, b, &self.xt, u1, k4);
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

fn deriv(a: &Matrix, b: &Matrix, x: &[f64], u: &[f64], out: &mut [f64]) {
    a.mul_vec_into(x, out);
    b.mul_vec_acc(u, out);
}
