#![allow(dead_code)]

use num_complex::Complex64;

/// Least-squares fit of `a sin(wt) + b cos(wt) + c` to `(t, y)`, returned as
/// the phasor `b + j a` so that `y ~ Re(phasor * exp(j w t))`.
pub fn fit_phasor(t: &[f64], y: &[f64], w: f64) -> Complex64 {
    let mut m = [[0.0; 3]; 3];
    let mut v = [0.0; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        let basis = [(w * ti).sin(), (w * ti).cos(), 1.0];
        for i in 0..3 {
            v[i] += basis[i] * yi;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let x = solve3(m, v);
    Complex64::new(x[1], -x[0])
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> [f64; 3] {
    for k in 0..3 {
        let p = (k..3)
            .max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs()))
            .unwrap();
        m.swap(k, p);
        v.swap(k, p);
        for i in k + 1..3 {
            let f = m[i][k] / m[k][k];
            let pivot = m[k];
            for (a, b) in m[i].iter_mut().zip(pivot).skip(k) {
                *a -= f * b;
            }
            v[i] -= f * v[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        let s: f64 = (k + 1..3).map(|j| m[k][j] * x[j]).sum();
        x[k] = (v[k] - s) / m[k][k];
    }
    x
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
