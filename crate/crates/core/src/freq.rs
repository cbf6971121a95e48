//! Frequency grids and sampled frequency responses.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::tf::TransferFunction;

/// `n` log-spaced angular frequencies from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidInput("log grid needs 0 < lo < hi".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput(
            "log grid needs at least two points".into(),
        ));
    }
    let (a, b) = (lo.log10(), hi.log10());
    let step = (b - a) / (n - 1) as f64;
    Ok((0..n)
        .map(|k| match k {
            0 => lo,
            _ if k == n - 1 => hi,
            _ => 10.0.powf(a + step * k as f64),
        })
        .collect())
}

/// The default analysis grid: 400 log-spaced points over `[1e-2, 1e4]` rad/s.
pub fn default_grid() -> Vec<f64> {
    logspace(1e-2, 1e4, 400).expect("static grid")
}

/// Strictly increasing positive grid check.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty frequency grid".into()));
    }
    if grid.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidInput(
            "frequencies must be positive and finite".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "frequency grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyResponse {
    grid: Vec<f64>,
    values: Vec<Complex64>,
}

impl FrequencyResponse {
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        validate_grid(&grid)?;
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch(
                "grid and values differ in length".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    /// Samples any frequency-domain evaluator on `grid`.
    pub fn from_fn(grid: &[f64], mut f: impl FnMut(f64) -> Result<Complex64>) -> Result<Self> {
        validate_grid(grid)?;
        let values = grid.iter().map(|w| f(*w)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: grid.to_vec(),
            values,
        })
    }

    pub fn of_tf(g: &TransferFunction, grid: &[f64]) -> Result<Self> {
        Self::from_fn(grid, |w| g.eval_jw(w))
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn magnitude_db(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| 20.0 * v.norm().log10())
            .collect()
    }

    pub fn phase_deg(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg().to_degrees()).collect()
    }
}
