//! Exact integer-sample transport delay.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Number of samples a delay of `delay` seconds spans at step `step`:
/// nearest integer, ties rounded up.
pub fn delay_steps(delay: f64, step: f64) -> Result<usize> {
    if delay < 0.0 {
        return Err(Error::NegativeDelay(delay));
    }
    if !(step > 0.0 && step.is_finite() && delay.is_finite()) {
        return Err(Error::InvalidInput(
            "delay and step must be finite with step > 0".into(),
        ));
    }
    // the 1e-9 guard keeps 80.5 from landing on 80.4999... after division
    Ok((delay / step + 0.5 + 1e-9).floor() as usize)
}

/// Ring buffer implementing `out[k] = in[k - N]`, zero for `k < N`.
#[derive(Clone, Debug)]
pub struct DelayLine {
    delay_seconds: f64,
    step_seconds: f64,
    buf: Vec<f64>,
    head: usize,
}

impl DelayLine {
    pub fn new(delay_seconds: f64, step_seconds: f64) -> Result<Self> {
        let n = delay_steps(delay_seconds, step_seconds)?;
        Ok(Self {
            delay_seconds,
            step_seconds,
            buf: vec![0.0; n],
            head: 0,
        })
    }

    pub fn delay_seconds(&self) -> f64 {
        self.delay_seconds
    }

    pub fn step_seconds(&self) -> f64 {
        self.step_seconds
    }

    pub fn steps(&self) -> usize {
        self.buf.len()
    }

    /// The value the next [`DelayLine::push`] will return. For a zero-length
    /// line that value is the next input itself, which is not yet known, so
    /// this returns `None`.
    pub fn peek(&self) -> Option<f64> {
        self.buf.get(self.head).copied()
    }

    /// Feeds one sample and returns the sample from `N` steps earlier.
    pub fn push(&mut self, x: f64) -> f64 {
        if self.buf.is_empty() {
            return x;
        }
        let out = core::mem::replace(&mut self.buf[self.head], x);
        self.head = (self.head + 1) % self.buf.len();
        out
    }

    pub fn reset(&mut self) {
        self.buf.iter_mut().for_each(|v| *v = 0.0);
        self.head = 0;
    }

    /// Delays a whole sampled signal, starting from an empty line.
    pub fn apply(&self, samples: &[f64]) -> Vec<f64> {
        let mut line = self.clone();
        line.reset();
        samples.iter().map(|x| line.push(*x)).collect()
    }
}
