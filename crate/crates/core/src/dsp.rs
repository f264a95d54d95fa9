//! FFT helpers shared by the transmitter, fiber and receiver.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse FFT pair of a fixed length with its own scratch buffer.
/// `inverse` includes the `1/N` normalization.
pub struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// Inverse transform without the `1/N` factor.
    pub fn inverse_unnormalized(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.inverse_unnormalized(data);
        let k = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= k);
    }
}

/// DFT bin frequencies in Hz, in FFT order (0, positive, then negative).
pub fn fft_frequencies(len: usize, sample_rate: f64) -> Vec<f64> {
    let df = sample_rate / len as f64;
    (0..len)
        .map(|k| {
            let signed = if k <= (len - 1) / 2 {
                k as f64
            } else {
                k as f64 - len as f64
            };
            signed * df
        })
        .collect()
}

/// `exp(j·2π·num/den)` for an integer phase fraction, reduced first for accuracy.
pub fn unit_phasor(num: u64, den: u64) -> Complex64 {
    let r = num % den;
    Complex64::from_polar(1.0, std::f64::consts::TAU * r as f64 / den as f64)
}
