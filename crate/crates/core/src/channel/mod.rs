//! Transmit DSP and multi-span fiber propagation.
//!
//! Fields are sampled complex baseband waveforms in both polarizations,
//! normalized so that `|x|² + |y|²` is instantaneous power in watts.

mod config;
mod fiber;
mod pulse;

pub use config::{parse_power_dbm, FiberLinkConfig, WdmConfig};
pub use fiber::{
    ase_psd, edfa, propagate_link, ssfm_span, LinkStats, SpanStats, MANAKOV_FACTOR,
    SsfmPropagator,
};
pub use crate::dsp::fft_frequencies;
pub(crate) use pulse::rrc_response;
pub use pulse::{
    channel_bin_offset, fft_friendly_guard, rrc_amplitude, rrc_shape, rrc_shape_symbols, wdm_mux,
};

use num_complex::Complex64;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("WDM band edge {edge_ghz:.2} GHz exceeds the Nyquist frequency {nyquist_ghz:.2} GHz")]
    Nyquist { edge_ghz: f64, nyquist_ghz: f64 },
    #[error("fields differ in sample rate or length")]
    FieldMismatch,
    #[error("no fields to multiplex")]
    NoFields,
    #[error("propagation blew up in span {span}: step size collapsed to {dz_m:.3e} m")]
    StepCollapse { span: usize, dz_m: f64 },
    #[error(
        "propagation blew up in span {span} after {steps} steps \
         (energy in {energy_in:.6e}, energy out {energy_out:.6e})"
    )]
    BlowUp {
        span: usize,
        steps: usize,
        energy_in: f64,
        energy_out: f64,
    },
}

/// Dual-polarization sampled field.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalField {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    /// Samples per second.
    pub sample_rate: f64,
    /// Frequency of baseband zero relative to the reference carrier, Hz.
    pub center_offset: f64,
}

impl OpticalField {
    pub fn new(x: Vec<Complex64>, y: Vec<Complex64>, sample_rate: f64) -> Self {
        assert_eq!(x.len(), y.len(), "polarizations must have equal length");
        Self {
            x,
            y,
            sample_rate,
            center_offset: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Sum of `|x|² + |y|²` over all samples.
    pub fn energy(&self) -> f64 {
        self.x.iter().chain(&self.y).map(|s| s.norm_sqr()).sum()
    }

    /// Mean total power in watts.
    pub fn mean_power(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.energy() / self.len() as f64
        }
    }

    pub fn peak_power(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .fold(0.0, f64::max)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
