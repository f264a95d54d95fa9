//! Coherent receiver for the center WDM channel and effective-SNR estimation.

use num_complex::Complex64;

use crate::channel::{channel_bin_offset, rrc_response, FiberLinkConfig, OpticalField, WdmConfig};
use crate::dsp::{fft_frequencies, FftPair};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReceiverError {
    #[error("received and transmitted streams differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("received stream has zero energy")]
    ZeroEnergy,
    #[error("empty stream")]
    Empty,
    #[error("field of {samples} samples cannot hold {guard} guard symbols at {oversampling}x")]
    Guard {
        samples: usize,
        guard: usize,
        oversampling: usize,
    },
}

/// Received symbols after RX DSP, with the scalars that align them to the
/// transmitted ones.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedSymbols {
    pub y_x: Vec<Complex64>,
    pub y_y: Vec<Complex64>,
    pub h_x: Complex64,
    pub h_y: Complex64,
}

/// Selects WDM channel `channel`: shifts it to baseband, inverts the dispersion
/// accumulated over the whole link, applies the matched RRC filter and samples
/// at the known symbol instants. The guard placed by
/// [`rrc_shape`](crate::channel::rrc_shape) is dropped.
pub fn rx_frontend_channel(
    field: &OpticalField,
    wdm: &WdmConfig,
    link: &FiberLinkConfig,
    channel: usize,
    guard: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>), ReceiverError> {
    let len = field.len();
    let os = wdm.oversampling;
    let symbols = len / os;
    if symbols <= guard {
        return Err(ReceiverError::Guard {
            samples: len,
            guard,
            oversampling: os,
        });
    }
    let shift = channel_bin_offset(wdm, channel, len);
    let total_length = link.span_length_m() * link.num_spans as f64;
    let b = -0.5 * link.beta2() * total_length;
    let filter: Vec<Complex64> = fft_frequencies(len, field.sample_rate)
        .iter()
        .zip(rrc_response(len, wdm))
        .map(|(&f, h)| {
            let w = std::f64::consts::TAU * f;
            Complex64::from_polar(h, b * w * w)
        })
        .collect();
    let mut fft = FftPair::new(len);
    let mut receive = |pol: &[Complex64]| {
        let mut spec = pol.to_vec();
        fft.forward(&mut spec);
        // Bin k of the output takes bin k + shift of the input.
        let mut base = vec![Complex64::default(); len];
        for (k, out) in base.iter_mut().enumerate() {
            let src = (k as i64 + shift).rem_euclid(len as i64) as usize;
            *out = spec[src] * filter[k];
        }
        fft.inverse(&mut base);
        base.iter().step_by(os).skip(guard / 2).take(symbols - guard).copied().collect::<Vec<_>>()
    };
    Ok((receive(&field.x), receive(&field.y)))
}

/// Center-channel receiver.
pub fn rx_frontend(
    field: &OpticalField,
    wdm: &WdmConfig,
    link: &FiberLinkConfig,
    guard: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>), ReceiverError> {
    rx_frontend_channel(field, wdm, link, wdm.center_channel(), guard)
}

fn mean(v: &[Complex64]) -> Complex64 {
    v.iter().sum::<Complex64>() / v.len() as f64
}

/// Least-squares complex scalar minimizing `var(h·y − x)`.
pub fn estimate_h(y: &[Complex64], x: &[Complex64]) -> Result<Complex64, ReceiverError> {
    if y.len() != x.len() {
        return Err(ReceiverError::LengthMismatch(y.len(), x.len()));
    }
    if y.is_empty() {
        return Err(ReceiverError::Empty);
    }
    let (my, mx) = (mean(y), mean(x));
    let (num, den) = y.iter().zip(x).fold((Complex64::default(), 0.0), |(n, d), (&a, &b)| {
        let a = a - my;
        (n + a.conj() * (b - mx), d + a.norm_sqr())
    });
    if den == 0.0 {
        return Err(ReceiverError::ZeroEnergy);
    }
    Ok(num / den)
}

/// Variance of `h·y − x` (mean removed).
pub fn error_variance(y: &[Complex64], x: &[Complex64], h: Complex64) -> f64 {
    let errors: Vec<Complex64> = y.iter().zip(x).map(|(&a, &b)| h * a - b).collect();
    let m = mean(&errors);
    errors.iter().map(|e| (e - m).norm_sqr()).sum::<f64>() / errors.len() as f64
}

/// `10·log10(1 / var(h·y − x))`; `+inf` when the variance vanishes.
pub fn effective_snr(y: &[Complex64], x: &[Complex64], h: Complex64) -> f64 {
    let var = error_variance(y, x, h);
    if var == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * var.log10()
    }
}

/// Estimates `h` per polarization and returns the SNR of the averaged error variance.
pub fn equalize_and_measure(
    y: (&[Complex64], &[Complex64]),
    x: (&[Complex64], &[Complex64]),
) -> Result<(EqualizedSymbols, f64), ReceiverError> {
    let h_x = estimate_h(y.0, x.0)?;
    let h_y = estimate_h(y.1, x.1)?;
    let var = 0.5 * (error_variance(y.0, x.0, h_x) + error_variance(y.1, x.1, h_y));
    let snr = if var == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * var.log10()
    };
    Ok((
        EqualizedSymbols {
            y_x: y.0.iter().map(|v| v * h_x).collect(),
            y_y: y.1.iter().map(|v| v * h_y).collect(),
            h_x,
            h_y,
        },
        snr,
    ))
}
