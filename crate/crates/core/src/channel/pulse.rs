use num_complex::Complex64;

use super::{dbm_to_watts, ChannelError, OpticalField, WdmConfig};
use crate::dsp::{fft_frequencies, unit_phasor, FftPair};
use crate::mapping::QamFrame;

/// Root-raised-cosine amplitude response at frequency `f`, peak 1.
pub fn rrc_amplitude(f: f64, symbol_rate: f64, rolloff: f64) -> f64 {
    let af = f.abs();
    let lo = (1.0 - rolloff) * symbol_rate / 2.0;
    let hi = (1.0 + rolloff) * symbol_rate / 2.0;
    if af <= lo {
        1.0
    } else if af >= hi {
        0.0
    } else {
        (std::f64::consts::PI / (2.0 * rolloff * symbol_rate) * (af - lo)).cos()
    }
}

/// RRC response on the DFT grid of `len` samples.
pub(crate) fn rrc_response(len: usize, wdm: &WdmConfig) -> Vec<f64> {
    fft_frequencies(len, wdm.sample_rate())
        .into_iter()
        .map(|f| rrc_amplitude(f, wdm.symbol_rate(), wdm.rolloff))
        .collect()
}

/// Upsamples both symbol streams, applies the RRC filter (circularly, in the
/// frequency domain) and scales the result to `power_dbm` mean total power.
pub fn rrc_shape_symbols(
    symbols_x: &[Complex64],
    symbols_y: &[Complex64],
    wdm: &WdmConfig,
    power_dbm: f64,
) -> OpticalField {
    assert_eq!(symbols_x.len(), symbols_y.len(), "polarization length mismatch");
    let os = wdm.oversampling;
    let len = symbols_x.len() * os;
    let response = rrc_response(len, wdm);
    let mut fft = FftPair::new(len);
    let mut shape = |symbols: &[Complex64]| {
        let mut buf = vec![Complex64::default(); len];
        for (i, &s) in symbols.iter().enumerate() {
            buf[i * os] = s;
        }
        fft.forward(&mut buf);
        buf.iter_mut().zip(&response).for_each(|(v, &h)| *v *= h);
        fft.inverse(&mut buf);
        buf
    };
    let mut field = OpticalField::new(shape(symbols_x), shape(symbols_y), wdm.sample_rate());
    let p = field.mean_power();
    if p > 0.0 {
        let k = (dbm_to_watts(power_dbm) / p).sqrt();
        field.x.iter_mut().chain(field.y.iter_mut()).for_each(|v| *v *= k);
    }
    field
}

/// Shapes a frame with a cyclic guard of `guard` symbols split around it:
/// the first `guard / 2` repeat the end of the frame, the rest repeat its start.
pub fn rrc_shape(frame: &QamFrame, wdm: &WdmConfig, power_dbm: f64, guard: usize) -> OpticalField {
    let with_guard = |s: &[Complex64]| -> Vec<Complex64> {
        let n = s.len();
        if n == 0 {
            return Vec::new();
        }
        let lead = guard / 2;
        let start = n - lead % n;
        (0..n + guard).map(|i| s[(start + i) % n]).collect()
    };
    rrc_shape_symbols(
        &with_guard(&frame.symbols_x),
        &with_guard(&frame.symbols_y),
        wdm,
        power_dbm,
    )
}

/// Guard length that brings `data_symbols + guard` to the smallest
/// `2^a·3^b` window holding at least `min_guard` guard symbols.
pub fn fft_friendly_guard(data_symbols: usize, min_guard: usize) -> usize {
    let need = data_symbols + min_guard;
    let mut best = usize::MAX;
    let mut p3 = 1usize;
    while p3 < best {
        let mut w = p3;
        while w < need {
            w *= 2;
        }
        best = best.min(w);
        p3 *= 3;
    }
    best - data_symbols
}

/// Integer DFT-bin offset of WDM channel `k` for a window of `len` samples.
/// Channels are snapped to the bin grid so that the composite stays periodic.
pub fn channel_bin_offset(wdm: &WdmConfig, k: usize, len: usize) -> i64 {
    (wdm.channel_frequency(k) * len as f64 / wdm.sample_rate()).round() as i64
}

/// Frequency-multiplexes equal-length channel fields onto the WDM grid.
pub fn wdm_mux(fields: &[OpticalField], wdm: &WdmConfig) -> Result<OpticalField, ChannelError> {
    let first = fields.first().ok_or(ChannelError::NoFields)?;
    if fields
        .iter()
        .any(|f| f.len() != first.len() || f.sample_rate != first.sample_rate)
    {
        return Err(ChannelError::FieldMismatch);
    }
    if fields.len().is_multiple_of(2) {
        return Err(ChannelError::Config(format!(
            "WDM channel count must be odd, got {}",
            fields.len()
        )));
    }
    let probe = WdmConfig {
        num_channels: fields.len(),
        ..wdm.clone()
    };
    let nyquist = first.sample_rate / 2.0;
    if probe.band_edge() >= nyquist {
        return Err(ChannelError::Nyquist {
            edge_ghz: probe.band_edge() / 1e9,
            nyquist_ghz: nyquist / 1e9,
        });
    }
    let len = first.len();
    let mut x = vec![Complex64::default(); len];
    let mut y = vec![Complex64::default(); len];
    for (k, field) in fields.iter().enumerate() {
        let bin = channel_bin_offset(&probe, k, len).rem_euclid(len as i64) as u64;
        for i in 0..len {
            let rot = unit_phasor(bin * i as u64, len as u64);
            x[i] += field.x[i] * rot;
            y[i] += field.y[i] * rot;
        }
    }
    Ok(OpticalField {
        x,
        y,
        sample_rate: first.sample_rate,
        center_offset: first.center_offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn random_qpsk(n: usize, seed: u64) -> Vec<Complex64> {
        let mut r = rng::stream(seed, 0);
        (0..n)
            .map(|_| Complex64::new(if r.gen() { 1.0 } else { -1.0 }, if r.gen() { 1.0 } else { -1.0 }))
            .collect()
    }

    #[test]
    fn rrc_response_shape() {
        assert_eq!(rrc_amplitude(0.0, 32e9, 0.1), 1.0);
        assert_eq!(rrc_amplitude(14.4e9, 32e9, 0.1), 1.0);
        assert_eq!(rrc_amplitude(17.6e9, 32e9, 0.1), 0.0);
        // Squared response is 1/2 at the Nyquist frequency.
        assert!((rrc_amplitude(16e9, 32e9, 0.1).powi(2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn launch_power_is_exact() {
        let wdm = WdmConfig::default();
        let s = random_qpsk(4096, 1);
        let f = rrc_shape_symbols(&s, &s, &wdm, -0.5);
        assert!((f.mean_power() / 0.891_250_938e-3 - 1.0).abs() < 1e-9);
        assert_eq!(f.len(), 4096 * 8);
    }

    #[test]
    fn occupied_bandwidth() {
        let wdm = WdmConfig::default();
        let s = random_qpsk(4096, 2);
        let f = rrc_shape_symbols(&s, &s, &wdm, 0.0);
        let mut spec = f.x.clone();
        FftPair::new(spec.len()).forward(&mut spec);
        let freqs = fft_frequencies(spec.len(), wdm.sample_rate());
        let peak = spec.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
        let outside = spec
            .iter()
            .zip(&freqs)
            .filter(|(_, f)| f.abs() > 17.6e9 + 0.1e9)
            .map(|(v, _)| v.norm_sqr())
            .fold(0.0, f64::max);
        assert!(outside < peak * 1e-4, "out-of-band power {outside} vs peak {peak}");
        let inside = spec
            .iter()
            .zip(&freqs)
            .filter(|(_, f)| f.abs() < 14.0e9)
            .map(|(v, _)| v.norm_sqr())
            .sum::<f64>()
            / spec.iter().map(|v| v.norm_sqr()).sum::<f64>();
        assert!(inside > 0.8);
    }

    #[test]
    fn guard_placement_and_window_length() {
        assert_eq!(fft_friendly_guard(64_800, 512), 65_536 - 64_800);
        assert_eq!(fft_friendly_guard(496_800, 512), 497_664 - 496_800);
        assert_eq!(fft_friendly_guard(10, 0), 2);
        assert_eq!(fft_friendly_guard(0, 0), 1);
    }

    #[test]
    fn mux_single_channel_is_identity() {
        let wdm = WdmConfig {
            num_channels: 1,
            ..WdmConfig::default()
        };
        let s = random_qpsk(512, 3);
        let f = rrc_shape_symbols(&s, &s, &wdm, 0.0);
        assert_eq!(wdm_mux(std::slice::from_ref(&f), &wdm).unwrap(), f);
    }

    #[test]
    fn mux_power_adds_and_peaks_sit_on_grid() {
        let wdm = WdmConfig::default();
        let fields: Vec<_> = (0..5)
            .map(|k| {
                let s = random_qpsk(2048, 10 + k);
                let t = random_qpsk(2048, 20 + k);
                rrc_shape_symbols(&s, &t, &wdm, 0.0)
            })
            .collect();
        let single = fields[0].mean_power();
        let mux = wdm_mux(&fields, &wdm).unwrap();
        assert!((mux.mean_power() / (5.0 * single) - 1.0).abs() < 0.01);
        let mut spec = mux.x.clone();
        FftPair::new(spec.len()).forward(&mut spec);
        let freqs = fft_frequencies(spec.len(), wdm.sample_rate());
        for k in 0..5 {
            let fc = wdm.channel_frequency(k);
            let band: f64 = spec
                .iter()
                .zip(&freqs)
                .filter(|(_, f)| (*f - fc).abs() < 16e9)
                .map(|(v, _)| v.norm_sqr())
                .sum();
            let gap: f64 = spec
                .iter()
                .zip(&freqs)
                .filter(|(_, f)| (*f - fc - 25e9).abs() < 5e9)
                .map(|(v, _)| v.norm_sqr())
                .sum();
            assert!(band > 1e6 * gap.max(f64::MIN_POSITIVE), "channel {k}");
        }
    }

    #[test]
    fn mux_rejects_mismatch() {
        let wdm = WdmConfig::default();
        let a = OpticalField::new(vec![Complex64::default(); 8], vec![Complex64::default(); 8], 256e9);
        let b = OpticalField::new(vec![Complex64::default(); 4], vec![Complex64::default(); 4], 256e9);
        assert_eq!(wdm_mux(&[a, b], &wdm), Err(ChannelError::FieldMismatch));
        assert_eq!(wdm_mux(&[], &wdm), Err(ChannelError::NoFields));
        let narrow = WdmConfig {
            oversampling: 2,
            ..WdmConfig::default()
        };
        let c = OpticalField::new(vec![Complex64::default(); 8], vec![Complex64::default(); 8], 64e9);
        let fields = vec![c.clone(), c.clone(), c];
        assert!(matches!(wdm_mux(&fields, &narrow), Err(ChannelError::Nyquist { .. })));
    }
}
