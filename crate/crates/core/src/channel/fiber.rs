use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{db_to_linear, ChannelError, FiberLinkConfig, OpticalField, PLANCK};
use crate::dsp::FftPair;

/// Manakov coupling factor for PMD-free dual-polarization propagation.
pub const MANAKOV_FACTOR: f64 = 8.0 / 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpanStats {
    pub steps: usize,
    /// Largest `|x|² + |y|²` seen at any nonlinear step, W.
    pub peak_power: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkStats {
    pub spans: Vec<SpanStats>,
}

impl LinkStats {
    pub fn total_steps(&self) -> usize {
        self.spans.iter().map(|s| s.steps).sum()
    }

    pub fn peak_power(&self) -> f64 {
        self.spans.iter().map(|s| s.peak_power).fold(0.0, f64::max)
    }
}

/// Symmetrized split-step Fourier solver of the Manakov equation with an
/// adaptive step bounded by the peak nonlinear phase rotation.
///
/// Consecutive linear half-steps are merged, so each step costs one forward and
/// one inverse FFT per polarization.
pub struct SsfmPropagator {
    fft: FftPair,
    /// `(2π·Δf)²`: the dispersion phase of bin `±m` is `β₂/2·dz·dw2·m²`.
    dw2: f64,
    chirp: Vec<Complex64>,
}

/// Steps per span beyond which the propagation is declared unstable.
pub const MAX_STEPS_PER_SPAN: f64 = 1e6;

/// Samples between exact re-evaluations of the quadratic-phase recurrence.
const CHIRP_BLOCK: usize = 32;

/// Fills `out[m] = exp(j·c·m²)` using a second-order phase recurrence that is
/// re-anchored every [`CHIRP_BLOCK`] samples.
fn fill_chirp(out: &mut [Complex64], c: f64) {
    let q = Complex64::from_polar(1.0, 2.0 * c);
    for (b, block) in out.chunks_mut(CHIRP_BLOCK).enumerate() {
        let m0 = (b * CHIRP_BLOCK) as f64;
        let mut p = Complex64::from_polar(1.0, c * m0 * m0);
        let mut r = Complex64::from_polar(1.0, c * (2.0 * m0 + 1.0));
        for v in block {
            *v = p;
            p *= r;
            r *= q;
        }
    }
}

/// `exp(jθ)`, by Taylor series when `θ` is small enough for it to be exact in f64.
#[inline]
fn rotation(theta: f64) -> Complex64 {
    if theta.abs() < 1e-2 {
        let t2 = theta * theta;
        let c = 1.0 - t2 / 2.0 * (1.0 - t2 / 12.0 * (1.0 - t2 / 30.0 * (1.0 - t2 / 56.0)));
        let s = theta * (1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0))));
        Complex64::new(c, s)
    } else {
        let (s, c) = theta.sin_cos();
        Complex64::new(c, s)
    }
}

impl SsfmPropagator {
    pub fn new(len: usize, sample_rate: f64) -> Self {
        let dw = std::f64::consts::TAU * sample_rate / len as f64;
        Self {
            fft: FftPair::new(len),
            dw2: dw * dw,
            chirp: vec![Complex64::default(); len / 2 + 1],
        }
    }

    pub fn len(&self) -> usize {
        self.fft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fft.is_empty()
    }

    /// Multiplies both spectra by `scale·exp((-α/2 + jβ₂ω²/2)·dz)`.
    fn linear_step(
        &mut self,
        fx: &mut [Complex64],
        fy: &mut [Complex64],
        link: &FiberLinkConfig,
        dz: f64,
        scale: f64,
    ) {
        let len = fx.len();
        let amp = scale * (-0.5 * link.alpha_per_m() * dz).exp();
        fill_chirp(&mut self.chirp, 0.5 * link.beta2() * dz * self.dw2);
        for (k, (x, y)) in fx.iter_mut().zip(fy.iter_mut()).enumerate() {
            let m = if 2 * k <= len { k } else { len - k };
            let h = self.chirp[m] * amp;
            *x *= h;
            *y *= h;
        }
    }

    /// Rotates each sample by `coeff·(|x|²+|y|²)`; returns the peak total power.
    fn nonlinear_step(x: &mut [Complex64], y: &mut [Complex64], coeff: f64) -> f64 {
        let mut peak = 0.0f64;
        for (a, b) in x.iter_mut().zip(y.iter_mut()) {
            let p = a.norm_sqr() + b.norm_sqr();
            peak = peak.max(p);
            let rot = rotation(coeff * p);
            *a *= rot;
            *b *= rot;
        }
        peak
    }

    /// Step length so that `γ·P_peak·L_eff(dz) = max_nl_phase`, capped at `remaining`.
    fn step_size(link: &FiberLinkConfig, peak: f64, remaining: f64) -> f64 {
        let gamma = link.gamma_per_w_m();
        let alpha = link.alpha_per_m();
        let budget = link.max_nl_phase_rad;
        if gamma * peak <= 0.0 {
            return remaining;
        }
        let dz = if alpha > 0.0 {
            let x = alpha * budget / (gamma * peak);
            if x >= 1.0 {
                remaining
            } else {
                -(1.0 - x).ln() / alpha
            }
        } else {
            budget / (gamma * peak)
        };
        if dz >= remaining * (1.0 - 1e-12) {
            remaining
        } else {
            dz
        }
    }

    /// Propagates `field` in place over one span.
    pub fn propagate_span(
        &mut self,
        field: &mut OpticalField,
        link: &FiberLinkConfig,
        span_index: usize,
    ) -> Result<SpanStats, ChannelError> {
        assert_eq!(field.len(), self.len(), "field length differs from the solver grid");
        let length = link.span_length_m();
        let alpha = link.alpha_per_m();
        let nl_coeff = MANAKOV_FACTOR * link.gamma_per_w_m();
        let energy_in = field.energy();
        let mut stats = SpanStats::default();

        let (x, y) = (&mut field.x, &mut field.y);
        let mut peak_estimate = x
            .iter()
            .zip(y.iter())
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .fold(0.0, f64::max);
        stats.peak_power = peak_estimate;
        self.fft.forward(x);
        self.fft.forward(y);

        // Inverse transforms are unnormalized; the 1/N goes into the linear step.
        let inv_len = 1.0 / self.len() as f64;
        let mut z = 0.0;
        let mut pending = 0.0;
        while z < length {
            let dz = Self::step_size(link, peak_estimate, length - z);
            if dz.is_nan() || (dz * MAX_STEPS_PER_SPAN < length && dz < length - z) {
                return Err(ChannelError::StepCollapse {
                    span: span_index,
                    dz_m: dz,
                });
            }
            if nl_coeff > 0.0 {
                self.linear_step(x, y, link, pending + 0.5 * dz, inv_len);
                self.fft.inverse_unnormalized(x);
                self.fft.inverse_unnormalized(y);
                // Loss-weighted length of the step around its midpoint.
                let l_eff = if alpha > 0.0 {
                    2.0 / alpha * (0.5 * alpha * dz).sinh()
                } else {
                    dz
                };
                let peak = Self::nonlinear_step(x, y, nl_coeff * l_eff);
                stats.peak_power = stats.peak_power.max(peak);
                peak_estimate = peak * (-0.5 * alpha * dz).exp();
                self.fft.forward(x);
                self.fft.forward(y);
                pending = 0.5 * dz;
            } else {
                pending += dz;
            }
            z = if dz == length - z { length } else { z + dz };
            stats.steps += 1;
        }
        self.linear_step(x, y, link, pending, inv_len);
        self.fft.inverse_unnormalized(x);
        self.fft.inverse_unnormalized(y);

        let energy_out = field.energy();
        let expected = energy_in * (-alpha * length).exp();
        if !energy_out.is_finite() || (energy_out - expected).abs() > 1e-6 * expected.max(f64::MIN_POSITIVE) {
            return Err(ChannelError::BlowUp {
                span: span_index,
                steps: stats.steps,
                energy_in,
                energy_out,
            });
        }
        Ok(stats)
    }
}

/// One span of fiber, allocating a solver for the field's grid.
pub fn ssfm_span(
    field: &OpticalField,
    link: &FiberLinkConfig,
    span_index: usize,
) -> Result<(OpticalField, SpanStats), ChannelError> {
    let mut out = field.clone();
    let stats = SsfmPropagator::new(field.len(), field.sample_rate).propagate_span(&mut out, link, span_index)?;
    Ok((out, stats))
}

/// One-sided ASE power spectral density per polarization, W/Hz.
pub fn ase_psd(gain_db: f64, noise_figure_db: f64, carrier_hz: f64) -> f64 {
    let g = db_to_linear(gain_db);
    let n_sp = db_to_linear(noise_figure_db) / 2.0;
    (g - 1.0) * PLANCK * carrier_hz * n_sp
}

/// Amplifies by `gain_db` and adds circular white Gaussian ASE in each polarization.
pub fn edfa<R: Rng>(
    field: &OpticalField,
    gain_db: f64,
    noise_figure_db: f64,
    carrier_hz: f64,
    rng: &mut R,
) -> OpticalField {
    let amp = db_to_linear(gain_db).sqrt();
    let variance = ase_psd(gain_db, noise_figure_db, carrier_hz) * field.sample_rate;
    let sigma = (variance / 2.0).sqrt();
    let noisy = |s: &Complex64, rng: &mut R| {
        let mut v = s * amp;
        if sigma > 0.0 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v += Complex64::new(re * sigma, im * sigma);
        }
        v
    };
    let x = field.x.iter().map(|s| noisy(s, rng)).collect();
    let y = field.y.iter().map(|s| noisy(s, rng)).collect();
    OpticalField {
        x,
        y,
        sample_rate: field.sample_rate,
        center_offset: field.center_offset,
    }
}

/// `num_spans` × (fiber span → loss-compensating amplifier).
pub fn propagate_link<R: Rng>(
    field: &OpticalField,
    link: &FiberLinkConfig,
    rng: &mut R,
) -> Result<(OpticalField, LinkStats), ChannelError> {
    let mut out = field.clone();
    let mut stats = LinkStats::default();
    if link.num_spans == 0 {
        return Ok((out, stats));
    }
    let mut solver = SsfmPropagator::new(field.len(), field.sample_rate);
    for span in 0..link.num_spans {
        stats.spans.push(solver.propagate_span(&mut out, link, span)?);
        out = edfa(
            &out,
            link.span_loss_db(),
            link.edfa_noise_figure_db,
            link.carrier_frequency(),
            rng,
        );
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::fft_frequencies;
    use crate::rng;

    fn random_field(len: usize, power: f64, seed: u64) -> OpticalField {
        let mut r = rng::stream(seed, 0);
        let mut draw = || {
            Complex64::new(r.sample::<f64, _>(StandardNormal), r.sample::<f64, _>(StandardNormal))
        };
        let x: Vec<_> = (0..len).map(|_| draw()).collect();
        let y: Vec<_> = (0..len).map(|_| draw()).collect();
        let mut f = OpticalField::new(x, y, 256e9);
        let k = (power / f.mean_power()).sqrt();
        f.x.iter_mut().chain(f.y.iter_mut()).for_each(|v| *v *= k);
        f
    }

    /// Direct O(N²) DFT, independent of the FFT path.
    fn naive_dft(data: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = data.len();
        (0..n)
            .map(|k| {
                data.iter()
                    .enumerate()
                    .map(|(t, &v)| {
                        let ph = sign * std::f64::consts::TAU * ((k * t) % n) as f64 / n as f64;
                        v * Complex64::from_polar(1.0, ph)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn chirp_and_rotation_match_direct_evaluation() {
        for c in [1e-7, 3e-6, -2.5e-5] {
            let mut out = vec![Complex64::default(); 5000];
            fill_chirp(&mut out, c);
            for (m, v) in out.iter().enumerate() {
                let direct = Complex64::from_polar(1.0, c * (m * m) as f64);
                assert!((v - direct).norm() < 1e-12, "c={c} m={m}");
            }
        }
        for theta in [0.0, 1e-9, -3e-4, 9.9e-3, 0.5, -2.0] {
            let (s, c) = f64::sin_cos(theta);
            assert!((rotation(theta) - Complex64::new(c, s)).norm() < 1e-16);
        }
    }

    #[test]
    fn linear_limit_matches_closed_form() {
        let link = FiberLinkConfig {
            gamma_per_w_km: 0.0,
            ..FiberLinkConfig::default()
        };
        let f = random_field(512, 1e-3, 1);
        let (out, stats) = ssfm_span(&f, &link, 0).unwrap();
        assert_eq!(stats.steps, 1);
        let freqs = fft_frequencies(512, 256e9);
        let l = link.span_length_m();
        for (input, output) in [(&f.x, &out.x), (&f.y, &out.y)] {
            let spec = naive_dft(input, -1.0);
            let filtered: Vec<_> = spec
                .iter()
                .zip(&freqs)
                .map(|(v, &fr)| {
                    let w = std::f64::consts::TAU * fr;
                    v * Complex64::from_polar(
                        (-0.5 * link.alpha_per_m() * l).exp(),
                        0.5 * link.beta2() * w * w * l,
                    )
                })
                .collect();
            let expected: Vec<_> = naive_dft(&filtered, 1.0).iter().map(|v| v / 512.0).collect();
            let err: f64 = expected.iter().zip(output.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
            let norm: f64 = expected.iter().map(|a| a.norm_sqr()).sum();
            assert!((err / norm).sqrt() < 1e-9, "relative error {}", (err / norm).sqrt());
        }
    }

    #[test]
    fn spm_limit_matches_closed_form() {
        let link = FiberLinkConfig {
            alpha_db_per_km: 0.0,
            dispersion_ps_nm_km: 0.0,
            span_length_km: 10.0,
            ..FiberLinkConfig::default()
        };
        let mut f = random_field(256, 2e-3, 2);
        f.y.iter_mut().for_each(|v| *v = Complex64::default());
        let (out, stats) = ssfm_span(&f, &link, 0).unwrap();
        assert!(stats.steps > 10);
        let k = MANAKOV_FACTOR * link.gamma_per_w_m() * link.span_length_m();
        for (a, b) in f.x.iter().zip(&out.x) {
            let expected = a * Complex64::from_polar(1.0, k * a.norm_sqr());
            assert!((expected - b).norm() <= 1e-6 * a.norm().max(1e-30));
        }
        assert!(out.y.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn energy_follows_attenuation() {
        let link = FiberLinkConfig::default();
        let f = random_field(1024, 5e-3, 3);
        let (out, stats) = ssfm_span(&f, &link, 0).unwrap();
        assert!(stats.steps > 1);
        let ratio = out.energy() / f.energy();
        assert!((ratio / db_to_linear(-16.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn step_size_honours_phase_budget() {
        let link = FiberLinkConfig::default();
        let p = 0.02;
        let dz = SsfmPropagator::step_size(&link, p, 80e3);
        let a = link.alpha_per_m();
        let l_eff = (1.0 - (-a * dz).exp()) / a;
        assert!((link.gamma_per_w_m() * p * l_eff - 1e-3).abs() < 1e-12);
        assert_eq!(SsfmPropagator::step_size(&link, 0.0, 500.0), 500.0);
        assert_eq!(SsfmPropagator::step_size(&link, 1e-9, 500.0), 500.0);
    }

    #[test]
    fn runaway_power_is_reported() {
        let f = random_field(64, 1e5, 8);
        let err = ssfm_span(&f, &FiberLinkConfig::default(), 3).unwrap_err();
        assert!(matches!(err, ChannelError::StepCollapse { span: 3, .. }), "{err}");
    }

    #[test]
    fn edfa_noise_variance() {
        let len = 1 << 20;
        let f = OpticalField::new(vec![Complex64::default(); len], vec![Complex64::default(); len], 256e9);
        let carrier = 193.41e12;
        let out = edfa(&f, 16.0, 6.0, carrier, &mut rng::stream(5, 0));
        let expected = ase_psd(16.0, 6.0, carrier) * 256e9;
        for pol in [&out.x, &out.y] {
            let var = pol.iter().map(|v| v.norm_sqr()).sum::<f64>() / len as f64;
            assert!((var / expected - 1.0).abs() < 0.02, "{var} vs {expected}");
        }
        let quiet = edfa(&random_field(64, 1e-3, 6), 16.0, f64::NEG_INFINITY, carrier, &mut rng::stream(5, 0));
        let reference = random_field(64, 1e-3, 6);
        for (a, b) in quiet.x.iter().zip(&reference.x) {
            assert!((a - b * db_to_linear(16.0).sqrt()).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_spans_is_identity_and_seed_is_reproducible() {
        let f = random_field(256, 1e-3, 7);
        let none = FiberLinkConfig {
            num_spans: 0,
            ..FiberLinkConfig::default()
        };
        assert_eq!(propagate_link(&f, &none, &mut rng::stream(1, 0)).unwrap().0, f);
        let two = FiberLinkConfig {
            num_spans: 2,
            span_length_km: 20.0,
            ..FiberLinkConfig::default()
        };
        let a = propagate_link(&f, &two, &mut rng::stream(1, 0)).unwrap();
        let b = propagate_link(&f, &two, &mut rng::stream(1, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.spans.len(), 2);
    }
}
