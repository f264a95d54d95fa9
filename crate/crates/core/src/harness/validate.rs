//! Analytic limit checks of the transmission chain, run by `ccsim validate`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{
    ase_psd, dbm_to_watts, propagate_link, rrc_shape, ssfm_span, FiberLinkConfig, OpticalField, WdmConfig,
    MANAKOV_FACTOR,
};
use crate::mapping::{build_frame, FrameSpec, PairingMode, QamConstellation};
use crate::receiver::{equalize_and_measure, rx_frontend};
use crate::rng;
use crate::shaping::AmplitudeAlphabet;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

fn gaussian_field(len: usize, power_w: f64, seed: u64) -> OpticalField {
    let mut r = rng::stream(seed, 0);
    let mut draw =
        || Complex64::new(r.sample::<f64, _>(StandardNormal), r.sample::<f64, _>(StandardNormal));
    let x: Vec<_> = (0..len).map(|_| draw()).collect();
    let y: Vec<_> = (0..len).map(|_| draw()).collect();
    let mut f = OpticalField::new(x, y, 256e9);
    let k = (power_w / f.mean_power()).sqrt();
    f.x.iter_mut().chain(f.y.iter_mut()).for_each(|v| *v *= k);
    f
}

/// Direct DFT with `exp(sign·j2πkt/N)` kernels.
fn direct_dft(data: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = data.len();
    (0..n)
        .map(|k| {
            data.iter()
                .enumerate()
                .map(|(t, &v)| v * Complex64::from_polar(1.0, sign * std::f64::consts::TAU * ((k * t) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let err: f64 = a.iter().zip(b).map(|(u, v)| (u - v).norm_sqr()).sum();
    let norm: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    (err / norm).sqrt()
}

/// Without nonlinearity, one span equals the dispersion-and-loss filter.
pub fn check_linear_limit() -> CheckOutcome {
    let link = FiberLinkConfig {
        gamma_per_w_km: 0.0,
        ..FiberLinkConfig::default()
    };
    let len = 512;
    let field = gaussian_field(len, 1e-3, 1);
    let detail;
    let passed = match ssfm_span(&field, &link, 0) {
        Ok((out, _)) => {
            let l = link.span_length_m();
            let att = (-0.5 * link.alpha_per_m() * l).exp();
            let mut worst = 0.0f64;
            for (input, output) in [(&field.x, &out.x), (&field.y, &out.y)] {
                let spectrum = direct_dft(input, -1.0);
                let filtered: Vec<_> = spectrum
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let m = if 2 * k < len { k as f64 } else { k as f64 - len as f64 };
                        let w = std::f64::consts::TAU * m * field.sample_rate / len as f64;
                        v * Complex64::from_polar(att, 0.5 * link.beta2() * w * w * l)
                    })
                    .collect();
                let expected: Vec<_> = direct_dft(&filtered, 1.0).iter().map(|v| v / len as f64).collect();
                worst = worst.max(relative_error(output, &expected));
            }
            detail = format!("relative error {worst:.2e} (limit 1e-9)");
            worst <= 1e-9
        }
        Err(e) => {
            detail = e.to_string();
            false
        }
    };
    CheckOutcome {
        name: "linear limit (gamma = 0)",
        passed,
        detail,
    }
}

/// Without loss and dispersion, the field only picks up `8/9·γ·P·L` of phase.
pub fn check_spm_limit() -> CheckOutcome {
    let link = FiberLinkConfig {
        alpha_db_per_km: 0.0,
        dispersion_ps_nm_km: 0.0,
        span_length_km: 20.0,
        ..FiberLinkConfig::default()
    };
    let field = gaussian_field(1024, 5e-3, 2);
    let detail;
    let passed = match ssfm_span(&field, &link, 0) {
        Ok((out, stats)) => {
            let k = MANAKOV_FACTOR * link.gamma_per_w_m() * link.span_length_m();
            let rot: Vec<Complex64> = field
                .x
                .iter()
                .zip(&field.y)
                .map(|(a, b)| Complex64::from_polar(1.0, k * (a.norm_sqr() + b.norm_sqr())))
                .collect();
            let ex: Vec<_> = field.x.iter().zip(&rot).map(|(a, r)| a * r).collect();
            let ey: Vec<_> = field.y.iter().zip(&rot).map(|(a, r)| a * r).collect();
            let worst = relative_error(&out.x, &ex).max(relative_error(&out.y, &ey));
            detail = format!("relative error {worst:.2e} over {} steps (limit 1e-6)", stats.steps);
            worst <= 1e-6
        }
        Err(e) => {
            detail = e.to_string();
            false
        }
    };
    CheckOutcome {
        name: "self-phase modulation limit (alpha = 0, D = 0)",
        passed,
        detail,
    }
}

/// Nonlinear propagation keeps energy up to fiber loss.
pub fn check_energy() -> CheckOutcome {
    let link = FiberLinkConfig::default();
    let field = gaussian_field(2048, 10e-3, 3);
    let (passed, detail) = match ssfm_span(&field, &link, 0) {
        Ok((out, _)) => {
            let expected = (-link.alpha_per_m() * link.span_length_m()).exp();
            let dev = (out.energy() / field.energy() / expected - 1.0).abs();
            (dev <= 1e-9, format!("relative deviation {dev:.2e} (limit 1e-9)"))
        }
        Err(e) => (false, e.to_string()),
    };
    CheckOutcome {
        name: "energy follows span loss",
        passed,
        detail,
    }
}

/// SNR of a linear link limited only by amplifier noise, in dB.
pub fn analytic_ase_snr_db(link: &FiberLinkConfig, wdm: &WdmConfig) -> f64 {
    let signal_per_pol = dbm_to_watts(link.launch_power_dbm) / 2.0;
    let psd = ase_psd(link.span_loss_db(), link.edfa_noise_figure_db, link.carrier_frequency());
    10.0 * (signal_per_pol / (link.num_spans as f64 * psd * wdm.symbol_rate())).log10()
}

/// Measures the effective SNR of a single-channel linear link.
pub fn simulated_linear_snr_db(
    link: &FiberLinkConfig,
    wdm: &WdmConfig,
    symbols: usize,
    seed: u64,
) -> Result<f64, String> {
    let alphabet = AmplitudeAlphabet::pas64();
    let constellation = QamConstellation::new(&alphabet);
    let spec = FrameSpec {
        block_length_n: 100,
        pairing_mode: PairingMode::Intra,
        total_symbols: symbols,
        interleave: false,
        fec_block_len: symbols,
    };
    let frame = build_frame(&alphabet, &constellation, &spec, seed).map_err(|e| e.to_string())?;
    let field = rrc_shape(&frame, wdm, link.launch_power_dbm, 0);
    let (out, _) =
        propagate_link(&field, link, &mut rng::stream(seed, 99)).map_err(|e| e.to_string())?;
    let (y_x, y_y) = rx_frontend(&out, wdm, link, 0).map_err(|e| e.to_string())?;
    let (_, snr) = equalize_and_measure((&y_x, &y_y), (&frame.symbols_x, &frame.symbols_y))
        .map_err(|e| e.to_string())?;
    Ok(snr)
}

/// With `γ = 0`, the reference link must land on the amplifier-noise budget.
pub fn check_ase_budget() -> CheckOutcome {
    let link = FiberLinkConfig {
        gamma_per_w_km: 0.0,
        ..FiberLinkConfig::default()
    };
    let wdm = WdmConfig {
        num_channels: 1,
        ..WdmConfig::default()
    };
    let expected = analytic_ase_snr_db(&link, &wdm);
    let (passed, detail) = match simulated_linear_snr_db(&link, &wdm, 1 << 15, 4) {
        Ok(snr) => (
            (snr - expected).abs() <= 0.1,
            format!("simulated {snr:.3} dB vs analytic {expected:.3} dB (limit 0.1 dB)"),
        ),
        Err(e) => (false, e),
    };
    CheckOutcome {
        name: "amplifier-noise SNR budget (gamma = 0, 10 spans)",
        passed,
        detail,
    }
}

pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        check_linear_limit(),
        check_spm_limit(),
        check_energy(),
        check_ase_budget(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_all() {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn reference_budget_value() {
        let snr = analytic_ase_snr_db(&FiberLinkConfig::default(), &WdmConfig::default());
        assert!((snr - 21.5).abs() < 0.1, "{snr}");
    }
}
