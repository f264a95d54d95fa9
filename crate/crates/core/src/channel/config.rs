use serde::{Deserialize, Deserializer};

use super::{ChannelError, SPEED_OF_LIGHT};

/// Fiber link parameters. Defaults are a 10 × 80 km standard single-mode link.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberLinkConfig {
    pub span_length_km: f64,
    pub num_spans: usize,
    pub alpha_db_per_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub gamma_per_w_km: f64,
    pub edfa_noise_figure_db: f64,
    #[serde(deserialize_with = "deserialize_dbm")]
    pub launch_power_dbm: f64,
    pub max_nl_phase_rad: f64,
    pub reference_wavelength_nm: f64,
}

impl Default for FiberLinkConfig {
    fn default() -> Self {
        Self {
            span_length_km: 80.0,
            num_spans: 10,
            alpha_db_per_km: 0.2,
            dispersion_ps_nm_km: 17.0,
            gamma_per_w_km: 1.37,
            edfa_noise_figure_db: 6.0,
            launch_power_dbm: -0.5,
            max_nl_phase_rad: 1e-3,
            reference_wavelength_nm: 1550.0,
        }
    }
}

impl FiberLinkConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let positive = [
            ("span_length_km", self.span_length_km),
            ("max_nl_phase_rad", self.max_nl_phase_rad),
            ("reference_wavelength_nm", self.reference_wavelength_nm),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ChannelError::Config(format!("link.{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("alpha_db_per_km", self.alpha_db_per_km),
            ("dispersion_ps_nm_km", self.dispersion_ps_nm_km.abs()),
            ("gamma_per_w_km", self.gamma_per_w_km),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ChannelError::Config(format!(
                    "link.{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.num_spans == 0 {
            return Err(ChannelError::Config("link.num_spans must be at least 1".into()));
        }
        if !self.launch_power_dbm.is_finite() {
            return Err(ChannelError::Config("link.launch_power_dbm must be finite".into()));
        }
        if self.edfa_noise_figure_db.is_nan() {
            return Err(ChannelError::Config("link.edfa_noise_figure_db is NaN".into()));
        }
        Ok(())
    }

    pub fn span_length_m(&self) -> f64 {
        self.span_length_km * 1e3
    }

    /// Power attenuation coefficient in 1/m.
    pub fn alpha_per_m(&self) -> f64 {
        self.alpha_db_per_km * std::f64::consts::LN_10 / 10.0 / 1e3
    }

    /// Nonlinear coefficient in 1/(W·m).
    pub fn gamma_per_w_m(&self) -> f64 {
        self.gamma_per_w_km / 1e3
    }

    /// Group-velocity dispersion in s²/m, from D at the reference wavelength.
    pub fn beta2(&self) -> f64 {
        let lambda = self.reference_wavelength_nm * 1e-9;
        let d = self.dispersion_ps_nm_km * 1e-6; // s/m²
        -d * lambda * lambda / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT)
    }

    pub fn carrier_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / (self.reference_wavelength_nm * 1e-9)
    }

    /// Span loss in dB, which each amplifier compensates exactly.
    pub fn span_loss_db(&self) -> f64 {
        self.alpha_db_per_km * self.span_length_km
    }
}

/// WDM grid and transmitter parameters. Defaults: 5 × 32 GBd on a 50 GHz grid.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WdmConfig {
    pub num_channels: usize,
    pub spacing_ghz: f64,
    pub symbol_rate_gbd: f64,
    pub rolloff: f64,
    pub oversampling: usize,
}

impl Default for WdmConfig {
    fn default() -> Self {
        Self {
            num_channels: 5,
            spacing_ghz: 50.0,
            symbol_rate_gbd: 32.0,
            rolloff: 0.1,
            oversampling: 8,
        }
    }
}

impl WdmConfig {
    pub fn symbol_rate(&self) -> f64 {
        self.symbol_rate_gbd * 1e9
    }

    pub fn sample_rate(&self) -> f64 {
        self.symbol_rate() * self.oversampling as f64
    }

    pub fn spacing(&self) -> f64 {
        self.spacing_ghz * 1e9
    }

    pub fn center_channel(&self) -> usize {
        self.num_channels / 2
    }

    /// Nominal frequency of channel `k` relative to the grid center.
    pub fn channel_frequency(&self, k: usize) -> f64 {
        (k as f64 - (self.num_channels as f64 - 1.0) / 2.0) * self.spacing()
    }

    /// Highest occupied frequency of the composite signal.
    pub fn band_edge(&self) -> f64 {
        (self.num_channels as f64 - 1.0) / 2.0 * self.spacing()
            + (1.0 + self.rolloff) * self.symbol_rate() / 2.0
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.num_channels == 0 || self.num_channels.is_multiple_of(2) {
            return Err(ChannelError::Config(format!(
                "wdm.num_channels must be odd, got {}",
                self.num_channels
            )));
        }
        if !(self.symbol_rate_gbd.is_finite() && self.symbol_rate_gbd > 0.0) {
            return Err(ChannelError::Config("wdm.symbol_rate_gbd must be positive".into()));
        }
        if !(self.spacing_ghz.is_finite() && self.spacing_ghz > 0.0) {
            return Err(ChannelError::Config("wdm.spacing_ghz must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(ChannelError::Config(format!(
                "wdm.rolloff must lie in [0, 1], got {}",
                self.rolloff
            )));
        }
        if self.oversampling < 2 {
            return Err(ChannelError::Config("wdm.oversampling must be at least 2".into()));
        }
        let nyquist = self.sample_rate() / 2.0;
        if self.band_edge() >= nyquist {
            return Err(ChannelError::Nyquist {
                edge_ghz: self.band_edge() / 1e9,
                nyquist_ghz: nyquist / 1e9,
            });
        }
        Ok(())
    }
}

/// Parses `-0.5`, `"-0.5"` or `"-0.5 dBm"` as dBm.
pub fn parse_power_dbm(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let number = t
        .strip_suffix("dBm")
        .or_else(|| t.strip_suffix("dbm"))
        .unwrap_or(t)
        .trim();
    number
        .parse::<f64>()
        .map_err(|_| format!("cannot parse power '{text}' (expected e.g. \"-0.5 dBm\")"))
}

fn deserialize_dbm<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Power {
        Number(f64),
        Text(String),
    }
    match Power::deserialize(d)? {
        Power::Number(v) => Ok(v),
        Power::Text(s) => parse_power_dbm(&s).map_err(serde::de::Error::custom),
    }
}
