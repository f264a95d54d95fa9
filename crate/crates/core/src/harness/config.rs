use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::channel::{FiberLinkConfig, WdmConfig};
use crate::mapping::{PairingMode, DEFAULT_FEC_BLOCK_LEN};
use crate::shaping::AmplitudeAlphabet;

/// Environment variable that overrides the configured base seed.
pub const SEED_ENV: &str = "RNG_SEED";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

/// One-sided amplitude alphabet and target PMF.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShapingConfig {
    pub amplitudes: Vec<f64>,
    pub pmf: Vec<f64>,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        let a = AmplitudeAlphabet::pas64();
        Self {
            amplitudes: a.amplitudes().to_vec(),
            pmf: a.pmf().to_vec(),
        }
    }
}

/// Sweep coordinates and Monte-Carlo settings.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub block_lengths: Vec<usize>,
    pub pairing_modes: Vec<PairingMode>,
    pub interleave: Vec<bool>,
    /// Adds i.i.d. uniform 64QAM rows (reported as `n = 0`, pairing `uniform`).
    pub uniform_reference: bool,
    /// Requested symbols per polarization; rounded down to whole FEC blocks.
    pub symbols_per_run: usize,
    pub num_runs: usize,
    pub base_seed: u64,
    pub fec_block_len: usize,
    /// Minimum cyclic guard around each frame, in symbols.
    pub min_guard_symbols: usize,
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
    /// Fills the `wall_s` column. Off by default so that CSVs are reproducible.
    pub record_wall_time: bool,
    pub output: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            block_lengths: vec![10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000],
            pairing_modes: vec![PairingMode::Intra, PairingMode::Inter],
            interleave: vec![false, true],
            uniform_reference: true,
            symbols_per_run: 500_000,
            num_runs: 10,
            base_seed: 1,
            fec_block_len: DEFAULT_FEC_BLOCK_LEN,
            min_guard_symbols: 512,
            workers: 0,
            record_wall_time: false,
            output: PathBuf::from("sweep.csv"),
        }
    }
}

impl SweepConfig {
    /// Data symbols per polarization actually simulated.
    pub fn data_symbols(&self) -> usize {
        self.symbols_per_run / self.fec_block_len * self.fec_block_len
    }
}

/// Full experiment description. Every omitted field takes its reference value.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub wdm: WdmConfig,
    pub link: FiberLinkConfig,
    pub shaping: ShapingConfig,
    pub sweep: SweepConfig,
}

/// Experiment size presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scale {
    /// 3 channels, 5 spans, 2^16 symbols, 4 runs, n in {10, 100, 1000, 10000},
    /// intra pairing with and without interleaver.
    Desk,
    /// The full reference system: 5 channels, 10 spans, ~500k symbols, 10 runs.
    Paper,
}

impl Scale {
    /// Overrides the size-related fields of `config`.
    pub fn apply(self, config: &mut ExperimentConfig) {
        match self {
            Scale::Desk => {
                config.wdm.num_channels = 3;
                config.link.num_spans = 5;
                config.sweep.symbols_per_run = 1 << 16;
                config.sweep.num_runs = 4;
                config.sweep.block_lengths = vec![10, 100, 1000, 10000];
                config.sweep.pairing_modes = vec![PairingMode::Intra];
                config.sweep.interleave = vec![false, true];
                config.sweep.uniform_reference = false;
            }
            Scale::Paper => {
                let reference = ExperimentConfig::default();
                config.wdm.num_channels = reference.wdm.num_channels;
                config.link.num_spans = reference.link.num_spans;
                config.sweep.symbols_per_run = reference.sweep.symbols_per_run;
                config.sweep.num_runs = reference.sweep.num_runs;
                config.sweep.block_lengths = reference.sweep.block_lengths;
                config.sweep.pairing_modes = reference.sweep.pairing_modes;
                config.sweep.interleave = reference.sweep.interleave;
                config.sweep.uniform_reference = true;
            }
        }
    }
}

impl ExperimentConfig {
    pub fn alphabet(&self) -> Result<AmplitudeAlphabet, ConfigError> {
        AmplitudeAlphabet::new(self.shaping.amplitudes.clone(), self.shaping.pmf.clone())
            .map_err(|e| invalid("shaping", e.to_string()))
    }

    /// Checks all invariants and returns warnings that do not prevent a run.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        self.wdm.validate().map_err(|e| invalid("wdm", e.to_string()))?;
        self.link.validate().map_err(|e| invalid("link", e.to_string()))?;
        self.alphabet()?;
        let s = &self.sweep;
        if s.num_runs == 0 {
            return Err(invalid("sweep.num_runs", "must be at least 1"));
        }
        if s.fec_block_len == 0 {
            return Err(invalid("sweep.fec_block_len", "must be positive"));
        }
        if s.data_symbols() == 0 {
            return Err(invalid(
                "sweep.symbols_per_run",
                format!("{} is less than one FEC block of {}", s.symbols_per_run, s.fec_block_len),
            ));
        }
        if s.interleave.is_empty() {
            return Err(invalid("sweep.interleave", "needs at least one entry"));
        }
        let shaped_points = s.block_lengths.len() * s.pairing_modes.len();
        if shaped_points == 0 && !s.uniform_reference {
            return Err(invalid("sweep", "no sweep points (block_lengths or pairing_modes empty)"));
        }
        for (i, &n) in s.block_lengths.iter().enumerate() {
            if n == 0 {
                return Err(invalid(&format!("sweep.block_lengths[{i}]"), "must be positive"));
            }
            if n % 2 != 0 && s.pairing_modes.contains(&PairingMode::Intra) {
                return Err(invalid(
                    &format!("sweep.block_lengths[{i}]"),
                    format!("intra pairing needs even block lengths, got {n}"),
                ));
            }
        }
        let mut warnings = Vec::new();
        if s.symbols_per_run < 10 * s.fec_block_len {
            warnings.push(format!(
                "sweep.symbols_per_run = {} is below 10 FEC blocks ({})",
                s.symbols_per_run,
                10 * s.fec_block_len
            ));
        }
        Ok(warnings)
    }
}

/// Parses a TOML experiment description; unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Reads, parses and validates a config file, then applies the `RNG_SEED`
/// override. Returns the config with any non-fatal warnings.
pub fn load_config(path: &Path) -> Result<(ExperimentConfig, Vec<String>), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    apply_seed_env(&mut config)?;
    let warnings = config.validate()?;
    Ok((config, warnings))
}

pub fn apply_seed_env(config: &mut ExperimentConfig) -> Result<(), ConfigError> {
    if let Ok(v) = std::env::var(SEED_ENV) {
        config.sweep.base_seed = v
            .trim()
            .parse()
            .map_err(|_| invalid(SEED_ENV, format!("not an unsigned integer: {v:?}")))?;
    }
    Ok(())
}
