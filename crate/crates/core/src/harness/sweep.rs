use std::time::Instant;

use num_complex::Complex64;

use super::config::ExperimentConfig;
use crate::channel::{fft_friendly_guard, propagate_link, rrc_shape, wdm_mux};
use crate::mapping::{build_frame, build_uniform_frame, FrameSpec, PairingMode, QamConstellation, QamFrame};
use crate::metrics::{frame_metrics, MetricsReport};
use crate::receiver::{equalize_and_measure, rx_frontend};
use crate::rng::{self, derive_seed};
use crate::shaping::AmplitudeAlphabet;

/// Signal family of a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointKind {
    Shaped { pairing: PairingMode, n: usize },
    /// i.i.d. uniform QAM over the same square constellation size.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SweepPoint {
    pub kind: PointKind,
    pub interleaved: bool,
}

impl SweepPoint {
    pub fn block_length(&self) -> usize {
        match self.kind {
            PointKind::Shaped { n, .. } => n,
            PointKind::Uniform => 0,
        }
    }

    pub fn pairing_label(&self) -> &'static str {
        match self.kind {
            PointKind::Shaped { pairing, .. } => pairing.as_str(),
            PointKind::Uniform => "uniform",
        }
    }

    /// Emission order: pairing, then interleaver, then block length.
    fn sort_key(&self) -> (u8, bool, usize) {
        let family = match self.kind {
            PointKind::Shaped {
                pairing: PairingMode::Intra,
                ..
            } => 0,
            PointKind::Shaped {
                pairing: PairingMode::Inter,
                ..
            } => 1,
            PointKind::Uniform => 2,
        };
        (family, self.interleaved, self.block_length())
    }

    fn coordinates(&self) -> [u64; 4] {
        match self.kind {
            PointKind::Shaped { pairing, n } => [1, pairing as u64, n as u64, self.interleaved as u64],
            PointKind::Uniform => [2, 0, 0, self.interleaved as u64],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub point: SweepPoint,
    pub run: usize,
    pub seed: u64,
    /// `None` when propagation or reception failed; see `error`.
    pub snr_db: Option<f64>,
    pub metrics: MetricsReport,
    pub wall_s: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub point: SweepPoint,
    /// Successful runs contributing to the means.
    pub runs: usize,
    pub snr_db: Option<f64>,
    /// 95% normal-approximation interval; present only for two or more runs.
    pub ci_db: Option<(f64, f64)>,
    pub kl_bits: f64,
    pub kurtosis: f64,
    pub run_ratio: f64,
    pub run_ratio_abs: f64,
    pub run_ratio_arg: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub runs: Vec<RunRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl SweepResult {
    pub fn aggregate(&self, point: &SweepPoint) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| a.point == *point)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] super::config::ConfigError),
    #[error("frame generation failed for {point:?}: {message}")]
    Frame { point: SweepPoint, message: String },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Progress notification sent after each completed run.
#[derive(Debug, Clone)]
pub struct Progress<'a> {
    pub done: usize,
    pub total: usize,
    pub row: &'a RunRow,
}

/// All sweep points of `config`, in emission order.
pub fn sweep_points(config: &ExperimentConfig) -> Vec<SweepPoint> {
    let s = &config.sweep;
    let mut points = Vec::new();
    for &pairing in &s.pairing_modes {
        for &interleaved in &s.interleave {
            for &n in &s.block_lengths {
                points.push(SweepPoint {
                    kind: PointKind::Shaped { pairing, n },
                    interleaved,
                });
            }
        }
    }
    if s.uniform_reference {
        points.push(SweepPoint {
            kind: PointKind::Uniform,
            interleaved: false,
        });
    }
    points.sort_by_key(|p| p.sort_key());
    points.dedup();
    points
}

/// Seed of the signal content for one run of one sweep point.
pub fn run_seed(base_seed: u64, point: &SweepPoint, run: usize) -> u64 {
    let c = point.coordinates();
    derive_seed(base_seed, &[c[0], c[1], c[2], c[3], run as u64])
}

/// Seed of the amplifier noise for run `run`. Shared by all sweep points so
/// that points are compared under the same noise realization.
pub fn noise_seed(base_seed: u64, run: usize) -> u64 {
    derive_seed(base_seed, &[0xA5E, run as u64])
}

struct Context {
    alphabet: AmplitudeAlphabet,
    shaped: QamConstellation,
    uniform: QamConstellation,
    guard: usize,
}

fn channel_frame(
    config: &ExperimentConfig,
    ctx: &Context,
    point: &SweepPoint,
    seed: u64,
) -> Result<QamFrame, SweepError> {
    let s = &config.sweep;
    match point.kind {
        PointKind::Shaped { pairing, n } => {
            let spec = FrameSpec {
                block_length_n: n,
                pairing_mode: pairing,
                total_symbols: s.data_symbols(),
                interleave: point.interleaved,
                fec_block_len: s.fec_block_len,
            };
            build_frame(&ctx.alphabet, &ctx.shaped, &spec, seed).map_err(|e| SweepError::Frame {
                point: *point,
                message: e.to_string(),
            })
        }
        PointKind::Uniform => Ok(build_uniform_frame(&ctx.uniform, s.data_symbols(), s.fec_block_len, seed)),
    }
}

fn simulate_run(
    config: &ExperimentConfig,
    ctx: &Context,
    point: &SweepPoint,
    run: usize,
) -> Result<RunRow, SweepError> {
    let start = Instant::now();
    let seed = run_seed(config.sweep.base_seed, point, run);
    let center = config.wdm.center_channel();
    let frames = (0..config.wdm.num_channels)
        .map(|k| channel_frame(config, ctx, point, derive_seed(seed, &[k as u64])))
        .collect::<Result<Vec<_>, _>>()?;
    let constellation = match point.kind {
        PointKind::Shaped { .. } => &ctx.shaped,
        PointKind::Uniform => &ctx.uniform,
    };
    let metrics = frame_metrics(&frames[center], constellation).map_err(|e| SweepError::Frame {
        point: *point,
        message: e.to_string(),
    })?;

    let received = (|| -> Result<f64, String> {
        let power = config.link.launch_power_dbm;
        let fields: Vec<_> = frames
            .iter()
            .map(|f| rrc_shape(f, &config.wdm, power, ctx.guard))
            .collect();
        let tx = wdm_mux(&fields, &config.wdm).map_err(|e| e.to_string())?;
        drop(fields);
        let mut noise = rng::stream(noise_seed(config.sweep.base_seed, run), 0);
        let (rx, _) = propagate_link(&tx, &config.link, &mut noise).map_err(|e| e.to_string())?;
        drop(tx);
        let (y_x, y_y) = rx_frontend(&rx, &config.wdm, &config.link, ctx.guard).map_err(|e| e.to_string())?;
        let x: (&[Complex64], &[Complex64]) = (&frames[center].symbols_x, &frames[center].symbols_y);
        let (_, snr) = equalize_and_measure((&y_x, &y_y), x).map_err(|e| e.to_string())?;
        Ok(snr)
    })();

    let wall = start.elapsed().as_secs_f64();
    let (snr_db, error) = match received {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e)),
    };
    Ok(RunRow {
        point: *point,
        run,
        seed,
        snr_db,
        metrics,
        wall_s: config.sweep.record_wall_time.then_some(wall),
        error,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean and 95% normal-approximation interval of `samples`.
pub fn mean_ci95(samples: &[f64]) -> (f64, Option<(f64, f64)>) {
    let m = mean(samples);
    if samples.len() < 2 {
        return (m, None);
    }
    let var = samples.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
    let half = 1.959_963_984_540_054 * (var / samples.len() as f64).sqrt();
    (m, Some((m - half, m + half)))
}

/// Per-point aggregates over the successful runs in `runs`.
pub fn aggregate(runs: &[RunRow]) -> Vec<AggregateRow> {
    let mut points: Vec<SweepPoint> = runs.iter().map(|r| r.point).collect();
    points.sort_by_key(|p| p.sort_key());
    points.dedup();
    points
        .into_iter()
        .map(|point| {
            let mut rows: Vec<&RunRow> = runs.iter().filter(|r| r.point == point).collect();
            rows.sort_by_key(|r| r.run);
            let snrs: Vec<f64> = rows.iter().filter_map(|r| r.snr_db).collect();
            let (snr_db, ci_db) = if snrs.is_empty() {
                (None, None)
            } else {
                let (m, ci) = mean_ci95(&snrs);
                (Some(m), ci)
            };
            let avg = |f: fn(&MetricsReport) -> f64| mean(&rows.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>());
            AggregateRow {
                point,
                runs: snrs.len(),
                snr_db,
                ci_db,
                kl_bits: avg(|m| m.kl_bits),
                kurtosis: avg(|m| m.kurtosis),
                run_ratio: avg(|m| m.run_ratio),
                run_ratio_abs: avg(|m| m.run_ratio_abs),
                run_ratio_arg: avg(|m| m.run_ratio_arg),
            }
        })
        .collect()
}

/// Runs every (point, run) pair of the sweep on a worker pool and assembles
/// the rows in deterministic order. `progress` is called once per finished run.
pub fn run_sweep(
    config: &ExperimentConfig,
    progress: &(dyn Fn(Progress<'_>) + Sync),
) -> Result<SweepResult, SweepError> {
    use rayon::prelude::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    config.validate()?;
    let alphabet = config.alphabet()?;
    let uniform_alphabet = AmplitudeAlphabet::uniform(alphabet.arity()).map_err(|e| {
        SweepError::Config(super::config::ConfigError::Invalid {
            field: "shaping".into(),
            message: e.to_string(),
        })
    })?;
    let data = config.sweep.data_symbols();
    let ctx = Context {
        shaped: QamConstellation::new(&alphabet),
        uniform: QamConstellation::new(&uniform_alphabet),
        alphabet,
        guard: fft_friendly_guard(data, config.sweep.min_guard_symbols),
    };
    let jobs: Vec<(SweepPoint, usize)> = sweep_points(config)
        .into_iter()
        .flat_map(|p| (0..config.sweep.num_runs).map(move |r| (p, r)))
        .collect();
    let total = jobs.len();
    let done = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.sweep.workers)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let mut runs = pool.install(|| {
        jobs.par_iter()
            .map(|(point, run)| {
                let row = simulate_run(config, &ctx, point, *run)?;
                let d = done.fetch_add(1, Ordering::SeqCst) + 1;
                progress(Progress {
                    done: d,
                    total,
                    row: &row,
                });
                Ok(row)
            })
            .collect::<Result<Vec<_>, SweepError>>()
    })?;
    runs.sort_by_key(|r| (r.point.sort_key(), r.run));
    let aggregates = aggregate(&runs);
    Ok(SweepResult { runs, aggregates })
}
