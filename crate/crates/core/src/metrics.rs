//! Sequence statistics: empirical PMF, KL divergence, 2D kurtosis and run ratios.

use num_complex::Complex64;

use crate::mapping::{QamConstellation, QamFrame};

/// Tolerance for magnitude and phase equality, and for on-grid matching.
pub const EQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("empty symbol stream")]
    Empty,
    #[error("symbol {index} ({value}) is not on the constellation grid")]
    OffGrid { index: usize, value: Complex64 },
    #[error("symbol {0} is zero, its phase is undefined")]
    ZeroSymbol(usize),
    #[error("kurtosis is undefined for a constant stream")]
    ConstantStream,
}

/// Per-run sequence statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    /// `+inf` when a point with positive expected probability never occurs.
    pub kl_bits: f64,
    pub kurtosis: f64,
    pub run_ratio: f64,
    pub run_ratio_abs: f64,
    pub run_ratio_arg: f64,
    pub n_sim: usize,
}

pub fn empirical_pmf_from_labels(labels: &[u16], num_points: usize) -> Vec<f64> {
    let mut counts = vec![0usize; num_points];
    for &l in labels {
        counts[l as usize] += 1;
    }
    let total = labels.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / total).collect()
}

/// Grid labels of on-grid symbols.
pub fn labels_of(
    symbols: &[Complex64],
    constellation: &QamConstellation,
) -> Result<Vec<u16>, MetricsError> {
    symbols
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            constellation
                .index_of(value, EQ_TOL)
                .ok_or(MetricsError::OffGrid { index, value })
        })
        .collect()
}

pub fn empirical_pmf(
    symbols: &[Complex64],
    constellation: &QamConstellation,
) -> Result<Vec<f64>, MetricsError> {
    if symbols.is_empty() {
        return Err(MetricsError::Empty);
    }
    let labels = labels_of(symbols, constellation)?;
    Ok(empirical_pmf_from_labels(&labels, constellation.len()))
}

/// `Σ P(x) log2(P(x)/Q(x))` with `P` the expected and `Q` the empirical PMF.
/// Returns `+inf` if `Q(x) = 0` where `P(x) > 0`.
pub fn kl_divergence(expected: &[f64], empirical: &[f64]) -> f64 {
    expected
        .iter()
        .zip(empirical)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &q)| {
            if q > 0.0 {
                p * (p / q).log2()
            } else {
                f64::INFINITY
            }
        })
        .sum()
}

pub fn kl_divergence_of_symbols(
    constellation: &QamConstellation,
    symbols: &[Complex64],
) -> Result<f64, MetricsError> {
    let q = empirical_pmf(symbols, constellation)?;
    Ok(kl_divergence(constellation.expected_pmf(), &q))
}

/// Standardized fourth moment `E|X-μ|⁴ / (E|X-μ|²)²` around the sample mean.
pub fn kurtosis_2d(symbols: &[Complex64]) -> Result<f64, MetricsError> {
    if symbols.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = symbols.len() as f64;
    let mean = symbols.iter().sum::<Complex64>() / n;
    let (m2, m4) = symbols.iter().fold((0.0, 0.0), |(m2, m4), &x| {
        let e = (x - mean).norm_sqr();
        (m2 + e, m4 + e * e)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2 == 0.0 || m2 < 1e-24 * mean.norm_sqr() {
        return Err(MetricsError::ConstantStream);
    }
    Ok(m4 / (m2 * m2))
}

fn ratio_by<T>(items: &[T], differs: impl Fn(&T, &T) -> bool) -> Result<f64, MetricsError> {
    if items.is_empty() {
        return Err(MetricsError::Empty);
    }
    let changes = items.windows(2).filter(|w| differs(&w[0], &w[1])).count();
    Ok((1 + changes) as f64 / items.len() as f64)
}

/// Number of maximal runs of equal values divided by the length.
pub fn run_ratio<T: PartialEq>(symbols: &[T]) -> Result<f64, MetricsError> {
    ratio_by(symbols, |a, b| a != b)
}

/// Run ratio with equality on `|x|`.
pub fn run_ratio_abs(symbols: &[Complex64]) -> Result<f64, MetricsError> {
    ratio_by(symbols, |a, b| (a.norm() - b.norm()).abs() > EQ_TOL)
}

fn phase_differs(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d) > EQ_TOL
}

/// Run ratio with equality on `arg(x)`. Zero symbols are rejected.
pub fn run_ratio_arg(symbols: &[Complex64]) -> Result<f64, MetricsError> {
    if let Some(i) = symbols.iter().position(|x| x.norm_sqr() == 0.0) {
        return Err(MetricsError::ZeroSymbol(i));
    }
    ratio_by(symbols, |a, b| phase_differs(a.arg(), b.arg()))
}

/// Run ratio of constellation labels with equality on the unscaled magnitude.
pub fn run_ratio_abs_labels(
    labels: &[u16],
    constellation: &QamConstellation,
) -> Result<f64, MetricsError> {
    let energy = |l: &u16| {
        let (re, im) = constellation.unscaled(*l);
        re * re + im * im
    };
    ratio_by(labels, |a, b| (energy(a) - energy(b)).abs() > EQ_TOL)
}

/// Run ratio of constellation labels with equality on the phase, tested as
/// parallel unscaled vectors pointing the same way.
pub fn run_ratio_arg_labels(
    labels: &[u16],
    constellation: &QamConstellation,
) -> Result<f64, MetricsError> {
    ratio_by(labels, |a, b| {
        let (ar, ai) = constellation.unscaled(*a);
        let (br, bi) = constellation.unscaled(*b);
        let cross = ar * bi - ai * br;
        let dot = ar * br + ai * bi;
        cross.abs() > EQ_TOL || dot <= 0.0
    })
}

/// Metrics of a transmitted frame. PMF-based metrics pool both polarizations;
/// run ratios are computed per polarization and averaged.
pub fn frame_metrics(
    frame: &QamFrame,
    constellation: &QamConstellation,
) -> Result<MetricsReport, MetricsError> {
    let mut pooled = frame.labels_x.clone();
    pooled.extend_from_slice(&frame.labels_y);
    let q = empirical_pmf_from_labels(&pooled, constellation.len());
    let kl_bits = kl_divergence(constellation.expected_pmf(), &q);
    let mut symbols = frame.symbols_x.clone();
    symbols.extend_from_slice(&frame.symbols_y);
    let kurtosis = kurtosis_2d(&symbols)?;
    let avg = |f: &dyn Fn(&[u16]) -> Result<f64, MetricsError>| -> Result<f64, MetricsError> {
        Ok(0.5 * (f(&frame.labels_x)? + f(&frame.labels_y)?))
    };
    Ok(MetricsReport {
        kl_bits,
        kurtosis,
        run_ratio: avg(&|l| run_ratio(l))?,
        run_ratio_abs: avg(&|l| run_ratio_abs_labels(l, constellation))?,
        run_ratio_arg: avg(&|l| run_ratio_arg_labels(l, constellation))?,
        n_sim: frame.len(),
    })
}

/// Metrics of raw dual-polarization symbol streams (e.g. read from a symbol file).
pub fn symbol_metrics(
    x: &[Complex64],
    y: &[Complex64],
    constellation: &QamConstellation,
) -> Result<MetricsReport, MetricsError> {
    if x.is_empty() || y.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut all = x.to_vec();
    all.extend_from_slice(y);
    let q = empirical_pmf(&all, constellation)?;
    Ok(MetricsReport {
        kl_bits: kl_divergence(constellation.expected_pmf(), &q),
        kurtosis: kurtosis_2d(&all)?,
        run_ratio: 0.5 * (run_ratio(&labels_of(x, constellation)?)? + run_ratio(&labels_of(y, constellation)?)?),
        run_ratio_abs: 0.5 * (run_ratio_abs(x)? + run_ratio_abs(y)?),
        run_ratio_arg: 0.5 * (run_ratio_arg(x)? + run_ratio_arg(y)?),
        n_sim: x.len(),
    })
}
