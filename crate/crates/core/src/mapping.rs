//! PAS symbol generation: amplitude pairing, sign bits, constellation
//! normalization and the per-FEC-block interleaver.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::rng;
use crate::shaping::{
    composition_from_pmf, AmplitudeAlphabet, AmplitudeSequence, Ccdm, ShapingError,
};

/// QAM symbols per FEC block (64800 bits of 64QAM).
pub const DEFAULT_FEC_BLOCK_LEN: usize = 10_800;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MappingError {
    #[error("intra-DM pairing needs an even number of amplitudes, got {0}")]
    OddLength(usize),
    #[error("inter-DM pairing needs equal lengths, got {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("need {needed} sign bits, got {got}")]
    InsufficientSignBits { needed: usize, got: usize },
    #[error("amplitude index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("frame length {len} is not a multiple of the FEC block length {fec}")]
    NotFecAligned { len: usize, fec: usize },
    #[error("incompatible frame sizes: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Shaping(#[from] ShapingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingMode {
    Intra,
    Inter,
}

impl PairingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PairingMode::Intra => "intra",
            PairingMode::Inter => "inter",
        }
    }
}

impl fmt::Display for PairingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "intra" => Ok(PairingMode::Intra),
            "inter" => Ok(PairingMode::Inter),
            other => Err(format!("unknown pairing mode '{other}' (expected intra|inter)")),
        }
    }
}

/// Amplitude-index pairs `(a_I, a_Q)` forming QAM payloads.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PairedAmplitudes {
    pub pairs: Vec<(u8, u8)>,
}

impl PairedAmplitudes {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Pairs adjacent amplitudes: first with second, third with fourth, and so on.
pub fn pair_intra(seq: &AmplitudeSequence) -> Result<PairedAmplitudes, MappingError> {
    if !seq.len().is_multiple_of(2) {
        return Err(MappingError::OddLength(seq.len()));
    }
    let pairs = seq.symbols.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    Ok(PairedAmplitudes { pairs })
}

/// Pairs position `i` of one DM output with position `i` of another.
pub fn pair_inter(
    a: &AmplitudeSequence,
    b: &AmplitudeSequence,
) -> Result<PairedAmplitudes, MappingError> {
    if a.len() != b.len() {
        return Err(MappingError::LengthMismatch(a.len(), b.len()));
    }
    let pairs = a
        .symbols
        .iter()
        .zip(&b.symbols)
        .map(|(&x, &y)| (x, y))
        .collect();
    Ok(PairedAmplitudes { pairs })
}

/// Square QAM grid `{±a_i ± j·a_k}` scaled to unit energy under the target PMF.
///
/// Points are indexed `li * side + lq`, where `side = 2·arity` and a level index
/// runs over the signed levels in ascending order (`-a_max .. -a_min, a_min .. a_max`).
#[derive(Debug, Clone)]
pub struct QamConstellation {
    arity: usize,
    levels: Vec<f64>,
    scale: f64,
    points: Vec<Complex64>,
    expected_pmf: Vec<f64>,
}

impl QamConstellation {
    pub fn new(alphabet: &AmplitudeAlphabet) -> Self {
        let arity = alphabet.arity();
        let amps = alphabet.amplitudes();
        let mut levels: Vec<f64> = amps.iter().rev().map(|a| -a).collect();
        levels.extend_from_slice(amps);
        let energy: f64 = 2.0
            * amps
                .iter()
                .zip(alphabet.pmf())
                .map(|(a, p)| p * a * a)
                .sum::<f64>();
        let scale = 1.0 / energy.sqrt();
        let side = 2 * arity;
        let mut points = Vec::with_capacity(side * side);
        for &re in &levels {
            for &im in &levels {
                points.push(Complex64::new(re * scale, im * scale));
            }
        }
        Self {
            arity,
            levels,
            scale,
            points,
            expected_pmf: expected_qam_pmf(alphabet),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Points per dimension.
    pub fn side(&self) -> usize {
        2 * self.arity
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn expected_pmf(&self) -> &[f64] {
        &self.expected_pmf
    }

    /// Signed, unscaled level values in ascending order.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Level index of amplitude `amp` with sign bit `negative`.
    pub fn level_index(&self, amp: u8, negative: bool) -> usize {
        let m = self.arity;
        if negative {
            m - 1 - amp as usize
        } else {
            m + amp as usize
        }
    }

    /// Amplitude index of a level index.
    pub fn amplitude_of_level(&self, level: usize) -> usize {
        let m = self.arity;
        if level < m {
            m - 1 - level
        } else {
            level - m
        }
    }

    pub fn point_index(&self, pair: (u8, u8), sign_i: bool, sign_q: bool) -> u16 {
        (self.level_index(pair.0, sign_i) * self.side() + self.level_index(pair.1, sign_q)) as u16
    }

    /// Unscaled real and imaginary level of a point.
    pub fn unscaled(&self, index: u16) -> (f64, f64) {
        let side = self.side();
        let i = index as usize;
        (self.levels[i / side], self.levels[i % side])
    }

    /// Grid index of a symbol, if it lies on the grid within `tol` after unscaling.
    pub fn index_of(&self, symbol: Complex64, tol: f64) -> Option<u16> {
        let li = self.nearest_level(symbol.re / self.scale, tol)?;
        let lq = self.nearest_level(symbol.im / self.scale, tol)?;
        Some((li * self.side() + lq) as u16)
    }

    fn nearest_level(&self, value: f64, tol: f64) -> Option<usize> {
        let pos = self.levels.partition_point(|&l| l < value);
        [pos.checked_sub(1), Some(pos)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.levels.len())
            .find(|&i| (self.levels[i] - value).abs() <= tol)
    }
}

/// Expected PMF over the constellation points: per-quadrant outer product of
/// the one-sided PMF, shared equally across the four quadrants.
pub fn expected_qam_pmf(alphabet: &AmplitudeAlphabet) -> Vec<f64> {
    let m = alphabet.arity();
    let side = 2 * m;
    let pmf = alphabet.pmf();
    let amp_of = |level: usize| if level < m { m - 1 - level } else { level - m };
    let mut out = Vec::with_capacity(side * side);
    for li in 0..side {
        for lq in 0..side {
            out.push(pmf[amp_of(li)] * pmf[amp_of(lq)] / 4.0);
        }
    }
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    out
}

/// Folds a PMF over the constellation onto one quadrant: entry `[i][q]` is the
/// probability of amplitude indices `(i, q)` summed over the four sign patterns.
pub fn quadrant_pmf(constellation: &QamConstellation, pmf: &[f64]) -> Vec<Vec<f64>> {
    let m = constellation.arity();
    let side = constellation.side();
    let mut out = vec![vec![0.0; m]; m];
    for (idx, &p) in pmf.iter().enumerate() {
        let ai = constellation.amplitude_of_level(idx / side);
        let aq = constellation.amplitude_of_level(idx % side);
        out[ai][aq] += p;
    }
    out
}

/// Maps pairs and sign bits to constellation indices (two bits per pair, I first; 1 means negative).
pub fn map_pas_labels(
    pairs: &PairedAmplitudes,
    sign_bits: &[bool],
    constellation: &QamConstellation,
) -> Result<Vec<u16>, MappingError> {
    let needed = 2 * pairs.len();
    if sign_bits.len() < needed {
        return Err(MappingError::InsufficientSignBits {
            needed,
            got: sign_bits.len(),
        });
    }
    let arity = constellation.arity();
    pairs
        .pairs
        .iter()
        .zip(sign_bits.chunks_exact(2))
        .map(|(&(ai, aq), s)| {
            for a in [ai, aq] {
                if a as usize >= arity {
                    return Err(MappingError::IndexOutOfRange {
                        index: a as usize,
                        arity,
                    });
                }
            }
            Ok(constellation.point_index((ai, aq), s[0], s[1]))
        })
        .collect()
}

/// `scale · (s_I·a_I + j·s_Q·a_Q)` with sign bit 0 → +1 and 1 → −1.
pub fn map_pas(
    pairs: &PairedAmplitudes,
    sign_bits: &[bool],
    constellation: &QamConstellation,
) -> Result<Vec<Complex64>, MappingError> {
    let labels = map_pas_labels(pairs, sign_bits, constellation)?;
    Ok(labels
        .iter()
        .map(|&l| constellation.points()[l as usize])
        .collect())
}

/// Interleaver state of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterleaveState {
    pub seed: u64,
}

/// Dual-polarization shaped-QAM symbol stream.
#[derive(Debug, Clone, PartialEq)]
pub struct QamFrame {
    pub symbols_x: Vec<Complex64>,
    pub symbols_y: Vec<Complex64>,
    /// Constellation indices of `symbols_x` / `symbols_y`.
    pub labels_x: Vec<u16>,
    pub labels_y: Vec<u16>,
    pub block_length_n: usize,
    pub pairing_mode: PairingMode,
    pub interleaved: Option<InterleaveState>,
    pub fec_block_len: usize,
    /// Seed the frame content was generated from.
    pub seed: u64,
}

impl QamFrame {
    pub fn len(&self) -> usize {
        self.symbols_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols_x.is_empty()
    }

    fn check_fec_aligned(&self) -> Result<(), MappingError> {
        let len = self.len();
        if self.fec_block_len == 0 || !len.is_multiple_of(self.fec_block_len) {
            return Err(MappingError::NotFecAligned {
                len,
                fec: self.fec_block_len,
            });
        }
        Ok(())
    }
}

/// Independent uniform permutation of `len` items for FEC block `block`,
/// polarization `pol`; entry `i` is the source index of output position `i`.
fn block_permutation(seed: u64, block: usize, pol: usize, len: usize) -> Vec<usize> {
    let mut rng = rng::stream(seed, 2 * block as u64 + pol as u64);
    let mut perm: Vec<usize> = (0..len).collect();
    perm.shuffle(&mut rng);
    perm
}

fn permute_blocks<T: Copy>(data: &mut [T], seed: u64, pol: usize, fec: usize, inverse: bool) {
    let mut scratch = Vec::with_capacity(fec);
    for (block, chunk) in data.chunks_exact_mut(fec).enumerate() {
        let perm = block_permutation(seed, block, pol, fec);
        scratch.clear();
        scratch.extend_from_slice(chunk);
        for (i, &src) in perm.iter().enumerate() {
            if inverse {
                chunk[src] = scratch[i];
            } else {
                chunk[i] = scratch[src];
            }
        }
    }
}

fn apply_interleaver(frame: &QamFrame, seed: u64, inverse: bool) -> Result<QamFrame, MappingError> {
    frame.check_fec_aligned()?;
    let fec = frame.fec_block_len;
    let mut out = frame.clone();
    permute_blocks(&mut out.symbols_x, seed, 0, fec, inverse);
    permute_blocks(&mut out.labels_x, seed, 0, fec, inverse);
    permute_blocks(&mut out.symbols_y, seed, 1, fec, inverse);
    permute_blocks(&mut out.labels_y, seed, 1, fec, inverse);
    out.interleaved = if inverse {
        None
    } else {
        Some(InterleaveState { seed })
    };
    Ok(out)
}

/// Shuffles symbols within each FEC block.
pub fn interleave(frame: &QamFrame, seed: u64) -> Result<QamFrame, MappingError> {
    apply_interleaver(frame, seed, false)
}

pub fn deinterleave(frame: &QamFrame, seed: u64) -> Result<QamFrame, MappingError> {
    apply_interleaver(frame, seed, true)
}

/// Parameters of [`build_frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpec {
    pub block_length_n: usize,
    pub pairing_mode: PairingMode,
    pub total_symbols: usize,
    pub interleave: bool,
    pub fec_block_len: usize,
}

impl FrameSpec {
    /// DM blocks encoded per polarization. The last block is truncated when the
    /// amplitude demand is not a multiple of `n`.
    pub fn dm_blocks_per_polarization(&self) -> usize {
        let n = self.block_length_n;
        match self.pairing_mode {
            PairingMode::Intra => (2 * self.total_symbols).div_ceil(n),
            PairingMode::Inter => 2 * self.total_symbols.div_ceil(n),
        }
    }

    fn validate(&self) -> Result<(), MappingError> {
        if self.total_symbols == 0 {
            return Err(MappingError::Incompatible("total_symbols is zero".into()));
        }
        if self.block_length_n == 0 {
            return Err(MappingError::Shaping(ShapingError::ZeroBlockLength));
        }
        if self.pairing_mode == PairingMode::Intra && !self.block_length_n.is_multiple_of(2) {
            return Err(MappingError::Incompatible(format!(
                "intra pairing needs an even block length, got {}",
                self.block_length_n
            )));
        }
        if self.interleave
            && (self.fec_block_len == 0 || !self.total_symbols.is_multiple_of(self.fec_block_len))
        {
            return Err(MappingError::NotFecAligned {
                len: self.total_symbols,
                fec: self.fec_block_len,
            });
        }
        Ok(())
    }
}

/// Uniform random integer of `bits` bits.
fn random_word<R: Rng>(rng: &mut R, bits: u64) -> BigUint {
    if bits == 0 {
        return BigUint::default();
    }
    let digits = bits.div_ceil(32) as usize;
    let mut words: Vec<u32> = (0..digits).map(|_| rng.gen()).collect();
    let top = bits % 32;
    if top != 0 {
        words[digits - 1] &= (1u32 << top) - 1;
    }
    BigUint::from_slice(&words)
}

/// Encodes `blocks` DM outputs from uniform random data.
fn random_blocks<R: Rng>(ccdm: &Ccdm, blocks: usize, rng: &mut R) -> Vec<AmplitudeSequence> {
    (0..blocks)
        .map(|_| ccdm.encode_word(&random_word(rng, ccdm.input_bits())))
        .collect()
}

fn polarization_labels<R: Rng>(
    spec: &FrameSpec,
    ccdm: &Ccdm,
    constellation: &QamConstellation,
    rng: &mut R,
) -> Result<Vec<u16>, MappingError> {
    let total = spec.total_symbols;
    let blocks = random_blocks(ccdm, spec.dm_blocks_per_polarization(), rng);
    let mut pairs = match spec.pairing_mode {
        PairingMode::Intra => {
            let mut seq = AmplitudeSequence::concat(&blocks);
            seq.symbols.truncate(2 * total);
            pair_intra(&seq)?
        }
        PairingMode::Inter => {
            let mut pairs = PairedAmplitudes::default();
            for stacked in blocks.chunks_exact(2) {
                pairs.pairs.extend(pair_inter(&stacked[0], &stacked[1])?.pairs);
            }
            pairs
        }
    };
    pairs.pairs.truncate(total);
    let signs: Vec<bool> = (0..2 * total).map(|_| rng.gen()).collect();
    map_pas_labels(&pairs, &signs, constellation)
}

/// Builds a dual-polarization frame from independent random data per
/// polarization. Deterministic in `seed`.
pub fn build_frame(
    alphabet: &AmplitudeAlphabet,
    constellation: &QamConstellation,
    spec: &FrameSpec,
    seed: u64,
) -> Result<QamFrame, MappingError> {
    spec.validate()?;
    let composition = composition_from_pmf(alphabet, spec.block_length_n)?;
    let ccdm = Ccdm::new(composition);
    let labels_x = polarization_labels(spec, &ccdm, constellation, &mut rng::stream(seed, 0))?;
    let labels_y = polarization_labels(spec, &ccdm, constellation, &mut rng::stream(seed, 1))?;
    let to_symbols = |labels: &[u16]| -> Vec<Complex64> {
        labels
            .iter()
            .map(|&l| constellation.points()[l as usize])
            .collect()
    };
    let frame = QamFrame {
        symbols_x: to_symbols(&labels_x),
        symbols_y: to_symbols(&labels_y),
        labels_x,
        labels_y,
        block_length_n: spec.block_length_n,
        pairing_mode: spec.pairing_mode,
        interleaved: None,
        fec_block_len: spec.fec_block_len,
        seed,
    };
    if spec.interleave {
        interleave(&frame, rng::derive_seed(seed, &[0x14e7_ea7e]))
    } else {
        Ok(frame)
    }
}

/// Frame of i.i.d. uniformly drawn constellation points, used as the unshaped
/// reference. Reported with `block_length_n = 0`.
pub fn build_uniform_frame(
    constellation: &QamConstellation,
    total_symbols: usize,
    fec_block_len: usize,
    seed: u64,
) -> QamFrame {
    let points = constellation.len() as u16;
    let draw = |stream: u64| -> Vec<u16> {
        let mut r = rng::stream(seed, stream);
        (0..total_symbols).map(|_| r.gen_range(0..points)).collect()
    };
    let (labels_x, labels_y) = (draw(0), draw(1));
    let to_symbols = |labels: &[u16]| -> Vec<Complex64> {
        labels.iter().map(|&l| constellation.points()[l as usize]).collect()
    };
    QamFrame {
        symbols_x: to_symbols(&labels_x),
        symbols_y: to_symbols(&labels_y),
        labels_x,
        labels_y,
        block_length_n: 0,
        pairing_mode: PairingMode::Inter,
        interleaved: None,
        fec_block_len,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shaping::Composition;

    fn seq(s: &[u8]) -> AmplitudeSequence {
        AmplitudeSequence::new(s.to_vec())
    }

    fn spec(n: usize, mode: PairingMode, total: usize, interleave: bool) -> FrameSpec {
        FrameSpec {
            block_length_n: n,
            pairing_mode: mode,
            total_symbols: total,
            interleave,
            fec_block_len: DEFAULT_FEC_BLOCK_LEN,
        }
    }

    #[test]
    fn intra_pairs_adjacent() {
        assert_eq!(pair_intra(&seq(&[0, 1, 2, 3])).unwrap().pairs, vec![(0, 1), (2, 3)]);
        assert_eq!(pair_intra(&seq(&[2, 2])).unwrap().pairs, vec![(2, 2)]);
        assert_eq!(pair_intra(&seq(&[0, 1, 2])), Err(MappingError::OddLength(3)));
    }

    #[test]
    fn inter_pairs_positionally() {
        assert_eq!(
            pair_inter(&seq(&[0, 1]), &seq(&[2, 3])).unwrap().pairs,
            vec![(0, 2), (1, 3)]
        );
        assert_eq!(
            pair_inter(&seq(&[1, 3]), &seq(&[1, 3])).unwrap().pairs,
            vec![(1, 1), (3, 3)]
        );
        assert_eq!(
            pair_inter(&seq(&[0]), &seq(&[0, 1])),
            Err(MappingError::LengthMismatch(1, 2))
        );
    }

    #[test]
    fn intra_never_pairs_singleton_amplitude_with_itself() {
        let ccdm = Ccdm::new(Composition::new(vec![4, 3, 2, 1]).unwrap());
        for w in 0u32..(1 << 13) {
            let s = ccdm.encode_word(&BigUint::from(w));
            assert!(pair_intra(&s).unwrap().pairs.iter().all(|&p| p != (3, 3)));
        }
    }

    #[test]
    fn inter_can_produce_outermost_pair() {
        let ccdm = Ccdm::new(Composition::new(vec![4, 3, 2, 1]).unwrap());
        let a = ccdm.encode_word(&BigUint::from(0u32)); // ends with amplitude 3
        let b = ccdm.encode_word(&BigUint::from(0u32));
        assert!(pair_inter(&a, &b).unwrap().pairs.contains(&(3, 3)));
    }

    #[test]
    fn sign_convention() {
        let unit = AmplitudeAlphabet::new(vec![1.0, 3.0, 5.0, 7.0], vec![0.25; 4]).unwrap();
        let c = QamConstellation::new(&unit);
        let s = c.scale();
        let pairs = PairedAmplitudes {
            pairs: vec![(0, 0), (3, 2)],
        };
        let out = map_pas(&pairs, &[false, false, true, false], &c).unwrap();
        assert!((out[0] / s - Complex64::new(1.0, 1.0)).norm() < 1e-12);
        assert!((out[1] / s - Complex64::new(-7.0, 5.0)).norm() < 1e-12);
        assert_eq!(
            map_pas(&pairs, &[false; 3], &c),
            Err(MappingError::InsufficientSignBits { needed: 4, got: 3 })
        );
    }

    #[test]
    fn expected_pmf_matches_cartesian_product() {
        let a = AmplitudeAlphabet::pas64();
        let c = QamConstellation::new(&a);
        assert_eq!(c.len(), 64);
        let q = quadrant_pmf(&c, c.expected_pmf());
        assert!((q[3][3] - 0.010).abs() < 1e-12);
        assert!((q[0][0] - 0.160).abs() < 1e-12);
        assert!((q[2][1] - 0.060).abs() < 1e-12);
        let energy: f64 = c
            .points()
            .iter()
            .zip(c.expected_pmf())
            .map(|(x, p)| p * x.norm_sqr())
            .sum();
        assert!((energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_and_qpsk_pmfs() {
        let u = expected_qam_pmf(&AmplitudeAlphabet::uniform(4).unwrap());
        assert!(u.iter().all(|&p| (p - 1.0 / 64.0).abs() < 1e-15));
        let q = expected_qam_pmf(&AmplitudeAlphabet::new(vec![1.0], vec![1.0]).unwrap());
        assert_eq!(q, vec![0.25; 4]);
    }

    #[test]
    fn grid_lookup() {
        let c = QamConstellation::new(&AmplitudeAlphabet::pas64());
        for (i, &p) in c.points().iter().enumerate() {
            assert_eq!(c.index_of(p, 1e-9), Some(i as u16));
        }
        assert_eq!(c.index_of(Complex64::new(0.0, 0.0), 1e-9), None);
        assert_eq!(c.index_of(Complex64::new(100.0, 0.0), 1e-9), None);
    }

    #[test]
    fn frame_block_accounting() {
        let s = spec(10, PairingMode::Intra, 10_800, false);
        assert_eq!(s.dm_blocks_per_polarization(), 2160);
        let s = spec(10, PairingMode::Inter, 10_800, false);
        assert_eq!(s.dm_blocks_per_polarization(), 2160);
        let s = spec(10_000, PairingMode::Inter, 10_800, false);
        assert_eq!(s.dm_blocks_per_polarization() % 2, 0);
    }

    #[test]
    fn frame_rejects_incompatible_sizes() {
        let a = AmplitudeAlphabet::pas64();
        let c = QamConstellation::new(&a);
        assert!(build_frame(&a, &c, &spec(11, PairingMode::Intra, 100, false), 1).is_err());
        assert!(build_frame(&a, &c, &spec(10, PairingMode::Intra, 100, true), 1).is_err());
        assert!(build_frame(&a, &c, &spec(10, PairingMode::Intra, 0, false), 1).is_err());
        assert!(build_frame(&a, &c, &spec(11, PairingMode::Inter, 100, false), 1).is_ok());
    }

    #[test]
    fn frame_is_deterministic_and_amplitude_marginals_exact() {
        let a = AmplitudeAlphabet::pas64();
        let c = QamConstellation::new(&a);
        for mode in [PairingMode::Intra, PairingMode::Inter] {
            let s = spec(10, mode, 10_800, false);
            let f1 = build_frame(&a, &c, &s, 42).unwrap();
            assert_eq!(f1, build_frame(&a, &c, &s, 42).unwrap());
            assert_ne!(f1.labels_x, f1.labels_y);
            let mut hist = [0usize; 4];
            for &l in &f1.labels_x {
                let (re, im) = c.unscaled(l);
                for v in [re, im] {
                    hist[(v.abs() as usize - 1) / 2] += 1;
                }
            }
            assert_eq!(hist, [8640, 6480, 4320, 2160]);
        }
    }

    #[test]
    fn interleaver_round_trip_and_block_multisets() {
        let a = AmplitudeAlphabet::pas64();
        let c = QamConstellation::new(&a);
        let frame = build_frame(&a, &c, &spec(100, PairingMode::Intra, 21_600, false), 3).unwrap();
        let inter = interleave(&frame, 99).unwrap();
        assert_ne!(inter.labels_x, frame.labels_x);
        assert_eq!(deinterleave(&inter, 99).unwrap(), frame);
        for (a, b) in frame
            .labels_x
            .chunks(DEFAULT_FEC_BLOCK_LEN)
            .zip(inter.labels_x.chunks(DEFAULT_FEC_BLOCK_LEN))
        {
            let (mut a, mut b) = (a.to_vec(), b.to_vec());
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b);
        }
        let mut bad = frame.clone();
        bad.symbols_x.pop();
        bad.symbols_y.pop();
        assert!(matches!(
            interleave(&bad, 1),
            Err(MappingError::NotFecAligned { .. })
        ));
    }
}
