//! Constant-composition distribution matching (CCDM).
//!
//! A CCDM maps `k` uniform input bits to a length-`n` amplitude sequence whose
//! histogram is fixed to a [`Composition`]. The codec here is arithmetic-coding
//! interval subdivision with exact integer interval bounds: at every output
//! position the current interval is split proportionally to the remaining
//! counts of each amplitude, ordered by ascending amplitude index. Because
//! every sequence of a composition has equal probability under this model, the
//! interval of a sequence is exactly `[rank/N, (rank+1)/N)` where `N` is the
//! multinomial coefficient and `rank` its lexicographic rank.
//!
//! An input word `v` in `[0, 2^k)` is mapped to the code point `v / 2^k` and
//! the output sequence is the one whose interval contains it. Since
//! `2^k <= N`, distinct inputs land in distinct intervals.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShapingError {
    #[error("amplitude alphabet is empty")]
    EmptyAlphabet,
    #[error("amplitudes and pmf have different lengths ({amplitudes} vs {pmf})")]
    ArityMismatch { amplitudes: usize, pmf: usize },
    #[error("amplitudes must be positive and strictly increasing")]
    BadAmplitudes,
    #[error("pmf entry {index} = {value} is outside (0, 1]")]
    BadProbability { index: usize, value: f64 },
    #[error("pmf sums to {0}, expected 1")]
    PmfNotNormalized(f64),
    #[error("block length must be positive")]
    ZeroBlockLength,
    #[error("block length {n} is smaller than the alphabet size {arity}")]
    BlockTooShort { n: usize, arity: usize },
    #[error("composition must have at least one non-zero count")]
    EmptyComposition,
    #[error("expected {expected} input bits, got {got}")]
    BitLength { expected: u64, got: usize },
    #[error("sequence has length {got}, composition needs {expected}")]
    SequenceLength { expected: usize, got: usize },
    #[error("amplitude index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("sequence histogram {found:?} does not match composition {expected:?}")]
    CompositionMismatch { expected: Vec<u32>, found: Vec<u32> },
    #[error("sequence has the right composition but is not a codeword")]
    NonCodeword,
    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &'static str) -> Result<Vec<T>, ShapingError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse().map_err(|_| ShapingError::Parse {
                what,
                detail: format!("invalid entry {t:?}"),
            })
        })
        .collect()
}

/// Parses a bit string such as `"0110 1"`; whitespace and `_` are ignored.
pub fn parse_bits(text: &str) -> Result<Vec<bool>, ShapingError> {
    text.chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(ShapingError::Parse {
                what: "bits",
                detail: format!("unexpected character {other:?}"),
            }),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// One-sided ASK amplitude levels and their target probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeAlphabet {
    amplitudes: Vec<f64>,
    pmf: Vec<f64>,
}

impl AmplitudeAlphabet {
    pub fn new(amplitudes: Vec<f64>, pmf: Vec<f64>) -> Result<Self, ShapingError> {
        if amplitudes.is_empty() {
            return Err(ShapingError::EmptyAlphabet);
        }
        if amplitudes.len() != pmf.len() {
            return Err(ShapingError::ArityMismatch {
                amplitudes: amplitudes.len(),
                pmf: pmf.len(),
            });
        }
        if amplitudes[0] <= 0.0
            || !amplitudes.iter().all(|a| a.is_finite())
            || amplitudes.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(ShapingError::BadAmplitudes);
        }
        for (index, &value) in pmf.iter().enumerate() {
            if !(value > 0.0 && value <= 1.0) {
                return Err(ShapingError::BadProbability { index, value });
            }
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ShapingError::PmfNotNormalized(sum));
        }
        Ok(Self { amplitudes, pmf })
    }

    /// The 8-ASK levels {1,3,5,7} with PMF [0.4, 0.3, 0.2, 0.1] (shaped 64QAM).
    pub fn pas64() -> Self {
        Self::new(vec![1.0, 3.0, 5.0, 7.0], vec![0.4, 0.3, 0.2, 0.1])
            .expect("built-in alphabet is valid")
    }

    /// Uniform one-sided PMF over the levels 1, 3, ..., 2m-1.
    pub fn uniform(arity: usize) -> Result<Self, ShapingError> {
        if arity == 0 {
            return Err(ShapingError::EmptyAlphabet);
        }
        let amplitudes = (0..arity).map(|i| (2 * i + 1) as f64).collect();
        Self::new(amplitudes, vec![1.0 / arity as f64; arity])
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn arity(&self) -> usize {
        self.amplitudes.len()
    }

    /// Entropy of the target PMF in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.pmf.iter().map(|&p| -p * p.log2()).sum()
    }
}

/// Occurrence count of every amplitude within one DM block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Composition {
    counts: Vec<u32>,
}

impl Composition {
    pub fn new(counts: Vec<u32>) -> Result<Self, ShapingError> {
        if counts.is_empty() {
            return Err(ShapingError::EmptyAlphabet);
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(ShapingError::EmptyComposition);
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn arity(&self) -> usize {
        self.counts.len()
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    pub fn max_count(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Histogram of a sequence over `arity` amplitude indices.
    pub fn histogram(symbols: &[u8], arity: usize) -> Result<Vec<u32>, ShapingError> {
        let mut counts = vec![0u32; arity];
        for &s in symbols {
            let s = s as usize;
            if s >= arity {
                return Err(ShapingError::IndexOutOfRange { index: s, arity });
            }
            counts[s] += 1;
        }
        Ok(counts)
    }
}

/// Parses comma- or space-separated counts, e.g. `"4,3,2,1"`.
impl std::str::FromStr for Composition {
    type Err = ShapingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Composition::new(parse_list(s, "composition")?)
    }
}

/// Ordered amplitude indices, 0-based into an [`AmplitudeAlphabet`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AmplitudeSequence {
    pub symbols: Vec<u8>,
}

impl AmplitudeSequence {
    pub fn new(symbols: Vec<u8>) -> Self {
        Self { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Parses comma- or space-separated amplitude indices, e.g. `"0,2,1"`.
    pub fn parse(text: &str) -> Result<Self, ShapingError> {
        Ok(Self::new(parse_list(text, "amplitude sequence")?))
    }

    pub fn concat<'a>(blocks: impl IntoIterator<Item = &'a AmplitudeSequence>) -> Self {
        let mut symbols = Vec::new();
        for b in blocks {
            symbols.extend_from_slice(&b.symbols);
        }
        Self { symbols }
    }
}

impl std::fmt::Display for AmplitudeSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Largest-remainder apportionment of `n` over the alphabet PMF.
///
/// Leftover units go to the largest fractional remainders; equal remainders
/// are resolved toward the higher-probability amplitude, then the lower index.
pub fn composition_from_pmf(
    alphabet: &AmplitudeAlphabet,
    n: usize,
) -> Result<Composition, ShapingError> {
    if n == 0 {
        return Err(ShapingError::ZeroBlockLength);
    }
    let arity = alphabet.arity();
    if n < arity {
        return Err(ShapingError::BlockTooShort { n, arity });
    }
    let pmf = alphabet.pmf();
    // Guard against products like 2.9999999999999996 that are integers in exact arithmetic.
    let quotas: Vec<f64> = pmf
        .iter()
        .map(|&p| {
            let q = p * n as f64;
            let r = q.round();
            if (q - r).abs() < 1e-9 * n as f64 {
                r
            } else {
                q
            }
        })
        .collect();
    let mut counts: Vec<u32> = quotas.iter().map(|q| q.floor() as u32).collect();
    let assigned: usize = counts.iter().map(|&c| c as usize).sum();
    let mut order: Vec<usize> = (0..arity).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra)
            .then(pmf[b].total_cmp(&pmf[a]))
            .then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    Composition::new(counts)
}

/// Multinomial coefficient `n! / prod(c_i!)`, exact.
pub fn num_sequences(c: &Composition) -> BigUint {
    let mut result = BigUint::one();
    let mut total: u64 = 0;
    for &count in c.counts() {
        for j in 1..=count as u64 {
            total += 1;
            result *= total;
            result /= j;
        }
    }
    result
}

/// `floor(log2(num_sequences(c)))`.
pub fn input_bit_length(c: &Composition) -> u64 {
    num_sequences(c).bits() - 1
}

/// `H(target_pmf) - k/n` in bits per amplitude.
pub fn rate_loss(c: &Composition, alphabet: &AmplitudeAlphabet) -> f64 {
    let k = input_bit_length(c) as f64;
    alphabet.entropy_bits() - k / c.n() as f64
}

/// Fixed-length CCDM codec for a single composition.
#[derive(Debug, Clone)]
pub struct Ccdm {
    composition: Composition,
    total: BigUint,
    k: u64,
}

impl Ccdm {
    pub fn new(composition: Composition) -> Self {
        let total = num_sequences(&composition);
        let k = total.bits() - 1;
        Self {
            composition,
            total,
            k,
        }
    }

    pub fn composition(&self) -> &Composition {
        &self.composition
    }

    /// Number of input bits per block.
    pub fn input_bits(&self) -> u64 {
        self.k
    }

    pub fn block_length(&self) -> usize {
        self.composition.n()
    }

    pub fn num_sequences(&self) -> &BigUint {
        &self.total
    }

    pub fn encode(&self, bits: &[bool]) -> Result<AmplitudeSequence, ShapingError> {
        if bits.len() as u64 != self.k {
            return Err(ShapingError::BitLength {
                expected: self.k,
                got: bits.len(),
            });
        }
        Ok(self.encode_word(&bits_to_uint(bits)))
    }

    /// Encodes an input word given as an integer in `[0, 2^k)`.
    ///
    /// Panics if the word does not fit in `k` bits.
    pub fn encode_word(&self, word: &BigUint) -> AmplitudeSequence {
        assert!(word.bits() <= self.k, "input word wider than {} bits", self.k);
        let mut target: BigUint = (word * &self.total) >> self.k;
        let mut remaining = self.composition.counts().to_vec();
        let mut left = self.composition.n() as u64;
        let mut width = self.total.clone();
        let mut symbols = Vec::with_capacity(left as usize);
        while left > 0 {
            let mut chosen = None;
            for (i, &count) in remaining.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let sub = (&width * count) / left;
                if target < sub {
                    width = sub;
                    chosen = Some(i);
                    break;
                }
                target -= sub;
            }
            // The sub-interval sizes always sum to `width`, and `target < width`.
            let i = chosen.expect("code point outside current interval");
            remaining[i] -= 1;
            left -= 1;
            symbols.push(i as u8);
        }
        AmplitudeSequence { symbols }
    }

    pub fn decode(&self, seq: &AmplitudeSequence) -> Result<Vec<bool>, ShapingError> {
        let word = self.decode_word(seq)?;
        Ok(uint_to_bits(&word, self.k))
    }

    /// Inverse of [`Ccdm::encode_word`].
    pub fn decode_word(&self, seq: &AmplitudeSequence) -> Result<BigUint, ShapingError> {
        let n = self.composition.n();
        if seq.len() != n {
            return Err(ShapingError::SequenceLength {
                expected: n,
                got: seq.len(),
            });
        }
        let found = Composition::histogram(&seq.symbols, self.composition.arity())?;
        if found != self.composition.counts() {
            return Err(ShapingError::CompositionMismatch {
                expected: self.composition.counts().to_vec(),
                found,
            });
        }
        let mut rank = BigUint::zero();
        let mut remaining = self.composition.counts().to_vec();
        let mut left = n as u64;
        let mut width = self.total.clone();
        for &s in &seq.symbols {
            let s = s as usize;
            for &count in remaining.iter().take(s) {
                if count > 0 {
                    rank += (&width * count) / left;
                }
            }
            width = (&width * remaining[s]) / left;
            remaining[s] -= 1;
            left -= 1;
        }
        // The unique word with floor(word * N / 2^k) == rank, if any.
        let word = ((&rank << self.k) + &self.total - 1u32).div_floor(&self.total);
        if word.bits() > self.k || ((&word * &self.total) >> self.k) != rank {
            return Err(ShapingError::NonCodeword);
        }
        Ok(word)
    }
}

pub fn ccdm_encode(bits: &[bool], c: &Composition) -> Result<AmplitudeSequence, ShapingError> {
    Ccdm::new(c.clone()).encode(bits)
}

pub fn ccdm_decode(seq: &AmplitudeSequence, c: &Composition) -> Result<Vec<bool>, ShapingError> {
    Ccdm::new(c.clone()).decode(seq)
}

/// MSB-first bits to integer.
pub fn bits_to_uint(bits: &[bool]) -> BigUint {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    // Little-endian bytes of the integer whose MSB is bits[0].
    for (pos, &b) in bits.iter().rev().enumerate() {
        if b {
            bytes[pos / 8] |= 1 << (pos % 8);
        }
    }
    BigUint::from_bytes_le(&bytes)
}

/// Integer to `width` MSB-first bits.
pub fn uint_to_bits(value: &BigUint, width: u64) -> Vec<bool> {
    (0..width).rev().map(|i| value.bit(i)).collect()
}

/// Approximate `log10` of a big integer, for reporting magnitudes.
pub fn log10_biguint(value: &BigUint) -> f64 {
    let bits = value.bits();
    if bits <= 1000 {
        return value.to_f64().map_or(f64::INFINITY, f64::log10);
    }
    let shift = bits - 64;
    let top = (value >> shift).to_f64().unwrap_or(f64::NAN);
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}
