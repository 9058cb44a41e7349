//! GF(2) vectors, error sampling, syndromes and the logical-failure
//! oracle that scores decoding trials.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::{CssCode, ErrorType, ParityCheckMatrix};
use crate::{Error, Result};

/// Binary error indicator vector, one bit per qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorVector(Vec<u8>);

impl ErrorVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: u8) {
        debug_assert!(value <= 1);
        self.0[i] = value;
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn xor(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a ^ b)
                .collect(),
        )
    }
}

/// Binary syndrome vector, one bit per check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syndrome(Vec<u8>);

impl Syndrome {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

/// Independent bit-flip channel for one error type.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Physical error probability, strictly inside (0, 0.5).
    pub p: f64,
    pub error_type: ErrorType,
}

impl ChannelConfig {
    pub fn new(p: f64, error_type: ErrorType) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "error probability must lie in (0, 0.5), got {p}"
            )));
        }
        Ok(Self { p, error_type })
    }
}

/// Samples `n` independent error bits, each set with probability `cfg.p`.
pub fn sample_error(cfg: &ChannelConfig, n: usize, rng: &mut impl Rng) -> ErrorVector {
    ErrorVector((0..n).map(|_| rng.random_bool(cfg.p) as u8).collect())
}

/// Computes `H * e` over GF(2): bit `c` is the parity of `e` restricted to
/// the support of check `c`.
pub fn syndrome(h: &ParityCheckMatrix, e: &ErrorVector) -> Result<Syndrome> {
    if e.len() != h.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: h.n_qubits(),
            actual: e.len(),
        });
    }
    Ok(Syndrome(
        h.rows()
            .map(|row| row.iter().fold(0u8, |acc, &q| acc ^ e.bit(q)))
            .collect(),
    ))
}

const WORD_BITS: usize = 64;

fn pack(bits: &[u8], words: usize) -> Vec<u64> {
    let mut packed = vec![0u64; words];
    for (i, &b) in bits.iter().enumerate() {
        if b == 1 {
            packed[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
        }
    }
    packed
}

/// Row space of a binary matrix, packed into machine words and reduced to
/// row-echelon form for fast membership queries.
#[derive(Debug, Clone)]
pub struct Gf2RowSpace {
    n_columns: usize,
    words: usize,
    /// Echelon basis rows, each paired with its pivot column.
    basis: Vec<(usize, Vec<u64>)>,
}

impl Gf2RowSpace {
    pub fn new(m: &ParityCheckMatrix) -> Self {
        let n_columns = m.n_qubits();
        let words = n_columns.div_ceil(WORD_BITS);
        let mut space = Self {
            n_columns,
            words,
            basis: Vec::new(),
        };
        for row in m.rows() {
            let mut bits = vec![0u8; n_columns];
            for &q in row {
                bits[q] = 1;
            }
            let packed = pack(&bits, words);
            space.insert(packed);
        }
        space
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        for (pivot, row) in &self.basis {
            if v[pivot / WORD_BITS] >> (pivot % WORD_BITS) & 1 == 1 {
                for (w, r) in v.iter_mut().zip(row) {
                    *w ^= r;
                }
            }
        }
        v
    }

    fn insert(&mut self, v: Vec<u64>) {
        let v = self.reduce(v);
        if let Some(pivot) = first_set_bit(&v) {
            self.basis.push((pivot, v));
            // Keep basis sorted by pivot so reduction stays one pass.
            self.basis.sort_by_key(|(p, _)| *p);
        }
    }

    /// True iff `v` is a GF(2) linear combination of the matrix rows.
    pub fn contains(&self, v: &ErrorVector) -> bool {
        debug_assert_eq!(v.len(), self.n_columns);
        let packed = pack(v.bits(), self.words);
        first_set_bit(&self.reduce(packed)).is_none()
    }
}

fn first_set_bit(words: &[u64]) -> Option<usize> {
    for (i, &w) in words.iter().enumerate() {
        if w != 0 {
            return Some(i * WORD_BITS + w.trailing_zeros() as usize);
        }
    }
    None
}

/// True iff `v` is a GF(2) linear combination of rows of `m`.
pub fn gf2_rowspace_membership(m: &ParityCheckMatrix, v: &ErrorVector) -> bool {
    Gf2RowSpace::new(m).contains(v)
}

/// Precomputed failure oracle for one error type of a code: a trial fails
/// iff the residual `e ^ e_hat` has a nonzero syndrome under the decoding
/// matrix, or is not a stabilizer of the same type as the error.
pub struct LogicalFailureOracle<'a> {
    decoding: &'a ParityCheckMatrix,
    stabilizers: Gf2RowSpace,
}

impl<'a> LogicalFailureOracle<'a> {
    pub fn new(code: &'a CssCode, error_type: ErrorType) -> Self {
        Self {
            decoding: code.decoding_matrix(error_type),
            stabilizers: Gf2RowSpace::new(code.stabilizer_matrix(error_type)),
        }
    }

    pub fn is_failure(&self, e: &ErrorVector, e_hat: &ErrorVector) -> bool {
        let residual = e.xor(e_hat);
        let s = syndrome(self.decoding, &residual).expect("dimension checked at construction");
        !s.is_zero() || !self.stabilizers.contains(&residual)
    }
}

/// One-shot convenience wrapper over [`LogicalFailureOracle`].
pub fn is_logical_failure(
    code: &CssCode,
    e: &ErrorVector,
    e_hat: &ErrorVector,
    error_type: ErrorType,
) -> bool {
    LogicalFailureOracle::new(code, error_type).is_failure(e, e_hat)
}
