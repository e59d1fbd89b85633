//! Two-universal hashing with uniformly random GF(2) linear maps.
//!
//! The same type serves key extraction (`kappa`) and verification (`h`).
//! Published hash descriptions are the matrices themselves.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::BitVector;
use crate::gf2::BitMatrix;
use crate::randomness::{Draw, RandomSource};
use crate::scalar::{Probability, Rational};
use crate::stats::{wilson_interval, Interval};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HashError {
    #[error("input has {got} bits, hash expects {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("exact enumeration of {m}x{k} maps exceeds the guard ({reason})")]
    Guard { m: usize, k: usize, reason: &'static str },
    #[error("malformed hash encoding")]
    Encoding,
}

/// Largest `m * k` whose family is enumerated exactly.
pub const EXACT_FAMILY_GUARD: usize = 20;
/// Largest log2 of (matrices × input differences) visited in exact mode.
pub const EXACT_WORK_GUARD: usize = 28;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearHash {
    matrix: BitMatrix,
}

impl LinearHash {
    /// Uniform member of the family of all linear maps `{0,1}^m → {0,1}^k`.
    pub fn sample<S: RandomSource + ?Sized>(m: usize, k: usize, src: &mut S, tag: Draw) -> Self {
        let rows: Vec<Vec<bool>> = (0..k).map(|_| src.bits(tag, m)).collect();
        Self { matrix: BitMatrix::from_rows(&rows, m) }
    }

    pub fn from_matrix(matrix: BitMatrix) -> Self {
        Self { matrix }
    }

    /// The map whose row-major matrix bits are the low `m*k` bits of `index`
    /// (bit 0 is entry (0,0)). Used to enumerate the family.
    pub fn from_index(m: usize, k: usize, index: u64) -> Self {
        let mut matrix = BitMatrix::zeros(k, m);
        for i in 0..m * k {
            if (index >> i) & 1 == 1 {
                matrix.set(i / m, i % m, true);
            }
        }
        Self { matrix }
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn is_zero_map(&self) -> bool {
        self.matrix.is_zero()
    }

    pub fn apply(&self, x: &BitVector) -> Result<BitVector, HashError> {
        if x.len() != self.cols() {
            return Err(HashError::InputLength { expected: self.cols(), got: x.len() });
        }
        Ok(BitVector::new(self.matrix.mul_vec(x.bits())))
    }

    /// `rows` and `cols` as big-endian u32, then the matrix bits row-major,
    /// most significant bit first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + (self.rows() * self.cols()).div_ceil(8));
        out.extend_from_slice(&(self.rows() as u32).to_be_bytes());
        out.extend_from_slice(&(self.cols() as u32).to_be_bytes());
        out.extend_from_slice(&self.matrix.packed_bits());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HashError> {
        if bytes.len() < 8 {
            return Err(HashError::Encoding);
        }
        let rows = u32::from_be_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let cols = u32::from_be_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let body = &bytes[8..];
        if body.len() != (rows * cols).div_ceil(8) {
            return Err(HashError::Encoding);
        }
        BitMatrix::from_packed_bits(rows, cols, body).map(Self::from_matrix).ok_or(HashError::Encoding)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionMode {
    Exact,
    MonteCarlo { draws: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct CollisionEstimate {
    pub input_bits: usize,
    pub output_bits: usize,
    /// Largest collision probability over the tested input pairs.
    pub max_probability: f64,
    /// Exact value as `(colliding maps, family size)` in exact mode.
    pub exact: Option<(u64, u64)>,
    pub interval: Interval,
    /// Number of input differences tested (each stands for every pair with
    /// that XOR difference).
    pub differences_tested: u64,
    /// The two-universality bound `2^-k`.
    pub bound: f64,
}

impl CollisionEstimate {
    pub fn exact_rational(&self) -> Option<Rational> {
        self.exact.map(|(c, t)| Rational::from_ratio(c, t))
    }
}

fn exact_guard(m: usize, k: usize) -> Result<(), HashError> {
    if m * k > EXACT_FAMILY_GUARD {
        return Err(HashError::Guard { m, k, reason: "family size" });
    }
    if m + m * k > EXACT_WORK_GUARD {
        return Err(HashError::Guard { m, k, reason: "work" });
    }
    Ok(())
}

/// Columns of map `index` packed as k-bit words.
fn columns(m: usize, k: usize, index: u64) -> Vec<u32> {
    (0..m)
        .map(|c| (0..k).fold(0u32, |acc, r| acc | ((((index >> (r * m + c)) & 1) as u32) << r)))
        .collect()
}

/// For every nonzero difference `d` (indexed by its integer value, bit `c`
/// = input position `c`), the number of maps in the family with `A d = 0`.
fn exact_zero_counts(m: usize, k: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << m];
    for index in 0..(1u64 << (m * k)) {
        let cols = columns(m, k, index);
        // Gray-code walk: consecutive differences flip one input bit.
        let mut d = 0usize;
        let mut image = 0u32;
        for step in 1..(1usize << m) {
            let bit = step.trailing_zeros() as usize;
            d ^= 1 << bit;
            image ^= cols[bit];
            if image == 0 {
                counts[d] += 1;
            }
        }
    }
    counts
}

/// Largest collision probability `Pr_h[h(x0) = h(x1)]` over distinct input
/// pairs. Exact mode enumerates every map and every nonzero difference.
pub fn collision_probability<S: RandomSource + ?Sized>(
    m: usize,
    k: usize,
    mode: CollisionMode,
    src: &mut S,
) -> Result<CollisionEstimate, HashError> {
    let bound = 2f64.powi(-(k as i32));
    match mode {
        CollisionMode::Exact => {
            exact_guard(m, k)?;
            let total = 1u64 << (m * k);
            let counts = exact_zero_counts(m, k);
            let worst = counts.iter().skip(1).copied().max().unwrap_or(0);
            let p = worst as f64 / total as f64;
            Ok(CollisionEstimate {
                input_bits: m,
                output_bits: k,
                max_probability: p,
                exact: Some((worst, total)),
                interval: Interval { low: p, high: p },
                differences_tested: (1u64 << m) - 1,
                bound,
            })
        }
        CollisionMode::MonteCarlo { draws } => {
            let diffs = test_differences(m, src);
            let mut hits = vec![0u64; diffs.len()];
            for _ in 0..draws {
                let h = LinearHash::sample(m, k, src, Draw::Other);
                for (d, hit) in diffs.iter().zip(hits.iter_mut()) {
                    if h.apply(d).expect("sized").count_ones() == 0 {
                        *hit += 1;
                    }
                }
            }
            let worst = hits.iter().copied().max().unwrap_or(0);
            Ok(CollisionEstimate {
                input_bits: m,
                output_bits: k,
                max_probability: worst as f64 / draws as f64,
                exact: None,
                interval: wilson_interval(worst, draws),
                differences_tested: diffs.len() as u64,
                bound,
            })
        }
    }
}

/// Fixed adversarial differences (single bits, all ones) plus a few random
/// nonzero ones.
fn test_differences<S: RandomSource + ?Sized>(m: usize, src: &mut S) -> Vec<BitVector> {
    if m == 0 {
        return Vec::new();
    }
    let mut out = vec![unit(m, 0), unit(m, m - 1), BitVector::new(vec![true; m])];
    while out.len() < 6 {
        let d = BitVector::random(m, src, Draw::Other);
        if d.count_ones() > 0 {
            out.push(d);
        }
    }
    out
}

fn unit(m: usize, i: usize) -> BitVector {
    let mut bits = vec![false; m];
    bits[i] = true;
    BitVector::new(bits)
}

#[derive(Debug, Clone, Serialize)]
pub struct JointCollision {
    /// Largest joint collision probability over pairs of distinct pairs.
    pub max_probability: f64,
    pub exact: (u64, u64),
    pub bound: f64,
}

/// Exact `Pr[h1(x0) = h1(x1) ∧ h2(y0) = h2(y1)]` for independent draws of
/// two maps, maximized over distinct `x0 ≠ x1`, `y0 ≠ y1`.
pub fn joint_collision_probability(
    m1: usize,
    k1: usize,
    m2: usize,
    k2: usize,
) -> Result<JointCollision, HashError> {
    exact_guard(m1, k1)?;
    exact_guard(m2, k2)?;
    if m1 * k1 + m2 * k2 > EXACT_FAMILY_GUARD {
        return Err(HashError::Guard { m: m1 + m2, k: k1 + k2, reason: "joint family size" });
    }
    let total = 1u64 << (m1 * k1 + m2 * k2);
    let mut worst = 0u64;
    for d1 in 1..(1u64 << m1) {
        for d2 in 1..(1u64 << m2) {
            let c = joint_count(m1, k1, d1, m2, k2, d2);
            worst = worst.max(c);
        }
    }
    Ok(JointCollision {
        max_probability: worst as f64 / total as f64,
        exact: (worst, total),
        bound: 2f64.powi(-((k1 + k2) as i32)),
    })
}

/// Exact joint collision probability for explicit input pairs, which may be
/// identical (then that component always collides).
pub fn joint_collision_for_pairs(
    k1: usize,
    pair1: (&BitVector, &BitVector),
    k2: usize,
    pair2: (&BitVector, &BitVector),
) -> Result<Rational, HashError> {
    let (m1, m2) = (pair1.0.len(), pair2.0.len());
    if pair1.1.len() != m1 || pair2.1.len() != m2 {
        return Err(HashError::InputLength { expected: m1, got: pair1.1.len() });
    }
    exact_guard(m1, k1)?;
    exact_guard(m2, k2)?;
    let d1 = pair1.0.xor(pair1.1).expect("same length").to_u64_lsb();
    let d2 = pair2.0.xor(pair2.1).expect("same length").to_u64_lsb();
    let total = 1u64 << (m1 * k1 + m2 * k2);
    Ok(Rational::from_ratio(joint_count(m1, k1, d1, m2, k2, d2), total))
}

/// Number of `(A1, A2)` pairs with `A1 d1 = 0` and `A2 d2 = 0`, by
/// enumerating both families.
fn joint_count(m1: usize, k1: usize, d1: u64, m2: usize, k2: usize, d2: u64) -> u64 {
    let kills = |m: usize, k: usize, d: u64| -> Vec<bool> {
        (0..(1u64 << (m * k)))
            .map(|index| {
                let cols = columns(m, k, index);
                (0..m).filter(|&c| (d >> c) & 1 == 1).fold(0u32, |acc, c| acc ^ cols[c]) == 0
            })
            .collect()
    };
    let first = kills(m1, k1, d1);
    let second = kills(m2, k2, d2);
    let mut count = 0u64;
    for &a in &first {
        for &b in &second {
            if a && b {
                count += 1;
            }
        }
    }
    count
}

impl BitVector {
    /// Bit `i` of the result is element `i` (input position order).
    pub(crate) fn to_u64_lsb(&self) -> u64 {
        self.bits().iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
    }
}
