//! Binary erasure broadcast channel and erasure bookkeeping.
//!
//! Positions are 0-based everywhere. The erasure symbol is a third variant of
//! [`Symbol`], so a [`BitVector`] can never be mistaken for an
//! [`ObservationVector`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::randomness::{Draw, Phase, RandomSource};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("erasure probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("index set is not strictly increasing")]
    NotIncreasing,
    #[error("invalid symbol {0:?}")]
    BadSymbol(char),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// One of the two receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Receiver {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Receiver {
    pub const BOTH: [Receiver; 2] = [Receiver::One, Receiver::Two];

    pub fn other(self) -> Receiver {
        match self {
            Receiver::One => Receiver::Two,
            Receiver::Two => Receiver::One,
        }
    }

    /// 0 for Bob-1, 1 for Bob-2.
    pub fn index(self) -> usize {
        match self {
            Receiver::One => 0,
            Receiver::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}

impl fmt::Display for Receiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bob-{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitVector {
    bits: Vec<bool>,
}

impl BitVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    pub fn random<S: RandomSource + ?Sized>(len: usize, src: &mut S, tag: Draw) -> Self {
        Self { bits: src.bits(tag, len) }
    }

    /// Little helper for tests and tiny enumerations: the `len` low bits of
    /// `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        Self { bits: (0..len).rev().map(|i| (value >> i) & 1 == 1).collect() }
    }

    pub fn to_u64(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector, ChannelError> {
        if self.len() != other.len() {
            return Err(ChannelError::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(BitVector { bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect() })
    }

    /// Bits packed most significant first, zero-padded to whole bytes.
    pub fn to_packed(&self) -> Vec<u8> {
        pack_bits(&self.bits)
    }
}

pub(crate) fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 0x80 >> (i % 8);
        }
    }
    out
}

pub(crate) fn unpack_bits(bytes: &[u8], len: usize) -> Option<Vec<bool>> {
    if bytes.len() * 8 < len {
        return None;
    }
    Some((0..len).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect())
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ChannelError::BadSymbol(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitVector::new)
    }
}

/// Channel output symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    Zero,
    One,
    Erased,
}

impl Symbol {
    pub fn from_bit(bit: bool) -> Symbol {
        if bit {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn bit(self) -> Option<bool> {
        match self {
            Symbol::Zero => Some(false),
            Symbol::One => Some(true),
            Symbol::Erased => None,
        }
    }

    pub fn is_erased(self) -> bool {
        self == Symbol::Erased
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ObservationVector {
    symbols: Vec<Symbol>,
}

impl ObservationVector {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn get(&self, i: usize) -> Symbol {
        self.symbols[i]
    }

    /// Erasure indicator per position.
    pub fn erasure_mask(&self) -> Vec<bool> {
        self.symbols.iter().map(|s| s.is_erased()).collect()
    }
}

impl fmt::Display for ObservationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            f.write_str(match s {
                Symbol::Zero => "0",
                Symbol::One => "1",
                Symbol::Erased => "e",
            })?;
        }
        Ok(())
    }
}

impl FromStr for ObservationVector {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(Symbol::Zero),
                '1' => Ok(Symbol::One),
                'e' => Ok(Symbol::Erased),
                other => Err(ChannelError::BadSymbol(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(ObservationVector::new)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BroadcastParams {
    p1: f64,
    p2: f64,
}

impl BroadcastParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self, ChannelError> {
        check_probability(p1)?;
        check_probability(p2)?;
        Ok(Self { p1, p2 })
    }

    pub fn p(&self, receiver: Receiver) -> f64 {
        match receiver {
            Receiver::One => self.p1,
            Receiver::Two => self.p2,
        }
    }
}

fn check_probability(p: f64) -> Result<(), ChannelError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ChannelError::Probability(p))
    }
}

/// Ordered set of positions, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    /// Checks strict increase and `index < n` for every element.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self, ChannelError> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ChannelError::NotIncreasing);
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(ChannelError::IndexOutOfRange { index: last, len: n });
            }
        }
        Ok(Self { indices })
    }

    pub fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn full(n: usize) -> Self {
        Self { indices: (0..n).collect() }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Positions `t` taken as offsets into `self`: `(s ∘ t)[j] = s[t[j]]`.
    pub fn compose(&self, inner: &IndexSet) -> Result<IndexSet, ChannelError> {
        let indices = inner
            .indices
            .iter()
            .map(|&j| {
                self.indices
                    .get(j)
                    .copied()
                    .ok_or(ChannelError::IndexOutOfRange { index: j, len: self.len() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IndexSet { indices })
    }

    /// Elements of `self` not in `other`.
    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet { indices: self.indices.iter().copied().filter(|&i| !other.contains(i)).collect() }
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.indices.iter().all(|&i| !other.contains(i))
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    /// Positions of `self` picked by `offsets` (sorted offsets into `self`).
    pub fn pick(&self, offsets: &[usize]) -> IndexSet {
        IndexSet { indices: offsets.iter().map(|&j| self.indices[j]).collect() }
    }
}

/// Restriction `v|_s`: the elements of `v` at the positions of `s`, in order.
pub trait Restrict: Sized {
    fn restrict(&self, s: &IndexSet) -> Result<Self, ChannelError>;
}

fn restrict_slice<T: Copy>(v: &[T], s: &IndexSet) -> Result<Vec<T>, ChannelError> {
    if let Some(&last) = s.indices.last() {
        if last >= v.len() {
            return Err(ChannelError::IndexOutOfRange { index: last, len: v.len() });
        }
    }
    Ok(s.indices.iter().map(|&i| v[i]).collect())
}

impl Restrict for BitVector {
    fn restrict(&self, s: &IndexSet) -> Result<Self, ChannelError> {
        restrict_slice(&self.bits, s).map(BitVector::new)
    }
}

impl Restrict for ObservationVector {
    fn restrict(&self, s: &IndexSet) -> Result<Self, ChannelError> {
        restrict_slice(&self.symbols, s).map(ObservationVector::new)
    }
}

impl<T: Copy> Restrict for Vec<T> {
    fn restrict(&self, s: &IndexSet) -> Result<Self, ChannelError> {
        restrict_slice(self, s)
    }
}

/// Passes `x` through BEC(`p`), tagging erasure draws for `receiver`.
pub fn transmit_tagged<S: RandomSource + ?Sized>(
    x: &BitVector,
    p: f64,
    receiver: Receiver,
    phase: Phase,
    src: &mut S,
) -> Result<ObservationVector, ChannelError> {
    check_probability(p)?;
    let tag = Draw::Erasure { receiver, phase };
    let symbols = x
        .bits
        .iter()
        .map(|&b| if src.bernoulli(tag, p) { Symbol::Erased } else { Symbol::from_bit(b) })
        .collect();
    Ok(ObservationVector { symbols })
}

/// Passes `x` through BEC(`p`).
pub fn transmit_bec<S: RandomSource + ?Sized>(
    x: &BitVector,
    p: f64,
    src: &mut S,
) -> Result<ObservationVector, ChannelError> {
    transmit_tagged(x, p, Receiver::One, Phase::One, src)
}

/// One use of the broadcast channel: the same `x` through two independent
/// erasure processes.
pub fn broadcast<S: RandomSource + ?Sized>(
    x: &BitVector,
    params: &BroadcastParams,
    src: &mut S,
) -> (ObservationVector, ObservationVector) {
    let y1 = transmit_tagged(x, params.p1, Receiver::One, Phase::One, src).expect("validated");
    let y2 = transmit_tagged(x, params.p2, Receiver::Two, Phase::One, src).expect("validated");
    (y1, y2)
}

/// Splits positions into erased (`E`) and non-erased (`Ē`).
pub fn erasure_partition(y: &ObservationVector) -> (IndexSet, IndexSet) {
    let (erased, kept): (Vec<usize>, Vec<usize>) =
        (0..y.len()).partition(|&i| y.symbols[i].is_erased());
    (IndexSet { indices: erased }, IndexSet { indices: kept })
}

/// `(Δ(y), Δ̄(y))`: erased and non-erased counts.
pub fn erasure_count(y: &ObservationVector) -> (usize, usize) {
    let erased = y.symbols.iter().filter(|s| s.is_erased()).count();
    (erased, y.len() - erased)
}
