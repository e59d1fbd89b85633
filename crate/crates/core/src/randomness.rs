//! Injected randomness.
//!
//! Every random decision in the crate goes through [`RandomSource`] with a
//! [`Draw`] tag naming who draws and what for. Monte Carlo code backs the
//! trait with seeded ChaCha streams; the exact oracle backs it with an
//! enumerator that walks every branch with its exact weight.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Receiver;

/// 64-bit avalanche mix (the SplitMix64 finalizer applied to
/// `master + golden * (index + 1)`). Child seeds for trial `i` are
/// `mix(master, i)`, so campaigns replay identically under any scheduling.
pub fn mix(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded generator for trial `index` of a campaign.
pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(master, index))
}

/// Which protocol phase a draw belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    Two,
}

/// Tag attached to every random decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Draw {
    /// Alice's channel input bits.
    Input,
    /// Erasure indicator of `receiver`'s sub-channel.
    Erasure { receiver: Receiver, phase: Phase },
    /// Index-set selection by a receiver.
    Subset { receiver: Receiver, phase: Phase },
    /// Hash matrix entries for the link of `receiver`; `label` is the message
    /// label, `verification` distinguishes `h` from `kappa`.
    Hash { link: Receiver, label: u8, verification: bool },
    /// Message bits handed to Alice.
    Message { link: Receiver, label: u8 },
    /// A receiver's choice bit.
    Choice { receiver: Receiver },
    /// Attacker-side guessing randomness.
    Attack,
    /// Anything else (plain `Rng`-backed callers).
    Other,
}

impl Draw {
    fn stream(&self) -> usize {
        match self {
            Draw::Input => 0,
            Draw::Hash { .. } => 1,
            Draw::Erasure { .. } => 2,
            Draw::Subset { receiver: Receiver::One, .. } => 3,
            Draw::Subset { receiver: Receiver::Two, .. } => 4,
            Draw::Message { .. } | Draw::Choice { .. } => 5,
            Draw::Attack | Draw::Other => 6,
        }
    }
}

pub trait RandomSource {
    /// `true` with probability `p`.
    fn bernoulli(&mut self, tag: Draw, p: f64) -> bool;

    /// Uniform on `0..n`; `n > 0`.
    fn uniform(&mut self, tag: Draw, n: usize) -> usize;

    /// Uniform `size`-subset of `0..pool`, sorted ascending.
    fn subset(&mut self, tag: Draw, pool: usize, size: usize) -> Vec<usize> {
        partial_fisher_yates(self, tag, pool, size)
    }

    fn bit(&mut self, tag: Draw) -> bool {
        self.uniform(tag, 2) == 1
    }

    /// `len` fair bits; sources may draw them a word at a time.
    fn bits(&mut self, tag: Draw, len: usize) -> Vec<bool> {
        (0..len).map(|_| self.bit(tag)).collect()
    }
}

fn unpack_words(mut next: impl FnMut() -> u64, len: usize) -> Vec<bool> {
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let w = next();
        let take = (len - out.len()).min(64);
        out.extend((0..take).map(|i| (w >> i) & 1 == 1));
    }
    out
}

/// Seeded partial Fisher–Yates: the first `size` slots of a shuffled
/// `0..pool`, returned sorted.
pub fn partial_fisher_yates<S: RandomSource + ?Sized>(
    src: &mut S,
    tag: Draw,
    pool: usize,
    size: usize,
) -> Vec<usize> {
    assert!(size <= pool, "subset larger than pool");
    let mut slots: Vec<usize> = (0..pool).collect();
    for i in 0..size {
        let j = i + src.uniform(tag, pool - i);
        slots.swap(i, j);
    }
    let mut picked = slots[..size].to_vec();
    picked.sort_unstable();
    picked
}

impl<R: RngCore> RandomSource for R {
    fn bernoulli(&mut self, _tag: Draw, p: f64) -> bool {
        self.gen::<f64>() < p
    }

    fn uniform(&mut self, _tag: Draw, n: usize) -> usize {
        self.gen_range(0..n)
    }

    fn bits(&mut self, _tag: Draw, len: usize) -> Vec<bool> {
        unpack_words(|| self.next_u64(), len)
    }
}

/// Independent ChaCha stream per role (inputs, Alice's hashes, channel,
/// each receiver, environment, attacker). Changing how one role consumes
/// randomness leaves the others untouched.
#[derive(Debug, Clone)]
pub struct StreamedSource {
    streams: [ChaCha8Rng; 7],
}

impl StreamedSource {
    pub fn new(seed: u64) -> Self {
        let streams = std::array::from_fn(|i| ChaCha8Rng::seed_from_u64(mix(seed, i as u64)));
        Self { streams }
    }

    /// Source for trial `index` of a campaign seeded with `master`.
    pub fn for_trial(master: u64, index: u64) -> Self {
        Self::new(mix(master, index))
    }

    pub fn from_rng<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(rng.gen())
    }
}

impl RandomSource for StreamedSource {
    fn bernoulli(&mut self, tag: Draw, p: f64) -> bool {
        self.streams[tag.stream()].gen::<f64>() < p
    }

    fn uniform(&mut self, tag: Draw, n: usize) -> usize {
        self.streams[tag.stream()].gen_range(0..n)
    }

    fn bits(&mut self, tag: Draw, len: usize) -> Vec<bool> {
        let stream = &mut self.streams[tag.stream()];
        unpack_words(|| stream.next_u64(), len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_separates_neighbouring_indices() {
        let a = mix(7, 0);
        let b = mix(7, 1);
        assert_ne!(a, b);
        assert!((a ^ b).count_ones() > 16);
        assert_eq!(mix(7, 3), mix(7, 3));
    }

    #[test]
    fn fisher_yates_returns_sorted_distinct_subset() {
        let mut rng = trial_rng(1, 2);
        for _ in 0..100 {
            let s = partial_fisher_yates(&mut rng, Draw::Other, 10, 4);
            assert_eq!(s.len(), 4);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&i| i < 10));
        }
    }

    #[test]
    fn fisher_yates_is_uniform_over_pairs() {
        let mut rng = trial_rng(3, 0);
        let mut counts = std::collections::HashMap::new();
        let trials = 60_000;
        for _ in 0..trials {
            *counts.entry(partial_fisher_yates(&mut rng, Draw::Other, 4, 2)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = trials as f64 / 6.0;
        let sd = (trials as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - expected).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn streams_are_isolated() {
        let mut a = StreamedSource::new(11);
        let mut b = StreamedSource::new(11);
        // Consuming the input stream in `a` must not shift the hash stream.
        for _ in 0..5 {
            a.bit(Draw::Input);
        }
        let tag = Draw::Hash { link: Receiver::One, label: 0, verification: false };
        let xs: Vec<bool> = (0..32).map(|_| a.bit(tag)).collect();
        let ys: Vec<bool> = (0..32).map(|_| b.bit(tag)).collect();
        assert_eq!(xs, ys);
    }
}
