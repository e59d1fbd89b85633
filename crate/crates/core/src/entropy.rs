//! Finite distributions and the entropy measures, distances and bound
//! calculators used by the security analysis. All logarithms are base 2.
//!
//! Weights are generic over [`Probability`]; entropies come back as `f64`
//! bits. Mutual information is reported as an exact `0.0` whenever the joint
//! equals the product of its marginals atom by atom.

use std::collections::HashMap;
use std::hash::Hash;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{abs_diff, is_negative, Probability};

/// Tolerance on total mass.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("distribution has no outcomes")]
    Empty,
    #[error("negative probability at position {0}")]
    Negative(usize),
    #[error("total mass {0} differs from 1 by more than 1e-9")]
    Mass(f64),
    #[error("{outcomes} outcomes but {probs} probabilities")]
    Shape { outcomes: usize, probs: usize },
    #[error("distributions are over different outcome spaces")]
    Mismatch,
    #[error("smoothing parameter {0} outside [0, 1)")]
    Epsilon(f64),
    #[error("malformed distribution encoding: {0}")]
    Encoding(String),
}

/// Explicit probability vector over enumerable outcomes. Outcomes are kept
/// in insertion order and are distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution<O, P = f64> {
    outcomes: Vec<O>,
    probs: Vec<P>,
}

impl<O: Clone + Eq + Hash, P: Probability> FiniteDistribution<O, P> {
    /// Validates shape, nonnegativity and total mass. Repeated outcomes are
    /// merged.
    pub fn new(outcomes: Vec<O>, probs: Vec<P>) -> Result<Self, EntropyError> {
        if outcomes.len() != probs.len() {
            return Err(EntropyError::Shape { outcomes: outcomes.len(), probs: probs.len() });
        }
        if outcomes.is_empty() {
            return Err(EntropyError::Empty);
        }
        if let Some(i) = probs.iter().position(is_negative) {
            return Err(EntropyError::Negative(i));
        }
        let total = probs.iter().fold(P::zero(), |a, b| a + b.clone()).as_f64();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(EntropyError::Mass(total));
        }
        Ok(Self::merged(outcomes, probs))
    }

    fn merged(outcomes: Vec<O>, probs: Vec<P>) -> Self {
        let mut index: HashMap<O, usize> = HashMap::with_capacity(outcomes.len());
        let mut out_o = Vec::with_capacity(outcomes.len());
        let mut out_p: Vec<P> = Vec::with_capacity(outcomes.len());
        for (o, p) in outcomes.into_iter().zip(probs) {
            match index.get(&o) {
                Some(&i) => out_p[i] = out_p[i].clone() + p,
                None => {
                    index.insert(o.clone(), out_o.len());
                    out_o.push(o);
                    out_p.push(p);
                }
            }
        }
        Self { outcomes: out_o, probs: out_p }
    }

    /// Builds from `(outcome, weight)` pairs without a mass check; weights
    /// are normalized by their total.
    pub fn from_weights(pairs: impl IntoIterator<Item = (O, P)>) -> Result<Self, EntropyError> {
        let (outcomes, weights): (Vec<O>, Vec<P>) = pairs.into_iter().unzip();
        if outcomes.is_empty() {
            return Err(EntropyError::Empty);
        }
        let total = weights.iter().fold(P::zero(), |a, b| a + b.clone());
        if total.is_zero() {
            return Err(EntropyError::Mass(0.0));
        }
        let probs = weights.into_iter().map(|w| w / total.clone()).collect();
        Self::new(outcomes, probs)
    }

    pub fn uniform(outcomes: Vec<O>) -> Result<Self, EntropyError> {
        let n = outcomes.len() as u64;
        if n == 0 {
            return Err(EntropyError::Empty);
        }
        let probs = (0..n).map(|_| P::from_ratio(1, n)).collect();
        Self::new(outcomes, probs)
    }

    pub fn point(outcome: O) -> Self {
        Self { outcomes: vec![outcome], probs: vec![P::one()] }
    }

    pub fn outcomes(&self) -> &[O] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[P] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&O, &P)> {
        self.outcomes.iter().zip(&self.probs)
    }

    pub fn prob(&self, outcome: &O) -> P {
        self.iter().find(|(o, _)| *o == outcome).map_or_else(P::zero, |(_, p)| p.clone())
    }

    pub fn total_mass(&self) -> P {
        self.probs.iter().fold(P::zero(), |a, b| a + b.clone())
    }

    pub fn max_prob(&self) -> P {
        self.probs.iter().fold(P::zero(), |m, p| if *p > m { p.clone() } else { m })
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|p| !p.is_zero()).count()
    }

    /// Image of the distribution under `f`.
    pub fn map<T: Clone + Eq + Hash>(&self, f: impl Fn(&O) -> T) -> FiniteDistribution<T, P> {
        FiniteDistribution::merged(self.outcomes.iter().map(f).collect(), self.probs.clone())
    }

    /// Same outcomes with `f64` weights.
    pub fn to_f64(&self) -> FiniteDistribution<O, f64> {
        FiniteDistribution { outcomes: self.outcomes.clone(), probs: self.probs.iter().map(|p| p.as_f64()).collect() }
    }

    pub fn min_entropy(&self) -> f64 {
        -self.max_prob().as_f64().log2() + 0.0
    }

    pub fn renyi2_entropy(&self) -> f64 {
        let collision = self.probs.iter().fold(P::zero(), |a, p| a + p.clone() * p.clone());
        -collision.as_f64().log2() + 0.0
    }

    pub fn zero_entropy(&self) -> f64 {
        (self.support_size() as f64).log2()
    }

    pub fn shannon_entropy(&self) -> f64 {
        self.probs
            .iter()
            .map(|p| p.as_f64())
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.log2())
            .sum::<f64>()
            .max(0.0)
    }

    /// Greedy smoothing surrogate for `H_∞^ε`: lowers the largest atoms to a
    /// common level, removing at most `2ε` total mass (half-L1 distance `ε`
    /// from the original), and reports `-log2` of the new maximum without
    /// renormalizing. Returns `+∞` once every atom can be removed.
    pub fn smooth_min_entropy(&self, eps: f64) -> Result<f64, EntropyError> {
        if !(0.0..1.0).contains(&eps) {
            return Err(EntropyError::Epsilon(eps));
        }
        let probs: Vec<f64> = self.probs.iter().map(|p| p.as_f64()).collect();
        Ok(water_level(&probs, 2.0 * eps).map_or(f64::INFINITY, |t| -t.log2() + 0.0))
    }

    /// `(1/2) Σ |p - q|`; both distributions must have the same outcome set.
    pub fn statistical_distance(&self, other: &Self) -> Result<P, EntropyError> {
        let same_space = self.len() == other.len() && self.outcomes.iter().all(|o| other.outcomes.contains(o));
        if !same_space {
            return Err(EntropyError::Mismatch);
        }
        let sum = self.iter().fold(P::zero(), |acc, (o, p)| acc + abs_diff(p, &other.prob(o)));
        Ok(sum / (P::one() + P::one()))
    }
}

/// Level `t` such that removing `Σ max(p_i - t, 0) = budget` caps every atom
/// at `t`; `None` when the budget covers the whole vector.
fn water_level(probs: &[f64], budget: f64) -> Option<f64> {
    let mut sorted: Vec<f64> = probs.iter().copied().filter(|&p| p > 0.0).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sorted.iter().sum();
    if budget >= total - 1e-15 {
        return None;
    }
    let mut prefix = 0.0;
    for (i, &p) in sorted.iter().enumerate() {
        prefix += p;
        let count = (i + 1) as f64;
        let level = (prefix - budget) / count;
        let next = sorted.get(i + 1).copied().unwrap_or(0.0);
        if level >= next {
            return Some(level.min(sorted[0]));
        }
    }
    None
}

/// Distribution of a pair `(x, y)` with marginal and conditional accessors.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<X, Y, P = f64> {
    joint: FiniteDistribution<(X, Y), P>,
}

impl<X, Y, P> JointDistribution<X, Y, P>
where
    X: Clone + Eq + Hash,
    Y: Clone + Eq + Hash,
    P: Probability,
{
    pub fn new(joint: FiniteDistribution<(X, Y), P>) -> Self {
        Self { joint }
    }

    pub fn from_pairs(pairs: Vec<((X, Y), P)>) -> Result<Self, EntropyError> {
        let (o, p) = pairs.into_iter().unzip();
        FiniteDistribution::new(o, p).map(Self::new)
    }

    /// `P_X × P_Y`.
    pub fn product(px: &FiniteDistribution<X, P>, py: &FiniteDistribution<Y, P>) -> Self {
        let mut outcomes = Vec::with_capacity(px.len() * py.len());
        let mut probs = Vec::with_capacity(px.len() * py.len());
        for (x, a) in px.iter() {
            for (y, b) in py.iter() {
                outcomes.push((x.clone(), y.clone()));
                probs.push(a.clone() * b.clone());
            }
        }
        Self { joint: FiniteDistribution::merged(outcomes, probs) }
    }

    pub fn joint(&self) -> &FiniteDistribution<(X, Y), P> {
        &self.joint
    }

    pub fn marginal_x(&self) -> FiniteDistribution<X, P> {
        self.joint.map(|(x, _)| x.clone())
    }

    pub fn marginal_y(&self) -> FiniteDistribution<Y, P> {
        self.joint.map(|(_, y)| y.clone())
    }

    pub fn swap(&self) -> JointDistribution<Y, X, P> {
        JointDistribution { joint: self.joint.map(|(x, y)| (y.clone(), x.clone())) }
    }

    /// `P_{X|Y=y}`, or `None` when `y` has zero mass.
    pub fn conditional_x(&self, y: &Y) -> Option<FiniteDistribution<X, P>> {
        let py = self.joint.iter().filter(|((_, b), _)| b == y).fold(P::zero(), |a, (_, p)| a + p.clone());
        if py.is_zero() {
            return None;
        }
        let (o, p): (Vec<X>, Vec<P>) = self
            .joint
            .iter()
            .filter(|((_, b), _)| b == y)
            .map(|((x, _), p)| (x.clone(), p.clone() / py.clone()))
            .unzip();
        Some(FiniteDistribution::merged(o, p))
    }

    /// Conditionals for every `y` with positive mass.
    fn conditionals(&self) -> Vec<FiniteDistribution<X, P>> {
        let mut by_y: HashMap<Y, (Vec<X>, Vec<P>)> = HashMap::new();
        let mut order = Vec::new();
        for ((x, y), p) in self.joint.iter() {
            if p.is_zero() {
                continue;
            }
            let entry = by_y.entry(y.clone()).or_insert_with(|| {
                order.push(y.clone());
                (Vec::new(), Vec::new())
            });
            entry.0.push(x.clone());
            entry.1.push(p.clone());
        }
        order
            .into_iter()
            .map(|y| {
                let (o, w) = by_y.remove(&y).expect("recorded");
                let total = w.iter().fold(P::zero(), |a, b| a + b.clone());
                FiniteDistribution::merged(o, w.into_iter().map(|p| p / total.clone()).collect())
            })
            .collect()
    }

    /// `min_y H_∞(X | Y = y)`.
    pub fn cond_min_entropy(&self) -> f64 {
        self.conditionals().iter().map(|d| d.min_entropy()).fold(f64::INFINITY, f64::min)
    }

    /// `max_y H_0(X | Y = y)`.
    pub fn cond_zero_entropy(&self) -> f64 {
        self.conditionals().iter().map(|d| d.zero_entropy()).fold(0.0, f64::max)
    }

    /// Surrogate `H_∞^ε(X|Y)`: the smallest per-`y` surrogate.
    pub fn cond_smooth_min_entropy(&self, eps: f64) -> Result<f64, EntropyError> {
        let mut best = f64::INFINITY;
        for d in self.conditionals() {
            best = best.min(d.smooth_min_entropy(eps)?);
        }
        Ok(best)
    }

    /// Shannon `H(X|Y)`.
    pub fn cond_entropy(&self) -> f64 {
        (self.joint.shannon_entropy() - self.marginal_y().shannon_entropy()).max(0.0)
    }

    /// True when `p(x, y) = p(x) p(y)` holds exactly for every pair.
    pub fn is_product(&self) -> bool {
        let px = self.marginal_x();
        let py = self.marginal_y();
        if self.joint.support_size() != px.support_size() * py.support_size() {
            return false;
        }
        let lookup_x: HashMap<&X, &P> = px.iter().collect();
        let lookup_y: HashMap<&Y, &P> = py.iter().collect();
        self.joint
            .iter()
            .all(|((x, y), p)| *p == lookup_x[x].clone() * lookup_y[y].clone())
    }

    /// `Σ p(x,y) log2(p(x,y) / (p(x) p(y)))`, clamped at zero.
    pub fn mutual_information(&self) -> f64 {
        if self.is_product() {
            return 0.0;
        }
        let px = self.marginal_x();
        let py = self.marginal_y();
        let lookup_x: HashMap<&X, &P> = px.iter().collect();
        let lookup_y: HashMap<&Y, &P> = py.iter().collect();
        let mut mi = 0.0;
        for ((x, y), p) in self.joint.iter() {
            if p.is_zero() {
                continue;
            }
            // The ratio is formed in the native arithmetic before rounding.
            let ratio = p.clone() / (lookup_x[x].clone() * lookup_y[y].clone());
            mi += p.as_f64() * ratio.as_f64().log2();
        }
        mi.max(0.0)
    }
}

/// JSON form `{outcomes: [...], probs: [...]}`. Float weights are numbers;
/// exact weights are `"a/b"` strings.
#[derive(Serialize, Deserialize)]
struct Encoded<O> {
    outcomes: Vec<O>,
    probs: Vec<serde_json::Value>,
}

impl<O: Clone + Eq + Hash + Serialize, P: Probability> Serialize for FiniteDistribution<O, P> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let probs = self
            .probs
            .iter()
            .map(|p| {
                if P::EXACT {
                    serde_json::Value::String(p.render())
                } else {
                    serde_json::json!(p.as_f64())
                }
            })
            .collect();
        Encoded { outcomes: self.outcomes.clone(), probs }.serialize(serializer)
    }
}

impl<'de, O: Clone + Eq + Hash + DeserializeOwned, P: Probability> Deserialize<'de> for FiniteDistribution<O, P> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let enc = Encoded::<O>::deserialize(deserializer)?;
        let probs = enc
            .probs
            .iter()
            .map(|v| match v {
                serde_json::Value::String(s) => P::parse_prob(s),
                serde_json::Value::Number(n) => n.as_f64().and_then(P::from_f64),
                _ => None,
            })
            .collect::<Option<Vec<P>>>()
            .ok_or_else(|| D::Error::custom("unreadable probability"))?;
        FiniteDistribution::new(enc.outcomes, probs).map_err(D::Error::custom)
    }
}

pub fn min_entropy<O: Clone + Eq + Hash, P: Probability>(d: &FiniteDistribution<O, P>) -> f64 {
    d.min_entropy()
}

pub fn renyi2_entropy<O: Clone + Eq + Hash, P: Probability>(d: &FiniteDistribution<O, P>) -> f64 {
    d.renyi2_entropy()
}

pub fn zero_entropy<O: Clone + Eq + Hash, P: Probability>(d: &FiniteDistribution<O, P>) -> f64 {
    d.zero_entropy()
}

pub fn smooth_min_entropy<O: Clone + Eq + Hash, P: Probability>(
    d: &FiniteDistribution<O, P>,
    eps: f64,
) -> Result<f64, EntropyError> {
    d.smooth_min_entropy(eps)
}

pub fn statistical_distance<O: Clone + Eq + Hash, P: Probability>(
    p: &FiniteDistribution<O, P>,
    q: &FiniteDistribution<O, P>,
) -> Result<P, EntropyError> {
    p.statistical_distance(q)
}

pub fn cond_min_entropy<X, Y, P>(j: &JointDistribution<X, Y, P>) -> f64
where
    X: Clone + Eq + Hash,
    Y: Clone + Eq + Hash,
    P: Probability,
{
    j.cond_min_entropy()
}

pub fn mutual_information<X, Y, P>(j: &JointDistribution<X, Y, P>) -> f64
where
    X: Clone + Eq + Hash,
    Y: Clone + Eq + Hash,
    P: Probability,
{
    j.mutual_information()
}

/// Binary entropy `h2(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Key length guaranteed by universal hashing of material with Rényi-2
/// entropy at least `c`: `max(0, l - log2(1 + 2^(l - c)))`.
pub fn privacy_amp_bound(l: f64, c: f64) -> f64 {
    let loss = if c.is_infinite() && c > 0.0 { 0.0 } else { (2f64.powf(l - c)).ln_1p() / std::f64::consts::LN_2 };
    (l - loss).max(0.0)
}

/// Distance-from-uniform bound `2^m ε / 2 + 2^m ε'` for `m` jointly extracted
/// keys.
pub fn dlhl_closeness(m: u32, eps: f64, eps_prime: f64) -> f64 {
    let scale = 2f64.powi(m as i32);
    scale * eps / 2.0 + scale * eps_prime
}

/// One subset condition: its smooth min-entropy and the lengths of the keys
/// it covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetEntropy {
    pub entropy: f64,
    pub key_lengths: Vec<f64>,
}

/// True iff every subset satisfies `H ≥ Σ n_i + 2 log2(1/ε)`.
pub fn dlhl_condition(subsets: &[SubsetEntropy], eps: f64) -> bool {
    let slack = 2.0 * (1.0 / eps).log2();
    subsets.iter().all(|s| s.entropy >= s.key_lengths.iter().sum::<f64>() + slack)
}

/// Chain-rule certificate
/// `H_∞(U|W) + H_∞^ε(V|U,W) - H_0(V|W) - log2(1/ε')`.
pub fn chain_bound(hinf_u_given_w: f64, hinf_eps_v_given_uw: f64, h0_v_given_w: f64, eps_prime: f64) -> f64 {
    hinf_u_given_w + hinf_eps_v_given_uw - h0_v_given_w - (1.0 / eps_prime).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn dist(probs: &[f64]) -> FiniteDistribution<usize> {
        FiniteDistribution::new((0..probs.len()).collect(), probs.to_vec()).unwrap()
    }

    #[test]
    fn min_entropy_examples() {
        assert_eq!(dist(&[0.125; 8]).min_entropy(), 3.0);
        assert_eq!(dist(&[1.0]).min_entropy(), 0.0);
        assert!((dist(&[0.75, 0.25]).min_entropy() - (4.0f64 / 3.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_vectors() {
        assert_eq!(FiniteDistribution::<u8>::new(vec![], vec![]), Err(EntropyError::Empty));
        assert!(matches!(FiniteDistribution::new(vec![0, 1], vec![0.5, 0.6]), Err(EntropyError::Mass(_))));
        assert!(matches!(FiniteDistribution::new(vec![0, 1], vec![1.5, -0.5]), Err(EntropyError::Negative(1))));
    }

    #[test]
    fn renyi_and_zero_entropy() {
        assert!((dist(&[0.75, 0.25]).renyi2_entropy() - (1.6f64).log2()).abs() < 1e-12);
        assert_eq!(dist(&[0.25; 4]).renyi2_entropy(), 2.0);
        assert_eq!(dist(&[0.5, 0.5, 0.0]).zero_entropy(), 1.0);
        assert_eq!(dist(&[1.0]).zero_entropy(), 0.0);
    }

    #[test]
    fn smoothing_examples() {
        let d = dist(&[0.5, 0.5]);
        assert_eq!(d.smooth_min_entropy(0.0).unwrap(), 1.0);
        assert!((d.smooth_min_entropy(0.25).unwrap() - 2.0).abs() < 1e-12);
        assert!(d.smooth_min_entropy(1.0).is_err());
        assert_eq!(d.smooth_min_entropy(0.6).unwrap(), f64::INFINITY);
    }

    #[test]
    fn smoothing_matches_grid_search_on_two_atoms() {
        // Exhaustive search over trimmed vectors q <= p with removed mass
        // at most 2ε, minimizing the largest atom.
        let steps = 400;
        for &(a, eps) in &[(0.7, 0.1), (0.5, 0.05), (0.9, 0.2), (0.6, 0.15)] {
            let p = [a, 1.0 - a];
            let mut best = f64::INFINITY;
            for i in 0..=steps {
                for j in 0..=steps {
                    let q = [p[0] * i as f64 / steps as f64, p[1] * j as f64 / steps as f64];
                    if (p[0] - q[0]) + (p[1] - q[1]) <= 2.0 * eps + 1e-12 {
                        best = best.min(q[0].max(q[1]));
                    }
                }
            }
            let got = dist(&p).smooth_min_entropy(eps).unwrap();
            assert!((got - (-best.log2())).abs() < 0.02, "a={a} eps={eps}: {got} vs {}", -best.log2());
        }
    }

    #[test]
    fn statistical_distance_examples() {
        let p = dist(&[0.7, 0.3]);
        let q = dist(&[0.5, 0.5]);
        assert!((p.statistical_distance(&q).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(p.statistical_distance(&p).unwrap(), 0.0);
        let a = FiniteDistribution::new(vec![0, 1], vec![1.0, 0.0]).unwrap();
        let b = FiniteDistribution::new(vec![0, 1], vec![0.0, 1.0]).unwrap();
        assert_eq!(a.statistical_distance(&b).unwrap(), 1.0);
        let c = FiniteDistribution::new(vec![5, 6], vec![0.5, 0.5]).unwrap();
        assert_eq!(a.statistical_distance(&c), Err(EntropyError::Mismatch));
    }

    #[test]
    fn conditional_min_entropy_examples() {
        let indep = JointDistribution::product(&dist(&[0.25; 4]), &dist(&[0.3, 0.7]));
        assert!((indep.cond_min_entropy() - 2.0).abs() < 1e-12);
        let equal = JointDistribution::from_pairs(vec![((0, 0), 0.5), ((1, 1), 0.5)]).unwrap();
        assert_eq!(equal.cond_min_entropy(), 0.0);
        let noisy = JointDistribution::from_pairs(vec![
            ((0, 0), 0.45),
            ((0, 1), 0.05),
            ((1, 0), 0.05),
            ((1, 1), 0.45),
        ])
        .unwrap();
        assert!((noisy.cond_min_entropy() - (1.0f64 / 0.9).log2()).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let indep = JointDistribution::product(&dist(&[0.3, 0.7]), &dist(&[0.5, 0.25, 0.25]));
        assert_eq!(indep.mutual_information(), 0.0);
        let copy = JointDistribution::from_pairs(vec![((0, 0), 0.5), ((1, 1), 0.5)]).unwrap();
        assert!((copy.mutual_information() - 1.0).abs() < 1e-12);
        let f = 0.11;
        let bsc = JointDistribution::from_pairs(vec![
            ((0, 0), (1.0 - f) / 2.0),
            ((0, 1), f / 2.0),
            ((1, 0), f / 2.0),
            ((1, 1), (1.0 - f) / 2.0),
        ])
        .unwrap();
        assert!((bsc.mutual_information() - (1.0 - binary_entropy(f))).abs() < 1e-12);
        assert!((bsc.mutual_information() - 0.5).abs() < 0.01);
    }

    #[test]
    fn exact_product_has_exact_zero_information() {
        let px = FiniteDistribution::new(vec![0, 1], vec![Rational::from_ratio(1, 3), Rational::from_ratio(2, 3)])
            .unwrap();
        let py = FiniteDistribution::<u8, Rational>::uniform(vec![0, 1, 2]).unwrap();
        let j = JointDistribution::product(&px, &py);
        assert!(j.is_product());
        assert_eq!(j.mutual_information(), 0.0);
    }

    #[test]
    fn bound_calculators() {
        assert!((privacy_amp_bound(5.0, 5.0) - 4.0).abs() < 1e-12);
        assert!((privacy_amp_bound(4.0, 6.0) - (4.0 - 1.25f64.log2())).abs() < 1e-12);
        assert_eq!(privacy_amp_bound(4.0, f64::INFINITY), 4.0);
        assert_eq!(privacy_amp_bound(1.0, -10.0), 0.0);
        assert!((dlhl_closeness(1, 2f64.powi(-10), 0.0) - 2f64.powi(-10)).abs() < 1e-18);
        assert_eq!(dlhl_closeness(2, 0.0, 0.0), 0.0);
        let ok = SubsetEntropy { entropy: 12.0, key_lengths: vec![8.0, 2.0] };
        assert!(dlhl_condition(&[ok], 0.5));
        let short = SubsetEntropy { entropy: 11.0, key_lengths: vec![8.0, 2.0] };
        assert!(!dlhl_condition(&[short], 0.5));
        assert_eq!(chain_bound(10.0, 0.0, 4.0, 0.25), 4.0);
        assert_eq!(chain_bound(3.5, 0.0, 0.0, 1.0), 3.5);
    }

    #[test]
    fn json_round_trip() {
        let d = FiniteDistribution::new(vec!["a".to_string(), "b".to_string()], vec![0.25, 0.75]).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(text, r#"{"outcomes":["a","b"],"probs":[0.25,0.75]}"#);
        let back: FiniteDistribution<String> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        let exact = FiniteDistribution::<u8, Rational>::uniform(vec![0, 1, 2]).unwrap();
        let text = serde_json::to_string(&exact).unwrap();
        assert!(text.contains("\"1/3\""));
        let back: FiniteDistribution<u8, Rational> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, exact);
    }
}
