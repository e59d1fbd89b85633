//! Exact small-instance oracle.
//!
//! The protocol code draws all randomness through [`RandomSource`]. The
//! [`Enumerator`] implements that trait by replaying a path of branch
//! indices: the first run takes branch 0 everywhere, then the path is
//! advanced like an odometer until every branch has been visited. Each leaf
//! carries the exact product of its branch weights, so any feature of the
//! resulting [`Run`] gets an exact rational law.
//!
//! A [`Scope`] says which draws are enumerated. Draws outside it take a
//! fixed value with weight one (bit 0, first subset, no erasure unless
//! `p = 1`), which is how large but irrelevant components such as unused
//! hash matrices are kept out of the state count. [`ScopedSource`] applies
//! the same fixing to a seeded generator so Monte Carlo runs sample the law
//! the enumerator computes.

use std::collections::HashMap;
use std::hash::Hash;

use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::campaign::drive;
use crate::channel::{BitVector, IndexSet, ObservationVector, Receiver};
use crate::entropy::{dlhl_closeness, FiniteDistribution, JointDistribution};
use crate::hashing::{LinearHash, EXACT_FAMILY_GUARD};
use crate::protocol::{collusion_mask_accounting, Plan, Run, Variant, Visibility, VisibilityModel};
use crate::randomness::{Draw, Phase, RandomSource, StreamedSource};
use crate::scalar::{abs_diff, rational_from_f64, Arithmetic, Probability, Rational};
use crate::stats::dkw_band;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("enumeration budget exceeded: {reason} (estimated {estimate:.3e} states)")]
    Budget { reason: String, estimate: f64 },
    #[error("invalid oracle instance: {0}")]
    Instance(String),
    #[error("at least one Monte Carlo trial is required")]
    NoTrials,
}

/// Which draws are enumerated.
#[derive(Clone, Copy)]
pub struct Scope {
    pub name: &'static str,
    filter: fn(&Draw) -> bool,
}

impl std::fmt::Debug for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Scope({})", self.name)
    }
}

impl Serialize for Scope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name)
    }
}

impl Scope {
    pub const ALL: Scope = Scope { name: "all", filter: |_| true };

    pub const fn new(name: &'static str, filter: fn(&Draw) -> bool) -> Scope {
        Scope { name, filter }
    }

    pub fn includes(&self, tag: &Draw) -> bool {
        (self.filter)(tag)
    }
}

/// Channel and receiver randomness plus choices; messages and hashes fixed.
pub const SETS_SCOPE: Scope = Scope::new("input+erasures+subsets+choices", |d| {
    matches!(d, Draw::Input | Draw::Erasure { .. } | Draw::Subset { .. } | Draw::Choice { .. })
});

/// Everything that can reach the pooled view of link 1 in Protocol 1.
pub const LINK1_SCOPE: Scope = Scope::new("link-1", |d| match d {
    Draw::Input | Draw::Erasure { .. } => true,
    Draw::Subset { receiver, .. } | Draw::Choice { receiver } => *receiver == Receiver::One,
    Draw::Message { link, .. } | Draw::Hash { link, .. } => *link == Receiver::One,
    _ => false,
});

/// Erasures, subsets and the phase-one choice; `X` fixed.
pub const PATTERN_SCOPE: Scope = Scope::new("erasures+subsets", |d| {
    matches!(d, Draw::Erasure { .. } | Draw::Subset { .. } | Draw::Choice { receiver: Receiver::One })
});

fn fixed_bernoulli(p: f64) -> bool {
    p >= 1.0
}

/// A tiny protocol instance with exact erasure probabilities.
#[derive(Debug, Clone, Serialize)]
pub struct Instance {
    pub plan: Plan,
    #[serde(serialize_with = "ser_rationals")]
    pub p: [Rational; 2],
    pub visibility: VisibilityModel,
    pub scope: Scope,
}

fn ser_rationals<S: Serializer>(p: &[Rational; 2], s: S) -> Result<S::Ok, S::Error> {
    [p[0].render(), p[1].render()].serialize(s)
}

fn ser_rational<S: Serializer>(p: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.render())
}

impl Instance {
    /// Protocol 1 with equal sizes on both links.
    pub fn protocol1(n: usize, p: [Rational; 2], set_size: usize, key_len: usize, verify_len: usize, scope: Scope) -> Self {
        let plan = Plan {
            variant: Variant::Noncolluding,
            n,
            p: [p[0].as_f64(), p[1].as_f64()],
            set_size: [set_size; 2],
            key_len: [key_len; 2],
            verify_len: [verify_len; 2],
            s_prime: 0,
            order: Receiver::One,
        };
        Instance { plan, p, visibility: VisibilityModel::broadcast(), scope }
    }

    /// Protocol 2 with Bob-1 first.
    #[allow(clippy::too_many_arguments)]
    pub fn protocol2(
        n: usize,
        p: [Rational; 2],
        set_size: [usize; 2],
        key_len: usize,
        verify_len: usize,
        s_prime: usize,
        visibility: VisibilityModel,
        scope: Scope,
    ) -> Self {
        let plan = Plan {
            variant: Variant::Colluding,
            n,
            p: [p[0].as_f64(), p[1].as_f64()],
            set_size,
            key_len: [key_len; 2],
            verify_len: [verify_len; 2],
            s_prime,
            order: Receiver::One,
        };
        Instance { plan, p, visibility, scope }
    }

    fn check(&self) -> Result<(), OracleError> {
        let plan = &self.plan;
        for q in &self.p {
            if *q < Rational::zero() || *q > Rational::one() {
                return Err(OracleError::Instance(format!("erasure probability {} outside [0,1]", q.render())));
            }
        }
        for i in 0..2 {
            if plan.key_len[i] + plan.verify_len[i] > plan.set_size[i] {
                return Err(OracleError::Instance("key plus verification length exceeds the set size".into()));
            }
        }
        if plan.variant == Variant::Colluding && plan.s_prime > plan.n {
            return Err(OracleError::Instance("|S'| exceeds n".into()));
        }
        Ok(())
    }
}

/// Hard limits checked before enumeration starts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnumerationBudget {
    pub max_n: usize,
    pub max_set_size: usize,
    pub max_hash_input: usize,
    pub max_hash_output: usize,
    pub max_states: f64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_n: 8, max_set_size: 2, max_hash_input: 4, max_hash_output: 2, max_states: 1e9 }
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Upper bound on the number of leaves the enumeration visits.
pub fn estimate_states(inst: &Instance) -> f64 {
    let plan = &inst.plan;
    let scope = &inst.scope;
    let pow2 = |bits: usize| 2f64.powi(bits as i32);
    let mut states = 1.0;
    if scope.includes(&Draw::Input) {
        states *= pow2(plan.n);
    }
    for i in Receiver::BOTH {
        let set = plan.set_size[i.index()];
        let first = plan.variant == Variant::Noncolluding || i == plan.order;
        let observes1 = first || inst.visibility.phase1 == Visibility::BroadcastBoth;
        let observes2 =
            plan.variant == Variant::Colluding && (!first || inst.visibility.phase2 == Visibility::BroadcastBoth);
        if observes1 && scope.includes(&Draw::Erasure { receiver: i, phase: Phase::One }) {
            states *= pow2(plan.n);
        }
        if observes2 && scope.includes(&Draw::Erasure { receiver: i, phase: Phase::Two }) {
            states *= pow2(plan.s_prime);
        }
        let phase = if first { Phase::One } else { Phase::Two };
        if scope.includes(&Draw::Subset { receiver: i, phase }) {
            let pool = if first { plan.n } else { plan.s_prime };
            states *= (binomial(pool, set) as f64).powi(2);
            if first && plan.variant == Variant::Colluding {
                states *= binomial(plan.n, plan.s_prime) as f64;
            }
        }
        for label in 0..2u8 {
            for verification in [false, true] {
                if scope.includes(&Draw::Hash { link: i, label, verification }) {
                    let rows = if verification { plan.verify_len[i.index()] } else { plan.key_len[i.index()] };
                    states *= pow2(rows * set);
                }
            }
            if scope.includes(&Draw::Message { link: i, label }) {
                states *= pow2(plan.key_len[i.index()]);
            }
        }
        if scope.includes(&Draw::Choice { receiver: i }) {
            states *= 2.0;
        }
    }
    states
}

impl EnumerationBudget {
    /// Checks every limit; returns the state estimate.
    pub fn check(&self, inst: &Instance) -> Result<f64, OracleError> {
        let plan = &inst.plan;
        let estimate = estimate_states(inst);
        let fail = |reason: String| Err(OracleError::Budget { reason, estimate });
        if plan.n > self.max_n {
            return fail(format!("n = {} exceeds {}", plan.n, self.max_n));
        }
        let largest_set = plan.set_size.iter().copied().max().unwrap_or(0);
        if largest_set > self.max_set_size {
            return fail(format!("set size {largest_set} exceeds {}", self.max_set_size));
        }
        if largest_set > self.max_hash_input {
            return fail(format!("hash input {largest_set} exceeds {}", self.max_hash_input));
        }
        let output = plan.key_len.iter().chain(&plan.verify_len).copied().max().unwrap_or(0);
        if output > self.max_hash_output {
            return fail(format!("hash output {output} exceeds {}", self.max_hash_output));
        }
        if estimate > self.max_states {
            return fail(format!("state estimate exceeds {:e}", self.max_states));
        }
        Ok(estimate)
    }
}

/// `index`-th `size`-subset of `0..pool` in lexicographic order.
fn unrank_combination(pool: usize, size: usize, mut index: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(size);
    let mut next = 0;
    for slot in 0..size {
        loop {
            let rest = binomial(pool - next - 1, size - slot - 1);
            if index < rest {
                out.push(next);
                next += 1;
                break;
            }
            index -= rest;
            next += 1;
        }
    }
    out
}

/// Replay source for the depth-first walk over all branches.
pub struct Enumerator<'a> {
    scope: Scope,
    p: &'a [Rational; 2],
    path: Vec<u64>,
    arity: Vec<u64>,
    pos: usize,
    weight: Rational,
}

impl<'a> Enumerator<'a> {
    fn new(scope: Scope, p: &'a [Rational; 2]) -> Self {
        Enumerator { scope, p, path: Vec::new(), arity: Vec::new(), pos: 0, weight: Rational::one() }
    }

    fn branch(&mut self, arity: u64) -> u64 {
        let pos = self.pos;
        self.pos += 1;
        if pos < self.path.len() {
            debug_assert_eq!(self.arity[pos], arity, "replay diverged");
            self.path[pos]
        } else {
            self.path.push(0);
            self.arity.push(arity);
            0
        }
    }

    fn restart(&mut self) {
        self.pos = 0;
        self.weight = Rational::one();
    }

    /// Moves to the next leaf, never touching positions below `floor`.
    fn advance(&mut self, floor: usize) -> bool {
        self.path.truncate(self.pos);
        self.arity.truncate(self.pos);
        while let Some(last) = self.path.len().checked_sub(1) {
            if last < floor {
                return false;
            }
            if self.path[last] + 1 < self.arity[last] {
                self.path[last] += 1;
                return true;
            }
            self.path.pop();
            self.arity.pop();
        }
        false
    }

    fn exact_p(&self, tag: Draw, p: f64) -> Rational {
        match tag {
            Draw::Erasure { receiver, .. } => self.p[receiver.index()].clone(),
            _ => rational_from_f64(p).expect("finite probability"),
        }
    }
}

impl RandomSource for Enumerator<'_> {
    fn bernoulli(&mut self, tag: Draw, p: f64) -> bool {
        if !self.scope.includes(&tag) {
            return fixed_bernoulli(p);
        }
        let q = self.exact_p(tag, p);
        if q.is_zero() {
            return false;
        }
        if q.is_one() {
            return true;
        }
        if self.branch(2) == 1 {
            self.weight *= q;
            true
        } else {
            self.weight *= Rational::one() - q;
            false
        }
    }

    fn uniform(&mut self, tag: Draw, n: usize) -> usize {
        if !self.scope.includes(&tag) || n == 1 {
            return 0;
        }
        let c = self.branch(n as u64);
        self.weight /= Rational::from_integer((n as u64).into());
        c as usize
    }

    fn subset(&mut self, tag: Draw, pool: usize, size: usize) -> Vec<usize> {
        assert!(size <= pool, "subset larger than pool");
        if !self.scope.includes(&tag) {
            return (0..size).collect();
        }
        let total = binomial(pool, size);
        if total == 1 {
            return (0..size).collect();
        }
        let c = self.branch(total);
        self.weight /= Rational::from_integer(total.into());
        unrank_combination(pool, size, c)
    }
}

/// Seeded source that fixes out-of-scope draws exactly as the enumerator
/// does.
pub struct ScopedSource<S> {
    pub inner: S,
    pub scope: Scope,
}

impl<S: RandomSource> RandomSource for ScopedSource<S> {
    fn bernoulli(&mut self, tag: Draw, p: f64) -> bool {
        if self.scope.includes(&tag) {
            self.inner.bernoulli(tag, p)
        } else {
            fixed_bernoulli(p)
        }
    }

    fn uniform(&mut self, tag: Draw, n: usize) -> usize {
        if self.scope.includes(&tag) {
            self.inner.uniform(tag, n)
        } else {
            0
        }
    }

    fn subset(&mut self, tag: Draw, pool: usize, size: usize) -> Vec<usize> {
        if self.scope.includes(&tag) {
            self.inner.subset(tag, pool, size)
        } else {
            (0..size).collect()
        }
    }

    fn bits(&mut self, tag: Draw, len: usize) -> Vec<bool> {
        if self.scope.includes(&tag) {
            self.inner.bits(tag, len)
        } else {
            vec![false; len]
        }
    }
}

/// Exact law of a (secret, view) feature pair.
#[derive(Debug, Clone)]
pub struct ExactJoint<S, V> {
    pub joint: JointDistribution<S, V, Rational>,
    /// Mass of runs in which at least one receiver aborted.
    pub abort_mass: Rational,
    pub leaves: u64,
    pub estimated_states: f64,
    pub arithmetic: Arithmetic,
}

impl<S, V> Serialize for ExactJoint<S, V>
where
    S: Clone + Eq + Hash + Serialize,
    V: Clone + Eq + Hash + Serialize,
{
    fn serialize<Z: Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
        #[derive(Serialize)]
        struct Out<'a, D: Serialize> {
            joint: &'a D,
            abort_mass: String,
            leaves: u64,
            estimated_states: f64,
            arithmetic: Arithmetic,
        }
        Out {
            joint: self.joint.joint(),
            abort_mass: self.abort_mass.render(),
            leaves: self.leaves,
            estimated_states: self.estimated_states,
            arithmetic: self.arithmetic,
        }
        .serialize(s)
    }
}

impl<S: Clone + Eq + Hash, V: Clone + Eq + Hash> ExactJoint<S, V> {
    /// Law of `(f(secret), g(view))`.
    pub fn project<S2, V2>(&self, f: impl Fn(&S) -> S2, g: impl Fn(&V) -> V2) -> JointDistribution<S2, V2, Rational>
    where
        S2: Clone + Eq + Hash,
        V2: Clone + Eq + Hash,
    {
        JointDistribution::new(self.joint.joint().map(|(s, v)| (f(s), g(v))))
    }
}

/// Insertion-ordered accumulator, so outputs do not depend on hash seeds.
struct Ordered<K> {
    index: HashMap<K, usize>,
    items: Vec<(K, Rational)>,
}

impl<K: Clone + Eq + Hash> Ordered<K> {
    fn new() -> Self {
        Self { index: HashMap::new(), items: Vec::new() }
    }

    fn add(&mut self, k: K, w: Rational) {
        match self.index.get(&k) {
            Some(&i) => self.items[i].1 += w,
            None => {
                self.index.insert(k.clone(), self.items.len());
                self.items.push((k, w));
            }
        }
    }
}

type Tally<S, V> = (Ordered<(S, V)>, Rational, u64);

fn walk<S, V, F>(inst: &Instance, prefix: Option<u64>, first_arity: u64, feature: &F) -> Tally<S, V>
where
    S: Clone + Eq + Hash,
    V: Clone + Eq + Hash,
    F: Fn(&Run) -> (S, V),
{
    let mut en = Enumerator::new(inst.scope, &inst.p);
    let floor = match prefix {
        Some(v) => {
            en.path.push(v);
            en.arity.push(first_arity);
            1
        }
        None => 0,
    };
    let mut tally = Ordered::new();
    let mut aborted = Rational::zero();
    let mut leaves = 0;
    loop {
        en.restart();
        let run = drive(&inst.plan, inst.visibility, &mut en);
        let w = en.weight.clone();
        if Receiver::BOTH.iter().any(|&i| run.outcome(i).is_aborted()) {
            aborted += w.clone();
        }
        tally.add(feature(&run), w);
        leaves += 1;
        if !en.advance(floor) {
            break;
        }
    }
    (tally, aborted, leaves)
}

/// Enumerates every realization of `inst` and returns the exact law of
/// `feature(run)`.
pub fn enumerate<S, V, F>(
    inst: &Instance,
    budget: &EnumerationBudget,
    feature: F,
) -> Result<ExactJoint<S, V>, OracleError>
where
    S: Clone + Eq + Hash + Send,
    V: Clone + Eq + Hash + Send,
    F: Fn(&Run) -> (S, V) + Sync,
{
    inst.check()?;
    let estimated_states = budget.check(inst)?;

    // Probe the first draw and split the walk on it.
    let mut probe = Enumerator::new(inst.scope, &inst.p);
    drive(&inst.plan, inst.visibility, &mut probe);
    let parts: Vec<Tally<S, V>> = match probe.arity.first() {
        None => vec![walk(inst, None, 0, &feature)],
        Some(&a) => (0..a).into_par_iter().map(|v| walk(inst, Some(v), a, &feature)).collect(),
    };

    let mut merged = Ordered::new();
    let mut abort_mass = Rational::zero();
    let mut leaves = 0;
    for (tally, aborted, count) in parts {
        for (k, w) in tally.items {
            merged.add(k, w);
        }
        abort_mass += aborted;
        leaves += count;
    }
    let (outcomes, probs): (Vec<_>, Vec<_>) = merged.items.into_iter().unzip();
    let total: Rational = probs.iter().cloned().fold(Rational::zero(), |a, b| a + b);
    if !total.is_one() {
        return Err(OracleError::Instance(format!("enumerated mass {} is not 1", total.render())));
    }
    let joint = FiniteDistribution::new(outcomes, probs).map_err(|e| OracleError::Instance(e.to_string()))?;
    Ok(ExactJoint {
        joint: JointDistribution::new(joint),
        abort_mass,
        leaves,
        estimated_states,
        arithmetic: Arithmetic::Rational,
    })
}

/// Mutual information of an exact joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactMi {
    pub bits: f64,
    /// The joint factors exactly (checked in rational arithmetic).
    pub exact_zero: bool,
}

pub fn exact_mi<S: Clone + Eq + Hash, V: Clone + Eq + Hash>(j: &JointDistribution<S, V, Rational>) -> ExactMi {
    if j.is_product() {
        ExactMi { bits: 0.0, exact_zero: true }
    } else {
        ExactMi { bits: j.mutual_information(), exact_zero: false }
    }
}

/// Bitmask of an index set.
pub fn set_code(s: &IndexSet) -> u32 {
    s.indices().iter().fold(0, |acc, &i| acc | 1 << i)
}

/// Base-3 code of an observation (0, 1, erased = 2).
pub fn observation_code(y: &ObservationVector) -> u32 {
    y.symbols().iter().rev().fold(0, |acc, s| acc * 3 + s.bit().map_or(2, |b| b as u32))
}

pub fn bits_code(v: &BitVector) -> u32 {
    v.bits().iter().enumerate().fold(0, |acc, (i, &b)| acc | (b as u32) << i)
}

/// Row-major matrix bits of a hash.
pub fn hash_code(h: &LinearHash) -> u32 {
    let m = h.matrix();
    let mut code = 0;
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            code |= (m.get(r, c) as u32) << (r * m.cols() + c);
        }
    }
    code
}

fn link_sets(run: &Run, i: Receiver) -> (u32, u32) {
    run.link(i).map_or((0, 0), |l| (set_code(&l.key_sets[0]), set_code(&l.key_sets[1])))
}

/// Choice secrecy on a Protocol 1 instance.
#[derive(Debug, Clone, Serialize)]
pub struct ChoiceSecrecy {
    pub instance: Instance,
    /// `I(Z1; S10, S11)`.
    pub z1_vs_sets: ExactMi,
    /// `I(Z1, Z2; X, S10, S11, S20, S21)`.
    pub choices_vs_alice: ExactMi,
    #[serde(serialize_with = "ser_rational")]
    pub abort_mass: Rational,
    pub leaves: u64,
}

/// Exact choice secrecy toward Alice: hashes and messages are fixed because
/// they are drawn independently of the choices.
pub fn choice_secrecy(
    n: usize,
    p: [Rational; 2],
    set_size: usize,
    budget: &EnumerationBudget,
) -> Result<ChoiceSecrecy, OracleError> {
    let inst = Instance::protocol1(n, p, set_size, set_size.min(1), 0, SETS_SCOPE);
    let j = enumerate(&inst, budget, |run| {
        let z = (run.choices.0[0], run.choices.0[1]);
        let view = (bits_code(&run.alice.x), link_sets(run, Receiver::One), link_sets(run, Receiver::Two));
        (z, view)
    })?;
    Ok(ChoiceSecrecy {
        z1_vs_sets: exact_mi(&j.project(|z| z.0, |v| v.1)),
        choices_vs_alice: exact_mi(&j.joint),
        abort_mass: j.abort_mass.clone(),
        leaves: j.leaves,
        instance: inst,
    })
}

type PooledView = (bool, u32, u32, (u32, u32), [u32; 2], [u32; 2]);

/// Pooled receiver view of link 1: Bob-1's choice, both observations, the
/// published sets, `kappa` matrices and ciphertexts.
fn pooled_link1_view(run: &Run, include_bob2: bool) -> PooledView {
    let y = |i: Receiver| run.bob(i).observation.as_ref().map_or(0, observation_code);
    let (kappa, cipher) = run.link(Receiver::One).map_or(([0, 0], [0, 0]), |l| {
        ([hash_code(&l.hashes.kappa[0]), hash_code(&l.hashes.kappa[1])], [bits_code(&l.ciphertexts[0]), bits_code(&l.ciphertexts[1])])
    });
    let y2 = if include_bob2 { y(Receiver::Two) } else { 0 };
    (run.choices.0[0], y(Receiver::One), y2, link_sets(run, Receiver::One), kappa, cipher)
}

fn unchosen_link1(run: &Run) -> u32 {
    bits_code(run.alice.messages.get(Receiver::One, !run.choices.0[0] as usize))
}

/// Leakage of `m_{1 z̄}` on a Protocol 1 instance.
#[derive(Debug, Clone, Serialize)]
pub struct MessageLeak {
    pub instance: Instance,
    pub attacker: String,
    pub mi: ExactMi,
    /// DLHL closeness bound for the instance's sizes (key material of
    /// `set_size` uniform bits hidden from the attacker).
    pub dlhl_bound: f64,
    pub leaves: u64,
}

fn dlhl_for(entropy: f64, key_len: usize) -> f64 {
    // ε from the entropy condition H ≥ k + 2 log2(1/ε), capped at 1.
    let eps = 2f64.powf(-(entropy - key_len as f64) / 2.0).min(1.0);
    dlhl_closeness(1, eps, 0.0).min(1.0)
}

/// `I(M_{1z̄}; V1, V2)` (pooled) or `I(M_{1z̄}; V1)` on a Protocol 1 instance.
pub fn message_leak(
    n: usize,
    p: [Rational; 2],
    pooled: bool,
    budget: &EnumerationBudget,
) -> Result<MessageLeak, OracleError> {
    let inst = Instance::protocol1(n, p, 1, 1, 0, LINK1_SCOPE);
    let j = enumerate(&inst, budget, |run| (unchosen_link1(run), pooled_link1_view(run, pooled)))?;
    Ok(MessageLeak {
        attacker: if pooled { "pooled-receivers".into() } else { "single-receiver(1)".into() },
        mi: exact_mi(&j.joint),
        dlhl_bound: dlhl_for(1.0, 1),
        leaves: j.leaves,
        instance: inst,
    })
}

/// Phase-one knowledge of `X|S'` on a Protocol 2 instance.
#[derive(Debug, Clone, Serialize)]
pub struct SPrimeKnowledge {
    pub instance: Instance,
    /// Exact law of the number of `S'` positions the phase-one receiver saw
    /// non-erased in phase one, over runs that reached `S'`.
    pub known_positions: FiniteDistribution<usize, Rational>,
    pub always_zero: bool,
    #[serde(serialize_with = "ser_rational")]
    pub reached_mass: Rational,
    pub leaves: u64,
}

pub fn s_prime_knowledge(
    n: usize,
    p: [Rational; 2],
    s_prime: usize,
    visibility: VisibilityModel,
    budget: &EnumerationBudget,
) -> Result<SPrimeKnowledge, OracleError> {
    let inst = Instance::protocol2(n, p, [1, 1], 1, 0, s_prime, visibility, PATTERN_SCOPE);
    let j = enumerate(&inst, budget, |run| ((), collusion_mask_accounting(run).s_prime_known_in_phase1))?;
    let reached: Vec<(usize, Rational)> =
        j.joint.joint().iter().filter_map(|(((), k), w)| k.map(|k| (k, w.clone()))).collect();
    let reached_mass = reached.iter().fold(Rational::zero(), |a, (_, w)| a + w.clone());
    if reached_mass.is_zero() {
        return Err(OracleError::Instance("phase one never reaches S'".into()));
    }
    let known_positions = FiniteDistribution::from_weights(reached.into_iter().map(|(k, w)| (k, w / reached_mass.clone())))
        .map_err(|e| OracleError::Instance(e.to_string()))?;
    Ok(SPrimeKnowledge {
        always_zero: known_positions.prob(&0).is_one(),
        known_positions,
        reached_mass,
        leaves: j.leaves,
        instance: inst,
    })
}

/// Exact distance of `(κ(X), κ, Y)` from `(U, κ, Y)` for a uniformly random
/// linear `κ: {0,1}^m → {0,1}^k`, where `source` is the law of `(X, Y)` with
/// `X` given as an `m`-bit integer.
pub fn extraction_distance<Y: Clone + Eq + Hash>(
    source: &JointDistribution<u64, Y, Rational>,
    m: usize,
    k: usize,
) -> Result<Rational, OracleError> {
    if m * k > EXACT_FAMILY_GUARD {
        return Err(OracleError::Budget { reason: format!("{m}x{k} family too large"), estimate: 2f64.powi((m * k) as i32) });
    }
    let py = source.marginal_y();
    let uniform_share = Rational::new(1.into(), (1u64 << k).into());
    let family = 1u64 << (m * k);
    let mut total = Rational::zero();
    for index in 0..family {
        let kappa = LinearHash::from_index(m, k, index);
        let mut law: HashMap<(u64, &Y), Rational> = HashMap::new();
        for ((x, y), w) in source.joint().iter() {
            let z = kappa.apply(&BitVector::from_u64(*x, m)).expect("m-bit input").to_u64();
            *law.entry((z, y)).or_insert_with(Rational::zero) += w.clone();
        }
        for (y, wy) in py.iter() {
            let target = wy.clone() * uniform_share.clone();
            for z in 0..(1u64 << k) {
                let got = law.get(&(z, y)).cloned().unwrap_or_else(Rational::zero);
                total += abs_diff(&got, &target);
            }
        }
    }
    Ok(total / Rational::from_integer((2 * family).into()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionCheck {
    #[serde(serialize_with = "ser_rational")]
    pub distance: Rational,
    pub distance_f64: f64,
    pub min_entropy: f64,
    pub key_len: usize,
    pub bound: f64,
    pub within_bound: bool,
}

/// Compares the exact extraction distance with the DLHL bound at the `ε`
/// the entropy condition allows.
pub fn extraction_check<Y: Clone + Eq + Hash>(
    source: &JointDistribution<u64, Y, Rational>,
    m: usize,
    k: usize,
) -> Result<ExtractionCheck, OracleError> {
    let distance = extraction_distance(source, m, k)?;
    let min_entropy = source.cond_min_entropy();
    let bound = dlhl_for(min_entropy, k);
    let distance_f64 = distance.to_f64().unwrap_or(f64::NAN);
    Ok(ExtractionCheck { within_bound: distance_f64 <= bound + 1e-12, distance, distance_f64, min_entropy, key_len: k, bound })
}

#[derive(Debug, Clone, Serialize)]
pub struct McComparison {
    pub trials: u64,
    pub max_deviation: f64,
    /// DKW half-width at `alpha`.
    pub band: f64,
    pub alpha: f64,
    pub within_band: bool,
    pub outcomes: usize,
}

/// Largest gap between the exact law of `feature` and its empirical
/// frequencies over `trials` seeded runs of the same instance.
pub fn oracle_vs_montecarlo<S, V, F>(
    inst: &Instance,
    budget: &EnumerationBudget,
    trials: u64,
    seed: u64,
    feature: F,
) -> Result<McComparison, OracleError>
where
    S: Clone + Eq + Hash + Send,
    V: Clone + Eq + Hash + Send,
    F: Fn(&Run) -> (S, V) + Sync,
{
    if trials == 0 {
        return Err(OracleError::NoTrials);
    }
    let exact = enumerate(inst, budget, &feature)?;
    let samples: Vec<(S, V)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut src = ScopedSource { inner: StreamedSource::for_trial(seed, t), scope: inst.scope };
            feature(&drive(&inst.plan, inst.visibility, &mut src))
        })
        .collect();
    let mut counts: HashMap<(S, V), u64> = HashMap::new();
    for s in samples {
        *counts.entry(s).or_default() += 1;
    }
    let mut max_deviation: f64 = 0.0;
    for (o, p) in exact.joint.joint().iter() {
        let freq = counts.remove(o).unwrap_or(0) as f64 / trials as f64;
        max_deviation = max_deviation.max((freq - p.as_f64()).abs());
    }
    // Outcomes the enumeration gives zero mass.
    for c in counts.values() {
        max_deviation = max_deviation.max(*c as f64 / trials as f64);
    }
    let alpha = 0.01;
    let band = dkw_band(trials, alpha);
    Ok(McComparison {
        trials,
        max_deviation,
        band,
        alpha,
        within_band: max_deviation <= band,
        outcomes: exact.joint.joint().support_size(),
    })
}

/// Feature of the oracle-vs-Monte-Carlo check: Bob-1's choice against the
/// sets he publishes.
pub fn sets_feature(run: &Run) -> (bool, (u32, u32)) {
    (run.choices.0[0], link_sets(run, Receiver::One))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> [Rational; 2] {
        let h = Rational::new(1.into(), 2.into());
        [h.clone(), h]
    }

    #[test]
    fn unranking_covers_all_combinations() {
        let all: Vec<_> = (0..binomial(5, 2)).map(|i| unrank_combination(5, 2, i)).collect();
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 1]);
        assert_eq!(all[9], vec![3, 4]);
        let mut sorted = all.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
    }

    #[test]
    fn mass_is_conserved_including_aborts() {
        let inst = Instance::protocol1(3, half(), 1, 1, 0, SETS_SCOPE);
        let j = enumerate(&inst, &EnumerationBudget::default(), sets_feature).unwrap();
        assert!(j.joint.joint().total_mass().is_one());
        // Bob-1 aborts iff y1 has no erasure or no clean position: 2/8.
        assert!(j.abort_mass > Rational::zero() && j.abort_mass < Rational::one());
    }

    #[test]
    fn choice_is_exactly_hidden_from_alice() {
        let r = choice_secrecy(4, half(), 1, &EnumerationBudget::default()).unwrap();
        assert!(r.z1_vs_sets.exact_zero);
        assert!(r.choices_vs_alice.bits <= 1e-12);
    }

    #[test]
    fn pooled_view_leaks_unchosen_message() {
        let budget = EnumerationBudget::default();
        let pooled = message_leak(3, half(), true, &budget).unwrap();
        assert!(!pooled.mi.exact_zero && pooled.mi.bits > 0.0);
        // Regression value of the n = 3, p = 1/2 instance.
        assert!((pooled.mi.bits - 0.5625).abs() < 1e-12, "{}", pooled.mi.bits);
        let single = message_leak(3, half(), false, &budget).unwrap();
        assert!(single.mi.bits < pooled.mi.bits);
        assert!(single.mi.bits <= single.dlhl_bound);
    }

    #[test]
    fn coarser_features_never_show_more_information() {
        let inst = Instance::protocol1(3, half(), 1, 1, 0, LINK1_SCOPE);
        let j = enumerate(&inst, &EnumerationBudget::default(), |run| (unchosen_link1(run), pooled_link1_view(run, true)))
            .unwrap();
        let full = exact_mi(&j.joint).bits;
        let coarse = exact_mi(&j.project(|s| *s, |v| (v.0, v.5))).bits;
        let none = exact_mi(&j.project(|s| *s, |_| ())).bits;
        assert!(none <= coarse + 1e-12 && coarse <= full + 1e-12);
    }

    #[test]
    fn exchange_symmetry() {
        // Swapping link 1's message labels and flipping z1 leaves the law
        // invariant.
        let inst = Instance::protocol1(3, half(), 1, 1, 0, LINK1_SCOPE);
        let feature = |run: &Run| {
            let m = &run.alice.messages;
            let s = (run.choices.0[0], bits_code(m.get(Receiver::One, 0)), bits_code(m.get(Receiver::One, 1)));
            (s, pooled_link1_view(run, true))
        };
        let j = enumerate(&inst, &EnumerationBudget::default(), feature).unwrap();
        let swapped = j.joint.joint().map(|((z, m0, m1), v)| {
            let (_, y1, y2, sets, kappa, c) = *v;
            ((!z, *m1, *m0), (!v.0, y1, y2, (sets.1, sets.0), [kappa[1], kappa[0]], [c[1], c[0]]))
        });
        for (o, p) in j.joint.joint().iter() {
            assert_eq!(&swapped.prob(o), p);
        }
    }

    #[test]
    fn s_prime_is_unseen_in_phase_one() {
        let q = Rational::new(3.into(), 4.into());
        let r = s_prime_knowledge(5, [q.clone(), q], 1, VisibilityModel::default(), &EnumerationBudget::default())
            .unwrap();
        assert!(r.always_zero);
    }

    #[test]
    fn extraction_within_dlhl_bound() {
        let x = FiniteDistribution::uniform((0..4u64).collect()).unwrap();
        let src = JointDistribution::product(&x, &FiniteDistribution::point(()));
        let c = extraction_check(&src, 2, 1).unwrap();
        assert_eq!(c.distance, Rational::new(1.into(), 8.into()));
        assert!(c.within_bound);
        assert!((c.bound - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn budget_rejects_large_instances() {
        let inst = Instance::protocol1(9, half(), 1, 1, 0, SETS_SCOPE);
        assert!(matches!(EnumerationBudget::default().check(&inst), Err(OracleError::Budget { .. })));
        let inst = Instance::protocol1(8, half(), 2, 2, 0, Scope::ALL);
        assert!(matches!(EnumerationBudget::default().check(&inst), Err(OracleError::Budget { .. })));
    }

    #[test]
    fn montecarlo_agrees_with_enumeration() {
        let inst = Instance::protocol1(4, half(), 1, 1, 0, SETS_SCOPE);
        let budget = EnumerationBudget::default();
        let cmp = oracle_vs_montecarlo(&inst, &budget, 20_000, 3, sets_feature).unwrap();
        assert!(cmp.within_band, "{cmp:?}");
        assert_eq!(oracle_vs_montecarlo(&inst, &budget, 0, 3, sets_feature).unwrap_err(), OracleError::NoTrials);

        let zero = [Rational::zero(), Rational::zero()];
        let inst = Instance::protocol1(4, zero, 1, 1, 0, SETS_SCOPE);
        let cmp = oracle_vs_montecarlo(&inst, &budget, 500, 3, |r| ((), link_sets(r, Receiver::One))).unwrap();
        assert_eq!(cmp.max_deviation, 0.0);
    }
}
