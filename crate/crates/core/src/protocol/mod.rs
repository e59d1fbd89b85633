//! Shared protocol substrate: parameters and their derived sizes, the public
//! transcript, party views, outcomes, label-indexed subset selection,
//! encryption and decoding.

pub mod colluding;
pub mod noncolluding;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{erasure_count, BitVector, ChannelError, IndexSet, ObservationVector, Receiver, Restrict};
use crate::hashing::{HashError, LinearHash};
use crate::randomness::{Draw, RandomSource};

pub use colluding::{
    collusion_mask_accounting, execute_protocol2, run_protocol2, LinkMask, MaskAccounting, Visibility,
    VisibilityModel,
};
pub use noncolluding::{abort_probability, execute_protocol1, run_protocol1, AbortEstimate};

/// Slack used when testing real-valued sizes for integrality.
const INTEGRALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Protocol 1: one broadcast, both links in parallel.
    Noncolluding,
    /// Protocol 2: two sequential phases with leftover-erasure recycling.
    Colluding,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Noncolluding => "noncolluding",
            Variant::Colluding => "colluding",
        })
    }
}

/// How the key length `n (r_i - λ')` is turned into an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyLengthRule {
    /// Reject unless `n (r_i - λ')` is a positive integer.
    #[default]
    Exact,
    /// Round down; reject only if the result is zero.
    Floor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n: usize,
    pub p1: f64,
    pub p2: f64,
    pub r1: f64,
    pub r2: f64,
    pub lambda: f64,
    pub lambda_prime: f64,
    /// Verification-hash rates; digests have `floor(s_i n)` bits.
    pub s1: f64,
    pub s2: f64,
    pub variant: Variant,
    /// Phase-one receiver (colluding variant only).
    pub order: Receiver,
    #[serde(default)]
    pub key_rule: KeyLengthRule,
}

impl ProtocolParams {
    /// Symmetric parameters with the default verification rate `λ'/2`.
    pub fn symmetric(variant: Variant, n: usize, p: f64, r: f64, lambda: f64, lambda_prime: f64) -> Self {
        Self {
            n,
            p1: p,
            p2: p,
            r1: r,
            r2: r,
            lambda,
            lambda_prime,
            s1: lambda_prime / 2.0,
            s2: lambda_prime / 2.0,
            variant,
            order: Receiver::One,
            key_rule: KeyLengthRule::Exact,
        }
    }

    pub fn with_key_rule(mut self, rule: KeyLengthRule) -> Self {
        self.key_rule = rule;
        self
    }

    pub fn p(&self, i: Receiver) -> f64 {
        match i {
            Receiver::One => self.p1,
            Receiver::Two => self.p2,
        }
    }

    pub fn r(&self, i: Receiver) -> f64 {
        match i {
            Receiver::One => self.r1,
            Receiver::Two => self.r2,
        }
    }

    pub fn s(&self, i: Receiver) -> f64 {
        match i {
            Receiver::One => self.s1,
            Receiver::Two => self.s2,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("block length n must be positive")]
    BlockLength,
    #[error("{name} = {value} outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("rate r{receiver} = {value} must be positive")]
    Rate { receiver: u8, value: f64 },
    #[error("slack lambda = {0} outside (0, 1)")]
    Lambda(f64),
    #[error("slack lambda' = {value} must lie in (0, r{receiver})")]
    LambdaPrime { receiver: u8, value: f64 },
    #[error("verification rate s{receiver} = {value} must be nonnegative")]
    VerificationRate { receiver: u8, value: f64 },
    #[error("rate constraint violated for Bob-{receiver}: r = {rate} must be below {bound}")]
    RateConstraint { receiver: u8, rate: f64, bound: f64 },
    #[error("integrality violated for Bob-{receiver}: n (r - lambda') = {value} is not a positive integer")]
    Integrality { receiver: u8, value: f64 },
    #[error("key plus verification length {needed} exceeds set size {set_size} for Bob-{receiver}")]
    SetTooSmall { receiver: u8, needed: usize, set_size: usize },
    #[error("inflation denominator p{other} - lambda' = {value} must be positive")]
    Inflation { other: u8, value: f64 },
    #[error("leftover-erasure size (p - lambda - r/(p' - lambda')) n = {value} is not positive for Bob-{receiver}")]
    LeftoverErasures { receiver: u8, value: f64 },
}

/// Integer sizes derived from validated parameters. The exact oracle builds
/// tiny plans directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub variant: Variant,
    pub n: usize,
    pub p: [f64; 2],
    /// Per-receiver index-set size (phase-one inflated size for the phase-one
    /// receiver of the colluding variant).
    pub set_size: [usize; 2],
    pub key_len: [usize; 2],
    pub verify_len: [usize; 2],
    /// `|S'|` (colluding variant).
    pub s_prime: usize,
    pub order: Receiver,
}

impl Plan {
    pub fn p(&self, i: Receiver) -> f64 {
        self.p[i.index()]
    }
}

fn ceil_tol(x: f64) -> usize {
    (x - INTEGRALITY_TOLERANCE).ceil().max(0.0) as usize
}

fn floor_tol(x: f64) -> usize {
    (x + INTEGRALITY_TOLERANCE).floor().max(0.0) as usize
}

/// Checks every parameter constraint and returns the derived sizes.
pub fn validate_params(params: &ProtocolParams) -> Result<Plan, ParamError> {
    if params.n == 0 {
        return Err(ParamError::BlockLength);
    }
    for (name, value) in [("p1", params.p1), ("p2", params.p2)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(ParamError::Probability { name, value });
        }
    }
    if !(params.lambda > 0.0 && params.lambda < 1.0) {
        return Err(ParamError::Lambda(params.lambda));
    }
    let n = params.n as f64;
    let mut key_len = [0; 2];
    let mut verify_len = [0; 2];
    for i in Receiver::BOTH {
        let r = params.r(i);
        if r.is_nan() || r <= 0.0 {
            return Err(ParamError::Rate { receiver: i.number(), value: r });
        }
        let lp = params.lambda_prime;
        if !(lp > 0.0 && lp < r) {
            return Err(ParamError::LambdaPrime { receiver: i.number(), value: lp });
        }
        if params.s(i).is_nan() || params.s(i) < 0.0 {
            return Err(ParamError::VerificationRate { receiver: i.number(), value: params.s(i) });
        }
        let p = params.p(i);
        let m = p.min(1.0 - p);
        let bound = match params.variant {
            Variant::Noncolluding => m - params.lambda,
            Variant::Colluding => params.p(i.other()) * m - params.lambda,
        };
        if r >= bound {
            return Err(ParamError::RateConstraint { receiver: i.number(), rate: r, bound });
        }
        let raw = n * (r - lp);
        let k = match params.key_rule {
            KeyLengthRule::Exact => {
                let rounded = raw.round();
                if (raw - rounded).abs() > INTEGRALITY_TOLERANCE * n.max(1.0) {
                    return Err(ParamError::Integrality { receiver: i.number(), value: raw });
                }
                rounded.max(0.0) as usize
            }
            KeyLengthRule::Floor => floor_tol(raw),
        };
        if k == 0 {
            return Err(ParamError::Integrality { receiver: i.number(), value: raw });
        }
        key_len[i.index()] = k;
        verify_len[i.index()] = floor_tol(params.s(i) * n);
    }

    let mut set_size = [ceil_tol(params.r1 * n), ceil_tol(params.r2 * n)];
    let mut s_prime = 0;
    if params.variant == Variant::Colluding {
        let first = params.order;
        let second = first.other();
        let denom = params.p(second) - params.lambda_prime;
        if denom <= 0.0 {
            return Err(ParamError::Inflation { other: second.number(), value: denom });
        }
        let inflated = params.r(first) / denom;
        set_size[first.index()] = ceil_tol(inflated * n);
        if params.p(first) > 0.5 {
            let value = (params.p(first) - params.lambda - inflated) * n;
            s_prime = floor_tol(value);
            if s_prime == 0 {
                return Err(ParamError::LeftoverErasures { receiver: first.number(), value });
            }
        }
    }
    for i in Receiver::BOTH {
        let needed = key_len[i.index()] + verify_len[i.index()];
        if needed > set_size[i.index()] {
            return Err(ParamError::SetTooSmall { receiver: i.number(), needed, set_size: set_size[i.index()] });
        }
    }
    Ok(Plan {
        variant: params.variant,
        n: params.n,
        p: [params.p1, params.p2],
        set_size,
        key_len,
        verify_len,
        s_prime,
        order: params.order,
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error("message for Bob-{receiver} label {label} has {got} bits, expected {expected}")]
    MessageLength { receiver: u8, label: u8, expected: usize, got: usize },
    #[error("{0}")]
    Length(String),
}

/// Who sent a public message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Party {
    Alice,
    #[serde(rename = "bob-1")]
    Bob1,
    #[serde(rename = "bob-2")]
    Bob2,
}

impl Party {
    pub fn bob(i: Receiver) -> Party {
        match i {
            Receiver::One => Party::Bob1,
            Receiver::Two => Party::Bob2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadKind {
    IndexSets,
    HashDescriptions,
    Ciphertexts,
    PhaseMarker,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// `S_0, S_1` and, in phase one of the colluding variant, `S'`.
    IndexSets(Vec<IndexSet>),
    /// `h_0, h_1, κ_0, κ_1`.
    HashDescriptions(Vec<LinearHash>),
    /// Verification digests `h_j(X|S_j)` then ciphertexts `m_j ⊕ κ_j(X|S_j)`.
    Ciphertexts { digests: [BitVector; 2], ciphertexts: [BitVector; 2] },
    PhaseMarker(u8),
}

fn push_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_be_bytes());
}

fn push_bits(out: &mut Vec<u8>, v: &BitVector) {
    push_u32(out, v.len());
    out.extend_from_slice(&v.to_packed());
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        if self.bytes.len() < n {
            return None;
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Some(head)
    }

    fn u32(&mut self) -> Option<usize> {
        self.take(4).map(|b| u32::from_be_bytes(b.try_into().unwrap()) as usize)
    }

    fn bits(&mut self) -> Option<BitVector> {
        let len = self.u32()?;
        let bytes = self.take(len.div_ceil(8))?;
        crate::channel::unpack_bits(bytes, len).map(BitVector::new)
    }
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::IndexSets(_) => PayloadKind::IndexSets,
            Payload::HashDescriptions(_) => PayloadKind::HashDescriptions,
            Payload::Ciphertexts { .. } => PayloadKind::Ciphertexts,
            Payload::PhaseMarker(_) => PayloadKind::PhaseMarker,
        }
    }

    /// Wire encoding. Index sets: count, then per set its length and indices
    /// (all u32 big-endian). Hashes: count, then per hash its byte length
    /// and matrix encoding. Bit strings: length then packed bits.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Payload::IndexSets(sets) => {
                push_u32(&mut out, sets.len());
                for s in sets {
                    push_u32(&mut out, s.len());
                    for &i in s.indices() {
                        push_u32(&mut out, i);
                    }
                }
            }
            Payload::HashDescriptions(hashes) => {
                push_u32(&mut out, hashes.len());
                for h in hashes {
                    let bytes = h.to_bytes();
                    push_u32(&mut out, bytes.len());
                    out.extend_from_slice(&bytes);
                }
            }
            Payload::Ciphertexts { digests, ciphertexts } => {
                for v in digests.iter().chain(ciphertexts) {
                    push_bits(&mut out, v);
                }
            }
            Payload::PhaseMarker(phase) => out.push(*phase),
        }
        out
    }

    pub fn from_bytes(kind: PayloadKind, bytes: &[u8]) -> Option<Payload> {
        let mut r = Reader { bytes };
        let payload = match kind {
            PayloadKind::IndexSets => {
                let count = r.u32()?;
                let mut sets = Vec::with_capacity(count.min(16));
                for _ in 0..count {
                    let len = r.u32()?;
                    let indices = (0..len).map(|_| r.u32()).collect::<Option<Vec<_>>>()?;
                    let bound = indices.last().map_or(0, |&i| i + 1);
                    sets.push(IndexSet::new(indices, bound).ok()?);
                }
                Payload::IndexSets(sets)
            }
            PayloadKind::HashDescriptions => {
                let count = r.u32()?;
                let mut hashes = Vec::with_capacity(count.min(16));
                for _ in 0..count {
                    let len = r.u32()?;
                    hashes.push(LinearHash::from_bytes(r.take(len)?).ok()?);
                }
                Payload::HashDescriptions(hashes)
            }
            PayloadKind::Ciphertexts => {
                let d0 = r.bits()?;
                let d1 = r.bits()?;
                let c0 = r.bits()?;
                let c1 = r.bits()?;
                Payload::Ciphertexts { digests: [d0, d1], ciphertexts: [c0, c1] }
            }
            PayloadKind::PhaseMarker => Payload::PhaseMarker(*r.take(1)?.first()?),
        };
        r.bytes.is_empty().then_some(payload)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub sender: Party,
    /// OT link the message belongs to.
    pub link: Receiver,
    pub payload: Payload,
}

#[derive(Serialize, Deserialize)]
struct WireMessage {
    sender: Party,
    link: Receiver,
    kind: PayloadKind,
    #[serde(rename = "payload-hex")]
    payload_hex: String,
}

/// Append-only public transcript, readable by every party.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    messages: Vec<Message>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, sender: Party, link: Receiver, payload: Payload) {
        self.messages.push(Message { sender, link, payload });
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// `C_i`: the messages on link `i`.
    pub fn link(&self, i: Receiver) -> Vec<&Message> {
        self.messages.iter().filter(|m| m.link == i).collect()
    }

    /// Messages from the given phase onward (phase markers split phases).
    pub fn phase(&self, phase: u8) -> Vec<&Message> {
        let mut current = 1;
        let mut out = Vec::new();
        for m in &self.messages {
            if let Payload::PhaseMarker(p) = m.payload {
                current = p;
                continue;
            }
            if current == phase {
                out.push(m);
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let wire: Vec<WireMessage> = self
            .messages
            .iter()
            .map(|m| WireMessage {
                sender: m.sender,
                link: m.link,
                kind: m.payload.kind(),
                payload_hex: hex::encode(m.payload.to_bytes()),
            })
            .collect();
        serde_json::to_value(wire).expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Option<Transcript> {
        let wire: Vec<WireMessage> = serde_json::from_value(value.clone()).ok()?;
        let messages = wire
            .into_iter()
            .map(|w| {
                let bytes = hex::decode(&w.payload_hex).ok()?;
                let payload = Payload::from_bytes(w.kind, &bytes)?;
                Some(Message { sender: w.sender, link: w.link, payload })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Transcript { messages })
    }
}

/// `m_{i0}, m_{i1}` for both links, indexed `[receiver][label]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Messages(pub [[BitVector; 2]; 2]);

impl Messages {
    pub fn get(&self, i: Receiver, label: usize) -> &BitVector {
        &self.0[i.index()][label]
    }

    /// Uniform messages of the plan's key lengths.
    pub fn random<S: RandomSource + ?Sized>(plan: &Plan, src: &mut S) -> Messages {
        let draw = |i: Receiver, label: u8, src: &mut S| {
            BitVector::random(plan.key_len[i.index()], src, Draw::Message { link: i, label })
        };
        Messages([
            [draw(Receiver::One, 0, src), draw(Receiver::One, 1, src)],
            [draw(Receiver::Two, 0, src), draw(Receiver::Two, 1, src)],
        ])
    }

    pub fn zeros(plan: &Plan) -> Messages {
        let z = |i: usize| BitVector::zeros(plan.key_len[i]);
        Messages([[z(0), z(0)], [z(1), z(1)]])
    }

    fn check(&self, plan: &Plan) -> Result<(), ProtocolError> {
        for i in Receiver::BOTH {
            for label in 0..2 {
                let got = self.get(i, label).len();
                let expected = plan.key_len[i.index()];
                if got != expected {
                    return Err(ProtocolError::MessageLength { receiver: i.number(), label: label as u8, expected, got });
                }
            }
        }
        Ok(())
    }
}

/// Choice bits `(Z_1, Z_2)`; `true` selects label 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Choices(pub [bool; 2]);

impl Choices {
    pub fn get(&self, i: Receiver) -> bool {
        self.0[i.index()]
    }

    pub fn random<S: RandomSource + ?Sized>(src: &mut S) -> Choices {
        Choices([src.bit(Draw::Choice { receiver: Receiver::One }), src.bit(Draw::Choice { receiver: Receiver::Two })])
    }
}

/// Alice's hash draws for one link, `[label]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkHashes {
    pub h: [LinearHash; 2],
    pub kappa: [LinearHash; 2],
}

/// Everything Alice holds: `U = (M_{i0}, M_{i1}, R_A, X^n, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AliceView {
    pub messages: Messages,
    pub x: BitVector,
    /// Randomness record: hash draws per link (absent if the link never
    /// reached Alice's reply).
    pub hashes: [Option<LinkHashes>; 2],
    pub transcript: Transcript,
}

/// Everything Bob-i holds: `(V_i, R_{B_i}, Y_i^n, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BobView {
    pub receiver: Receiver,
    pub choice: bool,
    /// Observation of the phase-one transmission of `X^n`, if it reached him.
    pub observation: Option<ObservationVector>,
    /// Observation of `X|_{S'}` in phase two of the colluding variant.
    pub phase2_observation: Option<ObservationVector>,
    /// Randomness record: the sets he drew (`S_0, S_1` and possibly `S'`).
    pub drawn_sets: Vec<IndexSet>,
    pub transcript: Transcript,
}

impl BobView {
    /// Positions of `X^n` whose value this receiver saw, with the values.
    pub fn known_positions(&self, s_prime: Option<&IndexSet>) -> Vec<(usize, bool)> {
        let mut known: Vec<(usize, bool)> = Vec::new();
        if let Some(y) = &self.observation {
            known.extend(y.symbols().iter().enumerate().filter_map(|(i, s)| s.bit().map(|b| (i, b))));
        }
        if let (Some(y), Some(sp)) = (&self.phase2_observation, s_prime) {
            known.extend(
                y.symbols().iter().enumerate().filter_map(|(j, s)| s.bit().map(|b| (sp.indices()[j], b))),
            );
        }
        known.sort_unstable();
        known.dedup_by_key(|k| k.0);
        known
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "reason")]
pub enum Status {
    Completed,
    Aborted(String),
    DecodeError(String),
    /// Colluding variant with `S' = ∅`: the phase-two receiver gets no OT.
    NoSecondPhase,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub erased: usize,
    pub nonerased: usize,
    pub set_size: usize,
    pub phase: u8,
    pub s_prime_size: Option<usize>,
    /// Alice drew the zero map for the chosen or unchosen key.
    pub degenerate_kappa: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtOutcome {
    pub receiver: Receiver,
    pub status: Status,
    pub decoded: Option<BitVector>,
    pub diagnostics: Diagnostics,
}

impl OtOutcome {
    pub fn is_completed(&self) -> bool {
        self.status == Status::Completed
    }

    pub fn is_aborted(&self) -> bool {
        matches!(self.status, Status::Aborted(_))
    }

    fn terminal(receiver: Receiver, status: Status, diagnostics: Diagnostics) -> Self {
        Self { receiver, status, decoded: None, diagnostics }
    }
}

/// Public and private material of one executed OT link, in `X^n`
/// coordinates. Used by the audit.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRecord {
    pub receiver: Receiver,
    pub phase: u8,
    /// Key-material positions of each label in `X^n` coordinates.
    pub key_sets: [IndexSet; 2],
    pub hashes: LinkHashes,
    pub digests: [BitVector; 2],
    pub ciphertexts: [BitVector; 2],
}

/// Complete record of one protocol execution.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub variant: Variant,
    pub outcomes: [OtOutcome; 2],
    pub alice: AliceView,
    pub bobs: [BobView; 2],
    pub choices: Choices,
    pub links: Vec<LinkRecord>,
    /// `S'` in `X^n` coordinates (colluding variant).
    pub s_prime: Option<IndexSet>,
    pub visibility: VisibilityModel,
}

impl Run {
    pub fn transcript(&self) -> &Transcript {
        &self.alice.transcript
    }

    pub fn link(&self, i: Receiver) -> Option<&LinkRecord> {
        self.links.iter().find(|l| l.receiver == i)
    }

    pub fn outcome(&self, i: Receiver) -> &OtOutcome {
        &self.outcomes[i.index()]
    }

    pub fn bob(&self, i: Receiver) -> &BobView {
        &self.bobs[i.index()]
    }

    /// Decoded the chosen message exactly.
    pub fn correct(&self, i: Receiver) -> bool {
        let chosen = self.alice.messages.get(i, self.choices.get(i) as usize);
        self.outcome(i).decoded.as_ref() == Some(chosen)
    }
}

/// Draws `S_{Z}` uniformly from `ebar` and `S_{Z̄}` uniformly from `e`, both
/// of `size` elements, and returns them by message label: `(S_0, S_1)`.
/// `None` when either pool is too small (abort).
pub fn select_subsets<S: RandomSource + ?Sized>(
    e: &IndexSet,
    ebar: &IndexSet,
    z: bool,
    size: usize,
    src: &mut S,
    tag: Draw,
) -> Option<(IndexSet, IndexSet)> {
    if ebar.len() < size || e.len() < size {
        return None;
    }
    let chosen = ebar.pick(&src.subset(tag, ebar.len(), size));
    let unchosen = e.pick(&src.subset(tag, e.len(), size));
    Some(if z { (unchosen, chosen) } else { (chosen, unchosen) })
}

/// `m ⊕ κ(key_material)`.
pub fn encrypt(m: &BitVector, kappa: &LinearHash, key_material: &BitVector) -> Result<BitVector, ProtocolError> {
    if m.len() != kappa.rows() {
        return Err(ProtocolError::Length(format!("message has {} bits, hash outputs {}", m.len(), kappa.rows())));
    }
    let pad = kappa.apply(key_material)?;
    Ok(m.xor(&pad)?)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("position {0} of the chosen set is erased")]
    Erased(usize),
    #[error("verification hash mismatch")]
    HashMismatch,
    #[error("length mismatch")]
    Length,
}

/// Reads `X|_{S_z}` off the non-erased symbols, checks it against Alice's
/// verification digest and removes the pad.
pub fn decode_chosen(
    y: &ObservationVector,
    s_z: &IndexSet,
    kappa_z: &LinearHash,
    h_z: &LinearHash,
    commitment: &BitVector,
    ciphertext: &BitVector,
) -> Result<BitVector, DecodeError> {
    let window = y.restrict(s_z).map_err(|_| DecodeError::Length)?;
    let bits = window
        .symbols()
        .iter()
        .enumerate()
        .map(|(j, s)| s.bit().ok_or(DecodeError::Erased(s_z.indices()[j])))
        .collect::<Result<Vec<bool>, _>>()?;
    let estimate = BitVector::new(bits);
    let digest = h_z.apply(&estimate).map_err(|_| DecodeError::Length)?;
    if &digest != commitment {
        return Err(DecodeError::HashMismatch);
    }
    let pad = kappa_z.apply(&estimate).map_err(|_| DecodeError::Length)?;
    ciphertext.xor(&pad).map_err(|_| DecodeError::Length)
}

/// Step four for one link: Alice draws `h_0, h_1, κ_0, κ_1` over
/// `key_material[label]`, publishes them, the digests and the ciphertexts.
pub(crate) fn alice_reply<S: RandomSource + ?Sized>(
    link: Receiver,
    key_material: [&BitVector; 2],
    messages: [&BitVector; 2],
    key_len: usize,
    verify_len: usize,
    transcript: &mut Transcript,
    src: &mut S,
) -> Result<(LinkHashes, [BitVector; 2], [BitVector; 2]), ProtocolError> {
    let m = key_material[0].len();
    let mut h = Vec::with_capacity(2);
    let mut kappa = Vec::with_capacity(2);
    for label in 0..2u8 {
        h.push(LinearHash::sample(m, verify_len, src, Draw::Hash { link, label, verification: true }));
        kappa.push(LinearHash::sample(m, key_len, src, Draw::Hash { link, label, verification: false }));
    }
    let hashes = LinkHashes { h: [h[0].clone(), h[1].clone()], kappa: [kappa[0].clone(), kappa[1].clone()] };
    let digests = [hashes.h[0].apply(key_material[0])?, hashes.h[1].apply(key_material[1])?];
    let ciphertexts = [
        encrypt(messages[0], &hashes.kappa[0], key_material[0])?,
        encrypt(messages[1], &hashes.kappa[1], key_material[1])?,
    ];
    transcript.push(Party::Alice, link, Payload::HashDescriptions(vec![h[0].clone(), h[1].clone(), kappa[0].clone(), kappa[1].clone()]));
    transcript.push(
        Party::Alice,
        link,
        Payload::Ciphertexts { digests: digests.clone(), ciphertexts: ciphertexts.clone() },
    );
    Ok((hashes, digests, ciphertexts))
}

pub(crate) fn diagnostics_for(y: &ObservationVector, set_size: usize, phase: u8) -> Diagnostics {
    let (erased, nonerased) = erasure_count(y);
    Diagnostics { erased, nonerased, set_size, phase, ..Diagnostics::default() }
}

/// Outcome of step five (or ten) for one receiver.
pub(crate) fn finish_link(
    receiver: Receiver,
    y: &ObservationVector,
    sets: &(IndexSet, IndexSet),
    z: bool,
    hashes: &LinkHashes,
    digests: &[BitVector; 2],
    ciphertexts: &[BitVector; 2],
    mut diagnostics: Diagnostics,
) -> OtOutcome {
    let label = z as usize;
    let s_z = if z { &sets.1 } else { &sets.0 };
    diagnostics.degenerate_kappa = hashes.kappa.iter().any(|k| k.is_zero_map() && k.rows() > 0);
    match decode_chosen(y, s_z, &hashes.kappa[label], &hashes.h[label], &digests[label], &ciphertexts[label]) {
        Ok(m) => OtOutcome { receiver, status: Status::Completed, decoded: Some(m), diagnostics },
        Err(e) => OtOutcome::terminal(receiver, Status::DecodeError(e.to_string()), diagnostics),
    }
}

pub(crate) fn aborted(receiver: Receiver, reason: &str, diagnostics: Diagnostics) -> OtOutcome {
    OtOutcome::terminal(receiver, Status::Aborted(reason.to_string()), diagnostics)
}

pub(crate) fn no_second_phase(receiver: Receiver, diagnostics: Diagnostics) -> OtOutcome {
    OtOutcome::terminal(receiver, Status::NoSecondPhase, diagnostics)
}

/// Dispatches on the variant. The colluding variant uses the default
/// visibility model.
pub fn run_protocol<S: RandomSource + ?Sized>(
    params: &ProtocolParams,
    messages: &Messages,
    choices: Choices,
    src: &mut S,
) -> Result<Run, ProtocolError> {
    match params.variant {
        Variant::Noncolluding => run_protocol1(params, messages, choices, src),
        Variant::Colluding => run_protocol2(params, messages, choices, VisibilityModel::default(), src),
    }
}

/// Executes a plan without parameter validation. Protocol 1 ignores
/// `visibility` (its single transmission is a broadcast).
pub fn execute<S: RandomSource + ?Sized>(
    plan: &Plan,
    messages: &Messages,
    choices: Choices,
    visibility: VisibilityModel,
    src: &mut S,
) -> Result<Run, ProtocolError> {
    match plan.variant {
        Variant::Noncolluding => execute_protocol1(plan, messages, choices, src),
        Variant::Colluding => execute_protocol2(plan, messages, choices, visibility, None, src),
    }
}
