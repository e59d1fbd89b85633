//! Oblivious transfer over a two-receiver binary erasure broadcast channel.
//!
//! Two protocols are implemented: one for receivers that do not collude
//! ([`protocol::run_protocol1`]) and a two-phase protocol that recycles
//! leftover erasures and stays secure when the receivers pool their views
//! ([`protocol::run_protocol2`]). Around them sit an entropy toolkit, a
//! two-universal hash family, an honest-but-curious audit harness, an exact
//! enumeration oracle for tiny instances and rate-region evaluators.
//!
//! Numeric code is generic over [`scalar::Probability`], implemented for
//! `f32`, `f64` and the exact [`Rational`]; the aliases below fix the common
//! choices.

pub mod audit;
pub mod campaign;
pub mod channel;
pub mod entropy;
pub mod gf2;
pub mod hashing;
pub mod oracle;
pub mod protocol;
pub mod randomness;
pub mod rates;
pub mod scalar;
pub mod stats;

pub use channel::{BitVector, IndexSet, ObservationVector, Receiver};
pub use hashing::LinearHash;
pub use protocol::{ProtocolParams, Variant, VisibilityModel};
pub use randomness::{RandomSource, StreamedSource};
pub use scalar::{Probability, Rational};

pub type Distribution<O> = entropy::FiniteDistribution<O, f64>;
pub type Distribution32<O> = entropy::FiniteDistribution<O, f32>;
pub type ExactDistribution<O> = entropy::FiniteDistribution<O, Rational>;
pub type Joint<X, Y> = entropy::JointDistribution<X, Y, f64>;
pub type ExactJointDistribution<X, Y> = entropy::JointDistribution<X, Y, Rational>;
pub type Region = rates::RateRegion<f64>;
pub type Region32 = rates::RateRegion<f32>;
pub type ExactRegion = rates::RateRegion<Rational>;
