//! Flag and config-file handling. Every option can come from a flag or from
//! the JSON file given by `--config`; flags win.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use erasure_ot::audit::Attacker;
use erasure_ot::protocol::{KeyLengthRule, Visibility};
use erasure_ot::rates::Converse;
use erasure_ot::{Probability, ProtocolParams, Rational, Receiver, Variant, VisibilityModel};
use serde::{Deserialize, Deserializer, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 7;
pub const SEED_ENV: &str = "ERASURE_OT_SEED";

/// A probability or rate as typed: `0.25` or `1/4`.
#[derive(Debug, Clone, PartialEq)]
pub struct Number(pub String);

impl FromStr for Number {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        Rational::parse_prob(s).map(|_| Number(s.to_string())).ok_or_else(|| format!("not a number: {s:?}"))
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Value(serde_json::Number),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Text(s) => s,
            Raw::Value(v) => v.to_string(),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl Number {
    pub fn is_fraction(&self) -> bool {
        self.0.contains('/')
    }

    pub fn get<P: Probability>(&self) -> P {
        P::parse_prob(&self.0).expect("validated on parse")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    #[value(alias = "noncolluding")]
    #[serde(alias = "noncolluding")]
    P1,
    #[value(alias = "colluding")]
    #[serde(alias = "colluding")]
    P2,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::P1 => Variant::Noncolluding,
            VariantArg::P2 => Variant::Colluding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisibilityArg {
    PointToPoint,
    Broadcast,
}

impl From<VisibilityArg> for Visibility {
    fn from(v: VisibilityArg) -> Visibility {
        match v {
            VisibilityArg::PointToPoint => Visibility::PointToPoint,
            VisibilityArg::Broadcast => Visibility::BroadcastBoth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyRuleArg {
    Exact,
    Floor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum AttackerArg {
    #[value(name = "single-1", alias = "single")]
    #[serde(rename = "single-1", alias = "single")]
    Single1,
    #[value(name = "single-2")]
    #[serde(rename = "single-2")]
    Single2,
    #[value(name = "pooled")]
    #[serde(rename = "pooled")]
    Pooled,
    #[value(name = "wiretapper")]
    #[serde(rename = "wiretapper")]
    Wiretapper,
    #[value(name = "alice")]
    #[serde(rename = "alice")]
    Alice,
    #[value(name = "alice-plus-1", alias = "alice-plus")]
    #[serde(rename = "alice-plus-1", alias = "alice-plus")]
    AlicePlus1,
    #[value(name = "alice-plus-2")]
    #[serde(rename = "alice-plus-2")]
    AlicePlus2,
}

impl From<AttackerArg> for Attacker {
    fn from(a: AttackerArg) -> Attacker {
        match a {
            AttackerArg::Single1 => Attacker::SingleReceiver(Receiver::One),
            AttackerArg::Single2 => Attacker::SingleReceiver(Receiver::Two),
            AttackerArg::Pooled => Attacker::PooledReceivers,
            AttackerArg::Wiretapper => Attacker::Wiretapper,
            AttackerArg::Alice => Attacker::Alice,
            AttackerArg::AlicePlus1 => Attacker::AlicePlusReceiver(Receiver::One),
            AttackerArg::AlicePlus2 => Attacker::AlicePlusReceiver(Receiver::Two),
        }
    }
}

pub const ALL_ATTACKERS: [AttackerArg; 7] = [
    AttackerArg::Single1,
    AttackerArg::Single2,
    AttackerArg::Pooled,
    AttackerArg::Wiretapper,
    AttackerArg::Alice,
    AttackerArg::AlicePlus1,
    AttackerArg::AlicePlus2,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConverseArg {
    Noncolluding,
    Colluding,
}

impl From<ConverseArg> for Converse {
    fn from(c: ConverseArg) -> Converse {
        match c {
            ConverseArg::Noncolluding => Converse::NonColluding,
            ConverseArg::Colluding => Converse::Colluding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionName {
    NoncolludingOuter,
    NoncolludingCapacity,
    ColludingOuter,
    ColludingInner,
    Timesharing,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON file whose keys mirror the long flag names.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// Fills `None` fields of `$a` from `$b`.
macro_rules! merge_fields {
    ($a:ident, $b:ident; $($f:ident),* $(,)?) => {
        $( if $a.$f.is_none() { $a.$f = $b.$f; } )*
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct ProtocolArgs {
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Block length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Erasure probability toward Bob-1.
    #[arg(long)]
    pub p1: Option<Number>,
    #[arg(long)]
    pub p2: Option<Number>,
    #[arg(long)]
    pub r1: Option<Number>,
    #[arg(long)]
    pub r2: Option<Number>,
    #[arg(long)]
    pub lambda: Option<Number>,
    #[arg(long)]
    pub lambda_prime: Option<Number>,
    /// Verification-hash rates; default lambda'/2.
    #[arg(long)]
    pub s1: Option<Number>,
    #[arg(long)]
    pub s2: Option<Number>,
    /// Phase-one receiver of Protocol 2 (1 or 2).
    #[arg(long)]
    pub order: Option<u8>,
    #[arg(long, value_enum)]
    pub key_rule: Option<KeyRuleArg>,
    /// Who observes phase-one transmissions (Protocol 2).
    #[arg(long, value_enum)]
    pub phase1: Option<VisibilityArg>,
    #[arg(long, value_enum)]
    pub phase2: Option<VisibilityArg>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Default 7, or the ERASURE_OT_SEED environment variable.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ProtocolArgs {
    pub fn merge(mut self, file: ProtocolArgs) -> Self {
        merge_fields!(self, file; variant, n, p1, p2, r1, r2, lambda, lambda_prime, s1, s2, order, key_rule, phase1, phase2, trials, seed);
        self
    }

    pub fn variant(&self) -> VariantArg {
        self.variant.unwrap_or(VariantArg::P1)
    }

    /// Parameters with the variant's defaults filled in.
    pub fn params(&self) -> Result<ProtocolParams, CliError> {
        let (n, p, r, lambda, lambda_prime) = match self.variant() {
            VariantArg::P1 => (80, 0.5, 0.2, 0.05, 0.1),
            VariantArg::P2 => (200, 0.7, 0.1, 0.05, 0.05),
        };
        let num = |v: &Option<Number>, d: f64| v.as_ref().map_or(d, |x| x.get::<f64>());
        let lambda_prime = num(&self.lambda_prime, lambda_prime);
        let order = match self.order.unwrap_or(1) {
            1 => Receiver::One,
            2 => Receiver::Two,
            o => return Err(CliError::Validation(format!("order must be 1 or 2, got {o}"))),
        };
        Ok(ProtocolParams {
            n: self.n.unwrap_or(n),
            p1: num(&self.p1, p),
            p2: num(&self.p2, p),
            r1: num(&self.r1, r),
            r2: num(&self.r2, r),
            lambda: num(&self.lambda, lambda),
            lambda_prime,
            s1: num(&self.s1, lambda_prime / 2.0),
            s2: num(&self.s2, lambda_prime / 2.0),
            variant: self.variant().into(),
            order,
            key_rule: match self.key_rule.unwrap_or(KeyRuleArg::Floor) {
                KeyRuleArg::Exact => KeyLengthRule::Exact,
                KeyRuleArg::Floor => KeyLengthRule::Floor,
            },
        })
    }

    pub fn visibility(&self) -> VisibilityModel {
        VisibilityModel {
            phase1: self.phase1.map_or(Visibility::PointToPoint, Into::into),
            phase2: self.phase2.map_or(Visibility::PointToPoint, Into::into),
        }
    }

    pub fn trials(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct AuditArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub protocol: ProtocolArgs,
    /// Repeatable; every attacker when absent.
    #[arg(long, value_enum)]
    pub attacker: Vec<AttackerArg>,
}

impl AuditArgs {
    pub fn merge(mut self, file: AuditArgs) -> Self {
        self.protocol = self.protocol.merge(file.protocol);
        if self.attacker.is_empty() {
            self.attacker = file.attacker;
        }
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Decimal or exact fraction; the oracle is always exact.
    #[arg(long)]
    pub p1: Option<Number>,
    #[arg(long)]
    pub p2: Option<Number>,
    #[arg(long)]
    pub set_size: Option<usize>,
    /// Block length of the message-leak instances (Protocol 1); 0 skips them.
    #[arg(long)]
    pub leak_n: Option<usize>,
    /// Size of S' (Protocol 2).
    #[arg(long)]
    pub s_prime: Option<usize>,
    #[arg(long, value_enum)]
    pub phase1: Option<VisibilityArg>,
    #[arg(long, value_enum)]
    pub phase2: Option<VisibilityArg>,
    /// Also sample this many Monte Carlo runs and compare laws.
    #[arg(long)]
    pub compare_mc: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl OracleArgs {
    pub fn merge(mut self, file: OracleArgs) -> Self {
        merge_fields!(self, file; variant, n, p1, p2, set_size, leak_n, s_prime, phase1, phase2, compare_mc, seed);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct RegionArgs {
    #[arg(long)]
    pub p1: Option<Number>,
    #[arg(long)]
    pub p2: Option<Number>,
    /// All five closed-form regions.
    #[arg(long)]
    pub all: bool,
    /// Repeatable region selection.
    #[arg(long, value_enum)]
    pub region: Vec<RegionName>,
    /// JSON channel description for the general converse bounds.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    /// Which converse to evaluate on `--channel`; both when absent.
    #[arg(long, value_enum)]
    pub converse: Option<ConverseArg>,
    /// Grid points of the P_X scan.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub check_containment: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl RegionArgs {
    pub fn merge(mut self, file: RegionArgs) -> Self {
        merge_fields!(self, file; p1, p2, channel, converse, resolution, format);
        self.all |= file.all;
        self.check_containment |= file.check_containment;
        if self.region.is_empty() {
            self.region = file.region;
        }
        self
    }
}

/// Reads `--config` into the subcommand's argument type.
pub fn load<T: for<'de> Deserialize<'de> + Default>(common: &Common) -> Result<T, CliError> {
    let Some(path) = &common.config else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
}

/// Flag or config seed, else the environment override, else the default.
pub fn resolve_seed(seed: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Validation(format!("{SEED_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
