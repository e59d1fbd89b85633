use erasure_ot::audit::{run_audit, Attacker, AuditReport};
use erasure_ot::campaign::{run_campaign, CampaignReport, ARTIFACT_VERSION, SCHEMA_VERSION};
use erasure_ot::oracle::{
    choice_secrecy, message_leak, oracle_vs_montecarlo, s_prime_knowledge, sets_feature, ChoiceSecrecy,
    EnumerationBudget, Instance, McComparison, MessageLeak, OracleError, SPrimeKnowledge, PATTERN_SCOPE,
    SETS_SCOPE,
};
use erasure_ot::protocol::{collusion_mask_accounting, Visibility};
use erasure_ot::rates::{
    containment_report, general_upper_bounds, region_colluding_inner, region_colluding_outer,
    region_noncolluding_capacity, region_noncolluding_outer, region_timesharing, regions_csv, ChannelSpec,
    Containment, Converse, GeneralBounds, RateError, RateRegion, RegionJson,
};
use erasure_ot::{Probability, Rational, VisibilityModel};
use serde::Serialize;

use crate::config::{
    resolve_seed, AuditArgs, Format, Number, OracleArgs, ProtocolArgs, RegionArgs, RegionName, VariantArg,
    ALL_ATTACKERS,
};
use crate::CliError;

pub const DEFAULT_TRIALS: u64 = 1000;

/// Rendered report plus the seed it used, if any.
pub struct Output {
    pub body: String,
    pub seed: Option<u64>,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn simulate(args: ProtocolArgs) -> Result<Output, CliError> {
    let seed = resolve_seed(args.seed)?;
    let params = args.params()?;
    let report: CampaignReport =
        run_campaign(&params, args.visibility(), args.trials(DEFAULT_TRIALS), seed).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(Output { body: json(&report), seed: Some(seed) })
}

pub fn audit(args: AuditArgs) -> Result<Output, CliError> {
    let seed = resolve_seed(args.protocol.seed)?;
    let params = args.protocol.params()?;
    let chosen = if args.attacker.is_empty() { ALL_ATTACKERS.to_vec() } else { args.attacker.clone() };
    let attackers: Vec<Attacker> = chosen.into_iter().map(Into::into).collect();
    let report: AuditReport =
        run_audit(&params, args.protocol.visibility(), args.protocol.trials(DEFAULT_TRIALS), seed, &attackers)
            .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(Output { body: json(&report), seed: Some(seed) })
}

#[derive(Debug, Serialize)]
struct OracleConfig {
    variant: &'static str,
    n: usize,
    p: [String; 2],
    set_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    leak_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_prime: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    visibility: Option<VisibilityModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    compare_mc: Option<u64>,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct MiRow {
    quantity: String,
    /// Bits for information quantities, a probability otherwise.
    value: f64,
    exact_zero: bool,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    schema_version: u32,
    artifact_version: String,
    config: OracleConfig,
    budget: EnumerationBudget,
    arithmetic: &'static str,
    table: Vec<MiRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    choice_secrecy: Option<ChoiceSecrecy>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    message_leak: Vec<MessageLeak>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_prime_knowledge: Option<SPrimeKnowledge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<McComparison>,
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::Budget { .. } => CliError::Budget(e.to_string()),
        _ => CliError::Validation(e.to_string()),
    }
}

pub fn oracle(args: OracleArgs) -> Result<Output, CliError> {
    let seed = resolve_seed(args.seed)?;
    let variant = args.variant.unwrap_or(VariantArg::P1);
    let default_p = match variant {
        VariantArg::P1 => "1/2",
        VariantArg::P2 => "3/4",
    };
    let prob = |v: &Option<Number>| -> Rational { v.as_ref().map_or_else(|| Rational::parse_prob(default_p).unwrap(), |x| x.get()) };
    let p = [prob(&args.p1), prob(&args.p2)];
    let n = args.n.unwrap_or(match variant {
        VariantArg::P1 => 3,
        VariantArg::P2 => 5,
    });
    let set_size = args.set_size.unwrap_or(1);
    let budget = EnumerationBudget::default();
    let mut table = Vec::new();
    let mut report = OracleReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: ARTIFACT_VERSION.to_string(),
        config: OracleConfig {
            variant: match variant {
                VariantArg::P1 => "p1",
                VariantArg::P2 => "p2",
            },
            n,
            p: [p[0].render(), p[1].render()],
            set_size,
            leak_n: None,
            s_prime: None,
            visibility: None,
            compare_mc: args.compare_mc,
            seed,
        },
        budget,
        arithmetic: "rational",
        table: Vec::new(),
        choice_secrecy: None,
        message_leak: Vec::new(),
        s_prime_knowledge: None,
        monte_carlo: None,
    };
    match variant {
        VariantArg::P1 => {
            let cs = choice_secrecy(n, p.clone(), set_size, &budget).map_err(oracle_error)?;
            table.push(MiRow { quantity: "I(Z1; S10, S11)".into(), value: cs.z1_vs_sets.bits, exact_zero: cs.z1_vs_sets.exact_zero });
            table.push(MiRow {
                quantity: "I(Z1, Z2; X, S10, S11, S20, S21)".into(),
                value: cs.choices_vs_alice.bits,
                exact_zero: cs.choices_vs_alice.exact_zero,
            });
            report.choice_secrecy = Some(cs);
            let leak_n = args.leak_n.unwrap_or(n.min(3));
            if leak_n > 0 {
                report.config.leak_n = Some(leak_n);
                for pooled in [false, true] {
                    let leak = message_leak(leak_n, p.clone(), pooled, &budget).map_err(oracle_error)?;
                    let quantity = if pooled { "I(M1z̄; V1, V2)" } else { "I(M1z̄; V1)" };
                    table.push(MiRow { quantity: quantity.into(), value: leak.mi.bits, exact_zero: leak.mi.exact_zero });
                    report.message_leak.push(leak);
                }
            }
            if let Some(trials) = args.compare_mc {
                let inst = Instance::protocol1(n, p, set_size, set_size.min(1), 0, SETS_SCOPE);
                report.monte_carlo = Some(oracle_vs_montecarlo(&inst, &budget, trials, seed, sets_feature).map_err(oracle_error)?);
            }
        }
        VariantArg::P2 => {
            let s_prime = args.s_prime.unwrap_or(1);
            let visibility = VisibilityModel {
                phase1: args.phase1.map_or(Visibility::PointToPoint, Into::into),
                phase2: args.phase2.map_or(Visibility::PointToPoint, Into::into),
            };
            report.config.s_prime = Some(s_prime);
            report.config.visibility = Some(visibility);
            let k = s_prime_knowledge(n, p.clone(), s_prime, visibility, &budget).map_err(oracle_error)?;
            table.push(MiRow {
                quantity: "P(phase-one receiver saw part of S')".into(),
                value: 1.0 - k.known_positions.prob(&0).as_f64(),
                exact_zero: k.always_zero,
            });
            report.s_prime_knowledge = Some(k);
            if let Some(trials) = args.compare_mc {
                let inst = Instance::protocol2(n, p, [1, 1], 1, 0, s_prime, visibility, PATTERN_SCOPE);
                let feature = |run: &erasure_ot::protocol::Run| ((), collusion_mask_accounting(run).s_prime_known_in_phase1);
                report.monte_carlo = Some(oracle_vs_montecarlo(&inst, &budget, trials, seed, feature).map_err(oracle_error)?);
            }
        }
    }
    report.table = table;
    Ok(Output { body: json(&report), seed: Some(seed) })
}

#[derive(Debug, Serialize)]
struct RegionConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<[String; 2]>,
    regions: Vec<RegionName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel: Option<ChannelSpec>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    converse: Vec<Converse>,
    resolution: usize,
    check_containment: bool,
    format: Format,
}

#[derive(Debug, Serialize)]
struct TimeSharingSummary {
    hull_sum: f64,
    /// Sum-rate of the colluding inner region, for comparison.
    inner_sum: f64,
}

#[derive(Debug, Serialize)]
struct GeneralEntry {
    bounds: GeneralBounds,
    region: RegionJson,
}

#[derive(Debug, Serialize)]
struct RegionReport {
    schema_version: u32,
    artifact_version: String,
    config: RegionConfig,
    arithmetic: &'static str,
    regions: Vec<RegionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timesharing: Option<TimeSharingSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    containment: Option<Vec<Containment>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    general: Vec<GeneralEntry>,
}

fn rate_error(e: RateError) -> CliError {
    CliError::Validation(e.to_string())
}

struct ClosedForm {
    regions: Vec<RegionJson>,
    timesharing: Option<TimeSharingSummary>,
    containment: Option<Vec<Containment>>,
}

fn closed_form<P: Probability>(p1: P, p2: P, names: &[RegionName], containment: bool) -> Result<ClosedForm, RateError> {
    let mut regions = Vec::new();
    let mut timesharing = None;
    for name in names {
        let region: RateRegion<P> = match name {
            RegionName::NoncolludingOuter => region_noncolluding_outer(p1.clone(), p2.clone())?,
            RegionName::NoncolludingCapacity => region_noncolluding_capacity(p1.clone(), p2.clone())?,
            RegionName::ColludingOuter => region_colluding_outer(p1.clone(), p2.clone())?,
            RegionName::ColludingInner => region_colluding_inner(p1.clone(), p2.clone())?,
            RegionName::Timesharing => {
                let ts = region_timesharing(p1.clone(), p2.clone())?;
                let inner = region_colluding_inner(p1.clone(), p2.clone())?;
                timesharing = Some(TimeSharingSummary {
                    hull_sum: ts.hull_sum.as_f64(),
                    inner_sum: inner.support(P::one(), P::one())?.as_f64(),
                });
                ts.hull
            }
        };
        regions.push(region.to_json()?);
    }
    let containment = if containment { Some(containment_report(p1, p2)?) } else { None };
    Ok(ClosedForm { regions, timesharing, containment })
}

const ALL_REGIONS: [RegionName; 5] = [
    RegionName::NoncolludingOuter,
    RegionName::NoncolludingCapacity,
    RegionName::ColludingOuter,
    RegionName::ColludingInner,
    RegionName::Timesharing,
];

pub fn region(args: RegionArgs) -> Result<Output, CliError> {
    let resolution = args.resolution.unwrap_or(1001);
    let format = args.format.unwrap_or_default();
    let channel = match &args.channel {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let spec: ChannelSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("channel file {}: {e}", path.display())))?;
            spec.pmf().map_err(rate_error)?;
            Some(spec)
        }
        None => None,
    };
    let probs = match (&args.p1, &args.p2) {
        (Some(a), Some(b)) => Some((a.clone(), b.clone())),
        (None, None) => None,
        _ => return Err(CliError::Validation("--p1 and --p2 go together".into())),
    };
    if probs.is_none() && channel.is_none() {
        return Err(CliError::Validation("give --p1/--p2 or --channel".into()));
    }
    let mut names: Vec<RegionName> = if args.all { ALL_REGIONS.to_vec() } else { args.region.clone() };
    if probs.is_some() && names.is_empty() && !args.check_containment {
        names = ALL_REGIONS.to_vec();
    }
    names.sort_by_key(|n| ALL_REGIONS.iter().position(|m| m == n));
    names.dedup();

    let exact = probs.as_ref().is_some_and(|(a, b)| a.is_fraction() || b.is_fraction());
    let closed = match &probs {
        Some((a, b)) if exact => closed_form(a.get::<Rational>(), b.get::<Rational>(), &names, args.check_containment),
        Some((a, b)) => closed_form(a.get::<f64>(), b.get::<f64>(), &names, args.check_containment),
        None => Ok(ClosedForm { regions: Vec::new(), timesharing: None, containment: None }),
    }
    .map_err(rate_error)?;

    let converses: Vec<Converse> = match (&channel, args.converse) {
        (None, _) => Vec::new(),
        (Some(_), Some(c)) => vec![c.into()],
        (Some(_), None) => vec![Converse::NonColluding, Converse::Colluding],
    };
    let mut general = Vec::new();
    if let Some(spec) = &channel {
        for &c in &converses {
            let bounds = general_upper_bounds(spec, resolution, c).map_err(rate_error)?;
            let region = bounds.region.to_json().map_err(rate_error)?;
            general.push(GeneralEntry { bounds, region });
        }
    }

    if let Some(rows) = &closed.containment {
        for c in rows {
            let status = if c.contained { "contained".to_string() } else { format!("NOT contained, vertices outside: {:?}", c.violations) };
            eprintln!("containment {} in {}: {status}", c.inner, c.outer);
        }
    }

    let report = RegionReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: ARTIFACT_VERSION.to_string(),
        config: RegionConfig {
            p: probs.as_ref().map(|(a, b)| [a.to_string(), b.to_string()]),
            regions: names,
            channel,
            converse: converses,
            resolution,
            check_containment: args.check_containment,
            format,
        },
        arithmetic: if exact { "rational" } else { "f64" },
        regions: closed.regions,
        timesharing: closed.timesharing,
        containment: closed.containment,
        general,
    };
    let body = match format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut all = report.regions.clone();
            all.extend(report.general.iter().map(|g| g.region.clone()));
            regions_csv(&all)
        }
    };
    Ok(Output { body, seed: None })
}
