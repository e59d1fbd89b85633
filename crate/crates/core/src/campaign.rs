//! Monte Carlo trial farming and campaign reports.
//!
//! Trial `t` of a campaign seeded with `seed` draws all of its randomness
//! from `StreamedSource::for_trial(seed, t)`: messages, choices, the channel
//! and every party. Results are collected in trial order, so reports do not
//! depend on thread scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::Receiver;
use crate::protocol::{
    collusion_mask_accounting, execute, validate_params, Choices, Messages, Plan, ProtocolError, ProtocolParams,
    Run, Status, Variant, VisibilityModel,
};
use crate::randomness::{RandomSource, StreamedSource};
use crate::stats::{wilson_interval, Interval};

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One honest execution with messages and choices drawn from `src`.
pub fn drive<S: RandomSource + ?Sized>(plan: &Plan, visibility: VisibilityModel, src: &mut S) -> Run {
    let messages = Messages::random(plan, src);
    let choices = Choices::random(src);
    execute(plan, &messages, choices, visibility, src).expect("plan sizes are consistent")
}

/// Runs trial `trial` of a campaign seeded with `seed`.
pub fn run_trial(plan: &Plan, visibility: VisibilityModel, seed: u64, trial: u64) -> Run {
    drive(plan, visibility, &mut StreamedSource::for_trial(seed, trial))
}

/// Applies `f` to every trial in parallel; results come back in trial order.
pub fn map_trials<T, F>(plan: &Plan, visibility: VisibilityModel, trials: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &Run) -> T + Sync,
{
    (0..trials).into_par_iter().map(|t| f(t, &run_trial(plan, visibility, seed, t))).collect()
}

/// Keeps every run (the audit needs full records).
pub fn collect_runs(plan: &Plan, visibility: VisibilityModel, trials: u64, seed: u64) -> Vec<Run> {
    map_trials(plan, visibility, trials, seed, |_, r| r.clone())
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignConfig {
    pub params: ProtocolParams,
    pub visibility: VisibilityModel,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaskSummary {
    pub link: Receiver,
    pub observer: Receiver,
    /// Key positions of the unchosen label seen by the observer, summed over
    /// executed links.
    pub known_unchosen: u64,
    pub known_chosen: u64,
    pub positions: u64,
    pub unchosen_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Phase2Block {
    pub s_prime_size: usize,
    pub phase2_aborts: u64,
    pub no_second_phase: u64,
    /// Runs where the phase-one receiver saw any position of `S'` in phase
    /// one (always zero by construction).
    pub s_prime_seen_in_phase1: u64,
    pub mask_accounting: Vec<MaskSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub config: CampaignConfig,
    pub plan: Plan,
    pub trials: u64,
    /// Per receiver.
    pub aborts: [u64; 2],
    pub decode_errors: [u64; 2],
    pub completed: [u64; 2],
    pub correct: [u64; 2],
    /// Correct decodes over non-aborted trials, both receivers pooled.
    pub correctness_rate: Option<f64>,
    pub abort_rate: [f64; 2],
    pub abort_ci: [Interval; 2],
    pub mask_accounting: Vec<MaskSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase2: Option<Phase2Block>,
}

struct TrialSummary {
    aborted: [bool; 2],
    decode_error: [bool; 2],
    completed: [bool; 2],
    correct: [bool; 2],
    no_second_phase: [bool; 2],
    masks: Vec<(Receiver, Receiver, usize, usize, usize)>,
    s_prime_seen: bool,
}

fn summarize(run: &Run) -> TrialSummary {
    let acc = collusion_mask_accounting(run);
    TrialSummary {
        aborted: Receiver::BOTH.map(|i| run.outcome(i).is_aborted()),
        decode_error: Receiver::BOTH.map(|i| matches!(run.outcome(i).status, Status::DecodeError(_))),
        completed: Receiver::BOTH.map(|i| run.outcome(i).is_completed()),
        correct: Receiver::BOTH.map(|i| run.correct(i)),
        no_second_phase: Receiver::BOTH.map(|i| run.outcome(i).status == Status::NoSecondPhase),
        masks: acc
            .links
            .iter()
            .map(|l| {
                let zbar = !run.choices.get(l.link) as usize;
                (l.link, l.observer, l.known[zbar], l.known[1 - zbar], l.set_size)
            })
            .collect(),
        s_prime_seen: acc.s_prime_known_in_phase1.is_some_and(|k| k > 0),
    }
}

fn count(summaries: &[TrialSummary], f: impl Fn(&TrialSummary) -> [bool; 2]) -> [u64; 2] {
    let mut out = [0u64; 2];
    for s in summaries {
        let v = f(s);
        out[0] += v[0] as u64;
        out[1] += v[1] as u64;
    }
    out
}

/// Runs `trials` honest executions and aggregates outcomes.
pub fn run_campaign(
    params: &ProtocolParams,
    visibility: VisibilityModel,
    trials: u64,
    seed: u64,
) -> Result<CampaignReport, ProtocolError> {
    let plan = validate_params(params)?;
    let summaries = map_trials(&plan, visibility, trials, seed, |_, r| summarize(r));
    let aborts = count(&summaries, |s| s.aborted);
    let completed = count(&summaries, |s| s.completed);
    let correct = count(&summaries, |s| s.correct);
    let decode_errors = count(&summaries, |s| s.decode_error);
    let attempted = completed[0] + completed[1] + decode_errors[0] + decode_errors[1];
    let correctness_rate = (attempted > 0).then(|| (correct[0] + correct[1]) as f64 / attempted as f64);

    let mut mask_accounting = Vec::new();
    for link in Receiver::BOTH {
        let rows: Vec<_> = summaries.iter().flat_map(|s| s.masks.iter().filter(move |m| m.0 == link)).collect();
        if rows.is_empty() {
            continue;
        }
        let known_unchosen: u64 = rows.iter().map(|m| m.2 as u64).sum();
        let known_chosen: u64 = rows.iter().map(|m| m.3 as u64).sum();
        let positions: u64 = rows.iter().map(|m| m.4 as u64).sum();
        mask_accounting.push(MaskSummary {
            link,
            observer: link.other(),
            known_unchosen,
            known_chosen,
            positions,
            unchosen_rate: if positions == 0 { 0.0 } else { known_unchosen as f64 / positions as f64 },
        });
    }

    let phase2 = (params.variant == Variant::Colluding).then(|| {
        let second = plan.order.other();
        Phase2Block {
            s_prime_size: plan.s_prime,
            phase2_aborts: aborts[second.index()],
            no_second_phase: count(&summaries, |s| s.no_second_phase)[second.index()],
            s_prime_seen_in_phase1: summaries.iter().filter(|s| s.s_prime_seen).count() as u64,
            mask_accounting: mask_accounting.clone(),
        }
    });

    Ok(CampaignReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: ARTIFACT_VERSION.to_string(),
        config: CampaignConfig { params: params.clone(), visibility, trials, seed },
        plan,
        trials,
        aborts,
        decode_errors,
        completed,
        correct,
        correctness_rate,
        abort_rate: aborts.map(|a| a as f64 / trials.max(1) as f64),
        abort_ci: aborts.map(|a| wilson_interval(a, trials)),
        mask_accounting,
        phase2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_are_reproducible() {
        let p = ProtocolParams::symmetric(Variant::Noncolluding, 100, 0.5, 0.2, 0.05, 0.1);
        let a = serde_json::to_string(&run_campaign(&p, VisibilityModel::default(), 300, 7).unwrap()).unwrap();
        let b = serde_json::to_string(&run_campaign(&p, VisibilityModel::default(), 300, 7).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = serde_json::to_string(&run_campaign(&p, VisibilityModel::default(), 300, 8).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn campaign_counts_are_consistent() {
        let p = ProtocolParams::symmetric(Variant::Colluding, 200, 0.7, 0.1, 0.05, 0.05);
        let r = run_campaign(&p, VisibilityModel::default(), 200, 1).unwrap();
        for i in 0..2 {
            assert_eq!(r.correct[i], r.completed[i]);
        }
        assert_eq!(r.correctness_rate, Some(1.0));
        let phase2 = r.phase2.unwrap();
        assert_eq!(phase2.s_prime_size, 99);
        assert_eq!(phase2.s_prime_seen_in_phase1, 0);
        assert!(phase2.mask_accounting.iter().all(|m| m.known_unchosen == 0));
    }
}
