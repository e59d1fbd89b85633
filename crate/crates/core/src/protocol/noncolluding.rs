//! Protocol 1: one broadcast of `X^n`, then both OT links in parallel.

use rayon::prelude::*;
use serde::Serialize;

use super::{
    aborted, alice_reply, diagnostics_for, finish_link, validate_params, AliceView, BobView, Choices, LinkRecord,
    Messages, OtOutcome, Party, Payload, Plan, ProtocolError, ProtocolParams, Run, Transcript, Visibility,
    VisibilityModel,
};
use crate::channel::{erasure_partition, BitVector, IndexSet, ObservationVector, Receiver, Restrict};
use crate::channel::transmit_tagged;
use crate::randomness::{Draw, Phase, RandomSource, StreamedSource};
use crate::stats::{wilson_interval, Interval};

/// Validates `params` and runs Protocol 1.
pub fn run_protocol1<S: RandomSource + ?Sized>(
    params: &ProtocolParams,
    messages: &Messages,
    choices: Choices,
    src: &mut S,
) -> Result<Run, ProtocolError> {
    let plan = validate_params(params)?;
    execute_protocol1(&plan, messages, choices, src)
}

/// Runs Protocol 1 on explicit sizes.
pub fn execute_protocol1<S: RandomSource + ?Sized>(
    plan: &Plan,
    messages: &Messages,
    choices: Choices,
    src: &mut S,
) -> Result<Run, ProtocolError> {
    messages.check(plan)?;
    let mut transcript = Transcript::new();

    // Step 1: one use of the broadcast channel.
    let x = BitVector::random(plan.n, src, Draw::Input);
    let ys: [ObservationVector; 2] = [
        transmit_tagged(&x, plan.p(Receiver::One), Receiver::One, Phase::One, src)?,
        transmit_tagged(&x, plan.p(Receiver::Two), Receiver::Two, Phase::One, src)?,
    ];

    // Steps 2-3: partition, abort check, label-indexed sets.
    let mut sets: [Option<(IndexSet, IndexSet)>; 2] = [None, None];
    for i in Receiver::BOTH {
        let (e, ebar) = erasure_partition(&ys[i.index()]);
        let tag = Draw::Subset { receiver: i, phase: Phase::One };
        if let Some(pair) = super::select_subsets(&e, &ebar, choices.get(i), plan.set_size[i.index()], src, tag) {
            transcript.push(Party::bob(i), i, Payload::IndexSets(vec![pair.0.clone(), pair.1.clone()]));
            sets[i.index()] = Some(pair);
        }
    }

    // Step 4: Alice answers every link that published sets.
    let mut links = Vec::new();
    let mut hashes = [None, None];
    for i in Receiver::BOTH {
        let Some((s0, s1)) = &sets[i.index()] else { continue };
        let km = [x.restrict(s0)?, x.restrict(s1)?];
        let (h, digests, ciphertexts) = alice_reply(
            i,
            [&km[0], &km[1]],
            [messages.get(i, 0), messages.get(i, 1)],
            plan.key_len[i.index()],
            plan.verify_len[i.index()],
            &mut transcript,
            src,
        )?;
        hashes[i.index()] = Some(h.clone());
        links.push(LinkRecord {
            receiver: i,
            phase: 1,
            key_sets: [s0.clone(), s1.clone()],
            hashes: h,
            digests,
            ciphertexts,
        });
    }

    // Step 5: decoding.
    let outcomes: [OtOutcome; 2] = Receiver::BOTH.map(|i| {
        let y = &ys[i.index()];
        let diag = diagnostics_for(y, plan.set_size[i.index()], 1);
        match (&sets[i.index()], links.iter().find(|l| l.receiver == i)) {
            (Some(pair), Some(link)) => {
                finish_link(i, y, pair, choices.get(i), &link.hashes, &link.digests, &link.ciphertexts, diag)
            }
            _ => aborted(i, "too few erased or non-erased positions", diag),
        }
    });

    let bobs = Receiver::BOTH.map(|i| BobView {
        receiver: i,
        choice: choices.get(i),
        observation: Some(ys[i.index()].clone()),
        phase2_observation: None,
        drawn_sets: sets[i.index()].as_ref().map(|(a, b)| vec![a.clone(), b.clone()]).unwrap_or_default(),
        transcript: transcript.clone(),
    });
    Ok(Run {
        variant: plan.variant,
        outcomes,
        alice: AliceView { messages: messages.clone(), x, hashes, transcript },
        bobs,
        choices,
        links,
        s_prime: None,
        visibility: VisibilityModel { phase1: Visibility::BroadcastBoth, phase2: Visibility::PointToPoint },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AbortEstimate {
    pub trials: u64,
    /// Per-receiver abort counts.
    pub aborts: [u64; 2],
    /// Bob-1's abort frequency.
    pub estimate: f64,
    pub ci: Interval,
    /// Frequency of at least one receiver aborting.
    pub any_estimate: f64,
}

/// Monte Carlo abort frequency. Trial `t` uses the same derived seed for
/// every parameter set, so ladders over `n` share random numbers.
pub fn abort_probability(params: &ProtocolParams, trials: u64, seed: u64) -> Result<AbortEstimate, ProtocolError> {
    let plan = validate_params(params)?;
    let flags: Vec<[bool; 2]> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut src = StreamedSource::for_trial(seed, t);
            let messages = Messages::random(&plan, &mut src);
            let choices = Choices::random(&mut src);
            let run = execute_protocol1(&plan, &messages, choices, &mut src).expect("validated plan");
            Receiver::BOTH.map(|i| run.outcome(i).is_aborted())
        })
        .collect();
    let a1 = flags.iter().filter(|f| f[0]).count() as u64;
    let a2 = flags.iter().filter(|f| f[1]).count() as u64;
    let any = flags.iter().filter(|f| f[0] || f[1]).count() as u64;
    Ok(AbortEstimate {
        trials,
        aborts: [a1, a2],
        estimate: a1 as f64 / trials.max(1) as f64,
        ci: wilson_interval(a1, trials),
        any_estimate: any as f64 / trials.max(1) as f64,
    })
}
