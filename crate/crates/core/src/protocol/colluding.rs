//! Protocol 2: sequential two-phase OT. The phase-one receiver draws
//! inflated sets and, when `p_i > 1/2`, a leftover-erasure set `S'` whose
//! bits Alice retransmits to the other receiver in phase two.

use serde::{Deserialize, Serialize};

use super::{
    aborted, alice_reply, diagnostics_for, finish_link, no_second_phase, select_subsets, validate_params, AliceView,
    BobView, Choices, LinkRecord, Messages, OtOutcome, Party, Payload, Plan, ProtocolError, ProtocolParams, Run,
    Transcript,
};
use crate::channel::{erasure_partition, transmit_tagged, BitVector, IndexSet, Receiver, Restrict};
use crate::randomness::{Draw, Phase, RandomSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Visibility {
    /// Only the addressed receiver observes the transmission.
    #[default]
    PointToPoint,
    /// Both receivers observe it through their own erasure channels.
    BroadcastBoth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct VisibilityModel {
    pub phase1: Visibility,
    pub phase2: Visibility,
}

impl VisibilityModel {
    pub fn broadcast() -> Self {
        Self { phase1: Visibility::BroadcastBoth, phase2: Visibility::BroadcastBoth }
    }
}

/// Validates `params` and runs Protocol 2 with phase one addressed to
/// `params.order`.
pub fn run_protocol2<S: RandomSource + ?Sized>(
    params: &ProtocolParams,
    messages: &Messages,
    choices: Choices,
    visibility: VisibilityModel,
    src: &mut S,
) -> Result<Run, ProtocolError> {
    let plan = validate_params(params)?;
    execute_protocol2(&plan, messages, choices, visibility, None, src)
}

/// Runs Protocol 2 on explicit sizes. `x` replaces Alice's input draw when
/// given.
pub fn execute_protocol2<S: RandomSource + ?Sized>(
    plan: &Plan,
    messages: &Messages,
    choices: Choices,
    visibility: VisibilityModel,
    x: Option<BitVector>,
    src: &mut S,
) -> Result<Run, ProtocolError> {
    messages.check(plan)?;
    let first = plan.order;
    let second = first.other();
    let mut transcript = Transcript::new();
    let mut observations = [None, None];
    let mut phase2_observations = [None, None];
    let mut drawn: [Vec<IndexSet>; 2] = [Vec::new(), Vec::new()];
    let mut links = Vec::new();
    let mut hashes = [None, None];

    // Step 1.
    let x = match x {
        Some(x) => x,
        None => BitVector::random(plan.n, src, Draw::Input),
    };
    for i in Receiver::BOTH {
        if i == first || visibility.phase1 == Visibility::BroadcastBoth {
            observations[i.index()] = Some(transmit_tagged(&x, plan.p(i), i, Phase::One, src)?);
        }
    }
    let y1 = observations[first.index()].clone().expect("addressed receiver observes");

    // Steps 2-3.
    let size1 = plan.set_size[first.index()];
    let mut diag1 = diagnostics_for(&y1, size1, 1);
    diag1.s_prime_size = Some(plan.s_prime);
    let (e, ebar) = erasure_partition(&y1);
    let tag = Draw::Subset { receiver: first, phase: Phase::One };
    let phase1 = select_subsets(&e, &ebar, choices.get(first), size1, src, tag).and_then(|pair| {
        let unchosen = if choices.get(first) { &pair.0 } else { &pair.1 };
        let leftover = e.difference(unchosen);
        if leftover.len() < plan.s_prime {
            return None;
        }
        let s_prime =
            if plan.s_prime > 0 { leftover.pick(&src.subset(tag, leftover.len(), plan.s_prime)) } else { IndexSet::empty() };
        Some((pair, s_prime))
    });

    let outcome1;
    let outcome2;
    let mut s_prime_record = None;
    match phase1 {
        None => {
            outcome1 = aborted(first, "too few erased or non-erased positions", diag1);
            let diag2 = super::Diagnostics { phase: 2, ..Default::default() };
            outcome2 = aborted(second, "phase one aborted", diag2);
        }
        Some((pair, s_prime)) => {
            drawn[first.index()] = vec![pair.0.clone(), pair.1.clone(), s_prime.clone()];
            transcript.push(Party::bob(first), first, Payload::IndexSets(vec![pair.0.clone(), pair.1.clone(), s_prime.clone()]));

            // Steps 4-5.
            let km = [x.restrict(&pair.0)?, x.restrict(&pair.1)?];
            let (h, digests, ciphertexts) = alice_reply(
                first,
                [&km[0], &km[1]],
                [messages.get(first, 0), messages.get(first, 1)],
                plan.key_len[first.index()],
                plan.verify_len[first.index()],
                &mut transcript,
                src,
            )?;
            outcome1 = finish_link(first, &y1, &pair, choices.get(first), &h, &digests, &ciphertexts, diag1);
            hashes[first.index()] = Some(h.clone());
            links.push(LinkRecord {
                receiver: first,
                phase: 1,
                key_sets: [pair.0.clone(), pair.1.clone()],
                hashes: h,
                digests,
                ciphertexts,
            });
            s_prime_record = Some(s_prime.clone());

            if s_prime.is_empty() {
                outcome2 = no_second_phase(second, super::Diagnostics { phase: 2, s_prime_size: Some(0), ..Default::default() });
            } else {
                // Step 6: X|S' over BEC(p_ī), positions re-indexed 0..|S'|.
                transcript.push(Party::Alice, second, Payload::PhaseMarker(2));
                let xs = x.restrict(&s_prime)?;
                for i in [second, first] {
                    if i == second || visibility.phase2 == Visibility::BroadcastBoth {
                        phase2_observations[i.index()] = Some(transmit_tagged(&xs, plan.p(i), i, Phase::Two, src)?);
                    }
                }
                let y2 = phase2_observations[second.index()].clone().expect("addressed receiver observes");

                // Steps 7-8.
                let size2 = plan.set_size[second.index()];
                let mut diag2 = diagnostics_for(&y2, size2, 2);
                diag2.s_prime_size = Some(s_prime.len());
                let (e2, ebar2) = erasure_partition(&y2);
                let tag2 = Draw::Subset { receiver: second, phase: Phase::Two };
                match select_subsets(&e2, &ebar2, choices.get(second), size2, src, tag2) {
                    None => outcome2 = aborted(second, "too few erased or non-erased positions", diag2),
                    Some(pair2) => {
                        drawn[second.index()] = vec![pair2.0.clone(), pair2.1.clone()];
                        transcript.push(Party::bob(second), second, Payload::IndexSets(vec![pair2.0.clone(), pair2.1.clone()]));
                        // Steps 9-10.
                        let km2 = [xs.restrict(&pair2.0)?, xs.restrict(&pair2.1)?];
                        let (h2, d2, c2) = alice_reply(
                            second,
                            [&km2[0], &km2[1]],
                            [messages.get(second, 0), messages.get(second, 1)],
                            plan.key_len[second.index()],
                            plan.verify_len[second.index()],
                            &mut transcript,
                            src,
                        )?;
                        outcome2 = finish_link(second, &y2, &pair2, choices.get(second), &h2, &d2, &c2, diag2);
                        hashes[second.index()] = Some(h2.clone());
                        links.push(LinkRecord {
                            receiver: second,
                            phase: 2,
                            key_sets: [s_prime.compose(&pair2.0)?, s_prime.compose(&pair2.1)?],
                            hashes: h2,
                            digests: d2,
                            ciphertexts: c2,
                        });
                    }
                }
            }
        }
    }

    let mut outcomes: [Option<OtOutcome>; 2] = [None, None];
    outcomes[first.index()] = Some(outcome1);
    outcomes[second.index()] = Some(outcome2);
    let bobs = Receiver::BOTH.map(|i| BobView {
        receiver: i,
        choice: choices.get(i),
        observation: observations[i.index()].clone(),
        phase2_observation: phase2_observations[i.index()].clone(),
        drawn_sets: drawn[i.index()].clone(),
        transcript: transcript.clone(),
    });
    Ok(Run {
        variant: plan.variant,
        outcomes: outcomes.map(|o| o.expect("both set")),
        alice: AliceView { messages: messages.clone(), x, hashes, transcript },
        bobs,
        choices,
        links,
        s_prime: s_prime_record,
        visibility,
    })
}

/// Cross-knowledge of one link's key material.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkMask {
    pub link: Receiver,
    pub phase: u8,
    /// The receiver whose knowledge is counted (the other one).
    pub observer: Receiver,
    pub set_size: usize,
    /// Positions of each label's key material the observer saw, `[label]`.
    pub known: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskAccounting {
    pub links: Vec<LinkMask>,
    /// Positions of `S'` the phase-one receiver saw in phase one.
    pub s_prime_known_in_phase1: Option<usize>,
}

/// For every executed link, how many key-material positions the opposite
/// receiver observed non-erased under the run's visibility model.
pub fn collusion_mask_accounting(run: &Run) -> MaskAccounting {
    let links = run
        .links
        .iter()
        .map(|link| {
            let observer = link.receiver.other();
            let known: Vec<usize> =
                run.bob(observer).known_positions(run.s_prime.as_ref()).into_iter().map(|(i, _)| i).collect();
            let count = |s: &IndexSet| s.indices().iter().filter(|i| known.binary_search(i).is_ok()).count();
            LinkMask {
                link: link.receiver,
                phase: link.phase,
                observer,
                set_size: link.key_sets[0].len(),
                known: [count(&link.key_sets[0]), count(&link.key_sets[1])],
            }
        })
        .collect();
    let s_prime_known_in_phase1 = run.s_prime.as_ref().map(|sp| {
        let y = run.bob(run_first(run)).observation.as_ref().expect("phase-one receiver observes");
        sp.indices().iter().filter(|&&i| !y.get(i).is_erased()).count()
    });
    MaskAccounting { links, s_prime_known_in_phase1 }
}

fn run_first(run: &Run) -> Receiver {
    run.links.iter().find(|l| l.phase == 1).map_or(Receiver::One, |l| l.receiver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Status, Variant};
    use crate::randomness::StreamedSource;

    fn params() -> ProtocolParams {
        ProtocolParams::symmetric(Variant::Colluding, 200, 0.7, 0.1, 0.05, 0.05)
    }

    fn run(vis: VisibilityModel, seed: u64, t: u64) -> Run {
        let plan = validate_params(&params()).unwrap();
        let mut src = StreamedSource::for_trial(seed, t);
        let m = Messages::random(&plan, &mut src);
        let z = Choices::random(&mut src);
        execute_protocol2(&plan, &m, z, vis, None, &mut src).unwrap()
    }

    #[test]
    fn honest_runs_decode_under_every_visibility() {
        let models = [
            VisibilityModel::default(),
            VisibilityModel::broadcast(),
            VisibilityModel { phase1: Visibility::BroadcastBoth, phase2: Visibility::PointToPoint },
        ];
        for vis in models {
            let mut completed = 0;
            for t in 0..100 {
                let r = run(vis, 3, t);
                for i in Receiver::BOTH {
                    if r.outcome(i).is_completed() {
                        completed += 1;
                        assert!(r.correct(i));
                    } else {
                        assert!(!matches!(r.outcome(i).status, Status::DecodeError(_)));
                    }
                }
            }
            assert!(completed > 150, "{completed}");
        }
    }

    #[test]
    fn set_disjointness() {
        for t in 0..100 {
            let r = run(VisibilityModel::default(), 4, t);
            let Some(sp) = &r.s_prime else { continue };
            let link = r.link(Receiver::One).unwrap();
            let z = r.choices.get(Receiver::One);
            let unchosen = &link.key_sets[!z as usize];
            let y = r.bob(Receiver::One).observation.as_ref().unwrap();
            let (e, _) = erasure_partition(y);
            assert!(sp.is_disjoint(unchosen));
            assert!(sp.is_subset(&e.difference(unchosen)));
            assert_eq!(sp.len(), 99);
        }
    }

    #[test]
    fn point_to_point_has_no_cross_knowledge() {
        for t in 0..50 {
            let r = run(VisibilityModel::default(), 5, t);
            let acc = collusion_mask_accounting(&r);
            assert!(acc.links.iter().all(|l| l.known == [0, 0]));
            assert!(matches!(acc.s_prime_known_in_phase1, None | Some(0)));
        }
    }

    #[test]
    fn phase_two_depends_only_on_s_prime() {
        let plan = validate_params(&params()).unwrap();
        for t in 0..20 {
            let mut src = StreamedSource::for_trial(6, t);
            let m = Messages::random(&plan, &mut src);
            let z = Choices::random(&mut src);
            let base = execute_protocol2(&plan, &m, z, VisibilityModel::default(), None, &mut src.clone()).unwrap();
            let Some(sp) = base.s_prime.clone() else { continue };
            let link1 = base.link(Receiver::One).unwrap();
            // Flip every position outside S_0, S_1 and S'.
            let bits: Vec<bool> = base
                .alice
                .x
                .bits()
                .iter()
                .enumerate()
                .map(|(i, &b)| {
                    let used = sp.contains(i) || link1.key_sets.iter().any(|s| s.contains(i));
                    if used { b } else { !b }
                })
                .collect();
            let scrambled =
                execute_protocol2(&plan, &m, z, VisibilityModel::default(), Some(BitVector::new(bits)), &mut src.clone())
                    .unwrap();
            assert_eq!(base.transcript().phase(2), scrambled.transcript().phase(2));
            assert_eq!(base.outcome(Receiver::Two), scrambled.outcome(Receiver::Two));
        }
    }

    #[test]
    fn low_erasure_first_receiver_skips_phase_two() {
        let mut p = params();
        p.p1 = 0.4;
        p.r1 = 0.05;
        p.r2 = 0.05;
        p.lambda = 0.01;
        p.lambda_prime = 0.02;
        p.s1 = 0.01;
        p.s2 = 0.01;
        let plan = validate_params(&p).unwrap();
        let mut src = StreamedSource::new(8);
        let m = Messages::random(&plan, &mut src);
        let r = execute_protocol2(&plan, &m, Choices([true, true]), VisibilityModel::default(), None, &mut src).unwrap();
        assert_eq!(r.outcome(Receiver::Two).status, Status::NoSecondPhase);
        assert!(r.transcript().phase(2).is_empty());
    }

    #[test]
    fn phase_two_nonerased_count_is_binomial() {
        let trials = 400;
        let mut total = 0.0;
        let mut count = 0;
        for t in 0..trials {
            let r = run(VisibilityModel::default(), 7, t);
            if let Some(y) = &r.bob(Receiver::Two).phase2_observation {
                total += crate::channel::erasure_count(y).1 as f64;
                count += 1;
            }
        }
        let mean = total / count as f64;
        let expected = 0.3 * 99.0;
        let sigma = (99.0 * 0.3 * 0.7 / count as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * sigma, "{mean} vs {expected}");
    }

    #[test]
    fn broadcast_phase_one_leaks_about_half() {
        let vis = VisibilityModel { phase1: Visibility::BroadcastBoth, phase2: Visibility::PointToPoint };
        let p = ProtocolParams { p2: 0.5, r1: 0.05, r2: 0.05, lambda: 0.02, lambda_prime: 0.02, s1: 0.01, s2: 0.01, ..params() };
        let plan = validate_params(&p).unwrap();
        let (mut known, mut size) = (0usize, 0usize);
        for t in 0..200 {
            let mut src = StreamedSource::for_trial(8, t);
            let m = Messages::random(&plan, &mut src);
            let z = Choices::random(&mut src);
            let r = execute_protocol2(&plan, &m, z, vis, None, &mut src).unwrap();
            let acc = collusion_mask_accounting(&r);
            if let Some(l) = acc.links.iter().find(|l| l.link == Receiver::One) {
                let zbar = !r.choices.get(Receiver::One) as usize;
                known += l.known[zbar];
                size += l.set_size;
            }
        }
        let rate = known as f64 / size as f64;
        let sigma = (0.25 / size as f64).sqrt();
        assert!((rate - 0.5).abs() < 3.0 * sigma, "{rate}");
    }
}
