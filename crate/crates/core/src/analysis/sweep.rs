//! State generators and sweeps that evaluate a check on many states.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{drift, lemmas, Arithmetic, Lemma, LyapunovSpec};
use crate::chunks::ChunkSet;
use crate::error::Result;
use crate::rules::Rule;
use crate::state::SwarmState;

/// Random states for property sweeps.
///
/// Total population `S` (seed included) is uniform over `peers`. Most states
/// assign each peer an independent Bernoulli(q) per chunk, with q uniform per
/// state; a share of states is replaced by imbalanced ones (every peer missing
/// the same chunk, every peer empty, or a mix of the two).
#[derive(Clone, Debug)]
pub struct StateSampler {
    pub chunk_counts: Vec<usize>,
    pub peers: RangeInclusive<u64>,
    pub adversarial_share: f64,
}

impl StateSampler {
    pub fn new(chunk_counts: Vec<usize>, peers: RangeInclusive<u64>) -> Self {
        assert!(!chunk_counts.is_empty(), "need at least one chunk count");
        assert!(*peers.start() >= 1, "the seed is always present");
        StateSampler {
            chunk_counts,
            peers,
            adversarial_share: 0.2,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SwarmState {
        let k = self.chunk_counts[rng.gen_range(0..self.chunk_counts.len())];
        let others = rng.gen_range(self.peers.clone()) - 1;
        let mut counts: BTreeMap<ChunkSet, u64> = BTreeMap::new();

        if others > 0 && rng.gen_bool(self.adversarial_share) {
            let near = ChunkSet::all_but(rng.gen_range(0..k), k).expect("valid chunk");
            let near_count = match rng.gen_range(0..3) {
                0 => others,
                1 => 0,
                _ => rng.gen_range(0..=others),
            };
            counts.insert(near, near_count);
            counts.insert(ChunkSet::EMPTY, others - near_count);
        } else {
            let q: f64 = rng.gen();
            let full = ChunkSet::full(k);
            for _ in 0..others {
                let profile = loop {
                    let p = (0..k).filter(|_| rng.gen_bool(q)).fold(ChunkSet::EMPTY, ChunkSet::with);
                    if p != full {
                        break p;
                    }
                };
                *counts.entry(profile).or_default() += 1;
            }
        }
        counts.retain(|_, n| *n > 0);
        SwarmState::new(k, counts).expect("sampler builds valid states")
    }

    /// `count` states from a ChaCha8 stream seeded with `seed`.
    pub fn generate(&self, count: usize, seed: u64) -> Vec<SwarmState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample(&mut rng)).collect()
    }
}

/// Every two-chunk state whose population `S` lies in `peers`.
pub fn two_chunk_states(peers: RangeInclusive<u64>) -> Vec<SwarmState> {
    let k = 2;
    let classes = [ChunkSet::EMPTY, ChunkSet::EMPTY.with(0), ChunkSet::EMPTY.with(1)];
    let mut out = Vec::new();
    for total in peers {
        let Some(others) = total.checked_sub(1) else {
            continue;
        };
        for a in 0..=others {
            for b in 0..=others - a {
                let c = others - a - b;
                let counts = classes.iter().copied().zip([a, b, c]).filter(|&(_, n)| n > 0);
                out.push(SwarmState::new(k, counts).expect("valid two-chunk state"));
            }
        }
    }
    out
}

/// A state that failed a check, with the checked quantity and its margin.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub state: SwarmState,
    pub value: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepReport {
    /// States that met the condition and were checked.
    pub evaluated: usize,
    /// States outside the condition.
    pub skipped: usize,
    pub violations: Vec<Violation>,
    /// Smallest margin over the evaluated states.
    pub min_margin: Option<f64>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn collect(outcomes: Vec<Option<(SwarmState, f64, f64, bool)>>) -> Self {
        let mut report = SweepReport::default();
        for outcome in outcomes {
            let Some((state, value, margin, ok)) = outcome else {
                report.skipped += 1;
                continue;
            };
            report.evaluated += 1;
            report.min_margin = Some(report.min_margin.map_or(margin, |m| m.min(margin)));
            if !ok {
                report.violations.push(Violation { state, value, margin });
            }
        }
        report
    }
}

/// Evaluates the drift at every state satisfying `condition` and records
/// those whose drift is not strictly negative.
pub fn check_drift_negative<P>(
    states: &[SwarmState],
    rule: Rule,
    lambda: f64,
    spec: LyapunovSpec,
    arithmetic: Arithmetic,
    condition: P,
) -> Result<SweepReport>
where
    P: Fn(&SwarmState) -> bool + Sync,
{
    let outcomes = states
        .par_iter()
        .map(|state| {
            if !condition(state) {
                return Ok(None);
            }
            let (report, negative) = drift::evaluate(state, rule, lambda, spec, arithmetic)?;
            Ok(Some((state.clone(), report.value, report.margin, negative)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::collect(outcomes))
}

/// Checks a rate lemma on every state; states below the lemma's population
/// floor are skipped.
pub fn check_lemma_sweep(
    states: &[SwarmState],
    rule: Rule,
    lemma: Lemma,
    arithmetic: Arithmetic,
) -> Result<SweepReport> {
    let outcomes = states
        .par_iter()
        .map(|state| {
            if state.peers() < lemma.min_peers() {
                return Ok(None);
            }
            let check = lemmas::check(state, rule, lemma, arithmetic)?;
            Ok(Some((state.clone(), check.rate, check.margin, check.holds)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::collect(outcomes))
}
