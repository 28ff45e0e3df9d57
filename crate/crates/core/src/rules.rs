//! Chunk-selection rules.
//!
//! Every rule is a function of the sampling peer's own profile and the
//! multiset of sampled profiles. Counting uses draw multiplicity: a peer
//! drawn twice contributes twice. Ties are broken uniformly.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chunks::ChunkSet;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Rule {
    /// Empty peers take a rare match out of 3 draws, partial peers take any
    /// match out of 1 draw, near-complete peers draw `m` and leave only when
    /// every owned chunk shows up at least twice. `m = 3` is the base protocol.
    CommonChunk { m: usize },
    /// Every peer draws 3 and downloads only a rare match.
    RareChunk,
    /// Every peer draws 1 and downloads any match.
    RandomMatch,
}

impl Rule {
    pub const BASE: Rule = Rule::CommonChunk { m: 3 };

    pub fn common_chunk(m: usize) -> Result<Self> {
        let rule = Rule::CommonChunk { m };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Rule::CommonChunk { m } if m < 3 => Err(Error::InvalidRule(format!(
                "common-chunk sample size m must be at least 3, got {m}"
            ))),
            _ => Ok(()),
        }
    }

    /// Name usable as a directory or file stem.
    pub fn label(&self) -> String {
        match self {
            Rule::CommonChunk { m } => format!("common-chunk-m{m}"),
            Rule::RareChunk => "rare-chunk".into(),
            Rule::RandomMatch => "random-match".into(),
        }
    }

    /// Number of draws a peer with `profile` takes per sampling event.
    pub fn sample_size(&self, profile: ChunkSet, k: usize) -> usize {
        match *self {
            Rule::CommonChunk { m } => match profile.len() {
                0 => 3,
                n if n + 1 == k => m,
                _ => 1,
            },
            Rule::RareChunk => 3,
            Rule::RandomMatch => 1,
        }
    }

    /// Chunks the peer may download given per-chunk occurrence counts in its
    /// sample; one of them is picked uniformly. Empty means skip.
    pub fn candidates(&self, profile: ChunkSet, counts: &[u32], k: usize) -> ChunkSet {
        debug_assert_eq!(counts.len(), k);
        let pick = |keep: &dyn Fn(u32) -> bool| {
            (0..k)
                .filter(|&c| !profile.contains(c) && keep(counts[c]))
                .fold(ChunkSet::EMPTY, ChunkSet::with)
        };
        match *self {
            Rule::CommonChunk { .. } => match profile.missing_one(k) {
                Some(missing) => {
                    let majority = profile.iter().all(|c| counts[c] >= 2);
                    if majority && counts[missing] >= 1 {
                        ChunkSet::EMPTY.with(missing)
                    } else {
                        ChunkSet::EMPTY
                    }
                }
                None if profile.is_empty() => pick(&|n| n == 1),
                None => pick(&|n| n >= 1),
            },
            Rule::RareChunk => pick(&|n| n == 1),
            Rule::RandomMatch => pick(&|n| n >= 1),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::CommonChunk { m } => write!(f, "common-chunk(m={m})"),
            Rule::RareChunk => f.write_str("rare-chunk"),
            Rule::RandomMatch => f.write_str("random-match"),
        }
    }
}

/// Per-chunk count of draws whose profile holds that chunk.
pub fn chunk_counts(sample: &[ChunkSet], k: usize) -> Vec<u32> {
    let mut counts = vec![0; k];
    add_counts(&mut counts, sample.iter().copied());
    counts
}

pub(crate) fn add_counts<I: IntoIterator<Item = ChunkSet>>(counts: &mut [u32], draws: I) {
    for draw in draws {
        for c in draw.iter() {
            counts[c] += 1;
        }
    }
}

/// Outcome distribution of one sampling event for a fixed sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision<F = f64> {
    /// Probability of downloading each chunk.
    pub chunks: Vec<F>,
    /// Probability of skipping.
    pub none: F,
}

impl<F: Clone + num::Zero + std::ops::Add<Output = F>> Decision<F> {
    /// Total download probability.
    pub fn download_mass(&self) -> F {
        self.chunks.iter().cloned().fold(F::zero(), |a, b| a + b)
    }
}

fn check_sample(profile: ChunkSet, sample: &[ChunkSet], rule: Rule, k: usize) -> Result<()> {
    rule.validate()?;
    if profile.is_full(k) {
        return Err(Error::FullProfile(profile));
    }
    let full = ChunkSet::full(k).bits();
    if let Some(bad) = std::iter::once(&profile).chain(sample).find(|p| p.bits() & !full != 0) {
        return Err(Error::ChunkOutOfRange {
            chunk: 63 - bad.bits().leading_zeros() as usize,
            k,
        });
    }
    let expected = rule.sample_size(profile, k);
    if sample.len() != expected {
        return Err(Error::SampleSizeMismatch {
            expected,
            got: sample.len(),
        });
    }
    Ok(())
}

/// Exact outcome distribution for a fixed sample.
pub fn decide(profile: ChunkSet, sample: &[ChunkSet], rule: Rule, k: usize) -> Result<Decision> {
    check_sample(profile, sample, rule, k)?;
    let options = rule.candidates(profile, &chunk_counts(sample, k), k);
    let mut chunks = vec![0.0; k];
    if options.is_empty() {
        return Ok(Decision { chunks, none: 1.0 });
    }
    let share = 1.0 / options.len() as f64;
    for c in options.iter() {
        chunks[c] = share;
    }
    Ok(Decision { chunks, none: 0.0 })
}

/// Draws one outcome of [`decide`]. Randomness is consumed only for a tie.
pub fn decide_sampled<R: Rng + ?Sized>(
    profile: ChunkSet,
    sample: &[ChunkSet],
    rule: Rule,
    k: usize,
    rng: &mut R,
) -> Result<Option<usize>> {
    check_sample(profile, sample, rule, k)?;
    Ok(pick_uniform(rule.candidates(profile, &chunk_counts(sample, k), k), rng))
}

pub(crate) fn pick_uniform<R: Rng + ?Sized>(options: ChunkSet, rng: &mut R) -> Option<usize> {
    match options.len() {
        0 => None,
        1 => options.nth(0),
        n => options.nth(rng.gen_range(0..n)),
    }
}
