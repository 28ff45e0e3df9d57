use num::integer::Integer;

use crate::chunks::ChunkSet;
use crate::error::{Error, Result};
use crate::rules::{Decision, Rule};
use crate::scalar::Scalar;
use crate::state::{SwarmState, Transition, TransitionKind};

/// Largest sample size the exact enumeration accepts.
pub const MAX_EXACT_DRAWS: usize = 6;
/// Largest `d^m` (classes to the power of draws) the exact enumeration accepts.
pub const MAX_EXACT_OUTCOMES: u64 = 10_000_000;

/// Per-state download intensities. Each peer samples at rate 1, so a per-peer
/// probability per sampling event is also a per-peer rate.
#[derive(Clone, Debug, PartialEq)]
pub struct RateProfile<F = f64> {
    /// `r`: total download rate of the swarm.
    pub total: F,
    /// `r_0 = Σ_i dS_i^+`.
    pub empty_total: F,
    /// `dS_i^+`: rate at which one empty peer downloads chunk `i`. Zero when
    /// there are no empty peers.
    pub empty_rates: Vec<F>,
    /// `dS̄_i^-`: rate at which one peer missing only chunk `i` completes.
    /// Computed against the current population even when no such peer exists.
    pub departure_rates: Vec<F>,
    /// `(profile, count, per-peer download probability)` for every stored class.
    pub class_rates: Vec<(ChunkSet, u64, F)>,
    pub has_empty_peers: bool,
}

/// Exact outcome distribution of one sampling event by a peer with `profile`,
/// drawing with replacement from the `S` members of `state` (seed included).
pub fn download_distribution<F: Scalar>(state: &SwarmState, profile: ChunkSet, rule: Rule) -> Result<Decision<F>> {
    rule.validate()?;
    let k = state.k();
    let full = ChunkSet::full(k);
    if profile.bits() & !full.bits() != 0 {
        return Err(Error::ChunkOutOfRange {
            chunk: 63 - profile.bits().leading_zeros() as usize,
            k,
        });
    }
    if profile == full {
        return Err(Error::FullProfile(profile));
    }

    let draws = rule.sample_size(profile, k);
    let mut classes: Vec<(ChunkSet, u64)> = state.profiles().collect();
    classes.push((full, 1));
    let outcomes = (classes.len() as u64).checked_pow(draws as u32);
    if draws > MAX_EXACT_DRAWS || outcomes.is_none_or(|n| n > MAX_EXACT_OUTCOMES) {
        return Err(Error::EnumerationBound {
            classes: classes.len(),
            draws,
            max_draws: MAX_EXACT_DRAWS,
            max_outcomes: MAX_EXACT_OUTCOMES,
        });
    }

    // Common denominator S^m · lcm(1..=#missing) keeps every tie-broken share integral.
    let overflow = || Error::ArithmeticOverflow(state.peers());
    let tie_lcm = (1..=(k - profile.len()) as u128).fold(1u128, |acc, n| acc.lcm(&n));
    let den = (state.peers() as u128)
        .checked_pow(draws as u32)
        .and_then(|p| p.checked_mul(tie_lcm))
        .ok_or_else(overflow)?;

    let mut walk = Enumeration {
        profile,
        rule,
        k,
        classes: &classes,
        tie_lcm,
        counts: vec![0; k],
        numerators: vec![0; k],
    };
    walk.visit(0, draws, 1).ok_or_else(overflow)?;

    let downloaded: u128 = walk.numerators.iter().sum();
    Ok(Decision {
        chunks: walk.numerators.iter().map(|&n| F::from_ratio(n, den)).collect(),
        none: F::from_ratio(den - downloaded, den),
    })
}

struct Enumeration<'a> {
    profile: ChunkSet,
    rule: Rule,
    k: usize,
    classes: &'a [(ChunkSet, u64)],
    tie_lcm: u128,
    counts: Vec<u32>,
    numerators: Vec<u128>,
}

impl Enumeration<'_> {
    /// Distributes `left` draws over classes `idx..`. `weight` is the running
    /// product of `C(r, n_j) · c_j^{n_j}` over classes already assigned.
    fn visit(&mut self, idx: usize, left: usize, weight: u128) -> Option<()> {
        if left == 0 {
            return self.score(weight);
        }
        let (class, count) = self.classes[idx];
        if idx + 1 == self.classes.len() {
            let weight = weight.checked_mul((count as u128).checked_pow(left as u32)?)?;
            self.bump(class, left as i64);
            let scored = self.score(weight);
            self.bump(class, -(left as i64));
            return scored;
        }
        let mut binom = 1u128;
        let mut power = 1u128;
        for n in 0..=left {
            if n > 0 {
                binom = binom * (left - n + 1) as u128 / n as u128;
                power = power.checked_mul(count as u128)?;
                self.bump(class, 1);
            }
            self.visit(idx + 1, left - n, weight.checked_mul(binom)?.checked_mul(power)?)?;
        }
        self.bump(class, -(left as i64));
        Some(())
    }

    fn score(&mut self, weight: u128) -> Option<()> {
        let options = self.rule.candidates(self.profile, &self.counts, self.k);
        if !options.is_empty() {
            let share = weight.checked_mul(self.tie_lcm / options.len() as u128)?;
            for c in options.iter() {
                self.numerators[c] = self.numerators[c].checked_add(share)?;
            }
        }
        Some(())
    }

    fn bump(&mut self, class: ChunkSet, by: i64) {
        for c in class.iter() {
            self.counts[c] = (self.counts[c] as i64 + by) as u32;
        }
    }
}

pub(crate) fn class_decisions<F: Scalar>(state: &SwarmState, rule: Rule) -> Result<Vec<(ChunkSet, u64, Decision<F>)>> {
    state
        .profiles()
        .map(|(p, n)| Ok((p, n, download_distribution(state, p, rule)?)))
        .collect()
}

pub fn rate_profile<F: Scalar>(state: &SwarmState, rule: Rule) -> Result<RateProfile<F>> {
    let k = state.k();
    let decisions = class_decisions::<F>(state, rule)?;

    let mut total = F::zero();
    let mut class_rates = Vec::with_capacity(decisions.len());
    for (p, n, d) in &decisions {
        let mass = d.download_mass();
        total = total + F::from_u64(*n) * mass.clone();
        class_rates.push((*p, *n, mass));
    }

    let has_empty_peers = state.aggregates().empty() > 0;
    let empty_rates = match decisions.iter().find(|(p, _, _)| p.is_empty()) {
        Some((_, _, d)) => d.chunks.clone(),
        None => vec![F::zero(); k],
    };
    let empty_total = empty_rates.iter().cloned().fold(F::zero(), |a, b| a + b);

    let departure_rates = (0..k)
        .map(|i| {
            let near = ChunkSet::all_but(i, k)?;
            match decisions.iter().find(|(p, _, _)| *p == near) {
                Some((_, _, d)) => Ok(d.chunks[i].clone()),
                None => Ok(download_distribution::<F>(state, near, rule)?.chunks[i].clone()),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RateProfile {
        total,
        empty_total,
        empty_rates,
        departure_rates,
        class_rates,
        has_empty_peers,
    })
}

/// Non-zero entries of the generator row at `state`.
pub fn transitions<F: Scalar>(state: &SwarmState, rule: Rule, lambda: F) -> Result<Vec<Transition<F>>> {
    // also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(lambda > F::zero()) {
        return Err(Error::Precondition("arrival rate must be positive".into()));
    }
    let k = state.k();
    let mut out = vec![Transition {
        rate: lambda,
        kind: TransitionKind::Arrival,
    }];
    for (profile, count, decision) in class_decisions::<F>(state, rule)? {
        for (chunk, p) in decision.chunks.into_iter().enumerate() {
            if p == F::zero() {
                continue;
            }
            let kind = if profile.with(chunk).is_full(k) {
                TransitionKind::Departure { profile }
            } else {
                TransitionKind::Download { profile, chunk }
            };
            out.push(Transition {
                rate: F::from_u64(count) * p,
                kind,
            });
        }
    }
    Ok(out)
}
