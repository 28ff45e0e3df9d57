//! Simulation estimate of a drift, as a cross-check on the exact generator.
//!
//! One trial draws the next event out of the state exactly as the simulator
//! would and scores `(λ + N)·(L(after) − L(before))`. Its expectation is the
//! drift, since event `e` fires with probability `q_e / (λ + N)`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::LyapunovSpec;
use crate::chunks::ChunkSet;
use crate::error::{Error, Result};
use crate::rules::{add_counts, pick_uniform, Rule};
use crate::state::{SwarmState, TransitionKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftEstimate {
    pub estimate: f64,
    /// Standard error of the mean; zero for a single trial.
    pub std_error: f64,
    pub trials: u64,
}

pub fn monte_carlo_drift(
    state: &SwarmState,
    rule: Rule,
    lambda: f64,
    spec: LyapunovSpec,
    trials: u64,
    rng_seed: u64,
) -> Result<DriftEstimate> {
    rule.validate()?;
    spec.check(state.k())?;
    if trials == 0 {
        return Err(Error::Precondition("at least one trial is required".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Precondition(format!(
            "arrival rate must be positive, got {lambda}"
        )));
    }

    let k = state.k();
    let full = ChunkSet::full(k);
    let agg = state.aggregates();
    let base: f64 = spec.evaluate(agg)?;

    // Classes in a fixed order with the seed last; cumulative counts let one
    // uniform index pick an individual.
    let mut classes: Vec<ChunkSet> = Vec::new();
    let mut cumulative: Vec<u64> = Vec::new();
    let mut running = 0;
    for (p, n) in state.profiles() {
        running += n;
        classes.push(p);
        cumulative.push(running);
    }
    classes.push(full);
    cumulative.push(running + 1);
    let active = agg.non_seed();
    let population = agg.peers();
    let class_of = |i: u64| classes[cumulative.partition_point(|&c| c <= i)];

    let total_rate = lambda + active as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut cache: HashMap<TransitionKind, f64> = HashMap::new();
    let mut change = |kind: TransitionKind| -> Result<f64> {
        if let Some(&v) = cache.get(&kind) {
            return Ok(v);
        }
        let v = spec.evaluate::<f64>(&agg.after(&kind))? - base;
        cache.insert(kind, v);
        Ok(v)
    };

    let mut counts = vec![0u32; k];
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for n in 1..=trials {
        let kind = if rng.gen::<f64>() * total_rate < lambda {
            Some(TransitionKind::Arrival)
        } else {
            let own = class_of(rng.gen_range(0..active));
            counts.fill(0);
            for _ in 0..rule.sample_size(own, k) {
                add_counts(&mut counts, [class_of(rng.gen_range(0..population))]);
            }
            pick_uniform(rule.candidates(own, &counts, k), &mut rng).map(|chunk| {
                if own.with(chunk) == full {
                    TransitionKind::Departure { profile: own }
                } else {
                    TransitionKind::Download { profile: own, chunk }
                }
            })
        };
        let x = match kind {
            Some(kind) => total_rate * change(kind)?,
            None => 0.0,
        };
        let delta = x - mean;
        mean += delta / n as f64;
        m2 += delta * (x - mean);
    }

    let std_error = if trials > 1 {
        (m2 / (trials - 1) as f64 / trials as f64).sqrt()
    } else {
        0.0
    };
    Ok(DriftEstimate {
        estimate: mean,
        std_error,
        trials,
    })
}
