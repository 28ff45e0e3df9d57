//! Gillespie-style event loop.
//!
//! Each of the `N = S − 1` non-seed peers samples at rate 1 and new peers
//! arrive at rate λ, so the next event comes after an exponential time with
//! rate `λ + N`. A sampling peer draws uniformly with replacement from all
//! `S` members (itself and the seed included). The seed never samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chunks::ChunkSet;
use crate::error::Result;
use crate::rules::{add_counts, pick_uniform};
use crate::sim::config::{scenario, SimConfig};
use crate::state::{Aggregates, SwarmState, TransitionKind};

/// Snapshot of the aggregate counts at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub t: f64,
    /// `S`, seed included.
    pub peers: u64,
    /// `S_0`.
    pub empty: u64,
    /// `S_1 … S_k` (chunk index 0 first).
    pub holders: Vec<u64>,
    pub min_holders: u64,
    /// `Σ_i S̄_i`.
    pub l1: u64,
}

impl MetricsRow {
    pub fn from_aggregates(t: f64, agg: &Aggregates) -> Self {
        MetricsRow {
            t,
            peers: agg.peers(),
            empty: agg.empty(),
            holders: agg.holders_all().to_vec(),
            min_holders: agg.min_holders(),
            l1: (0..agg.k()).map(|i| agg.lacking(i)).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub k: usize,
    pub rows: Vec<MetricsRow>,
}

impl TimeSeries {
    /// Rows with `from <= t <= to`.
    pub fn window(&self, from: f64, to: f64) -> impl Iterator<Item = &MetricsRow> {
        self.rows.iter().filter(move |r| r.t >= from && r.t <= to)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sojourn {
    pub arrival: f64,
    pub departure: f64,
}

impl Sojourn {
    pub fn duration(&self) -> f64 {
        self.departure - self.arrival
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SojournLog {
    pub entries: Vec<Sojourn>,
}

impl SojournLog {
    pub fn mean(&self) -> Option<f64> {
        (!self.entries.is_empty())
            .then(|| self.entries.iter().map(Sojourn::duration).sum::<f64>() / self.entries.len() as f64)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventCounts {
    pub arrivals: u64,
    pub downloads: u64,
    pub departures: u64,
    /// Sampling events that ended without a download.
    pub idle: u64,
}

impl EventCounts {
    pub fn total(&self) -> u64 {
        self.arrivals + self.downloads + self.departures + self.idle
    }
}

#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub series: TimeSeries,
    pub sojourns: SojournLog,
    pub initial_state: SwarmState,
    pub final_state: SwarmState,
    pub events: EventCounts,
    /// Largest `S` reached at any instant.
    pub max_peers: u64,
    /// Time average of `N = S − 1` over the horizon.
    pub mean_sampling_peers: f64,
}

#[derive(Clone, Copy)]
struct Peer {
    profile: ChunkSet,
    arrived: f64,
}

pub fn run(config: &SimConfig) -> Result<SimOutcome> {
    config.validate()?;
    let k = config.k;
    let full = ChunkSet::full(k);
    let rule = config.rule;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let initial_state = scenario(config.initial, k)?;
    let mut state = initial_state.clone();
    let mut peers: Vec<Peer> = state
        .profiles()
        .flat_map(|(profile, n)| std::iter::repeat_n(Peer { profile, arrived: 0.0 }, n as usize))
        .collect();

    let snapshot_at = |i: u64| i as f64 * config.sample_interval;
    let mut rows = Vec::new();
    let mut next_snapshot = 0u64;
    let mut sojourns = SojournLog::default();
    let mut events = EventCounts::default();
    let mut max_peers = state.peers();
    let mut peer_time = 0.0;
    let mut counts = vec![0u32; k];
    let mut t = 0.0;

    loop {
        let active = peers.len();
        let total_rate = config.lambda + active as f64;
        let wait = -(1.0 - rng.gen::<f64>()).ln() / total_rate;
        let t_next = t + wait;

        while snapshot_at(next_snapshot) <= config.horizon.min(t_next) {
            rows.push(MetricsRow::from_aggregates(
                snapshot_at(next_snapshot),
                state.aggregates(),
            ));
            next_snapshot += 1;
        }
        if t_next > config.horizon {
            peer_time += active as f64 * (config.horizon - t);
            break;
        }
        peer_time += active as f64 * wait;
        t = t_next;

        if rng.gen::<f64>() * total_rate < config.lambda {
            peers.push(Peer {
                profile: ChunkSet::EMPTY,
                arrived: t,
            });
            state.apply_mut(&TransitionKind::Arrival)?;
            events.arrivals += 1;
            max_peers = max_peers.max(state.peers());
            continue;
        }

        let who = rng.gen_range(0..active);
        let own = peers[who].profile;
        counts.fill(0);
        for _ in 0..rule.sample_size(own, k) {
            let pick = rng.gen_range(0..=active);
            let drawn = if pick == active { full } else { peers[pick].profile };
            add_counts(&mut counts, [drawn]);
        }
        match pick_uniform(rule.candidates(own, &counts, k), &mut rng) {
            None => events.idle += 1,
            Some(chunk) if own.with(chunk) == full => {
                let gone = peers.swap_remove(who);
                sojourns.entries.push(Sojourn {
                    arrival: gone.arrived,
                    departure: t,
                });
                state.apply_mut(&TransitionKind::Departure { profile: own })?;
                events.departures += 1;
            }
            Some(chunk) => {
                peers[who].profile = own.with(chunk);
                state.apply_mut(&TransitionKind::Download { profile: own, chunk })?;
                events.downloads += 1;
            }
        }
    }

    if rows.last().is_none_or(|r| r.t < config.horizon) {
        rows.push(MetricsRow::from_aggregates(config.horizon, state.aggregates()));
    }

    Ok(SimOutcome {
        series: TimeSeries { k, rows },
        sojourns,
        initial_state,
        final_state: state,
        events,
        max_peers,
        mean_sampling_peers: peer_time / config.horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Rule;
    use crate::sim::config::InitialCondition;

    fn small(rule: Rule, seed: u64) -> SimConfig {
        SimConfig::new(3, 1.0, rule, 50.0, seed)
    }

    #[test]
    fn snapshots_cover_horizon() {
        let mut cfg = small(Rule::BASE, 1);
        cfg.sample_interval = 0.75;
        let out = run(&cfg).unwrap();
        let ts: Vec<f64> = out.series.rows.iter().map(|r| r.t).collect();
        assert_eq!(ts[0], 0.0);
        assert_eq!(*ts.last().unwrap(), 50.0);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(ts.len(), 67 + 1);
    }

    #[test]
    fn bookkeeping_balances() {
        for rule in [
            Rule::BASE,
            Rule::RareChunk,
            Rule::RandomMatch,
            Rule::CommonChunk { m: 5 },
        ] {
            let out = run(&small(rule, 9)).unwrap();
            let e = out.events;
            assert_eq!(e.departures as usize, out.sojourns.entries.len());
            assert_eq!(
                e.arrivals as i64 - e.departures as i64,
                out.final_state.peers() as i64 - out.initial_state.peers() as i64
            );
            assert!(out.sojourns.entries.iter().all(|s| s.departure > s.arrival));
            assert!(out.final_state.profiles().all(|(p, _)| !p.is_full(3)));
            assert_eq!(out.final_state.aggregates(), &out.final_state.recompute_aggregates());
            let last = out.series.rows.last().unwrap();
            assert_eq!(last, &MetricsRow::from_aggregates(50.0, out.final_state.aggregates()));
        }
    }

    #[test]
    fn same_seed_same_trajectory() {
        let a = run(&small(Rule::BASE, 5)).unwrap();
        let b = run(&small(Rule::BASE, 5)).unwrap();
        assert_eq!(a.series, b.series);
        assert_eq!(a.sojourns, b.sojourns);
        let c = run(&small(Rule::BASE, 6)).unwrap();
        assert_ne!(a.series, c.series);
    }

    #[test]
    fn imbalanced_start_has_arrival_time_zero() {
        let cfg = SimConfig::new(4, 0.5, Rule::RareChunk, 30.0, 2).with_initial(InitialCondition::Imbalanced {
            n: 10,
            missing_chunk: 1,
        });
        let out = run(&cfg).unwrap();
        assert_eq!(out.series.rows[0].peers, 11);
        assert_eq!(out.series.rows[0].holders[1], 1);
        assert!(out.sojourns.entries.iter().any(|s| s.arrival == 0.0));
    }
}
