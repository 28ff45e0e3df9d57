//! Swarm state: the multiset of peer profiles plus the implicit seed.
//!
//! The seed is never stored. It is added to the population counts by
//! [`Aggregates`], so `S` and every `S_i` include it unconditionally.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::chunks::{check_k, ChunkSet};
use crate::error::{Error, Result};

/// Population counts derived from the profile multiset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Aggregates {
    k: usize,
    peers: u64,
    empty: u64,
    holders: Vec<u64>,
    missing_only: Vec<u64>,
    partial_lacking: Vec<u64>,
}

impl Aggregates {
    /// Aggregates of the seed-only swarm.
    pub fn seed_only(k: usize) -> Self {
        Aggregates {
            k,
            peers: 1,
            empty: 0,
            holders: vec![1; k],
            missing_only: vec![0; k],
            partial_lacking: vec![0; k],
        }
    }

    pub fn from_profiles<'a, I>(k: usize, profiles: I) -> Self
    where
        I: IntoIterator<Item = (&'a ChunkSet, &'a u64)>,
    {
        let mut agg = Self::seed_only(k);
        for (&p, &n) in profiles {
            agg.add(p, n);
        }
        agg
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `S`: all peers including the seed.
    pub fn peers(&self) -> u64 {
        self.peers
    }

    /// `S - 1`: peers other than the seed.
    pub fn non_seed(&self) -> u64 {
        self.peers - 1
    }

    /// `S_0`: peers holding no chunk.
    pub fn empty(&self) -> u64 {
        self.empty
    }

    /// `S_i`: holders of chunk `i`, seed included.
    pub fn holders(&self, chunk: usize) -> u64 {
        self.holders[chunk]
    }

    pub fn holders_all(&self) -> &[u64] {
        &self.holders
    }

    pub fn min_holders(&self) -> u64 {
        self.holders.iter().copied().min().unwrap_or(0)
    }

    /// `S̄_i = S - S_i`.
    pub fn lacking(&self, chunk: usize) -> u64 {
        self.peers - self.holders[chunk]
    }

    /// `T̄_i`: peers missing only chunk `i`.
    pub fn missing_only(&self, chunk: usize) -> u64 {
        self.missing_only[chunk]
    }

    /// `B̄_i`: peers lacking chunk `i` that hold between 1 and `k - 2` chunks.
    pub fn partial_lacking(&self, chunk: usize) -> u64 {
        self.partial_lacking[chunk]
    }

    /// Aggregates after one transition, without touching any profile map.
    pub fn after(&self, kind: &TransitionKind) -> Self {
        let mut next = self.clone();
        match *kind {
            TransitionKind::Arrival => next.add(ChunkSet::EMPTY, 1),
            TransitionKind::Download { profile, chunk } => {
                next.remove(profile, 1);
                next.add(profile.with(chunk), 1);
            }
            TransitionKind::Departure { profile } => next.remove(profile, 1),
        }
        next
    }

    fn add(&mut self, profile: ChunkSet, n: u64) {
        self.peers += n;
        self.shift(profile, n as i64);
    }

    fn remove(&mut self, profile: ChunkSet, n: u64) {
        self.peers -= n;
        self.shift(profile, -(n as i64));
    }

    fn shift(&mut self, profile: ChunkSet, delta: i64) {
        let bump = |v: &mut u64| *v = (*v as i64 + delta) as u64;
        let held = profile.len();
        if held == 0 {
            bump(&mut self.empty);
        }
        for chunk in 0..self.k {
            if profile.contains(chunk) {
                bump(&mut self.holders[chunk]);
            } else if held == self.k - 1 {
                bump(&mut self.missing_only[chunk]);
            } else if held >= 1 {
                bump(&mut self.partial_lacking[chunk]);
            }
        }
    }
}

/// One possible state change of the swarm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionKind {
    /// A new peer with no chunks joins.
    Arrival,
    /// A peer with `profile` obtains `chunk` and stays.
    Download { profile: ChunkSet, chunk: usize },
    /// A peer with `profile` (missing exactly one chunk) completes and leaves.
    Departure { profile: ChunkSet },
}

/// A generator-row entry: a transition out of the current state and its rate.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition<R = f64> {
    pub rate: R,
    pub kind: TransitionKind,
}

/// Multiset of peer profiles, with aggregates maintained incrementally.
#[derive(Clone)]
pub struct SwarmState {
    k: usize,
    profiles: BTreeMap<ChunkSet, u64>,
    agg: Aggregates,
}

impl SwarmState {
    pub fn new<I>(k: usize, profiles: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ChunkSet, u64)>,
    {
        check_k(k)?;
        let full = ChunkSet::full(k);
        let mut map = BTreeMap::new();
        for (profile, count) in profiles {
            if profile.bits() & !full.bits() != 0 {
                return Err(Error::ChunkOutOfRange {
                    chunk: 63 - profile.bits().leading_zeros() as usize,
                    k,
                });
            }
            if profile == full {
                return Err(Error::FullProfile(profile));
            }
            if count == 0 {
                return Err(Error::ZeroCount(profile));
            }
            if map.insert(profile, count).is_some() {
                return Err(Error::DuplicateProfile(profile));
            }
        }
        let agg = Aggregates::from_profiles(k, &map);
        Ok(SwarmState { k, profiles: map, agg })
    }

    pub fn seed_only(k: usize) -> Result<Self> {
        Self::new(k, [])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn aggregates(&self) -> &Aggregates {
        &self.agg
    }

    /// `S`, seed included.
    pub fn peers(&self) -> u64 {
        self.agg.peers
    }

    pub fn count(&self, profile: ChunkSet) -> u64 {
        self.profiles.get(&profile).copied().unwrap_or(0)
    }

    /// Distinct stored profiles and their counts, in mask order.
    pub fn profiles(&self) -> impl Iterator<Item = (ChunkSet, u64)> + '_ {
        self.profiles.iter().map(|(&p, &n)| (p, n))
    }

    pub fn distinct_profiles(&self) -> usize {
        self.profiles.len()
    }

    /// Aggregates recomputed from the profile map.
    pub fn recompute_aggregates(&self) -> Aggregates {
        Aggregates::from_profiles(self.k, &self.profiles)
    }

    pub fn validate(&self, kind: &TransitionKind) -> Result<()> {
        match *kind {
            TransitionKind::Arrival => Ok(()),
            TransitionKind::Download { profile, chunk } => {
                if chunk >= self.k {
                    return Err(Error::ChunkOutOfRange { chunk, k: self.k });
                }
                if profile.contains(chunk) {
                    return Err(Error::InvalidTransition(format!(
                        "chunk {chunk} already held by profile {profile}"
                    )));
                }
                if profile.with(chunk).is_full(self.k) {
                    return Err(Error::InvalidTransition(format!(
                        "download of {chunk} completes profile {profile}; use a departure"
                    )));
                }
                self.require_present(profile)
            }
            TransitionKind::Departure { profile } => {
                if profile.missing_one(self.k).is_none() {
                    return Err(Error::InvalidTransition(format!(
                        "departing profile {profile} does not hold k - 1 chunks"
                    )));
                }
                self.require_present(profile)
            }
        }
    }

    fn require_present(&self, profile: ChunkSet) -> Result<()> {
        if self.profiles.contains_key(&profile) {
            Ok(())
        } else {
            Err(Error::ProfileAbsent(profile))
        }
    }

    /// Applies a transition in place.
    pub fn apply_mut(&mut self, kind: &TransitionKind) -> Result<()> {
        self.validate(kind)?;
        match *kind {
            TransitionKind::Arrival => self.insert(ChunkSet::EMPTY),
            TransitionKind::Download { profile, chunk } => {
                self.take(profile);
                self.insert(profile.with(chunk));
            }
            TransitionKind::Departure { profile } => self.take(profile),
        }
        Ok(())
    }

    /// Returns the state after a transition.
    pub fn apply(&self, kind: &TransitionKind) -> Result<Self> {
        let mut next = self.clone();
        next.apply_mut(kind)?;
        Ok(next)
    }

    fn insert(&mut self, profile: ChunkSet) {
        *self.profiles.entry(profile).or_insert(0) += 1;
        self.agg.add(profile, 1);
    }

    fn take(&mut self, profile: ChunkSet) {
        let slot = self.profiles.get_mut(&profile).expect("validated");
        *slot -= 1;
        if *slot == 0 {
            self.profiles.remove(&profile);
        }
        self.agg.remove(profile, 1);
    }

    /// Relabels chunks by `chunk -> perm[chunk]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        SwarmState::new(self.k, self.profiles().map(|(p, n)| (p.permuted(perm), n)))
            .expect("permutation preserves validity")
    }

    pub fn to_snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            k: self.k,
            profiles: self.profiles().map(|(p, n)| (p.bits(), n)).collect(),
        }
    }

    pub fn from_snapshot(snapshot: &StateSnapshot) -> Result<Self> {
        check_k(snapshot.k)?;
        let profiles = snapshot
            .profiles
            .iter()
            .map(|&(bits, n)| Ok((ChunkSet::from_bits(bits, snapshot.k)?, n)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(snapshot.k, profiles)
    }
}

impl PartialEq for SwarmState {
    fn eq(&self, other: &Self) -> bool {
        self.profiles == other.profiles
    }
}

impl Eq for SwarmState {}

impl Hash for SwarmState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.profiles.hash(state);
    }
}

impl fmt::Debug for SwarmState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SwarmState")
            .field("k", &self.k)
            .field("profiles", &self.profiles)
            .finish()
    }
}

/// JSON form of a state: `{"k": 2, "profiles": [[bitmask, count], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSnapshot {
    pub k: usize,
    pub profiles: Vec<(u64, u64)>,
}

impl TryFrom<StateSnapshot> for SwarmState {
    type Error = Error;

    fn try_from(snapshot: StateSnapshot) -> Result<Self> {
        SwarmState::from_snapshot(&snapshot)
    }
}

impl From<&SwarmState> for StateSnapshot {
    fn from(state: &SwarmState) -> Self {
        state.to_snapshot()
    }
}
