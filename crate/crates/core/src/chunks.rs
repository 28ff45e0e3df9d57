//! Chunk profiles as bit masks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported chunk count. One bit of the mask stays free so that the
/// full set is always representable without shifting past the word.
pub const MAX_CHUNKS: usize = 63;

/// A subset of the chunks `0..k`; bit `i` is set when chunk `i` is held.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChunkSet(u64);

impl ChunkSet {
    pub const EMPTY: ChunkSet = ChunkSet(0);

    /// The set of all `k` chunks (the seed's profile).
    pub fn full(k: usize) -> Self {
        debug_assert!(k <= MAX_CHUNKS);
        ChunkSet((1u64 << k) - 1)
    }

    pub fn from_bits(bits: u64, k: usize) -> Result<Self> {
        check_k(k)?;
        if bits >> k != 0 {
            return Err(Error::ChunkOutOfRange {
                chunk: 63 - bits.leading_zeros() as usize,
                k,
            });
        }
        Ok(ChunkSet(bits))
    }

    pub fn from_chunks<I: IntoIterator<Item = usize>>(chunks: I, k: usize) -> Result<Self> {
        check_k(k)?;
        let mut set = ChunkSet::EMPTY;
        for chunk in chunks {
            if chunk >= k {
                return Err(Error::ChunkOutOfRange { chunk, k });
            }
            set.0 |= 1 << chunk;
        }
        Ok(set)
    }

    /// Every chunk except `chunk`.
    pub fn all_but(chunk: usize, k: usize) -> Result<Self> {
        check_k(k)?;
        if chunk >= k {
            return Err(Error::ChunkOutOfRange { chunk, k });
        }
        Ok(ChunkSet(Self::full(k).0 & !(1 << chunk)))
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn contains(self, chunk: usize) -> bool {
        chunk < 64 && self.0 >> chunk & 1 == 1
    }

    #[inline]
    pub fn with(self, chunk: usize) -> Self {
        ChunkSet(self.0 | 1 << chunk)
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn is_full(self, k: usize) -> bool {
        self == Self::full(k)
    }

    /// The single missing chunk when the set holds exactly `k - 1` chunks.
    pub fn missing_one(self, k: usize) -> Option<usize> {
        let missing = Self::full(k).0 & !self.0;
        (missing.count_ones() == 1).then(|| missing.trailing_zeros() as usize)
    }

    /// Chunks in increasing index order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    /// The `n`-th member in increasing index order.
    pub fn nth(self, n: usize) -> Option<usize> {
        self.iter().nth(n)
    }

    /// Image of the set under a relabelling `chunk -> perm[chunk]`.
    pub fn permuted(self, perm: &[usize]) -> Self {
        ChunkSet(self.iter().fold(0, |acc, c| acc | 1 << perm[c]))
    }
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if (2..=MAX_CHUNKS).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidChunkCount { k, max: MAX_CHUNKS })
    }
}

impl fmt::Display for ChunkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, c) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for ChunkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChunkSet{self}")
    }
}
