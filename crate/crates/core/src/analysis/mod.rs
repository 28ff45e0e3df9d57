//! Exact per-state analysis of the swarm's Markov chain.
//!
//! Download intensities are computed by enumerating every multiset of draws
//! over the distinct profile classes (the seed counts as one more class),
//! weighted by its multinomial probability. All downstream quantities (the
//! generator row, drifts, lemma margins) are built from those intensities.

mod drift;
mod lemmas;
mod lyapunov;
mod rates;
mod sweep;
mod thresholds;

pub use drift::{drift, drift_terms, drift_with, DriftBreakdown, DriftReport, DriftTerms};
pub use lemmas::{check_lemma1, check_lemma1_with, check_lemma2, check_lemma2_with, Lemma, LemmaCheck};
pub use lyapunov::{l2_component, lyapunov, LyapunovSpec};
pub use rates::{download_distribution, rate_profile, transitions, RateProfile, MAX_EXACT_DRAWS, MAX_EXACT_OUTCOMES};
pub use sweep::{check_drift_negative, check_lemma_sweep, two_chunk_states, StateSampler, SweepReport, Violation};
pub use thresholds::{constant_c, threshold_case1, threshold_main, threshold_two_chunk, Threshold};

/// Number type used for an analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Float,
    Exact,
    /// Exact rationals up to the given population `S`, floats above it.
    Auto {
        max_exact_population: u64,
    },
}

impl Default for Arithmetic {
    fn default() -> Self {
        Arithmetic::Auto {
            max_exact_population: 200,
        }
    }
}

impl Arithmetic {
    pub(crate) fn exact_for(self, peers: u64) -> bool {
        match self {
            Arithmetic::Float => false,
            Arithmetic::Exact => true,
            Arithmetic::Auto { max_exact_population } => peers <= max_exact_population,
        }
    }
}
