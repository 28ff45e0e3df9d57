use num::BigRational;
use serde::Serialize;

use crate::analysis::rates::rate_profile;
use crate::analysis::Arithmetic;
use crate::error::{Error, Result};
use crate::rules::Rule;
use crate::scalar::Scalar;
use crate::state::SwarmState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    /// `r ≥ S·r₀² / (6k²)`.
    One,
    /// `r ≥ min_i S_i / (2k³)` for `S ≥ 12`.
    Two,
}

impl Lemma {
    /// Smallest population the bound is claimed for.
    pub fn min_peers(self) -> u64 {
        match self {
            Lemma::One => 0,
            Lemma::Two => 12,
        }
    }
}

/// Outcome of a lower-bound check on the total download rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub rate: f64,
    pub bound: f64,
    /// `rate − bound`.
    pub margin: f64,
    /// Sign of the margin, decided in the arithmetic used.
    pub holds: bool,
}

pub fn check_lemma1(state: &SwarmState, rule: Rule) -> Result<LemmaCheck> {
    check_lemma1_with(state, rule, Arithmetic::default())
}

pub fn check_lemma2(state: &SwarmState, rule: Rule) -> Result<LemmaCheck> {
    check_lemma2_with(state, rule, Arithmetic::default())
}

pub fn check_lemma1_with(state: &SwarmState, rule: Rule, arithmetic: Arithmetic) -> Result<LemmaCheck> {
    check(state, rule, Lemma::One, arithmetic)
}

pub fn check_lemma2_with(state: &SwarmState, rule: Rule, arithmetic: Arithmetic) -> Result<LemmaCheck> {
    check(state, rule, Lemma::Two, arithmetic)
}

pub(crate) fn check(state: &SwarmState, rule: Rule, lemma: Lemma, arithmetic: Arithmetic) -> Result<LemmaCheck> {
    if rule != Rule::BASE {
        return Err(Error::Precondition(format!(
            "rate lemmas hold for common-chunk(m=3) only, got {rule}"
        )));
    }
    if state.peers() < lemma.min_peers() {
        return Err(Error::Precondition(format!(
            "lemma requires S >= {}, got S = {}",
            lemma.min_peers(),
            state.peers()
        )));
    }
    if arithmetic.exact_for(state.peers()) {
        margins::<BigRational>(state, rule, lemma)
    } else {
        margins::<f64>(state, rule, lemma)
    }
}

fn margins<F: Scalar>(state: &SwarmState, rule: Rule, lemma: Lemma) -> Result<LemmaCheck> {
    let rates = rate_profile::<F>(state, rule)?;
    let agg = state.aggregates();
    let k = F::from_u64(state.k() as u64);
    let bound = match lemma {
        Lemma::One => {
            let r0 = rates.empty_total.clone();
            F::from_u64(agg.peers()) * r0.clone() * r0 / (F::from_u64(6) * k.clone() * k)
        }
        Lemma::Two => F::from_u64(agg.min_holders()) / (F::from_u64(2) * k.clone() * k.clone() * k),
    };
    let margin = rates.total.clone() - bound.clone();
    Ok(LemmaCheck {
        rate: rates.total.to_f64(),
        bound: bound.to_f64(),
        margin: margin.to_f64(),
        holds: margin >= F::zero(),
    })
}
