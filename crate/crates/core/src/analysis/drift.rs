use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::analysis::rates::transitions;
use crate::analysis::{Arithmetic, LyapunovSpec};
use crate::error::{Error, Result};
use crate::rules::Rule;
use crate::scalar::Scalar;
use crate::state::{SwarmState, TransitionKind};

/// Drift split by the kind of transition that produces it.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftTerms<F> {
    pub arrival: F,
    pub download: F,
    pub departure: F,
}

impl<F: Scalar> DriftTerms<F> {
    pub fn total(&self) -> F {
        self.arrival.clone() + self.download.clone() + self.departure.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftBreakdown {
    pub arrival: f64,
    pub download: f64,
    pub departure: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftReport {
    /// `ΔL = Σ_{x'} q(x, x') (L(x') − L(x))`.
    pub value: f64,
    /// Distance below zero, `−value`.
    pub margin: f64,
    pub breakdown: DriftBreakdown,
}

/// Exact drift `Σ rate · (L(after) − L(before))` over the generator row.
pub fn drift_terms<F: Scalar>(state: &SwarmState, rule: Rule, lambda: F, spec: LyapunovSpec) -> Result<DriftTerms<F>> {
    let agg = state.aggregates();
    let base: F = spec.evaluate(agg)?;
    let mut terms = DriftTerms {
        arrival: F::zero(),
        download: F::zero(),
        departure: F::zero(),
    };
    for t in transitions(state, rule, lambda)? {
        let change = spec.evaluate::<F>(&agg.after(&t.kind))? - base.clone();
        let slot = match t.kind {
            TransitionKind::Arrival => &mut terms.arrival,
            TransitionKind::Download { .. } => &mut terms.download,
            TransitionKind::Departure { .. } => &mut terms.departure,
        };
        *slot = slot.clone() + t.rate * change;
    }
    Ok(terms)
}

/// Drift with the default arithmetic policy.
pub fn drift(state: &SwarmState, rule: Rule, lambda: f64, spec: LyapunovSpec) -> Result<DriftReport> {
    drift_with(state, rule, lambda, spec, Arithmetic::default())
}

pub fn drift_with(
    state: &SwarmState,
    rule: Rule,
    lambda: f64,
    spec: LyapunovSpec,
    arithmetic: Arithmetic,
) -> Result<DriftReport> {
    Ok(evaluate(state, rule, lambda, spec, arithmetic)?.0)
}

/// The report plus the sign of the drift, decided exactly when the
/// arithmetic is exact.
pub(crate) fn evaluate(
    state: &SwarmState,
    rule: Rule,
    lambda: f64,
    spec: LyapunovSpec,
    arithmetic: Arithmetic,
) -> Result<(DriftReport, bool)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Precondition(format!(
            "arrival rate must be positive, got {lambda}"
        )));
    }
    spec.check(state.k())?;
    if arithmetic == Arithmetic::Exact && !spec.is_polynomial() {
        return Err(Error::InexactSpec(spec.to_string()));
    }
    if spec.is_polynomial() && arithmetic.exact_for(state.peers()) {
        let terms = drift_terms::<BigRational>(state, rule, BigRational::from_f64(lambda), spec)?;
        let negative = terms.total() < BigRational::from_u64(0);
        Ok((report(&terms), negative))
    } else {
        let terms = drift_terms::<f64>(state, rule, lambda, spec)?;
        let negative = terms.total() < 0.0;
        Ok((report(&terms), negative))
    }
}

fn report<F: Scalar>(terms: &DriftTerms<F>) -> DriftReport {
    let value = terms.total().to_f64();
    DriftReport {
        value,
        margin: -value,
        breakdown: DriftBreakdown {
            arrival: terms.arrival.to_f64(),
            download: terms.download.to_f64(),
            departure: terms.departure.to_f64(),
        },
    }
}
