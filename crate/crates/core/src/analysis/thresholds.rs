//! Closed-form constants and population thresholds from the stability results.

use std::f64::consts::E;

use serde::Serialize;

/// `C = 108·e·k³`, the weight of `L₁` in the combined Lyapunov function.
pub fn constant_c(k: usize) -> f64 {
    108.0 * E * (k as f64).powi(3)
}

/// Population above which the combined Lyapunov function has negative drift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Threshold {
    Finite {
        value: f64,
    },
    /// Exceeds `f64::MAX`; `ln_value` is its natural log (possibly infinite).
    Unrepresentable {
        ln_value: f64,
    },
}

impl Threshold {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Threshold::Finite { value } => Some(value),
            Threshold::Unrepresentable { .. } => None,
        }
    }
}

/// `4Ck · exp(3Cλk² · exp(6λk⁴))`, evaluated in log space.
pub fn threshold_main(k: usize, lambda: f64) -> Threshold {
    let kf = k as f64;
    let c = constant_c(k);
    let ln_value = (4.0 * c * kf).ln() + 3.0 * c * lambda * kf * kf * (6.0 * lambda * kf.powi(4)).exp();
    if ln_value < f64::MAX.ln() {
        Threshold::Finite { value: ln_value.exp() }
    } else {
        Threshold::Unrepresentable { ln_value }
    }
}

/// `3k³`: above it the plain sum `L₁` has negative drift when `λ ≤ 1/(3k)`.
pub fn threshold_case1(k: usize) -> f64 {
    3.0 * (k as f64).powi(3)
}

/// `30λ(20λ + 1)²`: two-chunk threshold under the rare chunk rule.
pub fn threshold_two_chunk(lambda: f64) -> f64 {
    30.0 * lambda * (20.0 * lambda + 1.0).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_values() {
        assert!((constant_c(2) - 864.0 * E).abs() < 1e-9);
        assert!((constant_c(2) - 2348.6).abs() < 0.1);
        assert_eq!(threshold_case1(2), 24.0);
        assert!((threshold_two_chunk(0.1) - 27.0).abs() < 1e-12);
    }

    #[test]
    fn main_threshold_overflows_to_sentinel() {
        match threshold_main(2, 0.1) {
            Threshold::Unrepresentable { ln_value } => assert!(ln_value > 700.0),
            other => panic!("expected sentinel, got {other:?}"),
        }
        assert!(threshold_main(2, 0.1).value().is_none());
        // tiny λ keeps the exponent small enough to stay finite
        let tiny = threshold_main(2, 1e-9);
        assert!(tiny.value().unwrap() > 4.0 * constant_c(2) * 2.0);
    }
}
