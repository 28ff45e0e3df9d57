use std::fmt;

use crate::analysis::thresholds::constant_c;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::{Aggregates, SwarmState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LyapunovSpec {
    /// `L₁ = Σ_i S̄_i`.
    L1,
    /// `C·L₁ + Σ_i S/e^{S_i} + S/e^{S_0}`.
    Combined { c: f64 },
    /// `2(2S₀ + S₁ + S₂) + (S₁ − S₂)²`, two-chunk files only.
    TwoChunk,
}

impl LyapunovSpec {
    /// Combined function with `C = 108ek³`.
    pub fn combined(k: usize) -> Self {
        LyapunovSpec::Combined { c: constant_c(k) }
    }

    /// Parses `l1`, `two-chunk`, `combined` or `combined:<C>`.
    pub fn parse(name: &str, k: usize) -> Result<Self> {
        let spec = match name {
            "l1" => LyapunovSpec::L1,
            "two-chunk" => LyapunovSpec::TwoChunk,
            "combined" => LyapunovSpec::combined(k),
            other => match other.strip_prefix("combined:").map(str::parse::<f64>) {
                Some(Ok(c)) if c > 0.0 && c.is_finite() => LyapunovSpec::Combined { c },
                _ => {
                    return Err(Error::Precondition(format!(
                        "unknown Lyapunov function {other:?} (expected l1, two-chunk, combined or combined:<C>)"
                    )))
                }
            },
        };
        spec.check(k)?;
        Ok(spec)
    }

    pub fn check(&self, k: usize) -> Result<()> {
        match self {
            LyapunovSpec::TwoChunk if k != 2 => Err(Error::SpecChunkMismatch {
                spec: self.to_string(),
                k,
            }),
            _ => Ok(()),
        }
    }

    /// True when the function is a polynomial in the counts.
    pub fn is_polynomial(&self) -> bool {
        !matches!(self, LyapunovSpec::Combined { .. })
    }

    pub fn evaluate<F: Scalar>(&self, agg: &Aggregates) -> Result<F> {
        self.check(agg.k())?;
        let u = F::from_u64;
        match *self {
            LyapunovSpec::L1 => Ok(u(l1(agg))),
            LyapunovSpec::TwoChunk => {
                let (s0, s1, s2) = (agg.empty(), agg.holders(0), agg.holders(1));
                let gap = s1.abs_diff(s2);
                Ok(u(2 * (2 * s0 + s1 + s2)) + u(gap) * u(gap))
            }
            LyapunovSpec::Combined { c } => {
                let inexact = || Error::InexactSpec(self.to_string());
                let peers = u(agg.peers());
                let decay = |n: u64| (F::zero() - u(n)).exp().ok_or_else(inexact);
                let mut l2 = peers.clone() * decay(agg.empty())?;
                for &held in agg.holders_all() {
                    l2 = l2 + peers.clone() * decay(held)?;
                }
                Ok(F::from_f64(c) * u(l1(agg)) + l2)
            }
        }
    }
}

impl fmt::Display for LyapunovSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LyapunovSpec::L1 => f.write_str("l1"),
            LyapunovSpec::Combined { c } => write!(f, "combined:{c}"),
            LyapunovSpec::TwoChunk => f.write_str("two-chunk"),
        }
    }
}

fn l1(agg: &Aggregates) -> u64 {
    (0..agg.k()).map(|i| agg.lacking(i)).sum()
}

/// `Σ_i S/e^{S_i} + S/e^{S_0}`.
pub fn l2_component(agg: &Aggregates) -> f64 {
    LyapunovSpec::Combined { c: 0.0 }
        .evaluate::<f64>(agg)
        .expect("defined for every k")
}

pub fn lyapunov(state: &SwarmState, spec: LyapunovSpec) -> Result<f64> {
    spec.evaluate(state.aggregates())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::E;

    use super::*;
    use crate::chunks::ChunkSet;

    fn two_empty() -> SwarmState {
        SwarmState::new(2, [(ChunkSet::EMPTY, 2)]).unwrap()
    }

    #[test]
    fn formula_values() {
        let s = two_empty();
        assert_eq!(lyapunov(&s, LyapunovSpec::L1).unwrap(), 4.0);
        let l2 = l2_component(s.aggregates());
        assert!((l2 - (3.0 / E + 3.0 / E + 3.0 / (E * E))).abs() < 1e-12);
        assert!((l2 - 2.6133).abs() < 1e-4);
        assert_eq!(lyapunov(&s, LyapunovSpec::TwoChunk).unwrap(), 12.0);
        let c = constant_c(2);
        let combined = lyapunov(&s, LyapunovSpec::combined(2)).unwrap();
        assert!((combined - (4.0 * c + l2)).abs() < 1e-9);
    }

    #[test]
    fn two_chunk_requires_two_chunks() {
        let s = SwarmState::seed_only(3).unwrap();
        assert!(matches!(
            lyapunov(&s, LyapunovSpec::TwoChunk),
            Err(Error::SpecChunkMismatch { k: 3, .. })
        ));
        assert!(LyapunovSpec::parse("two-chunk", 3).is_err());
    }

    #[test]
    fn combined_refuses_exact_arithmetic() {
        let s = two_empty();
        assert!(matches!(
            LyapunovSpec::combined(2).evaluate::<num::BigRational>(s.aggregates()),
            Err(Error::InexactSpec(_))
        ));
    }

    #[test]
    fn parse_names() {
        assert_eq!(LyapunovSpec::parse("l1", 3).unwrap(), LyapunovSpec::L1);
        assert_eq!(
            LyapunovSpec::parse("combined:5", 3).unwrap(),
            LyapunovSpec::Combined { c: 5.0 }
        );
        assert_eq!(LyapunovSpec::parse("combined", 2).unwrap(), LyapunovSpec::combined(2));
        assert!(LyapunovSpec::parse("l3", 2).is_err());
        assert!(LyapunovSpec::parse("combined:-1", 2).is_err());
    }
}
