//! The trust carrier type and its two aggregation monoids.
//!
//! A [`TrustTriple`] is a point of the set {⟨td, dtd, ud⟩ ∈ [0,1]³ : td + dtd + ud = 1},
//! where `td` is the trust degree, `dtd` the distrust degree and `ud` the
//! uncertainty. Only `(td, dtd)` are stored; `ud` is always `1 − td − dtd`.
//!
//! Two operations act on the carrier:
//!
//! * [`TrustTriple::seq`] composes trust along a path (identity [`FULL_TRUST`],
//!   absorbing element [`NO_RELATION`]);
//! * [`TrustTriple::par`] / [`par_all`] combines trust across disjoint paths
//!   (identity [`FULL_DISTRUST`]).
//!
//! `seq` does not distribute over `par`, which rules out the usual
//! sum-of-products shortcuts; engines must aggregate in a pinned order.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Tolerance accepted on `td + dtd` overshooting 1 at validation boundaries.
/// Overshoots within this bound are rescaled; anything larger is rejected.
pub const UNIT_SUM_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("trust components must be finite values in [0, 1], got ({td}, {dtd})")]
    ComponentOutOfRange { td: f64, dtd: f64 },
    #[error("trust {td} + distrust {dtd} = {sum} exceeds 1")]
    UnitSumExceeded { td: f64, dtd: f64, sum: f64 },
    #[error("components {td},{dtd},{ud} sum to {sum}, expected 1")]
    UnitSumMismatch {
        td: f64,
        dtd: f64,
        ud: f64,
        sum: f64,
    },
    #[error("expected `td,dtd` or `td,dtd,ud`, got {0:?}")]
    MalformedTriple(String),
    #[error("total encounter count must be at least 1")]
    ZeroTotal,
    #[error("positive {positive} + negative {negative} experiences exceed total {total}")]
    CountsExceedTotal {
        positive: u64,
        negative: u64,
        total: u64,
    },
    #[error("parallel aggregation of an empty path set")]
    EmptyAggregation,
}

/// A trust relationship ⟨td, dtd, ud⟩ with unit sum; `ud` is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustTriple {
    td: f64,
    dtd: f64,
}

/// Identity of sequential aggregation: ⟨1, 0, 0⟩.
pub const FULL_TRUST: TrustTriple = TrustTriple { td: 1.0, dtd: 0.0 };
/// Identity of parallel aggregation: ⟨0, 1, 0⟩.
pub const FULL_DISTRUST: TrustTriple = TrustTriple { td: 0.0, dtd: 1.0 };
/// Total uncertainty ⟨0, 0, 1⟩; absorbing for sequential aggregation and the
/// encoding of "no relationship at all" (a missing edge, an empty path set).
pub const NO_RELATION: TrustTriple = TrustTriple { td: 0.0, dtd: 0.0 };

impl TrustTriple {
    /// Builds a validated triple from trust and distrust degrees.
    ///
    /// Uncertainty is derived as `1 − td − dtd`. Inputs where `td + dtd`
    /// overshoots 1 by at most [`UNIT_SUM_SLACK`] are rescaled onto the unit
    /// simplex; larger overshoots are rejected.
    pub fn new(td: f64, dtd: f64) -> Result<Self, AlgebraError> {
        if !(td.is_finite() && dtd.is_finite())
            || !(0.0..=1.0).contains(&td)
            || !(0.0..=1.0).contains(&dtd)
        {
            return Err(AlgebraError::ComponentOutOfRange { td, dtd });
        }
        let sum = td + dtd;
        if sum > 1.0 + UNIT_SUM_SLACK {
            return Err(AlgebraError::UnitSumExceeded { td, dtd, sum });
        }
        if sum > 1.0 {
            // FP drift is contained here so downstream code can rely on
            // td + dtd <= 1 up to one rounding of the division.
            return Ok(Self::raw((td / sum).min(1.0), (dtd / sum).min(1.0)));
        }
        Ok(Self::raw(td, dtd))
    }

    /// Frequency-rate triple from experience counts:
    /// `positive/total` trust, `negative/total` distrust, remainder uncertain.
    pub fn from_counts(positive: u64, negative: u64, total: u64) -> Result<Self, AlgebraError> {
        if total == 0 {
            return Err(AlgebraError::ZeroTotal);
        }
        if positive.saturating_add(negative) > total {
            return Err(AlgebraError::CountsExceedTotal {
                positive,
                negative,
                total,
            });
        }
        let t = total as f64;
        Ok(Self::raw(positive as f64 / t, negative as f64 / t))
    }

    #[inline]
    pub(crate) fn raw(td: f64, dtd: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&td), "td out of range: {td}");
        debug_assert!((0.0..=1.0).contains(&dtd), "dtd out of range: {dtd}");
        debug_assert!(td + dtd <= 1.0 + 1e-12, "unit sum violated: {}", td + dtd);
        Self { td, dtd }
    }

    #[inline]
    pub fn td(self) -> f64 {
        self.td
    }

    #[inline]
    pub fn dtd(self) -> f64 {
        self.dtd
    }

    /// Derived uncertainty `1 − td − dtd`, clamped at 0 against rounding.
    #[inline]
    pub fn ud(self) -> f64 {
        ((1.0 - self.td) - self.dtd).max(0.0)
    }

    /// True for ⟨0, 0, 1⟩, the "no relationship" value.
    #[inline]
    pub fn is_no_relation(self) -> bool {
        self.td == 0.0 && self.dtd == 0.0
    }

    /// Sequential aggregation along a path: `x.seq(y)` is the trust in the
    /// far endpoint given `x` toward an intermediary and `y` onward.
    ///
    /// `td = x.td·y.td + x.dtd·y.dtd`, `dtd = x.dtd·y.td + x.td·y.dtd`;
    /// the resulting uncertainty equals `1 − (1 − x.ud)(1 − y.ud)`.
    #[inline]
    pub fn seq(self, other: Self) -> Self {
        let td = self.td * other.td + self.dtd * other.dtd;
        let dtd = self.dtd * other.td + self.td * other.dtd;
        Self::raw(td.min(1.0), dtd.min(1.0))
    }

    /// Parallel aggregation of two disjoint-path contributions.
    ///
    /// `td = 1 − (1−a)(1−b)` (computed as `a + b − ab`, which keeps the
    /// ⟨0,1,0⟩ identity exact), `dtd = a·b`.
    #[inline]
    pub fn par(self, other: Self) -> Self {
        let td = (self.td + other.td) - self.td * other.td;
        let dtd = self.dtd * other.dtd;
        Self::raw(td.min(1.0), dtd)
    }

    /// Absolute difference of the larger of the two stored components.
    #[inline]
    pub fn component_delta(self, other: Self) -> f64 {
        let dt = (self.td - other.td).abs();
        let dd = (self.dtd - other.dtd).abs();
        dt.max(dd)
    }

    /// Componentwise comparison within `eps` on both stored components.
    #[inline]
    pub fn approx_eq(self, other: Self, eps: f64) -> bool {
        (self.td - other.td).abs() <= eps && (self.dtd - other.dtd).abs() <= eps
    }
}

/// Parallel aggregation of a nonempty slice, folded left in slice order.
///
/// Equals ⟨1 − ∏(1 − td_i), ∏ dtd_i, remainder⟩ in exact arithmetic. A single
/// element is returned unchanged. An empty slice is an error: the "+" identity
/// ⟨0,1,0⟩ would read as full distrust, which is not what "no paths" means —
/// callers translate that case to [`NO_RELATION`] themselves.
pub fn par_all(xs: &[TrustTriple]) -> Result<TrustTriple, AlgebraError> {
    let (first, rest) = xs.split_first().ok_or(AlgebraError::EmptyAggregation)?;
    Ok(rest.iter().fold(*first, |acc, x| acc.par(*x)))
}

/// Sequential aggregation of a nonempty slice, folded left:
/// `seq_all([t1, .., tn]) = ((t1 . t2) . ...) . tn`.
pub fn seq_all(xs: &[TrustTriple]) -> Result<TrustTriple, AlgebraError> {
    let (first, rest) = xs.split_first().ok_or(AlgebraError::EmptyAggregation)?;
    Ok(rest.iter().fold(*first, |acc, x| acc.seq(*x)))
}

impl fmt::Display for TrustTriple {
    /// Textual form `td,dtd` (uncertainty implied). Round-trips exactly
    /// through [`TrustTriple::from_str`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.td, self.dtd)
    }
}

impl FromStr for TrustTriple {
    type Err = AlgebraError;

    /// Parses `td,dtd` or `td,dtd,ud`; a third component must complete the
    /// unit sum within [`UNIT_SUM_SLACK`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || AlgebraError::MalformedTriple(s.to_owned());
        let mut parts = s.split(',');
        let td: f64 = parts
            .next()
            .and_then(|p| p.trim().parse().ok())
            .ok_or_else(malformed)?;
        let dtd: f64 = parts
            .next()
            .and_then(|p| p.trim().parse().ok())
            .ok_or_else(malformed)?;
        let ud: Option<f64> = match parts.next() {
            Some(p) => Some(p.trim().parse().map_err(|_| malformed())?),
            None => None,
        };
        if parts.next().is_some() {
            return Err(malformed());
        }
        let triple = TrustTriple::new(td, dtd)?;
        if let Some(ud) = ud {
            let sum = td + dtd + ud;
            if !ud.is_finite() || (sum - 1.0).abs() > UNIT_SUM_SLACK {
                return Err(AlgebraError::UnitSumMismatch { td, dtd, ud, sum });
            }
        }
        Ok(triple)
    }
}
