//! Closed forms and shell series for the radial stable law.
//!
//! All series results carry an explicit bound on the discarded tail.

mod coefficient;
mod conditions;
mod series;

pub use coefficient::{CoefficientFunction, NonnegFunction};
pub use conditions::{
    check_conditions, condition_h_check, local_integrability, h_sufficiency, ConditionReport, HVerdict,
    SufficiencyReport,
};
pub use series::{
    ball_probability, ball_time_integral, characteristic_exponent, characteristic_exponent_truncated,
    density_at_origin_time_integral, derive_levy_constant, gamma_ab, green_function, h_function, green_gap_braces,
    green_gap_braces_limit, green_gap, shell_character_integral, shell_density, shell_time_integral,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::padic::{check_prime, PAdicError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error(transparent)]
    PAdic(#[from] PAdicError),
    #[error("stability index must be positive, got {0}")]
    InvalidAlpha(f64),
    #[error("series diverges for alpha = {0} (needs alpha > 1)")]
    Divergent(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not supported for this coefficient: {0}")]
    Unsupported(String),
    #[error("Levy constant failed the characteristic exponent check at |xi| = p^{k}: ratio {ratio}")]
    LevyConstantMismatch { k: i32, ratio: f64 },
}

/// Value of a truncated series together with a bound on the truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub value: f64,
    pub tail_bound: f64,
}

impl Series {
    pub fn exact(value: f64) -> Series {
        Series { value, tail_bound: 0.0 }
    }
}

/// Rotation-invariant α-stable law on `Q_p` with `E χ(ξZ(t)) = exp(-t‖ξ‖^α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableSpec {
    p: u32,
    alpha: f64,
    levy_constant: f64,
}

impl StableSpec {
    pub fn new(p: u32, alpha: f64) -> Result<StableSpec, AnalyticError> {
        check_prime(p)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(AnalyticError::InvalidAlpha(alpha));
        }
        let k = derive_levy_constant(p, alpha);
        for e in -3..=3 {
            let psi = characteristic_exponent(p, alpha, k, e).value;
            let ratio = psi / (p as f64).powf(alpha * e as f64);
            if (ratio - 1.0).abs() > 1e-10 {
                return Err(AnalyticError::LevyConstantMismatch { k: e, ratio });
            }
        }
        Ok(StableSpec { p, alpha, levy_constant: k })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `K` in the Lévy kernel `K‖y‖^{-1-α} μ(dy)`.
    pub fn levy_constant(&self) -> f64 {
        self.levy_constant
    }

    pub(crate) fn pf(&self) -> f64 {
        self.p as f64
    }

    /// `a(m) = (1-p^{-1})/(1-p^{-α-1}) p^{-αm}`.
    pub fn a(&self, m: i32) -> f64 {
        let p = self.pf();
        (1.0 - 1.0 / p) / (1.0 - p.powf(-self.alpha - 1.0)) * p.powf(-self.alpha * m as f64)
    }
}

/// A sequence `a(m)` given by a finite table on `m_lo..=m_hi` and geometric
/// tails: `a(m_lo - k) = a(m_lo)·lower_ratio^k`, `a(m_hi + k) = a(m_hi)·upper_ratio^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralSequence {
    pub m_lo: i32,
    pub values: Vec<f64>,
    pub lower_ratio: f64,
    pub upper_ratio: f64,
}

impl GeneralSequence {
    pub fn new(m_lo: i32, values: Vec<f64>, lower_ratio: f64, upper_ratio: f64) -> Result<Self, AnalyticError> {
        if values.is_empty() || values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(AnalyticError::InvalidParameter("table values must be finite and nonnegative".into()));
        }
        if !(lower_ratio >= 0.0 && upper_ratio >= 0.0) {
            return Err(AnalyticError::InvalidParameter("tail ratios must be nonnegative".into()));
        }
        Ok(GeneralSequence { m_lo, values, lower_ratio, upper_ratio })
    }

    pub fn m_hi(&self) -> i32 {
        self.m_lo + self.values.len() as i32 - 1
    }

    pub fn a(&self, m: i32) -> f64 {
        if m < self.m_lo {
            self.values[0] * self.lower_ratio.powi(self.m_lo - m)
        } else if m > self.m_hi() {
            self.values[self.values.len() - 1] * self.upper_ratio.powi(m - self.m_hi())
        } else {
            self.values[(m - self.m_lo) as usize]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RadialLevySpec {
    Stable(StableSpec),
    General { p: u32, seq: GeneralSequence },
}

impl RadialLevySpec {
    pub fn stable(p: u32, alpha: f64) -> Result<Self, AnalyticError> {
        Ok(RadialLevySpec::Stable(StableSpec::new(p, alpha)?))
    }

    pub fn general(p: u32, seq: GeneralSequence) -> Result<Self, AnalyticError> {
        check_prime(p)?;
        Ok(RadialLevySpec::General { p, seq })
    }

    pub fn p(&self) -> u32 {
        match self {
            RadialLevySpec::Stable(s) => s.p,
            RadialLevySpec::General { p, .. } => *p,
        }
    }

    pub fn a(&self, m: i32) -> f64 {
        match self {
            RadialLevySpec::Stable(s) => s.a(m),
            RadialLevySpec::General { seq, .. } => seq.a(m),
        }
    }

    /// The truncated sequence `a(M;m)`: `a(m)` for `m < cutoff`, zero otherwise.
    pub fn truncated(&self, cutoff: i32) -> RadialLevySpec {
        let (m_lo, lower) = match self {
            RadialLevySpec::Stable(s) => (cutoff - 1, s.pf().powf(s.alpha)),
            RadialLevySpec::General { seq, .. } => (seq.m_lo.min(cutoff - 1), seq.lower_ratio),
        };
        let mut values: Vec<f64> = (m_lo..cutoff).map(|m| self.a(m)).collect();
        values.push(0.0);
        RadialLevySpec::General {
            p: self.p(),
            seq: GeneralSequence { m_lo, values, lower_ratio: lower, upper_ratio: 0.0 },
        }
    }
}
