use std::fmt;
use std::sync::Arc;

use super::AnalyticError;
use crate::padic::{Ball, Norm, PAdic, PAdicError};

type CustomFn = Arc<dyn Fn(&PAdic) -> PAdic + Send + Sync>;

/// The coefficient `b` of `dX = b(X-) dZ`.
///
/// A radial power takes the value `c·p^{-⌊δm⌋}` where `‖y - y0‖ = p^m`, so
/// that `‖b(y)‖ = ‖c‖·p^{⌊δm⌋}` is a power of `p`. For integer `δ` this is
/// exactly `‖c‖·‖y - y0‖^δ`.
#[derive(Clone)]
pub enum CoefficientFunction {
    RadialPower { scale: PAdic, center: PAdic, delta: f64 },
    LocallyConstant { pieces: Vec<(Ball, PAdic)>, default: PAdic },
    /// Arbitrary rule, usable by the solvers but not by analytic checks.
    Custom { name: String, f: CustomFn },
}

impl fmt::Debug for CoefficientFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientFunction::RadialPower { scale, center, delta } => {
                write!(f, "RadialPower {{ scale: {scale}, center: {center}, delta: {delta} }}")
            }
            CoefficientFunction::LocallyConstant { pieces, default } => f
                .debug_struct("LocallyConstant")
                .field("pieces", pieces)
                .field("default", default)
                .finish(),
            CoefficientFunction::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// `⌊δm⌋` with a little slack so that products like `0.3·10` land on the integer.
pub(crate) fn floor_exponent(delta: f64, m: i32) -> i32 {
    (delta * m as f64 + 1e-9).floor() as i32
}

impl CoefficientFunction {
    pub fn constant(c: PAdic) -> Self {
        CoefficientFunction::LocallyConstant { pieces: Vec::new(), default: c }
    }

    pub fn radial_power(scale: PAdic, center: PAdic, delta: f64) -> Result<Self, AnalyticError> {
        if scale.prime() != center.prime() || scale.window() != center.window() {
            return Err(PAdicError::Mismatch.into());
        }
        if !delta.is_finite() {
            return Err(AnalyticError::InvalidParameter("delta must be finite".into()));
        }
        Ok(CoefficientFunction::RadialPower { scale, center, delta })
    }

    /// Pieces must be pairwise disjoint balls.
    pub fn locally_constant(pieces: Vec<(Ball, PAdic)>, default: PAdic) -> Result<Self, AnalyticError> {
        for (i, (b, v)) in pieces.iter().enumerate() {
            if b.prime() != default.prime() || v.prime() != default.prime() || v.window() != default.window() {
                return Err(PAdicError::Mismatch.into());
            }
            for (c, _) in &pieces[i + 1..] {
                if b.intersects(c) {
                    return Err(AnalyticError::InvalidParameter("pieces of a locally constant map must be disjoint".into()));
                }
            }
        }
        Ok(CoefficientFunction::LocallyConstant { pieces, default })
    }

    pub fn custom(name: &str, f: impl Fn(&PAdic) -> PAdic + Send + Sync + 'static) -> Self {
        CoefficientFunction::Custom { name: name.to_string(), f: Arc::new(f) }
    }

    pub fn eval(&self, y: &PAdic) -> Result<PAdic, PAdicError> {
        match self {
            CoefficientFunction::RadialPower { scale, center, delta } => {
                let m = match y.checked_sub(center)?.norm() {
                    Norm::Pow(m) => m,
                    Norm::Zero if *delta > 0.0 => return PAdic::zero(y.prime(), y.window()),
                    Norm::Zero if *delta == 0.0 => return Ok(scale.clone()),
                    Norm::Zero => -y.window().hi,
                };
                scale.shift(-floor_exponent(*delta, m))
            }
            CoefficientFunction::LocallyConstant { pieces, default } => Ok(pieces
                .iter()
                .find(|(b, _)| b.contains(y))
                .map(|(_, v)| v.clone())
                .unwrap_or_else(|| default.clone())),
            CoefficientFunction::Custom { f, .. } => Ok(f(y)),
        }
    }

    pub fn norm_at(&self, y: &PAdic) -> Result<Norm, PAdicError> {
        Ok(self.eval(y)?.norm())
    }
}

/// Nonnegative functions for occupation integrals `∫ f(Z(s)) ds`.
#[derive(Debug, Clone)]
pub enum NonnegFunction {
    /// `scale · ‖y - center‖^exponent`, infinite at the center when `exponent < 0`.
    RadialPower { scale: f64, center: PAdic, exponent: f64 },
    LocallyConstant { pieces: Vec<(Ball, f64)>, default: f64 },
}

impl NonnegFunction {
    pub fn eval(&self, y: &PAdic) -> f64 {
        match self {
            NonnegFunction::RadialPower { scale, center, exponent } => {
                let d = y - center;
                match d.norm() {
                    Norm::Pow(m) => scale * (y.prime() as f64).powf(exponent * m as f64),
                    Norm::Zero if *exponent < 0.0 && *scale > 0.0 => f64::INFINITY,
                    Norm::Zero if *exponent == 0.0 => *scale,
                    Norm::Zero => 0.0,
                }
            }
            NonnegFunction::LocallyConstant { pieces, default } => {
                pieces.iter().find(|(b, _)| b.contains(y)).map(|(_, v)| *v).unwrap_or(*default)
            }
        }
    }

    /// Value with the distance to the center floored at `p^{floor_exp}`.
    pub fn eval_floored(&self, y: &PAdic, floor_exp: i32) -> f64 {
        match self {
            NonnegFunction::RadialPower { scale, center, exponent } => {
                let m = match (y - center).norm() {
                    Norm::Pow(m) => m.max(floor_exp),
                    Norm::Zero => floor_exp,
                };
                scale * (y.prime() as f64).powf(exponent * m as f64)
            }
            _ => self.eval(y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::Window;

    fn n(p: u32, v: i64) -> PAdic {
        PAdic::from_i64(p, Window::new(-10, 10).unwrap(), v).unwrap()
    }

    #[test]
    fn radial_power_norms() {
        let b = CoefficientFunction::radial_power(n(2, 1), n(2, 0), 1.0).unwrap();
        assert_eq!(b.norm_at(&n(2, 4)).unwrap(), Norm::Pow(-2));
        assert_eq!(b.norm_at(&n(2, 0)).unwrap(), Norm::Zero);
        let half = CoefficientFunction::radial_power(n(2, 1), n(2, 0), 0.5).unwrap();
        assert_eq!(half.norm_at(&n(2, 8)).unwrap(), Norm::Pow(-2));
        assert_eq!(half.norm_at(&n(2, 2)).unwrap(), Norm::Pow(-1));
    }

    #[test]
    fn locally_constant_lookup() {
        let b = CoefficientFunction::locally_constant(vec![(Ball::new(&n(3, 0), -1), n(3, 0))], n(3, 1)).unwrap();
        assert!(b.eval(&n(3, 3)).unwrap().is_zero());
        assert_eq!(b.eval(&n(3, 1)).unwrap(), n(3, 1));
        let overlapping = vec![(Ball::new(&n(3, 0), 0), n(3, 1)), (Ball::new(&n(3, 3), -1), n(3, 2))];
        assert!(CoefficientFunction::locally_constant(overlapping, n(3, 1)).is_err());
    }

    #[test]
    fn floor_exponent_is_robust() {
        assert_eq!(floor_exponent(0.3, 10), 3);
        assert_eq!(floor_exponent(0.5, -3), -2);
    }
}
