use serde::Serialize;

use super::coefficient::floor_exponent;
use super::series::{ball_time_integral, density_at_origin_time_integral, shell_time_integral};
use super::{AnalyticError, CoefficientFunction, NonnegFunction, RadialLevySpec, StableSpec};
use crate::padic::{haar_shell, Ball, Norm, PAdic};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `a(m)` is nonincreasing.
    pub cond1: bool,
    /// `a(m) → 0` as `m → ∞` and stays positive as `m → -∞`.
    pub cond2: bool,
    /// `Σ_m a(m) p^{γm} < ∞`.
    pub cond3: bool,
    /// `Σ_{m≤0} a(m) p^{γm} < ∞`.
    pub cond4: bool,
    /// `Σ_m a(m) p^{γm}` when finite.
    pub sum3: Option<f64>,
    /// `Σ_{m≤0} a(m) p^{γm}` when finite.
    pub sum4: Option<f64>,
}

/// Monotonicity, limits and the two summability conditions on `a(m)`.
pub fn check_conditions(spec: &RadialLevySpec, gamma: f64) -> Result<ConditionReport, AnalyticError> {
    if !(gamma >= 1.0) {
        return Err(AnalyticError::InvalidParameter(format!("gamma must be at least 1, got {gamma}")));
    }
    let p = spec.p() as f64;
    match spec {
        RadialLevySpec::Stable(s) => {
            let cond4 = gamma > s.alpha();
            // Σ_{m≤0} a(0) p^{(γ-α)m}
            let sum4 = cond4.then(|| s.a(0) / (1.0 - p.powf(s.alpha() - gamma)));
            Ok(ConditionReport { cond1: true, cond2: true, cond3: false, cond4, sum3: None, sum4 })
        }
        RadialLevySpec::General { seq, .. } => {
            let v = &seq.values;
            let (a_lo, a_hi) = (v[0], v[v.len() - 1]);
            let table_monotone = v.windows(2).all(|w| w[0] >= w[1]);
            let cond1 = table_monotone
                && (seq.lower_ratio >= 1.0 || a_lo == 0.0)
                && (seq.upper_ratio <= 1.0 || a_hi == 0.0);
            let cond2 = (a_hi == 0.0 || seq.upper_ratio < 1.0) && a_lo > 0.0 && seq.lower_ratio >= 1.0;
            let lower_q = seq.lower_ratio * p.powf(-gamma);
            let upper_q = seq.upper_ratio * p.powf(gamma);
            let lower_ok = a_lo == 0.0 || lower_q < 1.0;
            let upper_ok = a_hi == 0.0 || upper_q < 1.0;
            let term = |m: i32| seq.a(m) * p.powf(gamma * m as f64);
            let lower_tail = if a_lo == 0.0 { 0.0 } else { term(seq.m_lo) * lower_q / (1.0 - lower_q) };
            let upper_tail = if a_hi == 0.0 { 0.0 } else { term(seq.m_hi()) * upper_q / (1.0 - upper_q) };
            let sum3 = (lower_ok && upper_ok)
                .then(|| lower_tail + upper_tail + (seq.m_lo..=seq.m_hi()).map(term).sum::<f64>());
            let sum4 = lower_ok.then(|| {
                if seq.m_lo > 0 {
                    // the lower tail continues past 0; sum only the part with m ≤ 0
                    let q = lower_q;
                    term(0) / (1.0 - q)
                } else {
                    let top = seq.m_hi().min(0);
                    let tail_above = if seq.m_hi() < 0 && a_hi != 0.0 {
                        (seq.m_hi() + 1..=0).map(term).sum::<f64>()
                    } else {
                        0.0
                    };
                    lower_tail + (seq.m_lo..=top).map(term).sum::<f64>() + tail_above
                }
            });
            Ok(ConditionReport { cond1, cond2, cond3: lower_ok && upper_ok, cond4: lower_ok, sum3, sum4 })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum HVerdict {
    Finite { value: f64, tail_bound: f64 },
    Infinite { witness: String, reason: String },
}

impl HVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, HVerdict::Finite { .. })
    }
}

fn infinite(witness: &Ball, reason: &str) -> HVerdict {
    HVerdict::Infinite {
        witness: format!("B({}, {}^{})", witness.center(), witness.prime(), witness.radius_exp()),
        reason: reason.to_string(),
    }
}

/// `∫_0^T ∫_B P(s, z - x) μ(dz) ds`.
fn ball_occupation(s: &StableSpec, ball: &Ball, x: &PAdic, t: f64) -> f64 {
    if ball.contains(x) {
        ball_time_integral(s, ball.radius_exp(), t).value
    } else {
        let n = match (ball.center() - x).norm() {
            Norm::Pow(n) => n,
            Norm::Zero => unreachable!("a ball not containing x has a center away from x"),
        };
        ball.haar_measure() * shell_time_integral(s, n, t).value / haar_shell(s.p(), n)
    }
}

/// A sub-ball of `region` missed by every piece, if one exists.
fn uncovered_subball(region: &Ball, pieces: &[(Ball, PAdic)], depth: u32) -> Option<Ball> {
    let hits: Vec<&Ball> = pieces.iter().map(|(b, _)| b).filter(|b| b.intersects(region)).collect();
    if hits.is_empty() {
        return Some(region.clone());
    }
    if hits.iter().any(|b| b.contains_ball(region)) || depth == 0 {
        return None;
    }
    let c = region.center();
    let r = region.radius_exp();
    let unit = PAdic::p_power(c.prime(), c.window(), -r).ok()?;
    let mut child_center = c.clone();
    for _ in 0..c.prime() {
        let child = Ball::new(&child_center, r - 1);
        if let Some(b) = uncovered_subball(&child, pieces, depth - 1) {
            return Some(b);
        }
        child_center = &child_center + &unit;
    }
    None
}

/// Semi-analytic value of `∫_0^T ∫_{B(0,p^L)} ‖b(x+y)‖^{-α} P(s,y) μ(dy) ds`.
pub fn condition_h_check(
    spec: &StableSpec,
    b: &CoefficientFunction,
    x: &PAdic,
    l: i32,
    t: f64,
) -> Result<HVerdict, AnalyticError> {
    if spec.alpha() <= 1.0 {
        return Err(AnalyticError::Divergent(spec.alpha()));
    }
    if !(t > 0.0) {
        return Err(AnalyticError::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let alpha = spec.alpha();
    let p = spec.pf();
    let region = Ball::new(x, l);
    match b {
        CoefficientFunction::Custom { name, .. } => Err(AnalyticError::Unsupported(name.clone())),
        CoefficientFunction::LocallyConstant { pieces, default } => {
            let weight = |v: &PAdic| match v.norm() {
                Norm::Pow(m) => Some(p.powf(-alpha * m as f64)),
                Norm::Zero => None,
            };
            let mut value = 0.0;
            let mut inside = 0.0;
            for (ball, v) in pieces {
                let Some(part) = ball.intersection(&region) else { continue };
                let Some(f) = weight(v) else {
                    return Ok(infinite(&part, "b vanishes on this ball"));
                };
                let occ = ball_occupation(spec, &part, x, t);
                value += f * occ;
                inside += occ;
            }
            if let Some(hole) = uncovered_subball(&region, pieces, 64) {
                match weight(default) {
                    None => return Ok(infinite(&hole, "b vanishes on this ball")),
                    Some(f) => value += f * (ball_time_integral(spec, l, t).value - inside).max(0.0),
                }
            }
            Ok(HVerdict::Finite { value, tail_bound: 1e-14 * value })
        }
        CoefficientFunction::RadialPower { scale, center, delta } => {
            let cm = match scale.norm() {
                Norm::Pow(m) => m,
                Norm::Zero => return Ok(infinite(&region, "b vanishes identically")),
            };
            let c_weight = p.powf(-alpha * cm as f64);
            let f = |j: i32| c_weight * p.powf(-alpha * floor_exponent(*delta, j) as f64);
            let a = center - x;
            let a_norm = a.norm();
            if a_norm > Norm::Pow(l) {
                // ‖y - a‖ = ‖a‖ throughout the region
                let value = f(a_norm.exponent().unwrap()) * ball_time_integral(spec, l, t).value;
                return Ok(HVerdict::Finite { value, tail_bound: 1e-14 * value });
            }
            let decay = 1.0 - alpha * delta;
            if decay <= 0.0 {
                return Ok(infinite(
                    &Ball::new(center, l),
                    "‖b‖^{-α} behaves like ‖y - y0‖^{-δα} with δα ≥ 1, not integrable near y0",
                ));
            }
            let d_t = density_at_origin_time_integral(spec, t)?.value;
            let q = 1.0 - 1.0 / p;
            let ln_p = p.ln();
            // far inside, the time spent on a shell is its measure times a constant rate
            let far_rate = match a_norm {
                Norm::Pow(n) => shell_time_integral(spec, n, t).value / haar_shell(spec.p(), n),
                Norm::Zero => d_t,
            };
            let tail_after = |j: i32| {
                c_weight * p.powf(alpha) * q * far_rate.max(d_t) * ((j - 1) as f64 * decay * ln_p).exp()
                    / (1.0 - p.powf(-decay))
            };
            let mut value = 0.0;
            let mut approx = 0.0;
            let mut j = l;
            let mut far = false;
            let mut tail;
            loop {
                let term = if far {
                    // f(j)·haar_shell(j)·rate in log space
                    let e = j as f64 - alpha * floor_exponent(*delta, j) as f64;
                    c_weight * q * far_rate * (e * ln_p).exp()
                } else {
                    // time spent on {‖y - a‖ = p^j}
                    let occ = match a_norm {
                        Norm::Pow(n) if n > j => (p.powi(j) - p.powi(j - 1)) * far_rate,
                        Norm::Pow(n) if n == j => {
                            ball_time_integral(spec, j, t).value - p.powi(j - 1) * far_rate
                        }
                        _ => shell_time_integral(spec, j, t).value,
                    };
                    far = match a_norm {
                        Norm::Pow(n) => j < n,
                        Norm::Zero => j < -900 || (1.0 - occ / (haar_shell(spec.p(), j) * d_t)).abs() < 1e-13,
                    };
                    f(j) * occ.max(0.0)
                };
                value += term;
                if far && a_norm == Norm::Zero {
                    approx += term;
                }
                tail = tail_after(j);
                if tail < 1e-14 * value || l as i64 - j as i64 > 10_000_000 {
                    break;
                }
                j -= 1;
            }
            let tail = tail + 1e-13 * approx;
            Ok(HVerdict::Finite { value, tail_bound: tail })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficiencyReport {
    pub applies: bool,
    pub integral_finite: bool,
    pub implied: bool,
}

/// Sufficient condition for (H): `λ > α(1+α)` and `∫_{B(0,1)} ‖b(x+y)‖^{-λ} dμ < ∞`.
pub fn h_sufficiency(
    spec: &StableSpec,
    b: &CoefficientFunction,
    x: &PAdic,
    lambda: f64,
) -> Result<SufficiencyReport, AnalyticError> {
    let alpha = spec.alpha();
    if alpha < 1.0 {
        return Err(AnalyticError::InvalidParameter(format!("needs alpha ≥ 1, got {alpha}")));
    }
    let applies = lambda > alpha * (1.0 + alpha);
    let unit = Ball::new(x, 0);
    let integral_finite = match b {
        CoefficientFunction::Custom { name, .. } => return Err(AnalyticError::Unsupported(name.clone())),
        CoefficientFunction::RadialPower { scale, center, delta } => {
            !scale.is_zero() && ((center - x).norm() > Norm::Pow(0) || *delta <= 0.0 || delta * lambda < 1.0)
        }
        CoefficientFunction::LocallyConstant { pieces, default } => {
            let zero_piece = pieces.iter().any(|(ball, v)| v.is_zero() && ball.intersects(&unit));
            let hole = !default.is_zero() || uncovered_subball(&unit, pieces, 64).is_none();
            !zero_piece && hole
        }
    };
    Ok(SufficiencyReport { applies, integral_finite, implied: applies && integral_finite })
}

/// Local integrability of `f` with respect to Haar measure.
pub fn local_integrability(f: &NonnegFunction) -> bool {
    match f {
        NonnegFunction::RadialPower { scale, exponent, .. } => *scale == 0.0 || *exponent > -1.0,
        NonnegFunction::LocallyConstant { pieces, default } => {
            default.is_finite() && pieces.iter().all(|(_, v)| v.is_finite())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::GeneralSequence;
    use crate::padic::Window;

    fn w() -> Window {
        Window::new(-32, 32).unwrap()
    }

    fn n(p: u32, v: i64) -> PAdic {
        PAdic::from_i64(p, w(), v).unwrap()
    }

    #[test]
    fn stable_conditions() {
        let s = RadialLevySpec::stable(2, 2.0).unwrap();
        let r = check_conditions(&s, 3.0).unwrap();
        assert!(r.cond1 && r.cond2 && !r.cond3 && r.cond4);
        assert!(!check_conditions(&s, 1.0).unwrap().cond4);
        assert!(check_conditions(&s, 0.5).is_err());
    }

    #[test]
    fn truncated_spec_satisfies_summability() {
        let s = RadialLevySpec::stable(3, 1.5).unwrap();
        let t = s.truncated(2);
        let r = check_conditions(&t, 2.0).unwrap();
        assert!(r.cond1 && r.cond2 && r.cond3 && r.cond4);
        // Σ_{m<2} a(m) 3^{2m}, summed directly
        let direct: f64 = (-200..2).map(|m| s.a(m) * 9f64.powi(m)).sum();
        assert!((r.sum3.unwrap() - direct).abs() < 1e-10 * direct);
        let r_low = check_conditions(&t, 1.2).unwrap();
        assert!(!r_low.cond3 && !r_low.cond4);
    }

    #[test]
    fn general_sequence_partial_sums() {
        let seq = GeneralSequence::new(-1, vec![4.0, 2.0, 1.0], 2.0, 0.25).unwrap();
        let s = RadialLevySpec::general(2, seq).unwrap();
        let r = check_conditions(&s, 1.5).unwrap();
        assert!(r.cond1 && r.cond2 && r.cond3 && r.cond4);
        let direct: f64 = (-300..300).map(|m| s.a(m) * 2f64.powf(1.5 * m as f64)).sum();
        assert!((r.sum3.unwrap() - direct).abs() < 1e-10 * direct);
        let direct4: f64 = (-300..=0).map(|m| s.a(m) * 2f64.powf(1.5 * m as f64)).sum();
        assert!((r.sum4.unwrap() - direct4).abs() < 1e-10 * direct4);
        let bad = GeneralSequence::new(0, vec![1.0, 2.0], 1.0, 0.5).unwrap();
        assert!(!check_conditions(&RadialLevySpec::general(2, bad).unwrap(), 1.0).unwrap().cond1);
    }

    #[test]
    fn constant_one_is_bounded_by_horizon() {
        let s = StableSpec::new(2, 2.0).unwrap();
        let b = CoefficientFunction::constant(n(2, 1));
        for l in [-2, 0, 3] {
            match condition_h_check(&s, &b, &n(2, 0), l, 2.0).unwrap() {
                HVerdict::Finite { value, .. } => {
                    assert!(value <= 2.0 + 1e-12 && value > 0.0);
                    assert!((value - ball_time_integral(&s, l, 2.0).value).abs() < 1e-12);
                }
                v => panic!("{v:?}"),
            }
        }
    }

    #[test]
    fn constant_scale_weights() {
        let s = StableSpec::new(3, 1.5).unwrap();
        let c = n(3, 9);
        let b = CoefficientFunction::constant(c);
        let HVerdict::Finite { value, .. } = condition_h_check(&s, &b, &n(3, 0), 1, 1.0).unwrap() else { panic!() };
        let expect = 3f64.powf(1.5 * 2.0) * ball_time_integral(&s, 1, 1.0).value;
        assert!((value - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn zero_piece_is_detected() {
        let s = StableSpec::new(2, 2.0).unwrap();
        let b = CoefficientFunction::locally_constant(vec![(Ball::new(&n(2, 0), -1), n(2, 0))], n(2, 1)).unwrap();
        assert!(!condition_h_check(&s, &b, &n(2, 0), 2, 1.0).unwrap().is_finite());
        // the odd integers miss the zero ball
        let shifted = condition_h_check(&s, &b, &n(2, 1), -1, 1.0).unwrap();
        assert!(shifted.is_finite());
    }

    #[test]
    fn zero_default_with_full_cover_is_finite() {
        let s = StableSpec::new(2, 2.0).unwrap();
        let pieces = vec![(Ball::new(&n(2, 0), -1), n(2, 1)), (Ball::new(&n(2, 1), -1), n(2, 2))];
        let b = CoefficientFunction::locally_constant(pieces, n(2, 0)).unwrap();
        let HVerdict::Finite { value, .. } = condition_h_check(&s, &b, &n(2, 0), 0, 1.0).unwrap() else { panic!() };
        // two halves of the unit ball, weights 1 and 2^α
        let near = ball_time_integral(&s, -1, 1.0).value;
        let whole = ball_time_integral(&s, 0, 1.0).value;
        let expect = near + 4.0 * (whole - near);
        assert!((value - expect).abs() < 1e-12);
        assert!(!condition_h_check(&s, &b, &n(2, 0), 1, 1.0).unwrap().is_finite());
    }

    #[test]
    fn radial_power_threshold() {
        let s = StableSpec::new(2, 2.0).unwrap();
        for (delta, finite) in [(0.25, true), (0.49, true), (0.5, false), (0.8, false), (-0.5, true)] {
            let b = CoefficientFunction::radial_power(n(2, 1), n(2, 0), delta).unwrap();
            let v = condition_h_check(&s, &b, &n(2, 0), 1, 1.0).unwrap();
            assert_eq!(v.is_finite(), finite, "delta {delta}");
        }
    }

    #[test]
    fn radial_power_zero_delta_matches_constant() {
        let s = StableSpec::new(2, 1.5).unwrap();
        let b = CoefficientFunction::radial_power(n(2, 1), n(2, 5), 0.0).unwrap();
        let HVerdict::Finite { value, .. } = condition_h_check(&s, &b, &n(2, 0), 3, 1.0).unwrap() else { panic!() };
        assert!((value - ball_time_integral(&s, 3, 1.0).value).abs() < 1e-12);
    }

    #[test]
    fn radial_power_off_center_matches_cell_sum() {
        // singularity at y0 = 4 inside the unit ball around x = 0, summed over cells of radius 2^{-12}
        let s = StableSpec::new(2, 1.5).unwrap();
        let delta = -0.5;
        let y0 = n(2, 4);
        let b = CoefficientFunction::radial_power(n(2, 1), y0.clone(), delta).unwrap();
        let HVerdict::Finite { value, .. } = condition_h_check(&s, &b, &n(2, 0), 0, 1.0).unwrap() else { panic!() };
        let fine = 12;
        let mut oracle = 0.0;
        for r in 0..(1i64 << fine) {
            let c = n(2, r);
            let occ = if r == 0 {
                ball_time_integral(&s, -fine, 1.0).value
            } else {
                let m = c.norm().exponent().unwrap();
                2f64.powi(-fine) * shell_time_integral(&s, m, 1.0).value / haar_shell(2, m)
            };
            let weight = match (&c - &y0).norm() {
                Norm::Pow(j) => 2f64.powf(-1.5 * floor_exponent(delta, j) as f64),
                Norm::Zero => 0.0,
            };
            oracle += weight * occ;
        }
        assert!((value - oracle).abs() < 1e-3 * value, "{value} vs {oracle}");
    }

    #[test]
    fn sufficiency_threshold() {
        let s = StableSpec::new(2, 1.5).unwrap();
        let one = CoefficientFunction::constant(n(2, 1));
        let r = h_sufficiency(&s, &one, &n(2, 0), 4.0).unwrap();
        assert!(r.applies && r.implied);
        assert!(!h_sufficiency(&s, &one, &n(2, 0), 3.7).unwrap().applies);
    }

    #[test]
    fn integrability_criterion() {
        let c = n(2, 0);
        let f = |e: f64| NonnegFunction::RadialPower { scale: 1.0, center: c.clone(), exponent: e };
        assert!(local_integrability(&f(-0.5)));
        assert!(!local_integrability(&f(-2.0)));
        assert!(!local_integrability(&f(-1.0)));
        assert!(local_integrability(&NonnegFunction::LocallyConstant { pieces: vec![], default: 3.0 }));
    }
}
