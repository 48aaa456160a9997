use super::{AnalyticError, Series, StableSpec};
use crate::padic::{haar_shell, Norm, PAdic};

const TINY: f64 = 1e-17;

/// `P(‖Z(t)‖ ≤ p^m) = (1-p^{-1}) Σ_{i≥0} p^{-i} exp(-t p^{-α(m+i)})`.
pub fn ball_probability(s: &StableSpec, m: i32, t: f64) -> Series {
    if t <= 0.0 {
        return Series::exact(1.0);
    }
    let p = s.pf();
    let q = 1.0 - 1.0 / p;
    let mut sum = 0.0;
    let mut w = 1.0;
    let mut i = 0i64;
    loop {
        let rate = t * p.powf(-s.alpha * (m as i64 + i) as f64);
        if rate < TINY {
            // Σ_{k≥i} q p^{-k} = p^{-i}; the exponentials differ from 1 by at most rate_k
            let err = w * rate / (1.0 - p.powf(-1.0 - s.alpha));
            return Series { value: (sum + w).min(1.0), tail_bound: err };
        }
        sum += q * w * (-rate).exp();
        w /= p;
        i += 1;
    }
}

/// Density of `Z(t)` at any point of norm `p^m`, i.e. `(P_m - P_{m-1}) / (p^m (1-p^{-1}))`.
pub fn shell_density(s: &StableSpec, m: i32, t: f64) -> Series {
    if t <= 0.0 {
        return Series::exact(0.0);
    }
    let p = s.pf();
    let pa = p.powf(s.alpha);
    let mut sum = 0.0;
    let mut w = 1.0;
    let mut i = 0i64;
    loop {
        let a = t * p.powf(-s.alpha * (m as i64 + i) as f64);
        let b = a * pa;
        let rest = w * b / (1.0 - p.powf(-1.0 - s.alpha));
        if a.is_finite() && (rest < 1e-16 * sum || (sum == 0.0 && rest < 1e-300)) {
            let scale = p.powi(-m);
            return Series { value: sum * scale, tail_bound: rest * scale };
        }
        if a.is_finite() {
            sum += w * (-a).exp() * -(-(b - a)).exp_m1();
        }
        w /= p;
        i += 1;
    }
}

/// `∫_0^T e^{-rs} ds`.
fn exp_integral(r: f64, t: f64) -> f64 {
    if r * t < 1e-8 {
        t * (1.0 - r * t / 2.0 + (r * t).powi(2) / 6.0)
    } else {
        -(-r * t).exp_m1() / r
    }
}

/// `exp_integral(a, t) - exp_integral(b, t)` without cancellation for small `bt`.
fn exp_integral_diff(a: f64, b: f64, t: f64) -> f64 {
    if b * t < 1e-2 {
        // Σ_{k≥1} (-t)^k (a^k - b^k) / (k+1)! · t
        let mut sum = 0.0;
        let mut fact = 1.0;
        let (mut ak, mut bk, mut tk) = (1.0, 1.0, 1.0);
        for k in 1..30 {
            fact *= (k + 1) as f64;
            ak *= a;
            bk *= b;
            tk *= -t;
            let term = tk * (ak - bk) / fact;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum * t
    } else {
        exp_integral(a, t) - exp_integral(b, t)
    }
}

/// `∫_0^T P_m(s) ds`.
pub fn ball_time_integral(s: &StableSpec, m: i32, t: f64) -> Series {
    let p = s.pf();
    let q = 1.0 - 1.0 / p;
    let mut sum = 0.0;
    let mut w = 1.0;
    let mut i = 0i64;
    loop {
        let r = p.powf(-s.alpha * (m as i64 + i) as f64);
        if r * t < TINY {
            let err = w * t * (r * t) / (1.0 - p.powf(-1.0 - s.alpha));
            return Series { value: sum + w * t, tail_bound: err };
        }
        sum += q * w * exp_integral(r, t);
        w /= p;
        i += 1;
    }
}

/// `∫_0^T (P_j(s) - P_{j-1}(s)) ds`, the expected time spent on the shell `‖y‖ = p^j`.
pub fn shell_time_integral(s: &StableSpec, j: i32, t: f64) -> Series {
    let p = s.pf();
    let q = 1.0 - 1.0 / p;
    let pa = p.powf(s.alpha);
    let mut sum = 0.0;
    let mut w = 1.0;
    let mut i = 0i64;
    loop {
        let a = p.powf(-s.alpha * (j as i64 + i) as f64);
        let b = a * pa;
        let rest = q * w * t * t * b / 2.0 / (1.0 - p.powf(-1.0 - s.alpha));
        if a.is_finite() && (rest < 1e-16 * sum || (sum == 0.0 && rest < 1e-300)) {
            return Series { value: sum, tail_bound: rest };
        }
        if a.is_finite() {
            sum += q * w * exp_integral_diff(a, b, t);
        }
        w /= p;
        i += 1;
    }
}

/// `∫_0^T P(s,0) ds = Σ_j (1-p^{-1}) p^j ∫_0^T e^{-s p^{αj}} ds`, finite for `α > 1`.
pub fn density_at_origin_time_integral(s: &StableSpec, t: f64) -> Result<Series, AnalyticError> {
    if s.alpha <= 1.0 {
        return Err(AnalyticError::Divergent(s.alpha));
    }
    let p = s.pf();
    let q = 1.0 - 1.0 / p;
    let term = |j: i32| q * p.powi(j) * exp_integral(p.powf(s.alpha * j as f64), t);
    let mut sum = 0.0;
    let mut j = 0;
    // downward: terms ≤ q p^j t
    let lower = loop {
        sum += term(j);
        let rest = p.powi(j) * t;
        if rest < 1e-17 * sum {
            break rest;
        }
        j -= 1;
    };
    j = 1;
    let r = p.powf(1.0 - s.alpha);
    let upper = loop {
        sum += term(j);
        let rest = q * r.powi(j + 1) / (1.0 - r);
        if rest < 1e-17 * sum {
            break rest;
        }
        j += 1;
    };
    Ok(Series { value: sum, tail_bound: lower + upper })
}

/// Resolvent density `g^λ(x)`, a function of `‖x‖` only.
pub fn green_function(s: &StableSpec, lambda: f64, x: Norm) -> Result<Series, AnalyticError> {
    if s.alpha <= 1.0 {
        return Err(AnalyticError::Divergent(s.alpha));
    }
    if !(lambda > 0.0) {
        return Err(AnalyticError::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let p = s.pf();
    let q = 1.0 - 1.0 / p;
    let term = |j: i32| q * p.powi(j) / (lambda + p.powf(s.alpha * j as f64));
    let downward = |top: i32| {
        let mut sum = 0.0;
        let mut j = top;
        loop {
            sum += term(j);
            let rest = p.powi(j) / lambda;
            if rest < 1e-17 * sum.abs() {
                return (sum, rest);
            }
            j -= 1;
        }
    };
    match x {
        Norm::Pow(n) => {
            let (sum, rest) = downward(-n);
            let value = sum - p.powi(-n) / (lambda + p.powf(s.alpha * (1 - n) as f64));
            Ok(Series { value, tail_bound: rest })
        }
        Norm::Zero => {
            let (mut sum, lower) = downward(0);
            let r = p.powf(1.0 - s.alpha);
            let mut j = 1;
            let upper = loop {
                sum += term(j);
                let rest = q * r.powi(j + 1) / (1.0 - r);
                if rest < 1e-17 * sum {
                    break rest;
                }
                j += 1;
            };
            Ok(Series { value: sum, tail_bound: lower + upper })
        }
    }
}

/// `h(‖x‖) = 1 - g^1(x)/g^1(0)`.
pub fn h_function(s: &StableSpec, x: Norm) -> Result<f64, AnalyticError> {
    if x == Norm::Zero {
        return Ok(0.0);
    }
    let g0 = green_function(s, 1.0, Norm::Zero)?.value;
    let gx = green_function(s, 1.0, x)?.value;
    Ok((1.0 - gx / g0).clamp(0.0, 1.0))
}

/// `γ_{a,b} = (1 - (g^1(a-b)/g^1(0))^2)^{1/2}`.
pub fn gamma_ab(s: &StableSpec, a: &PAdic, b: &PAdic) -> Result<f64, AnalyticError> {
    let d = a.checked_sub(b)?;
    let g0 = green_function(s, 1.0, Norm::Zero)?.value;
    let gx = green_function(s, 1.0, d.norm())?.value;
    Ok((1.0 - (gx / g0).powi(2)).max(0.0).sqrt())
}

/// `p/(‖x‖^α + p^α) + (1-p^{-1}) Σ_{k≥2} p^k/(‖x‖^α + p^{αk})` at `‖x‖ = p^n`.
pub fn green_gap_braces(s: &StableSpec, n: i32) -> Result<Series, AnalyticError> {
    if s.alpha <= 1.0 {
        return Err(AnalyticError::Divergent(s.alpha));
    }
    let p = s.pf();
    let q = 1.0 - 1.0 / p;
    let xa = p.powf(s.alpha * n as f64);
    let r = p.powf(1.0 - s.alpha);
    let mut sum = p / (xa + p.powf(s.alpha));
    let mut k = 2;
    loop {
        sum += q * p.powi(k) / (xa + p.powf(s.alpha * k as f64));
        let rest = q * r.powi(k + 1) / (1.0 - r);
        if rest < 1e-17 * sum {
            return Ok(Series { value: sum, tail_bound: rest });
        }
        k += 1;
    }
}

/// Limit of [`green_gap_braces`] as `‖x‖ → 0`.
pub fn green_gap_braces_limit(s: &StableSpec) -> Result<f64, AnalyticError> {
    if s.alpha <= 1.0 {
        return Err(AnalyticError::Divergent(s.alpha));
    }
    let p = s.pf();
    let r = p.powf(1.0 - s.alpha);
    Ok(r + (1.0 - 1.0 / p) * r * r / (1.0 - r))
}

/// `‖x‖^{α-1} · braces`, which equals `g^1(0) - g^1(x)`.
pub fn green_gap(s: &StableSpec, n: i32) -> Result<f64, AnalyticError> {
    Ok(s.pf().powf((s.alpha - 1.0) * n as f64) * green_gap_braces(s, n)?.value)
}

/// `K = (p^α - 1)/(1 - p^{-α-1})`.
pub fn derive_levy_constant(p: u32, alpha: f64) -> f64 {
    let p = p as f64;
    (p.powf(alpha) - 1.0) / (1.0 - p.powf(-alpha - 1.0))
}

/// `∫_{‖y‖ = p^m} χ(ξy) μ(dy)` for `‖ξ‖ = p^k`.
pub fn shell_character_integral(p: u32, m: i32, k: i32) -> f64 {
    let pf = p as f64;
    match m as i64 + k as i64 {
        s if s <= 0 => haar_shell(p, m),
        1 => -pf.powi(m - 1),
        _ => 0.0,
    }
}

/// `ψ(ξ) = Σ_m ∫_{‖y‖=p^m} (1 - χ(ξy)) K‖y‖^{-1-α} μ(dy)` at `‖ξ‖ = p^k`.
pub fn characteristic_exponent(p: u32, alpha: f64, k_const: f64, k: i32) -> Series {
    characteristic_exponent_truncated(p, alpha, k_const, k, i32::MAX)
}

/// Same as [`characteristic_exponent`] with shells `m ≤ -resolution` removed.
pub fn characteristic_exponent_truncated(p: u32, alpha: f64, k_const: f64, k: i32, resolution: i32) -> Series {
    let pf = p as f64;
    let first = if resolution == i32::MAX { 1 - k } else { (1 - k).max(1 - resolution) };
    let r = pf.powf(-alpha);
    let mut sum = 0.0;
    let mut m = first;
    loop {
        let jump_rate = k_const * pf.powf(-(1.0 + alpha) * m as f64);
        sum += jump_rate * (haar_shell(p, m) - shell_character_integral(p, m, k));
        // for m ≥ 2-k the character integral vanishes and terms are geometric
        let next = k_const * (1.0 - 1.0 / pf) * pf.powf(-alpha * (m + 1) as f64);
        let rest = next / (1.0 - r);
        if m >= 1 - k && rest < 1e-17 * sum {
            return Series { value: sum, tail_bound: rest };
        }
        m += 1;
    }
}
