//! Fixed-window p-adic numbers, balls and the additive character.
//!
//! A [`PAdic`] stores the base-`p` digits at exponents `lo..hi`. Arithmetic is
//! exact modulo `p^hi`: carries run toward higher exponents and fall off the
//! fine end of the window. Values whose digits are all zero are *effective
//! zeros*; their true norm is only known to be at most `p^{-hi}`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PAdicError {
    #[error("{0} is not a prime below 256")]
    InvalidPrime(u32),
    #[error("invalid window [{lo}, {hi})")]
    InvalidWindow { lo: i32, hi: i32 },
    #[error("operands differ in prime or window")]
    Mismatch,
    #[error("result needs digits at exponent {needed}, below the window start {lo}")]
    WindowOverflow { needed: i64, lo: i32 },
    #[error("division by an effective zero")]
    DivisionByZero,
    #[error("digit {digit} is out of range for p = {p}")]
    InvalidDigit { digit: u32, p: u32 },
    #[error("exponent {0} lies outside the window")]
    ExponentOutsideWindow(i64),
    #[error("cannot parse p-adic literal: {0}")]
    Parse(String),
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Primes usable as a digit base (digits are stored as `u8`).
pub fn check_prime(p: u32) -> Result<(), PAdicError> {
    if p < 256 && is_prime(p) {
        Ok(())
    } else {
        Err(PAdicError::InvalidPrime(p))
    }
}

/// Digit exponents `lo..hi` carried by every number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: i32,
    pub hi: i32,
}

impl Window {
    pub fn new(lo: i32, hi: i32) -> Result<Self, PAdicError> {
        if lo < hi && (hi as i64 - lo as i64) <= 4096 {
            Ok(Window { lo, hi })
        } else {
            Err(PAdicError::InvalidWindow { lo, hi })
        }
    }

    pub fn width(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn contains(&self, e: i64) -> bool {
        e >= self.lo as i64 && e < self.hi as i64
    }
}

impl Default for Window {
    fn default() -> Self {
        Window { lo: -64, hi: 64 }
    }
}

/// Norm of a p-adic number: `Pow(m)` means `‖x‖ = p^m`.
///
/// `Zero` sorts below every power, so the derived ordering is the ordering of
/// norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Norm {
    Zero,
    Pow(i32),
}

impl Norm {
    pub fn value(self, p: u32) -> f64 {
        match self {
            Norm::Zero => 0.0,
            Norm::Pow(m) => (p as f64).powi(m),
        }
    }

    pub fn exponent(self) -> Option<i32> {
        match self {
            Norm::Zero => None,
            Norm::Pow(m) => Some(m),
        }
    }

    pub fn is_zero(self) -> bool {
        self == Norm::Zero
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PAdic {
    p: u32,
    window: Window,
    digits: Vec<u8>,
}

impl PAdic {
    pub fn zero(p: u32, window: Window) -> Result<Self, PAdicError> {
        check_prime(p)?;
        Ok(PAdic { p, window, digits: vec![0; window.width()] })
    }

    /// Builds a number from digits listed from exponent `lowest` upward.
    pub fn from_digits(p: u32, window: Window, lowest: i32, digits: &[u8]) -> Result<Self, PAdicError> {
        let mut x = PAdic::zero(p, window)?;
        for (i, &d) in digits.iter().enumerate() {
            if d as u32 >= p {
                return Err(PAdicError::InvalidDigit { digit: d as u32, p });
            }
            let e = lowest as i64 + i as i64;
            if e >= window.hi as i64 {
                break;
            }
            if e < window.lo as i64 {
                if d != 0 {
                    return Err(PAdicError::ExponentOutsideWindow(e));
                }
                continue;
            }
            x.digits[(e - window.lo as i64) as usize] = d;
        }
        Ok(x)
    }

    pub fn from_i64(p: u32, window: Window, n: i64) -> Result<Self, PAdicError> {
        let mut x = PAdic::zero(p, window)?;
        let mut m = n.unsigned_abs();
        let mut e: i64 = 0;
        while m > 0 && e < window.hi as i64 {
            let d = (m % p as u64) as u8;
            if window.contains(e) {
                x.digits[(e - window.lo as i64) as usize] = d;
            } else if d != 0 {
                return Err(PAdicError::ExponentOutsideWindow(e));
            }
            m /= p as u64;
            e += 1;
        }
        Ok(if n < 0 { -&x } else { x })
    }

    /// `p^e`.
    pub fn p_power(p: u32, window: Window, e: i32) -> Result<Self, PAdicError> {
        let mut x = PAdic::zero(p, window)?;
        if e < window.lo {
            return Err(PAdicError::ExponentOutsideWindow(e as i64));
        }
        if e < window.hi {
            x.digits[(e - window.lo) as usize] = 1;
        }
        Ok(x)
    }

    pub fn one(p: u32, window: Window) -> Result<Self, PAdicError> {
        PAdic::p_power(p, window, 0)
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Digit at exponent `e` (zero outside the window).
    pub fn digit(&self, e: i64) -> u8 {
        if self.window.contains(e) {
            self.digits[(e - self.window.lo as i64) as usize]
        } else {
            0
        }
    }

    /// Digits from `lo` upward.
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    pub fn valuation(&self) -> Option<i32> {
        self.digits.iter().position(|&d| d != 0).map(|i| self.window.lo + i as i32)
    }

    pub fn norm(&self) -> Norm {
        match self.valuation() {
            Some(v) => Norm::Pow(-v),
            None => Norm::Zero,
        }
    }

    pub fn norm_value(&self) -> f64 {
        self.norm().value(self.p)
    }

    /// Upper bound on the true norm; for effective zeros this is `p^{-hi}`.
    pub fn norm_bound(&self) -> f64 {
        match self.norm() {
            Norm::Zero => (self.p as f64).powi(-self.window.hi),
            n => n.value(self.p),
        }
    }

    fn check_same(&self, other: &PAdic) -> Result<(), PAdicError> {
        if self.p == other.p && self.window == other.window {
            Ok(())
        } else {
            Err(PAdicError::Mismatch)
        }
    }

    pub fn checked_add(&self, other: &PAdic) -> Result<PAdic, PAdicError> {
        self.check_same(other)?;
        let p = self.p as u16;
        let mut out = Vec::with_capacity(self.digits.len());
        let mut carry = 0u16;
        for (&a, &b) in self.digits.iter().zip(&other.digits) {
            let s = a as u16 + b as u16 + carry;
            if s >= p {
                out.push((s - p) as u8);
                carry = 1;
            } else {
                out.push(s as u8);
                carry = 0;
            }
        }
        Ok(PAdic { p: self.p, window: self.window, digits: out })
    }

    pub fn checked_sub(&self, other: &PAdic) -> Result<PAdic, PAdicError> {
        self.check_same(other)?;
        let p = self.p as i16;
        let mut out = Vec::with_capacity(self.digits.len());
        let mut borrow = 0i16;
        for (&a, &b) in self.digits.iter().zip(&other.digits) {
            let s = a as i16 - b as i16 - borrow;
            if s < 0 {
                out.push((s + p) as u8);
                borrow = 1;
            } else {
                out.push(s as u8);
                borrow = 0;
            }
        }
        Ok(PAdic { p: self.p, window: self.window, digits: out })
    }

    /// Unit part digits starting at the valuation, `len` of them (zero padded).
    fn unit_digits(&self, v: i32, len: usize) -> Vec<u64> {
        (0..len).map(|k| self.digit(v as i64 + k as i64) as u64).collect()
    }

    fn normalize(p: u64, acc: &mut [u64]) {
        let mut carry = 0u64;
        for a in acc.iter_mut() {
            let s = *a + carry;
            *a = s % p;
            carry = s / p;
        }
    }

    pub fn checked_mul(&self, other: &PAdic) -> Result<PAdic, PAdicError> {
        self.check_same(other)?;
        let (vx, vy) = match (self.valuation(), other.valuation()) {
            (Some(a), Some(b)) => (a, b),
            _ => return PAdic::zero(self.p, self.window),
        };
        let v = vx as i64 + vy as i64;
        if v < self.window.lo as i64 {
            return Err(PAdicError::WindowOverflow { needed: v, lo: self.window.lo });
        }
        let mut z = PAdic::zero(self.p, self.window)?;
        if v >= self.window.hi as i64 {
            return Ok(z);
        }
        let len = (self.window.hi as i64 - v) as usize;
        let ux = self.unit_digits(vx, len);
        let uy = other.unit_digits(vy, len);
        let p = self.p as u64;
        let mut acc = vec![0u64; len];
        for (i, &a) in ux.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in uy[..len - i].iter().enumerate() {
                acc[i + j] += a * b;
            }
            // keep accumulators far from overflow on wide windows
            if i % 1024 == 1023 {
                PAdic::normalize(p, &mut acc);
            }
        }
        PAdic::normalize(p, &mut acc);
        let off = (v - self.window.lo as i64) as usize;
        for (k, &d) in acc.iter().enumerate() {
            z.digits[off + k] = d as u8;
        }
        Ok(z)
    }

    /// Quotient `self / other`, exact modulo `p^hi`.
    pub fn checked_div(&self, other: &PAdic) -> Result<PAdic, PAdicError> {
        self.check_same(other)?;
        let vy = other.valuation().ok_or(PAdicError::DivisionByZero)?;
        let vx = match self.valuation() {
            Some(v) => v,
            None => return PAdic::zero(self.p, self.window),
        };
        let v = vx as i64 - vy as i64;
        if v < self.window.lo as i64 {
            return Err(PAdicError::WindowOverflow { needed: v, lo: self.window.lo });
        }
        let mut q = PAdic::zero(self.p, self.window)?;
        if v >= self.window.hi as i64 {
            return Ok(q);
        }
        let len = (self.window.hi as i64 - v) as usize;
        let p = self.p as i64;
        let mut r: Vec<i64> = self.unit_digits(vx, len).into_iter().map(|d| d as i64).collect();
        let uy: Vec<i64> = other.unit_digits(vy, len).into_iter().map(|d| d as i64).collect();
        let inv = mod_inverse(uy[0], p);
        let off = (v - self.window.lo as i64) as usize;
        for k in 0..len {
            let qk = (r[k].rem_euclid(p) * inv) % p;
            q.digits[off + k] = qk as u8;
            // r -= qk·uy·p^k; the remainder at position k is a multiple of p
            let rest = r[k] - qk * uy[0];
            if k + 1 < len {
                r[k + 1] += rest / p;
                for j in 1..len - k {
                    r[k + j] -= qk * uy[j];
                }
            }
        }
        Ok(q)
    }

    /// Multiplies by `p^k` (shifts digits toward higher exponents for `k > 0`).
    pub fn shift(&self, k: i32) -> Result<PAdic, PAdicError> {
        let mut z = PAdic::zero(self.p, self.window)?;
        if let Some(v) = self.valuation() {
            if (v as i64 + k as i64) < self.window.lo as i64 {
                return Err(PAdicError::WindowOverflow { needed: v as i64 + k as i64, lo: self.window.lo });
            }
        }
        let w = self.digits.len() as i64;
        for (i, &d) in self.digits.iter().enumerate() {
            let j = i as i64 + k as i64;
            if d != 0 && j >= 0 && j < w {
                z.digits[j as usize] = d;
            }
        }
        Ok(z)
    }

    /// Same value in another window; fails if significant digits would be lost
    /// at the coarse end. Digits beyond the new `hi` are dropped.
    pub fn with_window(&self, window: Window) -> Result<PAdic, PAdicError> {
        let mut z = PAdic::zero(self.p, window)?;
        for (i, &d) in self.digits.iter().enumerate() {
            let e = self.window.lo as i64 + i as i64;
            if d == 0 {
                continue;
            }
            if e < window.lo as i64 {
                return Err(PAdicError::ExponentOutsideWindow(e));
            }
            if e < window.hi as i64 {
                z.digits[(e - window.lo as i64) as usize] = d;
            }
        }
        Ok(z)
    }

    /// Zeroes every digit at exponent `>= e`, giving the canonical center of
    /// the ball of radius `p^{-e}` containing `self`.
    pub fn truncate_from(&self, e: i64) -> PAdic {
        let mut z = self.clone();
        for (i, d) in z.digits.iter_mut().enumerate() {
            if self.window.lo as i64 + i as i64 >= e {
                *d = 0;
            }
        }
        z
    }

    /// `{p^k x}`, the fractional part of `p^k x` as a real in `[0, 1)`.
    pub fn fractional_part_scaled(&self, k: i32) -> f64 {
        // digit at exponent e contributes d·p^{e+k}; only e + k < 0 matters
        let p = self.p as f64;
        let top = (-(k as i64) - 1).min(self.window.hi as i64 - 1);
        let depth = (64.0 / p.log2()).ceil() as i64 + 2;
        let bottom = (top - depth).max(self.window.lo as i64);
        let mut acc = 0.0;
        let mut e = bottom;
        while e <= top {
            acc = (acc + self.digit(e) as f64) / p;
            e += 1;
        }
        // acc = Σ d_e p^{e - top - 1}; rescale to p^{e+k}
        acc * p.powi((top + 1 + k as i64) as i32)
    }

    pub fn fractional_part(&self) -> f64 {
        self.fractional_part_scaled(0)
    }

    /// Canonical additive character `χ(x) = exp(2πi {x})`.
    pub fn character(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * self.fractional_part())
    }

    /// `χ(p^k x)`, used for `χ(ξx)` with `ξ = p^k`.
    pub fn character_scaled(&self, k: i32) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * self.fractional_part_scaled(k))
    }

    /// Uniform sample from the Haar measure on a ball.
    pub fn sample_uniform<R: Rng + ?Sized>(ball: &Ball, rng: &mut R) -> Result<PAdic, PAdicError> {
        let c = &ball.center;
        let first = -(ball.radius_exp as i64);
        if first < c.window.lo as i64 {
            return Err(PAdicError::ExponentOutsideWindow(first));
        }
        let mut z = c.clone();
        let start = (first - c.window.lo as i64).min(c.digits.len() as i64) as usize;
        for d in &mut z.digits[start..] {
            *d = rng.random_range(0..c.p) as u8;
        }
        Ok(z)
    }

    /// Uniform sample from the shell `‖y‖ = p^m`.
    pub fn sample_uniform_shell<R: Rng + ?Sized>(p: u32, window: Window, m: i32, rng: &mut R) -> Result<PAdic, PAdicError> {
        let lead = -(m as i64);
        if !window.contains(lead) {
            return Err(PAdicError::ExponentOutsideWindow(lead));
        }
        let mut z = PAdic::zero(p, window)?;
        let start = (lead - window.lo as i64) as usize;
        z.digits[start] = rng.random_range(1..p) as u8;
        for d in &mut z.digits[start + 1..] {
            *d = rng.random_range(0..p) as u8;
        }
        Ok(z)
    }

    /// Parses `p^v * (d0.d1.d2)` (digits from exponent `v` upward) or `0`.
    pub fn parse(s: &str, p: u32, window: Window) -> Result<PAdic, PAdicError> {
        let s = s.trim();
        if s == "0" {
            return PAdic::zero(p, window);
        }
        let bad = || PAdicError::Parse(s.to_string());
        let (head, body) = s.split_once('*').ok_or_else(bad)?;
        let (base, exp) = head.trim().split_once('^').ok_or_else(bad)?;
        let base: u32 = base.trim().parse().map_err(|_| bad())?;
        if base != p {
            return Err(PAdicError::Mismatch);
        }
        let v: i32 = exp.trim().parse().map_err(|_| bad())?;
        let body = body.trim();
        let inner = body.strip_prefix('(').and_then(|b| b.strip_suffix(')')).ok_or_else(bad)?;
        let digits: Vec<u8> = inner
            .split('.')
            .map(|d| d.trim().parse::<u32>().map_err(|_| bad()))
            .map(|d| d.and_then(|d| if d < p { Ok(d as u8) } else { Err(PAdicError::InvalidDigit { digit: d, p }) }))
            .collect::<Result<_, _>>()?;
        if digits.first() == Some(&0) || digits.is_empty() {
            return Err(bad());
        }
        PAdic::from_digits(p, window, v, &digits)
    }
}

fn mod_inverse(a: i64, p: i64) -> i64 {
    let (mut r0, mut r1) = (a.rem_euclid(p), p);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(p)
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.valuation() {
            None => return write!(f, "0"),
            Some(v) => v,
        };
        let last = self.digits.iter().rposition(|&d| d != 0).unwrap() as i32 + self.window.lo;
        let body: Vec<String> = (v..=last).map(|e| self.digit(e as i64).to_string()).collect();
        write!(f, "{}^{} * ({})", self.p, v, body.join("."))
    }
}

impl fmt::Debug for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PAdic[{}]", self)
    }
}

impl Add for &PAdic {
    type Output = PAdic;
    fn add(self, rhs: &PAdic) -> PAdic {
        self.checked_add(rhs).expect("p-adic operands differ in prime or window")
    }
}

impl Sub for &PAdic {
    type Output = PAdic;
    fn sub(self, rhs: &PAdic) -> PAdic {
        self.checked_sub(rhs).expect("p-adic operands differ in prime or window")
    }
}

impl Neg for &PAdic {
    type Output = PAdic;
    fn neg(self) -> PAdic {
        let zero = PAdic { p: self.p, window: self.window, digits: vec![0; self.digits.len()] };
        &zero - self
    }
}

/// Closed ball `B(center, p^radius_exp)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Ball {
    center: PAdic,
    radius_exp: i32,
}

impl Ball {
    /// The stored center is canonical: digits at exponents `>= -r` are zeroed.
    pub fn new(center: &PAdic, radius_exp: i32) -> Ball {
        Ball { center: center.truncate_from(-(radius_exp as i64)), radius_exp }
    }

    pub fn center(&self) -> &PAdic {
        &self.center
    }

    pub fn radius_exp(&self) -> i32 {
        self.radius_exp
    }

    pub fn prime(&self) -> u32 {
        self.center.p
    }

    pub fn contains(&self, x: &PAdic) -> bool {
        if x.p != self.center.p {
            return false;
        }
        let top = -(self.radius_exp as i64);
        let lo = self.center.window.lo.min(x.window.lo) as i64;
        (lo..top).all(|e| x.digit(e) == self.center.digit(e))
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        other.radius_exp <= self.radius_exp && self.contains(&other.center)
    }

    pub fn intersects(&self, other: &Ball) -> bool {
        self.contains_ball(other) || other.contains_ball(self)
    }

    /// Intersection of two balls, which is either empty or the smaller one.
    pub fn intersection(&self, other: &Ball) -> Option<Ball> {
        if self.contains_ball(other) {
            Some(other.clone())
        } else if other.contains_ball(self) {
            Some(self.clone())
        } else {
            None
        }
    }

    pub fn haar_measure(&self) -> f64 {
        haar_ball(self.center.p, self.radius_exp)
    }
}

pub fn haar_ball(p: u32, r: i32) -> f64 {
    (p as f64).powi(r)
}

/// Haar measure of the shell `‖y‖ = p^m`.
pub fn haar_shell(p: u32, m: i32) -> f64 {
    (p as f64).powi(m) * (1.0 - 1.0 / p as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w() -> Window {
        Window::new(-8, 8).unwrap()
    }

    fn num(p: u32, n: i64) -> PAdic {
        PAdic::from_i64(p, w(), n).unwrap()
    }

    #[test]
    fn small_carry() {
        let two = &num(2, 1) + &num(2, 1);
        assert_eq!(two.digit(1), 1);
        assert_eq!(two.digit(0), 0);
        assert_eq!(two.norm(), Norm::Pow(-1));
    }

    #[test]
    fn negation_wraps() {
        let x = num(3, 5);
        assert!((&x + &(-&x)).is_zero());
        assert_eq!(num(3, -1).digit(7), 2);
    }

    #[test]
    fn integer_products_agree_with_machine_arithmetic() {
        for a in -40i64..40 {
            for b in [-7i64, -1, 1, 3, 12, 25] {
                let prod = num(5, a).checked_mul(&num(5, b)).unwrap();
                assert_eq!(prod, num(5, a * b), "{a}·{b}");
            }
        }
    }

    #[test]
    fn division_by_three() {
        let x = num(2, 1).checked_div(&num(2, 3)).unwrap();
        assert_eq!(x.checked_mul(&num(2, 3)).unwrap(), num(2, 1));
        let half = num(2, 1).checked_div(&num(2, 2)).unwrap();
        assert_eq!(half.norm(), Norm::Pow(1));
        assert!(num(2, 1).checked_div(&num(2, 0)).is_err());
    }

    #[test]
    fn character_of_half_is_minus_one() {
        let half = PAdic::p_power(2, w(), -1).unwrap();
        let c = half.character();
        assert!((c.re + 1.0).abs() < 1e-15 && c.im.abs() < 1e-15);
        assert!((num(2, 13).character().re - 1.0).abs() < 1e-15);
        assert!((half.character_scaled(1).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn literal_round_trip() {
        let x = PAdic::from_digits(2, w(), -3, &[1, 0, 1]).unwrap();
        assert_eq!(x.to_string(), "2^-3 * (1.0.1)");
        assert_eq!(PAdic::parse("2^-3 * (1.0.1)", 2, w()).unwrap(), x);
        assert_eq!(PAdic::parse("0", 2, w()).unwrap().to_string(), "0");
        assert!(PAdic::parse("2^0 * (0.1)", 2, w()).is_err());
    }

    #[test]
    fn ball_contains_and_measure() {
        let b = Ball::new(&num(3, 4), 0);
        assert!(b.contains(&num(3, 1)));
        assert!(!b.contains(&PAdic::p_power(3, w(), -1).unwrap()));
        assert_eq!(Ball::new(&num(3, 0), 0).haar_measure(), 1.0);
        assert_eq!(Ball::new(&num(3, 0), 2).haar_measure(), 9.0);
        assert!((haar_shell(2, 3) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn shell_samples_have_exact_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in -5..5 {
            let y = PAdic::sample_uniform_shell(3, w(), m, &mut rng).unwrap();
            assert_eq!(y.norm(), Norm::Pow(m));
        }
    }

    #[test]
    fn radius_outside_window_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = Ball::new(&num(2, 0), 20);
        assert!(PAdic::sample_uniform(&b, &mut rng).is_err());
        assert!(PAdic::sample_uniform_shell(2, w(), 9, &mut rng).is_err());
    }

    #[test]
    fn rejects_composite_base() {
        assert_eq!(PAdic::zero(4, w()).unwrap_err(), PAdicError::InvalidPrime(4));
    }
}
