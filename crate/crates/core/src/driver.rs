//! Exact-to-resolution sampling of the stable process.
//!
//! A path at resolution `M` keeps every jump of norm `> p^{-M}`. The omitted
//! jumps sum to something of norm `≤ p^{-M}` by the ultrametric inequality,
//! so the path is exact at that resolution and needs no compensator.
//!
//! Time is measured in integer ticks (`2^32` per unit) so that occupation
//! times are exact sums.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{ball_probability, StableSpec};
use crate::padic::{Norm, PAdic, PAdicError, Window};
use crate::rng::{stream_rng, SeedRecord};

pub const TICKS_PER_UNIT: u64 = 1 << 32;

pub fn to_ticks(t: f64) -> u64 {
    (t * TICKS_PER_UNIT as f64).round() as u64
}

pub fn ticks_to_time(ticks: u64) -> f64 {
    ticks as f64 / TICKS_PER_UNIT as f64
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error(transparent)]
    PAdic(#[from] PAdicError),
    #[error("resolution {resolution} needs digits at exponent {resolution}, outside window [{lo}, {hi})")]
    WindowTooSmall { resolution: i32, lo: i32, hi: i32 },
    #[error("invalid horizon {0}")]
    InvalidHorizon(f64),
    #[error("base resolution {base} exceeds resolution {resolution}")]
    InvalidBase { base: i32, resolution: i32 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

/// Poisson intensities of jumps by shell at a given resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpIntensities {
    p: u32,
    alpha: f64,
    levy_constant: f64,
    resolution: i32,
}

impl JumpIntensities {
    /// Rate of jumps with norm exactly `p^m`: `K(1-p^{-1})p^{-αm}` for `m > -M`.
    pub fn rate(&self, m: i32) -> f64 {
        if m <= -self.resolution {
            return 0.0;
        }
        let p = self.p as f64;
        self.levy_constant * (1.0 - 1.0 / p) * p.powf(-self.alpha * m as f64)
    }

    /// `Λ_M = K(1-p^{-1}) p^{α(M-1)} / (1 - p^{-α})`.
    pub fn total(&self) -> f64 {
        let p = self.p as f64;
        self.levy_constant * (1.0 - 1.0 / p) * p.powf(self.alpha * (self.resolution - 1) as f64)
            / (1.0 - p.powf(-self.alpha))
    }

    /// Rate of jumps with norm `> p^{m_big}`.
    pub fn rate_above(&self, m_big: i32) -> f64 {
        let first = (m_big + 1).max(1 - self.resolution);
        let p = self.p as f64;
        self.rate(first) / (1.0 - p.powf(-self.alpha))
    }

    pub fn resolution(&self) -> i32 {
        self.resolution
    }
}

pub fn jump_intensities(spec: &StableSpec, resolution: i32) -> JumpIntensities {
    JumpIntensities { p: spec.p(), alpha: spec.alpha(), levy_constant: spec.levy_constant(), resolution }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JumpEvent {
    pub tick: u64,
    pub jump: PAdic,
}

impl JumpEvent {
    pub fn time(&self) -> f64 {
        ticks_to_time(self.tick)
    }
}

/// Finite record of a path of `Z` on `[0, T]` at resolution `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    spec: StableSpec,
    horizon: u64,
    resolution: i32,
    window: Window,
    events: Vec<JumpEvent>,
    seed: Option<SeedRecord>,
    clamped: u32,
}

impl JumpPath {
    /// Builds a path from events; they must be time-sorted, inside the horizon
    /// and of norm `> p^{-M}`.
    pub fn from_events(
        spec: StableSpec,
        horizon: u64,
        resolution: i32,
        window: Window,
        events: Vec<JumpEvent>,
        seed: Option<SeedRecord>,
    ) -> Result<JumpPath, DriverError> {
        for (i, e) in events.iter().enumerate() {
            if e.jump.prime() != spec.p() || e.jump.window() != window {
                return Err(DriverError::PAdic(PAdicError::Mismatch));
            }
            if e.tick > horizon || (i > 0 && events[i - 1].tick > e.tick) {
                return Err(DriverError::InvalidPath(format!("event {i} out of order or past the horizon")));
            }
            if e.jump.norm() <= Norm::Pow(-resolution) {
                return Err(DriverError::InvalidPath(format!("event {i} is below the resolution")));
            }
        }
        Ok(JumpPath { spec, horizon, resolution, window, events, seed, clamped: 0 })
    }

    pub fn spec(&self) -> &StableSpec {
        &self.spec
    }

    pub fn horizon_ticks(&self) -> u64 {
        self.horizon
    }

    pub fn horizon(&self) -> f64 {
        ticks_to_time(self.horizon)
    }

    pub fn resolution(&self) -> i32 {
        self.resolution
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn events(&self) -> &[JumpEvent] {
        &self.events
    }

    pub fn seed(&self) -> Option<SeedRecord> {
        self.seed
    }

    /// Number of jump norms that fell outside the window and were redrawn.
    pub fn clamped(&self) -> u32 {
        self.clamped
    }

    pub fn zero(&self) -> PAdic {
        PAdic::zero(self.spec.p(), self.window).expect("validated prime")
    }

    /// `Z(t) = Σ_{t_i ≤ t} ΔZ_i`.
    pub fn value_at_tick(&self, tick: u64) -> PAdic {
        let mut z = self.zero();
        for e in self.events.iter().take_while(|e| e.tick <= tick) {
            z = &z + &e.jump;
        }
        z
    }

    pub fn value_at(&self, t: f64) -> PAdic {
        self.value_at_tick(to_ticks(t))
    }

    /// Value just after each event.
    pub fn running_values(&self) -> Vec<PAdic> {
        let mut z = self.zero();
        self.events
            .iter()
            .map(|e| {
                z = &z + &e.jump;
                z.clone()
            })
            .collect()
    }

    /// Constancy intervals `[start, end)` covering `[0, horizon]` with the value held there.
    pub fn segments(&self) -> Vec<(u64, u64, PAdic)> {
        let mut out = Vec::with_capacity(self.events.len() + 1);
        let mut z = self.zero();
        let mut start = 0;
        for e in &self.events {
            if e.tick > start {
                out.push((start, e.tick, z.clone()));
            }
            z = &z + &e.jump;
            start = e.tick;
        }
        out.push((start, self.horizon, z));
        out
    }

    /// The path restricted to `[0, tick]`.
    pub fn history(&self, tick: u64) -> JumpPath {
        let tick = tick.min(self.horizon);
        JumpPath {
            events: self.events.iter().take_while(|e| e.tick <= tick).cloned().collect(),
            horizon: tick,
            ..self.clone()
        }
    }

    /// Smallest gap between consecutive event times (including time 0).
    pub fn min_gap(&self) -> Option<u64> {
        let mut prev = 0;
        let mut best: Option<u64> = None;
        for e in &self.events {
            let g = e.tick - prev;
            if g > 0 {
                best = Some(best.map_or(g, |b| b.min(g)));
            }
            prev = e.tick;
        }
        best
    }

    pub fn with_events(&self, events: Vec<JumpEvent>) -> JumpPath {
        JumpPath { events, ..self.clone() }
    }
}

/// Draws a uniform point of the shell `‖y‖ = p^m`.
fn shell_point<R: Rng + ?Sized>(p: u32, window: Window, m: i32, rng: &mut R) -> PAdic {
    PAdic::sample_uniform_shell(p, window, m, rng).expect("shell inside window")
}

/// `G ≥ 0` with `P(G ≥ g) = p^{-αg}`.
fn geometric<R: Rng + ?Sized>(p: f64, alpha: f64, rng: &mut R) -> i32 {
    let u: f64 = 1.0 - rng.random::<f64>();
    (-u.ln() / (alpha * p.ln())).floor().min(1e6) as i32
}

/// Largest shell exponent representable: `-m ≥ lo`.
fn max_shell(window: Window) -> i32 {
    -window.lo
}

fn check_resolution(window: Window, resolution: i32) -> Result<(), DriverError> {
    // the finest kept shell is 1 - M, whose leading digit sits at M - 1
    if resolution > window.hi || 1 - resolution > max_shell(window) {
        return Err(DriverError::WindowTooSmall { resolution, lo: window.lo, hi: window.hi });
    }
    Ok(())
}

/// Draws the events of a shell group on `[start, start + len)`.
#[allow(clippy::too_many_arguments)]
fn draw_group<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &StableSpec,
    window: Window,
    rate: f64,
    shells: Shells,
    start: u64,
    len: u64,
    out: &mut Vec<JumpEvent>,
) -> u32 {
    let mean = rate * ticks_to_time(len);
    let n = if mean > 0.0 { Poisson::new(mean).expect("positive mean").sample(rng) as u64 } else { 0 };
    let p = spec.p();
    let mut clamped = 0;
    for _ in 0..n {
        let tick = start + rng.random_range(0..len);
        let m = match shells {
            Shells::Single(m) => m,
            Shells::From(m0) => loop {
                let m = m0 + geometric(p as f64, spec.alpha(), rng);
                if m <= max_shell(window) {
                    break m;
                }
                clamped += 1;
            },
        };
        out.push(JumpEvent { tick, jump: shell_point(p, window, m, rng) });
    }
    clamped
}

#[derive(Debug, Clone, Copy)]
enum Shells {
    Single(i32),
    From(i32),
}

/// Single-stream sampler: Poisson number of jumps on `[0, T]`, geometric shells.
pub fn sample_path<R: Rng + ?Sized>(
    spec: &StableSpec,
    horizon: f64,
    resolution: i32,
    window: Window,
    rng: &mut R,
) -> Result<JumpPath, DriverError> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(DriverError::InvalidHorizon(horizon));
    }
    check_resolution(window, resolution)?;
    let intensities = jump_intensities(spec, resolution);
    let h = to_ticks(horizon);
    let mut events = Vec::new();
    let clamped = if h > 0 {
        draw_group(rng, spec, window, intensities.total(), Shells::From(1 - resolution), 0, h + 1, &mut events)
    } else {
        0
    };
    events.sort_by_key(|e| e.tick);
    Ok(JumpPath { spec: *spec, horizon: h, resolution, window, events, seed: None, clamped })
}

/// Deterministic, horizon-consistent and resolution-coupled path sampler.
///
/// Time is cut into unit blocks. In each block the shells `m > -base` are
/// drawn from one stream and each finer shell `-base ≥ m > -M` from its own
/// stream, so paths of the same seed and base agree on every jump they share
/// and extending the horizon only appends events.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSampler {
    spec: StableSpec,
    resolution: i32,
    base_resolution: i32,
    window: Window,
    seed: u64,
}

impl PathSampler {
    pub fn new(spec: &StableSpec, resolution: i32, window: Window, seed: u64) -> Result<PathSampler, DriverError> {
        check_resolution(window, resolution)?;
        Ok(PathSampler { spec: *spec, resolution, base_resolution: resolution, window, seed })
    }

    /// Shares the coarse stream with every sampler of the same `base`.
    pub fn with_base_resolution(mut self, base: i32) -> Result<PathSampler, DriverError> {
        if base > self.resolution {
            return Err(DriverError::InvalidBase { base, resolution: self.resolution });
        }
        self.base_resolution = base;
        Ok(self)
    }

    pub fn spec(&self) -> &StableSpec {
        &self.spec
    }

    pub fn resolution(&self) -> i32 {
        self.resolution
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn block(&self, stream: u64, block: u64, out: &mut Vec<JumpEvent>) -> u32 {
        let start = block * TICKS_PER_UNIT;
        let base = jump_intensities(&self.spec, self.base_resolution);
        let mut rng = stream_rng(self.seed, &[stream, block, 0]);
        let mut clamped = draw_group(
            &mut rng,
            &self.spec,
            self.window,
            base.total(),
            Shells::From(1 - self.base_resolution),
            start,
            TICKS_PER_UNIT,
            out,
        );
        let fine = jump_intensities(&self.spec, self.resolution);
        for m in 1 - self.resolution..=-self.base_resolution {
            let mut rng = stream_rng(self.seed, &[stream, block, 1, m as i64 as u64]);
            clamped +=
                draw_group(&mut rng, &self.spec, self.window, fine.rate(m), Shells::Single(m), start, TICKS_PER_UNIT, out);
        }
        clamped
    }

    /// Path number `stream` on `[0, horizon]`.
    pub fn sample(&self, stream: u64, horizon: f64) -> Result<JumpPath, DriverError> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(DriverError::InvalidHorizon(horizon));
        }
        let h = to_ticks(horizon);
        let blocks = h / TICKS_PER_UNIT + 1;
        let mut events = Vec::new();
        let mut clamped = 0;
        for b in 0..blocks {
            let mut block_events = Vec::new();
            clamped += self.block(stream, b, &mut block_events);
            block_events.sort_by_key(|e| e.tick);
            events.extend(block_events.into_iter().filter(|e| e.tick <= h && e.tick > 0));
        }
        Ok(JumpPath {
            spec: self.spec,
            horizon: h,
            resolution: self.resolution,
            window: self.window,
            events,
            seed: Some(SeedRecord { seed: self.seed, stream }),
            clamped,
        })
    }
}

/// Inverse-CDF sampler for `Z(t)` drawn in one shot from the exact law.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    p: u32,
    window: Window,
    m_lo: i32,
    cdf: Vec<f64>,
}

impl IncrementSampler {
    pub fn new(spec: &StableSpec, t: f64, window: Window) -> IncrementSampler {
        if t <= 0.0 {
            return IncrementSampler { p: spec.p(), window, m_lo: 0, cdf: Vec::new() };
        }
        let mut m_lo = 0;
        while ball_probability(spec, m_lo, t).value > 1e-18 && m_lo > -4000 {
            m_lo -= 1;
        }
        let mut cdf = Vec::new();
        let mut m = m_lo;
        loop {
            let v = ball_probability(spec, m, t).value;
            cdf.push(v);
            if 1.0 - v < 1e-17 || m > 4000 {
                break;
            }
            m += 1;
        }
        IncrementSampler { p: spec.p(), window, m_lo, cdf }
    }

    /// Norm exponent of the next draw, or `None` for zero.
    pub fn sample_shell<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<i32> {
        if self.cdf.is_empty() {
            return None;
        }
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        if idx == 0 {
            // below the table: probability under 1e-18
            return None;
        }
        Some(self.m_lo + idx as i32)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PAdic {
        loop {
            match self.sample_shell(rng) {
                None => return PAdic::zero(self.p, self.window).expect("validated prime"),
                Some(m) if -m >= self.window.hi => return PAdic::zero(self.p, self.window).expect("validated prime"),
                Some(m) if m > max_shell(self.window) => continue,
                Some(m) => return shell_point(self.p, self.window, m, rng),
            }
        }
    }
}

/// One draw of `Z(t)` from its exact law.
pub fn sample_increment<R: Rng + ?Sized>(spec: &StableSpec, t: f64, window: Window, rng: &mut R) -> PAdic {
    IncrementSampler::new(spec, t, window).sample(rng)
}

/// `f_M`: a jump of norm `p^{M+m}`, `m ≥ 0`, becomes `p^m z` of norm `p^M`.
pub fn truncate_jump(z: &PAdic, m_big: i32) -> PAdic {
    match z.norm() {
        Norm::Pow(n) if n > m_big => z.shift(n - m_big).expect("shifting toward finer digits"),
        _ => z.clone(),
    }
}

pub fn truncate_large_jumps(path: &JumpPath, m_big: i32) -> JumpPath {
    path.with_events(
        path.events.iter().map(|e| JumpEvent { tick: e.tick, jump: truncate_jump(&e.jump, m_big) }).collect(),
    )
}

/// No jump on the path has norm above `p^{m_big}`.
pub fn omega_event(path: &JumpPath, m_big: i32) -> bool {
    path.events.iter().all(|e| e.jump.norm() <= Norm::Pow(m_big))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec() -> StableSpec {
        StableSpec::new(2, 2.0).unwrap()
    }

    #[test]
    fn rate_at_zero_for_two_and_two() {
        let i = jump_intensities(&spec(), 5);
        assert!((i.rate(0) - 12.0 / 7.0).abs() < 1e-14);
        assert!((i.rate(3) / i.rate(2) - 0.25).abs() < 1e-15);
        let partial: f64 = (-4..200).map(|m| i.rate(m)).sum();
        assert!((partial - i.total()).abs() < 1e-12 * i.total());
        let above: f64 = (3..200).map(|m| i.rate(m)).sum();
        assert!((above - i.rate_above(2)).abs() < 1e-12 * above);
    }

    #[test]
    fn path_starts_at_zero_and_is_sorted() {
        let s = PathSampler::new(&spec(), 3, Window::default(), 11).unwrap();
        let path = s.sample(0, 2.5).unwrap();
        assert!(path.value_at(0.0).is_zero());
        assert!(path.events().windows(2).all(|w| w[0].tick <= w[1].tick));
        assert!(path.events().iter().all(|e| e.jump.norm() > Norm::Pow(-3)));
        assert_eq!(path.value_at(2.5), path.running_values().last().cloned().unwrap_or_else(|| path.zero()));
    }

    #[test]
    fn horizons_are_nested() {
        let s = PathSampler::new(&spec(), 2, Window::default(), 3).unwrap();
        let short = s.sample(4, 1.3).unwrap();
        let long = s.sample(4, 3.0).unwrap();
        assert_eq!(long.history(short.horizon_ticks()).events(), short.events());
    }

    #[test]
    fn window_checks() {
        let w = Window::new(-4, 4).unwrap();
        assert!(PathSampler::new(&spec(), 5, w, 0).is_err());
        assert!(PathSampler::new(&spec(), 4, w, 0).is_ok());
    }

    #[test]
    fn increment_at_time_zero_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_increment(&spec(), 0.0, Window::default(), &mut rng).is_zero());
    }

    #[test]
    fn truncation_maps_norms() {
        let w = Window::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in -3..6 {
            let z = PAdic::sample_uniform_shell(3, w, n, &mut rng).unwrap();
            let f = truncate_jump(&z, 2);
            assert_eq!(f.norm(), Norm::Pow(n.min(2)));
            assert_eq!(truncate_jump(&f, 2), f);
        }
    }
}
