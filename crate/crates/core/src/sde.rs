//! Weak solutions of `dX = b(X-) dZ`.
//!
//! Two constructions are provided. The direct solver feeds each driver jump
//! through `X ← X + b(X-)ΔZ`. The time-change solver runs the driver on the
//! clock `C(s) = ∫_0^s ‖b(x+Z(r))‖^{-α} dr` and sets `X(t) = x + Z(τ_t)`,
//! where `τ` inverts `C`; the driver of that solution is recovered by
//! dividing each jump by `b(X-)`.

use serde::Serialize;
use thiserror::Error;

use crate::analytic::{CoefficientFunction, StableSpec};
use crate::driver::{ticks_to_time, to_ticks, DriverError, JumpEvent, JumpPath, PathSampler, TICKS_PER_UNIT};
use crate::padic::{Norm, PAdic, PAdicError, Window};
use crate::pathfile::PathRecord;
use crate::rng::SeedRecord;
use crate::stats::{chi_square_two_sample, par_map, ChiSquareResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdeError {
    #[error(transparent)]
    PAdic(#[from] PAdicError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error("b(X-) = 0 at the jump at t = {time}; the driver cannot be recovered there")]
    DivisionByZero { time: f64 },
    #[error("the clock C stayed below {target} up to driver time {reached}")]
    HorizonExceeded { target: f64, reached: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    TimeChange,
}

/// Step function `X` on `[0, T]` with `X(0) = x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub spec: StableSpec,
    pub start: PAdic,
    pub horizon: u64,
    pub resolution: i32,
    pub method: Method,
    pub events: Vec<JumpEvent>,
    /// Time after which `X` is frozen because `b` vanished.
    pub absorbed_at: Option<f64>,
    pub seed: Option<SeedRecord>,
}

impl SolutionPath {
    pub fn value_at_tick(&self, tick: u64) -> PAdic {
        let mut z = self.start.clone();
        for e in self.events.iter().take_while(|e| e.tick <= tick) {
            z = &z + &e.jump;
        }
        z
    }

    pub fn value_at(&self, t: f64) -> PAdic {
        self.value_at_tick(to_ticks(t))
    }

    pub fn final_value(&self) -> PAdic {
        self.value_at_tick(self.horizon)
    }

    /// Left limits `X(t_j-)` at each event (events sharing a tick share it).
    pub fn left_limits(&self) -> Vec<PAdic> {
        let mut out = Vec::with_capacity(self.events.len());
        let mut x = self.start.clone();
        let mut left = x.clone();
        for (i, e) in self.events.iter().enumerate() {
            if i == 0 || self.events[i - 1].tick != e.tick {
                left = x.clone();
            }
            out.push(left.clone());
            x = &x + &e.jump;
        }
        out
    }

    pub fn to_record(&self) -> PathRecord {
        PathRecord {
            p: self.spec.p(),
            alpha: self.spec.alpha(),
            resolution: self.resolution,
            horizon: self.horizon,
            seed: self.seed,
            window: self.start.window(),
            start: Some(self.start.clone()),
            events: self.events.clone(),
        }
    }
}

/// `X(t) = X(0)` for every `t`.
pub fn triviality_check(solution: &SolutionPath) -> bool {
    solution.events.iter().all(|e| e.jump.is_zero())
}

/// Jump-by-jump solution driven by `path`.
pub fn solve_direct(b: &CoefficientFunction, x: &PAdic, path: &JumpPath) -> Result<SolutionPath, SdeError> {
    let mut events = Vec::new();
    let mut cur = x.clone();
    let mut left = cur.clone();
    for (i, e) in path.events().iter().enumerate() {
        if i == 0 || path.events()[i - 1].tick != e.tick {
            left = cur.clone();
        }
        let jump = b.eval(&left)?.checked_mul(&e.jump)?;
        if !jump.is_zero() {
            cur = cur.checked_add(&jump)?;
            events.push(JumpEvent { tick: e.tick, jump });
        }
    }
    Ok(SolutionPath {
        spec: *path.spec(),
        start: x.clone(),
        horizon: path.horizon_ticks(),
        resolution: path.resolution(),
        method: Method::Direct,
        events,
        absorbed_at: None,
        seed: path.seed(),
    })
}

/// One constancy interval of `s ↦ ‖b(x + Z(s))‖^{-α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockPiece {
    /// Driver time at the start of the piece, in ticks.
    pub s_start: u64,
    pub s_end: u64,
    /// `C(s_start)`.
    pub c_start: f64,
    /// `‖b‖^{-α}`; infinite where `b` vanishes.
    pub slope: f64,
}

/// The clock `C` and its inverse `τ` along one driver path.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChange {
    pub pieces: Vec<ClockPiece>,
    /// First driver time (ticks) at which `b(x + Z(s)) = 0`.
    pub absorption: Option<u64>,
}

impl TimeChange {
    /// `C(s)`, infinite after absorption.
    pub fn clock(&self, s: f64) -> f64 {
        let st = s * TICKS_PER_UNIT as f64;
        for piece in &self.pieces {
            if st <= piece.s_end as f64 {
                if piece.slope.is_infinite() {
                    return if st > piece.s_start as f64 { f64::INFINITY } else { piece.c_start };
                }
                return piece.c_start + piece.slope * (st - piece.s_start as f64) / TICKS_PER_UNIT as f64;
            }
        }
        self.end_clock()
    }

    /// `C` at the end of the driver path.
    pub fn end_clock(&self) -> f64 {
        match self.pieces.last() {
            Some(p) if p.slope.is_infinite() => f64::INFINITY,
            Some(p) => p.c_start + p.slope * ticks_to_time(p.s_end - p.s_start),
            None => 0.0,
        }
    }

    /// `τ_t = inf{s : C(s) > t}` in driver time; saturates at absorption or at the path end.
    pub fn tau(&self, t: f64) -> f64 {
        for piece in &self.pieces {
            if piece.slope.is_infinite() {
                return ticks_to_time(piece.s_start);
            }
            let c_end = piece.c_start + piece.slope * ticks_to_time(piece.s_end - piece.s_start);
            if t < c_end {
                return ticks_to_time(piece.s_start) + (t - piece.c_start).max(0.0) / piece.slope;
            }
        }
        self.pieces.last().map_or(0.0, |p| ticks_to_time(p.s_end))
    }

    /// `∫_0^t ‖b(x + Z(τ_r))‖^α dr`, evaluated piece by piece.
    pub fn tau_integral(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for piece in &self.pieces {
            if piece.slope.is_infinite() || piece.c_start >= t {
                break;
            }
            let c_end = piece.c_start + piece.slope * ticks_to_time(piece.s_end - piece.s_start);
            acc += (c_end.min(t) - piece.c_start) / piece.slope;
        }
        acc
    }
}

pub fn build_time_change(b: &CoefficientFunction, x: &PAdic, path: &JumpPath) -> Result<TimeChange, SdeError> {
    let alpha = path.spec().alpha();
    let p = path.spec().p() as f64;
    let mut pieces = Vec::new();
    let mut c = 0.0;
    let mut absorption = None;
    for (a, e, z) in path.segments() {
        let slope = match b.norm_at(&x.checked_add(&z)?)? {
            Norm::Zero => f64::INFINITY,
            Norm::Pow(k) => p.powf(-alpha * k as f64),
        };
        if e > a || slope.is_infinite() {
            pieces.push(ClockPiece { s_start: a, s_end: e, c_start: c, slope });
        }
        if slope.is_infinite() {
            absorption = Some(a);
            break;
        }
        c += slope * ticks_to_time(e - a);
    }
    Ok(TimeChange { pieces, absorption })
}

/// Time-changed solution on `[0, min(T, C(end of path))]`, from a fixed driver path.
pub fn solve_time_change(b: &CoefficientFunction, x: &PAdic, path: &JumpPath, horizon: f64) -> Result<(SolutionPath, TimeChange), SdeError> {
    let tc = build_time_change(b, x, path)?;
    let h = to_ticks(horizon);
    let mut events = Vec::new();
    let limit = tc.absorption.unwrap_or(u64::MAX);
    for e in path.events() {
        if e.tick > limit {
            break;
        }
        let t = tc.clock(ticks_to_time(e.tick));
        let tick = (t * TICKS_PER_UNIT as f64).round();
        if tick > h as f64 {
            break;
        }
        events.push(JumpEvent { tick: tick as u64, jump: e.jump.clone() });
    }
    let absorbed_at = tc.absorption.map(|s| tc.clock(ticks_to_time(s))).filter(|&t| t <= horizon);
    let covered = tc.end_clock().min(horizon);
    let solution = SolutionPath {
        spec: *path.spec(),
        start: x.clone(),
        horizon: if absorbed_at.is_some() { h } else { to_ticks(covered).min(h) },
        resolution: path.resolution(),
        method: Method::TimeChange,
        events,
        absorbed_at,
        seed: path.seed(),
    };
    Ok((solution, tc))
}

/// Time-changed solution on `[0, T]`, doubling the driver horizon until the clock reaches `T`.
pub fn solve_time_change_sampled(
    b: &CoefficientFunction,
    x: &PAdic,
    sampler: &PathSampler,
    stream: u64,
    horizon: f64,
) -> Result<(SolutionPath, TimeChange), SdeError> {
    let mut s = horizon.max(1.0);
    for _ in 0..48 {
        let path = sampler.sample(stream, s)?;
        let tc = build_time_change(b, x, &path)?;
        if tc.absorption.is_some() || tc.end_clock() >= horizon {
            return solve_time_change(b, x, &path, horizon);
        }
        s *= 2.0;
    }
    Err(SdeError::HorizonExceeded { target: horizon, reached: s })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// `Z*` with jumps `ΔX_j / b(X(t_j-))`, in a window wide enough for exact division.
    pub driver: JumpPath,
    /// Largest norm over jump times of `X - x - ∫ b(X-) dZ*`, read in the solution window.
    pub residual: Norm,
}

/// Recovers the driver of a time-changed solution.
pub fn reconstruct_driver(b: &CoefficientFunction, solution: &SolutionPath) -> Result<Reconstruction, SdeError> {
    let w = solution.start.window();
    let lefts = solution.left_limits();
    let coeffs = lefts.iter().map(|l| b.eval(l)).collect::<Result<Vec<_>, _>>()?;
    for (e, c) in solution.events.iter().zip(&coeffs) {
        if c.is_zero() {
            return Err(SdeError::DivisionByZero { time: e.time() });
        }
    }
    // quotient digits below lo and above hi are needed for b·(ΔX/b) to be exact in the window
    let vals: Vec<i32> = coeffs.iter().filter_map(|c| c.valuation()).collect();
    let v_max = vals.iter().copied().max().unwrap_or(0).max(0);
    let v_min = vals.iter().copied().min().unwrap_or(0).min(0);
    let wide = Window::new(w.lo - v_max, w.hi - v_min)?;
    let mut jumps = Vec::with_capacity(coeffs.len());
    for (e, c) in solution.events.iter().zip(&coeffs) {
        let q = e.jump.with_window(wide)?.checked_div(&c.with_window(wide)?)?;
        jumps.push(JumpEvent { tick: e.tick, jump: q });
    }
    // ‖ΔX/b‖ > p^{-M}/‖b‖ ≥ p^{-M + v_min}
    let resolution = solution.resolution - vals.iter().copied().min().unwrap_or(0);
    let mut residual = Norm::Zero;
    let mut y = PAdic::zero(solution.spec.p(), w)?;
    let mut m = PAdic::zero(solution.spec.p(), wide)?;
    for ((e, c), q) in solution.events.iter().zip(&coeffs).zip(&jumps) {
        y = y.checked_add(&e.jump)?;
        m = m.checked_add(&c.with_window(wide)?.checked_mul(&q.jump)?)?;
        let diff = y.with_window(wide)?.checked_sub(&m)?.truncate_from(w.hi as i64);
        residual = residual.max(diff.norm());
    }
    let events = jumps.into_iter().filter(|e| !e.jump.is_zero()).collect();
    let driver = JumpPath::from_events(solution.spec, solution.horizon, resolution, wide, events, solution.seed)?;
    Ok(Reconstruction { driver, residual })
}

/// Category of `X(T) - x`: its cell of radius `p^{cell_exp}` inside `B(0, p^{outer_exp})`, or the outside bin.
pub fn ball_category(y: &PAdic, cell_exp: i32, outer_exp: i32) -> usize {
    if y.valuation().is_some_and(|v| v < -outer_exp) {
        return (y.prime() as usize).pow((outer_exp - cell_exp) as u32);
    }
    (-outer_exp..-cell_exp).rev().fold(0, |acc, e| acc * y.prime() as usize + y.digit(e as i64) as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakConfig {
    pub spec: StableSpec,
    pub resolution: i32,
    pub window: (i32, i32),
    pub horizon: f64,
    pub n_paths: u64,
    pub seed_direct: u64,
    pub seed_time_change: u64,
    pub cell_exp: i32,
    pub outer_exp: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakReport {
    pub counts_direct: Vec<u64>,
    pub counts_time_change: Vec<u64>,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub trivial_direct: f64,
    pub trivial_time_change: f64,
}

/// Two-sample comparison of the laws of `X(T) - x` from both solvers.
pub fn weak_equivalence_test(b: &CoefficientFunction, x: &PAdic, cfg: &WeakConfig) -> Result<WeakReport, SdeError> {
    let w = Window::new(cfg.window.0, cfg.window.1)?;
    let x = x.with_window(w)?;
    let direct = PathSampler::new(&cfg.spec, cfg.resolution, w, cfg.seed_direct)?;
    let tc = PathSampler::new(&cfg.spec, cfg.resolution, w, cfg.seed_time_change)?;
    let bins = (cfg.spec.p() as usize).pow((cfg.outer_exp - cfg.cell_exp) as u32) + 1;
    let rows = par_map(cfg.n_paths, |i| -> Result<(usize, bool, usize, bool), SdeError> {
        let path = direct.sample(i, cfg.horizon)?;
        let d = solve_direct(b, &x, &path)?;
        let (t, _) = solve_time_change_sampled(b, &x, &tc, i, cfg.horizon)?;
        let cat = |s: &SolutionPath| ball_category(&(&s.final_value() - &x), cfg.cell_exp, cfg.outer_exp);
        Ok((cat(&d), triviality_check(&d), cat(&t), triviality_check(&t)))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let mut a = vec![0u64; bins];
    let mut c = vec![0u64; bins];
    for r in &rows {
        a[r.0] += 1;
        c[r.2] += 1;
    }
    let ChiSquareResult { statistic, dof, p_value } = chi_square_two_sample(&a, &c, 5.0);
    let n = cfg.n_paths.max(1) as f64;
    Ok(WeakReport {
        counts_direct: a,
        counts_time_change: c,
        statistic,
        dof,
        p_value,
        trivial_direct: rows.iter().filter(|r| r.1).count() as f64 / n,
        trivial_time_change: rows.iter().filter(|r| r.3).count() as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integral::{adapted_integral_values, AdaptedIntegrand};
    use crate::padic::Ball;

    fn w() -> Window {
        Window::new(-20, 20).unwrap()
    }

    fn n(v: i64) -> PAdic {
        PAdic::from_i64(2, w(), v).unwrap()
    }

    fn sampler(seed: u64) -> PathSampler {
        PathSampler::new(&StableSpec::new(2, 2.0).unwrap(), 3, w(), seed).unwrap()
    }

    #[test]
    fn unit_coefficient_reproduces_the_driver() {
        let s = sampler(1);
        let one = CoefficientFunction::constant(n(1));
        for i in 0..10 {
            let path = s.sample(i, 1.5).unwrap();
            let d = solve_direct(&one, &n(5), &path).unwrap();
            let (t, tc) = solve_time_change(&one, &n(5), &path, 1.5).unwrap();
            assert_eq!(d.events, t.events);
            for q in [0.0, 0.7, 1.5] {
                assert_eq!(d.value_at(q), &n(5) + &path.value_at(q));
                assert_eq!(tc.clock(q), q);
                assert_eq!(tc.tau(q), q);
            }
        }
    }

    #[test]
    fn direct_solution_satisfies_the_integral_identity() {
        let s = sampler(2);
        let b = CoefficientFunction::locally_constant(vec![(Ball::new(&n(1), 0), n(3))], n(2)).unwrap();
        let x = n(1);
        for i in 0..10 {
            let path = s.sample(i, 1.0).unwrap();
            let sol = solve_direct(&b, &x, &path).unwrap();
            let phi = AdaptedIntegrand::from_history("b(X-)", {
                let (b, x) = (b.clone(), x.clone());
                move |h| b.eval(&solve_direct(&b, &x, h).unwrap().final_value()).unwrap()
            });
            let integrals = adapted_integral_values(&phi, &path).unwrap();
            for (e, int) in path.events().iter().zip(&integrals) {
                assert_eq!(&sol.value_at_tick(e.tick) - &x, *int);
            }
        }
    }

    #[test]
    fn constant_coefficient_scales_the_clock() {
        let path = sampler(3).sample(0, 2.0).unwrap();
        let c = CoefficientFunction::constant(PAdic::p_power(2, w(), -1).unwrap());
        let tc = build_time_change(&c, &n(0), &path).unwrap();
        // ‖c‖ = 2, so C(s) = s / 4 and τ_t = 4t
        assert_eq!(tc.clock(2.0), 0.5);
        assert_eq!(tc.tau(0.25), 1.0);
        assert!((tc.tau_integral(0.3) - tc.tau(0.3)).abs() < 1e-12);
    }

    #[test]
    fn zero_coefficient_is_trivial() {
        let zero = CoefficientFunction::constant(n(0));
        let path = sampler(4).sample(0, 1.0).unwrap();
        let d = solve_direct(&zero, &n(3), &path).unwrap();
        let (t, tc) = solve_time_change(&zero, &n(3), &path, 1.0).unwrap();
        assert!(triviality_check(&d) && triviality_check(&t));
        assert_eq!(tc.absorption, Some(0));
        assert_eq!(t.absorbed_at, Some(0.0));
        assert_eq!(tc.tau(5.0), 0.0);
    }

    #[test]
    fn reconstruction_residual_vanishes() {
        let s = sampler(5);
        let b = CoefficientFunction::locally_constant(
            vec![(Ball::new(&n(0), -1), PAdic::p_power(2, w(), 1).unwrap())],
            PAdic::p_power(2, w(), -1).unwrap(),
        )
        .unwrap();
        for i in 0..10 {
            let (sol, _) = solve_time_change_sampled(&b, &n(0), &s, i, 1.0).unwrap();
            let r = reconstruct_driver(&b, &sol).unwrap();
            assert_eq!(r.residual, Norm::Zero);
        }
        let one = CoefficientFunction::constant(n(1));
        let (sol, _) = solve_time_change_sampled(&one, &n(0), &s, 0, 1.0).unwrap();
        let r = reconstruct_driver(&one, &sol).unwrap();
        let y: Vec<_> = sol.events.iter().map(|e| e.jump.with_window(r.driver.window()).unwrap()).collect();
        assert_eq!(r.driver.events().iter().map(|e| e.jump.clone()).collect::<Vec<_>>(), y);
    }

    #[test]
    fn categories_cover_the_outer_ball() {
        assert_eq!(ball_category(&n(0), -1, 3), 0);
        assert_eq!(ball_category(&n(1), -1, 3), 8);
        assert_eq!(ball_category(&PAdic::p_power(2, w(), -4).unwrap(), -1, 3), 16);
    }
}
