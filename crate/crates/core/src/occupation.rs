//! Occupation measures, cell-averaged local times and path diagnostics.
//!
//! Paths are piecewise constant, so every occupation time below is an exact
//! sum of tick counts.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::analytic::{ball_probability, local_integrability, shell_density, NonnegFunction, StableSpec};
use crate::driver::{ticks_to_time, to_ticks, DriverError, JumpPath, PathSampler, TICKS_PER_UNIT};
use crate::padic::{haar_shell, Ball, PAdic};
use crate::stats::par_map;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OccupationError {
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error("cells of radius p^-{n} inside B(0, p^{big_n}) need window digits [{lo_needed}, {n}), window is [{lo}, {hi})")]
    Window { n: i32, big_n: i32, lo_needed: i32, lo: i32, hi: i32 },
    #[error("ball is not a union of grid cells")]
    NotCellAligned,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Exact time in ticks spent in `ball` during `[0, tick]`.
pub fn occupation_ticks(path: &JumpPath, tick: u64, ball: &Ball) -> u64 {
    path.segments()
        .into_iter()
        .filter(|(_, _, z)| ball.contains(z))
        .map(|(a, b, _)| b.min(tick).saturating_sub(a.min(tick)))
        .sum()
}

/// `ν(t, B) = ∫_0^t 1_B(Z(s)) ds`.
pub fn occupation_measure(path: &JumpPath, t: f64, ball: &Ball) -> f64 {
    ticks_to_time(occupation_ticks(path, to_ticks(t), ball))
}

/// Digits of `z` at exponents `[-big_n, n)`, or `None` outside `B(0, p^big_n)`.
fn cell_key(z: &PAdic, n: i32, big_n: i32) -> Option<Vec<u8>> {
    if z.valuation().is_some_and(|v| v < -big_n) {
        return None;
    }
    Some((-big_n..n).map(|e| z.digit(e as i64)).collect())
}

fn check_grid(window: crate::padic::Window, n: i32, big_n: i32) -> Result<(), OccupationError> {
    if -big_n < window.lo || n > window.hi || n <= -big_n {
        return Err(OccupationError::Window { n, big_n, lo_needed: -big_n, lo: window.lo, hi: window.hi });
    }
    Ok(())
}

/// Occupation of the cells `B(c, p^{-n})` inside `B(0, p^N)` up to time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeGrid {
    p: u32,
    window: crate::padic::Window,
    n: i32,
    big_n: i32,
    horizon: u64,
    cells: BTreeMap<Vec<u8>, u64>,
    outside: u64,
}

impl LocalTimeGrid {
    pub fn build(path: &JumpPath, t: f64, n: i32, big_n: i32) -> Result<LocalTimeGrid, OccupationError> {
        check_grid(path.window(), n, big_n)?;
        let horizon = to_ticks(t).min(path.horizon_ticks());
        let mut cells = BTreeMap::new();
        let mut outside = 0;
        for (a, b, z) in path.segments() {
            let len = b.min(horizon).saturating_sub(a.min(horizon));
            if len == 0 {
                continue;
            }
            match cell_key(&z, n, big_n) {
                Some(k) => *cells.entry(k).or_insert(0) += len,
                None => outside += len,
            }
        }
        Ok(LocalTimeGrid { p: path.spec().p(), window: path.window(), n, big_n, horizon, cells, outside })
    }

    pub fn resolution(&self) -> i32 {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        ticks_to_time(self.horizon)
    }

    fn scale(&self) -> f64 {
        (self.p as f64).powi(self.n)
    }

    /// Ticks spent in the cell of `x`.
    pub fn mass_ticks(&self, x: &PAdic) -> u64 {
        cell_key(x, self.n, self.big_n).and_then(|k| self.cells.get(&k).copied()).unwrap_or(0)
    }

    /// `L̂_t^x = mass(cell(x)) p^n`.
    pub fn density(&self, x: &PAdic) -> f64 {
        ticks_to_time(self.mass_ticks(x)) * self.scale()
    }

    /// Ticks spent outside `B(0, p^N)`.
    pub fn outside_ticks(&self) -> u64 {
        self.outside
    }

    pub fn total_ticks(&self) -> u64 {
        self.cells.values().sum()
    }

    /// Visited cells as `(center, L̂)`.
    pub fn cells(&self) -> Vec<(PAdic, f64)> {
        self.cells
            .iter()
            .map(|(k, &m)| {
                let c = PAdic::from_digits(self.p, self.window, -self.big_n, k).expect("cell digits fit the window");
                (c, ticks_to_time(m) * self.scale())
            })
            .collect()
    }

    /// `∫_B L̂ dμ` in ticks for a union of cells: each cell contributes
    /// `L̂·μ(cell) = mass·p^n·p^{-n}`, so this is the cell mass sum.
    pub fn integral_over_ticks(&self, ball: &Ball) -> Result<u64, OccupationError> {
        if ball.radius_exp() < -self.n || ball.radius_exp() > self.big_n {
            return Err(OccupationError::NotCellAligned);
        }
        let Some(center) = cell_key(ball.center(), self.n, self.big_n) else {
            return Err(OccupationError::NotCellAligned);
        };
        // a cell lies in the ball iff its digits below -r agree with the center's
        let len = (self.big_n - ball.radius_exp()) as usize;
        Ok(self
            .cells
            .iter()
            .filter(|(k, _)| k[..len] == center[..len])
            .map(|(_, &m)| m)
            .sum())
    }
}

/// Cell index at level `n` of a digit string over `[-big_n, n_max)`.
fn cell_index(digits: &[u8], p: usize, len: usize) -> usize {
    digits[..len].iter().rev().fold(0, |acc, &d| acc * p + d as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderStatistic {
    pub kappa: f64,
    /// `(n, max_{a≠b} sup_t |L̂_t^a - L̂_t^b| / ‖a-b‖^κ)` per grid level.
    pub levels: Vec<(i32, f64)>,
    pub warning: Option<String>,
}

/// Hölder-type statistic of the cell local times on `[0, t]` for each level
/// in `levels`, over all pairs of cells of radius `p^{-n}` in `B(0, p^N)`.
///
/// Local times only grow in the cell the path occupies, so the supremum
/// over time is reached at the end of some stay and only pairs involving
/// that cell need to be compared there.
pub fn holder_statistic(
    path: &JumpPath,
    t: f64,
    levels: &[i32],
    big_n: i32,
    kappa: f64,
) -> Result<HolderStatistic, OccupationError> {
    let n_max = levels.iter().copied().max().ok_or_else(|| OccupationError::InvalidParameter("no levels".into()))?;
    check_grid(path.window(), n_max, big_n)?;
    let alpha = path.spec().alpha();
    let warning = if !(kappa > 0.0 && kappa < (alpha - 1.0) / 2.0) {
        Some(format!("kappa = {kappa} is outside (0, {}); no bound is expected", (alpha - 1.0) / 2.0))
    } else {
        None
    };
    let p = path.spec().p() as usize;
    let pf = p as f64;
    let horizon = to_ticks(t).min(path.horizon_ticks());
    let stays: Vec<(Option<Vec<u8>>, u64)> = path
        .segments()
        .into_iter()
        .map(|(a, b, z)| (cell_key(&z, n_max, big_n), b.min(horizon).saturating_sub(a.min(horizon))))
        .filter(|s| s.1 > 0)
        .collect();
    let mut out = Vec::new();
    for &n in levels {
        let len = (n + big_n) as usize;
        let cells = p.pow(len as u32);
        // ‖a - b‖^κ from the lowest differing digit position
        let dist: Vec<f64> = (0..len).map(|k| pf.powf(kappa * (big_n - k as i32) as f64)).collect();
        let diff_pos = |a: usize, b: usize| {
            let (mut a, mut b, mut k) = (a, b, 0);
            while a % p == b % p {
                a /= p;
                b /= p;
                k += 1;
            }
            k
        };
        let scale = pf.powi(n) / TICKS_PER_UNIT as f64;
        let mut local = vec![0f64; cells];
        let mut best = 0f64;
        let mut i = 0;
        while i < stays.len() {
            let key = stays[i].0.as_ref().map(|k| cell_index(k, p, len));
            let mut dur = 0;
            while i < stays.len() && stays[i].0.as_ref().map(|k| cell_index(k, p, len)) == key {
                dur += stays[i].1;
                i += 1;
            }
            let Some(c) = key else { continue };
            local[c] += dur as f64 * scale;
            for (b, &lb) in local.iter().enumerate() {
                if b != c {
                    best = best.max((local[c] - lb).abs() / dist[diff_pos(c, b)]);
                }
            }
        }
        out.push((n, best));
    }
    Ok(HolderStatistic { kappa, levels: out, warning })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceRow {
    pub t: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub fraction_above: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub rows: Vec<RecurrenceRow>,
    pub threshold: f64,
    pub median_strictly_increasing: bool,
    /// `ν(t, B) ≤ t` held on every path.
    pub bounded_by_t: bool,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Growth of `ν(t, B)` along `t_grid` over `n_paths` streams of `sampler`.
pub fn recurrence_diagnostic(
    sampler: &PathSampler,
    ball: &Ball,
    t_grid: &[f64],
    n_paths: u64,
    threshold: f64,
) -> Result<RecurrenceReport, OccupationError> {
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let per_path = par_map(n_paths, |i| -> Result<Vec<f64>, OccupationError> {
        let path = sampler.sample(i, t_max)?;
        Ok(t_grid.iter().map(|&t| occupation_measure(&path, t, ball)).collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let mut bounded = true;
    let rows: Vec<RecurrenceRow> = t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut xs: Vec<f64> = per_path.iter().map(|r| r[k]).collect();
            bounded &= xs.iter().all(|&x| x <= t);
            let above = xs.iter().filter(|&&x| x > threshold).count() as f64 / xs.len().max(1) as f64;
            let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            RecurrenceRow { t, median: median(&mut xs), min, max, fraction_above: above }
        })
        .collect();
    let increasing = rows.windows(2).all(|w| w[1].median > w[0].median);
    Ok(RecurrenceReport { rows, threshold, median_strictly_increasing: increasing, bounded_by_t: bounded })
}

/// `|∫ P(t, x - y) μ(dx) - 1|`: the shell densities times the shell measures,
/// summed over the shells carrying mass above `1e-17`.
pub fn haar_invariance_defect(spec: &StableSpec, t: f64) -> f64 {
    let mut lo = 0;
    while ball_probability(spec, lo, t).value > 1e-17 {
        lo -= 1;
    }
    let mut hi = 0;
    while 1.0 - ball_probability(spec, hi, t).value > 1e-17 {
        hi += 1;
    }
    let total: f64 = (lo..=hi).map(|m| shell_density(spec, m, t).value * haar_shell(spec.p(), m)).sum();
    (total - 1.0).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathIntegralProfile {
    /// `I_j = ∫_0^t f_j(Z(s)) ds` where `f_j` floors the distance to the singularity at `p^{-j}`.
    pub integrals: Vec<(i32, f64)>,
    /// `I_J / I_{⌈J/2⌉}` for the deepest level `J`.
    pub growth: f64,
    /// The integral grew by more than a factor `p` over the upper half of the levels.
    pub divergent: bool,
}

/// Refinement profile of `∫_0^t f(Z(s)) ds` on one path over levels `0..=max_level`.
///
/// A locally integrable `f` gives increments `I_j - I_{j-1}` that shrink
/// geometrically, so the profile levels off; otherwise they grow and the
/// integral keeps climbing as the floor is lowered.
pub fn integral_profile(f: &NonnegFunction, path: &JumpPath, t: f64, max_level: i32) -> PathIntegralProfile {
    let horizon = to_ticks(t).min(path.horizon_ticks());
    let mut integrals = vec![0f64; max_level as usize + 1];
    for (a, b, z) in path.segments() {
        let len = ticks_to_time(b.min(horizon).saturating_sub(a.min(horizon)));
        if len == 0.0 {
            continue;
        }
        for (j, acc) in integrals.iter_mut().enumerate() {
            *acc += len * f.eval_floored(&z, -(j as i32));
        }
    }
    let top = integrals[max_level as usize];
    let mid = integrals[((max_level + 1) / 2) as usize];
    let growth = if mid > 0.0 { top / mid } else if top > 0.0 { f64::INFINITY } else { 1.0 };
    PathIntegralProfile {
        integrals: (0..=max_level).zip(integrals).collect(),
        growth,
        divergent: growth > path.spec().p() as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroOneReport {
    pub n_paths: u64,
    pub fraction_finite: f64,
    pub fraction_divergent: f64,
    pub locally_integrable: bool,
    /// The majority verdict agrees with local integrability.
    pub verdict_matches: bool,
}

/// Finite-or-divergent verdicts of `∫_0^t f(Z(s)) ds` over `n_paths` paths.
pub fn zero_one_diagnostic(
    f: &NonnegFunction,
    sampler: &PathSampler,
    t: f64,
    n_paths: u64,
    max_level: i32,
) -> Result<ZeroOneReport, OccupationError> {
    if max_level < 2 || max_level > sampler.resolution() {
        return Err(OccupationError::InvalidParameter(format!(
            "refinement depth {max_level} must lie in [2, {}]",
            sampler.resolution()
        )));
    }
    let verdicts = par_map(n_paths, |i| -> Result<bool, OccupationError> {
        let path = sampler.sample(i, t)?;
        Ok(integral_profile(f, &path, t, max_level).divergent)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let divergent = verdicts.iter().filter(|&&d| d).count() as f64 / n_paths.max(1) as f64;
    let integrable = local_integrability(f);
    Ok(ZeroOneReport {
        n_paths,
        fraction_finite: 1.0 - divergent,
        fraction_divergent: divergent,
        locally_integrable: integrable,
        verdict_matches: integrable == (divergent < 0.5),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::JumpEvent;
    use crate::padic::Window;

    fn spec() -> StableSpec {
        StableSpec::new(2, 2.0).unwrap()
    }

    fn w() -> Window {
        Window::new(-16, 16).unwrap()
    }

    fn n(v: i64) -> PAdic {
        PAdic::from_i64(2, w(), v).unwrap()
    }

    #[test]
    fn single_jump_leaving_a_ball() {
        let path = JumpPath::from_events(spec(), to_ticks(2.0), 3, w(), vec![JumpEvent { tick: to_ticks(0.75), jump: n(1) }], None)
            .unwrap();
        let b = Ball::new(&n(0), -1);
        assert_eq!(occupation_measure(&path, 0.5, &b), 0.5);
        assert_eq!(occupation_measure(&path, 1.5, &b), 0.75);
        assert_eq!(occupation_measure(&path, 1.5, &Ball::new(&n(1), -1)), 0.75);
    }

    #[test]
    fn grid_identity_is_exact() {
        let s = PathSampler::new(&spec(), 6, w(), 5).unwrap();
        for i in 0..5 {
            let path = s.sample(i, 1.0).unwrap();
            for lvl in 2..=6 {
                let g = LocalTimeGrid::build(&path, 1.0, lvl, 1).unwrap();
                assert_eq!(g.total_ticks() + g.outside_ticks(), to_ticks(1.0));
                for r in [1, 0, -1, -lvl] {
                    let b = Ball::new(&n(1), r);
                    assert_eq!(g.integral_over_ticks(&b).unwrap(), occupation_ticks(&path, to_ticks(1.0), &b));
                }
                assert!(g.density(&n(0)) > 0.0);
            }
        }
    }

    #[test]
    fn holder_statistic_matches_brute_force() {
        let s = PathSampler::new(&spec(), 5, w(), 8).unwrap();
        for i in 0..3 {
            let path = s.sample(i, 1.0).unwrap();
            let (lvl, big_n, kappa) = (3, 1, 0.3);
            let cells: Vec<PAdic> = (0..1i64 << (lvl + big_n))
                .map(|k| {
                    let digits: Vec<u8> = (0..lvl + big_n).map(|e| ((k >> e) & 1) as u8).collect();
                    PAdic::from_digits(2, w(), -big_n, &digits).unwrap()
                })
                .collect();
            let mut brute = 0f64;
            for (_, end, _) in path.segments() {
                let g = LocalTimeGrid::build(&path, ticks_to_time(end), lvl, big_n).unwrap();
                for a in &cells {
                    for b in &cells {
                        if a != b {
                            let d = (a - b).norm_value().powf(kappa);
                            brute = brute.max((g.density(a) - g.density(b)).abs() / d);
                        }
                    }
                }
            }
            let h = holder_statistic(&path, 1.0, &[lvl], big_n, kappa).unwrap();
            assert!(h.warning.is_none());
            assert!((h.levels[0].1 - brute).abs() < 1e-9 * brute, "{} vs {brute}", h.levels[0].1);
        }
    }

    #[test]
    fn invariance_defect_is_tiny() {
        for t in [0.01, 1.0, 50.0] {
            assert!(haar_invariance_defect(&spec(), t) < 1e-12);
        }
    }

    #[test]
    fn bounded_function_is_finite() {
        let s = PathSampler::new(&spec(), 4, w(), 2).unwrap();
        let f = NonnegFunction::LocallyConstant { pieces: vec![(Ball::new(&n(0), 0), 3.0)], default: 1.0 };
        let r = zero_one_diagnostic(&f, &s, 1.0, 50, 4).unwrap();
        assert_eq!(r.fraction_finite, 1.0);
        assert!(r.verdict_matches);
    }
}
