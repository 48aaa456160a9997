//! Stochastic integrals `∫ φ dZ` against jump paths.
//!
//! At finite resolution a path has finitely many jumps, so the integral of a
//! left-continuous adapted integrand is the finite jump sum
//! `Σ_{t_j ≤ t} φ(t_j) ΔZ_j`. Simple integrands are integrated from their
//! partition; the dyadic refinement helpers show the two agree.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::analytic::{check_conditions, AnalyticError, CoefficientFunction, RadialLevySpec, StableSpec};
use crate::driver::{omega_event, to_ticks, truncate_large_jumps, DriverError, JumpPath, PathSampler};
use crate::padic::{PAdic, PAdicError};
use crate::stats::{mean_and_se, par_map};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegralError {
    #[error(transparent)]
    PAdic(#[from] PAdicError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("moment bound needs summability of a(m)p^(gamma m) over all m; truncate the large jumps first")]
    MissingCondition,
}

type HistoryFn = Arc<dyn Fn(&JumpPath) -> PAdic + Send + Sync>;
type PointFn = Arc<dyn Fn(&PAdic) -> PAdic + Send + Sync>;

/// Value of a simple integrand on one partition interval.
#[derive(Clone)]
pub enum Rule {
    Constant(PAdic),
    /// Evaluated on the path history up to the left endpoint.
    Adapted(HistoryFn),
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Constant(c) => write!(f, "Constant({c})"),
            Rule::Adapted(_) => write!(f, "Adapted"),
        }
    }
}

impl Rule {
    pub fn adapted(f: impl Fn(&JumpPath) -> PAdic + Send + Sync + 'static) -> Rule {
        Rule::Adapted(Arc::new(f))
    }
}

/// `φ = Σ f_i 1_{(t_i, t_{i+1}]}` with breakpoints in ticks.
#[derive(Debug, Clone)]
pub struct SimpleIntegrand {
    breaks: Vec<u64>,
    rules: Vec<Rule>,
}

impl SimpleIntegrand {
    /// `breaks` are `0 = t_0 < t_1 < … < t_n` in ticks, one rule per interval.
    pub fn new(breaks: Vec<u64>, rules: Vec<Rule>) -> Result<SimpleIntegrand, IntegralError> {
        if breaks.first() != Some(&0) {
            return Err(IntegralError::InvalidPartition("must start at 0".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(IntegralError::InvalidPartition("breakpoints must increase".into()));
        }
        if rules.len() + 1 != breaks.len() {
            return Err(IntegralError::InvalidPartition("need one rule per interval".into()));
        }
        Ok(SimpleIntegrand { breaks, rules })
    }

    /// Breakpoints given as times.
    pub fn from_times(times: &[f64], rules: Vec<Rule>) -> Result<SimpleIntegrand, IntegralError> {
        SimpleIntegrand::new(times.iter().map(|&t| to_ticks(t)).collect(), rules)
    }

    pub fn constant(c: PAdic, horizon: u64) -> SimpleIntegrand {
        SimpleIntegrand { breaks: vec![0, horizon.max(1)], rules: vec![Rule::Constant(c)] }
    }

    pub fn breaks(&self) -> &[u64] {
        &self.breaks
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// The values `f_i` on this path.
    pub fn values(&self, path: &JumpPath) -> Vec<PAdic> {
        self.rules
            .iter()
            .zip(&self.breaks)
            .map(|(r, &t)| match r {
                Rule::Constant(c) => c.clone(),
                Rule::Adapted(f) => f(&path.history(t)),
            })
            .collect()
    }

    /// Value of `φ(s)` on this path, zero outside `(0, t_n]`.
    pub fn value_at_tick(&self, path: &JumpPath, tick: u64) -> PAdic {
        let i = self.breaks.partition_point(|&b| b < tick);
        if i == 0 || i >= self.breaks.len() {
            return path.zero();
        }
        match &self.rules[i - 1] {
            Rule::Constant(c) => c.clone(),
            Rule::Adapted(f) => f(&path.history(self.breaks[i - 1])),
        }
    }
}

/// `Σ_i f_i (Z(t_{i+1} ∧ t) - Z(t_i ∧ t))`, exact.
pub fn integrate_simple(phi: &SimpleIntegrand, path: &JumpPath, t: f64) -> Result<PAdic, IntegralError> {
    integrate_simple_ticks(phi, path, to_ticks(t))
}

pub fn integrate_simple_ticks(phi: &SimpleIntegrand, path: &JumpPath, tick: u64) -> Result<PAdic, IntegralError> {
    let values = phi.values(path);
    let mut acc = path.zero();
    for (i, f) in values.iter().enumerate() {
        let a = phi.breaks[i].min(tick);
        let b = phi.breaks[i + 1].min(tick);
        if a == b {
            continue;
        }
        let dz = path.value_at_tick(b).checked_sub(&path.value_at_tick(a))?;
        acc = acc.checked_add(&f.checked_mul(&dz)?)?;
    }
    Ok(acc)
}

#[derive(Clone)]
enum AdaptedRule {
    Point(PointFn),
    History(HistoryFn),
}

/// `φ(s) = g(Z(s-))`, or more generally a function of the path strictly before `s`.
#[derive(Clone)]
pub struct AdaptedIntegrand {
    name: String,
    g: AdaptedRule,
}

impl fmt::Debug for AdaptedIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AdaptedIntegrand({})", self.name)
    }
}

impl AdaptedIntegrand {
    pub fn new(name: &str, g: impl Fn(&PAdic) -> PAdic + Send + Sync + 'static) -> AdaptedIntegrand {
        AdaptedIntegrand { name: name.to_string(), g: AdaptedRule::Point(Arc::new(g)) }
    }

    /// `φ(s) = g(path on [0, s))`; `g` receives the history with horizon just before `s`.
    pub fn from_history(name: &str, g: impl Fn(&JumpPath) -> PAdic + Send + Sync + 'static) -> AdaptedIntegrand {
        AdaptedIntegrand { name: name.to_string(), g: AdaptedRule::History(Arc::new(g)) }
    }

    pub fn constant(c: PAdic) -> AdaptedIntegrand {
        AdaptedIntegrand::new(&format!("{c}"), move |_| c.clone())
    }

    /// `s ↦ b(x + Z(s-))`.
    pub fn from_coefficient(b: CoefficientFunction, x: PAdic) -> AdaptedIntegrand {
        AdaptedIntegrand::new("coefficient", move |z| b.eval(&(&x + z)).expect("coefficient evaluable"))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Value at a jump time `tick`, given the left limit `Z(tick-)`.
    pub fn eval_at(&self, path: &JumpPath, tick: u64, z_left: &PAdic) -> PAdic {
        match &self.g {
            AdaptedRule::Point(g) => g(z_left),
            AdaptedRule::History(g) => g(&path.history(tick.saturating_sub(1))),
        }
    }
}

/// Integral value just after each event (events sharing a tick use the same left limit).
pub fn adapted_integral_values(phi: &AdaptedIntegrand, path: &JumpPath) -> Result<Vec<PAdic>, IntegralError> {
    let events = path.events();
    let mut out = Vec::with_capacity(events.len());
    let mut z = path.zero();
    let mut z_left = z.clone();
    let mut acc = path.zero();
    for (i, e) in events.iter().enumerate() {
        if i == 0 || events[i - 1].tick != e.tick {
            z_left = z.clone();
        }
        acc = acc.checked_add(&phi.eval_at(path, e.tick, &z_left).checked_mul(&e.jump)?)?;
        z = z.checked_add(&e.jump)?;
        out.push(acc.clone());
    }
    Ok(out)
}

/// `Σ_{t_j ≤ t} φ(t_j) ΔZ_j`.
pub fn integrate_adapted(phi: &AdaptedIntegrand, path: &JumpPath, t: f64) -> Result<PAdic, IntegralError> {
    integrate_adapted_ticks(phi, path, to_ticks(t))
}

pub fn integrate_adapted_ticks(phi: &AdaptedIntegrand, path: &JumpPath, tick: u64) -> Result<PAdic, IntegralError> {
    let n = path.events().partition_point(|e| e.tick <= tick);
    let h = path.history(if n == 0 { 0 } else { path.events()[n - 1].tick });
    Ok(adapted_integral_values(phi, &h)?.pop().unwrap_or_else(|| path.zero()))
}

/// Simple approximation of `φ` on `2^level` equal intervals of `[0, horizon]`,
/// with `f_i = φ(t_i+)`.
pub fn dyadic_approximation(phi: &AdaptedIntegrand, horizon: u64, level: u32) -> Result<SimpleIntegrand, IntegralError> {
    let n = 1u64 << level;
    if horizon < n {
        return Err(IntegralError::InvalidPartition("too fine for the horizon".into()));
    }
    let breaks: Vec<u64> = (0..=n).map(|i| ((horizon as u128 * i as u128) / n as u128) as u64).collect();
    let rules = (0..n)
        .map(|_| {
            let g = phi.g.clone();
            Rule::adapted(move |h: &JumpPath| match &g {
                AdaptedRule::Point(g) => g(&h.value_at_tick(h.horizon_ticks())),
                AdaptedRule::History(g) => g(h),
            })
        })
        .collect();
    SimpleIntegrand::new(breaks, rules)
}

/// Smallest dyadic level whose mesh is below the smallest inter-jump gap.
pub fn refinement_level(path: &JumpPath) -> u32 {
    let gap = path.min_gap().unwrap_or(u64::MAX);
    let mut level = 0;
    while level < 40 && path.horizon_ticks().div_ceil(1u64 << level) >= gap {
        level += 1;
    }
    level
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationCheck {
    /// No jump of norm above `p^{m_big}` occurred.
    pub omega: bool,
    /// The integrals at levels `m_big` and `m_big + k` agree at every time.
    pub equal: bool,
}

impl TruncationCheck {
    pub fn passes(&self) -> bool {
        !self.omega || self.equal
    }
}

/// Integrates `φ` against the large-jump truncations at levels `m_big` and
/// `m_big + k` of one sampled path.
pub fn truncation_consistency(
    phi: &AdaptedIntegrand,
    sampler: &PathSampler,
    stream: u64,
    m_big: i32,
    k: i32,
    horizon: f64,
) -> Result<TruncationCheck, IntegralError> {
    let path = sampler.sample(stream, horizon)?;
    let coarse = truncate_large_jumps(&path, m_big);
    let fine = truncate_large_jumps(&path, m_big + k);
    let equal = adapted_integral_values(phi, &coarse)? == adapted_integral_values(phi, &fine)?;
    Ok(TruncationCheck { omega: omega_event(&path, m_big), equal })
}

/// Monte Carlo setup for the moment bound of truncated processes.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentConfig {
    pub spec: StableSpec,
    /// Jumps are truncated to norm at most `p^cutoff`; `None` keeps them all.
    pub cutoff: Option<i32>,
    pub resolution: i32,
    pub gamma: f64,
    pub n_paths: u64,
    pub seed: u64,
}

impl MomentConfig {
    fn check(&self) -> Result<(), IntegralError> {
        let base = RadialLevySpec::Stable(self.spec);
        // the truncated process has no jumps of norm p^m for m > cutoff
        let spec = match self.cutoff {
            Some(c) => base.truncated(c + 1),
            None => base,
        };
        if !check_conditions(&spec, self.gamma)?.cond3 {
            return Err(IntegralError::MissingCondition);
        }
        Ok(())
    }

    fn sampler(&self) -> Result<PathSampler, IntegralError> {
        let w = crate::padic::Window::default();
        Ok(PathSampler::new(&self.spec, self.resolution, w, self.seed)?)
    }

    fn path(&self, sampler: &PathSampler, i: u64, horizon: f64) -> Result<JumpPath, IntegralError> {
        let path = sampler.sample(i, horizon)?;
        Ok(match self.cutoff {
            Some(c) => truncate_large_jumps(&path, c),
            None => path,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantFit {
    /// `(t, E‖Z(t)‖^γ / t, standard error)`.
    pub ratios: Vec<(f64, f64, f64)>,
    /// `E Σ_{jumps ≤ t} ‖ΔZ‖^γ / t`, the small-time limit of the ratio.
    pub jump_moment: (f64, f64),
    /// Largest ratio relative spread `(max - min) / max`.
    pub spread: f64,
    pub fitted_c: f64,
}

/// Fits `C` in `E‖Z(t)‖^γ ≤ C t` over a time grid.
pub fn fit_moment_constant(cfg: &MomentConfig, t_grid: &[f64]) -> Result<ConstantFit, IntegralError> {
    cfg.check()?;
    let sampler = cfg.sampler()?;
    let t_max = t_grid.iter().cloned().fold(0.0, f64::max);
    let rows = par_map(cfg.n_paths, |i| -> Result<(Vec<f64>, f64), IntegralError> {
        let path = cfg.path(&sampler, i, t_max)?;
        let moments = t_grid.iter().map(|&t| path.value_at(t).norm_value().powf(cfg.gamma)).collect();
        let jumps = path.events().iter().map(|e| e.jump.norm_value().powf(cfg.gamma)).sum::<f64>();
        Ok((moments, jumps / t_max))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let ratios: Vec<(f64, f64, f64)> = t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let xs: Vec<f64> = rows.iter().map(|r| r.0[k] / t).collect();
            let (m, se) = mean_and_se(&xs);
            (t, m, se)
        })
        .collect();
    let jump_moment = mean_and_se(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let hi = ratios.iter().map(|r| r.1).fold(f64::MIN, f64::max);
    let lo = ratios.iter().map(|r| r.1).fold(f64::MAX, f64::min);
    Ok(ConstantFit { ratios, jump_moment, spread: (hi - lo) / hi, fitted_c: hi.max(jump_moment.0) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    /// `E sup_{t ≤ u} ‖∫_0^t φ dZ‖^γ` and its standard error.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `∫_0^u E‖φ(s)‖^γ ds` and its standard error.
    pub rhs_integral: f64,
    pub rhs_se: f64,
    pub fitted_c: f64,
    pub holds: bool,
}

/// Monte Carlo estimate of both sides of `E sup ‖∫φdZ‖^γ ≤ C ∫E‖φ‖^γ ds` on `[0, u]`.
pub fn moment_estimate(
    cfg: &MomentConfig,
    phi: &SimpleIntegrand,
    u: f64,
    fitted_c: f64,
) -> Result<MomentReport, IntegralError> {
    cfg.check()?;
    let sampler = cfg.sampler()?;
    let ut = to_ticks(u);
    let rows = par_map(cfg.n_paths, |i| -> Result<(f64, f64), IntegralError> {
        let path = cfg.path(&sampler, i, u)?;
        let values = phi.values(&path);
        let mut rhs = 0.0;
        for (k, f) in values.iter().enumerate() {
            let a = phi.breaks[k].min(ut);
            let b = phi.breaks[k + 1].min(ut);
            rhs += f.norm_value().powf(cfg.gamma) * (b - a) as f64 / crate::driver::TICKS_PER_UNIT as f64;
        }
        let mut sup = 0f64;
        for e in path.events().iter().filter(|e| e.tick <= ut) {
            sup = sup.max(integrate_simple_ticks(phi, &path, e.tick)?.norm_value().powf(cfg.gamma));
        }
        Ok((sup, rhs))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let (lhs, lhs_se) = mean_and_se(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let (rhs_integral, rhs_se) = mean_and_se(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    Ok(MomentReport { lhs, lhs_se, rhs_integral, rhs_se, fitted_c, holds: lhs <= fitted_c * rhs_integral })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::Window;

    fn setup() -> (StableSpec, PathSampler) {
        let spec = StableSpec::new(2, 2.0).unwrap();
        let sampler = PathSampler::new(&spec, 3, Window::new(-24, 24).unwrap(), 17).unwrap();
        (spec, sampler)
    }

    fn n(v: i64) -> PAdic {
        PAdic::from_i64(2, Window::new(-24, 24).unwrap(), v).unwrap()
    }

    #[test]
    fn constant_one_gives_the_path() {
        let (_, s) = setup();
        for i in 0..20 {
            let path = s.sample(i, 2.0).unwrap();
            let one = SimpleIntegrand::constant(n(1), path.horizon_ticks());
            let three = AdaptedIntegrand::constant(n(3));
            for t in [0.0, 0.3, 1.0, 2.0] {
                assert_eq!(integrate_simple(&one, &path, t).unwrap(), path.value_at(t));
                assert_eq!(integrate_adapted(&three, &path, t).unwrap(), n(3).checked_mul(&path.value_at(t)).unwrap());
            }
        }
    }

    #[test]
    fn two_intervals_expand_by_hand() {
        let (_, s) = setup();
        let path = s.sample(3, 1.0).unwrap();
        let phi = SimpleIntegrand::from_times(&[0.0, 0.25, 0.6, 1.0], vec![
            Rule::Constant(n(0)),
            Rule::Constant(n(5)),
            Rule::Constant(n(-2)),
        ])
        .unwrap();
        for t in [0.1, 0.4, 0.8, 1.0] {
            let z = |s: f64| path.value_at(s.min(t));
            let expect = &n(5).checked_mul(&(&z(0.6) - &z(0.25))).unwrap()
                + &n(-2).checked_mul(&(&z(1.0) - &z(0.6))).unwrap();
            assert_eq!(integrate_simple(&phi, &path, t).unwrap(), expect);
        }
    }

    #[test]
    fn dyadic_refinement_reaches_the_jump_sum() {
        let (_, s) = setup();
        let phi = AdaptedIntegrand::new("1 + z", |z| z + &n(1));
        for i in 0..10 {
            let path = s.sample(i, 1.0).unwrap();
            let level = refinement_level(&path);
            let exact = integrate_adapted(&phi, &path, 1.0).unwrap();
            for l in level..level + 2 {
                let approx = dyadic_approximation(&phi, path.horizon_ticks(), l).unwrap();
                assert_eq!(integrate_simple(&approx, &path, 1.0).unwrap(), exact);
            }
        }
    }

    #[test]
    fn truncation_levels_agree_on_omega() {
        let (_, s) = setup();
        let phi = AdaptedIntegrand::new("z", |z| z.clone());
        let mut omega = 0;
        for i in 0..50 {
            let c = truncation_consistency(&phi, &s, i, 1, 3, 1.0).unwrap();
            assert!(c.passes());
            omega += c.omega as u32;
        }
        assert!(omega > 0);
    }

    #[test]
    fn moment_bound_refuses_untruncated_spec() {
        let (spec, _) = setup();
        let cfg = MomentConfig { spec, cutoff: None, resolution: 0, gamma: 3.0, n_paths: 10, seed: 0 };
        assert_eq!(fit_moment_constant(&cfg, &[1.0]), Err(IntegralError::MissingCondition));
        let cfg = MomentConfig { cutoff: Some(3), ..cfg };
        assert!(fit_moment_constant(&cfg, &[1.0]).is_ok());
    }

    #[test]
    fn zero_integrand_has_zero_moment() {
        let (spec, _) = setup();
        let cfg = MomentConfig { spec, cutoff: Some(3), resolution: 0, gamma: 3.0, n_paths: 200, seed: 1 };
        let phi = SimpleIntegrand::constant(PAdic::zero(2, Window::default()).unwrap(), to_ticks(1.0));
        let r = moment_estimate(&cfg, &phi, 1.0, 1.0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs_integral, 0.0);
    }
}
