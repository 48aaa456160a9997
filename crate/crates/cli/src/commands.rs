use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::json;

use padic_stable::analytic::{
    ball_probability, condition_h_check, green_function, h_function, h_sufficiency, shell_density, NonnegFunction,
};
use padic_stable::driver::{jump_intensities, IncrementSampler, JumpPath, PathSampler, TICKS_PER_UNIT};
use padic_stable::integral::{adapted_integral_values, AdaptedIntegrand};
use padic_stable::occupation::{
    haar_invariance_defect, holder_statistic, recurrence_diagnostic, zero_one_diagnostic, LocalTimeGrid,
};
use padic_stable::pathfile::PathRecord;
use padic_stable::rng::stream_rng;
use padic_stable::sde::{
    ball_category, reconstruct_driver, solve_direct, solve_time_change_sampled, triviality_check,
    weak_equivalence_test, SolutionPath, WeakConfig,
};
use padic_stable::stats::{binomial_z, par_map};
use padic_stable::{Ball, Norm, PAdic, Window};

use crate::config::{parse_coefficient, parse_padic, read_file, CliError, Law, MethodArg, Output, Sim};

/// Configuration as hashed into reports: the subcommand arguments plus the seed.
#[derive(Serialize)]
struct RunConfig<'a, A: Serialize> {
    seed: u64,
    #[serde(flatten)]
    args: &'a A,
}

fn pf(p: u32) -> f64 {
    p as f64
}

fn sampler(law: &Law, sim: &Sim, seed: u64, needs_alpha_above_one: bool) -> Result<PathSampler, CliError> {
    let spec = law.spec(needs_alpha_above_one)?;
    Ok(PathSampler::new(&spec, sim.resolution, sim.window()?, seed)?)
}

fn sampling_bounds(law: &Law, sim: &Sim) -> serde_json::Value {
    json!({
        "sup_norm_to_full_process": pf(law.p).powi(-sim.resolution),
        "characteristic_function_exact_up_to_norm": pf(law.p).powi(sim.resolution),
        "digits_dropped_at_exponent": sim.window_hi,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub law: Law,
    #[arg(long, default_value_t = -4, allow_hyphen_values = true)]
    pub m_min: i32,
    #[arg(long, default_value_t = 4, allow_hyphen_values = true)]
    pub m_max: i32,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', default_value = "0.1,1")]
    pub times: Vec<f64>,
    /// Green function parameter.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
}

pub fn analytic(seed: u64, out: &Output, args: &AnalyticArgs) -> Result<(), CliError> {
    let spec = args.law.spec(true)?;
    let mut csv = String::from("m,t,P_m(t),density,g^lambda,h\n");
    let mut tail = 0f64;
    for m in args.m_min..=args.m_max {
        let g = green_function(&spec, args.lambda, Norm::Pow(m))?;
        let h = h_function(&spec, Norm::Pow(m))?;
        tail = tail.max(g.tail_bound);
        for &t in &args.times {
            let prob = ball_probability(&spec, m, t);
            let dens = shell_density(&spec, m, t);
            tail = tail.max(prob.tail_bound).max(dens.tail_bound);
            let _ = writeln!(csv, "{m},{t},{},{},{},{h}", prob.value, dens.value, g.value);
        }
    }
    let csv_path = out.write("analytic.csv", &csv)?;
    let config = RunConfig { seed, args };
    let result = json!({ "levy_constant": spec.levy_constant(), "table": csv_path.file_name().and_then(|f| f.to_str()) });
    let report = out.report("analytic.json", "analytic", &config, &json!({ "max_series_tail_bound": tail }), &result)?;
    println!("{}\n{}", csv_path.display(), report.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub law: Law,
    #[command(flatten)]
    pub sim: Sim,
}

pub fn sample(seed: u64, out: &Output, args: &SampleArgs) -> Result<(), CliError> {
    let sampler = sampler(&args.law, &args.sim, seed, false)?;
    let rows = par_map(args.sim.paths, |i| -> Result<(String, usize, u32), CliError> {
        let path = sampler.sample(i, args.sim.horizon)?;
        Ok((PathRecord::from_path(&path).to_text(), path.events().len(), path.clamped()))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    for (i, (text, _, _)) in rows.iter().enumerate() {
        out.write(&format!("paths/path_{i:06}.txt"), text)?;
    }
    let events: usize = rows.iter().map(|r| r.1).sum();
    let clamped: u32 = rows.iter().map(|r| r.2).sum();
    let rates = jump_intensities(sampler.spec(), args.sim.resolution);
    let result = json!({
        "paths": args.sim.paths,
        "mean_events": events as f64 / args.sim.paths.max(1) as f64,
        "jump_rate": rates.total(),
        "clamped_jumps": clamped,
        "directory": "paths",
    });
    let config = RunConfig { seed, args };
    let report = out.report("sample.json", "sample", &config, &sampling_bounds(&args.law, &args.sim), &result)?;
    println!("{}", report.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IncrementDistArgs {
    #[command(flatten)]
    pub law: Law,
    #[arg(short, long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 100_000)]
    pub draws: u64,
    #[arg(long, default_value_t = -3, allow_hyphen_values = true)]
    pub m_min: i32,
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    pub m_max: i32,
    #[arg(long, default_value_t = -32, allow_hyphen_values = true)]
    pub window_lo: i32,
    #[arg(long, default_value_t = 32, allow_hyphen_values = true)]
    pub window_hi: i32,
}

const CHUNK: u64 = 10_000;

pub fn increment_dist(seed: u64, out: &Output, args: &IncrementDistArgs) -> Result<(), CliError> {
    let spec = args.law.spec(false)?;
    let w = Window::new(args.window_lo, args.window_hi)
        .map_err(|_| CliError::WindowTooSmall(format!("invalid window [{}, {})", args.window_lo, args.window_hi)))?;
    let sampler = IncrementSampler::new(&spec, args.t, w);
    let ms: Vec<i32> = (args.m_min..=args.m_max).collect();
    let chunks = args.draws.div_ceil(CHUNK);
    let counts = par_map(chunks, |c| {
        let mut rng = stream_rng(seed, &[c]);
        let n = CHUNK.min(args.draws - c * CHUNK);
        let mut hits = vec![0u64; ms.len()];
        for _ in 0..n {
            let norm = sampler.sample(&mut rng).norm();
            for (h, &m) in hits.iter_mut().zip(&ms) {
                *h += (norm <= Norm::Pow(m)) as u64;
            }
        }
        hits
    });
    let mut csv = String::from("m,empirical,analytic,z\n");
    let mut worst = 0f64;
    let mut tail = 0f64;
    for (k, &m) in ms.iter().enumerate() {
        let hits: u64 = counts.iter().map(|h| h[k]).sum();
        let exact = ball_probability(&spec, m, args.t);
        let z = binomial_z(hits, args.draws, exact.value);
        worst = worst.max(z.abs());
        tail = tail.max(exact.tail_bound);
        let _ = writeln!(csv, "{m},{},{},{z}", hits as f64 / args.draws as f64, exact.value);
    }
    let csv_path = out.write("increment_dist.csv", &csv)?;
    let config = RunConfig { seed, args };
    let result = json!({ "max_abs_z": worst, "table": csv_path.file_name().and_then(|f| f.to_str()) });
    let bounds = json!({ "max_series_tail_bound": tail, "digits_dropped_at_exponent": args.window_hi });
    let report = out.report("increment_dist.json", "increment-dist", &config, &bounds, &result)?;
    println!("{}\n{}", csv_path.display(), report.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IntegrateArgs {
    /// Driver path file.
    #[arg(long)]
    pub path: PathBuf,
    /// `const:C` or `affine:A,B` for `A + B·Z(s-)`.
    #[arg(long, allow_hyphen_values = true)]
    pub integrand: String,
}

fn parse_integrand(s: &str, p: u32, w: Window) -> Result<AdaptedIntegrand, CliError> {
    let bad = || CliError::Other(format!("bad integrand '{s}': expected const:C or affine:A,B"));
    let (kind, body) = s.split_once(':').ok_or_else(bad)?;
    match kind.trim() {
        "const" => Ok(AdaptedIntegrand::constant(parse_padic(body, p, w)?)),
        "affine" => {
            let (a, b) = body.split_once(',').ok_or_else(bad)?;
            let a = parse_padic(a, p, w)?;
            let b = parse_padic(b, p, w)?;
            Ok(AdaptedIntegrand::new(s, move |z| {
                &a + &b.checked_mul(z).expect("operands share the path window")
            }))
        }
        _ => Err(bad()),
    }
}

pub fn integrate(seed: u64, out: &Output, args: &IntegrateArgs) -> Result<(), CliError> {
    let record = PathRecord::parse(&read_file(&args.path)?)?;
    let path = record.into_path()?;
    let phi = parse_integrand(&args.integrand, path.spec().p(), path.window())?;
    let values = adapted_integral_values(&phi, &path).map_err(|e| CliError::Other(e.to_string()))?;
    let mut csv = String::from("t,value,norm\n");
    let _ = writeln!(csv, "0,0,0");
    for (k, (e, v)) in path.events().iter().zip(&values).enumerate() {
        // one row per time, after every jump at that time
        if path.events().get(k + 1).is_some_and(|n| n.tick == e.tick) {
            continue;
        }
        let _ = writeln!(csv, "{},{v},{}", e.time(), v.norm_value());
    }
    let csv_path = out.write("integrate.csv", &csv)?;
    let last = values.last().cloned().unwrap_or_else(|| path.zero());
    let config = RunConfig { seed, args };
    let result = json!({ "final_value": last.to_string(), "events": path.events().len(), "table": csv_path.file_name().and_then(|f| f.to_str()) });
    let bounds = json!({ "digits_dropped_at_exponent": path.window().hi });
    let report = out.report("integrate.json", "integrate", &config, &bounds, &result)?;
    println!("{}\n{}", csv_path.display(), report.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LocaltimeArgs {
    #[command(flatten)]
    pub law: Law,
    #[command(flatten)]
    pub sim: Sim,
    /// Read the driver path from a file instead of sampling stream 0.
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Cells have radius p^-n.
    #[arg(short, long, default_value_t = 4)]
    pub n: i32,
    /// Cells tile B(0, p^N).
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub big_n: i32,
    /// Levels of the Hölder statistic.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
    pub levels: Vec<i32>,
    /// Hölder exponent; defaults to 0.8·(alpha-1)/2.
    #[arg(long)]
    pub kappa: Option<f64>,
}

fn load_or_sample(law: &Law, sim: &Sim, file: &Option<PathBuf>, seed: u64) -> Result<JumpPath, CliError> {
    match file {
        Some(f) => Ok(PathRecord::parse(&read_file(f)?)?.into_path()?),
        None => Ok(sampler(law, sim, seed, true)?.sample(0, sim.horizon)?),
    }
}

pub fn localtime(seed: u64, out: &Output, args: &LocaltimeArgs) -> Result<(), CliError> {
    let spec = args.law.spec(true)?;
    let path = load_or_sample(&args.law, &args.sim, &args.path, seed)?;
    if path.spec().alpha() <= 1.0 {
        return Err(CliError::AlphaTooSmall(path.spec().alpha()));
    }
    let t = args.sim.horizon.min(path.horizon());
    let grid = LocalTimeGrid::build(&path, t, args.n, args.big_n)?;
    let mut csv = String::from("cell_center,local_time\n");
    for (c, l) in grid.cells() {
        let _ = writeln!(csv, "{c},{l}");
    }
    let csv_path = out.write("localtime.csv", &csv)?;
    let kappa = args.kappa.unwrap_or(0.8 * (spec.alpha() - 1.0) / 2.0);
    let holder = holder_statistic(&path, t, &args.levels, args.big_n, kappa)?;
    let config = RunConfig { seed, args };
    let result = json!({
        "holder": holder,
        "occupied_cells": grid.cells().len(),
        "time_inside_grid": grid.total_ticks() as f64 / TICKS_PER_UNIT as f64,
        "time_outside_grid": grid.outside_ticks() as f64 / TICKS_PER_UNIT as f64,
        "table": csv_path.file_name().and_then(|f| f.to_str()),
    });
    let bounds = json!({ "path_resolution": path.resolution(), "sup_norm_to_full_process": pf(path.spec().p()).powi(-path.resolution()) });
    let report = out.report("localtime.json", "localtime", &config, &bounds, &result)?;
    println!("{}\n{}", csv_path.display(), report.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RecurrenceArgs {
    #[command(flatten)]
    pub law: Law,
    #[command(flatten)]
    pub sim: Sim,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub center: String,
    /// Ball radius exponent r in B(center, p^r).
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub radius: i32,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,
}

pub fn recurrence(seed: u64, out: &Output, args: &RecurrenceArgs) -> Result<(), CliError> {
    let sampler = sampler(&args.law, &args.sim, seed, false)?;
    let center = parse_padic(&args.center, args.law.p, args.sim.window()?)?;
    let ball = Ball::new(&center, args.radius);
    let report = recurrence_diagnostic(&sampler, &ball, &args.times, args.sim.paths, args.threshold)?;
    let defect = args.times.iter().map(|&t| haar_invariance_defect(sampler.spec(), t)).fold(0.0, f64::max);
    let config = RunConfig { seed, args };
    let result = json!({ "report": report, "haar_invariance_defect": defect });
    let path = out.report("recurrence.json", "recurrence", &config, &sampling_bounds(&args.law, &args.sim), &result)?;
    println!("{}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ZeroOneArgs {
    #[command(flatten)]
    pub law: Law,
    #[command(flatten)]
    pub sim: Sim,
    /// f(y) = ‖y‖^exponent.
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub exponent: f64,
    /// Deepest refinement level; defaults to the resolution.
    #[arg(long)]
    pub max_level: Option<i32>,
}

pub fn zero_one(seed: u64, out: &Output, args: &ZeroOneArgs) -> Result<(), CliError> {
    let sampler = sampler(&args.law, &args.sim, seed, false)?;
    let f = NonnegFunction::RadialPower {
        scale: 1.0,
        center: PAdic::zero(args.law.p, args.sim.window()?)?,
        exponent: args.exponent,
    };
    let level = args.max_level.unwrap_or(args.sim.resolution);
    let report = zero_one_diagnostic(&f, &sampler, args.sim.horizon, args.sim.paths, level)?;
    let config = RunConfig { seed, args };
    let bounds = json!({
        "deepest_floor": pf(args.law.p).powi(-level),
        "divergence_rule": "I_J / I_ceil(J/2) > p",
    });
    let path = out.report("zero_one.json", "zero-one", &config, &bounds, &report)?;
    println!("{}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckHArgs {
    #[command(flatten)]
    pub law: Law,
    /// Coefficient: const:C, radial:SCALE,CENTER,DELTA or piecewise:C@R=V;...;default=V.
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub x: String,
    /// Region B(x, p^L).
    #[arg(short = 'L', long, default_value_t = 0, allow_hyphen_values = true)]
    pub l: i32,
    #[arg(short, long, default_value_t = 1.0)]
    pub t: f64,
    /// Also test the sufficient condition with this exponent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = -32, allow_hyphen_values = true)]
    pub window_lo: i32,
    #[arg(long, default_value_t = 32, allow_hyphen_values = true)]
    pub window_hi: i32,
}

pub fn check_h(seed: u64, out: &Output, args: &CheckHArgs) -> Result<(), CliError> {
    let spec = args.law.spec(true)?;
    let w = Window::new(args.window_lo, args.window_hi)
        .map_err(|_| CliError::WindowTooSmall(format!("invalid window [{}, {})", args.window_lo, args.window_hi)))?;
    let b = parse_coefficient(&args.b, args.law.p, w)?;
    let x = parse_padic(&args.x, args.law.p, w)?;
    let verdict = condition_h_check(&spec, &b, &x, args.l, args.t)?;
    let sufficiency = args.lambda.map(|l| h_sufficiency(&spec, &b, &x, l)).transpose()?;
    let config = RunConfig { seed, args };
    let result = json!({ "finite": verdict.is_finite(), "verdict": verdict, "sufficiency": sufficiency });
    let bounds = json!({ "relative_series_tolerance": 1e-14 });
    let path = out.report("check_h.json", "check-h", &config, &bounds, &result)?;
    println!("{}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SdeArgs {
    #[command(flatten)]
    pub law: Law,
    #[command(flatten)]
    pub sim: Sim,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub x: String,
    /// Coefficient: const:C, radial:SCALE,CENTER,DELTA or piecewise:C@R=V;...;default=V.
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    /// Categories of X(T) - x are cells of radius p^cell_exp ...
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    pub cell_exp: i32,
    /// ... inside B(0, p^outer_exp), plus one outside bin.
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    pub outer_exp: i32,
    /// Number of solution paths written per method.
    #[arg(long, default_value_t = 10)]
    pub write_paths: u64,
}

fn solve_stream(
    method: MethodArg,
    b: &padic_stable::analytic::CoefficientFunction,
    x: &PAdic,
    sampler: &PathSampler,
    i: u64,
    horizon: f64,
) -> Result<SolutionPath, CliError> {
    Ok(match method {
        MethodArg::Direct => solve_direct(b, x, &sampler.sample(i, horizon)?)?,
        _ => solve_time_change_sampled(b, x, sampler, i, horizon)?.0,
    })
}

pub fn sde(seed: u64, out: &Output, args: &SdeArgs) -> Result<(), CliError> {
    let spec = args.law.spec(true)?;
    let w = args.sim.window()?;
    let b = parse_coefficient(&args.b, args.law.p, w)?;
    let x = parse_padic(&args.x, args.law.p, w)?;
    let seed_direct = seed;
    let seed_time_change = seed.wrapping_add(1);
    let methods: Vec<(MethodArg, u64, &str)> = match args.method {
        MethodArg::Direct => vec![(MethodArg::Direct, seed_direct, "direct")],
        MethodArg::TimeChange => vec![(MethodArg::TimeChange, seed_time_change, "time_change")],
        MethodArg::Both => vec![(MethodArg::Direct, seed_direct, "direct"), (MethodArg::TimeChange, seed_time_change, "time_change")],
    };
    let mut per_method = serde_json::Map::new();
    for &(method, s, name) in &methods {
        let sampler = PathSampler::new(&spec, args.sim.resolution, w, s)?;
        let bins = (args.law.p as usize).pow((args.outer_exp - args.cell_exp).max(0) as u32) + 1;
        let rows = par_map(args.sim.paths, |i| -> Result<(usize, bool, Option<bool>), CliError> {
            let sol = solve_stream(method, &b, &x, &sampler, i, args.sim.horizon)?;
            let cat = ball_category(&(&sol.final_value() - &x), args.cell_exp, args.outer_exp);
            let exact = match method {
                MethodArg::Direct => None,
                _ => Some(reconstruct_driver(&b, &sol)?.residual == Norm::Zero),
            };
            Ok((cat, triviality_check(&sol), exact))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        let mut counts = vec![0u64; bins];
        for r in &rows {
            counts[r.0] += 1;
        }
        for i in 0..args.write_paths.min(args.sim.paths) {
            let sol = solve_stream(method, &b, &x, &sampler, i, args.sim.horizon)?;
            out.write(&format!("sde/{name}_{i:06}.txt"), &sol.to_record().to_text())?;
        }
        let n = args.sim.paths.max(1) as f64;
        let mut entry = json!({
            "seed": s,
            "counts": counts,
            "trivial_fraction": rows.iter().filter(|r| r.1).count() as f64 / n,
        });
        if method != MethodArg::Direct {
            entry["driver_reconstructed_exactly"] = json!(rows.iter().filter(|r| r.2 == Some(true)).count());
        }
        per_method.insert(name.to_string(), entry);
    }
    let mut result = json!({ "methods": per_method });
    if args.method == MethodArg::Both {
        let cfg = WeakConfig {
            spec,
            resolution: args.sim.resolution,
            window: (args.sim.window_lo, args.sim.window_hi),
            horizon: args.sim.horizon,
            n_paths: args.sim.paths,
            seed_direct,
            seed_time_change,
            cell_exp: args.cell_exp,
            outer_exp: args.outer_exp,
        };
        let weak = weak_equivalence_test(&b, &x, &cfg)?;
        result["comparison"] = json!({ "statistic": weak.statistic, "dof": weak.dof, "p_value": weak.p_value });
    }
    let config = RunConfig { seed, args };
    let bounds = sampling_bounds(&args.law, &args.sim);
    let path = out.report("sde.json", "sde", &config, &bounds, &result)?;
    println!("{}", path.display());
    Ok(())
}
