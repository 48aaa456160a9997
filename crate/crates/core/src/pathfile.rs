//! Plain-text path files.
//!
//! ```text
//! p alpha M T seed
//! # window lo hi
//! # stream k
//! # start <literal>
//! t valuation d0 d1 ...
//! ```
//!
//! `seed` is `-` when the path was not produced by a seeded sampler. Digits
//! are little-endian from the valuation up to the last nonzero digit. Times
//! are multiples of `2^-32` and are written in shortest round-trip form, so
//! reading and re-emitting a file reproduces it byte for byte.

use std::fmt::Write as _;

use thiserror::Error;

use crate::analytic::{AnalyticError, StableSpec};
use crate::driver::{ticks_to_time, to_ticks, DriverError, JumpEvent, JumpPath};
use crate::padic::{PAdic, PAdicError, Window};
use crate::rng::SeedRecord;

#[derive(Debug, Error)]
pub enum PathFileError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    PAdic(#[from] PAdicError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Driver(#[from] DriverError),
}

/// Contents of a path file: a driver path, or a solution path when `start` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub p: u32,
    pub alpha: f64,
    pub resolution: i32,
    pub horizon: u64,
    pub seed: Option<SeedRecord>,
    pub window: Window,
    pub start: Option<PAdic>,
    pub events: Vec<JumpEvent>,
}

fn syntax(line: usize, msg: impl Into<String>) -> PathFileError {
    PathFileError::Syntax { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, PathFileError> {
    tok.ok_or_else(|| syntax(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| syntax(line, format!("bad {what}")))
}

fn exact_ticks(t: f64, line: usize) -> Result<u64, PathFileError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(syntax(line, "bad time"));
    }
    let k = to_ticks(t);
    if ticks_to_time(k) != t {
        return Err(syntax(line, "time is not a multiple of 2^-32"));
    }
    Ok(k)
}

impl PathRecord {
    pub fn from_path(path: &JumpPath) -> PathRecord {
        PathRecord {
            p: path.spec().p(),
            alpha: path.spec().alpha(),
            resolution: path.resolution(),
            horizon: path.horizon_ticks(),
            seed: path.seed(),
            window: path.window(),
            start: None,
            events: path.events().to_vec(),
        }
    }

    pub fn into_path(self) -> Result<JumpPath, PathFileError> {
        if self.start.is_some() {
            return Err(syntax(0, "file holds a solution path, not a driver path"));
        }
        let spec = StableSpec::new(self.p, self.alpha)?;
        Ok(JumpPath::from_events(spec, self.horizon, self.resolution, self.window, self.events, self.seed)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let seed = self.seed.map_or("-".to_string(), |r| r.seed.to_string());
        let _ = writeln!(s, "{} {} {} {} {}", self.p, self.alpha, self.resolution, ticks_to_time(self.horizon), seed);
        let _ = writeln!(s, "# window {} {}", self.window.lo, self.window.hi);
        if let Some(r) = self.seed {
            let _ = writeln!(s, "# stream {}", r.stream);
        }
        if let Some(x) = &self.start {
            let _ = writeln!(s, "# start {x}");
        }
        for e in &self.events {
            let v = match e.jump.valuation() {
                Some(v) => v,
                None => {
                    let _ = writeln!(s, "{} 0", e.time());
                    continue;
                }
            };
            let lo = (v - self.window.lo) as usize;
            let digits = e.jump.digits();
            let last = digits.iter().rposition(|&d| d != 0).unwrap_or(lo);
            let _ = write!(s, "{} {}", e.time(), v);
            for d in &digits[lo..=last] {
                let _ = write!(s, " {d}");
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<PathRecord, PathFileError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (n, header) = lines.next().ok_or_else(|| syntax(1, "empty file"))?;
        let mut tok = header.split_whitespace();
        let p: u32 = field(tok.next(), n, "p")?;
        let alpha: f64 = field(tok.next(), n, "alpha")?;
        let resolution: i32 = field(tok.next(), n, "resolution")?;
        let horizon = exact_ticks(field(tok.next(), n, "horizon")?, n)?;
        let seed = match tok.next() {
            Some("-") => None,
            other => Some(field::<u64>(other, n, "seed")?),
        };
        if tok.next().is_some() {
            return Err(syntax(n, "trailing fields in header"));
        }
        let mut window = Window::default();
        let mut stream = 0;
        let mut start_text = None;
        let mut events = Vec::new();
        for (n, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut tok = rest.split_whitespace();
                match tok.next() {
                    Some("window") => {
                        let lo = field(tok.next(), n, "window lo")?;
                        let hi = field(tok.next(), n, "window hi")?;
                        window = Window::new(lo, hi)?;
                    }
                    Some("stream") => stream = field(tok.next(), n, "stream")?,
                    Some("start") => start_text = Some((n, rest.trim_start()["start".len()..].trim().to_string())),
                    _ => {}
                }
                continue;
            }
            let mut tok = line.split_whitespace();
            let tick = exact_ticks(field(tok.next(), n, "time")?, n)?;
            let v: i32 = field(tok.next(), n, "valuation")?;
            let digits = tok.map(|d| d.parse::<u8>().map_err(|_| syntax(n, "bad digit"))).collect::<Result<Vec<_>, _>>()?;
            events.push((n, tick, v, digits));
        }
        let events = events
            .into_iter()
            .map(|(n, tick, v, digits)| {
                let jump = PAdic::from_digits(p, window, v, &digits).map_err(|e| syntax(n, e.to_string()))?;
                Ok(JumpEvent { tick, jump })
            })
            .collect::<Result<Vec<_>, PathFileError>>()?;
        let start = match start_text {
            Some((n, s)) => Some(PAdic::parse(&s, p, window).map_err(|e| syntax(n, e.to_string()))?),
            None => None,
        };
        Ok(PathRecord {
            p,
            alpha,
            resolution,
            horizon,
            seed: seed.map(|seed| SeedRecord { seed, stream }),
            window,
            start,
            events,
        })
    }
}
