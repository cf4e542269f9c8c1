//! Run configuration: JSON config file mirroring the flags, flag overlay,
//! rational lattice parameters, and grid construction.
//!
//! Lattice parameters are exact rationals `p/q`. Decimals are accepted only
//! when they are exact binary fractions (`0.5`, `0.25`, ...); anything else
//! is almost certainly a truncated value like `0.3333` and is rejected so the
//! grid-compatibility contract stays meaningful.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use whfi_core::signal::{GridSpec, WindowKind};
use whfi_core::Complex64;

/// Configuration error; the message names the offending field.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Exact rational lattice parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Parse `p/q`, a plain integer, or an exact binary decimal.
pub fn parse_rational(s: &str, field: &str) -> Result<Rational, ConfigError> {
    let reject = || err(format!("{field} must be a rational p/q (got `{s}`)"));
    let reduced = |num: i64, den: i64| -> Result<Rational, ConfigError> {
        if num <= 0 || den <= 0 {
            return Err(err(format!("{field} must be positive (got `{s}`)")));
        }
        let g = gcd(num, den);
        Ok(Rational {
            num: num / g,
            den: den / g,
        })
    };
    if let Some((p, q)) = s.split_once('/') {
        let num: i64 = p.trim().parse().map_err(|_| reject())?;
        let den: i64 = q.trim().parse().map_err(|_| reject())?;
        return reduced(num, den);
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(reject());
        }
        let int_part: i64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| reject())?
        };
        let frac_part: i64 = frac.parse().map_err(|_| reject())?;
        let den = 10i64
            .checked_pow(frac.len() as u32)
            .ok_or_else(reject)?;
        let r = reduced(int_part * den + frac_part, den)?;
        // After reduction the denominator must be a power of two, i.e. the
        // decimal is exactly representable in binary.
        if r.den & (r.den - 1) != 0 {
            return Err(err(format!(
                "{field} must be a rational p/q (`{s}` is not an exact binary fraction; write it as p/q)"
            )));
        }
        return Ok(r);
    }
    let num: i64 = s.trim().parse().map_err(|_| reject())?;
    reduced(num, 1)
}

/// Window/signal spec string: `kind:params`, e.g. `box:0,1`, `gaussian:1`,
/// `triangle:0,2`, `power_cusp:0.25,0,1`, `user_samples:path.csv`.
pub fn parse_window_spec(s: &str, field: &str) -> Result<WindowKind, ConfigError> {
    let (kind, params) = s.split_once(':').unwrap_or((s, ""));
    let nums = || -> Result<Vec<f64>, ConfigError> {
        params
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| err(format!("{field}: bad numeric parameter `{p}` in `{s}`")))
            })
            .collect()
    };
    match kind {
        "gaussian" => {
            let v = nums()?;
            if v.len() != 1 {
                return Err(err(format!("{field}: gaussian takes one parameter (sigma)")));
            }
            Ok(WindowKind::Gaussian { sigma: v[0] })
        }
        "box" => {
            let v = nums()?;
            if v.len() != 2 {
                return Err(err(format!("{field}: box takes two parameters (c,d)")));
            }
            Ok(WindowKind::Box { c: v[0], d: v[1] })
        }
        "triangle" => {
            let v = nums()?;
            if v.len() != 2 {
                return Err(err(format!("{field}: triangle takes two parameters (c,d)")));
            }
            Ok(WindowKind::Triangle { c: v[0], d: v[1] })
        }
        "power_cusp" => {
            let v = nums()?;
            if v.len() != 3 {
                return Err(err(format!(
                    "{field}: power_cusp takes three parameters (alpha,c,d)"
                )));
            }
            Ok(WindowKind::PowerCusp {
                alpha: v[0],
                c: v[1],
                d: v[2],
            })
        }
        "user_samples" => {
            if params.is_empty() {
                return Err(err(format!("{field}: user_samples needs a CSV path")));
            }
            // Placeholder; `materialize_window` loads the actual samples.
            Ok(WindowKind::UserSamples {
                samples: Vec::new(),
            })
        }
        other => Err(err(format!(
            "{field}: unknown window kind `{other}` (expected gaussian, box, triangle, power_cusp, user_samples)"
        ))),
    }
}

/// Materialize a window spec against a grid, loading user samples if needed.
pub fn materialize_window(
    spec: &str,
    field: &str,
    grid: &GridSpec,
) -> Result<WindowKind, ConfigError> {
    let (kind, params) = spec.split_once(':').unwrap_or((spec, ""));
    if kind == "user_samples" {
        let samples = load_user_samples(Path::new(params), grid)
            .map_err(|e| err(format!("{field}: {e}")))?;
        return Ok(WindowKind::UserSamples { samples });
    }
    parse_window_spec(spec, field)
}

/// Sparse CSV `i,re,im` (header mandatory) with absolute grid indices;
/// unlisted samples are zero.
fn load_user_samples(path: &Path, grid: &GridSpec) -> Result<Vec<Complex64>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path:?}: {e}"))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "i,re,im" => {}
        _ => return Err(format!("{path:?} must start with header `i,re,im`")),
    }
    let mut samples = vec![Complex64::ZERO; grid.len()];
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("{path:?} line {}: expected i,re,im", lineno + 2));
        }
        let i: i64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| format!("{path:?} line {}: bad index", lineno + 2))?;
        let re: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| format!("{path:?} line {}: bad re", lineno + 2))?;
        let im: f64 = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("{path:?} line {}: bad im", lineno + 2))?;
        if !grid.contains(i) {
            return Err(format!(
                "{path:?} line {}: index {i} outside grid [{}, {}]",
                lineno + 2,
                grid.i_min,
                grid.i_max
            ));
        }
        samples[(i - grid.i_min) as usize] = Complex64::new(re, im);
    }
    Ok(samples)
}

/// Config file contents: a JSON document mirroring the flags. Flags override
/// file values.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub window: Option<String>,
    pub signal: Option<String>,
    pub a: Option<String>,
    pub b: Option<String>,
    pub delta: Option<f64>,
    pub oversample: Option<u32>,
    pub span: Option<f64>,
    pub k_max: Option<i64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub subset_trials: Option<u32>,
    pub probes: Option<u32>,
    pub method: Option<String>,
    pub class: Option<String>,
}

/// Flag values as parsed by clap; identical shape to [`FileConfig`].
#[derive(Debug, Default, Clone, clap::Args)]
pub struct CommonArgs {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path (stdout when omitted; CSV side-files need a path).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Window spec, e.g. `box:0,1`, `gaussian:1`, `power_cusp:0.25,0,1`.
    #[arg(long)]
    pub window: Option<String>,
    /// Signal spec, same grammar as `--window`.
    #[arg(long)]
    pub signal: Option<String>,
    /// Shift parameter as an exact rational `p/q`.
    #[arg(long)]
    pub a: Option<String>,
    /// Modulation parameter as an exact rational `p/q`.
    #[arg(long)]
    pub b: Option<String>,
    /// Grid step (must make a and 1/b whole numbers of steps).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Derive the grid step as 1/(oversample·lcm) from the lattice rationals.
    #[arg(long)]
    pub oversample: Option<u32>,
    /// Half-width of the grid: samples cover [-span, span].
    #[arg(long)]
    pub span: Option<f64>,
    /// Correlation table coverage |k| <= k_max.
    #[arg(long = "k-max")]
    pub k_max: Option<i64>,
    /// Relative tolerance for identity verification.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for every randomized quantity.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random subset draws in the unconditionality surrogate.
    #[arg(long = "subset-trials")]
    pub subset_trials: Option<u32>,
    /// Probe count for frame-bound estimation.
    #[arg(long)]
    pub probes: Option<u32>,
    /// Bounds method: `rayleigh_extremes` or `dense_eigen`.
    #[arg(long)]
    pub method: Option<String>,
    /// Hypothesis class: auto, bcf, cf, cc, failure_bcf, failure_cf.
    #[arg(long)]
    pub class: Option<String>,
}

/// Fully resolved run configuration; embedded verbatim in every report.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub window: String,
    pub signal: String,
    pub a: String,
    pub b: String,
    pub delta: f64,
    pub oversample: Option<u32>,
    pub span: f64,
    pub k_max: i64,
    pub tol: f64,
    pub seed: u64,
    pub subset_trials: u32,
    pub probes: u32,
    pub method: String,
    pub class: String,
    #[serde(skip)]
    pub a_rat: Rational,
    #[serde(skip)]
    pub b_rat: Rational,
}

impl Resolved {
    pub fn grid(&self) -> Result<GridSpec, ConfigError> {
        let mut grid = GridSpec::symmetric(self.delta, self.span)
            .map_err(|e| err(format!("delta/span: {e}")))?;
        grid.oversample = self.oversample.unwrap_or(1);
        // Certify the lattice against the grid now so misconfigurations
        // surface as config errors naming the field.
        grid.steps_of(self.a_rat.value()).map_err(|_| {
            err(format!(
                "a = {} is not a whole number of grid steps (delta = {})",
                self.a, self.delta
            ))
        })?;
        grid.steps_of(1.0 / self.b_rat.value()).map_err(|_| {
            err(format!(
                "b = {}: 1/b is not a whole number of grid steps (delta = {})",
                self.b, self.delta
            ))
        })?;
        Ok(grid)
    }

    pub fn window_kind(&self, grid: &GridSpec) -> Result<WindowKind, ConfigError> {
        materialize_window(&self.window, "window", grid)
    }

    pub fn signal_kind(&self, grid: &GridSpec) -> Result<WindowKind, ConfigError> {
        materialize_window(&self.signal, "signal", grid)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// Overlay flags on the config file, apply defaults, and derive the grid
/// step. The reference configuration (delta 1e-3, span 8, seed 42) fills
/// anything left unspecified.
pub fn resolve(args: &CommonArgs) -> Result<Resolved, ConfigError> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| err(format!("config: cannot read {path:?}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| err(format!("config: {e}")))?
        }
        None => FileConfig::default(),
    };
    let window = args
        .window
        .clone()
        .or(file.window)
        .unwrap_or_else(|| "box:0,1".into());
    let signal = args
        .signal
        .clone()
        .or(file.signal)
        .unwrap_or_else(|| "box:0,1".into());
    let a_str = args.a.clone().or(file.a).unwrap_or_else(|| "1".into());
    let b_str = args.b.clone().or(file.b).unwrap_or_else(|| "1".into());
    let a_rat = parse_rational(&a_str, "a")?;
    let b_rat = parse_rational(&b_str, "b")?;
    // Early sanity on the window grammar (user_samples paths load later).
    parse_window_spec(&window, "window")?;
    parse_window_spec(&signal, "signal")?;

    let span = args.span.or(file.span).unwrap_or(8.0);
    if !(span > 0.0) {
        return Err(err("span must be positive"));
    }
    let mut oversample = None;
    let delta = match (args.delta.or(file.delta), args.oversample.or(file.oversample)) {
        (Some(d), _) => {
            if !(d > 0.0) {
                return Err(err("delta must be positive"));
            }
            d
        }
        (None, Some(os)) => {
            if os == 0 {
                return Err(err("oversample must be a positive integer"));
            }
            oversample = Some(os);
            // a = p/q needs q | steps, 1/b = q'/p' needs p' | steps.
            let l = lcm(a_rat.den, b_rat.num);
            1.0 / (os as i64 * l) as f64
        }
        (None, None) => 1e-3,
    };
    let tol = args.tol.or(file.tol).unwrap_or(1e-6);
    if !(tol > 0.0) {
        return Err(err("tol must be positive"));
    }
    let k_max = args.k_max.or(file.k_max).unwrap_or(8);
    if k_max < 0 {
        return Err(err("k-max must be nonnegative"));
    }
    let method = args
        .method
        .clone()
        .or(file.method)
        .unwrap_or_else(|| "rayleigh_extremes".into());
    let method = match method.as_str() {
        "rayleigh" | "rayleigh_extremes" => "rayleigh_extremes".to_string(),
        "dense" | "dense_eigen" => "dense_eigen".to_string(),
        other => {
            return Err(err(format!(
                "method must be rayleigh_extremes or dense_eigen (got `{other}`)"
            )))
        }
    };
    let class = args
        .class
        .clone()
        .or(file.class)
        .unwrap_or_else(|| "auto".into());
    match class.as_str() {
        "auto" | "bcf" | "cf" | "cc" | "failure_bcf" | "failure_cf" => {}
        other => {
            return Err(err(format!(
                "class must be auto, bcf, cf, cc, failure_bcf or failure_cf (got `{other}`)"
            )))
        }
    }
    Ok(Resolved {
        window,
        signal,
        a: a_rat.to_string(),
        b: b_rat.to_string(),
        delta,
        oversample,
        span,
        k_max,
        tol,
        seed: args.seed.or(file.seed).unwrap_or(42),
        subset_trials: args.subset_trials.or(file.subset_trials).unwrap_or(200),
        probes: args.probes.or(file.probes).unwrap_or(8),
        method,
        class,
        a_rat,
        b_rat,
    })
}
