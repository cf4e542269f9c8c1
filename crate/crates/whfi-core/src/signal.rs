//! Discretized model of L²(ℝ): complex signals sampled on a uniform grid.
//!
//! A [`GridSpec`] fixes the step `delta` and the absolute index range
//! `[i_min, i_max]`; sample `i` sits at `t_i = i * delta`. Signals combined in
//! one expression must share an identical spec (equality is exact). Anything
//! outside the grid is treated as zero, matching the compact-support
//! hypotheses the experiments run under.
//!
//! Translation only ever moves samples by whole grid steps; no interpolation
//! is performed anywhere in the crate.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::math;
use crate::sum::{Kahan, KahanComplex};

/// Relative slack when certifying that a real shift or lattice parameter is a
/// whole number of grid steps. The grid contract chooses `delta` so these
/// ratios are integers up to f64 rounding of the inputs themselves.
pub(crate) const GRID_RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// Two signals in one expression carry different grid specs.
    GridMismatch,
    /// Requested shift is not an integer multiple of the grid step.
    ShiftOffGrid { shift: f64, delta: f64 },
    /// Construction parameters violate a `GridSpec` invariant.
    BadSpec,
    /// Sample buffer length does not match the grid index range.
    LengthMismatch { expected: usize, got: usize },
    /// Declared support hint has nonzero samples outside it.
    SupportHintViolated { index: i64 },
    /// A window the caller required to be square-integrable is not.
    NotSquareIntegrable,
    /// Window parameters out of range (e.g. empty interval).
    BadWindowParams,
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::GridMismatch => write!(f, "signals live on incompatible grids"),
            GridError::ShiftOffGrid { shift, delta } => write!(
                f,
                "shift {shift} is not an integer multiple of the grid step {delta}"
            ),
            GridError::BadSpec => write!(f, "invalid grid spec"),
            GridError::LengthMismatch { expected, got } => {
                write!(f, "sample buffer has length {got}, grid expects {expected}")
            }
            GridError::SupportHintViolated { index } => {
                write!(f, "nonzero sample at index {index} outside declared support")
            }
            GridError::NotSquareIntegrable => {
                write!(f, "window is not square-integrable (power_cusp alpha >= 1/2)")
            }
            GridError::BadWindowParams => write!(f, "window parameters out of range"),
        }
    }
}

impl core::error::Error for GridError {}

/// Uniform sampling grid: `t_i = i * delta` for `i` in `[i_min, i_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub delta: f64,
    pub i_min: i64,
    pub i_max: i64,
    /// Samples per smallest lattice period; informational, set by whoever
    /// derives `delta` from rational lattice parameters.
    pub oversample: u32,
}

impl GridSpec {
    pub fn new(delta: f64, i_min: i64, i_max: i64, oversample: u32) -> Result<Self, GridError> {
        if !(delta > 0.0) || !delta.is_finite() || i_min > i_max || oversample == 0 {
            return Err(GridError::BadSpec);
        }
        Ok(Self {
            delta,
            i_min,
            i_max,
            oversample,
        })
    }

    /// Grid covering `[-span, span]` with the given step.
    pub fn symmetric(delta: f64, span: f64) -> Result<Self, GridError> {
        if !(span > 0.0) {
            return Err(GridError::BadSpec);
        }
        let steps = math::round(span / delta) as i64;
        Self::new(delta, -steps, steps, 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        (self.i_max - self.i_min + 1) as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn t(&self, i: i64) -> f64 {
        i as f64 * self.delta
    }

    #[inline]
    pub fn contains(&self, i: i64) -> bool {
        i >= self.i_min && i <= self.i_max
    }

    /// Number of whole grid steps in `x`, or an error if `x` is not a step
    /// multiple (no interpolation is ever performed).
    pub fn steps_of(&self, x: f64) -> Result<i64, GridError> {
        let ratio = x / self.delta;
        let rounded = math::round(ratio);
        if math::abs(ratio - rounded) > GRID_RATIO_TOL * math::abs(ratio).max(1.0) {
            return Err(GridError::ShiftOffGrid {
                shift: x,
                delta: self.delta,
            });
        }
        Ok(rounded as i64)
    }
}

/// Complex-valued function sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    grid: GridSpec,
    samples: Vec<Complex64>,
    /// Inclusive absolute index interval outside which samples are exactly
    /// zero. `None` means no claim.
    support_hint: Option<(i64, i64)>,
}

impl GridSignal {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            samples: vec![Complex64::ZERO; grid.len()],
            grid,
            support_hint: None,
        }
    }

    pub fn from_samples(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self, GridError> {
        if samples.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        Ok(Self {
            grid,
            samples,
            support_hint: None,
        })
    }

    /// Like [`from_samples`](Self::from_samples) but records a support hint,
    /// verifying by scan that everything outside it is exactly zero.
    pub fn from_samples_with_hint(
        grid: GridSpec,
        samples: Vec<Complex64>,
        hint: (i64, i64),
    ) -> Result<Self, GridError> {
        let mut sig = Self::from_samples(grid, samples)?;
        for (off, z) in sig.samples.iter().enumerate() {
            let i = grid.i_min + off as i64;
            if (i < hint.0 || i > hint.1) && *z != Complex64::ZERO {
                return Err(GridError::SupportHintViolated { index: i });
            }
        }
        sig.support_hint = Some(hint);
        Ok(sig)
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    #[inline]
    pub fn support_hint(&self) -> Option<(i64, i64)> {
        self.support_hint
    }

    /// Sample at absolute grid index `i`; zero outside the grid.
    #[inline]
    pub fn at(&self, i: i64) -> Complex64 {
        if self.grid.contains(i) {
            self.samples[(i - self.grid.i_min) as usize]
        } else {
            Complex64::ZERO
        }
    }

    /// Tight inclusive index range of nonzero samples, found by scan.
    /// `None` when the signal is identically zero.
    pub fn scan_support(&self) -> Option<(i64, i64)> {
        let first = self.samples.iter().position(|z| *z != Complex64::ZERO)?;
        let last = self.samples.iter().rposition(|z| *z != Complex64::ZERO)?;
        Some((
            self.grid.i_min + first as i64,
            self.grid.i_min + last as i64,
        ))
    }

    /// Support hint if present, otherwise a scan; full grid when identically
    /// zero signals would otherwise yield nothing to iterate over.
    pub(crate) fn support_or_scan(&self) -> Option<(i64, i64)> {
        self.support_hint.or_else(|| self.scan_support())
    }

    pub fn scale(&self, factor: Complex64) -> GridSignal {
        GridSignal {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * factor).collect(),
            support_hint: if factor == Complex64::ZERO {
                None
            } else {
                self.support_hint
            },
        }
    }

    pub fn add(&self, other: &GridSignal) -> Result<GridSignal, GridError> {
        check_grids(self, other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| x + y)
            .collect();
        Ok(GridSignal {
            grid: self.grid,
            samples,
            support_hint: union_hint(self.support_hint, other.support_hint),
        })
    }

    pub fn sub(&self, other: &GridSignal) -> Result<GridSignal, GridError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Pointwise product; support shrinks to the intersection.
    pub fn mul_pointwise(&self, other: &GridSignal) -> Result<GridSignal, GridError> {
        check_grids(self, other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| x * y)
            .collect();
        let hint = match (self.support_hint, other.support_hint) {
            (Some((a, b)), Some((c, d))) => {
                let lo = a.max(c);
                let hi = b.min(d);
                if lo <= hi {
                    Some((lo, hi))
                } else {
                    Some((self.grid.i_min, self.grid.i_min))
                }
            }
            (Some(h), None) | (None, Some(h)) => Some(h),
            (None, None) => None,
        };
        Ok(GridSignal {
            grid: self.grid,
            samples,
            support_hint: hint,
        })
    }
}

fn check_grids(f: &GridSignal, h: &GridSignal) -> Result<(), GridError> {
    if f.grid != h.grid {
        return Err(GridError::GridMismatch);
    }
    Ok(())
}

fn union_hint(a: Option<(i64, i64)>, b: Option<(i64, i64)>) -> Option<(i64, i64)> {
    match (a, b) {
        (Some((a0, a1)), Some((b0, b1))) => Some((a0.min(b0), a1.max(b1))),
        _ => None,
    }
}

/// Riemann-sum inner product `delta * Σ_i f_i conj(h_i)`, conjugate-linear in
/// the second argument. Summation is fixed left-to-right Kahan; the `delta`
/// scaling happens once at the end so indicator norms come out exact.
pub fn inner_product(f: &GridSignal, h: &GridSignal) -> Result<Complex64, GridError> {
    check_grids(f, h)?;
    let mut acc = KahanComplex::new();
    for (x, y) in f.samples.iter().zip(&h.samples) {
        acc.add(x * y.conj());
    }
    Ok(acc.total() * f.grid.delta)
}

/// `‖f‖² = inner_product(f, f)` taken as a real number.
pub fn norm_sq(f: &GridSignal) -> f64 {
    let mut acc = Kahan::new();
    for z in &f.samples {
        acc.add(z.norm_sqr());
    }
    acc.total() * f.grid.delta
}

pub fn norm(f: &GridSignal) -> f64 {
    math::sqrt(norm_sq(f))
}

/// `T_shift f(t) = f(t - shift)` for a shift that is a whole number of grid
/// steps. Samples moved past the boundary are dropped; zeros shift in.
pub fn translate(f: &GridSignal, shift: f64) -> Result<GridSignal, GridError> {
    let steps = f.grid.steps_of(shift)?;
    Ok(translate_steps(f, steps))
}

/// Exact-integer-step translation; the workhorse behind every lattice shift.
pub fn translate_steps(f: &GridSignal, steps: i64) -> GridSignal {
    let grid = f.grid;
    let samples = (grid.i_min..=grid.i_max)
        .map(|i| f.at(i - steps))
        .collect();
    let hint = f.support_hint.map(|(lo, hi)| {
        let lo = (lo + steps).clamp(grid.i_min, grid.i_max);
        let hi = (hi + steps).clamp(grid.i_min, grid.i_max);
        (lo, hi)
    });
    GridSignal {
        grid,
        samples,
        support_hint: hint,
    }
}

/// `E_freq f(t) = e^{2πi freq t} f(t)`. Pointwise modulus is unchanged.
pub fn modulate(f: &GridSignal, freq: f64) -> GridSignal {
    let grid = f.grid;
    let samples = f
        .samples
        .iter()
        .enumerate()
        .map(|(off, z)| {
            let i = grid.i_min + off as i64;
            z * math::cis_tau(freq * grid.t(i))
        })
        .collect();
    GridSignal {
        grid,
        samples,
        support_hint: f.support_hint,
    }
}

/// Window families the toolkit knows how to sample.
///
/// The kind strings `gaussian`, `box`, `triangle`, `power_cusp`,
/// `user_samples` are the canonical identifiers reused by the CLI.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum WindowKind {
    /// `e^{-π t² / σ²}`.
    Gaussian { sigma: f64 },
    /// Indicator of `[c, d)`.
    Box { c: f64, d: f64 },
    /// Hat function on `[c, d)`: 1 at the midpoint, 0 at the ends.
    Triangle { c: f64, d: f64 },
    /// `t ↦ (t - c)^{-α}` on `(c, d]`; unbounded at `c`, square-integrable
    /// iff `α < 1/2`.
    PowerCusp { alpha: f64, c: f64, d: f64 },
    /// Caller-supplied samples covering the whole grid.
    #[cfg_attr(feature = "serde", serde(skip))]
    UserSamples { samples: Vec<Complex64> },
}

impl WindowKind {
    pub fn name(&self) -> &'static str {
        match self {
            WindowKind::Gaussian { .. } => "gaussian",
            WindowKind::Box { .. } => "box",
            WindowKind::Triangle { .. } => "triangle",
            WindowKind::PowerCusp { .. } => "power_cusp",
            WindowKind::UserSamples { .. } => "user_samples",
        }
    }
}

/// Sample a window on the grid. With `require_l2`, parameter sets that are
/// not square-integrable (power cusp with `α ≥ 1/2`) are rejected.
pub fn make_window(
    kind: &WindowKind,
    grid: &GridSpec,
    require_l2: bool,
) -> Result<GridSignal, GridError> {
    match kind {
        WindowKind::Gaussian { sigma } => {
            if !(*sigma > 0.0) {
                return Err(GridError::BadWindowParams);
            }
            let samples = (grid.i_min..=grid.i_max)
                .map(|i| {
                    let t = grid.t(i);
                    Complex64::new(math::exp(-math::PI * t * t / (sigma * sigma)), 0.0)
                })
                .collect();
            GridSignal::from_samples(*grid, samples)
        }
        WindowKind::Box { c, d } => {
            if !(d > c) {
                return Err(GridError::BadWindowParams);
            }
            sample_real_supported(grid, |t| if t >= *c && t < *d { 1.0 } else { 0.0 })
        }
        WindowKind::Triangle { c, d } => {
            if !(d > c) {
                return Err(GridError::BadWindowParams);
            }
            let mid = 0.5 * (c + d);
            let half = 0.5 * (d - c);
            sample_real_supported(grid, |t| {
                if t >= *c && t < *d {
                    (1.0 - math::abs(t - mid) / half).max(0.0)
                } else {
                    0.0
                }
            })
        }
        WindowKind::PowerCusp { alpha, c, d } => {
            if !(d > c) || !(*alpha > 0.0) {
                return Err(GridError::BadWindowParams);
            }
            if require_l2 && *alpha >= 0.5 {
                return Err(GridError::NotSquareIntegrable);
            }
            // The singular endpoint is represented by the first grid point
            // strictly inside (c, d].
            sample_real_supported(grid, |t| {
                if t > *c && t <= *d {
                    math::pow(t - c, -alpha)
                } else {
                    0.0
                }
            })
        }
        WindowKind::UserSamples { samples } => GridSignal::from_samples(*grid, samples.clone()),
    }
}

fn sample_real_supported<F: Fn(f64) -> f64>(
    grid: &GridSpec,
    f: F,
) -> Result<GridSignal, GridError> {
    let samples: Vec<Complex64> = (grid.i_min..=grid.i_max)
        .map(|i| Complex64::new(f(grid.t(i)), 0.0))
        .collect();
    let sig = GridSignal::from_samples(*grid, samples)?;
    match sig.scan_support() {
        Some(hint) => {
            let grid = sig.grid;
            GridSignal::from_samples_with_hint(grid, sig.samples, hint)
        }
        None => Ok(sig),
    }
}
