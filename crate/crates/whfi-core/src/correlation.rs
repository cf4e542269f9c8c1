//! Correlation functions `G_k`, the Wiener amalgam norm, and the
//! CC-condition quantities.
//!
//! For a window `g` and lattice `(a, b)`,
//!
//! ```text
//! G_k(t) = Σ_n g(t - n·a) · conj(g(t - n·a - k/b))
//! ```
//!
//! is a-periodic; `G_0 = Σ_n |g(t - n·a)|²` is real and nonnegative. Each
//! `G_k` is stored on one period `[0, a)` and extended by exact index
//! wrap-around. Because windows are truncated to the grid, every `n`-sum is
//! finite and `G_k` vanishes outright once `|k|/b` exceeds the support width,
//! which is what makes the tail bound exact.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::lattice::LatticeSpec;
use crate::math;
use crate::signal::{GridSignal, GridSpec};
use crate::sum::{Kahan, KahanComplex};

#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationError {
    /// Requested k outside the table's coverage.
    OutOfTable { k: i64, k_max: i64 },
    /// Shift parameter incompatible with the signal grid.
    BadShift,
}

impl fmt::Display for CorrelationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelationError::OutOfTable { k, k_max } => {
                write!(f, "G_{k} not in table (k_max = {k_max})")
            }
            CorrelationError::BadShift => write!(f, "shift not grid-compatible"),
        }
    }
}

impl core::error::Error for CorrelationError {}

/// An a-periodic sampled function stored on one period `[0, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFn {
    delta: f64,
    samples: Vec<Complex64>,
    /// Set when `|k|/b` exceeds the grid span so the overlap is empty and the
    /// function is identically zero by construction.
    out_of_range: bool,
}

impl PeriodicFn {
    /// Assemble from raw period samples (used by the proof-step
    /// periodizations, which are 1/b-periodic rather than a-periodic).
    pub(crate) fn from_parts(delta: f64, samples: Vec<Complex64>) -> Self {
        Self {
            delta,
            samples,
            out_of_range: false,
        }
    }

    pub fn period_steps(&self) -> i64 {
        self.samples.len() as i64
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn out_of_range(&self) -> bool {
        self.out_of_range
    }

    /// Value at absolute grid index `i`, via exact wrap-around.
    #[inline]
    pub fn at_index(&self, i: i64) -> Complex64 {
        self.samples[math::wrap_index(i, self.samples.len() as i64)]
    }

    pub fn sup_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for z in &self.samples {
            let v = math::sqrt(z.norm_sqr());
            if v > m {
                m = v;
            }
        }
        m
    }
}

/// `G_k` for one `k`, sampled on `[0, a)`.
///
/// When `|k|/b` is wider than the whole grid the overlap is empty: the result
/// is identically zero and flagged `out_of_range`.
pub fn correlation_g(g: &GridSignal, lattice: &LatticeSpec, k: i64) -> PeriodicFn {
    let grid = *g.grid();
    let a_steps = lattice.shift_steps();
    let shift = k * lattice.inv_b_steps();
    let span = grid.i_max - grid.i_min;
    if shift.abs() > span {
        return PeriodicFn {
            delta: grid.delta,
            samples: alloc::vec![Complex64::ZERO; a_steps as usize],
            out_of_range: true,
        };
    }
    let support = g.support_or_scan().unwrap_or((grid.i_min, grid.i_min - 1));
    let samples = (0..a_steps)
        .map(|j| {
            let mut acc = KahanComplex::new();
            for_each_translate(j, support, a_steps, |idx| {
                acc.add(g.at(idx) * g.at(idx - shift).conj());
            });
            acc.total()
        })
        .collect();
    PeriodicFn {
        delta: grid.delta,
        samples,
        out_of_range: false,
    }
}

/// Visit `idx = j - n·a_steps` for every `n` keeping `idx` inside `support`,
/// in ascending `n` order.
#[inline]
fn for_each_translate(j: i64, support: (i64, i64), a_steps: i64, mut f: impl FnMut(i64)) {
    let (lo, hi) = support;
    if lo > hi {
        return;
    }
    // j - n·A ∈ [lo, hi]  ⇔  n ∈ [(j - hi)/A, (j - lo)/A]
    let n_min = div_ceil(j - hi, a_steps);
    let n_max = div_floor(j - lo, a_steps);
    for n in n_min..=n_max {
        f(j - n * a_steps);
    }
}

#[inline]
fn div_floor(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

#[inline]
fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// The family `{G_k}` for `|k| ≤ k_max`, plus an exact bound on everything
/// beyond.
#[derive(Debug, Clone)]
pub struct CorrelationTable {
    grid: GridSpec,
    lattice: LatticeSpec,
    k_max: i64,
    /// Indexed `k = -k_max ..= k_max`, offset by `k_max`.
    g_k: Vec<PeriodicFn>,
    tail_bound: f64,
}

impl CorrelationTable {
    /// Precompute `G_k` for `|k| ≤ k_max` and the tail bound
    /// `Σ_{|k| > k_max} sup_t Σ_n |g(t-na)| |g(t-na-k/b)|`, an upper bound on
    /// `sup_t Σ_{|k|>k_max} |G_k(t)|`. The window's truncation makes the
    /// k-range of nonzero terms finite, so the bound is computed exactly.
    pub fn build(g: &GridSignal, lattice: LatticeSpec, k_max: i64) -> Self {
        assert!(k_max >= 0, "k_max must be nonnegative");
        assert_eq!(lattice.grid(), g.grid(), "lattice certified for another grid");
        let grid = *g.grid();
        let g_k = (-k_max..=k_max)
            .map(|k| correlation_g(g, &lattice, k))
            .collect();
        let tail_bound = tail_bound_from(g, &lattice, k_max);
        Self {
            grid,
            lattice,
            k_max,
            g_k,
            tail_bound,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn g_k(&self, k: i64) -> Result<&PeriodicFn, CorrelationError> {
        if k.abs() > self.k_max {
            return Err(CorrelationError::OutOfTable {
                k,
                k_max: self.k_max,
            });
        }
        Ok(&self.g_k[(k + self.k_max) as usize])
    }

    pub fn g0(&self) -> &PeriodicFn {
        self.g_k(0).expect("k = 0 always present")
    }
}

fn tail_bound_from(g: &GridSignal, lattice: &LatticeSpec, k_max: i64) -> f64 {
    let support = match g.support_or_scan() {
        Some(s) => s,
        None => return 0.0,
    };
    let width = support.1 - support.0;
    let b_steps = lattice.inv_b_steps();
    let a_steps = lattice.shift_steps();
    // |G_k| ≡ 0 once |k|·(1/b) exceeds the support width.
    let k_cut = width / b_steps + 1;
    let mut tail = Kahan::new();
    for k in (k_max + 1)..=k_cut {
        let shift = k * b_steps;
        let mut sup = 0.0f64;
        for j in 0..a_steps {
            let mut acc = Kahan::new();
            for_each_translate(j, support, a_steps, |idx| {
                acc.add(math::sqrt(g.at(idx).norm_sqr() * g.at(idx - shift).norm_sqr()));
            });
            if acc.total() > sup {
                sup = acc.total();
            }
        }
        // sup |G_{-k}| = sup |G_k| exactly, hence the factor 2.
        tail.add(2.0 * sup);
    }
    tail.total()
}

/// Wiener amalgam norm `‖g‖_{W,a} = Σ_n ‖g · χ_{[an, a(n+1))}‖_∞`, with the
/// block sups taken over grid points.
pub fn amalgam_norm(g: &GridSignal, a: f64) -> Result<f64, CorrelationError> {
    let grid = g.grid();
    let a_steps = grid.steps_of(a).map_err(|_| CorrelationError::BadShift)?;
    if a_steps <= 0 {
        return Err(CorrelationError::BadShift);
    }
    let n_lo = div_floor(grid.i_min, a_steps);
    let n_hi = div_floor(grid.i_max, a_steps);
    let mut total = Kahan::new();
    for n in n_lo..=n_hi {
        let lo = (n * a_steps).max(grid.i_min);
        let hi = ((n + 1) * a_steps - 1).min(grid.i_max);
        let mut sup = 0.0f64;
        for i in lo..=hi {
            let v = math::sqrt(g.at(i).norm_sqr());
            if v > sup {
                sup = v;
            }
        }
        total.add(sup);
    }
    Ok(total.total())
}

/// Grid surrogates for the CC-condition quantities. All sups and infs are
/// extrema over grid points of one period `[0, a)`; report them together
/// with the grid step when publishing.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CCReport {
    /// `max_t Σ_{|k| ≤ k_max} |G_k(t)|` plus the certified tail bound.
    pub cc_sup: f64,
    pub g0_sup: f64,
    pub g0_inf: f64,
    /// Largest ε with `Σ_{k≠0} |G_k(t)| ≤ (1-ε) G_0(t)` at every grid point;
    /// absent when no positive ε works or `G_0` vanishes somewhere.
    pub epsilon: Option<f64>,
    pub k_max: i64,
    pub tail_bound: f64,
    pub delta: f64,
}

pub fn cc_report(table: &CorrelationTable) -> CCReport {
    let a_steps = table.g0().period_steps();
    let mut cc_max = 0.0f64;
    let mut g0_sup = f64::MIN;
    let mut g0_inf = f64::MAX;
    let mut epsilon: Option<f64> = Some(f64::MAX);
    for j in 0..a_steps {
        let g0 = table.g0().at_index(j).re;
        g0_sup = g0_sup.max(g0);
        g0_inf = g0_inf.min(g0);
        let mut off = Kahan::new();
        for k in -table.k_max()..=table.k_max() {
            if k == 0 {
                continue;
            }
            off.add(math::sqrt(table.g_k(k).unwrap().at_index(j).norm_sqr()));
        }
        let off = off.total();
        cc_max = cc_max.max(off + g0);
        // The true Σ_{k≠0}|G_k(t)| includes everything past k_max; the tail
        // bound covers it, so the margin stays valid for under-built tables.
        epsilon = match epsilon {
            Some(eps) if g0 > 0.0 => {
                let here = 1.0 - (off + table.tail_bound()) / g0;
                if here > 0.0 {
                    Some(eps.min(here))
                } else {
                    None
                }
            }
            _ => None,
        };
    }
    CCReport {
        cc_sup: cc_max + table.tail_bound(),
        g0_sup,
        g0_inf,
        epsilon,
        k_max: table.k_max(),
        tail_bound: table.tail_bound(),
        delta: table.grid().delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{make_window, GridSpec, WindowKind};

    fn grid(delta: f64, span: f64) -> GridSpec {
        GridSpec::symmetric(delta, span).unwrap()
    }

    fn window(kind: WindowKind, g: &GridSpec) -> GridSignal {
        make_window(&kind, g, false).unwrap()
    }

    #[test]
    fn box_g0_is_one_and_g1_is_zero() {
        let g = grid(1e-3, 4.0);
        let w = window(WindowKind::Box { c: 0.0, d: 1.0 }, &g);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        let g0 = correlation_g(&w, &lat, 0);
        for z in g0.samples() {
            assert_eq!(*z, Complex64::new(1.0, 0.0));
        }
        let g1 = correlation_g(&w, &lat, 1);
        for z in g1.samples() {
            assert_eq!(*z, Complex64::ZERO);
        }
    }

    #[test]
    fn half_shift_box_counts_two_overlaps() {
        let g = grid(1e-3, 4.0);
        let w = window(WindowKind::Box { c: 0.0, d: 1.0 }, &g);
        let lat = LatticeSpec::new(0.5, 1.0, &g).unwrap();
        let g0 = correlation_g(&w, &lat, 0);
        assert_eq!(g0.period_steps(), 500);
        for z in g0.samples() {
            assert_eq!(*z, Complex64::new(2.0, 0.0));
        }
    }

    #[test]
    fn out_of_range_overlap_is_flagged() {
        let g = grid(1e-2, 2.0);
        let w = window(WindowKind::Box { c: 0.0, d: 1.0 }, &g);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        // |k|/b = 5 exceeds the grid span of 4.
        let gk = correlation_g(&w, &lat, 5);
        assert!(gk.out_of_range());
        assert!(gk.samples().iter().all(|z| *z == Complex64::ZERO));
    }

    #[test]
    fn box_table_tail_is_zero() {
        let g = grid(1e-3, 4.0);
        let w = window(WindowKind::Box { c: 0.0, d: 1.0 }, &g);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        let table = CorrelationTable::build(&w, lat, 3);
        assert_eq!(table.tail_bound(), 0.0);
        for k in 1..=3i64 {
            assert_eq!(table.g_k(k).unwrap().sup_abs(), 0.0);
            assert_eq!(table.g_k(-k).unwrap().sup_abs(), 0.0);
        }
    }

    #[test]
    fn gaussian_table_tail_is_negligible() {
        let g = grid(1e-2, 8.0);
        let w = window(WindowKind::Gaussian { sigma: 1.0 }, &g);
        let lat = LatticeSpec::new(1.0, 0.5, &g).unwrap();
        let table = CorrelationTable::build(&w, lat, 8);
        assert!(table.tail_bound() <= 1e-10, "tail = {}", table.tail_bound());
    }

    #[test]
    fn compact_support_tail_vanishes_exactly() {
        let g = grid(1e-2, 4.0);
        let w = window(WindowKind::Triangle { c: 0.0, d: 2.0 }, &g);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        let table = CorrelationTable::build(&w, lat, 2);
        assert_eq!(table.tail_bound(), 0.0);
    }

    #[test]
    fn amalgam_norm_of_boxes() {
        let g = grid(1e-3, 4.0);
        let w = window(WindowKind::Box { c: 0.0, d: 1.0 }, &g);
        assert_eq!(amalgam_norm(&w, 1.0).unwrap(), 1.0);
        assert_eq!(amalgam_norm(&w, 0.5).unwrap(), 2.0);
    }

    #[test]
    fn amalgam_norm_of_gaussian_matches_series_oracle() {
        // Independent oracle: on block [n, n+1) the grid max of e^{-πt²} sits
        // at the grid point closest to 0, i.e. t = n for n ≥ 0 and
        // t = n+1-delta for n < 0. Summing those analytic values gives the
        // expected norm without touching the implementation's block scan.
        let delta = 1e-3;
        let g = grid(delta, 8.0);
        let w = window(WindowKind::Gaussian { sigma: 1.0 }, &g);
        let mut oracle = 0.0;
        for n in 0..8i64 {
            let t = n as f64;
            oracle += math::exp(-math::PI * t * t);
        }
        for n in -8..0i64 {
            let t = (n + 1) as f64 - delta;
            oracle += math::exp(-math::PI * t * t);
        }
        let got = amalgam_norm(&w, 1.0).unwrap();
        assert!((got - oracle).abs() < 1e-12, "got {got}, oracle {oracle}");
        // Two near-unit blocks plus the decaying tails.
        assert!((got - 2.0864).abs() < 1e-3, "got {got}");
    }

    #[test]
    fn cc_report_for_box_is_tight() {
        let g = grid(1e-3, 4.0);
        let w = window(WindowKind::Box { c: 0.0, d: 1.0 }, &g);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        let table = CorrelationTable::build(&w, lat, 4);
        let report = cc_report(&table);
        assert_eq!(report.cc_sup, 1.0);
        assert_eq!(report.g0_sup, 1.0);
        assert_eq!(report.g0_inf, 1.0);
        assert_eq!(report.epsilon, Some(1.0));
    }

    #[test]
    fn cc_report_for_gaussian_has_positive_margin() {
        // Σ_{k≠0} |G_k| / G_0 is constant for this window: the off-diagonal
        // correlations factor as e^{-2πk²}·Θ(t) against G_0 = Θ(t), so
        // ε = 1 - 2(e^{-2π} + e^{-8π} + ...) ≈ 0.9962651.
        let g = grid(1e-2, 8.0);
        let w = window(WindowKind::Gaussian { sigma: 1.0 }, &g);
        let lat = LatticeSpec::new(1.0, 0.5, &g).unwrap();
        let table = CorrelationTable::build(&w, lat, 8);
        let report = cc_report(&table);
        let eps = report.epsilon.expect("gaussian satisfies the CC margin");
        let oracle = 1.0 - 2.0 * (math::exp(-2.0 * math::PI) + math::exp(-8.0 * math::PI));
        assert!((eps - oracle).abs() < 1e-6, "eps = {eps}, oracle = {oracle}");
        assert!(report.g0_inf > 0.0);
        assert!(report.cc_sup >= report.g0_sup && report.g0_sup >= report.g0_inf);
    }

    #[test]
    fn power_cusp_g0_sup_grows_under_refinement() {
        // G_0(t) = t^{-1/2} near 0, so the grid sup is delta^{-1/2}: halving
        // delta multiplies the sup by √2 and no CC margin exists.
        let mut prev = 0.0;
        for delta in [1e-2, 5e-3, 2.5e-3] {
            let g = grid(delta, 2.0);
            let w = window(
                WindowKind::PowerCusp {
                    alpha: 0.25,
                    c: 0.0,
                    d: 1.0,
                },
                &g,
            );
            let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
            let table = CorrelationTable::build(&w, lat, 2);
            let report = cc_report(&table);
            let expected = math::pow(delta, -0.5);
            assert!(
                (report.g0_sup - expected).abs() < 1e-9 * expected,
                "sup = {}, expected = {}",
                report.g0_sup,
                expected,
            );
            assert!(report.g0_sup > prev);
            // The off-diagonal correlations vanish outright (disjoint
            // supports), so the margin itself is degenerate-perfect; the
            // failure this window exhibits is the unbounded G_0, not ECC1.
            assert_eq!(report.epsilon, Some(1.0));
            prev = report.g0_sup;
        }
    }

    #[test]
    fn index_symmetry_matches_conjugate_shift() {
        // G_{-k}(t) = conj(G_k(t + k/b)), exactly on the grid.
        let g = grid(1e-2, 6.0);
        let w = window(WindowKind::Triangle { c: 0.0, d: 2.0 }, &g);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        for k in 1..=2i64 {
            let gk = correlation_g(&w, &lat, k);
            let gmk = correlation_g(&w, &lat, -k);
            let shift = k * lat.inv_b_steps();
            for j in 0..gk.period_steps() {
                let lhs = gmk.at_index(j);
                let rhs = gk.at_index(j + shift).conj();
                assert!((lhs - rhs).norm_sqr() < 1e-28, "k={k} j={j}: {lhs} vs {rhs}");
            }
        }
    }
}
