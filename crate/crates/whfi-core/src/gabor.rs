//! The Weyl-Heisenberg system `(g, a, b)`: frame coefficients, the frame
//! operator `S f = Σ ⟨f, E_mb T_na g⟩ E_mb T_na g`, frame-bound estimation,
//! and reconstruction through `S⁻¹`.
//!
//! On the grid the system is exactly finite: the modulation index runs over
//! one full alias-free band (beyond `1/(b·delta)` distinct values the
//! discrete modulations repeat identically), and the translation index over
//! every `n` whose translate overlaps the grid. The discretized analysis sum
//! therefore carries no truncation tail at all.
//!
//! Lattice modulation phases are the exact roots of unity
//! `e^{2πi·m·i/B}` with `B = (1/b)/delta`, matching `e^{2πi·mb·t_i}` without
//! accumulating phase drift across the grid.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::lattice::LatticeSpec;
use crate::math;
use crate::rng::{random_probe, SplitMix64};
use crate::signal::{inner_product, norm_sq, GridSignal};
use crate::sum::{Kahan, KahanBuffer, KahanComplex};
use crate::{eigen, signal};

/// Hard cap on grid size for materializing the dense frame operator.
pub const DENSE_GRID_CAP: usize = 4096;

/// Start index of an overlap window plus the products on it.
type OverlapProducts = (i64, Vec<Complex64>);

const POWER_ITER_MAX: usize = 200;
const POWER_ITER_RTOL: f64 = 1e-12;
const CG_ITER_MAX: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub enum GaborError {
    /// Coefficient index outside the system's (m, n) ranges.
    IndexOutOfRange { m: i64, n: i64 },
    /// Lower frame bound estimate is not positive; `S` cannot be inverted.
    NotPositiveDefinite { a_est: f64 },
    /// Conjugate-gradient loop exhausted its iteration budget.
    NoConvergence { residual: f64, iters: usize },
    /// Grid too large to materialize the dense operator.
    GridTooLarge { len: usize, cap: usize },
}

impl fmt::Display for GaborError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaborError::IndexOutOfRange { m, n } => {
                write!(f, "coefficient index (m={m}, n={n}) outside system ranges")
            }
            GaborError::NotPositiveDefinite { a_est } => {
                write!(f, "lower frame bound estimate {a_est} is not positive")
            }
            GaborError::NoConvergence { residual, iters } => {
                write!(f, "no convergence after {iters} iterations (residual {residual})")
            }
            GaborError::GridTooLarge { len, cap } => {
                write!(f, "grid has {len} samples, dense mode is capped at {cap}")
            }
        }
    }
}

impl core::error::Error for GaborError {}

/// How a [`FrameBoundsReport`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundsMethod {
    RayleighExtremes,
    DenseEigen,
}

/// Estimated frame bounds. Rayleigh quotients sit inside `[A, B]`, so the
/// rayleigh method's `a_est` is an upper bound on the true `A` and `b_est` a
/// lower bound on the true `B` (inner bounds); `dense_eigen` is exact for
/// the discretized operator.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FrameBoundsReport {
    pub a_est: f64,
    pub b_est: f64,
    pub method: BoundsMethod,
    pub probe_count: u32,
    pub seed: u64,
}

/// The WH system `(g, a, b)` with its truncation ranges resolved against the
/// grid.
#[derive(Debug, Clone)]
pub struct GaborSystem {
    window: GridSignal,
    lattice: LatticeSpec,
    m_lo: i64,
    m_hi: i64,
    n_lo: i64,
    n_hi: i64,
    /// `roots[r] = e^{2πi r / B}`.
    roots: Vec<Complex64>,
}

impl GaborSystem {
    /// Build the system. The modulation range is the full alias-free band
    /// (`B = (1/b)/delta` consecutive values of `m`, symmetric about 0); the
    /// translation range covers every `n` with `T_na g` overlapping the grid.
    pub fn new(window: GridSignal, lattice: LatticeSpec) -> Self {
        assert_eq!(lattice.grid(), window.grid(), "lattice certified for another grid");
        let grid = *window.grid();
        let b_steps = lattice.inv_b_steps();
        let m_lo = -(b_steps / 2);
        let m_hi = m_lo + b_steps - 1;
        let a_steps = lattice.shift_steps();
        let (s_lo, s_hi) = window
            .support_or_scan()
            .unwrap_or((grid.i_min, grid.i_max));
        let n_lo = div_ceil(grid.i_min - s_hi, a_steps);
        let n_hi = div_floor(grid.i_max - s_lo, a_steps);
        let roots = (0..b_steps)
            .map(|r| math::cis_tau(r as f64 / b_steps as f64))
            .collect();
        Self {
            window,
            lattice,
            m_lo,
            m_hi,
            n_lo,
            n_hi,
            roots,
        }
    }

    pub fn window(&self) -> &GridSignal {
        &self.window
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    /// Inclusive modulation index range (the alias-free band).
    pub fn m_range(&self) -> (i64, i64) {
        (self.m_lo, self.m_hi)
    }

    /// Inclusive translation index range (all translates meeting the grid).
    pub fn n_range(&self) -> (i64, i64) {
        (self.n_lo, self.n_hi)
    }

    #[inline]
    fn b_steps(&self) -> i64 {
        self.lattice.inv_b_steps()
    }

    /// Index overlap of `f` with `T_na g`, or `None` when empty.
    fn overlap(&self, f: &GridSignal, n: i64) -> Option<(i64, i64)> {
        let (f_lo, f_hi) = f.support_or_scan()?;
        let (s_lo, s_hi) = self.window.support_or_scan()?;
        let shift = n * self.lattice.shift_steps();
        let lo = f_lo.max(s_lo + shift).max(f.grid().i_min);
        let hi = f_hi.min(s_hi + shift).min(f.grid().i_max);
        (lo <= hi).then_some((lo, hi))
    }

    /// Pointwise products `f_i · conj(g_{i-na})` on the overlap; the analysis
    /// inner product for `(m, n)` is the phase-weighted sum of these.
    fn products_for(&self, f: &GridSignal, n: i64) -> Option<OverlapProducts> {
        let (lo, hi) = self.overlap(f, n)?;
        let shift = n * self.lattice.shift_steps();
        let p = (lo..=hi)
            .map(|i| f.at(i) * self.window.at(i - shift).conj())
            .collect();
        Some((lo, p))
    }

    /// `δ · Σ_i p_i e^{-2πi m i / B}` with fixed left-to-right Kahan order.
    fn analysis_sum(&self, m: i64, i_lo: i64, products: &[Complex64]) -> Complex64 {
        let b_steps = self.b_steps();
        let step = (-m).rem_euclid(b_steps) as usize;
        let mut r = math::wrap_index(-m * i_lo, b_steps);
        let mut acc = KahanComplex::new();
        for p in products {
            acc.add(p * self.roots[r]);
            r += step;
            if r >= b_steps as usize {
                r -= b_steps as usize;
            }
        }
        acc.total() * self.window.grid().delta
    }

    /// One frame coefficient `⟨f, E_mb T_na g⟩`.
    pub fn coefficient(&self, f: &GridSignal, m: i64, n: i64) -> Result<Complex64, GaborError> {
        if m < self.m_lo || m > self.m_hi || n < self.n_lo || n > self.n_hi {
            return Err(GaborError::IndexOutOfRange { m, n });
        }
        Ok(match self.products_for(f, n) {
            Some((lo, p)) => self.analysis_sum(m, lo, &p),
            None => Complex64::ZERO,
        })
    }

    /// The full coefficient grid over `m_range × n_range`, row-major in `m`.
    pub fn coefficient_grid(&self, f: &GridSignal) -> CoefficientGrid {
        let n_count = (self.n_hi - self.n_lo + 1) as usize;
        let m_count = (self.m_hi - self.m_lo + 1) as usize;
        let prods: Vec<Option<OverlapProducts>> = (self.n_lo..=self.n_hi)
            .map(|n| self.products_for(f, n))
            .collect();
        let mut values = vec![Complex64::ZERO; m_count * n_count];
        for (mi, m) in (self.m_lo..=self.m_hi).enumerate() {
            for (ni, prod) in prods.iter().enumerate() {
                if let Some((lo, p)) = prod {
                    values[mi * n_count + ni] = self.analysis_sum(m, *lo, p);
                }
            }
        }
        CoefficientGrid {
            m_range: (self.m_lo, self.m_hi),
            n_range: (self.n_lo, self.n_hi),
            values,
        }
    }

    /// `Σ_{m,n} |⟨f, E_mb T_na g⟩|²` — the identity's left-hand side.
    ///
    /// Because the ranges are exhaustive for the discretized model the sum
    /// has no truncation tail; the value is exact up to rounding.
    pub fn coefficient_energy(&self, f: &GridSignal) -> f64 {
        let mut energy = Kahan::new();
        for n in self.n_lo..=self.n_hi {
            if let Some((lo, p)) = self.products_for(f, n) {
                for m in self.m_lo..=self.m_hi {
                    energy.add(self.analysis_sum(m, lo, &p).norm_sqr());
                }
            }
        }
        energy.total()
    }

    /// `S f = Σ_{m,n} ⟨f, E_mb T_na g⟩ E_mb T_na g`, summed in fixed
    /// (m outer, n inner) order with per-sample compensated accumulation.
    pub fn frame_operator_apply(&self, f: &GridSignal) -> GridSignal {
        let grid = *f.grid();
        let a_steps = self.lattice.shift_steps();
        let (s_lo, s_hi) = match self.window.support_or_scan() {
            Some(s) => s,
            None => return GridSignal::zeros(grid),
        };
        // Analysis inputs per n, computed once.
        let prods: Vec<(i64, Option<OverlapProducts>)> = (self.n_lo..=self.n_hi)
            .map(|n| (n, self.products_for(f, n)))
            .collect();
        let mut out = KahanBuffer::zeros(grid.len());
        let b_steps = self.b_steps();
        for m in self.m_lo..=self.m_hi {
            let step = m.rem_euclid(b_steps) as usize;
            for (n, prod) in &prods {
                let Some((lo, p)) = prod else { continue };
                let c = self.analysis_sum(m, *lo, p);
                if c == Complex64::ZERO {
                    continue;
                }
                let shift = n * a_steps;
                let w_lo = (s_lo + shift).max(grid.i_min);
                let w_hi = (s_hi + shift).min(grid.i_max);
                let mut r = math::wrap_index(m * w_lo, b_steps);
                for i in w_lo..=w_hi {
                    let w = self.window.at(i - shift) * self.roots[r];
                    out.add((i - grid.i_min) as usize, c * w);
                    r += step;
                    if r >= b_steps as usize {
                        r -= b_steps as usize;
                    }
                }
            }
        }
        GridSignal::from_samples(grid, out.into_samples()).expect("buffer sized to grid")
    }

    /// Frame bounds via Rayleigh quotients of seeded probes, refined by power
    /// iteration on `S` and on `b_est·I - S`.
    pub fn frame_bounds_estimate(&self, probes: u32, seed: u64) -> FrameBoundsReport {
        assert!(probes >= 1, "at least one probe required");
        let grid = *self.window.grid();
        let mut rng = SplitMix64::new(seed);
        let lo = grid.i_min / 2;
        let hi = grid.i_max / 2;
        let mut best_max: Option<(f64, GridSignal)> = None;
        let mut best_min: Option<(f64, GridSignal)> = None;
        let mut drawn = 0;
        while drawn < probes {
            let f = random_probe(&grid, lo, hi, &mut rng);
            let nsq = norm_sq(&f);
            if nsq == 0.0 {
                continue; // degenerate probe: resample
            }
            drawn += 1;
            let rho = quadratic_form(self, &f) / nsq;
            if best_max.as_ref().is_none_or(|(r, _)| rho > *r) {
                best_max = Some((rho, f.clone()));
            }
            if best_min.as_ref().is_none_or(|(r, _)| rho < *r) {
                best_min = Some((rho, f));
            }
        }
        let (rho_max, v_max) = best_max.expect("probes >= 1");
        let (rho_min, v_min) = best_min.expect("probes >= 1");
        let b_est = power_iterate(|f| self.frame_operator_apply(f), v_max, rho_max);
        // Largest eigenvalue of b_est·I - S is b_est - A.
        let shifted = power_iterate(
            |f| {
                let sf = self.frame_operator_apply(f);
                f.scale(Complex64::new(b_est, 0.0))
                    .sub(&sf)
                    .expect("same grid")
            },
            v_min,
            b_est - rho_min,
        );
        FrameBoundsReport {
            a_est: b_est - shifted,
            b_est,
            method: BoundsMethod::RayleighExtremes,
            probe_count: probes,
            seed,
        }
    }

    /// Materialize the discretized `S` (small grids only) and return its
    /// extreme eigenvalues exactly.
    pub fn frame_bounds_dense(&self, seed: u64) -> Result<FrameBoundsReport, GaborError> {
        let matrix = self.materialize_dense()?;
        let n = self.window.grid().len();
        let (a_est, b_est) = eigen::hermitian_extremes(&matrix, n);
        Ok(FrameBoundsReport {
            a_est,
            b_est,
            method: BoundsMethod::DenseEigen,
            probe_count: 0,
            seed,
        })
    }

    /// Dense matrix of `S` in the sample basis, built column-by-column from
    /// the analysis/synthesis composition and symmetrized.
    fn materialize_dense(&self) -> Result<Vec<Complex64>, GaborError> {
        let grid = *self.window.grid();
        let n = grid.len();
        if n > DENSE_GRID_CAP {
            return Err(GaborError::GridTooLarge {
                len: n,
                cap: DENSE_GRID_CAP,
            });
        }
        let mut matrix = vec![Complex64::ZERO; n * n];
        for j in 0..n {
            let mut samples = vec![Complex64::ZERO; n];
            samples[j] = Complex64::new(1.0, 0.0);
            let idx = grid.i_min + j as i64;
            let e_j = GridSignal::from_samples_with_hint(grid, samples, (idx, idx))
                .expect("unit vector respects hint");
            let col = self.frame_operator_apply(&e_j);
            for (i, z) in col.samples().iter().enumerate() {
                matrix[i * n + j] = *z;
            }
        }
        // S is self-adjoint; collapse rounding asymmetry before eigensolving.
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (matrix[i * n + j] + matrix[j * n + i].conj());
                matrix[i * n + j] = avg;
                matrix[j * n + i] = avg.conj();
            }
            matrix[i * n + i] = Complex64::new(matrix[i * n + i].re, 0.0);
        }
        Ok(matrix)
    }

    /// Solve `S h = f` by conjugate gradients on the positive self-adjoint
    /// `S`, starting from `f / b_est`; returns `h` with
    /// `‖S h - f‖ ≤ tol·‖f‖`.
    pub fn inverse_frame_apply(&self, f: &GridSignal, tol: f64) -> Result<GridSignal, GaborError> {
        let bounds = self.frame_bounds_estimate(6, 0x5EED);
        if !(bounds.a_est > 0.0) {
            return Err(GaborError::NotPositiveDefinite {
                a_est: bounds.a_est,
            });
        }
        let f_norm = signal::norm(f);
        if f_norm == 0.0 {
            return Ok(GridSignal::zeros(*f.grid()));
        }
        let mut x = f.scale(Complex64::new(1.0 / bounds.b_est, 0.0));
        let mut r = f.sub(&self.frame_operator_apply(&x)).expect("same grid");
        let mut p = r.clone();
        let mut rsq = norm_sq(&r);
        for iter in 0..CG_ITER_MAX {
            if math::sqrt(rsq) <= tol * f_norm {
                // Confirm with a true residual; CG's recurrence can drift.
                let true_res = signal::norm(&f.sub(&self.frame_operator_apply(&x)).unwrap());
                if true_res <= tol * f_norm {
                    return Ok(x);
                }
            }
            let sp = self.frame_operator_apply(&p);
            let p_sp = inner_product(&sp, &p).expect("same grid").re;
            if p_sp <= 0.0 {
                return Err(GaborError::NoConvergence {
                    residual: math::sqrt(rsq) / f_norm,
                    iters: iter,
                });
            }
            let alpha = rsq / p_sp;
            x = x
                .add(&p.scale(Complex64::new(alpha, 0.0)))
                .expect("same grid");
            r = r
                .sub(&sp.scale(Complex64::new(alpha, 0.0)))
                .expect("same grid");
            let rsq_new = norm_sq(&r);
            let beta = rsq_new / rsq;
            p = r.add(&p.scale(Complex64::new(beta, 0.0))).expect("same grid");
            rsq = rsq_new;
        }
        let true_res = signal::norm(&f.sub(&self.frame_operator_apply(&x)).unwrap());
        if true_res <= tol * f_norm {
            Ok(x)
        } else {
            Err(GaborError::NoConvergence {
                residual: true_res / f_norm,
                iters: CG_ITER_MAX,
            })
        }
    }
}

/// Frame coefficients over the truncated lattice, row-major in `m`.
#[derive(Debug, Clone)]
pub struct CoefficientGrid {
    pub m_range: (i64, i64),
    pub n_range: (i64, i64),
    pub values: Vec<Complex64>,
}

impl CoefficientGrid {
    pub fn at(&self, m: i64, n: i64) -> Complex64 {
        let n_count = (self.n_range.1 - self.n_range.0 + 1) as usize;
        let row = (m - self.m_range.0) as usize;
        let col = (n - self.n_range.0) as usize;
        self.values[row * n_count + col]
    }

    /// `Σ |c_{mn}|²`, finite by construction.
    pub fn energy(&self) -> f64 {
        let mut acc = Kahan::new();
        for z in &self.values {
            acc.add(z.norm_sqr());
        }
        acc.total()
    }
}

/// `⟨S f, f⟩`, real for the self-adjoint `S`.
pub fn quadratic_form(sys: &GaborSystem, f: &GridSignal) -> f64 {
    inner_product(&sys.frame_operator_apply(f), f)
        .expect("same grid")
        .re
}

/// Power iteration with Rayleigh-quotient readout; monotone for positive
/// semidefinite operators, so it refines a probe quotient from below.
fn power_iterate<F: Fn(&GridSignal) -> GridSignal>(
    apply: F,
    start: GridSignal,
    initial_rho: f64,
) -> f64 {
    let mut v = start;
    let mut rho = initial_rho;
    for _ in 0..POWER_ITER_MAX {
        let av = apply(&v);
        let nsq = norm_sq(&av);
        if nsq == 0.0 {
            return 0.0;
        }
        v = av.scale(Complex64::new(1.0 / math::sqrt(nsq), 0.0));
        let av2 = apply(&v);
        let next = inner_product(&av2, &v).expect("same grid").re;
        if math::abs(next - rho) <= POWER_ITER_RTOL * math::abs(next).max(1.0) {
            return next;
        }
        rho = next;
    }
    rho
}

#[inline]
fn div_floor(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

#[inline]
fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{make_window, modulate, translate, GridSpec, WindowKind};

    fn grid(delta: f64, span: f64) -> GridSpec {
        GridSpec::symmetric(delta, span).unwrap()
    }

    fn boxcar(g: &GridSpec, c: f64, d: f64) -> GridSignal {
        make_window(&WindowKind::Box { c, d }, g, true).unwrap()
    }

    fn box_system(g: &GridSpec) -> GaborSystem {
        let lat = LatticeSpec::new(1.0, 1.0, g).unwrap();
        GaborSystem::new(boxcar(g, 0.0, 1.0), lat)
    }

    #[test]
    fn onb_coefficient_examples() {
        let g = grid(1e-3, 4.0);
        let sys = box_system(&g);
        let f = boxcar(&g, 0.0, 1.0);
        let c00 = sys.coefficient(&f, 0, 0).unwrap();
        assert!((c00 - Complex64::new(1.0, 0.0)).norm_sqr() < 1e-24);
        for m in [1i64, 2, 5, -3] {
            let c = sys.coefficient(&f, m, 0).unwrap();
            assert!(c.norm_sqr() < 1e-20, "m={m}: {c}");
        }
    }

    #[test]
    fn half_box_coefficient_matches_closed_form() {
        // ⟨χ_[0,1/2), E_1 T_0 χ_[0,1)⟩ = ∫₀^{1/2} e^{-2πit} dt = -i/π.
        // The left-endpoint sum is a finite geometric series,
        // δ·(1 - e^{-πi})/(1 - e^{-2πiδ}), whose distance to -i/π is ≈ δ.
        let delta = 1e-4;
        let g = grid(delta, 2.0);
        let sys = box_system(&g);
        let f = boxcar(&g, 0.0, 0.5);
        let c = sys.coefficient(&f, 1, 0).unwrap();
        let closed_form = Complex64::new(0.0, -1.0 / math::PI);
        let dist = math::sqrt((c - closed_form).norm_sqr());
        assert!(dist <= 2.0 * delta, "c = {c}, dist = {dist}");
        let geometric = Complex64::new(delta, 0.0) * (Complex64::new(1.0, 0.0) - math::cis_tau(-0.5))
            / (Complex64::new(1.0, 0.0) - math::cis_tau(-delta));
        assert!((c - geometric).norm_sqr() < 1e-24, "c = {c} vs geometric {geometric}");
    }

    #[test]
    fn coefficient_matches_literal_composition() {
        let g = grid(1e-2, 4.0);
        let sys = box_system(&g);
        let f = boxcar(&g, -0.5, 1.25);
        for (m, n) in [(0i64, 0i64), (3, 1), (-7, -2), (49, 0)] {
            let fast = sys.coefficient(&f, m, n).unwrap();
            let w = modulate(
                &translate(&boxcar(&g, 0.0, 1.0), n as f64).unwrap(),
                m as f64,
            );
            let literal = inner_product(&f, &w).unwrap();
            assert!(
                (fast - literal).norm_sqr() < 1e-20,
                "(m,n)=({m},{n}): {fast} vs {literal}"
            );
        }
    }

    #[test]
    fn out_of_range_coefficient_is_rejected() {
        let g = grid(1e-2, 4.0);
        let sys = box_system(&g);
        let f = boxcar(&g, 0.0, 1.0);
        let (m_lo, m_hi) = sys.m_range();
        assert_eq!((m_lo, m_hi), (-50, 49));
        assert!(matches!(
            sys.coefficient(&f, m_hi + 1, 0),
            Err(GaborError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn onb_energy_is_parseval() {
        let g = grid(1e-3, 4.0);
        let sys = box_system(&g);
        let f = boxcar(&g, 0.0, 1.0);
        assert!((sys.coefficient_energy(&f) - 1.0).abs() < 1e-8);
        let half = boxcar(&g, 0.0, 0.5);
        assert!((sys.coefficient_energy(&half) - 0.5).abs() < 1e-8);
        assert_eq!(sys.coefficient_energy(&GridSignal::zeros(g)), 0.0);
    }

    #[test]
    fn onb_frame_operator_is_identity() {
        let g = grid(1e-2, 4.0);
        let sys = box_system(&g);
        let mut rng = SplitMix64::new(11);
        for _ in 0..3 {
            let f = random_probe(&g, -150, 150, &mut rng);
            let sf = sys.frame_operator_apply(&f);
            let err = signal::norm(&sf.sub(&f).unwrap());
            assert!(err <= 1e-8 * signal::norm(&f), "err = {err}");
        }
    }

    #[test]
    fn scaled_window_scales_operator_quadratically() {
        let g = grid(1e-2, 4.0);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        let sys = GaborSystem::new(boxcar(&g, 0.0, 1.0).scale(Complex64::new(2.0, 0.0)), lat);
        let mut rng = SplitMix64::new(12);
        let f = random_probe(&g, -100, 100, &mut rng);
        let sf = sys.frame_operator_apply(&f);
        let err = signal::norm(&sf.sub(&f.scale(Complex64::new(4.0, 0.0))).unwrap());
        assert!(err <= 1e-8 * signal::norm(&f), "err = {err}");
    }

    #[test]
    fn quadratic_form_equals_energy() {
        let g = grid(1e-2, 4.0);
        let lat = LatticeSpec::new(1.0, 0.5, &g).unwrap();
        let w = make_window(&WindowKind::Gaussian { sigma: 1.0 }, &g, true).unwrap();
        let sys = GaborSystem::new(w, lat);
        let mut rng = SplitMix64::new(13);
        let f = random_probe(&g, -100, 100, &mut rng);
        let qf = quadratic_form(&sys, &f);
        let energy = sys.coefficient_energy(&f);
        assert!((qf - energy).abs() <= 1e-8 * energy, "{qf} vs {energy}");
    }

    #[test]
    fn frame_operator_is_self_adjoint() {
        let g = grid(1e-2, 4.0);
        let lat = LatticeSpec::new(1.0, 0.5, &g).unwrap();
        let w = make_window(&WindowKind::Gaussian { sigma: 1.0 }, &g, true).unwrap();
        let sys = GaborSystem::new(w, lat);
        let mut rng = SplitMix64::new(14);
        for _ in 0..3 {
            let f = random_probe(&g, -100, 100, &mut rng);
            let h = random_probe(&g, -100, 100, &mut rng);
            let lhs = inner_product(&sys.frame_operator_apply(&f), &h).unwrap();
            let rhs = inner_product(&f, &sys.frame_operator_apply(&h)).unwrap();
            let bound = 1e-8 * signal::norm(&f) * signal::norm(&h);
            assert!((lhs - rhs).norm_sqr() < bound * bound, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn onb_bounds_are_unity() {
        let g = grid(1e-2, 4.0);
        let sys = box_system(&g);
        let report = sys.frame_bounds_estimate(5, 42);
        assert!((report.a_est - 1.0).abs() < 1e-6, "a = {}", report.a_est);
        assert!((report.b_est - 1.0).abs() < 1e-6, "b = {}", report.b_est);
    }

    #[test]
    fn scaled_box_bounds_are_four() {
        let g = grid(1e-2, 4.0);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        let sys = GaborSystem::new(boxcar(&g, 0.0, 1.0).scale(Complex64::new(2.0, 0.0)), lat);
        let report = sys.frame_bounds_estimate(5, 42);
        assert!((report.a_est - 4.0).abs() < 1e-6);
        assert!((report.b_est - 4.0).abs() < 1e-6);
    }

    #[test]
    fn dense_bounds_match_rayleigh_on_small_gaussian_grid() {
        let g = grid(0.05, 2.0);
        let lat = LatticeSpec::new(1.0, 0.5, &g).unwrap();
        let w = make_window(&WindowKind::Gaussian { sigma: 1.0 }, &g, true).unwrap();
        let sys = GaborSystem::new(w, lat);
        let dense = sys.frame_bounds_dense(42).unwrap();
        let rayleigh = sys.frame_bounds_estimate(12, 42);
        assert!(dense.a_est > 0.0);
        assert!(
            (dense.b_est - rayleigh.b_est).abs() <= 0.02 * dense.b_est,
            "dense {} vs rayleigh {}",
            dense.b_est,
            rayleigh.b_est
        );
        assert!(
            (dense.a_est - rayleigh.a_est).abs() <= 0.02 * dense.a_est,
            "dense {} vs rayleigh {}",
            dense.a_est,
            rayleigh.a_est
        );
        // Rayleigh quotients are inner estimates.
        assert!(rayleigh.a_est >= dense.a_est - 1e-9);
        assert!(rayleigh.b_est <= dense.b_est + 1e-9);
    }

    #[test]
    fn dense_mode_rejects_large_grids() {
        let g = grid(1e-3, 4.0);
        let sys = box_system(&g);
        assert!(matches!(
            sys.frame_bounds_dense(1),
            Err(GaborError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn cg_inverts_identity_and_scaled_systems() {
        let g = grid(1e-2, 4.0);
        let mut rng = SplitMix64::new(21);
        let f = random_probe(&g, -100, 100, &mut rng);

        let sys = box_system(&g);
        let h = sys.inverse_frame_apply(&f, 1e-8).unwrap();
        assert!(signal::norm(&h.sub(&f).unwrap()) <= 1e-7 * signal::norm(&f));

        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        let scaled = GaborSystem::new(boxcar(&g, 0.0, 1.0).scale(Complex64::new(2.0, 0.0)), lat);
        let h = scaled.inverse_frame_apply(&f, 1e-8).unwrap();
        let quarter = f.scale(Complex64::new(0.25, 0.0));
        assert!(signal::norm(&h.sub(&quarter).unwrap()) <= 1e-7 * signal::norm(&f));
    }

    #[test]
    fn cg_rejects_non_invertible_system() {
        let g = grid(0.05, 2.0);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        let sys = GaborSystem::new(GridSignal::zeros(g), lat);
        let mut rng = SplitMix64::new(23);
        let f = random_probe(&g, -10, 10, &mut rng);
        assert!(matches!(
            sys.inverse_frame_apply(&f, 1e-6),
            Err(GaborError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn cg_reconstructs_through_gaussian_frame() {
        let g = grid(0.05, 2.0);
        let lat = LatticeSpec::new(1.0, 0.5, &g).unwrap();
        let w = make_window(&WindowKind::Gaussian { sigma: 1.0 }, &g, true).unwrap();
        let sys = GaborSystem::new(w, lat);
        let mut rng = SplitMix64::new(22);
        let f = random_probe(&g, -20, 20, &mut rng);
        let h = sys.inverse_frame_apply(&f, 1e-6).unwrap();
        let res = signal::norm(&sys.frame_operator_apply(&h).sub(&f).unwrap());
        assert!(res <= 1e-6 * signal::norm(&f), "residual {res}");
    }
}
