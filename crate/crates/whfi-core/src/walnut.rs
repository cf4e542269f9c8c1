//! The Walnut series `S f = b⁻¹ Σ_k (T_{k/b} f) · G_k` and its convergence
//! anatomy: partial-sum operators, the identity right-hand side, operator
//! norm estimates, and symmetric / rectangular / unconditional diagnostics.
//!
//! The `b⁻¹` factor is carried by every partial sum here so the partial
//! operators converge to the frame operator without rescaling.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::correlation::{CorrelationTable, PeriodicFn};
use crate::math;
use crate::rng::{random_probe, SplitMix64};
use crate::signal::{inner_product, norm_sq, GridSignal};
use crate::sum::{Kahan, KahanBuffer};

/// Verdict thresholds (relative to `‖f‖`), fixed so reports are reproducible.
pub const SYMMETRIC_VERDICT_RTOL: f64 = 1e-5;
pub const RECTANGULAR_VERDICT_RTOL: f64 = 1e-5;
/// Subset deviations may exceed the symmetric tail by at most this factor.
pub const UNCONDITIONAL_TAIL_FACTOR: f64 = 10.0;
/// Relative floor under which distances count as converged-to-zero.
pub const VERDICT_FLOOR: f64 = 1e-12;

/// Exhaustive subset window `|k| ≤ CORE_K`; fringe indices beyond it are
/// toggled exhaustively / at random by the unconditionality surrogate.
pub const CORE_K: i64 = 4;

const DIAG_NORM_ITERS: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum WalnutError {
    /// Partial-sum index beyond table coverage without a zero-tail
    /// certificate.
    SpecExceedsTable { k: i64, k_max: i64 },
    /// `walnut_full_apply` cannot certify the requested tolerance at the
    /// table's `k_max`.
    CertificateUnattainable { bound: f64, tol: f64 },
    /// Explicit subset contains a duplicate index.
    DuplicateSubsetIndex { k: i64 },
    /// Diagnostics window exceeds the table's coverage.
    MaxKExceedsTable { max_k: i64, k_max: i64 },
}

impl fmt::Display for WalnutError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WalnutError::SpecExceedsTable { k, k_max } => {
                write!(f, "partial sum needs G_{k} but table covers |k| <= {k_max} with nonzero tail")
            }
            WalnutError::CertificateUnattainable { bound, tol } => {
                write!(f, "remainder bound {bound} exceeds tolerance {tol}; increase k_max")
            }
            WalnutError::DuplicateSubsetIndex { k } => {
                write!(f, "subset contains duplicate index {k}")
            }
            WalnutError::MaxKExceedsTable { max_k, k_max } => {
                write!(f, "diagnostics window {max_k} exceeds table k_max {k_max}")
            }
        }
    }
}

impl core::error::Error for WalnutError {}

/// Which finite k-set a Walnut partial sum runs over.
///
/// `Symmetric(K)` is `S_K`: k from `-K` to `K`. `Rectangular { k_pos, k_neg }`
/// is `S_{K,L}`: k from `-L` to `K`. `Subset` is `S_M` for an explicit finite
/// set, enumerated in the order given.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "snake_case"))]
pub enum PartialSumSpec {
    Symmetric { k: i64 },
    Rectangular { k_pos: i64, k_neg: i64 },
    Subset { ks: Vec<i64> },
}

impl PartialSumSpec {
    pub fn symmetric(k: i64) -> Self {
        assert!(k >= 0);
        PartialSumSpec::Symmetric { k }
    }

    pub fn rectangular(k_pos: i64, k_neg: i64) -> Self {
        assert!(k_pos >= 0 && k_neg >= 0);
        PartialSumSpec::Rectangular { k_pos, k_neg }
    }

    /// Explicit finite index set; duplicates are rejected.
    pub fn subset(ks: Vec<i64>) -> Result<Self, WalnutError> {
        for (i, k) in ks.iter().enumerate() {
            if ks[..i].contains(k) {
                return Err(WalnutError::DuplicateSubsetIndex { k: *k });
            }
        }
        Ok(PartialSumSpec::Subset { ks })
    }

    /// The k-indices in their fixed enumeration order.
    pub fn indices(&self) -> Vec<i64> {
        match self {
            PartialSumSpec::Symmetric { k } => (-k..=*k).collect(),
            PartialSumSpec::Rectangular { k_pos, k_neg } => (-k_neg..=*k_pos).collect(),
            PartialSumSpec::Subset { ks } => ks.clone(),
        }
    }
}

fn term_source(table: &CorrelationTable, k: i64) -> Result<Option<&PeriodicFn>, WalnutError> {
    if k.abs() <= table.k_max() {
        Ok(Some(table.g_k(k).expect("within coverage")))
    } else if table.tail_bound() == 0.0 {
        // Beyond coverage but the tail certificate is exactly zero, so G_k ≡ 0.
        Ok(None)
    } else {
        Err(WalnutError::SpecExceedsTable {
            k,
            k_max: table.k_max(),
        })
    }
}

/// `b⁻¹ Σ_{k ∈ spec} (T_{k/b} f) · G_k`, with `G_k` extended a-periodically
/// by exact index wrap-around.
pub fn walnut_partial_apply(
    table: &CorrelationTable,
    f: &GridSignal,
    spec: &PartialSumSpec,
) -> Result<GridSignal, WalnutError> {
    let grid = *table.grid();
    debug_assert_eq!(&grid, f.grid());
    let inv_b = table.lattice().inv_b();
    let b_steps = table.lattice().inv_b_steps();
    let mut out = KahanBuffer::zeros(grid.len());
    let f_support = f.support_or_scan();
    for k in spec.indices() {
        let Some(gk) = term_source(table, k)? else { continue };
        let Some((f_lo, f_hi)) = f_support else { continue };
        let shift = k * b_steps;
        let lo = (f_lo + shift).max(grid.i_min);
        let hi = (f_hi + shift).min(grid.i_max);
        for i in lo..=hi {
            let v = f.at(i - shift) * gk.at_index(i) * inv_b;
            out.add((i - grid.i_min) as usize, v);
        }
    }
    Ok(GridSignal::from_samples(grid, out.into_samples()).expect("buffer sized to grid"))
}

/// Adjoint of [`walnut_partial_apply`]:
/// `b⁻¹ Σ_{k ∈ spec} T_{-k/b}(conj(G_k) · f)`.
pub fn walnut_partial_adjoint_apply(
    table: &CorrelationTable,
    f: &GridSignal,
    spec: &PartialSumSpec,
) -> Result<GridSignal, WalnutError> {
    let grid = *table.grid();
    let inv_b = table.lattice().inv_b();
    let b_steps = table.lattice().inv_b_steps();
    let mut out = KahanBuffer::zeros(grid.len());
    let f_support = f.support_or_scan();
    for k in spec.indices() {
        let Some(gk) = term_source(table, k)? else { continue };
        let Some((f_lo, f_hi)) = f_support else { continue };
        let shift = k * b_steps;
        let lo = (f_lo - shift).max(grid.i_min);
        let hi = (f_hi - shift).min(grid.i_max);
        for i in lo..=hi {
            let v = f.at(i + shift) * gk.at_index(i + shift).conj() * inv_b;
            out.add((i - grid.i_min) as usize, v);
        }
    }
    Ok(GridSignal::from_samples(grid, out.into_samples()).expect("buffer sized to grid"))
}

/// Full Walnut representation: the symmetric sum over the whole table, valid
/// only when the tail certificate stays under `tol` in operator norm.
pub fn walnut_full_apply(
    table: &CorrelationTable,
    f: &GridSignal,
    tol: f64,
) -> Result<GridSignal, WalnutError> {
    let bound = table.tail_bound() * table.lattice().inv_b();
    if bound > tol {
        return Err(WalnutError::CertificateUnattainable { bound, tol });
    }
    walnut_partial_apply(table, f, &PartialSumSpec::symmetric(table.k_max()))
}

/// One per-k term of the identity right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PerKTerm {
    pub k: i64,
    pub re: f64,
    pub im: f64,
}

impl PerKTerm {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// The identity's right-hand side `b⁻¹ Σ_k ∫ conj(f(t)) f(t-k/b) G_k(t) dt`,
/// split into the diagonal part `F₁` and the off-diagonal part `F₂` taken in
/// the `2·Re` form over `k ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IdentityRhs {
    pub f1: f64,
    pub f2: f64,
    pub per_k_terms: Vec<PerKTerm>,
    pub total: f64,
    pub convergence_mode_used: PartialSumSpec,
}

/// Evaluate the right-hand side over the schedule's index set.
///
/// Each term is `b⁻¹ ⟨(T_{k/b} f) · G_k, f⟩`; terms at `±k` are complex
/// conjugates, so `total = F₁ + F₂` is real to machine precision.
pub fn identity_rhs(
    table: &CorrelationTable,
    f: &GridSignal,
    schedule: &PartialSumSpec,
) -> Result<IdentityRhs, WalnutError> {
    let grid = *table.grid();
    let inv_b = table.lattice().inv_b();
    let b_steps = table.lattice().inv_b_steps();
    let delta = grid.delta;
    let f_support = f.support_or_scan();
    let mut per_k_terms = Vec::new();
    let mut f1 = 0.0f64;
    let mut f2 = Kahan::new();
    for k in schedule.indices() {
        let term = match (term_source(table, k)?, f_support) {
            (Some(gk), Some((f_lo, f_hi))) => {
                let shift = k * b_steps;
                // Integrand support: both f(t) and f(t - k/b) nonzero.
                let lo = f_lo.max(f_lo + shift).max(grid.i_min);
                let hi = f_hi.min(f_hi + shift).min(grid.i_max);
                let mut acc = crate::sum::KahanComplex::new();
                for i in lo..=hi {
                    acc.add(f.at(i - shift) * gk.at_index(i) * f.at(i).conj());
                }
                acc.total() * delta * inv_b
            }
            _ => Complex64::ZERO,
        };
        per_k_terms.push(PerKTerm {
            k,
            re: term.re,
            im: term.im,
        });
        if k == 0 {
            f1 = term.re;
        } else if k >= 1 {
            f2.add(2.0 * term.re);
        }
    }
    let f2 = f2.total();
    Ok(IdentityRhs {
        f1,
        f2,
        per_k_terms,
        total: f1 + f2,
        convergence_mode_used: schedule.clone(),
    })
}

/// Power-iteration estimate of `‖S_spec‖` via the composition with its
/// adjoint. Seeded, deterministic, and an under-estimate of the true norm.
pub fn partial_norm_estimate(
    table: &CorrelationTable,
    spec: &PartialSumSpec,
    iters: u32,
    seed: u64,
) -> Result<f64, WalnutError> {
    assert!(iters >= 1, "at least one iteration required");
    let grid = *table.grid();
    let mut rng = SplitMix64::new(seed);
    let mut v = random_probe(&grid, grid.i_min, grid.i_max, &mut rng);
    let nsq = norm_sq(&v);
    if nsq == 0.0 {
        return Ok(0.0);
    }
    v = v.scale(Complex64::new(1.0 / math::sqrt(nsq), 0.0));
    let mut sigma = 0.0f64;
    for _ in 0..iters {
        let pv = walnut_partial_apply(table, &v, spec)?;
        let pv_sq = norm_sq(&pv);
        if pv_sq == 0.0 {
            return Ok(0.0);
        }
        sigma = math::sqrt(pv_sq);
        let ppv = walnut_partial_adjoint_apply(table, &pv, spec)?;
        let ppv_sq = norm_sq(&ppv);
        if ppv_sq == 0.0 {
            return Ok(sigma);
        }
        v = ppv.scale(Complex64::new(1.0 / math::sqrt(ppv_sq), 0.0));
    }
    Ok(sigma)
}

/// One point of a convergence trace.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TraceEntry {
    pub spec: PartialSumSpec,
    /// `Re ⟨S_spec f, f⟩`.
    pub quadratic_form: f64,
    /// `‖S_spec f - S_full f‖`.
    pub distance_to_full: f64,
    /// Seeded power-iteration estimate of `‖S_spec‖`.
    pub op_norm_est: f64,
}

/// One subset trial of the unconditionality surrogate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SubsetEntry {
    pub ks: Vec<i64>,
    /// `‖S_M f - S_full f‖` for subsets containing the core window.
    pub deviation_from_full: f64,
    /// `‖S_M f‖`, the boundedness trace.
    pub value_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConvergenceVerdicts {
    pub symmetric_converges: bool,
    pub rectangular_converges: bool,
    pub unconditional_converges: bool,
}

/// Measured convergence behaviour of the Walnut series for one signal.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConvergenceReport {
    pub symmetric: Vec<TraceEntry>,
    pub rectangular: Vec<TraceEntry>,
    pub subsets: Vec<SubsetEntry>,
    pub verdicts: ConvergenceVerdicts,
    pub seed: u64,
}

/// Convergence diagnostics for `f` against the full table sum.
///
/// Symmetric trace: `‖S_K f - S_full f‖` for `K = 0..max_k`. Rectangular:
/// the full `(K, L)` grid up to `max_k`. Unconditional surrogate: subsets of
/// `{-max_k..max_k}` that contain the core `|k| ≤ 4` — the fringe toggled
/// exhaustively when small, plus `subset_trials` seeded random draws — must
/// deviate from the full sum by at most 10× the symmetric tail at the core;
/// a run of seeded random enumeration prefixes past core coverage is included
/// in the same pool.
pub fn convergence_diagnostics(
    table: &CorrelationTable,
    f: &GridSignal,
    max_k: i64,
    subset_trials: u32,
    seed: u64,
) -> Result<ConvergenceReport, WalnutError> {
    if max_k > table.k_max() {
        return Err(WalnutError::MaxKExceedsTable {
            max_k,
            k_max: table.k_max(),
        });
    }
    let full = walnut_partial_apply(table, f, &PartialSumSpec::symmetric(table.k_max()))?;
    let f_norm = math::sqrt(norm_sq(f));
    let distance = |sig: &GridSignal| -> f64 {
        math::sqrt(norm_sq(&sig.sub(&full).expect("same grid")))
    };

    let mut symmetric = Vec::new();
    for k in 0..=max_k {
        let spec = PartialSumSpec::symmetric(k);
        let skf = walnut_partial_apply(table, f, &spec)?;
        symmetric.push(TraceEntry {
            quadratic_form: inner_product(&skf, f).expect("same grid").re,
            distance_to_full: distance(&skf),
            op_norm_est: partial_norm_estimate(table, &spec, DIAG_NORM_ITERS, seed)?,
            spec,
        });
    }

    let mut rectangular = Vec::new();
    for k_pos in 0..=max_k {
        for k_neg in 0..=max_k {
            let spec = PartialSumSpec::rectangular(k_pos, k_neg);
            let skl = walnut_partial_apply(table, f, &spec)?;
            rectangular.push(TraceEntry {
                quadratic_form: inner_product(&skl, f).expect("same grid").re,
                distance_to_full: distance(&skl),
                op_norm_est: partial_norm_estimate(table, &spec, DIAG_NORM_ITERS, seed)?,
                spec,
            });
        }
    }

    // Unconditionality surrogate.
    let core_k = CORE_K.min(max_k);
    let core: Vec<i64> = (-core_k..=core_k).collect();
    let fringe: Vec<i64> = (core_k + 1..=max_k)
        .flat_map(|k| [k, -k])
        .collect();
    let mut rng = SplitMix64::new(seed);
    let mut subsets = Vec::new();
    let eval_subset = |ks: Vec<i64>, subsets: &mut Vec<SubsetEntry>| -> Result<(), WalnutError> {
        let spec = PartialSumSpec::Subset { ks: ks.clone() };
        let smf = walnut_partial_apply(table, f, &spec)?;
        subsets.push(SubsetEntry {
            ks,
            deviation_from_full: distance(&smf),
            value_norm: math::sqrt(norm_sq(&smf)),
        });
        Ok(())
    };
    // Exhaustive fringe toggles when the fringe is small enough.
    if fringe.len() <= 8 {
        for mask in 0..(1u32 << fringe.len()) {
            let mut ks = core.clone();
            for (bit, k) in fringe.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    ks.push(*k);
                }
            }
            eval_subset(ks, &mut subsets)?;
        }
    }
    // Seeded random fringe subsets.
    for _ in 0..subset_trials {
        let mut ks = core.clone();
        for k in &fringe {
            if rng.next_bool() {
                ks.push(*k);
            }
        }
        eval_subset(ks, &mut subsets)?;
    }
    // Random enumeration prefixes past core coverage.
    let mut all: Vec<i64> = (-max_k..=max_k).collect();
    for _ in 0..4 {
        // Fisher-Yates with the seeded generator.
        for i in (1..all.len()).rev() {
            let j = rng.next_index(i + 1);
            all.swap(i, j);
        }
        let mut seen_core = 0usize;
        for cut in 0..all.len() {
            if all[cut].abs() <= core_k {
                seen_core += 1;
            }
            if seen_core == core.len() {
                eval_subset(all[..=cut].to_vec(), &mut subsets)?;
                break;
            }
        }
    }

    let floor = VERDICT_FLOOR * f_norm.max(1e-300);
    let symmetric_converges = {
        let final_dist = symmetric.last().map_or(0.0, |e| e.distance_to_full);
        let mut tail_monotone = true;
        // Monotone decrease is demanded only above the noise floor.
        for w in symmetric.windows(2) {
            if w[1].distance_to_full > w[0].distance_to_full.max(floor) {
                tail_monotone = false;
            }
        }
        tail_monotone && final_dist <= SYMMETRIC_VERDICT_RTOL * f_norm
    };
    // Rectangular convergence is a joint limit in (K, L); the verdict reads
    // the shell where both indices are within one of the window, which is
    // the finite surrogate that discriminates (one-sided entries like
    // (max_k, 0) never approach the full sum and stay in the trace only).
    let rectangular_converges = rectangular
        .iter()
        .filter(|e| match &e.spec {
            PartialSumSpec::Rectangular { k_pos, k_neg } => {
                *k_pos.min(k_neg) >= (max_k - 1).max(0)
            }
            _ => false,
        })
        .all(|e| e.distance_to_full <= RECTANGULAR_VERDICT_RTOL * f_norm);
    let sym_tail_at_core = symmetric
        .iter()
        .find(|e| matches!(e.spec, PartialSumSpec::Symmetric { k } if k == core_k))
        .map_or(0.0, |e| e.distance_to_full)
        .max(table.tail_bound() * table.lattice().inv_b() * f_norm)
        .max(floor);
    let unconditional_converges = subsets
        .iter()
        .all(|s| s.deviation_from_full <= UNCONDITIONAL_TAIL_FACTOR * sym_tail_at_core);

    Ok(ConvergenceReport {
        symmetric,
        rectangular,
        subsets,
        verdicts: ConvergenceVerdicts {
            symmetric_converges,
            rectangular_converges,
            unconditional_converges,
        },
        seed,
    })
}

/// Residual of the polarization identity
/// `4⟨T x, y⟩ = ⟨T(x+y), x+y⟩ - ⟨T(x-y), x-y⟩ + i⟨T(x+iy), x+iy⟩ - i⟨T(x-iy), x-iy⟩`
/// for a linear operator on the grid space.
pub fn polarization_check<F: Fn(&GridSignal) -> GridSignal>(
    op: F,
    x: &GridSignal,
    y: &GridSignal,
) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    let form = |z: &GridSignal| -> Complex64 { inner_product(&op(z), z).expect("same grid") };
    let lhs = inner_product(&op(x), y).expect("same grid") * 4.0;
    let xpy = x.add(y).expect("same grid");
    let xmy = x.sub(y).expect("same grid");
    let xpiy = x.add(&y.scale(i)).expect("same grid");
    let xmiy = x.sub(&y.scale(i)).expect("same grid");
    let rhs = form(&xpy) - form(&xmy) + i * form(&xpiy) - i * form(&xmiy);
    math::sqrt((lhs - rhs).norm_sqr())
}

/// Probe-sweep instantiation of the polarization corollary
/// `‖T‖ ≤ 2·sup { |⟨Tf, f⟩| : ‖f‖ ≤ 1 }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryCheck {
    /// `max ‖op v‖ / ‖v‖` over the visited probes — an under-estimate of
    /// `‖op‖`.
    pub norm_est: f64,
    /// `2 · max |⟨op v, v⟩| / ‖v‖²` over the same probes.
    pub bound: f64,
}

/// Sweep seeded random probes and their power-iteration orbits, recording the
/// largest norm quotient and quadratic form seen. For a positive self-adjoint
/// operator the successor of the best norm probe already satisfies
/// `⟨op v', v'⟩ ≥ ‖op v‖/‖v‖` (Cauchy-Schwarz on the spectral weights), so
/// `norm_est ≤ bound` whenever `power_steps ≥ 1`.
pub fn polarization_corollary_check<F: Fn(&GridSignal) -> GridSignal>(
    op: F,
    grid: &crate::signal::GridSpec,
    probes: u32,
    power_steps: u32,
    seed: u64,
) -> CorollaryCheck {
    let mut rng = SplitMix64::new(seed);
    let mut norm_est = 0.0f64;
    let mut q_sup = 0.0f64;
    let mut drawn = 0;
    while drawn < probes {
        let mut v = random_probe(grid, grid.i_min, grid.i_max, &mut rng);
        let nsq = norm_sq(&v);
        if nsq == 0.0 {
            continue;
        }
        drawn += 1;
        v = v.scale(Complex64::new(1.0 / math::sqrt(nsq), 0.0));
        for _ in 0..=power_steps {
            let ov = op(&v);
            let ov_norm = math::sqrt(norm_sq(&ov));
            let q = math::sqrt(inner_product(&ov, &v).expect("same grid").norm_sqr());
            norm_est = norm_est.max(ov_norm);
            q_sup = q_sup.max(q);
            if ov_norm == 0.0 {
                break;
            }
            v = ov.scale(Complex64::new(1.0 / ov_norm, 0.0));
        }
    }
    CorollaryCheck {
        norm_est,
        bound: 2.0 * q_sup,
    }
}

/// The proof-step periodization
/// `H_n(t) = Σ_k f(t - k/b) conj(g(t - na - k/b))`, exactly 1/b-periodic,
/// sampled on `[0, 1/b)`.
pub fn periodized_product(
    f: &GridSignal,
    g: &GridSignal,
    lattice: &crate::lattice::LatticeSpec,
    n: i64,
) -> PeriodicFn {
    let b_steps = lattice.inv_b_steps();
    let na = n * lattice.shift_steps();
    let delta = f.grid().delta;
    let support = f.support_or_scan();
    let samples: Vec<Complex64> = (0..b_steps)
        .map(|r| {
            let Some((f_lo, f_hi)) = support else {
                return Complex64::ZERO;
            };
            // r - k·B ∈ [f_lo, f_hi]  ⇔  k ∈ [(r - f_hi)/B, (r - f_lo)/B]
            let k_lo = -((f_hi - r).div_euclid(b_steps));
            let k_hi = (r - f_lo).div_euclid(b_steps);
            let mut acc = crate::sum::KahanComplex::new();
            for k in k_lo..=k_hi {
                let idx = r - k * b_steps;
                acc.add(f.at(idx) * g.at(idx - na).conj());
            }
            acc.total()
        })
        .collect();
    PeriodicFn::from_parts(delta, samples)
}

/// `b⁻¹ ∫₀^{1/b} |H_n|²` with the same left-endpoint quadrature as the rest
/// of the crate.
pub fn periodized_norm_sq_scaled(h: &PeriodicFn, inv_b: f64) -> f64 {
    let mut acc = Kahan::new();
    for z in h.samples() {
        acc.add(z.norm_sqr());
    }
    acc.total() * h.delta() * inv_b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::signal::{make_window, GridSpec, WindowKind};

    fn grid(delta: f64, span: f64) -> GridSpec {
        GridSpec::symmetric(delta, span).unwrap()
    }

    fn boxcar(g: &GridSpec, c: f64, d: f64) -> GridSignal {
        make_window(&WindowKind::Box { c, d }, g, true).unwrap()
    }

    fn box_table(g: &GridSpec, k_max: i64) -> CorrelationTable {
        let lat = LatticeSpec::new(1.0, 1.0, g).unwrap();
        CorrelationTable::build(&boxcar(g, 0.0, 1.0), lat, k_max)
    }

    #[test]
    fn box_symmetric_zero_is_identity() {
        let g = grid(1e-2, 4.0);
        let table = box_table(&g, 3);
        let f = boxcar(&g, -0.5, 1.5);
        let out = walnut_partial_apply(&table, &f, &PartialSumSpec::symmetric(0)).unwrap();
        for (x, y) in out.samples().iter().zip(f.samples()) {
            assert!((x - y).norm_sqr() < 1e-28);
        }
    }

    #[test]
    fn box_offdiagonal_subset_is_zero() {
        let g = grid(1e-2, 4.0);
        let table = box_table(&g, 3);
        let f = boxcar(&g, 0.0, 1.0);
        let spec = PartialSumSpec::subset(alloc::vec![1, 2]).unwrap();
        let out = walnut_partial_apply(&table, &f, &spec).unwrap();
        assert_eq!(norm_sq(&out), 0.0);
    }

    #[test]
    fn duplicate_subset_rejected() {
        assert!(matches!(
            PartialSumSpec::subset(alloc::vec![0, 1, 0]),
            Err(WalnutError::DuplicateSubsetIndex { k: 0 })
        ));
    }

    #[test]
    fn spec_beyond_table_with_zero_tail_is_certified_zero() {
        let g = grid(1e-2, 4.0);
        let table = box_table(&g, 1);
        assert_eq!(table.tail_bound(), 0.0);
        let f = boxcar(&g, 0.0, 1.0);
        let spec = PartialSumSpec::subset(alloc::vec![0, 3]).unwrap();
        let out = walnut_partial_apply(&table, &f, &spec).unwrap();
        // k = 3 contributes nothing; k = 0 gives back f.
        let err = norm_sq(&out.sub(&f).unwrap());
        assert!(err < 1e-28);
    }

    #[test]
    fn full_apply_box_is_identity() {
        let g = grid(1e-2, 4.0);
        let table = box_table(&g, 3);
        let f = boxcar(&g, -1.0, 0.5);
        let out = walnut_full_apply(&table, &f, 1e-12).unwrap();
        let err = norm_sq(&out.sub(&f).unwrap());
        assert!(err < 1e-28);
    }

    #[test]
    fn rhs_box_indicator_is_parseval() {
        let g = grid(1e-3, 4.0);
        let table = box_table(&g, 4);
        let f = boxcar(&g, 0.0, 1.0);
        let rhs = identity_rhs(&table, &f, &PartialSumSpec::symmetric(4)).unwrap();
        assert!((rhs.f1 - 1.0).abs() < 1e-12, "f1 = {}", rhs.f1);
        assert_eq!(rhs.f2, 0.0);
        assert!((rhs.total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rhs_of_zero_signal_is_zero() {
        let g = grid(1e-2, 4.0);
        let table = box_table(&g, 2);
        let f = GridSignal::zeros(g);
        let rhs = identity_rhs(&table, &f, &PartialSumSpec::symmetric(2)).unwrap();
        assert_eq!(rhs.total, 0.0);
    }

    #[test]
    fn per_k_terms_pair_conjugately() {
        let g = grid(1e-2, 6.0);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        let w = make_window(&WindowKind::Triangle { c: 0.0, d: 2.0 }, &g, true).unwrap();
        let table = CorrelationTable::build(&w, lat, 3);
        let mut rng = SplitMix64::new(5);
        let f = crate::rng::random_smooth_probe(&g, -2.0, 2.0, &mut rng);
        let rhs = identity_rhs(&table, &f, &PartialSumSpec::symmetric(3)).unwrap();
        for term in &rhs.per_k_terms {
            let partner = rhs
                .per_k_terms
                .iter()
                .find(|t| t.k == -term.k)
                .expect("symmetric schedule");
            let resid = (term.value() - partner.value().conj()).norm_sqr();
            assert!(resid < 1e-20, "k = {}: residual² = {resid}", term.k);
        }
        // Two-sided sum equals f1 + 2Re form.
        let mut two_sided = Kahan::new();
        for t in &rhs.per_k_terms {
            two_sided.add(t.re);
        }
        assert!((two_sided.total() - rhs.total).abs() < 1e-10);
    }

    #[test]
    fn adjoint_agrees_with_inner_product_transpose() {
        // ⟨P f, h⟩ = ⟨f, P* h⟩ for the partial-sum operator and its adjoint.
        let g = grid(1e-2, 6.0);
        let lat = LatticeSpec::new(1.0, 0.5, &g).unwrap();
        let w = make_window(&WindowKind::Gaussian { sigma: 1.0 }, &g, true).unwrap();
        let table = CorrelationTable::build(&w, lat, 4);
        let mut rng = SplitMix64::new(77);
        let f = random_probe(&g, -200, 300, &mut rng);
        let h = random_probe(&g, -300, 200, &mut rng);
        for spec in [
            PartialSumSpec::symmetric(3),
            PartialSumSpec::rectangular(2, 4),
            PartialSumSpec::subset(alloc::vec![-3, 0, 2]).unwrap(),
        ] {
            let pf = walnut_partial_apply(&table, &f, &spec).unwrap();
            let pah = walnut_partial_adjoint_apply(&table, &h, &spec).unwrap();
            let lhs = inner_product(&pf, &h).unwrap();
            let rhs = inner_product(&f, &pah).unwrap();
            let scale = math::sqrt(norm_sq(&f) * norm_sq(&h));
            assert!(
                (lhs - rhs).norm_sqr() <= 1e-24 * scale * scale,
                "{spec:?}: ⟨Pf,h⟩ = {lhs} vs ⟨f,P*h⟩ = {rhs}"
            );
        }
    }

    #[test]
    fn box_norm_estimates() {
        let g = grid(1e-2, 4.0);
        let table = box_table(&g, 3);
        let with_zero = partial_norm_estimate(&table, &PartialSumSpec::symmetric(2), 30, 42).unwrap();
        assert!((with_zero - 1.0).abs() < 1e-6, "norm = {with_zero}");
        let spec = PartialSumSpec::subset(alloc::vec![1, 2, 3]).unwrap();
        let without_zero = partial_norm_estimate(&table, &spec, 30, 42).unwrap();
        assert_eq!(without_zero, 0.0);
    }

    #[test]
    fn scaled_box_norm_is_four() {
        let g = grid(1e-2, 4.0);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        let w = boxcar(&g, 0.0, 1.0).scale(Complex64::new(2.0, 0.0));
        let table = CorrelationTable::build(&w, lat, 2);
        for k in 0..=2 {
            let est =
                partial_norm_estimate(&table, &PartialSumSpec::symmetric(k), 30, 42).unwrap();
            assert!((est - 4.0).abs() < 1e-6, "K = {k}: {est}");
        }
    }

    #[test]
    fn box_diagnostics_converge_immediately() {
        let g = grid(1e-2, 4.0);
        let table = box_table(&g, 4);
        let f = boxcar(&g, 0.0, 1.0);
        let report = convergence_diagnostics(&table, &f, 4, 20, 42).unwrap();
        for e in &report.symmetric {
            assert_eq!(e.distance_to_full, 0.0);
        }
        assert!(report.verdicts.symmetric_converges);
        assert!(report.verdicts.rectangular_converges);
        assert!(report.verdicts.unconditional_converges);
    }

    #[test]
    fn diagnostics_window_cannot_exceed_table() {
        let g = grid(1e-2, 4.0);
        let table = box_table(&g, 2);
        let f = boxcar(&g, 0.0, 1.0);
        assert!(matches!(
            convergence_diagnostics(&table, &f, 3, 5, 1),
            Err(WalnutError::MaxKExceedsTable { .. })
        ));
    }

    #[test]
    fn polarization_identity_for_identity_operator() {
        let g = grid(1e-2, 2.0);
        let mut rng = SplitMix64::new(9);
        let x = random_probe(&g, -50, 50, &mut rng);
        let y = random_probe(&g, -50, 50, &mut rng);
        let resid = polarization_check(|z| z.clone(), &x, &y);
        assert!(resid < 1e-10, "residual = {resid}");
    }

    #[test]
    fn polarization_corollary_bounds_diagonal_operator() {
        // Random positive diagonal operator: self-adjoint, ‖op‖ = max entry.
        let g = grid(1e-2, 2.0);
        let mut rng = SplitMix64::new(10);
        let diag_samples: Vec<Complex64> = (0..g.len())
            .map(|_| Complex64::new(math::abs(rng.next_normal()), 0.0))
            .collect();
        let diag = GridSignal::from_samples(g, diag_samples).unwrap();
        let apply = |z: &GridSignal| z.mul_pointwise(&diag).unwrap();
        let check = polarization_corollary_check(apply, &g, 100, 4, 77);
        assert!(
            check.norm_est <= check.bound,
            "corollary violated: norm_est = {}, bound = {}",
            check.norm_est,
            check.bound
        );
        // The estimate is genuinely an under-estimate of the true norm.
        let op_norm = diag
            .samples()
            .iter()
            .map(|z| math::sqrt(z.norm_sqr()))
            .fold(0.0f64, f64::max);
        assert!(check.norm_est <= op_norm * (1.0 + 1e-12));
    }

    #[test]
    fn periodized_product_box_cases() {
        let g = grid(1e-2, 4.0);
        let lat = LatticeSpec::new(1.0, 1.0, &g).unwrap();
        let w = boxcar(&g, 0.0, 1.0);
        let f = boxcar(&g, 0.0, 1.0);
        let h0 = periodized_product(&f, &w, &lat, 0);
        assert_eq!(h0.period_steps(), 100);
        for z in h0.samples() {
            assert_eq!(*z, Complex64::new(1.0, 0.0));
        }
        let h5 = periodized_product(&f, &w, &lat, 5);
        for z in h5.samples() {
            assert_eq!(*z, Complex64::ZERO);
        }
    }
}
