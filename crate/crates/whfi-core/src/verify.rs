//! Scenario engine: instantiates the identity's hypothesis regimes as
//! pass/fail experiments, including the divergence probes for the converse
//! directions.
//!
//! Verdicts never claim the abstract theorem, only the instance: a pass means
//! the measured quantities are consistent with the claimed regime at this
//! grid and truncation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::correlation::CorrelationTable;
use crate::gabor::GaborSystem;
use crate::lattice::{LatticeError, LatticeSpec};
use crate::math;
use crate::signal::{make_window, GridError, GridSignal, GridSpec, WindowKind};
use crate::walnut::{
    convergence_diagnostics, identity_rhs, ConvergenceReport, IdentityRhs, PartialSumSpec,
    WalnutError,
};
use num_complex::Complex64;

/// Growth-law slack for divergence probes: measured growth must match the
/// analytic rate within this relative margin at every level.
pub const DIVERGENCE_RATE_RTOL: f64 = 0.2;
/// Relative floor in the gap denominator.
pub const GAP_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyError {
    /// Scenario declaration contradicts its hypothesis class.
    InconsistentScenario { reason: String },
    Grid(GridError),
    Lattice(LatticeError),
    Walnut(WalnutError),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::InconsistentScenario { reason } => {
                write!(f, "inconsistent scenario: {reason}")
            }
            VerifyError::Grid(e) => write!(f, "{e}"),
            VerifyError::Lattice(e) => write!(f, "{e}"),
            VerifyError::Walnut(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for VerifyError {}

impl From<GridError> for VerifyError {
    fn from(e: GridError) -> Self {
        VerifyError::Grid(e)
    }
}

impl From<LatticeError> for VerifyError {
    fn from(e: LatticeError) -> Self {
        VerifyError::Lattice(e)
    }
}

impl From<WalnutError> for VerifyError {
    fn from(e: WalnutError) -> Self {
        VerifyError::Walnut(e)
    }
}

/// Hypothesis regime a scenario claims to sit in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum HypothesisClass {
    /// f bounded and compactly supported, g square-integrable.
    Bcf,
    /// f compactly supported (possibly unbounded), G₀ bounded.
    Cf,
    /// Window satisfies the CC condition.
    Cc,
    /// Window not square-integrable in the limit; F₁ must blow up.
    FailureBcf,
    /// G₀ unbounded; F₁ must blow up under signal refinement.
    FailureCf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Expected {
    IdentityHolds,
    Diverges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Pass,
    Fail,
    DivergesAsExpected,
    Error,
}

/// One experiment: a window, a lattice, a signal, and the regime they claim.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub window: WindowKind,
    pub window_scale: f64,
    pub a: f64,
    pub b: f64,
    pub signal: WindowKind,
    pub signal_scale: f64,
    pub class: HypothesisClass,
    pub expected: Expected,
}

fn is_bounded(kind: &WindowKind) -> bool {
    !matches!(kind, WindowKind::PowerCusp { .. })
}

impl Scenario {
    /// Validate the declared class against structural window/signal flags.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        window: WindowKind,
        window_scale: f64,
        a: f64,
        b: f64,
        signal: WindowKind,
        signal_scale: f64,
        class: HypothesisClass,
        expected: Expected,
    ) -> Result<Self, VerifyError> {
        let inconsistent = |reason: &str| -> VerifyError {
            VerifyError::InconsistentScenario {
                reason: String::from(reason),
            }
        };
        match class {
            HypothesisClass::Bcf => {
                if !is_bounded(&signal) {
                    return Err(inconsistent("bcf requires a bounded signal"));
                }
                if expected != Expected::IdentityHolds {
                    return Err(inconsistent("bcf scenarios expect the identity to hold"));
                }
            }
            HypothesisClass::Cf => {
                if !is_bounded(&window) {
                    return Err(inconsistent("cf requires a window with bounded G_0"));
                }
                if expected != Expected::IdentityHolds {
                    return Err(inconsistent("cf scenarios expect the identity to hold"));
                }
            }
            HypothesisClass::Cc => {
                if !is_bounded(&window) {
                    return Err(inconsistent("cc requires an amalgam-class window"));
                }
                if expected != Expected::IdentityHolds {
                    return Err(inconsistent("cc scenarios expect the identity to hold"));
                }
            }
            HypothesisClass::FailureBcf => {
                if expected != Expected::Diverges {
                    return Err(inconsistent("failure_bcf scenarios expect divergence"));
                }
                if !matches!(window, WindowKind::Box { .. }) {
                    return Err(inconsistent(
                        "failure_bcf probes widen a box window; declare a box base",
                    ));
                }
            }
            HypothesisClass::FailureCf => {
                if expected != Expected::Diverges {
                    return Err(inconsistent("failure_cf scenarios expect divergence"));
                }
                if !matches!(window, WindowKind::PowerCusp { .. })
                    || !matches!(signal, WindowKind::PowerCusp { .. })
                {
                    return Err(inconsistent(
                        "failure_cf probes need power-cusp window and signal",
                    ));
                }
            }
        }
        Ok(Self {
            name: String::from(name),
            window,
            window_scale,
            a,
            b,
            signal,
            signal_scale,
            class,
            expected,
        })
    }
}

/// Grid, truncation, and seeding the verifier runs under.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VerifyConfig {
    pub grid: GridSpec,
    pub k_max: i64,
    pub subset_trials: u32,
    pub seed: u64,
}

/// One point of a divergence refinement trace.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RefinementPoint {
    /// Level parameter: the truncation half-width T, or the cusp cutoff δ.
    pub level: f64,
    /// The diagonal term F₁ measured at that level.
    pub f1: f64,
}

/// Outcome of one scenario run.
///
/// Identity verifications fill `lhs`/`rhs`/`relative_gap`/`convergence`;
/// divergence probes fill `refinement_trace` instead.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VerdictReport {
    pub scenario: String,
    pub class: HypothesisClass,
    pub expected: Expected,
    pub lhs: Option<f64>,
    pub rhs: Option<IdentityRhs>,
    pub relative_gap: Option<f64>,
    pub convergence: Option<ConvergenceReport>,
    pub verdict: Verdict,
    pub expected_met: bool,
    pub refinement_trace: Option<Vec<RefinementPoint>>,
    pub error: Option<String>,
}

fn relative_gap(lhs: f64, total: f64) -> f64 {
    math::abs(lhs - total) / lhs.max(GAP_FLOOR)
}

fn build_signal(
    kind: &WindowKind,
    scale: f64,
    grid: &GridSpec,
    require_l2: bool,
) -> Result<GridSignal, GridError> {
    let sig = make_window(kind, grid, require_l2)?;
    Ok(if scale == 1.0 {
        sig
    } else {
        sig.scale(Complex64::new(scale, 0.0))
    })
}

/// Verify the identity for one scenario: LHS through the Gabor system, RHS
/// through the Walnut series, plus convergence diagnostics. Pass requires
/// the relative gap under `tol` and the unconditional-convergence flag for
/// the hypothesis class.
pub fn verify_identity(
    scenario: &Scenario,
    cfg: &VerifyConfig,
    tol: f64,
) -> Result<VerdictReport, VerifyError> {
    let grid = cfg.grid;
    let window = build_signal(&scenario.window, scenario.window_scale, &grid, true)?;
    let signal = build_signal(&scenario.signal, scenario.signal_scale, &grid, false)?;
    let lattice = LatticeSpec::new(scenario.a, scenario.b, &grid)?;
    let table = CorrelationTable::build(&window, lattice, cfg.k_max);
    let system = GaborSystem::new(window, lattice);

    let lhs = system.coefficient_energy(&signal);
    let rhs = identity_rhs(&table, &signal, &PartialSumSpec::symmetric(cfg.k_max))?;
    let convergence =
        convergence_diagnostics(&table, &signal, cfg.k_max, cfg.subset_trials, cfg.seed)?;
    let gap = relative_gap(lhs, rhs.total);
    // bcf/cf: the k-sum is finite, so unconditionality over the finitely many
    // nonzero k is the required flag; cc: same flag, now carrying the
    // CC-window claim.
    let flag_ok = convergence.verdicts.unconditional_converges;
    let verdict = if gap <= tol && flag_ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerdictReport {
        scenario: scenario.name.clone(),
        class: scenario.class,
        expected: scenario.expected,
        lhs: Some(lhs),
        rhs: Some(rhs),
        relative_gap: Some(gap),
        convergence: Some(convergence),
        expected_met: expected_met(scenario.expected, verdict),
        verdict,
        refinement_trace: None,
        error: None,
    })
}

fn expected_met(expected: Expected, verdict: Verdict) -> bool {
    matches!(
        (expected, verdict),
        (Expected::IdentityHolds, Verdict::Pass) | (Expected::Diverges, Verdict::DivergesAsExpected)
    )
}

/// F₁ for a window/signal pair on a probe grid; the k ≠ 0 terms play no role
/// in the divergence laws, so only `G₀` is consulted.
fn f1_on(
    window: &GridSignal,
    signal: &GridSignal,
    a: f64,
    b: f64,
    grid: &GridSpec,
) -> Result<f64, VerifyError> {
    let lattice = LatticeSpec::new(a, b, grid)?;
    let table = CorrelationTable::build(window, lattice, 0);
    let rhs = identity_rhs(&table, signal, &PartialSumSpec::symmetric(0))?;
    Ok(rhs.f1)
}

/// Drive F₁ across an increasing family and match its growth against the
/// analytic law for the failure class.
///
/// * `failure_bcf`: window truncations `χ_[-T,T]` with T doubling from 4;
///   F₁ grows linearly, so consecutive levels must double within 20%.
/// * `failure_cf`: signals `power_cusp(α, δ, 1)` with δ halving from 2⁻³
///   against the cusp window; F₁ grows like `ln(1/δ)`, so each level must
///   add `ln 2` within 20%.
///
/// Any other class runs the bcf family with its own (compact) window, which
/// yields a flat trace and a `Fail` verdict — the non-divergent control.
pub fn divergence_probe(scenario: &Scenario, levels: u32) -> Result<VerdictReport, VerifyError> {
    assert!(levels >= 2, "need at least two levels to measure growth");
    let mut trace = Vec::new();
    match scenario.class {
        HypothesisClass::FailureCf => {
            let (alpha, d) = match scenario.signal {
                WindowKind::PowerCusp { alpha, d, .. } => (alpha, d),
                _ => unreachable!("checked at construction"),
            };
            // 2^-12 resolves every cutoff level exactly.
            let grid = GridSpec::symmetric(1.0 / 4096.0, 2.0)?;
            let window = build_signal(&scenario.window, scenario.window_scale, &grid, false)?;
            for j in 0..levels {
                let cutoff = math::pow(2.0, -(3.0 + j as f64));
                let signal = build_signal(
                    &WindowKind::PowerCusp {
                        alpha,
                        c: cutoff,
                        d,
                    },
                    scenario.signal_scale,
                    &grid,
                    false,
                )?;
                trace.push(RefinementPoint {
                    level: cutoff,
                    f1: f1_on(&window, &signal, scenario.a, scenario.b, &grid)?,
                });
            }
        }
        _ => {
            for j in 0..levels {
                let t_half = 4.0 * math::pow(2.0, j as f64);
                let grid = GridSpec::symmetric(1e-2, t_half + 2.0)?;
                let window = match scenario.class {
                    HypothesisClass::FailureBcf => build_signal(
                        &WindowKind::Box {
                            c: -t_half,
                            d: t_half,
                        },
                        scenario.window_scale,
                        &grid,
                        false,
                    )?,
                    _ => build_signal(&scenario.window, scenario.window_scale, &grid, false)?,
                };
                let signal = build_signal(&scenario.signal, scenario.signal_scale, &grid, false)?;
                trace.push(RefinementPoint {
                    level: t_half,
                    f1: f1_on(&window, &signal, scenario.a, scenario.b, &grid)?,
                });
            }
        }
    }

    let diverges = match scenario.class {
        HypothesisClass::FailureCf => trace.windows(2).all(|w| {
            let increment = w[1].f1 - w[0].f1;
            math::abs(increment - core::f64::consts::LN_2)
                <= DIVERGENCE_RATE_RTOL * core::f64::consts::LN_2
        }),
        _ => trace.windows(2).all(|w| {
            w[0].f1 > 0.0 && {
                let ratio = w[1].f1 / w[0].f1;
                math::abs(ratio - 2.0) <= DIVERGENCE_RATE_RTOL * 2.0
            }
        }),
    };
    let verdict = if diverges {
        Verdict::DivergesAsExpected
    } else {
        Verdict::Fail
    };
    Ok(VerdictReport {
        scenario: scenario.name.clone(),
        class: scenario.class,
        expected: scenario.expected,
        lhs: None,
        rhs: None,
        relative_gap: None,
        convergence: None,
        expected_met: expected_met(scenario.expected, verdict),
        verdict,
        refinement_trace: Some(trace),
        error: None,
    })
}

/// The curated battery: one scenario per hypothesis regime.
pub fn canonical_scenarios() -> Vec<Scenario> {
    let mk = |name: &str,
              window: WindowKind,
              window_scale: f64,
              a: f64,
              b: f64,
              signal: WindowKind,
              class: HypothesisClass,
              expected: Expected| {
        Scenario::new(name, window, window_scale, a, b, signal, 1.0, class, expected)
            .expect("canonical scenarios are consistent")
    };
    alloc::vec![
        mk(
            "box_onb",
            WindowKind::Box { c: 0.0, d: 1.0 },
            1.0,
            1.0,
            1.0,
            WindowKind::Box { c: 0.0, d: 1.0 },
            HypothesisClass::Bcf,
            Expected::IdentityHolds,
        ),
        mk(
            "scaled_box",
            WindowKind::Box { c: 0.0, d: 1.0 },
            2.0,
            1.0,
            1.0,
            WindowKind::Box { c: 0.0, d: 1.0 },
            HypothesisClass::Bcf,
            Expected::IdentityHolds,
        ),
        mk(
            "half_overlap_box",
            WindowKind::Box { c: 0.0, d: 1.0 },
            1.0,
            0.5,
            1.0,
            WindowKind::Box { c: 0.0, d: 1.0 },
            HypothesisClass::Bcf,
            Expected::IdentityHolds,
        ),
        mk(
            "triangle",
            WindowKind::Triangle { c: 0.0, d: 2.0 },
            1.0,
            1.0,
            1.0,
            WindowKind::Box { c: 0.0, d: 1.0 },
            HypothesisClass::Bcf,
            Expected::IdentityHolds,
        ),
        mk(
            "gaussian_frame",
            WindowKind::Gaussian { sigma: 1.0 },
            1.0,
            1.0,
            0.5,
            WindowKind::Gaussian { sigma: 2.0 },
            HypothesisClass::Cc,
            Expected::IdentityHolds,
        ),
        mk(
            "power_cusp_cf",
            WindowKind::Box { c: 0.0, d: 1.0 },
            1.0,
            1.0,
            1.0,
            WindowKind::PowerCusp {
                alpha: 0.25,
                c: 0.0,
                d: 1.0,
            },
            HypothesisClass::Cf,
            Expected::IdentityHolds,
        ),
        mk(
            "failure_bcf",
            WindowKind::Box { c: -4.0, d: 4.0 },
            1.0,
            1.0,
            1.0,
            WindowKind::Box { c: 0.0, d: 1.0 },
            HypothesisClass::FailureBcf,
            Expected::Diverges,
        ),
        mk(
            "failure_cf",
            WindowKind::PowerCusp {
                alpha: 0.25,
                c: 0.0,
                d: 1.0,
            },
            1.0,
            1.0,
            1.0,
            WindowKind::PowerCusp {
                alpha: 0.25,
                c: 0.0,
                d: 1.0,
            },
            HypothesisClass::FailureCf,
            Expected::Diverges,
        ),
    ]
}

/// Run every canonical scenario; per-scenario errors land in the report
/// instead of aborting the suite.
pub fn scenario_suite(cfg: &VerifyConfig, tol: f64) -> Vec<VerdictReport> {
    run_scenarios(&canonical_scenarios(), cfg, tol)
}

/// Run an explicit scenario list (empty list, empty report).
pub fn run_scenarios(
    scenarios: &[Scenario],
    cfg: &VerifyConfig,
    tol: f64,
) -> Vec<VerdictReport> {
    scenarios
        .iter()
        .map(|scenario| {
            let result = match scenario.class {
                HypothesisClass::FailureBcf => divergence_probe(scenario, 4),
                HypothesisClass::FailureCf => divergence_probe(scenario, 6),
                _ => verify_identity(scenario, cfg, tol),
            };
            result.unwrap_or_else(|e| VerdictReport {
                scenario: scenario.name.clone(),
                class: scenario.class,
                expected: scenario.expected,
                lhs: None,
                rhs: None,
                relative_gap: None,
                convergence: None,
                verdict: Verdict::Error,
                expected_met: false,
                refinement_trace: None,
                error: Some(format!("{e}")),
            })
        })
        .collect()
}
