//! Suite-level stability: the canonical battery's verdicts do not move when
//! the tolerance tightens and the grid refines.

use whfi_core::signal::GridSpec;
use whfi_core::verify::{scenario_suite, Verdict, VerifyConfig};

fn run(delta: f64, tol: f64) -> Vec<(String, Verdict, bool)> {
    let cfg = VerifyConfig {
        grid: GridSpec::symmetric(delta, 4.0).unwrap(),
        k_max: 4,
        subset_trials: 20,
        seed: 42,
    };
    scenario_suite(&cfg, tol)
        .into_iter()
        .map(|r| (r.scenario, r.verdict, r.expected_met))
        .collect()
}

#[test]
fn verdicts_stable_under_refinement_and_tighter_tolerance() {
    let base = run(1e-2, 1e-6);
    assert!(base.iter().all(|(_, _, met)| *met), "{base:?}");
    let refined = run(5e-3, 1e-7);
    assert_eq!(base, refined, "verdicts moved under refinement");
}
