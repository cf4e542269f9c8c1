//! `whfi` — command-line front end for the Weyl-Heisenberg frame identity
//! toolkit.
//!
//! Every command is a pure function of (config, seed): repeated runs produce
//! byte-identical outputs. Exit codes: 0 pass, 1 config error, 2 fail,
//! 3 divergence-expectation mismatch.

// `!(x > 0.0)` guards reject NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use whfi_core::correlation::{cc_report, CCReport, CorrelationTable};
use whfi_core::gabor::{FrameBoundsReport, GaborSystem};
use whfi_core::lattice::LatticeSpec;
use whfi_core::signal::{make_window, GridSignal, WindowKind};
use whfi_core::verify::{
    divergence_probe, scenario_suite, verify_identity, Expected, HypothesisClass, Scenario,
    Verdict, VerdictReport, VerifyConfig,
};
use whfi_core::walnut::convergence_diagnostics;

use config::{resolve, CommonArgs, ConfigError, Resolved};

#[derive(Parser)]
#[command(
    name = "whfi",
    about = "Verify and diagnose the Weyl-Heisenberg frame identity on a sampled grid",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the identity for a window/lattice/signal configuration.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the frame-coefficient grid as CSV (m,n,re,im).
        #[arg(long = "dump-coefficients")]
        dump_coefficients: Option<PathBuf>,
    },
    /// Export the correlation functions G_k as CSV (k,t,re_Gk,im_Gk).
    Gk {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Convergence diagnostics: traces, operator norms, verdict flags.
    Diagnose {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Frame-bound estimation (rayleigh_extremes or dense_eigen).
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// CC-condition report: cc_sup, G0 extrema, epsilon margin.
    Cc {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the canonical scenario battery; exit 0 iff every expectation is met.
    Suite {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify {
            common,
            dump_coefficients,
        } => cmd_verify(&common, dump_coefficients.as_deref()),
        Command::Gk { common } => cmd_gk(&common),
        Command::Diagnose { common } => cmd_diagnose(&common),
        Command::Bounds { common } => cmd_bounds(&common),
        Command::Cc { common } => cmd_cc(&common),
        Command::Suite { common } => cmd_suite(&common),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), ConfigError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| ConfigError(format!("out: cannot write {path:?}: {e}"))),
        None => {
            use std::io::Write;
            // A closed pipe (e.g. piping into `head`) is not an error.
            match std::io::stdout().write_all(content.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(ConfigError(format!("out: cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

/// Side-file path: `<stem>_<suffix>.csv` next to the main output.
fn side_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn parse_class(
    name: &str,
    window: &WindowKind,
    signal: &WindowKind,
) -> Result<HypothesisClass, ConfigError> {
    let cusp = |k: &WindowKind| matches!(k, WindowKind::PowerCusp { .. });
    match name {
        "bcf" => Ok(HypothesisClass::Bcf),
        "cf" => Ok(HypothesisClass::Cf),
        "cc" => Ok(HypothesisClass::Cc),
        "failure_bcf" => Ok(HypothesisClass::FailureBcf),
        "failure_cf" => Ok(HypothesisClass::FailureCf),
        "auto" => match (cusp(window), cusp(signal)) {
            (true, true) => Ok(HypothesisClass::FailureCf),
            (false, true) => Ok(HypothesisClass::Cf),
            (false, false) => Ok(HypothesisClass::Bcf),
            (true, false) => Err(ConfigError(
                "class: cannot auto-classify an unbounded window with a bounded signal; \
                 pass --class explicitly"
                    .into(),
            )),
        },
        other => Err(ConfigError(format!("class: unknown class `{other}`"))),
    }
}

fn scenario_from(resolved: &Resolved) -> Result<(Scenario, HypothesisClass), ConfigError> {
    let grid = resolved.grid()?;
    let window = resolved.window_kind(&grid)?;
    let signal = resolved.signal_kind(&grid)?;
    let class = parse_class(&resolved.class, &window, &signal)?;
    let expected = match class {
        HypothesisClass::FailureBcf | HypothesisClass::FailureCf => Expected::Diverges,
        _ => Expected::IdentityHolds,
    };
    let scenario = Scenario::new(
        "cli",
        window,
        1.0,
        resolved.a_rat.value(),
        resolved.b_rat.value(),
        signal,
        1.0,
        class,
        expected,
    )
    .map_err(|e| ConfigError(format!("{e}")))?;
    Ok((scenario, class))
}

fn verify_cfg(resolved: &Resolved) -> Result<VerifyConfig, ConfigError> {
    Ok(VerifyConfig {
        grid: resolved.grid()?,
        k_max: resolved.k_max,
        subset_trials: resolved.subset_trials,
        seed: resolved.seed,
    })
}

/// Window + lattice + table from a resolved config.
fn build_table(resolved: &Resolved) -> Result<(GridSignal, LatticeSpec, CorrelationTable), ConfigError> {
    let grid = resolved.grid()?;
    let kind = resolved.window_kind(&grid)?;
    let window = make_window(&kind, &grid, false).map_err(|e| ConfigError(format!("window: {e}")))?;
    let lattice = LatticeSpec::new(resolved.a_rat.value(), resolved.b_rat.value(), &grid)
        .map_err(|e| ConfigError(format!("{e}")))?;
    let table = CorrelationTable::build(&window, lattice, resolved.k_max);
    Ok((window, lattice, table))
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    config: &'a Resolved,
    report: &'a VerdictReport,
}

fn cmd_verify(common: &CommonArgs, dump_coefficients: Option<&Path>) -> Result<u8, ConfigError> {
    let resolved = resolve(common)?;
    let (scenario, class) = scenario_from(&resolved)?;
    let report = match class {
        HypothesisClass::FailureBcf => divergence_probe(&scenario, 4),
        HypothesisClass::FailureCf => divergence_probe(&scenario, 6),
        _ => verify_identity(&scenario, &verify_cfg(&resolved)?, resolved.tol),
    }
    .map_err(|e| ConfigError(format!("{e}")))?;

    if let Some(path) = dump_coefficients {
        let grid = resolved.grid()?;
        let kind = resolved.window_kind(&grid)?;
        let window =
            make_window(&kind, &grid, false).map_err(|e| ConfigError(format!("window: {e}")))?;
        let lattice = LatticeSpec::new(resolved.a_rat.value(), resolved.b_rat.value(), &grid)
            .map_err(|e| ConfigError(format!("{e}")))?;
        let signal_kind = resolved.signal_kind(&grid)?;
        let signal = make_window(&signal_kind, &grid, false)
            .map_err(|e| ConfigError(format!("signal: {e}")))?;
        let system = GaborSystem::new(window, lattice);
        let grid_csv = report::coefficients_csv(&system.coefficient_grid(&signal));
        emit(Some(path), &grid_csv)?;
    }

    let json = report::to_json(&VerifyOutput {
        config: &resolved,
        report: &report,
    });
    emit(common.out.as_deref(), &json)?;
    if let (Some(out), Some(rhs)) = (common.out.as_deref(), report.rhs.as_ref()) {
        emit(Some(&side_path(out, "per_k")), &report::per_k_csv(rhs))?;
    }
    Ok(match (report.expected, report.verdict) {
        (Expected::IdentityHolds, Verdict::Pass) => 0,
        (Expected::IdentityHolds, _) => 2,
        (Expected::Diverges, Verdict::DivergesAsExpected) => 0,
        (Expected::Diverges, _) => 3,
    })
}

fn cmd_gk(common: &CommonArgs) -> Result<u8, ConfigError> {
    let resolved = resolve(common)?;
    let (_, _, table) = build_table(&resolved)?;
    emit(common.out.as_deref(), &report::gk_csv(&table))?;
    Ok(0)
}

#[derive(Serialize)]
struct DiagnoseOutput<'a> {
    config: &'a Resolved,
    report: &'a whfi_core::walnut::ConvergenceReport,
}

fn cmd_diagnose(common: &CommonArgs) -> Result<u8, ConfigError> {
    let resolved = resolve(common)?;
    let (_, _, table) = build_table(&resolved)?;
    let grid = resolved.grid()?;
    let signal_kind = resolved.signal_kind(&grid)?;
    let signal =
        make_window(&signal_kind, &grid, false).map_err(|e| ConfigError(format!("signal: {e}")))?;
    let diag = convergence_diagnostics(
        &table,
        &signal,
        resolved.k_max,
        resolved.subset_trials,
        resolved.seed,
    )
    .map_err(|e| ConfigError(format!("{e}")))?;
    let json = report::to_json(&DiagnoseOutput {
        config: &resolved,
        report: &diag,
    });
    emit(common.out.as_deref(), &json)?;
    if let Some(out) = common.out.as_deref() {
        let (sym, rect, subs) = report::convergence_csvs(&diag);
        emit(Some(&side_path(out, "symmetric")), &sym)?;
        emit(Some(&side_path(out, "rectangular")), &rect)?;
        emit(Some(&side_path(out, "subsets")), &subs)?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct BoundsOutput<'a> {
    config: &'a Resolved,
    report: &'a FrameBoundsReport,
}

fn cmd_bounds(common: &CommonArgs) -> Result<u8, ConfigError> {
    let resolved = resolve(common)?;
    let (window, lattice, _) = build_table(&resolved)?;
    let system = GaborSystem::new(window, lattice);
    let report = match resolved.method.as_str() {
        "dense_eigen" => system
            .frame_bounds_dense(resolved.seed)
            .map_err(|e| ConfigError(format!("method: {e}")))?,
        _ => system.frame_bounds_estimate(resolved.probes, resolved.seed),
    };
    let json = report::to_json(&BoundsOutput {
        config: &resolved,
        report: &report,
    });
    emit(common.out.as_deref(), &json)?;
    Ok(0)
}

#[derive(Serialize)]
struct CcOutput<'a> {
    config: &'a Resolved,
    report: &'a CCReport,
}

fn cmd_cc(common: &CommonArgs) -> Result<u8, ConfigError> {
    let resolved = resolve(common)?;
    let (_, _, table) = build_table(&resolved)?;
    let report = cc_report(&table);
    let json = report::to_json(&CcOutput {
        config: &resolved,
        report: &report,
    });
    emit(common.out.as_deref(), &json)?;
    Ok(0)
}

#[derive(Serialize)]
struct SuiteOutput<'a> {
    config: &'a Resolved,
    reports: &'a [VerdictReport],
    all_expected_met: bool,
}

fn cmd_suite(common: &CommonArgs) -> Result<u8, ConfigError> {
    let resolved = resolve(common)?;
    let reports = scenario_suite(&verify_cfg(&resolved)?, resolved.tol);
    let all_expected_met = reports.iter().all(|r| r.expected_met);
    let json = report::to_json(&SuiteOutput {
        config: &resolved,
        reports: &reports,
        all_expected_met,
    });
    emit(common.out.as_deref(), &json)?;
    Ok(if all_expected_met { 0 } else { 2 })
}
