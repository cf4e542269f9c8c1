//! Machine-readable output: JSON with every float rendered at 17 significant
//! digits, plus the CSV schemas owned by the library modules.

use std::io::{self, Write};

use serde::Serialize;

use whfi_core::correlation::CorrelationTable;
use whfi_core::gabor::CoefficientGrid;
use whfi_core::walnut::{ConvergenceReport, IdentityRhs, PartialSumSpec};

/// 17-significant-digit decimal rendering used for every float we emit.
pub fn fmt17(x: f64) -> String {
    debug_assert!(x.is_finite(), "reports only carry finite values");
    format!("{x:.16e}")
}

/// serde_json formatter that routes every f64 through [`fmt17`]; everything
/// else keeps the default compact encoding.
struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        writer.write_all(fmt17(value).as_bytes())
    }
}

/// Serialize to compact JSON with 17-digit floats and a trailing newline.
pub fn to_json(value: &impl Serialize) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// `k, t, re_Gk, im_Gk` over one period `[0, a)` for every tabulated k.
pub fn gk_csv(table: &CorrelationTable) -> String {
    let mut out = String::from("k,t,re_Gk,im_Gk\n");
    let delta = table.grid().delta;
    for k in -table.k_max()..=table.k_max() {
        let gk = table.g_k(k).expect("within coverage");
        for (j, z) in gk.samples().iter().enumerate() {
            let t = j as f64 * delta;
            out.push_str(&format!(
                "{k},{},{},{}\n",
                fmt17(t),
                fmt17(z.re),
                fmt17(z.im)
            ));
        }
    }
    out
}

/// `m, n, re, im` over the truncated lattice.
pub fn coefficients_csv(grid: &CoefficientGrid) -> String {
    let mut out = String::from("m,n,re,im\n");
    for m in grid.m_range.0..=grid.m_range.1 {
        for n in grid.n_range.0..=grid.n_range.1 {
            let c = grid.at(m, n);
            out.push_str(&format!("{m},{n},{},{}\n", fmt17(c.re), fmt17(c.im)));
        }
    }
    out
}

/// `k, re_term, im_term` for the identity's per-k integrals.
pub fn per_k_csv(rhs: &IdentityRhs) -> String {
    let mut out = String::from("k,re_term,im_term\n");
    for t in &rhs.per_k_terms {
        out.push_str(&format!("{},{},{}\n", t.k, fmt17(t.re), fmt17(t.im)));
    }
    out
}

/// Plot-ready traces for `diagnose`: symmetric, rectangular, and subset CSVs.
pub fn convergence_csvs(report: &ConvergenceReport) -> (String, String, String) {
    let mut sym = String::from("k,quadratic_form,distance_to_full,op_norm_est\n");
    for e in &report.symmetric {
        if let PartialSumSpec::Symmetric { k } = &e.spec {
            sym.push_str(&format!(
                "{k},{},{},{}\n",
                fmt17(e.quadratic_form),
                fmt17(e.distance_to_full),
                fmt17(e.op_norm_est)
            ));
        }
    }
    let mut rect = String::from("k_pos,k_neg,quadratic_form,distance_to_full,op_norm_est\n");
    for e in &report.rectangular {
        if let PartialSumSpec::Rectangular { k_pos, k_neg } = &e.spec {
            rect.push_str(&format!(
                "{k_pos},{k_neg},{},{},{}\n",
                fmt17(e.quadratic_form),
                fmt17(e.distance_to_full),
                fmt17(e.op_norm_est)
            ));
        }
    }
    let mut subs = String::from("ks,deviation_from_full,value_norm\n");
    for s in &report.subsets {
        let ks: Vec<String> = s.ks.iter().map(|k| k.to_string()).collect();
        subs.push_str(&format!(
            "{},{},{}\n",
            ks.join(";"),
            fmt17(s.deviation_from_full),
            fmt17(s.value_norm)
        ));
    }
    (sym, rect, subs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_rendering() {
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
        assert_eq!(fmt17(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt17(-3.25e-8), "-3.2500000000000000e-8");
    }

    #[test]
    fn json_floats_carry_full_precision() {
        #[derive(Serialize)]
        struct Demo {
            x: f64,
            name: &'static str,
        }
        let json = to_json(&Demo {
            x: 1.0 / 3.0,
            name: "demo",
        });
        assert_eq!(json, "{\"x\":3.3333333333333331e-1,\"name\":\"demo\"}\n");
    }
}
