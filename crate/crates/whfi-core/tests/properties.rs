//! Property tests for the structural invariants: isometries, commutation,
//! correlation symmetry, Cauchy-Schwarz domination, and tail monotonicity.

use num_complex::Complex64;
use proptest::prelude::*;

use whfi_core::correlation::{cc_report, correlation_g, CorrelationTable};
use whfi_core::lattice::LatticeSpec;
use whfi_core::rng::{random_probe, SplitMix64};
use whfi_core::signal::{
    inner_product, make_window, modulate, norm_sq, translate, GridSpec, GridSignal, WindowKind,
};
use whfi_core::walnut::{identity_rhs, PartialSumSpec};

fn grid() -> GridSpec {
    GridSpec::symmetric(1e-2, 4.0).unwrap()
}

/// Deterministic random window from a seed: either a compact random-sample
/// signal or one of the named families.
fn arb_window(seed: u64, flavor: u8) -> GridSignal {
    let g = grid();
    match flavor % 4 {
        0 => {
            let mut rng = SplitMix64::new(seed);
            let lo = -(rng.next_index(150) as i64) - 10;
            let hi = rng.next_index(150) as i64 + 10;
            random_probe(&g, lo, hi, &mut rng)
        }
        1 => make_window(&WindowKind::Gaussian { sigma: 1.0 }, &g, true).unwrap(),
        2 => make_window(&WindowKind::Triangle { c: -1.0, d: 1.5 }, &g, true).unwrap(),
        _ => make_window(&WindowKind::Box { c: -0.5, d: 1.0 }, &g, true).unwrap(),
    }
}

fn lattice_for(choice: u8, g: &GridSpec) -> LatticeSpec {
    match choice % 3 {
        0 => LatticeSpec::new(1.0, 1.0, g).unwrap(),
        1 => LatticeSpec::new(0.5, 1.0, g).unwrap(),
        _ => LatticeSpec::new(1.0, 0.5, g).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translate_preserves_norm_inside_grid(seed in any::<u64>()) {
        let g = grid();
        let mut rng = SplitMix64::new(seed);
        let f = random_probe(&g, -100, 100, &mut rng);
        let shifted = translate(&f, 1.0).unwrap();
        // Support stays inside the grid, so the shift is a pure relabeling.
        prop_assert_eq!(norm_sq(&shifted), norm_sq(&f));
    }

    #[test]
    fn modulate_preserves_norm(seed in any::<u64>(), freq in -5.0f64..5.0) {
        let g = grid();
        let mut rng = SplitMix64::new(seed);
        let f = random_probe(&g, -150, 150, &mut rng);
        let m = modulate(&f, freq);
        let n0 = norm_sq(&f);
        prop_assert!((norm_sq(&m) - n0).abs() <= 1e-12 * n0.max(1.0));
    }

    #[test]
    fn modulate_translate_commutation_phase(seed in any::<u64>()) {
        let g = grid();
        let mut rng = SplitMix64::new(seed);
        let f = random_probe(&g, -100, 100, &mut rng);
        let (na, mb) = (1.0, 2.0);
        let lhs = modulate(&translate(&f, na).unwrap(), mb);
        let rhs = translate(&modulate(&f, mb), na).unwrap();
        let phase = Complex64::new(
            (core::f64::consts::TAU * mb * na).cos(),
            (core::f64::consts::TAU * mb * na).sin(),
        );
        for (x, y) in lhs.samples().iter().zip(rhs.samples()) {
            let err = (x - y * phase).norm_sqr();
            prop_assert!(err < 1e-20 * (1.0 + x.norm_sqr()), "err² = {err}");
        }
    }

    #[test]
    fn inner_product_conjugate_symmetry(seed in any::<u64>()) {
        let g = grid();
        let mut rng = SplitMix64::new(seed);
        let f = random_probe(&g, -150, 100, &mut rng);
        let h = random_probe(&g, -100, 150, &mut rng);
        let a = inner_product(&f, &h).unwrap();
        let b = inner_product(&h, &f).unwrap();
        prop_assert_eq!(a, b.conj());
    }

    #[test]
    fn correlation_index_symmetry(seed in any::<u64>(), flavor in any::<u8>(), lat in any::<u8>(), k in 1i64..3) {
        let w = arb_window(seed, flavor);
        let lattice = lattice_for(lat, w.grid());
        let gk = correlation_g(&w, &lattice, k);
        let gmk = correlation_g(&w, &lattice, -k);
        let shift = k * lattice.inv_b_steps();
        let scale = gk.sup_abs().max(1.0);
        for j in 0..gk.period_steps() {
            // G_{-k}(t) = conj(G_k(t + k/b)) under exact index wrap.
            let lhs = gmk.at_index(j);
            let rhs = gk.at_index(j + shift).conj();
            prop_assert!((lhs - rhs).norm_sqr() <= 1e-24 * scale * scale);
        }
    }

    #[test]
    fn cauchy_schwarz_domination(seed in any::<u64>(), flavor in any::<u8>(), lat in any::<u8>(), k in 0i64..4) {
        // Σ_n |g(t-na)·g(t-na-k/b)| ≤ sup G_0, pointwise on the period.
        let w = arb_window(seed, flavor);
        let lattice = lattice_for(lat, w.grid());
        let table = CorrelationTable::build(&w, lattice, 0);
        let g0_sup = cc_report(&table).g0_sup;
        let a_steps = lattice.shift_steps();
        let shift = k * lattice.inv_b_steps();
        let grid_spec = *w.grid();
        for j in 0..a_steps {
            let mut abs_sum = 0.0f64;
            let mut n = (j - grid_spec.i_max) / a_steps - 2;
            while j - n * a_steps >= grid_spec.i_min {
                let idx = j - n * a_steps;
                if idx <= grid_spec.i_max {
                    abs_sum += (w.at(idx).norm_sqr() * w.at(idx - shift).norm_sqr()).sqrt();
                }
                n += 1;
            }
            prop_assert!(
                abs_sum <= g0_sup * (1.0 + 1e-9) + 1e-9,
                "t-index {j}: sum {abs_sum} > sup {g0_sup}"
            );
        }
    }

    #[test]
    fn tail_bound_monotone_and_partial_sums_nested(seed in any::<u64>(), flavor in any::<u8>(), lat in any::<u8>()) {
        let w = arb_window(seed, flavor);
        let lattice = lattice_for(lat, w.grid());
        let mut prev_tail = f64::INFINITY;
        let mut prev_partial = 0.0f64;
        for k_max in 0..=4 {
            let table = CorrelationTable::build(&w, lattice, k_max);
            let report = cc_report(&table);
            let partial = report.cc_sup - report.tail_bound;
            prop_assert!(table.tail_bound() <= prev_tail * (1.0 + 1e-12) + 1e-300);
            prop_assert!(partial >= prev_partial - 1e-12 * partial.abs().max(1.0));
            prev_tail = table.tail_bound();
            prev_partial = partial;
        }
    }

    #[test]
    fn per_k_terms_conjugate_pairing(seed in any::<u64>(), flavor in any::<u8>(), lat in any::<u8>()) {
        let w = arb_window(seed, flavor);
        let lattice = lattice_for(lat, w.grid());
        let table = CorrelationTable::build(&w, lattice, 3);
        let mut rng = SplitMix64::new(seed ^ 0xABCD);
        let f = random_probe(w.grid(), -120, 120, &mut rng);
        let rhs = identity_rhs(&table, &f, &PartialSumSpec::symmetric(3)).unwrap();
        let scale: f64 = rhs
            .per_k_terms
            .iter()
            .map(|t| t.value().norm_sqr().sqrt())
            .fold(1.0, f64::max);
        for t in &rhs.per_k_terms {
            let partner = rhs.per_k_terms.iter().find(|u| u.k == -t.k).unwrap();
            let resid = (t.value() - partner.value().conj()).norm_sqr().sqrt();
            prop_assert!(resid <= 1e-10 * scale, "k = {}: residual {resid}", t.k);
        }
        // Total is real and equals f1 + f2 by construction.
        prop_assert_eq!(rhs.total, rhs.f1 + rhs.f2);
    }
}
