//! Seeded, bit-for-bit reproducible random probes.
//!
//! A small splitmix64 generator feeds a Box-Muller transform; no global state
//! and no platform dependence, so every probe sequence is identical across
//! runs and machines for a given seed.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math;
use crate::signal::{GridSignal, GridSpec};

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in (0, 1]; never returns 0 so logs stay finite.
    pub fn next_unit(&mut self) -> f64 {
        let bits = self.next_u64() >> 11; // 53 random bits
        (bits as f64 + 1.0) / 9007199254740992.0
    }

    /// Standard normal via Box-Muller.
    pub fn next_normal(&mut self) -> f64 {
        let u = self.next_unit();
        let v = self.next_unit();
        math::sqrt(-2.0 * math::ln(u)) * math::cos(math::TAU * v)
    }

    pub fn next_complex_normal(&mut self) -> Complex64 {
        Complex64::new(self.next_normal(), self.next_normal())
    }

    /// Uniform integer in `[0, n)`.
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}

/// Complex gaussian samples restricted to the index interval
/// `[lo, hi]` (clamped to the grid); zero elsewhere.
pub fn random_probe(grid: &GridSpec, lo: i64, hi: i64, rng: &mut SplitMix64) -> GridSignal {
    let lo = lo.max(grid.i_min);
    let hi = hi.min(grid.i_max);
    let samples: Vec<Complex64> = (grid.i_min..=grid.i_max)
        .map(|i| {
            if i >= lo && i <= hi {
                rng.next_complex_normal()
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    GridSignal::from_samples_with_hint(*grid, samples, (lo, hi))
        .expect("probe construction respects its own hint")
}

/// Smooth compactly supported probe: a short random trigonometric sum under a
/// raised-cosine taper on `[t_lo, t_hi]`.
pub fn random_smooth_probe(
    grid: &GridSpec,
    t_lo: f64,
    t_hi: f64,
    rng: &mut SplitMix64,
) -> GridSignal {
    const TERMS: usize = 5;
    let mut coeffs = [Complex64::ZERO; TERMS];
    let mut freqs = [0.0f64; TERMS];
    for j in 0..TERMS {
        coeffs[j] = rng.next_complex_normal();
        freqs[j] = 4.0 * (rng.next_unit() - 0.5);
    }
    let mid = 0.5 * (t_lo + t_hi);
    let half = 0.5 * (t_hi - t_lo);
    let samples: Vec<Complex64> = (grid.i_min..=grid.i_max)
        .map(|i| {
            let t = grid.t(i);
            if t <= t_lo || t >= t_hi {
                return Complex64::ZERO;
            }
            let taper = 0.5 * (1.0 + math::cos(math::PI * (t - mid) / half));
            let mut z = Complex64::ZERO;
            for j in 0..TERMS {
                z += coeffs[j] * math::cis_tau(freqs[j] * t);
            }
            z * taper
        })
        .collect();
    let sig = GridSignal::from_samples(*grid, samples).expect("length matches grid");
    match sig.scan_support() {
        Some(hint) => {
            GridSignal::from_samples_with_hint(*grid, sig.samples().to_vec(), hint).unwrap()
        }
        None => sig,
    }
}
