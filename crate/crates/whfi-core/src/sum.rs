//! Fixed-order compensated (Kahan) summation.
//!
//! Every reduction in this crate runs left-to-right through a `Kahan` or
//! `KahanComplex` accumulator so results are identical from run to run and
//! rounding error stays at a few ulps regardless of term count.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    #[inline]
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.total(), self.im.total())
    }
}

/// Per-slot compensated accumulator for building up a signal from many terms.
pub struct KahanBuffer {
    acc: alloc::vec::Vec<KahanComplex>,
}

impl KahanBuffer {
    pub fn zeros(len: usize) -> Self {
        Self {
            acc: alloc::vec![KahanComplex::new(); len],
        }
    }

    #[inline]
    pub fn add(&mut self, idx: usize, z: Complex64) {
        self.acc[idx].add(z);
    }

    pub fn into_samples(self) -> alloc::vec::Vec<Complex64> {
        self.acc.iter().map(|k| k.total()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        // Naive summation loses the 1e-18 terms entirely and returns 0; the
        // compensated sum keeps them to within one ulp of the big terms.
        let mut k = Kahan::new();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-18);
        }
        k.add(-1.0);
        let expect = 10_000.0 * 1e-18;
        assert!((k.total() - expect).abs() < 1e-15, "got {}", k.total());
    }

    #[test]
    fn complex_tracks_both_parts() {
        let mut k = KahanComplex::new();
        for i in 0..100 {
            k.add(Complex64::new(i as f64, -(i as f64)));
        }
        assert_eq!(k.total(), Complex64::new(4950.0, -4950.0));
    }
}
