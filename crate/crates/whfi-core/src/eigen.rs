//! Eigenvalues of dense Hermitian matrices.
//!
//! A complex Hermitian `H = X + iY` embeds into the real symmetric
//! `[[X, -Y], [Y, X]]`, whose spectrum is that of `H` with every eigenvalue
//! doubled. The embedding is reduced to tridiagonal form by Householder
//! reflections and the eigenvalues extracted by implicit-shift QL — the
//! standard eigenvalues-only pair (tred/tqli). Extremes are read off the
//! sorted spectrum.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math;

/// Householder reduction of a symmetric matrix (row-major, destroyed) to
/// tridiagonal form; returns `(diagonal, subdiagonal)` with the subdiagonal
/// in `e[1..]`.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0f64;
        if l > 0 {
            let mut scale = 0.0f64;
            for k in 0..=l {
                scale += math::abs(a[i * n + k]);
            }
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -math::sqrt(h) } else { math::sqrt(h) };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut f_acc = 0.0f64;
                for j in 0..=l {
                    let mut g_acc = 0.0f64;
                    for k in 0..=j {
                        g_acc += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g_acc += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * a[i * n + j];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[i * n + i];
    }
    (d, e)
}

#[inline]
fn pythag(a: f64, b: f64) -> f64 {
    let (a, b) = (math::abs(a), math::abs(b));
    if a > b {
        let r = b / a;
        a * math::sqrt(1.0 + r * r)
    } else if b > 0.0 {
        let r = a / b;
        b * math::sqrt(1.0 + r * r)
    } else {
        0.0
    }
}

/// Implicit-shift QL on a tridiagonal matrix; eigenvalues land in `d`.
fn tqli(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    if n == 0 {
        return;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = math::abs(d[m]) + math::abs(d[m + 1]);
                if math::abs(e[m]) + dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 50, "QL iteration failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = pythag(g, 1.0);
            let sign_r = if g >= 0.0 { math::abs(r) } else { -math::abs(r) };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                let idx = i - 1;
                let f = s * e[idx];
                let b = c * e[idx];
                r = pythag(f, g);
                e[idx + 1] = r;
                if r == 0.0 {
                    d[idx + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[idx + 1] - p;
                r = (d[idx] - g) * s + 2.0 * c * b;
                p = s * r;
                d[idx + 1] = g + p;
                g = c * r - b;
                i -= 1;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// All eigenvalues of a real symmetric matrix (row-major), ascending.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let (mut d, mut e) = tridiagonalize(&mut a, n);
    tqli(&mut d, &mut e);
    d.sort_unstable_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    d
}

/// All eigenvalues of a complex Hermitian matrix (row-major), ascending.
/// Computed through the doubled real embedding; the duplicates are collapsed
/// by taking every other entry of the sorted doubled spectrum.
pub fn hermitian_eigenvalues(h: &[Complex64], n: usize) -> Vec<f64> {
    assert_eq!(h.len(), n * n);
    let m = 2 * n;
    let mut a = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[i * n + j];
            a[i * m + j] = z.re;
            a[i * m + (n + j)] = -z.im;
            a[(n + i) * m + j] = z.im;
            a[(n + i) * m + (n + j)] = z.re;
        }
    }
    let doubled = symmetric_eigenvalues(a, m);
    (0..n).map(|i| 0.5 * (doubled[2 * i] + doubled[2 * i + 1])).collect()
}

/// `(smallest, largest)` eigenvalue of a complex Hermitian matrix.
pub fn hermitian_extremes(h: &[Complex64], n: usize) -> (f64, f64) {
    let eigs = hermitian_eigenvalues(h, n);
    (eigs[0], eigs[n - 1])
}
