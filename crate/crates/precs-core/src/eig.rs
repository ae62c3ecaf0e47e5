//! Hermitian eigenvalue kernel.
//!
//! A complex Hermitian matrix H = X + iY is embedded as the real symmetric
//! matrix [[X, -Y], [Y, X]], whose spectrum is that of H with every
//! eigenvalue doubled. The real matrix is then diagonalized by cyclic Jacobi
//! rotations. Only Hermitian spectra are ever needed in this crate, and the
//! dimensions stay small (≤ a few hundred), so the quadratic-per-sweep cost
//! is irrelevant next to the robustness of the method.

use ndarray::Array2;
use num_complex::Complex64 as C64;

/// Eigenvalues (ascending) of a real symmetric matrix stored row-major.
///
/// The input slice is consumed as scratch space. Panics if `a.len() != n*n`.
fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    if n == 1 {
        return vec![a[0]];
    }
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = 1e-15 * frob.max(f64::MIN_POSITIVE);

    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= stop / (n as f64) {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    let new_p = c * aip - s * aiq;
                    let new_q = s * aip + c * aiq;
                    a[i * n + p] = new_p;
                    a[p * n + i] = new_p;
                    a[i * n + q] = new_q;
                    a[q * n + i] = new_q;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eigs
}

/// Eigenvalues (ascending) of a complex Hermitian matrix.
///
/// The caller is responsible for Hermiticity; the strictly lower triangle and
/// the imaginary parts of the diagonal are ignored in favor of the Hermitian
/// average, so small residuals are harmless.
pub(crate) fn hermitian_eigenvalues(h: &Array2<C64>) -> Vec<f64> {
    let n = h.nrows();
    assert_eq!(n, h.ncols());
    let m = 2 * n;
    let mut a = vec![0.0_f64; m * m];
    for i in 0..n {
        for j in 0..n {
            // Hermitian average keeps the embedding exactly symmetric.
            let x = 0.5 * (h[(i, j)].re + h[(j, i)].re);
            let y = 0.5 * (h[(i, j)].im - h[(j, i)].im);
            a[i * m + j] = x;
            a[(i + n) * m + (j + n)] = x;
            a[i * m + (j + n)] = -y;
            a[(i + n) * m + j] = y;
        }
    }
    let doubled = jacobi_eigenvalues(&mut a, m);
    // Every eigenvalue of H appears twice; adjacent sorted entries are the pairs.
    doubled.into_iter().step_by(2).collect()
}
