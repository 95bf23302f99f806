//! Small eigenvalue helpers used by the stability checks.
//!
//! Complex spectra go through faer's dense non-symmetric eigensolver, which
//! stays fast on the tightly clustered eigenvalues that lifted harmonic
//! drifts produce; nalgebra's real-Schur iteration can stall on those for
//! minutes. If faer ever fails to converge, the helpers fall back to
//! nalgebra on the real embedding `[[X, -Y], [Y, X]]` of `X + iY`, whose
//! spectrum is the union of the complex spectrum and its conjugate — the
//! real parts, all stability classification needs, are identical.

use faer::Mat;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues of a real square matrix.
pub fn eigenvalues_real(m: &DMatrix<f64>) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().copied().collect()
}

/// Eigenvalues of a complex square matrix.
///
/// In the (never observed) case that the primary solver fails to converge,
/// the result comes from the real-embedding fallback instead, where each
/// eigenvalue is accompanied by its complex conjugate; real parts are
/// unaffected.
pub fn eigenvalues_complex(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    let f = Mat::from_fn(n, n, |i, j| m[(i, j)]);
    match f.eigenvalues() {
        Ok(ev) => ev,
        Err(_) => embedded_eigenvalues(m),
    }
}

/// Fallback: eigenvalues of the real embedding `[[X, -Y], [Y, X]]`.
fn embedded_eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    let mut e = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            e[(i, j)] = z.re;
            e[(i, j + n)] = -z.im;
            e[(i + n, j)] = z.im;
            e[(i + n, j + n)] = z.re;
        }
    }
    eigenvalues_real(&e)
}

/// Largest eigenvalue real part of a complex square matrix.
pub fn max_real_part(m: &DMatrix<Complex64>) -> f64 {
    eigenvalues_complex(m)
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Solve `A x = B` for complex dense `A`, failing loudly when `A` is singular.
pub fn solve_complex(
    a: DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    omega: f64,
) -> Result<DMatrix<Complex64>> {
    a.lu().solve(b).ok_or(Error::SingularAtFrequency { omega })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn complex_spectrum_is_exact_on_diagonal_matrix() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(0.0, 1.0);
        m[(1, 1)] = Complex64::new(-2.0, 0.0);
        let mut ev = eigenvalues_complex(&m);
        assert_eq!(ev.len(), 2);
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_relative_eq!(ev[0].re, -2.0, epsilon = 1e-12);
        assert_relative_eq!(ev[0].im, 0.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1].re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1].im, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn embedding_fallback_matches_primary_real_parts() {
        // Dense non-normal matrix with complex entries: the embedding must
        // reproduce every real part of the primary spectrum, twice.
        let n = 5;
        let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            let s = (1.3 * i as f64 - 0.7 * j as f64).sin();
            let c = (0.9 * i as f64 + 0.4 * j as f64).cos();
            Complex64::new(s, 0.5 * c) - if i == j { Complex64::new(2.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        let mut primary: Vec<f64> = eigenvalues_complex(&m).iter().map(|z| z.re).collect();
        let mut embedded: Vec<f64> = embedded_eigenvalues(&m).iter().map(|z| z.re).collect();
        primary.sort_by(f64::total_cmp);
        embedded.sort_by(f64::total_cmp);
        assert_eq!(embedded.len(), 2 * primary.len());
        for (k, re) in primary.iter().enumerate() {
            assert_relative_eq!(embedded[2 * k], *re, epsilon = 1e-9, max_relative = 1e-9);
            assert_relative_eq!(embedded[2 * k + 1], *re, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn max_real_part_of_stable_matrix_is_negative() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(-0.5, 3.0);
        m[(0, 1)] = Complex64::new(0.1, -0.2);
        m[(1, 1)] = Complex64::new(-0.25, -3.0);
        assert!(max_real_part(&m) < 0.0);
    }
}
