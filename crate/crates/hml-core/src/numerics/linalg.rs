//! Eigenvalue helper for complex Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Eigenvalues of a complex Hermitian matrix, ascending.
///
/// The n x n Hermitian matrix H = A + iB (A symmetric, B antisymmetric) is
/// embedded as the 2n x 2n real symmetric matrix [[A, -B], [B, A]], whose
/// spectrum is that of H with every eigenvalue doubled. Diagonalizing the
/// embedding with the real symmetric solver and taking every other sorted
/// eigenvalue recovers the complex spectrum.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    let mut embed = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            embed[(i, j)] = z.re;
            embed[(n + i, n + j)] = z.re;
            embed[(i, n + j)] = -z.im;
            embed[(n + i, j)] = z.im;
        }
    }
    let eig = embed.symmetric_eigen();
    let mut all: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.into_iter().step_by(2).collect()
}
