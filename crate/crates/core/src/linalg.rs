//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigenvalues of a real symmetric matrix, ascending, with eigenvectors as columns.
pub(crate) fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a general complex matrix via the complex Schur form.
pub(crate) fn complex_eigenvalues(m: DMatrix<C64>) -> Option<Vec<C64>> {
    let schur = nalgebra::Schur::try_new(m, 1e-15, 10_000)?;
    schur.eigenvalues().map(|v| v.iter().copied().collect())
}

/// Solves `a x = b` by LU with partial pivoting.
pub(crate) fn solve_real(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.lu().solve(b)
}

/// Frobenius norm of `m m* − I`.
pub(crate) fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let prod = m * m.adjoint();
    (prod - DMatrix::identity(m.nrows(), m.ncols())).norm()
}

/// Frobenius norm of `m − mᵀ`.
pub(crate) fn symmetry_defect(m: &DMatrix<C64>) -> f64 {
    (m - m.transpose()).norm()
}

#[cfg(test)]
/// Frobenius norm of `m − m*`.
pub(crate) fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).norm()
}

/// Extends the orthonormal columns of `partial` to a unitary matrix by
/// Gram–Schmidt against the standard basis.
pub(crate) fn complete_unitary(partial: &[DVector<C64>], dim: usize) -> DMatrix<C64> {
    let mut cols: Vec<DVector<C64>> = partial.to_vec();
    for k in 0..dim {
        if cols.len() == dim {
            break;
        }
        let mut v = DVector::from_fn(dim, |i, _| if i == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        // twice is enough
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / C64::new(norm, 0.0));
        }
    }
    DMatrix::from_columns(&cols)
}
