//! Dense linear-algebra helpers over nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Symmetric eigendecomposition with eigenpairs sorted by descending eigenvalue
/// and every eigenvector sign-canonicalized.
pub struct SortedEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> SortedEigen {
    let n = m.nrows();
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        canonicalize_sign(&mut col);
        vectors.set_column(dst, &col);
        values.push(eig.eigenvalues[src]);
    }
    SortedEigen { values, vectors }
}

/// Flips `v` so its first entry that is non-negligible relative to its norm is positive.
pub fn canonicalize_sign(v: &mut DVector<f64>) {
    let tol = 1e-10 * v.norm();
    if let Some(first) = v.iter().copied().find(|x| x.abs() > tol) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

pub fn mean_diagonal(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.diagonal().sum() / m.nrows() as f64
}

/// Inverse of `m + eps I` with `eps = 1e-6` times the mean diagonal, symmetrized.
pub fn regularized_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let md = mean_diagonal(m);
    let eps = if md > 0.0 { 1e-6 * md } else { 1e-6 };
    let reg = symmetrize(m) + DMatrix::identity(n, n) * eps;
    let inv = reg.cholesky()?.inverse();
    Some(symmetrize(&inv))
}

/// Stacks vectors as columns of a `dim x n` matrix.
pub fn columns(vectors: &[Vec<f64>]) -> DMatrix<f64> {
    let dim = vectors.first().map_or(0, Vec::len);
    DMatrix::from_fn(dim, vectors.len(), |r, c| vectors[c][r])
}
