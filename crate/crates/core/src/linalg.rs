//! Small dense-linear-algebra helpers shared by the operator modules.

use nalgebra::DMatrix;

use crate::op::C64;

/// Largest singular value; falls back to the Gram-matrix eigenvalue route
/// if the SVD iteration does not converge.
pub(crate) fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.iter().all(|z| z.norm_sqr() == 0.0) {
        return 0.0;
    }
    if let Some(svd) = m.clone().try_svd(false, false, f64::EPSILON, 0) {
        svd.singular_values.max()
    } else {
        let gram = m.adjoint() * m;
        hermitian_eigenvalues(&gram)
            .into_iter()
            .fold(0.0f64, f64::max)
            .max(0.0)
            .sqrt()
    }
}

/// Eigenvalues of a Hermitian matrix, unordered.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

pub(crate) fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Full Hermitian eigendecomposition: `(eigenvalues, eigenvectors)` with
/// eigenvectors as columns, sorted by descending eigenvalue.
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
    });
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Principal PSD square root.  Eigenvalues in `[-clip, 0)` are treated as
/// roundoff and zeroed; more negative ones indicate a non-PSD input and
/// are reported through the returned flag.
pub(crate) fn psd_sqrt(m: &DMatrix<C64>, clip: f64) -> (DMatrix<C64>, f64) {
    psd_power(m, clip, |lambda| lambda.sqrt())
}

/// Square root of the Moore–Penrose pseudo-inverse of a PSD matrix:
/// eigenvalues above the clip are raised to the power -1/2, the rest
/// are zeroed.
pub(crate) fn psd_pinv_sqrt(m: &DMatrix<C64>, clip: f64) -> (DMatrix<C64>, f64) {
    psd_power(m, clip, |lambda| 1.0 / lambda.sqrt())
}

fn psd_power(
    m: &DMatrix<C64>,
    clip: f64,
    f: impl Fn(f64) -> f64,
) -> (DMatrix<C64>, f64) {
    let (vals, vecs) = hermitian_eigen(m);
    let most_negative = vals.iter().copied().fold(0.0f64, f64::min);
    let n = m.nrows();
    let mut diag = DMatrix::zeros(n, n);
    for (i, &lambda) in vals.iter().enumerate() {
        if lambda > clip {
            diag[(i, i)] = C64::new(f(lambda), 0.0);
        }
    }
    let root = &vecs * diag * vecs.adjoint();
    (root, (-most_negative).max(0.0))
}
