//! Supervised linear feature learning: Maximum Margin Criterion and PCA+LDA.
//!
//! Both fits work in the span of the centered learning vectors. When the
//! input dimension exceeds the sample count the data are first expressed in
//! an orthonormal basis of that span (thin QR), which is exact: every scatter
//! matrix vanishes on the orthogonal complement.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{canonicalize_sign, columns, regularized_inverse, sorted_symmetric_eigen, symmetrize};

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSummary {
    pub mean: DVector<f64>,
    /// Class labels in order of first appearance.
    pub classes: Vec<String>,
    pub class_means: Vec<DVector<f64>>,
    pub class_sizes: Vec<usize>,
    pub priors: Vec<f64>,
    pub between: DMatrix<f64>,
    pub within: DMatrix<f64>,
}

/// Groups sample indices by label, classes in order of first appearance.
pub(crate) fn group_by_label<L: AsRef<str>>(labels: &[L]) -> (Vec<String>, Vec<Vec<usize>>) {
    let mut classes: Vec<String> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        let l = l.as_ref();
        match classes.iter().position(|c| c == l) {
            Some(c) => members[c].push(i),
            None => {
                classes.push(l.to_string());
                members.push(vec![i]);
            }
        }
    }
    (classes, members)
}

fn check_inputs<L: AsRef<str>>(vectors: &[Vec<f64>], labels: &[L]) -> Result<usize> {
    if vectors.len() != labels.len() {
        return Err(Error::Parameter(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    let dim = vectors.first().map_or(0, Vec::len);
    if dim == 0 {
        return Err(Error::Parameter("no learning vectors".into()));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::Shape {
            expected: dim,
            found: v.len(),
        });
    }
    Ok(dim)
}

/// Scatter of the columns of `data` (dim x N).
pub(crate) fn scatter_of(data: &DMatrix<f64>, members: &[Vec<usize>]) -> (DVector<f64>, Vec<DVector<f64>>, DMatrix<f64>, DMatrix<f64>) {
    let dim = data.nrows();
    let n = data.ncols() as f64;
    let mean = data.column_mean();
    let mut between = DMatrix::zeros(dim, dim);
    let mut within = DMatrix::zeros(dim, dim);
    let mut means = Vec::with_capacity(members.len());
    for idx in members {
        let nc = idx.len() as f64;
        let mut mc = DVector::zeros(dim);
        for &i in idx {
            mc += data.column(i);
        }
        mc /= nc;
        let prior = nc / n;
        let dm = &mc - &mean;
        between.ger(prior, &dm, &dm, 1.0);
        // p_c / N_c = 1 / N
        for &i in idx {
            let dx = data.column(i) - &mc;
            within.ger(1.0 / n, &dx, &dx, 1.0);
        }
        means.push(mc);
    }
    (mean, means, symmetrize(&between), symmetrize(&within))
}

/// Between- and within-class scatter of labelled vectors.
pub fn compute_scatter<L: AsRef<str>>(vectors: &[Vec<f64>], labels: &[L]) -> Result<ScatterSummary> {
    check_inputs(vectors, labels)?;
    let (classes, members) = group_by_label(labels);
    if classes.len() < 2 {
        return Err(Error::InsufficientClasses(classes.len()));
    }
    let data = columns(vectors);
    let (mean, class_means, between, within) = scatter_of(&data, &members);
    let n = vectors.len() as f64;
    Ok(ScatterSummary {
        mean,
        priors: members.iter().map(|m| m.len() as f64 / n).collect(),
        class_sizes: members.iter().map(Vec::len).collect(),
        classes,
        class_means,
        between,
        within,
    })
}

/// Orthonormal basis of the span of the centered data together with the
/// centered data expressed in it.
struct Reduced {
    /// `dim x r` orthonormal columns, or `None` when the identity basis is used.
    basis: Option<DMatrix<f64>>,
    coords: DMatrix<f64>,
}

impl Reduced {
    fn new(data: &DMatrix<f64>) -> Self {
        let mean = data.column_mean();
        let mut centered = data.clone();
        for mut c in centered.column_iter_mut() {
            c -= &mean;
        }
        if data.nrows() <= data.ncols() {
            return Reduced {
                basis: None,
                coords: centered,
            };
        }
        let qr = centered.qr();
        Reduced {
            basis: Some(qr.q()),
            coords: qr.r(),
        }
    }

    /// Maps reduced-space column vectors back to input space.
    fn lift(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.basis {
            Some(q) => q * v,
            None => v.clone(),
        }
    }
}

/// Result of a linear fit: projection rows and the Mahalanobis precision of
/// the projected learning data.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    /// `d_out x d_in`.
    pub projection: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub precision: DMatrix<f64>,
    pub classes: usize,
    pub samples: usize,
}

/// Inverse of the pooled within-class covariance of the projected learning
/// data, regularized.
fn projected_precision(projection: &DMatrix<f64>, data: &DMatrix<f64>, members: &[Vec<usize>]) -> Result<DMatrix<f64>> {
    let projected = projection * data;
    let (_, _, _, within) = scatter_of(&projected, members);
    regularized_inverse(&within)
        .ok_or_else(|| Error::DegenerateModel("projected within-class covariance is not invertible".into()))
}

fn prepare<L: AsRef<str>>(vectors: &[Vec<f64>], labels: &[L]) -> Result<(DMatrix<f64>, Vec<Vec<usize>>)> {
    check_inputs(vectors, labels)?;
    let (classes, members) = group_by_label(labels);
    if classes.len() < 2 {
        return Err(Error::InsufficientClasses(classes.len()));
    }
    Ok((columns(vectors), members))
}

/// Maximum Margin Criterion: the eigenvectors of `S_b - S_w` with strictly
/// positive eigenvalue, by descending eigenvalue.
pub fn fit_mmc_linear<L: AsRef<str>>(vectors: &[Vec<f64>], labels: &[L]) -> Result<LinearFit> {
    let (data, members) = prepare(vectors, labels)?;
    let reduced = Reduced::new(&data);
    let (_, _, between, within) = scatter_of(&reduced.coords, &members);
    let criterion = &between - &within;
    let eig = sorted_symmetric_eigen(&criterion);

    let scale = between.trace() + within.trace();
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    let keep = eig.values.iter().take_while(|&&v| v > tol).count();
    if keep == 0 {
        return Err(Error::DegenerateModel(
            "no positive eigenvalue of S_b - S_w; classes are inseparable under the criterion".into(),
        ));
    }
    let reduced_dirs = eig.vectors.columns(0, keep).into_owned();
    let mut dirs = reduced.lift(&reduced_dirs);
    for mut c in dirs.column_iter_mut() {
        let mut v = c.clone_owned();
        canonicalize_sign(&mut v);
        c.copy_from(&v);
    }
    let projection = dirs.transpose();
    let precision = projected_precision(&projection, &data, &members)?;
    Ok(LinearFit {
        projection,
        eigenvalues: eig.values[..keep].to_vec(),
        precision,
        classes: members.len(),
        samples: vectors.len(),
    })
}

/// PCA to the smallest leading eigenspace reaching `variance_keep` of the total
/// variance (at most `N - C` dimensions), then Fisher LDA in that space with at
/// most `C - 1` directions. Projection rows are unit length.
pub fn fit_pcalda_linear<L: AsRef<str>>(vectors: &[Vec<f64>], labels: &[L], variance_keep: f64) -> Result<LinearFit> {
    if !(variance_keep > 0.0 && variance_keep <= 1.0) {
        return Err(Error::Parameter(format!(
            "variance_keep must lie in (0, 1], got {variance_keep}"
        )));
    }
    let (data, members) = prepare(vectors, labels)?;
    let n = data.ncols();
    let c = members.len();
    let reduced = Reduced::new(&data);

    let cov = &reduced.coords * reduced.coords.transpose() / n as f64;
    let pca = sorted_symmetric_eigen(&cov);
    let total: f64 = pca.values.iter().filter(|&&v| v > 0.0).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateModel("learning data have zero variance".into()));
    }
    let cap = n.saturating_sub(c).max(1);
    let mut acc = 0.0;
    let mut k = 0;
    for &v in &pca.values {
        if k >= cap || v <= 1e-12 * total {
            break;
        }
        acc += v;
        k += 1;
        if acc >= variance_keep * total * (1.0 - 1e-12) {
            break;
        }
    }
    let pca_basis = pca.vectors.columns(0, k).into_owned();
    let pca_coords = pca_basis.transpose() * &reduced.coords;
    let (_, _, between, within) = scatter_of(&pca_coords, &members);

    let md = within.trace() / k as f64;
    let eps = if md > 0.0 { 1e-6 * md } else { 1e-6 * between.trace().max(1.0) / k as f64 };
    let regularized = &within + DMatrix::identity(k, k) * eps;
    let chol = regularized
        .cholesky()
        .ok_or_else(|| Error::DegenerateModel("within-class scatter is not positive definite".into()))?;
    let l_inv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::DegenerateModel("singular Cholesky factor".into()))?;
    let whitened = symmetrize(&(&l_inv * &between * l_inv.transpose()));
    let eig = sorted_symmetric_eigen(&whitened);
    let keep = eig
        .values
        .iter()
        .take(c - 1)
        .take_while(|&&v| v > 1e-9)
        .count();
    if keep == 0 {
        return Err(Error::DegenerateModel(
            "no positive discriminant eigenvalue; class means coincide".into(),
        ));
    }
    // generalized eigenvectors v = L^-T u
    let gen = l_inv.transpose() * eig.vectors.columns(0, keep);
    let mut dirs = reduced.lift(&(&pca_basis * gen));
    for mut col in dirs.column_iter_mut() {
        let mut v = col.clone_owned();
        let norm = v.norm();
        v /= norm;
        canonicalize_sign(&mut v);
        col.copy_from(&v);
    }
    let projection = dirs.transpose();
    let precision = projected_precision(&projection, &data, &members)?;
    Ok(LinearFit {
        projection,
        eigenvalues: eig.values[..keep].to_vec(),
        precision,
        classes: c,
        samples: n,
    })
}

/// Serializable dense matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&DMatrix<f64>> for MatrixData {
    fn from(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            data.extend(m.row(r).iter());
        }
        MatrixData {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl TryFrom<MatrixData> for DMatrix<f64> {
    type Error = Error;

    fn try_from(m: MatrixData) -> Result<Self> {
        if m.rows * m.cols != m.data.len() {
            return Err(Error::Shape {
                expected: m.rows * m.cols,
                found: m.data.len(),
            });
        }
        Ok(DMatrix::from_row_slice(m.rows, m.cols, &m.data))
    }
}
