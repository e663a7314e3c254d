//! Principal directions and singular values of an embedding matrix.
//!
//! Directions come from the symmetric eigendecomposition of the `e x e` Gram
//! matrix `EᵀE`; each singular value is then measured directly as `‖E·uᵢ‖`,
//! which keeps small singular values accurate to `ε·σ₁` instead of `√ε·σ₁`.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::diagnostics::mean_vector;
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Orthonormal directions (one per row) with their singular values, sorted
/// non-increasing. The largest-magnitude entry of every direction is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalDirections {
    directions: Array2<f64>,
    singular_values: Vec<f64>,
}

impl PrincipalDirections {
    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.directions.ncols()
    }

    pub fn direction(&self, i: usize) -> ArrayView1<'_, f64> {
        self.directions.row(i)
    }

    /// `k x e`, one direction per row.
    pub fn directions(&self) -> ArrayView2<'_, f64> {
        self.directions.view()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// The leading `k` directions.
    pub fn top(&self, k: usize) -> Result<PrincipalDirections> {
        if k == 0 || k > self.len() {
            return Err(Error::invalid(format!(
                "requested {k} directions, {} available",
                self.len()
            )));
        }
        Ok(PrincipalDirections {
            directions: self.directions.slice(ndarray::s![..k, ..]).to_owned(),
            singular_values: self.singular_values[..k].to_vec(),
        })
    }
}

/// Top-`k` right-singular directions of the uncentered matrix.
pub fn compute_directions(matrix: &EmbeddingMatrix, k: usize) -> Result<PrincipalDirections> {
    directions_of(matrix.data(), k)
}

/// Like [`compute_directions`], optionally subtracting the mean row first.
pub fn compute_directions_with(
    matrix: &EmbeddingMatrix,
    k: usize,
    center: bool,
) -> Result<PrincipalDirections> {
    if center {
        let mu = mean_vector(matrix);
        let centered = &matrix.data() - &mu.view().insert_axis(Axis(0));
        directions_of(centered.view(), k)
    } else {
        directions_of(matrix.data(), k)
    }
}

/// Number of singular values of an `n x e` matrix.
pub fn spectrum_len(matrix: &EmbeddingMatrix) -> usize {
    matrix.len().min(matrix.dim())
}

pub(crate) fn directions_of(data: ArrayView2<'_, f64>, k: usize) -> Result<PrincipalDirections> {
    let (n, e) = data.dim();
    let max_k = n.min(e);
    if k == 0 || k > max_k {
        return Err(Error::invalid(format!(
            "direction count {k} out of range 1..={max_k}"
        )));
    }

    let gram = data.t().dot(&data);
    let eig = symmetric_eigen(&gram);

    // Eigenvalues descending; rank by eigenvalue, then re-sort on the measured
    // singular values so the final ordering is exactly non-increasing.
    let mut order: Vec<usize> = (0..e).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut basis = Array2::zeros((e, k));
    for (col, &j) in order.iter().take(k).enumerate() {
        let mut u = Array1::from_iter(eig.eigenvectors.column(j).iter().copied());
        fix_sign(&mut u);
        basis.column_mut(col).assign(&u);
    }
    let projected = data.dot(&basis);
    let mut picked: Vec<(f64, Array1<f64>)> = (0..k)
        .map(|col| {
            let sigma = projected.column(col).mapv(|x| x * x).sum().sqrt();
            (sigma, basis.column(col).to_owned())
        })
        .collect();
    picked.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut directions = Array2::zeros((k, e));
    let mut singular_values = Vec::with_capacity(k);
    for (i, (sigma, u)) in picked.into_iter().enumerate() {
        directions.row_mut(i).assign(&u);
        singular_values.push(sigma);
    }
    Ok(PrincipalDirections {
        directions,
        singular_values,
    })
}

pub(crate) fn symmetric_eigen(m: &Array2<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let (r, c) = m.dim();
    let dm = DMatrix::from_fn(r, c, |i, j| m[[i, j]]);
    SymmetricEigen::new(dm)
}

fn fix_sign(u: &mut Array1<f64>) {
    let pivot = u
        .iter()
        .copied()
        .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if pivot < 0.0 {
        u.mapv_inplace(|x| -x);
    }
}

/// `uᵀv`.
pub fn project_coefficient(v: ArrayView1<'_, f64>, u: ArrayView1<'_, f64>) -> Result<f64> {
    if v.len() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    Ok(v.dot(&u))
}
