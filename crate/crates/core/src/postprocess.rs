//! Embedding transforms: weighted removal of principal directions,
//! all-but-the-top, and conceptor negation.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::diagnostics::mean_vector;
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::numfmt::format_significant;
use crate::spectral::{self, PrincipalDirections};

const MODEL_DIGITS: usize = 12;
const ORTHONORMAL_TOL: f64 = 1e-8;

/// Learned removal weights over `d` stored directions.
///
/// `v' = v − Σᵢ αᵢ (uᵢᵀv) uᵢ`. Weights are unconstrained; values outside
/// `[0, 1]` over-remove or reflect.
#[derive(Debug, Clone, PartialEq)]
pub struct RemovalModel {
    alphas: Vec<f64>,
    directions: Array2<f64>,
    source_fingerprint: u64,
}

impl RemovalModel {
    pub fn new(alphas: Vec<f64>, directions: Array2<f64>, source_fingerprint: u64) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::invalid("d must be ≥ 1"));
        }
        if alphas.len() != directions.nrows() {
            return Err(Error::invalid(format!(
                "{} weights for {} directions",
                alphas.len(),
                directions.nrows()
            )));
        }
        if let Some(a) = alphas.iter().find(|a| !a.is_finite()) {
            return Err(Error::invalid(format!("non-finite weight {a}")));
        }
        check_orthonormal(directions.view())?;
        Ok(Self {
            alphas,
            directions,
            source_fingerprint,
        })
    }

    /// Uses the leading `alphas.len()` directions of `directions`.
    pub fn from_directions(
        directions: &PrincipalDirections,
        alphas: Vec<f64>,
        source_fingerprint: u64,
    ) -> Result<Self> {
        let d = alphas.len();
        if d > directions.len() {
            return Err(Error::invalid(format!(
                "d = {d} exceeds the {} available directions",
                directions.len()
            )));
        }
        let top = directions.top(d.max(1))?;
        Self::new(alphas, top.directions().to_owned(), source_fingerprint)
    }

    pub fn d(&self) -> usize {
        self.alphas.len()
    }

    pub fn dim(&self) -> usize {
        self.directions.ncols()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn directions(&self) -> ArrayView2<'_, f64> {
        self.directions.view()
    }

    pub fn source_fingerprint(&self) -> u64 {
        self.source_fingerprint
    }

    pub fn with_alphas(&self, alphas: Vec<f64>) -> Result<Self> {
        Self::new(alphas, self.directions.clone(), self.source_fingerprint)
    }

    /// Transforms a single vector.
    pub fn transform(&self, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        let mut out = v.to_owned();
        for (u, &alpha) in self.directions.axis_iter(Axis(0)).zip(&self.alphas) {
            let c = u.dot(&v);
            out.scaled_add(-alpha * c, &u);
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// `"d e"`, a line of `d` weights, `d` direction rows, then the source
    /// fingerprint as 16 hex digits.
    pub fn to_text(&self) -> String {
        let fmt = |xs: &mut dyn Iterator<Item = f64>| {
            xs.map(|x| format_significant(x, MODEL_DIGITS))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = format!("{} {}\n", self.d(), self.dim());
        out.push_str(&fmt(&mut self.alphas.iter().copied()));
        out.push('\n');
        for row in self.directions.axis_iter(Axis(0)) {
            out.push_str(&fmt(&mut row.iter().copied()));
            out.push('\n');
        }
        out.push_str(&format!("{:016x}\n", self.source_fingerprint));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
        let numbers = |line_no: usize, expected: usize| -> Result<Vec<f64>> {
            let line = lines
                .get(line_no - 1)
                .ok_or_else(|| Error::parse(line_no, "unexpected end of model file"))?;
            let values = line
                .split_whitespace()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(line_no, format!("invalid number {f:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if values.len() != expected {
                return Err(Error::parse(
                    line_no,
                    format!("expected {expected} values, found {}", values.len()),
                ));
            }
            Ok(values)
        };

        let header: Vec<&str> = lines
            .first()
            .map(|l| l.split_whitespace().collect())
            .unwrap_or_default();
        let (d, e) = match header.as_slice() {
            [d, e] => match (d.parse::<i64>(), e.parse::<usize>()) {
                (Ok(d), Ok(e)) => (d, e),
                _ => return Err(Error::parse(1, "malformed header, expected \"d e\"")),
            },
            _ => return Err(Error::parse(1, "malformed header, expected \"d e\"")),
        };
        if d < 1 {
            return Err(Error::parse(1, "d must be ≥ 1"));
        }
        if e < 1 {
            return Err(Error::parse(1, "dimension must be ≥ 1"));
        }
        let d = d as usize;
        let alphas = numbers(2, d)?;
        let mut directions = Array2::zeros((d, e));
        for i in 0..d {
            let row = numbers(3 + i, e)?;
            directions.row_mut(i).assign(&Array1::from(row));
        }
        let fp_line = 3 + d;
        let fp = lines
            .get(fp_line - 1)
            .map(|l| l.trim())
            .ok_or_else(|| Error::parse(fp_line, "missing fingerprint line"))?;
        let fingerprint = u64::from_str_radix(fp, 16)
            .map_err(|_| Error::parse(fp_line, format!("invalid fingerprint {fp:?}")))?;
        if lines[fp_line..].iter().any(|l| !l.trim().is_empty()) {
            return Err(Error::parse(fp_line + 1, "trailing content after fingerprint"));
        }
        Self::new(alphas, directions, fingerprint).map_err(|err| match err {
            Error::InvalidArgument(msg) => Error::invalid(format!("model file: {msg}")),
            other => other,
        })
    }
}

fn check_orthonormal(directions: ArrayView2<'_, f64>) -> Result<()> {
    let gram = directions.dot(&directions.t());
    for ((i, j), &g) in gram.indexed_iter() {
        let expected = if i == j { 1.0 } else { 0.0 };
        if (g - expected).abs() > ORTHONORMAL_TOL {
            return Err(Error::invalid(format!(
                "directions are not orthonormal: <u{i}, u{j}> = {g}"
            )));
        }
    }
    Ok(())
}

/// Whether [`weighted_removal`] insists that the model was fitted on this
/// exact embedding file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FingerprintCheck {
    #[default]
    Enforce,
    Override,
}

/// Applies `v'(w) = v(w) − Σᵢ αᵢ (uᵢᵀv(w)) uᵢ` to every row.
pub fn weighted_removal(
    matrix: &EmbeddingMatrix,
    model: &RemovalModel,
    check: FingerprintCheck,
) -> Result<EmbeddingMatrix> {
    if model.dim() != matrix.dim() {
        return Err(Error::DimensionMismatch {
            expected: matrix.dim(),
            actual: model.dim(),
        });
    }
    if check == FingerprintCheck::Enforce && model.source_fingerprint != matrix.fingerprint() {
        return Err(Error::FingerprintMismatch {
            expected: model.source_fingerprint,
            actual: matrix.fingerprint(),
        });
    }
    let data = remove_weighted(matrix.data(), model.directions(), &model.alphas);
    matrix.with_data(data)
}

/// `E − (E Uᵀ ∘ α) U` for `U` with one direction per row.
pub(crate) fn remove_weighted(
    data: ArrayView2<'_, f64>,
    directions: ArrayView2<'_, f64>,
    alphas: &[f64],
) -> Array2<f64> {
    let mut coef = data.dot(&directions.t());
    for (mut col, &a) in coef.axis_iter_mut(Axis(1)).zip(alphas) {
        col.mapv_inplace(|c| c * a);
    }
    &data - &coef.dot(&directions)
}

/// All-but-the-top: removes the top `d` directions completely, optionally
/// after subtracting the mean vector (directions then come from the
/// centered matrix).
pub fn abtt(matrix: &EmbeddingMatrix, d: usize, remove_mean: bool) -> Result<EmbeddingMatrix> {
    if d == 0 || d > matrix.dim() {
        return Err(Error::invalid(format!(
            "D = {d} out of range 1..={}",
            matrix.dim()
        )));
    }
    let mean = remove_mean.then(|| mean_vector(matrix));
    let source = match &mean {
        Some(mu) => &matrix.data() - &mu.view().insert_axis(Axis(0)),
        None => matrix.data().to_owned(),
    };
    let k = d.min(source.nrows().min(source.ncols()));
    let mut dirs = spectral::directions_of(source.view(), k)?.directions().to_owned();
    if k < d {
        // Fewer rows than directions: complete the basis so that exactly d
        // orthonormal directions are removed.
        dirs = complete_basis(dirs, d);
    }
    let ones = vec![1.0; d];
    matrix.with_data(remove_weighted(source.view(), dirs.view(), &ones))
}

/// ABTT with precomputed directions. `mean` must be the vector the
/// directions were computed after subtracting, if any.
pub fn abtt_with_directions(
    matrix: &EmbeddingMatrix,
    directions: &PrincipalDirections,
    d: usize,
    mean: Option<ArrayView1<'_, f64>>,
) -> Result<EmbeddingMatrix> {
    let top = directions.top(d)?;
    let ones = vec![1.0; d];
    let data = match mean {
        Some(mu) => {
            let centered = &matrix.data() - &mu.insert_axis(Axis(0));
            remove_weighted(centered.view(), top.directions(), &ones)
        }
        None => remove_weighted(matrix.data(), top.directions(), &ones),
    };
    matrix.with_data(data)
}

fn complete_basis(dirs: Array2<f64>, d: usize) -> Array2<f64> {
    let e = dirs.ncols();
    let mut rows: Vec<Array1<f64>> = dirs.axis_iter(Axis(0)).map(|r| r.to_owned()).collect();
    for j in 0..e {
        if rows.len() == d {
            break;
        }
        let mut v = Array1::zeros(e);
        v[j] = 1.0;
        for r in &rows {
            let c = r.dot(&v);
            v.scaled_add(-c, r);
        }
        let n = v.dot(&v).sqrt();
        if n > 1e-6 {
            rows.push(v / n);
        }
    }
    let mut out = Array2::zeros((rows.len(), e));
    for (i, r) in rows.iter().enumerate() {
        out.row_mut(i).assign(r);
    }
    out
}

/// Conceptor `C = R (R + aperture⁻² I)⁻¹` with `R = EᵀE / |V|`.
///
/// Computed through the eigendecomposition `R = Q Λ Qᵀ`, giving
/// `C = Q diag(λ / (λ + aperture⁻²)) Qᵀ`.
pub fn conceptor_matrix(matrix: &EmbeddingMatrix, aperture: f64) -> Result<Array2<f64>> {
    conceptor_spectral_map(matrix, aperture, |lambda, a2| lambda / (lambda + a2))
}

/// Multiplies every row by `I − C`.
pub fn conceptor_negation(matrix: &EmbeddingMatrix, aperture: f64) -> Result<EmbeddingMatrix> {
    let negation = conceptor_spectral_map(matrix, aperture, |lambda, a2| a2 / (lambda + a2))?;
    matrix.with_data(matrix.data().dot(&negation))
}

fn conceptor_spectral_map(
    matrix: &EmbeddingMatrix,
    aperture: f64,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Array2<f64>> {
    if !(aperture > 0.0 && aperture.is_finite()) {
        return Err(Error::invalid(format!("aperture must be positive, got {aperture}")));
    }
    let data = matrix.data();
    let correlation = data.t().dot(&data) / matrix.len() as f64;
    let inv_a2 = aperture.powi(-2);
    let eig = spectral::symmetric_eigen(&correlation);
    let e = matrix.dim();
    let q = Array2::from_shape_fn((e, e), |(i, j)| eig.eigenvectors[(i, j)]);
    let mut scaled = q.clone();
    for (mut col, &lambda) in scaled.axis_iter_mut(Axis(1)).zip(eig.eigenvalues.iter()) {
        // R is PSD; clamp rounding noise below zero.
        let w = f(lambda.max(0.0), inv_a2);
        if !w.is_finite() {
            return Err(Error::Numerical(format!(
                "conceptor weight {w} for eigenvalue {lambda}"
            )));
        }
        col.mapv_inplace(|x| x * w);
    }
    let out = scaled.dot(&q.t());
    Ok(out)
}
