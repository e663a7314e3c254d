//! Anisotropy measurements: mean vector, average norm, average cosine,
//! singular spectrum, frequency correlations and a 2-D projection.

use std::io::Write;

use ndarray::Array1;
use serde::Serialize;

use crate::embedding::{norm, EmbeddingMatrix, FrequencyTable};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{self, PrincipalDirections};

/// Arithmetic mean of the rows.
pub fn mean_vector(matrix: &EmbeddingMatrix) -> Array1<f64> {
    let sums = par::map_indexed(matrix.dim(), |j| {
        let col: Vec<f64> = matrix.data().column(j).to_vec();
        par::ordered_sum(&col)
    });
    Array1::from(sums) / matrix.len() as f64
}

/// Mean of the row norms.
pub fn average_norm(matrix: &EmbeddingMatrix) -> f64 {
    let norms = row_norms(matrix);
    par::ordered_sum(&norms) / matrix.len() as f64
}

pub fn row_norms(matrix: &EmbeddingMatrix) -> Vec<f64> {
    par::map_indexed(matrix.len(), |i| norm(matrix.row(i)))
}

/// Mean cosine over all ordered pairs `(i, j)`, diagonal included.
///
/// Equal to `‖(1/|V|) Σ v̂(w)‖²`, which is what is evaluated here in `O(|V|·e)`.
pub fn average_cosine(matrix: &EmbeddingMatrix) -> Result<f64> {
    let norms = row_norms(matrix);
    if let Some(i) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::invalid(format!(
            "zero row for token {:?}",
            matrix.vocab().token(i)
        )));
    }
    let n = matrix.len() as f64;
    let data = matrix.data();
    let sums = par::map_indexed(matrix.dim(), |j| {
        let col: Vec<f64> = data
            .column(j)
            .iter()
            .zip(&norms)
            .map(|(x, nrm)| x / nrm)
            .collect();
        par::ordered_sum(&col) / n
    });
    Ok(sums.iter().map(|s| s * s).sum())
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "pearson needs at least 2 points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant sequence"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyCorrelations {
    pub norm_logfreq_pearson: f64,
    pub pc1_logfreq_pearson: f64,
}

/// Correlations of `‖v(w)‖` and `u₁ᵀv(w)` with `ln count(w)`, over tokens
/// present in `counts`.
pub fn frequency_correlations(
    matrix: &EmbeddingMatrix,
    counts: &FrequencyTable,
) -> Result<FrequencyCorrelations> {
    let directions = spectral::compute_directions(matrix, 1)?;
    frequency_correlations_with(matrix, counts, &directions)
}

pub fn frequency_correlations_with(
    matrix: &EmbeddingMatrix,
    counts: &FrequencyTable,
    directions: &PrincipalDirections,
) -> Result<FrequencyCorrelations> {
    let u1 = directions.direction(0);
    let mut norms = Vec::new();
    let mut pc1 = Vec::new();
    let mut logs = Vec::new();
    for (i, token) in matrix.vocab().tokens().iter().enumerate() {
        if let Some(lc) = counts.log_count(token) {
            let row = matrix.row(i);
            norms.push(norm(row));
            pc1.push(row.dot(&u1));
            logs.push(lc);
        }
    }
    if logs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} tokens overlap between vocabulary and counts, need at least 2",
            logs.len()
        )));
    }
    Ok(FrequencyCorrelations {
        norm_logfreq_pearson: pearson(&norms, &logs)?,
        pc1_logfreq_pearson: pearson(&pc1, &logs)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedToken {
    pub token: String,
    pub pc1: f64,
    pub pc2: f64,
    pub log_count: Option<f64>,
}

pub fn projection_2d(
    matrix: &EmbeddingMatrix,
    counts: Option<&FrequencyTable>,
) -> Result<Vec<ProjectedToken>> {
    if matrix.dim() < 2 {
        return Err(Error::invalid("projection needs dimension ≥ 2"));
    }
    let directions = spectral::compute_directions(matrix, 2.min(spectral::spectrum_len(matrix)))?;
    projection_2d_with(matrix, counts, &directions)
}

pub fn projection_2d_with(
    matrix: &EmbeddingMatrix,
    counts: Option<&FrequencyTable>,
    directions: &PrincipalDirections,
) -> Result<Vec<ProjectedToken>> {
    if matrix.dim() < 2 {
        return Err(Error::invalid("projection needs dimension ≥ 2"));
    }
    let coef = |row: ndarray::ArrayView1<'_, f64>, i: usize| {
        if i < directions.len() {
            row.dot(&directions.direction(i))
        } else {
            0.0
        }
    };
    Ok(matrix
        .vocab()
        .tokens()
        .iter()
        .zip(matrix.rows())
        .map(|(token, row)| ProjectedToken {
            token: token.clone(),
            pc1: coef(row, 0),
            pc2: coef(row, 1),
            log_count: counts.and_then(|c| c.log_count(token)),
        })
        .collect())
}

/// The full non-increasing singular value list.
pub fn singular_spectrum(matrix: &EmbeddingMatrix) -> Vec<f64> {
    spectral::compute_directions(matrix, spectral::spectrum_len(matrix))
        .map(|p| p.singular_values().to_vec())
        .expect("full spectrum length is always in range")
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub mean_vector_norm: f64,
    pub average_vector_norm: f64,
    pub average_cosine: f64,
    pub singular_values: Vec<f64>,
    pub norm_logfreq_pearson: Option<f64>,
    pub pc1_logfreq_pearson: Option<f64>,
    #[serde(skip)]
    pub projection_2d: Vec<ProjectedToken>,
}

impl DiagnosticsReport {
    /// Runs every measurement. Correlations are `None` when no counts are
    /// given or when fewer than two tokens overlap with the counts.
    pub fn compute(matrix: &EmbeddingMatrix, counts: Option<&FrequencyTable>) -> Result<Self> {
        Self::compute_with(matrix, counts, false)
    }

    /// As [`compute`](Self::compute); `center` takes the spectrum, PC1 and the
    /// projection from the mean-centered matrix.
    pub fn compute_with(matrix: &EmbeddingMatrix, counts: Option<&FrequencyTable>, center: bool) -> Result<Self> {
        let full = spectral::compute_directions_with(matrix, spectral::spectrum_len(matrix), center)?;
        let correlations = match counts {
            Some(c) => match frequency_correlations_with(matrix, c, &full) {
                Ok(fc) => Some(fc),
                Err(e @ (Error::InsufficientData(_) | Error::UndefinedCorrelation(_))) => {
                    log::warn!("frequency correlations unavailable: {e}");
                    None
                }
                Err(e) => return Err(e),
            },
            None => None,
        };
        let projection_2d = if matrix.dim() >= 2 {
            projection_2d_with(matrix, counts, &full)?
        } else {
            Vec::new()
        };
        Ok(Self {
            mean_vector_norm: norm(mean_vector(matrix).view()),
            average_vector_norm: average_norm(matrix),
            average_cosine: average_cosine(matrix)?,
            singular_values: full.singular_values().to_vec(),
            norm_logfreq_pearson: correlations.map(|c| c.norm_logfreq_pearson),
            pc1_logfreq_pearson: correlations.map(|c| c.pc1_logfreq_pearson),
            projection_2d,
        })
    }

    /// JSON document; absent correlations are omitted. `provenance` entries are
    /// echoed under a `provenance` key.
    pub fn to_json(&self, provenance: &[(&str, String)]) -> String {
        let mut value = serde_json::to_value(self).expect("report is serializable");
        let obj = value.as_object_mut().expect("report serializes to an object");
        obj.retain(|_, v| !v.is_null());
        if !provenance.is_empty() {
            let prov: serde_json::Map<_, _> = provenance
                .iter()
                .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
                .collect();
            obj.insert("provenance".into(), prov.into());
        }
        serde_json::to_string_pretty(&value).expect("report is serializable")
    }

    /// `token,pc1,pc2,logcount` with an empty logcount for tokens without counts.
    pub fn write_projection_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::invalid(format!("writing projection: {e}"));
        out.write_record(["token", "pc1", "pc2", "logcount"]).map_err(io)?;
        for p in &self.projection_2d {
            out.write_record([
                p.token.clone(),
                p.pc1.to_string(),
                p.pc2.to_string(),
                p.log_count.map(|l| l.to_string()).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        out.flush().map_err(|e| Error::io("projection.csv", e))
    }

    pub fn write_spectrum_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("spectrum.csv", e);
        writeln!(w, "index,singular_value").map_err(io)?;
        for (i, s) in self.singular_values.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, s).map_err(io)?;
        }
        Ok(())
    }
}
