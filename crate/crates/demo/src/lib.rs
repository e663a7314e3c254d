//! Browser demo. Generates a synthetic anisotropic point cloud and lets the
//! page re-run weighted removal, ABTT and conceptor negation on it, plotting
//! the result on the original top-2 principal axes.

use isoforge::diagnostics::{average_cosine, mean_vector, singular_spectrum};
use isoforge::embedding::norm;
use isoforge::postprocess::{abtt, conceptor_negation, weighted_removal, FingerprintCheck};
use isoforge::spectral::{compute_directions, PrincipalDirections};
use isoforge::{EmbeddingMatrix, RemovalModel};
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use wasm_bindgen::prelude::*;

/// Directions the page exposes a weight slider for.
pub const SLIDERS: usize = 4;

/// A transformed cloud as the page draws it.
#[wasm_bindgen]
pub struct View {
    coords: Vec<f64>,
    spectrum: Vec<f64>,
    average_cosine: f64,
    mean_norm: f64,
}

#[wasm_bindgen]
impl View {
    /// Interleaved `x0, y0, x1, y1, ...` on the original PC1/PC2 axes.
    #[wasm_bindgen(getter)]
    pub fn coords(&self) -> Vec<f64> {
        self.coords.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn spectrum(&self) -> Vec<f64> {
        self.spectrum.clone()
    }

    #[wasm_bindgen(getter, js_name = averageCosine)]
    pub fn average_cosine(&self) -> f64 {
        self.average_cosine
    }

    #[wasm_bindgen(getter, js_name = meanNorm)]
    pub fn mean_norm(&self) -> f64 {
        self.mean_norm
    }
}

#[wasm_bindgen]
pub struct Demo {
    matrix: EmbeddingMatrix,
    directions: PrincipalDirections,
}

fn js_err(e: isoforge::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Demo {
    /// `points` vectors in `dim` dimensions. Every vector shares a common
    /// offset of length `offset`, and per-axis noise decays with the axis
    /// index, so a few directions dominate.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64, points: usize, dim: usize, offset: f64) -> Result<Demo, JsError> {
        if points < 2 || dim < 2 {
            return Err(JsError::new("need at least 2 points in 2 dimensions"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        let mut common: Array1<f64> = (0..dim).map(|_| unit.sample(&mut rng)).collect();
        common *= offset / norm(common.view()).max(f64::MIN_POSITIVE);
        let mut data = Array2::zeros((points, dim));
        for mut row in data.rows_mut() {
            for (j, x) in row.iter_mut().enumerate() {
                let scale = 1.0 / (1.0 + j as f64);
                *x = common[j] + scale * unit.sample(&mut rng);
            }
        }
        let tokens = (0..points).map(|i| format!("p{i}")).collect();
        let vocab = isoforge::Vocabulary::new(tokens).map_err(js_err)?;
        let matrix = EmbeddingMatrix::new(vocab, data).map_err(js_err)?;
        let directions = compute_directions(&matrix, SLIDERS.min(dim)).map_err(js_err)?;
        Ok(Demo { matrix, directions })
    }

    #[wasm_bindgen(getter)]
    pub fn sliders(&self) -> usize {
        self.directions.len()
    }

    /// The untouched cloud.
    pub fn original(&self) -> View {
        self.view(&self.matrix)
    }

    /// Weighted removal with one weight per slider direction.
    #[wasm_bindgen(js_name = weightedRemoval)]
    pub fn weighted_removal(&self, alphas: &[f64]) -> Result<View, JsError> {
        if alphas.len() != self.directions.len() {
            return Err(JsError::new(&format!(
                "expected {} weights, got {}",
                self.directions.len(),
                alphas.len()
            )));
        }
        let model = RemovalModel::from_directions(&self.directions, alphas.to_vec(), self.matrix.fingerprint())
            .map_err(js_err)?;
        let out = weighted_removal(&self.matrix, &model, FingerprintCheck::Enforce).map_err(js_err)?;
        Ok(self.view(&out))
    }

    /// ABTT with the top `d` directions removed.
    pub fn abtt(&self, d: usize, remove_mean: bool) -> Result<View, JsError> {
        let out = abtt(&self.matrix, d, remove_mean).map_err(js_err)?;
        Ok(self.view(&out))
    }

    pub fn conceptor(&self, aperture: f64) -> Result<View, JsError> {
        let out = conceptor_negation(&self.matrix, aperture).map_err(js_err)?;
        Ok(self.view(&out))
    }
}

impl Demo {
    fn view(&self, m: &EmbeddingMatrix) -> View {
        let axes = self.directions.directions();
        let mut coords = Vec::with_capacity(2 * m.len());
        for row in m.rows() {
            coords.push(row.dot(&axes.row(0)));
            coords.push(row.dot(&axes.row(1)));
        }
        View {
            coords,
            spectrum: singular_spectrum(m),
            // Rows removed entirely have no direction; report NaN.
            average_cosine: average_cosine(m).unwrap_or(f64::NAN),
            mean_norm: norm(mean_vector(m).view()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> Demo {
        Demo::new(3, 300, 12, 4.0).unwrap()
    }

    #[test]
    fn cloud_is_anisotropic() {
        let v = demo().original();
        assert!(v.average_cosine > 0.5, "{}", v.average_cosine);
        assert_eq!(v.coords.len(), 600);
        assert!(v.spectrum.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn removal_reduces_anisotropy() {
        let d = demo();
        let before = d.original();
        let after = d.weighted_removal(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(after.average_cosine < before.average_cosine / 2.0);
        assert!(after.mean_norm < before.mean_norm);
        // PC1 coordinate is gone.
        assert!(after.coords.iter().step_by(2).all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn zero_weights_are_identity() {
        let d = demo();
        let a = d.original();
        let b = d.weighted_removal(&[0.0; SLIDERS]).unwrap();
        assert_eq!(a.coords, b.coords);
    }

    #[test]
    fn baselines_run() {
        let d = demo();
        let abtt = d.abtt(2, true).unwrap();
        assert!(abtt.mean_norm < 1e-9);
        let cn = d.conceptor(2.0).unwrap();
        assert!(cn.spectrum[0] < d.original().spectrum[0]);
    }
}
