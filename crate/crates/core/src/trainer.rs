//! Learning per-direction removal weights from word-similarity supervision.
//!
//! The prediction for a pair is the cosine of the two transformed vectors and
//! the objective is the mean squared error against the scaled human score.
//!
//! Writing `cᵢ = uᵢᵀv` and `r = v − Σ cᵢuᵢ`, the transformed vector is
//! `v' = r + Σ (1 − αᵢ) cᵢ uᵢ`, so with `βᵢ = (1 − αᵢ)²`:
//!
//! ```text
//! v'ₐᵀv'ᵦ = rₐᵀrᵦ + Σ βᵢ cₐᵢ cᵦᵢ      ‖v'ₐ‖² = ‖rₐ‖² + Σ βᵢ cₐᵢ²
//! ```
//!
//! Every pair therefore reduces to a handful of scalars plus two coefficient
//! vectors, and loss and gradient cost `O(d)` per pair. Note that
//! `∂L/∂αᵢ = −2(1 − αᵢ) ∂L/∂βᵢ` vanishes at `αᵢ = 1` and the loss is symmetric
//! under `αᵢ ↦ 2 − αᵢ`.

use std::collections::BTreeMap;

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::{normalize, EmbeddingMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::par;
use crate::postprocess::RemovalModel;
use crate::spectral::PrincipalDirections;

/// Maps a raw annotation on `[scale_min, scale_max]` affinely onto `[-1, 1]`.
/// Out-of-range scores are clamped with a warning.
pub fn scale_annotations(raw: f64, scale_min: f64, scale_max: f64) -> Result<f64> {
    if scale_min.partial_cmp(&scale_max) != Some(std::cmp::Ordering::Less) {
        return Err(Error::invalid(format!(
            "scale range [{scale_min}, {scale_max}] is empty"
        )));
    }
    if !raw.is_finite() {
        return Err(Error::invalid(format!("non-finite score {raw}")));
    }
    let clamped = raw.clamp(scale_min, scale_max);
    if clamped != raw {
        log::warn!("score {raw} outside [{scale_min}, {scale_max}], clamped");
    }
    Ok(2.0 * (clamped - scale_min) / (scale_max - scale_min) - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub a: String,
    pub b: String,
    pub target: f64,
    pub source: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledPairSet {
    pairs: Vec<LabeledPair>,
}

impl LabeledPairSet {
    pub fn new(pairs: Vec<LabeledPair>) -> Result<Self> {
        if let Some(p) = pairs.iter().find(|p| !(-1.0..=1.0).contains(&p.target)) {
            return Err(Error::invalid(format!(
                "target {} for ({}, {}) outside [-1, 1]",
                p.target, p.a, p.b
            )));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[LabeledPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn extend(&mut self, other: LabeledPairSet) {
        self.pairs.extend(other.pairs);
    }

    /// Drops pairs with any token missing from `vocab`. Returns the kept set
    /// and the number of dropped pairs per source dataset.
    pub fn filter_to_vocab(&self, vocab: &Vocabulary) -> (LabeledPairSet, BTreeMap<String, usize>) {
        let mut dropped = BTreeMap::new();
        let kept = self
            .pairs
            .iter()
            .filter(|p| {
                let ok = vocab.contains(&p.a) && vocab.contains(&p.b);
                if !ok {
                    *dropped.entry(p.source.clone()).or_insert(0) += 1;
                }
                ok
            })
            .cloned()
            .collect();
        for (source, n) in &dropped {
            log::info!("{source}: dropped {n} out-of-vocabulary pairs");
        }
        (LabeledPairSet { pairs: kept }, dropped)
    }

    /// Pairs from a single source dataset.
    pub fn from_source(&self, source: &str) -> LabeledPairSet {
        LabeledPairSet {
            pairs: self.pairs.iter().filter(|p| p.source == source).cloned().collect(),
        }
    }

    /// Source tags in first-appearance order.
    pub fn sources(&self) -> Vec<String> {
        let mut seen = Vec::<String>::new();
        for p in &self.pairs {
            if !seen.contains(&p.source) {
                seen.push(p.source.clone());
            }
        }
        seen
    }
}

impl FromIterator<LabeledPair> for LabeledPairSet {
    fn from_iter<I: IntoIterator<Item = LabeledPair>>(iter: I) -> Self {
        Self {
            pairs: iter.into_iter().collect(),
        }
    }
}

/// Uniform random split into `(train, test)` with `round(fraction · n)`
/// training pairs. Deterministic for a fixed seed.
pub fn split_pairs(
    pairs: &LabeledPairSet,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledPairSet, LabeledPairSet)> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData("cannot split an empty pair set".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((train_fraction * pairs.len() as f64).round() as usize).min(pairs.len());
    let pick = |idx: &[usize]| LabeledPairSet {
        pairs: idx.iter().map(|&i| pairs.pairs[i].clone()).collect(),
    };
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

/// Cosine of the two transformed vectors.
pub fn predict_similarity(
    token_a: &str,
    token_b: &str,
    matrix: &EmbeddingMatrix,
    model: &RemovalModel,
) -> Result<f64> {
    let lookup = |t: &str| {
        matrix
            .vector(t)
            .ok_or_else(|| Error::OutOfVocabulary(t.to_string()))
    };
    let va = normalize(model.transform(lookup(token_a)?)?.view())?;
    let vb = normalize(model.transform(lookup(token_b)?)?.view())?;
    Ok(va.dot(&vb).clamp(-1.0, 1.0))
}

/// Per-pair scalars and projection coefficients for fast loss and gradient
/// evaluation over any prefix of the stored directions.
#[derive(Debug, Clone)]
pub struct PairCache {
    d_max: usize,
    entries: Vec<PairEntry>,
}

#[derive(Debug, Clone)]
struct PairEntry {
    dot: f64,
    norm2_a: f64,
    norm2_b: f64,
    coef_a: Vec<f64>,
    coef_b: Vec<f64>,
    target: f64,
}

impl PairCache {
    /// `directions` holds one direction per row.
    pub fn build(
        pairs: &LabeledPairSet,
        matrix: &EmbeddingMatrix,
        directions: ArrayView2<'_, f64>,
    ) -> Result<Self> {
        if directions.ncols() != matrix.dim() {
            return Err(Error::DimensionMismatch {
                expected: matrix.dim(),
                actual: directions.ncols(),
            });
        }
        let entries = pairs
            .pairs()
            .iter()
            .map(|p| {
                let va = matrix
                    .vector(&p.a)
                    .ok_or_else(|| Error::OutOfVocabulary(p.a.clone()))?;
                let vb = matrix
                    .vector(&p.b)
                    .ok_or_else(|| Error::OutOfVocabulary(p.b.clone()))?;
                Ok(PairEntry {
                    dot: va.dot(&vb),
                    norm2_a: va.dot(&va),
                    norm2_b: vb.dot(&vb),
                    coef_a: directions.dot(&va).to_vec(),
                    coef_b: directions.dot(&vb).to_vec(),
                    target: p.target,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d_max: directions.nrows(),
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// Predicted similarities for weights over the leading `alphas.len()`
    /// directions.
    pub fn predictions(&self, alphas: &[f64]) -> Result<Vec<f64>> {
        self.check_d(alphas.len())?;
        let beta: Vec<f64> = alphas.iter().map(|a| (1.0 - a) * (1.0 - a)).collect();
        par::map_indexed(self.entries.len(), |k| {
            self.entries[k].terms(&beta).map(|t| t.similarity)
        })
        .into_iter()
        .collect()
    }

    pub fn loss(&self, alphas: &[f64]) -> Result<f64> {
        self.loss_and_gradient_inner(alphas, false).map(|(l, _)| l)
    }

    /// Loss and `∂L/∂αᵢ`.
    pub fn loss_and_gradient(&self, alphas: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.loss_and_gradient_inner(alphas, true)
    }

    /// Loss and gradient restricted to pair indices `subset`.
    fn loss_and_gradient_on(&self, alphas: &[f64], subset: &[usize]) -> Result<(f64, Vec<f64>)> {
        self.check_d(alphas.len())?;
        if subset.is_empty() {
            return Err(Error::InsufficientData("empty pair set".into()));
        }
        let d = alphas.len();
        let beta: Vec<f64> = alphas.iter().map(|a| (1.0 - a) * (1.0 - a)).collect();
        let per_pair = par::map_indexed(subset.len(), |k| {
            let e = &self.entries[subset[k]];
            let t = e.terms(&beta)?;
            let err = t.similarity - e.target;
            let mut grad = vec![0.0; d];
            // ∂S/∂βᵢ = cₐcᵦ/√(AB) − S/2 (cₐ²/A + cᵦ²/B)
            let inv_ab = 1.0 / (t.norm2_a * t.norm2_b).sqrt();
            for i in 0..d {
                let (ca, cb) = (e.coef_a[i], e.coef_b[i]);
                let ds_dbeta = ca * cb * inv_ab
                    - 0.5 * t.similarity * (ca * ca / t.norm2_a + cb * cb / t.norm2_b);
                grad[i] = 2.0 * err * ds_dbeta * (-2.0 * (1.0 - alphas[i]));
            }
            Ok((err * err, grad))
        });
        let n = subset.len() as f64;
        let mut losses = Vec::with_capacity(subset.len());
        let mut grad = vec![0.0; d];
        for item in per_pair {
            let (l, g) = item?;
            losses.push(l);
            for (acc, x) in grad.iter_mut().zip(g) {
                *acc += x;
            }
        }
        grad.iter_mut().for_each(|g| *g /= n);
        Ok((par::ordered_sum(&losses) / n, grad))
    }

    fn loss_and_gradient_inner(&self, alphas: &[f64], want_grad: bool) -> Result<(f64, Vec<f64>)> {
        if self.entries.is_empty() {
            return Err(Error::InsufficientData("empty pair set".into()));
        }
        if want_grad {
            let all: Vec<usize> = (0..self.entries.len()).collect();
            return self.loss_and_gradient_on(alphas, &all);
        }
        let preds = self.predictions(alphas)?;
        let sq: Vec<f64> = preds
            .iter()
            .zip(&self.entries)
            .map(|(p, e)| (p - e.target) * (p - e.target))
            .collect();
        Ok((par::ordered_sum(&sq) / sq.len() as f64, Vec::new()))
    }

    fn check_d(&self, d: usize) -> Result<()> {
        if d > self.d_max {
            return Err(Error::invalid(format!(
                "{d} weights but only {} cached directions",
                self.d_max
            )));
        }
        Ok(())
    }
}

struct PairTerms {
    similarity: f64,
    norm2_a: f64,
    norm2_b: f64,
}

impl PairEntry {
    fn terms(&self, beta: &[f64]) -> Result<PairTerms> {
        let (mut dot, mut na, mut nb) = (self.dot, self.norm2_a, self.norm2_b);
        for (i, &b) in beta.iter().enumerate() {
            let (ca, cb) = (self.coef_a[i], self.coef_b[i]);
            dot += (b - 1.0) * ca * cb;
            na += (b - 1.0) * ca * ca;
            nb += (b - 1.0) * cb * cb;
        }
        let (na, nb) = (na.max(0.0), nb.max(0.0));
        let scale = 1e-24 * self.norm2_a.max(self.norm2_b).max(f64::MIN_POSITIVE);
        if na <= scale || nb <= scale {
            return Err(Error::ZeroVector);
        }
        Ok(PairTerms {
            similarity: (dot / (na * nb).sqrt()).clamp(-1.0, 1.0),
            norm2_a: na,
            norm2_b: nb,
        })
    }
}

/// Mean squared error between predicted and target similarity.
pub fn loss(pairs: &LabeledPairSet, matrix: &EmbeddingMatrix, model: &RemovalModel) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData("loss over an empty pair set".into()));
    }
    PairCache::build(pairs, matrix, model.directions())?.loss(model.alphas())
}

/// Analytic `∂L/∂αᵢ` for every weight of `model`.
pub fn loss_gradient(
    pairs: &LabeledPairSet,
    matrix: &EmbeddingMatrix,
    model: &RemovalModel,
) -> Result<Vec<f64>> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData("gradient over an empty pair set".into()));
    }
    PairCache::build(pairs, matrix, model.directions())?
        .loss_and_gradient(model.alphas())
        .map(|(_, g)| g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub d: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// `None` trains full-batch.
    pub batch: Option<usize>,
    pub seed: u64,
    pub init_alpha: f64,
}

impl TrainConfig {
    pub const DEFAULT_LEARNING_RATE: f64 = 1.0;
    pub const DEFAULT_EPOCHS: usize = 500;
    pub const DEFAULT_INIT_ALPHA: f64 = 0.5;
    pub const DEFAULT_SEED: u64 = 42;

    pub fn new(d: usize) -> Self {
        Self {
            d,
            learning_rate: Self::DEFAULT_LEARNING_RATE,
            epochs: Self::DEFAULT_EPOCHS,
            batch: None,
            seed: Self::DEFAULT_SEED,
            init_alpha: Self::DEFAULT_INIT_ALPHA,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("d must be ≥ 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.batch == Some(0) {
            return Err(Error::invalid("batch size must be positive"));
        }
        if !self.init_alpha.is_finite() {
            return Err(Error::invalid("init_alpha must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub learning_rate: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: RemovalModel,
    /// Epoch 0 is the initial loss. Non-increasing.
    pub log: Vec<EpochRecord>,
}

impl FitOutcome {
    pub fn final_loss(&self) -> f64 {
        self.log.last().map(|r| r.loss).unwrap_or(f64::NAN)
    }

    /// `epoch,loss,lr`.
    pub fn log_csv(&self) -> String {
        let mut out = String::from("epoch,loss,lr\n");
        for r in &self.log {
            out.push_str(&format!("{},{},{}\n", r.epoch, r.loss, r.learning_rate));
        }
        out
    }
}

const DIVERGENCE_LOSS: f64 = 1e3;
const MIN_LEARNING_RATE: f64 = 1e-12;
const LEARNING_RATE_GROWTH: f64 = 1.2;

/// Gradient descent on the removal weights.
///
/// After every epoch the full training loss is compared with the previous
/// epoch; on an increase the step is undone and the learning rate halved,
/// so the recorded loss trajectory never increases. After each accepted
/// epoch the rate grows by a factor of 1.2.
///
/// The loss depends on each weight only through `(1 − αᵢ)²`, so `αᵢ` and
/// `2 − αᵢ` are equivalent (they differ by a reflection along `uᵢ`). Fitted
/// weights are reported in the canonical range `αᵢ ≤ 1`.
pub fn fit(
    train_pairs: &LabeledPairSet,
    matrix: &EmbeddingMatrix,
    directions: &PrincipalDirections,
    config: &TrainConfig,
) -> Result<FitOutcome> {
    config.validate()?;
    if train_pairs.is_empty() {
        return Err(Error::InsufficientData("no training pairs".into()));
    }
    if config.d > directions.len() {
        return Err(Error::invalid(format!(
            "d = {} exceeds the {} available directions",
            config.d,
            directions.len()
        )));
    }
    let top = directions.top(config.d)?;
    let cache = PairCache::build(train_pairs, matrix, top.directions())?;
    let alphas = fit_cached(&cache, config)?;
    let model = RemovalModel::new(
        alphas.alphas,
        top.directions().to_owned(),
        matrix.fingerprint(),
    )?;
    Ok(FitOutcome {
        model,
        log: alphas.log,
    })
}

pub struct CachedFit {
    pub alphas: Vec<f64>,
    pub log: Vec<EpochRecord>,
}

/// [`fit`] over a prebuilt cache, using its leading `config.d` directions.
pub fn fit_cached(cache: &PairCache, config: &TrainConfig) -> Result<CachedFit> {
    config.validate()?;
    if cache.is_empty() {
        return Err(Error::InsufficientData("no training pairs".into()));
    }
    let d = config.d;
    let mut alphas = vec![config.init_alpha; d];
    let mut lr = config.learning_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let all: Vec<usize> = (0..cache.len()).collect();

    let (mut current, mut grad) = cache.loss_and_gradient_on(&alphas, &all)?;
    check_divergence(0, current)?;
    let mut log = vec![EpochRecord {
        epoch: 0,
        loss: current,
        learning_rate: lr,
    }];

    for epoch in 1..=config.epochs {
        if grad.iter().all(|g| g.abs() < 1e-15) && config.batch.is_none() {
            break;
        }
        loop {
            let candidate = match config.batch {
                None => step(&alphas, &grad, lr),
                Some(size) => {
                    let mut order = all.clone();
                    order.shuffle(&mut rng);
                    let mut a = alphas.clone();
                    for chunk in order.chunks(size) {
                        let (_, g) = cache.loss_and_gradient_on(&a, chunk)?;
                        a = step(&a, &g, lr);
                    }
                    a
                }
            };
            let (cand_loss, cand_grad) = match cache.loss_and_gradient_on(&candidate, &all) {
                Ok(v) => v,
                // Transformed vector collapsed to zero: treat as an increase.
                Err(Error::ZeroVector) => (f64::INFINITY, Vec::new()),
                Err(e) => return Err(e),
            };
            if cand_loss.is_finite() {
                check_divergence(epoch, cand_loss)?;
            }
            if cand_loss <= current {
                alphas = candidate;
                current = cand_loss;
                grad = cand_grad;
                break;
            }
            lr *= 0.5;
            if lr < MIN_LEARNING_RATE {
                break;
            }
        }
        log.push(EpochRecord {
            epoch,
            loss: current,
            learning_rate: lr,
        });
        if lr < MIN_LEARNING_RATE {
            break;
        }
        lr *= LEARNING_RATE_GROWTH;
    }
    for a in &mut alphas {
        if *a > 1.0 {
            *a = 2.0 - *a;
        }
    }
    Ok(CachedFit { alphas, log })
}

fn step(alphas: &[f64], grad: &[f64], lr: f64) -> Vec<f64> {
    alphas.iter().zip(grad).map(|(a, g)| a - lr * g).collect()
}

fn check_divergence(epoch: usize, loss: f64) -> Result<()> {
    if !loss.is_finite() || loss > DIVERGENCE_LOSS {
        return Err(Error::Diverged { epoch, loss });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn pair(a: &str, b: &str, target: f64) -> LabeledPair {
        LabeledPair {
            a: a.into(),
            b: b.into(),
            target,
            source: "test".into(),
        }
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(scale_annotations(50.0, 0.0, 50.0).unwrap(), 1.0);
        assert_eq!(scale_annotations(5.0, 0.0, 10.0).unwrap(), 0.0);
        assert_eq!(scale_annotations(0.0, 0.0, 4.0).unwrap(), -1.0);
        assert_eq!(scale_annotations(11.0, 0.0, 10.0).unwrap(), 1.0);
        assert!(scale_annotations(1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn split_counts_and_determinism() {
        let set: LabeledPairSet = (0..10).map(|i| pair(&format!("a{i}"), "b", 0.0)).collect();
        let (train, test) = split_pairs(&set, 0.7, 1).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
        for p in test.pairs() {
            assert!(!train.pairs().contains(p));
        }
        let (train2, _) = split_pairs(&set, 0.7, 1).unwrap();
        assert_eq!(train, train2);
        assert!(split_pairs(&LabeledPairSet::default(), 0.7, 1).is_err());
        assert!(split_pairs(&set, 1.0, 1).is_err());
    }

    #[test]
    fn different_seeds_differ() {
        let set: LabeledPairSet = (0..1000).map(|i| pair(&format!("a{i}"), "b", 0.0)).collect();
        let (a, _) = split_pairs(&set, 0.7, 1).unwrap();
        let (b, _) = split_pairs(&set, 0.7, 2).unwrap();
        assert_ne!(a, b);
    }

    fn axis_fixture() -> (EmbeddingMatrix, RemovalModel) {
        // v(a) = u1 + x, v(b) = u1 - x with u1 = e1, x = e2.
        let m = EmbeddingMatrix::from_rows(vec![
            ("a", vec![1.0, 1.0, 0.0]),
            ("b", vec![1.0, -1.0, 0.0]),
            ("c", vec![0.0, 0.0, 2.0]),
        ])
        .unwrap();
        let model = RemovalModel::new(vec![1.0], array![[1.0, 0.0, 0.0]], m.fingerprint()).unwrap();
        (m, model)
    }

    #[test]
    fn predict_examples() {
        let (m, model) = axis_fixture();
        assert!((predict_similarity("a", "a", &m, &model).unwrap() - 1.0).abs() < 1e-12);
        assert!((predict_similarity("a", "b", &m, &model).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(
            predict_similarity("a", "zzz", &m, &model),
            Err(Error::OutOfVocabulary(_))
        ));
        let collapse = EmbeddingMatrix::from_rows(vec![("u", vec![1.0, 0.0]), ("w", vec![0.0, 1.0])]).unwrap();
        let remove_all = RemovalModel::new(vec![1.0], array![[1.0, 0.0]], 0).unwrap();
        assert!(matches!(
            predict_similarity("u", "w", &collapse, &remove_all),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn loss_examples() {
        let (m, model) = axis_fixture();
        // S(a, b) = -1, S(a, c) = 0.
        let perfect: LabeledPairSet = vec![pair("a", "b", -1.0), pair("a", "c", 0.0)].into_iter().collect();
        assert!(loss(&perfect, &m, &model).unwrap() < 1e-24);
        let g = loss_gradient(&perfect, &m, &model).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-10));

        let half = EmbeddingMatrix::from_rows(vec![
            ("x", vec![0.0, 1.0, 0.0]),
            ("y", vec![0.0, 0.5, 0.75f64.sqrt()]),
        ])
        .unwrap();
        let off: LabeledPairSet = vec![pair("x", "y", -0.5)].into_iter().collect();
        assert!((loss(&off, &half, &model).unwrap() - 1.0).abs() < 1e-12);

        let two: LabeledPairSet = vec![pair("a", "b", -0.9), pair("a", "c", 0.3)].into_iter().collect();
        assert!((loss(&two, &m, &model).unwrap() - 0.05).abs() < 1e-12);

        assert!(loss(&LabeledPairSet::default(), &m, &model).is_err());
    }

    #[test]
    fn zero_coefficient_pair_has_no_gradient() {
        let m = EmbeddingMatrix::from_rows(vec![
            ("p", vec![0.0, 1.0, 0.0]),
            ("q", vec![0.0, 0.3, 1.0]),
            ("r", vec![1.0, 0.2, 0.0]),
        ])
        .unwrap();
        let model = RemovalModel::new(vec![0.3], array![[1.0, 0.0, 0.0]], 0).unwrap();
        let set: LabeledPairSet = vec![pair("p", "q", 0.9)].into_iter().collect();
        assert_eq!(loss_gradient(&set, &m, &model).unwrap(), vec![0.0]);
    }

    #[test]
    fn zero_epochs_keep_init() {
        let (m, _) = axis_fixture();
        let dirs = crate::spectral::compute_directions(&m, 2).unwrap();
        let set: LabeledPairSet = vec![pair("a", "b", 0.2)].into_iter().collect();
        let cfg = TrainConfig {
            epochs: 0,
            init_alpha: 1.0,
            ..TrainConfig::new(2)
        };
        let out = fit(&set, &m, &dirs, &cfg).unwrap();
        assert_eq!(out.model.alphas(), &[1.0, 1.0]);
        assert_eq!(out.log.len(), 1);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let (m, _) = axis_fixture();
        let dirs = crate::spectral::compute_directions(&m, 2).unwrap();
        let set: LabeledPairSet = vec![pair("a", "b", 0.2)].into_iter().collect();
        assert!(fit(&LabeledPairSet::default(), &m, &dirs, &TrainConfig::new(1)).is_err());
        assert!(fit(&set, &m, &dirs, &TrainConfig::new(3)).is_err());
        assert!(fit(&set, &m, &dirs, &TrainConfig { learning_rate: 0.0, ..TrainConfig::new(1) }).is_err());
    }

    #[test]
    fn oov_filtering_counts_per_source() {
        let vocab = Vocabulary::new(vec!["a".into(), "b".into()]).unwrap();
        let mut p = pair("a", "zz", 0.0);
        p.source = "men".into();
        let set: LabeledPairSet = vec![pair("a", "b", 0.0), p].into_iter().collect();
        let (kept, dropped) = set.filter_to_vocab(&vocab);
        assert_eq!(kept.len(), 1);
        assert_eq!(dropped.get("men"), Some(&1));
    }
}
