//! Evaluation on word similarity, word analogy (3CosAdd) and semantic
//! textual similarity, plus the sweep over the number of removed directions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, Axis};

use crate::datasets::{AnalogyQuestion, StsPair};
use crate::diagnostics::{mean_vector, pearson};
use crate::embedding::{norm, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::par;
use crate::postprocess::{
    abtt_with_directions, conceptor_negation, weighted_removal, FingerprintCheck, RemovalModel,
};
use crate::spectral::{self, PrincipalDirections};
use crate::trainer::{fit_cached, LabeledPairSet, PairCache, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskKind {
    Similarity,
    Analogy,
    Sts,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Similarity => "similarity",
            TaskKind::Analogy => "analogy",
            TaskKind::Sts => "sts",
        })
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "similarity" => Ok(TaskKind::Similarity),
            "analogy" => Ok(TaskKind::Analogy),
            "sts" => Ok(TaskKind::Sts),
            other => Err(Error::invalid(format!("unknown task {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub task: TaskKind,
    pub dataset: String,
    /// Pearson r for similarity and STS, accuracy for analogy.
    pub metric: f64,
    /// Fraction of items whose tokens were usable.
    pub coverage: f64,
    /// Number of usable items.
    pub n: usize,
}

fn cosine(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> Option<f64> {
    let (na, nb) = (norm(a), norm(b));
    (na > 0.0 && nb > 0.0).then(|| (a.dot(&b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Pearson r between cosine similarities and scaled targets over the pairs
/// whose tokens are both in the vocabulary.
pub fn eval_similarity(
    matrix: &EmbeddingMatrix,
    pairs: &LabeledPairSet,
    dataset: &str,
) -> Result<EvalResult> {
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for p in pairs.pairs() {
        if let (Some(a), Some(b)) = (matrix.vector(&p.a), matrix.vector(&p.b)) {
            if let Some(c) = cosine(a, b) {
                pred.push(c);
                gold.push(p.target);
            }
        }
    }
    if pred.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{dataset}: {} usable pairs, need at least 2",
            pred.len()
        )));
    }
    let coverage = pred.len() as f64 / pairs.len() as f64;
    Ok(EvalResult {
        task: TaskKind::Similarity,
        dataset: dataset.to_string(),
        metric: pearson(&pred, &gold)?,
        coverage,
        n: pred.len(),
    })
}

/// Whether a vocabulary entry may be returned as an analogy answer:
/// wordpiece continuations (`##x`) and bracketed specials (`[CLS]`,
/// `[unused12]`, ...) are excluded.
pub fn is_analogy_candidate(token: &str) -> bool {
    !(token.starts_with("##") || (token.starts_with('[') && token.ends_with(']')))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyReport {
    /// One result per category, in first-appearance order.
    pub categories: Vec<EvalResult>,
    pub semantic: Option<EvalResult>,
    pub syntactic: Option<EvalResult>,
    pub overall: EvalResult,
}

impl AnalogyReport {
    pub fn aggregates(&self) -> Vec<EvalResult> {
        self.semantic
            .iter()
            .chain(&self.syntactic)
            .chain(std::iter::once(&self.overall))
            .cloned()
            .collect()
    }
}

const ANALOGY_BATCH: usize = 128;

/// 3CosAdd: the answer is the candidate `w` maximising
/// `cos(v(w), v(b) − v(a) + v(c))`, excluding the three query tokens.
pub fn eval_analogy(matrix: &EmbeddingMatrix, questions: &[AnalogyQuestion]) -> Result<AnalogyReport> {
    let vocab = matrix.vocab();
    let usable: Vec<(usize, [usize; 4])> = questions
        .iter()
        .enumerate()
        .filter_map(|(qi, q)| {
            let ids = [
                vocab.get(&q.a)?,
                vocab.get(&q.b)?,
                vocab.get(&q.c)?,
                vocab.get(&q.expected)?,
            ];
            Some((qi, ids))
        })
        .collect();
    if usable.is_empty() {
        return Err(Error::InsufficientData("no usable analogy questions".into()));
    }

    // Normalised rows; non-candidates and zero rows are zeroed and masked.
    let mut unit = matrix.data().to_owned();
    let mut candidate = vec![true; matrix.len()];
    for (i, mut row) in unit.axis_iter_mut(Axis(0)).enumerate() {
        let n = norm(row.view());
        if n == 0.0 || !is_analogy_candidate(vocab.token(i)) {
            row.fill(0.0);
            candidate[i] = false;
        } else {
            row.mapv_inplace(|x| x / n);
        }
    }

    let batches: Vec<&[(usize, [usize; 4])]> = usable.chunks(ANALOGY_BATCH).collect();
    let verdicts: Vec<Vec<bool>> = par::map_indexed(batches.len(), |bi| {
        let batch = batches[bi];
        let mut queries = Array2::zeros((matrix.dim(), batch.len()));
        for (j, (_, [a, b, c, _])) in batch.iter().enumerate() {
            let q = &matrix.row(*b) - &matrix.row(*a) + matrix.row(*c);
            queries.column_mut(j).assign(&q);
        }
        let scores = unit.dot(&queries);
        batch
            .iter()
            .enumerate()
            .map(|(j, (_, [a, b, c, expected]))| {
                let col = scores.column(j);
                let mut best = (f64::NEG_INFINITY, usize::MAX);
                for (w, &s) in col.iter().enumerate() {
                    if candidate[w] && w != *a && w != *b && w != *c && s > best.0 {
                        best = (s, w);
                    }
                }
                best.1 == *expected
            })
            .collect()
    });
    let correct: Vec<bool> = verdicts.into_iter().flatten().collect();

    #[derive(Default)]
    struct Tally {
        total: usize,
        usable: usize,
        correct: usize,
    }
    let mut order: Vec<String> = Vec::new();
    let mut by_cat: BTreeMap<String, (bool, Tally)> = BTreeMap::new();
    for q in questions {
        let entry = by_cat.entry(q.category.clone()).or_insert_with(|| {
            order.push(q.category.clone());
            (q.is_semantic, Tally::default())
        });
        entry.1.total += 1;
    }
    for ((qi, _), &ok) in usable.iter().zip(&correct) {
        let t = &mut by_cat.get_mut(&questions[*qi].category).expect("category seen").1;
        t.usable += 1;
        t.correct += usize::from(ok);
    }

    let result = |name: &str, t: &Tally| EvalResult {
        task: TaskKind::Analogy,
        dataset: name.to_string(),
        metric: t.correct as f64 / t.usable as f64,
        coverage: t.usable as f64 / t.total as f64,
        n: t.usable,
    };
    let mut sem = Tally::default();
    let mut syn = Tally::default();
    let mut categories = Vec::new();
    for name in &order {
        let (is_sem, t) = &by_cat[name];
        let agg = if *is_sem { &mut sem } else { &mut syn };
        agg.total += t.total;
        agg.usable += t.usable;
        agg.correct += t.correct;
        if t.usable > 0 {
            categories.push(result(name, t));
        }
    }
    let all = Tally {
        total: sem.total + syn.total,
        usable: sem.usable + syn.usable,
        correct: sem.correct + syn.correct,
    };
    Ok(AnalogyReport {
        categories,
        semantic: (sem.usable > 0).then(|| result("semantic", &sem)),
        syntactic: (syn.usable > 0).then(|| result("syntactic", &syn)),
        overall: result("all", &all),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tokenization {
    /// Lowercase, punctuation to spaces, whitespace split.
    #[default]
    Basic,
    /// Sentences are already space-joined wordpieces.
    Pretokenized,
}

impl FromStr for Tokenization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Tokenization::Basic),
            "pretokenized" => Ok(Tokenization::Pretokenized),
            other => Err(Error::invalid(format!("unknown tokenization {other:?}"))),
        }
    }
}

impl fmt::Display for Tokenization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tokenization::Basic => "basic",
            Tokenization::Pretokenized => "pretokenized",
        })
    }
}

pub fn tokenize(sentence: &str, mode: Tokenization) -> Vec<String> {
    match mode {
        Tokenization::Basic => sentence
            .to_lowercase()
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { ' ' })
            .collect::<String>()
            .split_whitespace()
            .map(str::to_string)
            .collect(),
        Tokenization::Pretokenized => sentence.split_whitespace().map(str::to_string).collect(),
    }
}

/// Mean of the in-vocabulary token vectors, or `None` when no token is known.
pub fn sentence_embedding<S: AsRef<str>>(tokens: &[S], matrix: &EmbeddingMatrix) -> Option<Array1<f64>> {
    let mut sum = Array1::zeros(matrix.dim());
    let mut count = 0usize;
    for t in tokens {
        if let Some(v) = matrix.vector(t.as_ref()) {
            sum += &v;
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}

/// Pearson r per year tag, in first-appearance order.
pub fn eval_sts(
    matrix: &EmbeddingMatrix,
    pairs: &[StsPair],
    mode: Tokenization,
) -> Result<Vec<EvalResult>> {
    let mut groups: Vec<(String, Vec<&StsPair>)> = Vec::new();
    for p in pairs {
        match groups.iter_mut().find(|(tag, _)| *tag == p.year_tag) {
            Some((_, g)) => g.push(p),
            None => groups.push((p.year_tag.clone(), vec![p])),
        }
    }
    if groups.is_empty() {
        return Err(Error::InsufficientData("no STS pairs".into()));
    }
    groups
        .into_iter()
        .map(|(tag, group)| {
            let scored = par::map_indexed(group.len(), |k| {
                let p = group[k];
                let a = sentence_embedding(&tokenize(&p.sentence_a, mode), matrix)?;
                let b = sentence_embedding(&tokenize(&p.sentence_b, mode), matrix)?;
                cosine(a.view(), b.view()).map(|c| (c, p.target))
            });
            let (pred, gold): (Vec<f64>, Vec<f64>) = scored.into_iter().flatten().unzip();
            if pred.len() < 2 {
                return Err(Error::InsufficientData(format!(
                    "STS {tag}: {} usable pairs, need at least 2",
                    pred.len()
                )));
            }
            Ok(EvalResult {
                task: TaskKind::Sts,
                dataset: tag,
                metric: pearson(&pred, &gold)?,
                coverage: pred.len() as f64 / group.len() as f64,
                n: pred.len(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Orig,
    Wr,
    Abtt,
    Cn,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Orig => "orig",
            Method::Wr => "wr",
            Method::Abtt => "abtt",
            Method::Cn => "cn",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orig" => Ok(Method::Orig),
            "wr" => Ok(Method::Wr),
            "abtt" => Ok(Method::Abtt),
            "cn" => Ok(Method::Cn),
            other => Err(Error::invalid(format!("unknown method {other:?}"))),
        }
    }
}

/// Everything an embedding is scored against.
#[derive(Debug, Clone, Default)]
pub struct EvalSuite {
    /// Similarity pairs, scored per source.
    pub similarity: LabeledPairSet,
    pub analogy: Vec<AnalogyQuestion>,
    pub sts: Vec<StsPair>,
    pub tokenization: Tokenization,
    /// Adds a `pooled` similarity row over all sources.
    pub pooled: bool,
}

pub const POOLED: &str = "pooled";

impl EvalSuite {
    /// Results for the requested tasks. Tasks without data are skipped.
    pub fn evaluate(&self, matrix: &EmbeddingMatrix, tasks: &[TaskKind]) -> Result<Vec<EvalResult>> {
        let mut out = Vec::new();
        for task in tasks {
            match task {
                TaskKind::Similarity if !self.similarity.is_empty() => {
                    for source in self.similarity.sources() {
                        out.push(eval_similarity(matrix, &self.similarity.from_source(&source), &source)?);
                    }
                    if self.pooled {
                        out.push(eval_similarity(matrix, &self.similarity, POOLED)?);
                    }
                }
                TaskKind::Analogy if !self.analogy.is_empty() => {
                    let report = eval_analogy(matrix, &self.analogy)?;
                    out.extend(report.categories.iter().cloned());
                    out.extend(report.aggregates());
                }
                TaskKind::Sts if !self.sts.is_empty() => {
                    out.extend(eval_sts(matrix, &self.sts, self.tokenization)?);
                }
                _ => log::warn!("no data for task {task}, skipped"),
            }
        }
        for r in out.iter().filter(|r| r.coverage < 1.0) {
            log::warn!(
                "{} {}: coverage {:.4}, not directly comparable with full-coverage results",
                r.task,
                r.dataset,
                r.coverage
            );
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub d_values: Vec<usize>,
    pub methods: Vec<Method>,
    pub tasks: Vec<TaskKind>,
    /// `d` is overwritten per sweep point.
    pub train: TrainConfig,
    pub remove_mean: bool,
    /// Take WR (and uncentered ABTT) directions from the mean-centered matrix.
    pub center: bool,
    pub aperture: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub d: usize,
    pub result: EvalResult,
}

#[derive(Debug, Clone)]
pub struct FittedPoint {
    pub d: usize,
    pub alphas: Vec<f64>,
    pub train_loss: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub fitted: Vec<FittedPoint>,
}

/// For every `d`: fit WR on `train_pairs`, apply WR and ABTT, and evaluate.
/// ORIG and CN do not depend on `d`; their results are repeated on every row.
pub fn sweep(
    matrix: &EmbeddingMatrix,
    train_pairs: &LabeledPairSet,
    suite: &EvalSuite,
    config: &SweepConfig,
) -> Result<SweepOutcome> {
    let Some(&d_max) = config.d_values.iter().max() else {
        return Err(Error::invalid("empty d list"));
    };
    if config.d_values.contains(&0) {
        return Err(Error::invalid("d values must be ≥ 1"));
    }
    let k_max = spectral::spectrum_len(matrix);
    if d_max > k_max {
        return Err(Error::invalid(format!("d = {d_max} exceeds {k_max} available directions")));
    }
    let wants = |m| config.methods.contains(&m);

    let uncentered = spectral::compute_directions_with(matrix, d_max, config.center)?;
    let centered = if wants(Method::Abtt) && config.remove_mean {
        let mu = mean_vector(matrix);
        Some((spectral::compute_directions_with(matrix, d_max, true)?, mu))
    } else {
        None
    };
    let cache = if wants(Method::Wr) {
        Some(PairCache::build(train_pairs, matrix, uncentered.directions())?)
    } else {
        None
    };

    let orig = if wants(Method::Orig) {
        Some(suite.evaluate(matrix, &config.tasks)?)
    } else {
        None
    };
    let cn = if wants(Method::Cn) {
        Some(suite.evaluate(&conceptor_negation(matrix, config.aperture)?, &config.tasks)?)
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut fitted = Vec::new();
    let mut push = |method, d, results: &[EvalResult]| {
        rows.extend(results.iter().map(|r| SweepRow {
            method,
            d,
            result: r.clone(),
        }))
    };
    for &d in &config.d_values {
        for &method in &config.methods {
            match method {
                Method::Orig => push(method, d, orig.as_deref().unwrap_or_default()),
                Method::Cn => push(method, d, cn.as_deref().unwrap_or_default()),
                Method::Abtt => {
                    let transformed = match &centered {
                        Some((dirs, mu)) => abtt_with_directions(matrix, dirs, d, Some(mu.view()))?,
                        None => abtt_with_directions(matrix, &uncentered, d, None)?,
                    };
                    push(method, d, &suite.evaluate(&transformed, &config.tasks)?);
                }
                Method::Wr => {
                    let cache = cache.as_ref().expect("cache built when WR requested");
                    let fit = fit_cached(cache, &TrainConfig { d, ..config.train.clone() })?;
                    log::info!("d = {d}: train loss {:.6}", fit.log.last().map_or(f64::NAN, |r| r.loss));
                    fitted.push(FittedPoint {
                        d,
                        alphas: fit.alphas.clone(),
                        train_loss: fit.log.last().map_or(f64::NAN, |r| r.loss),
                    });
                    let model = wr_model(&uncentered, fit.alphas, matrix.fingerprint())?;
                    let transformed = weighted_removal(matrix, &model, FingerprintCheck::Enforce)?;
                    push(method, d, &suite.evaluate(&transformed, &config.tasks)?);
                }
            }
        }
    }
    Ok(SweepOutcome { rows, fitted })
}

fn wr_model(dirs: &PrincipalDirections, alphas: Vec<f64>, fingerprint: u64) -> Result<RemovalModel> {
    RemovalModel::from_directions(dirs, alphas, fingerprint)
}

/// `method,d,task,dataset,metric,coverage,n` rows, `d` empty when not
/// applicable.
pub fn results_csv_row(method: Method, d: Option<usize>, r: &EvalResult) -> [String; 7] {
    [
        method.to_string(),
        d.map(|d| d.to_string()).unwrap_or_default(),
        r.task.to_string(),
        r.dataset.clone(),
        r.metric.to_string(),
        r.coverage.to_string(),
        r.n.to_string(),
    ]
}

pub const RESULTS_HEADER: [&str; 7] = ["method", "d", "task", "dataset", "metric", "coverage", "n"];
