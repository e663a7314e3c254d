use anyhow::{bail, ensure, Context, Result};
use isoforge::datasets::Manifest;
use isoforge::diagnostics::DiagnosticsReport;
use isoforge::eval::{self, EvalSuite, Method, SweepConfig, TaskKind, Tokenization};
use isoforge::postprocess::{self, FingerprintCheck};
use isoforge::spectral::compute_directions_with;
use isoforge::trainer::{self, LabeledPairSet};
use isoforge::{EmbeddingMatrix, RemovalModel};

use crate::output::{OutputDir, Provenance};
use crate::{
    ApplyArgs, Cli, Command, DiagnoseArgs, EvalArgs, EvalData, FitArgs, SplitArg, SweepArgs, TaskArg, TokenizationArg,
    TrainArgs, TransformArgs,
};

const ANALOGY_POLICY: &str =
    "3CosAdd on raw offsets; candidates exclude the query words, ## pieces and [bracketed] tokens; questions with OOV words skipped";

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Diagnose(a) => diagnose(a),
        Command::Fit(a) => fit(a),
        Command::Apply(a) => apply(a),
        Command::Eval(a) => evaluate(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn load_embedding(path: &std::path::Path, prov: &mut Provenance) -> Result<EmbeddingMatrix> {
    let m = EmbeddingMatrix::load(path).with_context(|| format!("loading embedding {}", path.display()))?;
    log::info!("{}: {} tokens x {} dims", path.display(), m.len(), m.dim());
    prov.push("embedding", path.display());
    prov.push("embedding_fingerprint", format!("{:016x}", m.fingerprint()));
    prov.push("threads", rayon::current_num_threads());
    Ok(m)
}

fn load_manifest(path: &std::path::Path, prov: &mut Provenance) -> Result<Manifest> {
    prov.push("manifest", path.display());
    Manifest::load(path).with_context(|| format!("loading manifest {}", path.display()))
}

fn record_train(prov: &mut Provenance, t: &TrainArgs) {
    prov.push("seed", t.seed);
    prov.push("learning_rate", t.learning_rate);
    prov.push("epochs", t.epochs);
    prov.push_opt("batch", t.batch);
    prov.push("init_alpha", t.init_alpha);
    prov.push("train_fraction", t.train_fraction);
}

fn diagnose(a: &DiagnoseArgs) -> Result<()> {
    let mut prov = Provenance::new("diagnose");
    let m = load_embedding(&a.embedding, &mut prov)?;
    let counts = match &a.counts {
        Some(p) => {
            prov.push("counts", p.display());
            Some(isoforge::FrequencyTable::load(p).with_context(|| format!("loading counts {}", p.display()))?)
        }
        None => {
            prov.push("counts", "none");
            None
        }
    };
    prov.push("center", a.center);
    let report = DiagnosticsReport::compute_with(&m, counts.as_ref(), a.center)?;

    let out = OutputDir::create(&a.output_dir)?;
    out.write("report.json", report.to_json(&prov.entries()))?;
    let mut projection = prov.comment_block().into_bytes();
    report.write_projection_csv(&mut projection)?;
    out.write("projection.csv", projection)?;
    let mut spectrum = prov.comment_block().into_bytes();
    report.write_spectrum_csv(&mut spectrum)?;
    out.write("spectrum.csv", spectrum)?;

    println!("mean_vector_norm     {:.6}", report.mean_vector_norm);
    println!("average_vector_norm  {:.6}", report.average_vector_norm);
    println!("average_cosine       {:.6}", report.average_cosine);
    if let Some(r) = report.norm_logfreq_pearson {
        println!("norm/logfreq pearson {r:.6}");
    }
    if let Some(r) = report.pc1_logfreq_pearson {
        println!("pc1/logfreq pearson  {r:.6}");
    }
    Ok(())
}

/// Similarity pairs restricted to the vocabulary, split into train and test.
fn training_split(m: &EmbeddingMatrix, manifest: &Manifest, t: &TrainArgs) -> Result<(LabeledPairSet, LabeledPairSet)> {
    let raw = manifest.load_similarity()?;
    let (kept, dropped) = raw.filter_to_vocab(m.vocab());
    for (source, n) in &dropped {
        log::info!("{source}: {n} pairs dropped as out-of-vocabulary");
    }
    ensure!(!kept.is_empty(), "no similarity pairs left after out-of-vocabulary filtering");
    let (train, test) = trainer::split_pairs(&kept, t.train_fraction, t.seed)?;
    ensure!(!train.is_empty(), "training split is empty (train fraction {})", t.train_fraction);
    log::info!("{} training pairs, {} held out", train.len(), test.len());
    Ok((train, test))
}

fn fit_model(
    m: &EmbeddingMatrix,
    train: &LabeledPairSet,
    d: usize,
    center: bool,
    t: &TrainArgs,
) -> Result<trainer::FitOutcome> {
    ensure!(d >= 1, "d must be at least 1");
    let dirs = compute_directions_with(m, d, center)?;
    Ok(trainer::fit(train, m, &dirs, &t.config(d))?)
}

fn fit(a: &FitArgs) -> Result<()> {
    let mut prov = Provenance::new("fit");
    let m = load_embedding(&a.embedding, &mut prov)?;
    let manifest = load_manifest(&a.manifest, &mut prov)?;
    prov.push("d", a.d);
    prov.push("center", a.center);
    record_train(&mut prov, &a.train);

    let (train, test) = training_split(&m, &manifest, &a.train)?;
    let outcome = fit_model(&m, &train, a.d, a.center, &a.train)?;
    let train_loss = outcome.final_loss();
    let test_loss = if test.is_empty() {
        None
    } else {
        Some(trainer::loss(&test, &m, &outcome.model)?)
    };
    prov.push("train_pairs", train.len());
    prov.push("test_pairs", test.len());

    let out = OutputDir::create(&a.output_dir)?;
    out.write("model.txt", outcome.model.to_text())?;
    let rows: Vec<Vec<String>> = outcome
        .log
        .iter()
        .map(|r| vec![r.epoch.to_string(), r.loss.to_string(), r.learning_rate.to_string()])
        .collect();
    out.write_csv("fit_log.csv", &prov, &["epoch", "loss", "lr"], &rows)?;
    out.write("provenance.json", prov.to_json())?;

    println!("train loss {train_loss:.6} ({} pairs)", train.len());
    match test_loss {
        Some(l) => println!("test loss  {l:.6} ({} pairs)", test.len()),
        None => println!("test loss  n/a (no held-out pairs)"),
    }
    let alphas: Vec<String> = outcome.model.alphas().iter().map(|x| format!("{x:.4}")).collect();
    println!("alphas     {}", alphas.join(" "));
    Ok(())
}

fn record_transform(prov: &mut Provenance, method: Method, t: &TransformArgs) {
    prov.push("method", method);
    prov.push_opt("d", t.d);
    match method {
        Method::Wr => {
            prov.push_opt("model", t.model.as_ref().map(|p| p.display().to_string()));
            prov.push("center", t.center);
            prov.push("override_fingerprint", t.override_fingerprint);
        }
        Method::Abtt => {
            prov.push("remove_mean", t.remove_mean);
            prov.push("center", t.center);
        }
        Method::Cn => prov.push("aperture", t.aperture),
        Method::Orig => {}
    }
}

/// The transformed matrix and the `d` it was built with, when applicable.
/// `train` supplies pairs for fitting WR weights when no model file is given.
fn transform(
    m: &EmbeddingMatrix,
    method: Method,
    t: &TransformArgs,
    train: Option<(&LabeledPairSet, &TrainArgs)>,
) -> Result<(EmbeddingMatrix, Option<usize>)> {
    let require_d = || t.d.context("--d is required for this method");
    match method {
        Method::Orig => Ok((m.with_data(m.data().to_owned())?, None)),
        Method::Cn => Ok((postprocess::conceptor_negation(m, t.aperture)?, None)),
        Method::Abtt => {
            let d = require_d()?;
            let out = if t.center && !t.remove_mean {
                let dirs = compute_directions_with(m, d, true)?;
                postprocess::abtt_with_directions(m, &dirs, d, None)?
            } else {
                postprocess::abtt(m, d, t.remove_mean)?
            };
            Ok((out, Some(d)))
        }
        Method::Wr => {
            let model = match (&t.model, train) {
                (Some(path), _) => {
                    RemovalModel::load(path).with_context(|| format!("loading model {}", path.display()))?
                }
                (None, Some((pairs, args))) => fit_model(m, pairs, require_d()?, t.center, args)?.model,
                (None, None) => bail!("--model is required for wr"),
            };
            let check = if t.override_fingerprint {
                FingerprintCheck::Override
            } else {
                FingerprintCheck::Enforce
            };
            let d = model.d();
            Ok((postprocess::weighted_removal(m, &model, check)?, Some(d)))
        }
    }
}

fn apply(a: &ApplyArgs) -> Result<()> {
    let mut prov = Provenance::new("apply");
    let m = load_embedding(&a.embedding, &mut prov)?;
    let method = Method::from(a.method);
    record_transform(&mut prov, method, &a.transform);
    let (out_matrix, _) = transform(&m, method, &a.transform, None)?;
    let out = OutputDir::create(&a.output_dir)?;
    let path = out.write(&a.output, out_matrix.to_text())?;
    out.write("provenance.json", prov.to_json())?;
    println!("wrote {} ({} tokens x {} dims)", path.display(), out_matrix.len(), out_matrix.dim());
    Ok(())
}

/// Builds the evaluation suite and task list for a manifest.
fn suite(
    manifest: &Manifest,
    data: &EvalData,
    split: SplitArg,
    held_out: Option<&LabeledPairSet>,
    prov: &mut Provenance,
) -> Result<(EvalSuite, Vec<TaskKind>)> {
    let available = |t: TaskArg| match t {
        TaskArg::Similarity => !manifest.similarity.is_empty(),
        TaskArg::Analogy => !manifest.analogy.is_empty(),
        TaskArg::Sts => !manifest.sts.is_empty(),
    };
    let tasks: Vec<TaskArg> = if data.task.is_empty() {
        [TaskArg::Similarity, TaskArg::Analogy, TaskArg::Sts]
            .into_iter()
            .filter(|&t| available(t))
            .collect()
    } else {
        for &t in &data.task {
            ensure!(available(t), "task {} requested but the manifest lists no dataset for it", TaskKind::from(t));
        }
        data.task.clone()
    };
    ensure!(!tasks.is_empty(), "manifest lists no datasets");

    let has_pretok = manifest.sts.iter().any(|e| e.pretokenized.is_some());
    let tokenization = match data.tokenization {
        TokenizationArg::Auto if has_pretok => Tokenization::Pretokenized,
        TokenizationArg::Auto | TokenizationArg::Basic => Tokenization::Basic,
        TokenizationArg::Pretokenized => {
            ensure!(
                !tasks.contains(&TaskArg::Sts) || manifest.sts.iter().all(|e| e.pretokenized.is_some()),
                "pretokenized STS requested but not every STS entry lists a pretokenized file"
            );
            Tokenization::Pretokenized
        }
    };

    let mut s = EvalSuite {
        tokenization,
        ..EvalSuite::default()
    };
    if tasks.contains(&TaskArg::Similarity) {
        s.similarity = match (split, held_out) {
            (SplitArg::Test, Some(test)) => test.clone(),
            (SplitArg::Test, None) => bail!("no held-out split available"),
            (SplitArg::All, _) => manifest.load_similarity()?,
        };
        ensure!(!s.similarity.is_empty(), "no similarity pairs to score");
    }
    if tasks.contains(&TaskArg::Analogy) {
        s.analogy = manifest.load_analogy()?;
    }
    if tasks.contains(&TaskArg::Sts) {
        s.sts = manifest.load_sts(tokenization == Tokenization::Pretokenized)?;
    }
    let tasks: Vec<TaskKind> = tasks.into_iter().map(TaskKind::from).collect();
    let names: Vec<String> = tasks.iter().map(ToString::to_string).collect();
    prov.push("tasks", names.join(","));
    prov.push("tokenization", tokenization);
    prov.push(
        "eval_split",
        match split {
            SplitArg::All => "all",
            SplitArg::Test => "test",
        },
    );
    if tasks.contains(&TaskKind::Analogy) {
        prov.push("analogy", ANALOGY_POLICY);
    }
    Ok((s, tasks))
}

fn needs_split(method: Method, t: &TransformArgs, split: SplitArg) -> bool {
    split == SplitArg::Test || (method == Method::Wr && t.model.is_none())
}

fn evaluate(a: &EvalArgs) -> Result<()> {
    let mut prov = Provenance::new("eval");
    let m = load_embedding(&a.embedding, &mut prov)?;
    let manifest = load_manifest(&a.data.manifest, &mut prov)?;
    let method = Method::from(a.method);
    record_transform(&mut prov, method, &a.transform);
    let split = if needs_split(method, &a.transform, a.eval_split) {
        record_train(&mut prov, &a.train);
        Some(training_split(&m, &manifest, &a.train)?)
    } else {
        None
    };
    let (mut suite, tasks) = suite(&manifest, &a.data, a.eval_split, split.as_ref().map(|s| &s.1), &mut prov)?;
    suite.pooled = a.pooled;
    prov.push("pooled", a.pooled);

    let (transformed, d) = transform(&m, method, &a.transform, split.as_ref().map(|s| (&s.0, &a.train)))?;
    let results = suite.evaluate(&transformed, &tasks)?;
    ensure!(!results.is_empty(), "no results produced");
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| eval::results_csv_row(method, d, r).to_vec())
        .collect();
    let out = OutputDir::create(&a.output_dir)?;
    out.write_csv("results.csv", &prov, &eval::RESULTS_HEADER, &rows)?;
    for r in &results {
        println!("{:<10} {:<24} {:.4}  (coverage {:.3}, n {})", r.task, r.dataset, r.metric, r.coverage, r.n);
    }
    Ok(())
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let mut prov = Provenance::new("sweep");
    let m = load_embedding(&a.embedding, &mut prov)?;
    let manifest = load_manifest(&a.data.manifest, &mut prov)?;
    ensure!(a.d.iter().all(|&d| d >= 1), "d values must be at least 1");
    let methods: Vec<Method> = a.method.iter().copied().map(Method::from).collect();
    let names: Vec<String> = methods.iter().map(ToString::to_string).collect();
    let ds: Vec<String> = a.d.iter().map(ToString::to_string).collect();
    prov.push("methods", names.join(","));
    prov.push("d_values", ds.join(","));
    prov.push("remove_mean", a.remove_mean);
    prov.push("center", a.center);
    prov.push("aperture", a.aperture);
    record_train(&mut prov, &a.train);

    let wants_wr = methods.contains(&Method::Wr);
    let split = if wants_wr || a.eval_split == SplitArg::Test {
        Some(training_split(&m, &manifest, &a.train)?)
    } else {
        None
    };
    let (mut suite, tasks) = suite(&manifest, &a.data, a.eval_split, split.as_ref().map(|s| &s.1), &mut prov)?;
    suite.pooled = true;
    let config = SweepConfig {
        d_values: a.d.clone(),
        methods,
        tasks,
        train: a.train.config(1),
        remove_mean: a.remove_mean,
        center: a.center,
        aperture: a.aperture,
    };
    let empty = LabeledPairSet::default();
    let train = split.as_ref().map_or(&empty, |s| &s.0);
    let outcome = eval::sweep(&m, train, &suite, &config)?;

    let rows: Vec<Vec<String>> = outcome
        .rows
        .iter()
        .map(|r| eval::results_csv_row(r.method, Some(r.d), &r.result).to_vec())
        .collect();
    let out = OutputDir::create(&a.output_dir)?;
    out.write_csv("sweep.csv", &prov, &eval::RESULTS_HEADER, &rows)?;
    if wants_wr {
        let weights: Vec<Vec<String>> = outcome
            .fitted
            .iter()
            .map(|f| {
                let alphas: Vec<String> = f.alphas.iter().map(ToString::to_string).collect();
                vec![f.d.to_string(), f.train_loss.to_string(), alphas.join(" ")]
            })
            .collect();
        out.write_csv("weights.csv", &prov, &["d", "train_loss", "alphas"], &weights)?;
    }
    println!("{} rows over {} d values", rows.len(), a.d.len());
    Ok(())
}
