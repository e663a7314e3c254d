mod common;

use common::*;
use isoforge::diagnostics::{average_cosine, pearson};
use isoforge::postprocess::{abtt, weighted_removal, FingerprintCheck};
use isoforge::spectral::{compute_directions, compute_directions_with};
use isoforge::trainer::{self, LabeledPair, LabeledPairSet, TrainConfig};
use isoforge::{EmbeddingMatrix, Error, RemovalModel};
use rand::Rng;

fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn dense_directions(m: &EmbeddingMatrix, k: usize) -> Dense {
    compute_directions(m, k)
        .unwrap()
        .directions()
        .rows()
        .into_iter()
        .map(|r| r.to_vec())
        .collect()
}

#[test]
fn weighted_removal_matches_step_by_step() {
    let mut rng = rng(1);
    let rows = anisotropic_dense(&mut rng, 60, 9, 1.0);
    let m = to_matrix(&rows);
    let dirs = dense_directions(&m, 4);
    let alphas = [0.9, -0.3, 0.5, 1.4];
    let model = RemovalModel::from_directions(&compute_directions(&m, 4).unwrap(), alphas.to_vec(), m.fingerprint()).unwrap();
    let got = from_matrix(&weighted_removal(&m, &model, FingerprintCheck::Enforce).unwrap());
    let expected: Dense = rows.iter().map(|v| remove_step_by_step(v, &dirs, &alphas)).collect();
    assert!(max_abs_diff(&got, &expected) < 1e-12);
}

#[test]
fn directions_are_gram_eigenvectors() {
    let mut rng = rng(2);
    let rows = random_dense(&mut rng, 50, 8);
    let m = to_matrix(&rows);
    let gram = matmul(&transpose(&rows), &rows);
    let eig = jacobi_eigenvalues(&gram);
    let p = compute_directions(&m, 8).unwrap();
    for (i, u) in p.directions().rows().into_iter().enumerate() {
        let u: Vec<f64> = u.to_vec();
        let gu = matmul(&gram, &u.iter().map(|x| vec![*x]).collect());
        for (g, x) in gu.iter().zip(&u) {
            assert!((g[0] - eig[i] * x).abs() < 1e-8 * eig[0]);
        }
        let s = p.singular_values()[i];
        assert!((s * s - eig[i]).abs() < 1e-8 * eig[i]);
    }
}

#[test]
fn centered_abtt_matches_dense_oracle() {
    let mut rng = rng(3);
    let rows = anisotropic_dense(&mut rng, 40, 7, 2.0);
    let m = to_matrix(&rows);
    let n = rows.len() as f64;
    let mu: Vec<f64> = (0..7).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let centered: Dense = rows
        .iter()
        .map(|r| r.iter().zip(&mu).map(|(x, m)| x - m).collect())
        .collect();
    let dirs: Dense = compute_directions_with(&m, 3, true)
        .unwrap()
        .directions()
        .rows()
        .into_iter()
        .map(|r| r.to_vec())
        .collect();
    // Centered directions must agree with uncentered directions of the
    // centered matrix.
    let reference = dense_directions(&to_matrix(&centered), 3);
    assert!(max_abs_diff(&dirs, &reference) < 1e-9);
    let expected: Dense = centered
        .iter()
        .map(|v| remove_step_by_step(v, &dirs, &[1.0; 3]))
        .collect();
    let got = from_matrix(&abtt(&m, 3, true).unwrap());
    assert!(max_abs_diff(&got, &expected) < 1e-10);
}

#[test]
fn predict_similarity_five_token_oracle() {
    let rows: Dense = vec![
        vec![1.0, 0.2, 0.0, 0.3],
        vec![0.9, -0.1, 0.4, 0.0],
        vec![1.1, 0.5, -0.2, 0.1],
        vec![0.8, 0.0, 0.1, -0.6],
        vec![1.0, -0.4, -0.3, 0.2],
    ];
    let m = to_matrix(&rows);
    let dirs = dense_directions(&m, 2);
    let alphas = [0.7, 0.2];
    let model = RemovalModel::from_directions(&compute_directions(&m, 2).unwrap(), alphas.to_vec(), m.fingerprint()).unwrap();
    for a in 0..5 {
        for b in 0..5 {
            let expected = cosine(
                &remove_step_by_step(&rows[a], &dirs, &alphas),
                &remove_step_by_step(&rows[b], &dirs, &alphas),
            );
            let got = trainer::predict_similarity(&format!("w{a}"), &format!("w{b}"), &m, &model).unwrap();
            assert!((got - expected).abs() < 1e-12, "{a},{b}: {got} vs {expected}");
        }
    }
}

#[test]
fn loss_matches_brute_force() {
    let mut rng = rng(4);
    let rows = anisotropic_dense(&mut rng, 30, 10, 1.2);
    let m = to_matrix(&rows);
    let dirs = dense_directions(&m, 3);
    let alphas = [0.4, 0.9, 0.1];
    let model = RemovalModel::from_directions(&compute_directions(&m, 3).unwrap(), alphas.to_vec(), m.fingerprint()).unwrap();
    let idx: Vec<(usize, usize, f64)> = (0..25)
        .map(|_| (rng.random_range(0..30), rng.random_range(0..30), rng.random_range(-1.0..1.0)))
        .collect();
    let set: LabeledPairSet = idx
        .iter()
        .map(|&(a, b, t)| LabeledPair {
            a: format!("w{a}"),
            b: format!("w{b}"),
            target: t,
            source: "s".into(),
        })
        .collect();
    let got = trainer::loss(&set, &m, &model).unwrap();
    assert!((got - brute_loss(&rows, &idx, &dirs, &alphas)).abs() < 1e-12);
}

#[test]
fn planted_recovery_across_seeds() {
    for (seed, planted) in [(21, [0.6, 0.15]), (22, [0.97, 0.9]), (23, [0.99, 0.95])] {
        let mut rng = rng(seed);
        let rows = anisotropic_dense(&mut rng, 60, 8, 1.5);
        let m = to_matrix(&rows);
        let dirs = compute_directions(&m, 2).unwrap();
        let model = RemovalModel::from_directions(&dirs, planted.to_vec(), m.fingerprint()).unwrap();
        let pairs: LabeledPairSet = (0..300)
            .map(|_| {
                let (a, b) = (format!("w{}", rng.random_range(0..60)), format!("w{}", rng.random_range(0..60)));
                let target = trainer::predict_similarity(&a, &b, &m, &model).unwrap();
                LabeledPair { a, b, target, source: "p".into() }
            })
            .collect();
        let fit = trainer::fit(&pairs, &m, &dirs, &TrainConfig::new(2)).unwrap();
        for (got, want) in fit.model.alphas().iter().zip(planted) {
            assert!((got - want).abs() < 0.05, "seed {seed}: {got} vs {want}");
        }
        let losses: Vec<f64> = fit.log.iter().map(|r| r.loss).collect();
        assert!(losses.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn embedding_round_trip_and_fingerprint() {
    let mut rng = rng(5);
    let rows = random_dense(&mut rng, 100, 8);
    let m = to_matrix(&rows);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.txt");
    m.save(&path).unwrap();
    let back = EmbeddingMatrix::load(&path).unwrap();
    assert_eq!(back.vocab().tokens(), m.vocab().tokens());
    for (a, b) in from_matrix(&back).iter().flatten().zip(rows.iter().flatten()) {
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
    }
    let again = EmbeddingMatrix::load(&path).unwrap();
    assert_eq!(back.fingerprint(), again.fingerprint());
    assert!(matches!(m.save(dir.path().join("missing/emb.txt")), Err(Error::Io { .. })));
}

#[test]
fn model_round_trip_preserves_transform() {
    let mut rng = rng(6);
    let m = to_matrix(&anisotropic_dense(&mut rng, 40, 6, 1.0));
    let model = RemovalModel::from_directions(&compute_directions(&m, 3).unwrap(), vec![0.3, 0.8, -0.1], m.fingerprint()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.txt");
    model.save(&path).unwrap();
    let back = RemovalModel::load(&path).unwrap();
    assert_eq!(back.source_fingerprint(), model.source_fingerprint());
    let a = from_matrix(&weighted_removal(&m, &model, FingerprintCheck::Enforce).unwrap());
    let b = from_matrix(&weighted_removal(&m, &back, FingerprintCheck::Enforce).unwrap());
    assert!(max_abs_diff(&a, &b) < 1e-10);
}

#[test]
fn removal_lowers_average_cosine_of_offset_cloud() {
    let mut rng = rng(7);
    let m = to_matrix(&anisotropic_dense(&mut rng, 300, 12, 3.0));
    let before = average_cosine(&m).unwrap();
    let after = average_cosine(&abtt(&m, 1, false).unwrap()).unwrap();
    assert!(before > 0.5, "{before}");
    assert!(after.abs() < before / 5.0, "{after} vs {before}");
}

#[test]
fn pearson_matches_definition() {
    let mut rng = rng(8);
    let x: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y: Vec<f64> = x.iter().map(|v| v * 0.5 + rng.random_range(-0.3..0.3)).collect();
    let mx = x.iter().sum::<f64>() / 40.0;
    let my = y.iter().sum::<f64>() / 40.0;
    let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = y.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    assert!((pearson(&x, &y).unwrap() - cov / (sx * sy)).abs() < 1e-12);
}
