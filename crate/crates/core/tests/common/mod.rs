//! Test-only oracles. Nothing here calls into the library's numerical code
//! paths; they are plain dense reference implementations.
#![allow(dead_code)]

use isoforge::EmbeddingMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Dense {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

/// Random rows sharing a common offset, so the cloud is anisotropic.
pub fn anisotropic_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize, offset: f64) -> Dense {
    let common: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0) * offset).collect();
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|j| common[j] + rng.random_range(-1.0..1.0) / (1.0 + j as f64).sqrt())
                .collect()
        })
        .collect()
}

pub fn to_matrix(rows: &Dense) -> EmbeddingMatrix {
    EmbeddingMatrix::from_rows(
        rows.iter()
            .enumerate()
            .map(|(i, r)| (format!("w{i}"), r.clone()))
            .collect(),
    )
    .unwrap()
}

pub fn from_matrix(m: &EmbeddingMatrix) -> Dense {
    m.rows().map(|r| r.to_vec()).collect()
}

pub fn transpose(a: &Dense) -> Dense {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j]).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for p in 0..k {
            for j in 0..m {
                out[i][j] += a[i][p] * b[p][j];
            }
        }
    }
    out
}

pub fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix. Returns
/// eigenvalues sorted descending.
pub fn jacobi_eigenvalues(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in m.iter_mut() {
                    let (mkp, mkq) = (row[p], row[q]);
                    row[p] = c * mkp - s * mkq;
                    row[q] = s * mkp + c * mkq;
                }
                let (rp, rq) = (m[p].clone(), m[q].clone());
                for k in 0..n {
                    m[p][k] = c * rp[k] - s * rq[k];
                    m[q][k] = s * rp[k] + c * rq[k];
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let mut aug: Dense = a
        .iter()
        .zip(identity(n))
        .map(|(row, id)| row.iter().copied().chain(id).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs()))
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        assert!(p.abs() > 1e-300, "singular matrix in oracle");
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    let pivot_row = aug[col].clone();
                    for (x, p) in aug[r].iter_mut().zip(&pivot_row) {
                        *x -= f * p;
                    }
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Brute-force `Σᵢ Σⱼ cos(vᵢ, vⱼ) / n²`.
pub fn brute_average_cosine(rows: &Dense) -> f64 {
    let norms: Vec<f64> = rows.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut total = 0.0;
    for i in 0..rows.len() {
        for j in 0..rows.len() {
            let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            total += dot / (norms[i] * norms[j]);
        }
    }
    total / (rows.len() * rows.len()) as f64
}

/// `v − Σ αᵢ (uᵢ·v) uᵢ` computed one direction at a time.
pub fn remove_step_by_step(v: &[f64], dirs: &Dense, alphas: &[f64]) -> Vec<f64> {
    let coefs: Vec<f64> = dirs.iter().map(|u| u.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
    let mut out = v.to_vec();
    for ((u, c), a) in dirs.iter().zip(&coefs).zip(alphas) {
        for (o, x) in out.iter_mut().zip(u) {
            *o -= a * c * x;
        }
    }
    out
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// MSE loss via the step-by-step transform, for finite differences.
pub fn brute_loss(rows: &Dense, pairs: &[(usize, usize, f64)], dirs: &Dense, alphas: &[f64]) -> f64 {
    pairs
        .iter()
        .map(|&(a, b, t)| {
            let va = remove_step_by_step(&rows[a], dirs, alphas);
            let vb = remove_step_by_step(&rows[b], dirs, alphas);
            let e = cosine(&va, &vb) - t;
            e * e
        })
        .sum::<f64>()
        / pairs.len() as f64
}

pub fn central_difference(
    rows: &Dense,
    pairs: &[(usize, usize, f64)],
    dirs: &Dense,
    alphas: &[f64],
    h: f64,
) -> Vec<f64> {
    (0..alphas.len())
        .map(|i| {
            let mut up = alphas.to_vec();
            let mut down = alphas.to_vec();
            up[i] += h;
            down[i] -= h;
            (brute_loss(rows, pairs, dirs, &up) - brute_loss(rows, pairs, dirs, &down)) / (2.0 * h)
        })
        .collect()
}

/// Gram-Schmidt orthonormal basis of `k` random directions.
pub fn random_orthonormal(rng: &mut ChaCha8Rng, k: usize, dim: usize) -> Dense {
    let mut out: Dense = Vec::new();
    while out.len() < k {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        for u in &out {
            let c: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= c * y;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}
