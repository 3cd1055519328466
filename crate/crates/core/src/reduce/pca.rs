//! Uncentered PCA via eigendecomposition of the Gram matrix C̃ᵀC̃.
//!
//! No mean subtraction: the eigenvectors of the uncentered Gram matrix are
//! the right singular vectors of C̃, which is what keeps embedding
//! distances tied to Hellinger distances between rows.

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::cooccur::DistributionMatrix;
use crate::fingerprint::Fingerprint;

use super::{embed_all, EmbeddingMatrix, Encoder, ReduceError, ReduceMethod};

/// Accumulation precision for the Gram matrix. The f32 mode exists to
/// demonstrate how covariance accumulation loses weak directions to
/// round-off; production use keeps the f64 default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovariancePrecision {
    #[default]
    F64,
    F32,
}

#[derive(Debug, Clone)]
pub struct PcaOptions {
    pub precision: CovariancePrecision,
    /// Upper bound on the dense Gram allocation.
    pub max_gram_bytes: usize,
    pub fingerprint: Fingerprint,
}

impl Default for PcaOptions {
    fn default() -> Self {
        PcaOptions {
            precision: CovariancePrecision::F64,
            max_gram_bytes: 2 << 30,
            fingerprint: Fingerprint::default(),
        }
    }
}

/// Top-d eigenvectors of C̃ᵀC̃ by descending eigenvalue, with each column's
/// largest-magnitude entry forced positive, plus the embeddings C̃·U.
pub fn hellinger_pca(
    m: &DistributionMatrix,
    d: usize,
    opts: &PcaOptions,
) -> Result<(Encoder, EmbeddingMatrix), ReduceError> {
    let n = m.n_contexts();
    if d < 1 || d > n {
        return Err(ReduceError::InvalidDim { d, n_contexts: n });
    }
    let elem = match opts.precision {
        CovariancePrecision::F64 => std::mem::size_of::<f64>(),
        CovariancePrecision::F32 => std::mem::size_of::<f32>(),
    };
    let bytes = n.saturating_mul(n).saturating_mul(elem);
    if bytes > opts.max_gram_bytes {
        return Err(ReduceError::GramTooLarge {
            n_contexts: n,
            bytes,
            limit: opts.max_gram_bytes,
        });
    }

    let gram = match opts.precision {
        CovariancePrecision::F64 => accumulate_gram_f64(m, n),
        CovariancePrecision::F32 => accumulate_gram_f32(m, n),
    };

    let eig = nalgebra::linalg::SymmetricEigen::new(DMatrix::from_row_slice(n, n, &gram));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut u = Array2::zeros((n, d));
    for (j, &col) in order.iter().take(d).enumerate() {
        // deterministic per-column sign: largest-magnitude entry positive
        let mut max_abs = 0.0;
        let mut sign = 1.0;
        for i in 0..n {
            let val = eig.eigenvectors[(i, col)];
            if val.abs() > max_abs {
                max_abs = val.abs();
                sign = if val < 0.0 { -1.0 } else { 1.0 };
            }
        }
        for i in 0..n {
            u[(i, j)] = sign * eig.eigenvectors[(i, col)];
        }
    }

    let encoder = Encoder::new(u, ReduceMethod::Pca, opts.fingerprint);
    let embeddings = embed_all(m, &encoder);
    Ok((encoder, embeddings))
}

fn accumulate_gram_f64(m: &DistributionMatrix, n: usize) -> Vec<f64> {
    let mut gram = vec![0.0f64; n * n];
    for row in m.rows() {
        for &(ci, vi) in row {
            let base = ci as usize * n;
            for &(cj, vj) in row {
                gram[base + cj as usize] += vi * vj;
            }
        }
    }
    gram
}

/// Row-order accumulation in f32: increments smaller than half an ulp of
/// the running entry are rounded away, which is exactly the failure the
/// f32 mode is meant to expose.
fn accumulate_gram_f32(m: &DistributionMatrix, n: usize) -> Vec<f64> {
    let mut gram = vec![0.0f32; n * n];
    for row in m.rows() {
        for &(ci, vi) in row {
            let base = ci as usize * n;
            let vi = vi as f32;
            for &(cj, vj) in row {
                gram[base + cj as usize] += vi * vj as f32;
            }
        }
    }
    gram.into_iter().map(f64::from).collect()
}
