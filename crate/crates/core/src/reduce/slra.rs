//! Stochastic low-rank approximation: factor pair (U, V) trained by SGD to
//! minimize Σ_w ‖VUᵀ√P_w − √P_w‖².
//!
//! Per visited row x the updates use h = Uᵀx and r = VUᵀx − x:
//!   ∂L/∂V = 2·r·hᵀ        (dense in |D|)
//!   ∂L/∂U = 2·x·(Vᵀr)ᵀ    (touches only the support rows of U)
//! so one step costs O(nnz·d + |D|·d).

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cooccur::DistributionMatrix;
use crate::fingerprint::Fingerprint;

use super::{reconstruction_error_slices, Encoder, ReduceError, ReduceMethod, SlraModel};

#[derive(Debug, Clone)]
pub struct SlraHyperparams {
    /// Initial per-example learning rate.
    pub learning_rate: f64,
    /// Learning rate reached at the final step by linear decay.
    pub final_learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Half-width of the uniform init; defaults to 1/√|D|.
    pub init_scale: Option<f64>,
}

impl Default for SlraHyperparams {
    fn default() -> Self {
        SlraHyperparams {
            learning_rate: 0.01,
            final_learning_rate: 1e-4,
            epochs: 10,
            seed: 42,
            init_scale: None,
        }
    }
}

/// Trains U, V ∈ ℝ^{|D|×d} by visiting the nonzero rows of `m` in a seeded
/// shuffled order each epoch. Deterministic given the seed.
///
/// `loss_history` records the full loss at initialization and at every
/// epoch end; if an epoch ends above 10x the initial loss, training aborts
/// with [`ReduceError::Diverged`].
pub fn slra_train(
    m: &DistributionMatrix,
    d: usize,
    hp: &SlraHyperparams,
    fingerprint: Fingerprint,
) -> Result<SlraModel, ReduceError> {
    let n = m.n_contexts();
    if d < 1 || d > n {
        return Err(ReduceError::InvalidDim { d, n_contexts: n });
    }
    if !(hp.learning_rate > 0.0 && hp.learning_rate.is_finite()) {
        return Err(ReduceError::BadHyperparams(format!(
            "learning rate must be positive, got {}",
            hp.learning_rate
        )));
    }
    if !(hp.final_learning_rate > 0.0 && hp.final_learning_rate.is_finite()) {
        return Err(ReduceError::BadHyperparams(format!(
            "final learning rate must be positive, got {}",
            hp.final_learning_rate
        )));
    }
    if hp.epochs < 1 {
        return Err(ReduceError::BadHyperparams("epochs must be >= 1".into()));
    }
    let scale = hp.init_scale.unwrap_or(1.0 / (n as f64).sqrt());
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(ReduceError::BadHyperparams(format!(
            "init scale must be positive, got {scale}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut us: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-scale..scale)).collect();
    let mut vs: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-scale..scale)).collect();

    let mut visit: Vec<u32> = (0..m.n_words() as u32)
        .filter(|&w| !m.row(w).is_empty())
        .collect();

    let initial_loss = reconstruction_error_slices(m, &us, &vs, n, d);
    let mut loss_history = vec![initial_loss];

    let total_steps = hp.epochs * visit.len();
    let lr0 = hp.learning_rate;
    let lr_slope = (hp.final_learning_rate - lr0) / (total_steps.max(2) - 1) as f64;

    let mut h = vec![0.0; d];
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; d];
    let mut step = 0usize;
    for epoch in 1..=hp.epochs {
        visit.shuffle(&mut rng);
        for &word in &visit {
            let x = m.row(word);
            let lr = lr0 + lr_slope * step as f64;
            step += 1;

            h.iter_mut().for_each(|e| *e = 0.0);
            for &(c, xv) in x {
                let ur = &us[c as usize * d..(c as usize + 1) * d];
                for (hj, &uj) in h.iter_mut().zip(ur) {
                    *hj += xv * uj;
                }
            }

            for (c2, rc) in r.iter_mut().enumerate() {
                let vr = &vs[c2 * d..(c2 + 1) * d];
                *rc = vr.iter().zip(&h).map(|(&a, &b)| a * b).sum();
            }
            for &(c, xv) in x {
                r[c as usize] -= xv;
            }

            // Vᵀr before V moves: both gradients are taken at the same point
            w.iter_mut().for_each(|e| *e = 0.0);
            for (c2, &rc) in r.iter().enumerate() {
                let vr = &vs[c2 * d..(c2 + 1) * d];
                for (wj, &vj) in w.iter_mut().zip(vr) {
                    *wj += vj * rc;
                }
            }

            let lr2 = 2.0 * lr;
            for (c2, &rc) in r.iter().enumerate() {
                let f = lr2 * rc;
                let vr = &mut vs[c2 * d..(c2 + 1) * d];
                for (vj, &hj) in vr.iter_mut().zip(&h) {
                    *vj -= f * hj;
                }
            }
            for &(c, xv) in x {
                let f = lr2 * xv;
                let ur = &mut us[c as usize * d..(c as usize + 1) * d];
                for (uj, &wj) in ur.iter_mut().zip(&w) {
                    *uj -= f * wj;
                }
            }
        }

        let loss = reconstruction_error_slices(m, &us, &vs, n, d);
        loss_history.push(loss);
        if !loss.is_finite() || (initial_loss > 0.0 && loss > 10.0 * initial_loss) {
            return Err(ReduceError::Diverged {
                epoch,
                loss,
                initial: initial_loss,
            });
        }
    }

    let u = Array2::from_shape_vec((n, d), us).expect("u shape");
    let v = Array2::from_shape_vec((n, d), vs).expect("v shape");
    Ok(SlraModel {
        encoder: Encoder::new(u, ReduceMethod::Slra, fingerprint),
        v,
        hyperparams: hp.clone(),
        loss_history,
    })
}

/// Loss of a single row: ‖VUᵀx − x‖².
pub fn per_row_loss(u: &Array2<f64>, v: &Array2<f64>, x: &[(u32, f64)]) -> f64 {
    let d = u.ncols();
    let n = u.nrows();
    let mut h = vec![0.0; d];
    for &(c, xv) in x {
        for j in 0..d {
            h[j] += xv * u[(c as usize, j)];
        }
    }
    let mut loss = 0.0;
    let mut x_iter = x.iter().peekable();
    for c2 in 0..n {
        let mut y: f64 = (0..d).map(|j| v[(c2, j)] * h[j]).sum();
        if let Some(&&(c, xv)) = x_iter.peek() {
            if c as usize == c2 {
                y -= xv;
                x_iter.next();
            }
        }
        loss += y * y;
    }
    loss
}

/// Materialized per-row gradients (∂L/∂U, ∂L/∂V) of ‖VUᵀx − x‖², for
/// oracle checks against finite differences.
pub fn per_row_gradients(
    u: &Array2<f64>,
    v: &Array2<f64>,
    x: &[(u32, f64)],
) -> (Array2<f64>, Array2<f64>) {
    let d = u.ncols();
    let n = u.nrows();
    let mut h = vec![0.0; d];
    for &(c, xv) in x {
        for j in 0..d {
            h[j] += xv * u[(c as usize, j)];
        }
    }
    let mut r = vec![0.0; n];
    for (c2, rc) in r.iter_mut().enumerate() {
        *rc = (0..d).map(|j| v[(c2, j)] * h[j]).sum();
    }
    for &(c, xv) in x {
        r[c as usize] -= xv;
    }
    let mut w = vec![0.0; d];
    for (c2, &rc) in r.iter().enumerate() {
        for (j, wj) in w.iter_mut().enumerate() {
            *wj += v[(c2, j)] * rc;
        }
    }
    let mut gu = Array2::zeros((n, d));
    for &(c, xv) in x {
        for j in 0..d {
            gu[(c as usize, j)] = 2.0 * xv * w[j];
        }
    }
    let mut gv = Array2::zeros((n, d));
    for (c2, &rc) in r.iter().enumerate() {
        for j in 0..d {
            gv[(c2, j)] = 2.0 * rc * h[j];
        }
    }
    (gu, gv)
}
