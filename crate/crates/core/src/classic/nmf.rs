use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{top_indices, ModelError};
use crate::divergence::TopicWordDist;
use crate::topics::{TopicEntry, TopicSet};

/// Denominator guard for the multiplicative updates.
const DELTA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmfConfig {
    pub k: usize,
    pub iters: usize,
    /// Stop once the relative change of the objective falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl NmfConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            iters: 200,
            tol: 1e-6,
            seed: crate::DEFAULT_SEED,
        }
    }
}

/// `V ≈ W H` with both factors non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct NmfFactors {
    /// rows × k
    pub w: DMatrix<f64>,
    /// k × cols
    pub h: DMatrix<f64>,
    /// `‖V − WH‖_F` after each iteration.
    pub objective_trace: Vec<f64>,
}

impl NmfFactors {
    /// `‖V − WH‖_F / ‖V‖_F`, or the absolute error when `V` is zero.
    pub fn relative_error(&self, v: &DMatrix<f64>) -> f64 {
        let err = (v - &self.w * &self.h).norm();
        let scale = v.norm();
        if scale == 0.0 {
            err
        } else {
            err / scale
        }
    }
}

/// Lee-Seung multiplicative updates, H first then W, every iteration.
pub fn nmf_fit(v: &DMatrix<f64>, cfg: &NmfConfig) -> Result<NmfFactors, ModelError> {
    let (m, n) = v.shape();
    for r in 0..m {
        for c in 0..n {
            let x = v[(r, c)];
            if !(x >= 0.0) || !x.is_finite() {
                return Err(ModelError::NegativeInput(r, c));
            }
        }
    }
    let k = cfg.k;
    if k == 0 || k > m.min(n) {
        return Err(ModelError::InvalidRank { k, max: m.min(n) });
    }
    if cfg.iters == 0 {
        return Err(ModelError::InvalidConfig("iters must be at least 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w = DMatrix::from_fn(m, k, |_, _| rng.gen::<f64>());
    let mut h = DMatrix::from_fn(k, n, |_, _| rng.gen::<f64>());
    let mut trace = Vec::with_capacity(cfg.iters);

    for _ in 0..cfg.iters {
        let wt = w.transpose();
        let num_h = &wt * v;
        let den_h = &wt * &w * &h;
        h.zip_zip_apply(&num_h, &den_h, |x, a, b| *x *= a / (b + DELTA));

        let ht = h.transpose();
        let num_w = v * &ht;
        let den_w = &w * (&h * &ht);
        w.zip_zip_apply(&num_w, &den_w, |x, a, b| *x *= a / (b + DELTA));

        let obj = (v - &w * &h).norm();
        let converged = trace.last().is_some_and(|&prev: &f64| {
            prev == 0.0 || ((prev - obj).abs() / prev) < cfg.tol
        });
        trace.push(obj);
        if converged {
            break;
        }
    }
    Ok(NmfFactors {
        w,
        h,
        objective_trace: trace,
    })
}

/// One topic per row of `H`, normalized into a word distribution.
pub fn nmf_topic_set(factors: &NmfFactors, top_n: usize) -> TopicSet {
    let topics = (0..factors.h.nrows())
        .map(|t| {
            let row: Vec<f64> = factors.h.row(t).iter().copied().collect();
            let words = top_indices(&row, top_n);
            let weights = words.iter().map(|&w| row[w as usize]).collect();
            TopicEntry {
                label: t as i64,
                words,
                weights,
                distribution: TopicWordDist::from_weights(&row).ok(),
            }
        })
        .collect();
    TopicSet::new(topics)
}
