use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sq_dist, ClusterAssignment, EmbedError, EmbeddingMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assignment: ClusterAssignment,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances to the assigned centroid, per Lloyd iteration.
    pub inertia_trace: Vec<f64>,
    pub converged: bool,
}

fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(row, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(x: &EmbeddingMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = x.n_docs();
    let mut centroids = vec![x.row(rng.gen_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let u = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if u < acc {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let c = x.row(pick).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Lloyd's algorithm from a k-means++ seeding.
pub fn kmeans(x: &EmbeddingMatrix, k: usize, seed: u64, max_iters: usize) -> Result<KMeansFit, EmbedError> {
    let n = x.n_docs();
    if k == 0 {
        return Err(EmbedError::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(EmbedError::TooFewPoints { needed: k, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(x, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    let mut converged = false;

    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, row) in x.rows().enumerate() {
            let (c, d) = nearest(row, &centroids);
            inertia += d;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        trace.push(inertia);
        if !changed {
            converged = true;
            break;
        }
        let dim = x.dim();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, row) in x.rows().enumerate() {
            counts[labels[i]] += 1;
            for (s, v) in sums[labels[i]].iter_mut().zip(row) {
                *s += v;
            }
        }
        for c in 0..k {
            // an empty cluster keeps its previous centroid
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }

    let assignment = ClusterAssignment::canonical(labels.iter().map(|&l| l as i64).collect());
    Ok(KMeansFit {
        assignment,
        centroids,
        inertia_trace: trace,
        converged,
    })
}
