use nalgebra::{DMatrix, SymmetricEigen};

use super::{EmbedError, EmbeddingMatrix};

/// Result of projecting onto the leading principal directions.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    pub projected: EmbeddingMatrix,
    /// `d` unit-norm principal directions, each of length `dim`.
    pub components: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Every covariance eigenvalue, descending.
    pub eigenvalues: Vec<f64>,
    /// Numerical rank of the covariance.
    pub rank: usize,
}

impl PcaProjection {
    /// Variance captured by the kept components over total variance.
    pub fn explained_ratio(&self) -> f64 {
        let total: f64 = self.eigenvalues.iter().map(|x| x.max(0.0)).sum();
        if total == 0.0 {
            return 0.0;
        }
        let kept: f64 = self.eigenvalues[..self.components.len()].iter().map(|x| x.max(0.0)).sum();
        kept / total
    }

    /// Fails when fewer than `d` directions carry variance.
    pub fn ensure_full_rank(&self) -> Result<(), EmbedError> {
        if self.rank < self.components.len() {
            return Err(EmbedError::DegenerateCovariance {
                rank: self.rank,
                requested: self.components.len(),
            });
        }
        Ok(())
    }
}

const RANK_TOLERANCE: f64 = 1e-10;

/// Mean-centered projection onto the top-`d` eigenvectors of the sample
/// covariance. Components are ordered by descending eigenvalue and signed so
/// that each one's largest-magnitude loading is positive.
///
/// Rank-deficient input is not an error here: trailing components then span
/// zero-variance directions and the projected coordinates along them vanish.
/// [`PcaProjection::rank`] reports the numerical rank.
pub fn reduce_pca(x: &EmbeddingMatrix, d: usize) -> Result<PcaProjection, EmbedError> {
    let (n, dim) = (x.n_docs(), x.dim());
    if d == 0 || d > dim {
        return Err(EmbedError::InvalidTargetDim { target: d, dim });
    }
    let mut mean = vec![0.0; dim];
    for row in x.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let centered = DMatrix::from_fn(n, dim, |r, c| x.row(r)[c] - mean[c]);
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let mut cov = centered.transpose() * &centered / denom;
    // symmetrize away rounding asymmetry
    for i in 0..dim {
        for j in i + 1..dim {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let top = eigenvalues[0].max(0.0);
    let rank = if top == 0.0 {
        0
    } else {
        eigenvalues.iter().filter(|&&l| l > RANK_TOLERANCE * top).count()
    };

    let components: Vec<Vec<f64>> = order[..d]
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let mut best = 0;
            for (j, x) in v.iter().enumerate() {
                if x.abs() > v[best].abs() {
                    best = j;
                }
            }
            if v[best] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();

    let mut data = Vec::with_capacity(n * d);
    for r in 0..n {
        let row = centered.row(r);
        for comp in &components {
            data.push(row.iter().zip(comp).map(|(a, b)| a * b).sum());
        }
    }
    let projected = EmbeddingMatrix::new(n, d, data, x.doc_ids().to_vec())?;
    if rank < d {
        log::warn!("covariance rank {rank} is below the requested {d} components");
    }
    Ok(PcaProjection {
        projected,
        components,
        mean,
        eigenvalues,
        rank,
    })
}
