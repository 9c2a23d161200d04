//! Density-based clustering: core distances, mutual reachability, minimum
//! spanning tree, single-linkage hierarchy, condensed tree and
//! excess-of-mass cluster selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sq_dist, ClusterAssignment, EmbedError, EmbeddingMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    /// Neighbour count for core distances, counting the point itself.
    /// Defaults to `min_cluster_size`.
    pub min_samples: Option<usize>,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        Self {
            min_cluster_size: 10,
            min_samples: None,
        }
    }
}

/// Distance to the `k`-th nearest point, the point itself being the first.
fn core_distances(x: &EmbeddingMatrix, k: usize) -> Vec<f64> {
    let n = x.n_docs();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<f64> = (0..n).map(|j| sq_dist(x.row(i), x.row(j))).collect();
            let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
            kth.sqrt()
        })
        .collect()
}

/// Prim's algorithm over the dense mutual-reachability graph.
fn mutual_reachability_mst(x: &EmbeddingMatrix, core: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = x.n_docs();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let row = x.row(current);
        let cc = core[current];
        let updates: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .filter(|&j| !in_tree[j])
            .map(|j| {
                let d = sq_dist(row, x.row(j)).sqrt();
                (j, d.max(cc).max(core[j]))
            })
            .collect();
        for (j, mr) in updates {
            if mr < best[j] {
                best[j] = mr;
                parent[j] = current;
            }
        }
        let mut next = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < best[next]) {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, best[next]));
        current = next;
    }
    edges
}

struct Dendrogram {
    /// Internal node `n + i` merges `children[i]` at `heights[i]`.
    children: Vec<(usize, usize)>,
    heights: Vec<f64>,
    sizes: Vec<usize>,
    n: usize,
}

impl Dendrogram {
    fn size(&self, node: usize) -> usize {
        if node < self.n {
            1
        } else {
            self.sizes[node - self.n]
        }
    }

    fn leaves(&self, node: usize, out: &mut Vec<usize>) {
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            if v < self.n {
                out.push(v);
            } else {
                let (a, b) = self.children[v - self.n];
                stack.push(b);
                stack.push(a);
            }
        }
    }
}

fn single_linkage(n: usize, mut edges: Vec<(usize, usize, f64)>) -> Dendrogram {
    edges.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut uf_parent: Vec<usize> = (0..2 * n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let mut dendro = Dendrogram {
        children: Vec::with_capacity(n - 1),
        heights: Vec::with_capacity(n - 1),
        sizes: Vec::with_capacity(n - 1),
        n,
    };
    for (a, b, w) in edges {
        let ra = find(&mut uf_parent, a);
        let rb = find(&mut uf_parent, b);
        let node = n + dendro.children.len();
        let size = dendro.size(ra) + dendro.size(rb);
        dendro.children.push((ra, rb));
        dendro.heights.push(w);
        dendro.sizes.push(size);
        uf_parent[ra] = node;
        uf_parent[rb] = node;
    }
    dendro
}

#[derive(Debug, Clone, Copy)]
enum Child {
    Cluster(usize),
    Point(usize),
}

#[derive(Debug, Clone, Copy)]
struct CondensedRow {
    parent: usize,
    child: Child,
    lambda: f64,
    size: usize,
}

struct CondensedTree {
    rows: Vec<CondensedRow>,
    n_clusters: usize,
    cluster_parent: Vec<Option<usize>>,
    birth: Vec<f64>,
}

fn condense(dendro: &Dendrogram, min_cluster_size: usize, to_lambda: impl Fn(f64) -> f64) -> CondensedTree {
    let n = dendro.n;
    let root = 2 * n - 2;
    let mut tree = CondensedTree {
        rows: Vec::new(),
        n_clusters: 1,
        cluster_parent: vec![None],
        birth: vec![0.0],
    };
    // (dendrogram node, cluster it belongs to)
    let mut queue = std::collections::VecDeque::from([(root, 0usize)]);
    let mut leaves = Vec::new();
    while let Some((node, cluster)) = queue.pop_front() {
        if node < n {
            // only reachable as the sole remnant of a cluster
            tree.rows.push(CondensedRow {
                parent: cluster,
                child: Child::Point(node),
                lambda: f64::INFINITY,
                size: 1,
            });
            continue;
        }
        let (left, right) = dendro.children[node - n];
        let lambda = to_lambda(dendro.heights[node - n]);
        let (ls, rs) = (dendro.size(left), dendro.size(right));
        let (left_big, right_big) = (ls >= min_cluster_size, rs >= min_cluster_size);
        for (child, big, sibling_big, size) in [(left, left_big, right_big, ls), (right, right_big, left_big, rs)] {
            if big && sibling_big {
                let id = tree.n_clusters;
                tree.n_clusters += 1;
                tree.cluster_parent.push(Some(cluster));
                tree.birth.push(lambda);
                tree.rows.push(CondensedRow {
                    parent: cluster,
                    child: Child::Cluster(id),
                    lambda,
                    size,
                });
                queue.push_back((child, id));
            } else if big {
                queue.push_back((child, cluster));
            } else {
                leaves.clear();
                dendro.leaves(child, &mut leaves);
                for &p in &leaves {
                    tree.rows.push(CondensedRow {
                        parent: cluster,
                        child: Child::Point(p),
                        lambda,
                        size: 1,
                    });
                }
            }
        }
    }
    tree
}

/// Cluster `x` by density, labelling outliers `-1`.
///
/// Zero-distance merges are mapped to a finite density level just above the
/// largest finite one, so exact duplicates do not produce infinite stability.
/// When the hierarchy never splits into two clusters of `min_cluster_size`,
/// the root is returned as a single cluster and only points that leave it
/// before its densest level are marked as noise.
pub fn hdbscan(x: &EmbeddingMatrix, params: HdbscanParams) -> Result<ClusterAssignment, EmbedError> {
    let n = x.n_docs();
    let mcs = params.min_cluster_size;
    if mcs < 2 {
        return Err(EmbedError::InvalidParameter("min_cluster_size must be at least 2".into()));
    }
    let min_samples = params.min_samples.unwrap_or(mcs);
    if min_samples == 0 {
        return Err(EmbedError::InvalidParameter("min_samples must be at least 1".into()));
    }
    if n < mcs {
        return Err(EmbedError::TooFewPoints { needed: mcs, got: n });
    }

    let core = core_distances(x, min_samples.min(n));
    let mst = mutual_reachability_mst(x, &core);
    let dendro = single_linkage(n, mst);

    let min_positive = dendro
        .heights
        .iter()
        .copied()
        .filter(|&h| h > 0.0)
        .fold(f64::INFINITY, f64::min);
    let lambda_cap = if min_positive.is_finite() { 2.0 / min_positive } else { 1.0 };
    let to_lambda = |h: f64| if h > 0.0 { 1.0 / h } else { lambda_cap };
    let tree = condense(&dendro, mcs, to_lambda);

    let point_lambda = |row: &CondensedRow| {
        if row.lambda.is_infinite() {
            lambda_cap
        } else {
            row.lambda
        }
    };

    let nc = tree.n_clusters;
    let mut stability = vec![0.0; nc];
    let mut child_clusters: Vec<Vec<usize>> = vec![Vec::new(); nc];
    for row in &tree.rows {
        stability[row.parent] += (point_lambda(row) - tree.birth[row.parent]) * row.size as f64;
        if let Child::Cluster(c) = row.child {
            child_clusters[row.parent].push(c);
        }
    }

    let mut selected = vec![false; nc];
    if nc == 1 {
        selected[0] = true;
    } else {
        // children always have larger ids than their parent
        for c in (1..nc).rev() {
            let subtree: f64 = child_clusters[c].iter().map(|&ch| stability[ch]).sum();
            if subtree > stability[c] {
                stability[c] = subtree;
            } else {
                selected[c] = true;
                let mut stack = child_clusters[c].clone();
                while let Some(d) = stack.pop() {
                    selected[d] = false;
                    stack.extend(child_clusters[d].iter().copied());
                }
            }
        }
    }

    let mut labels = vec![-1i64; n];
    if nc == 1 {
        let max_lambda = tree
            .rows
            .iter()
            .map(point_lambda)
            .fold(f64::NEG_INFINITY, f64::max);
        for row in &tree.rows {
            if let Child::Point(p) = row.child {
                if point_lambda(row) >= max_lambda {
                    labels[p] = 0;
                }
            }
        }
    } else {
        // nearest selected ancestor-or-self of each cluster
        let mut owner: Vec<Option<usize>> = vec![None; nc];
        for c in 1..nc {
            owner[c] = if selected[c] {
                Some(c)
            } else {
                tree.cluster_parent[c].and_then(|p| owner[p])
            };
        }
        for row in &tree.rows {
            if let Child::Point(p) = row.child {
                if let Some(c) = owner[row.parent] {
                    labels[p] = c as i64;
                }
            }
        }
    }
    Ok(ClusterAssignment::canonical(labels))
}
