use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MlError;

pub const NOISE: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterSelection {
    /// Leaves of the condensed tree.
    #[default]
    Leaf,
    /// Excess of mass.
    Eom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster per point, numbered by each cluster's smallest member index; −1 is noise.
    pub labels: Vec<i32>,
    pub n_clusters: usize,
    pub core_distances: Vec<f64>,
    /// Minimum spanning tree of the mutual-reachability graph, sorted by weight.
    pub mst: Vec<(usize, usize, f64)>,
}

impl Clustering {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }
}

fn euclid(x: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    (0..x.ncols()).map(|k| (x[(i, k)] - x[(j, k)]).powi(2)).sum::<f64>().sqrt()
}

/// Prim's algorithm on the dense graph.
fn prim(n: usize, weight: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize, f64)> {
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for j in 0..n {
            if !in_tree[j] {
                let w = weight(cur, j);
                if w < best[j] {
                    best[j] = w;
                    from[j] = cur;
                }
            }
        }
        let next = (0..n).filter(|&j| !in_tree[j]).min_by(|&a, &b| best[a].total_cmp(&best[b])).expect("nodes remain");
        in_tree[next] = true;
        edges.push((from[next].min(next), from[next].max(next), best[next]));
        cur = next;
    }
    edges.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    edges
}

struct CondensedTree {
    /// (parent cluster, child, λ, child size); children below `n` are points.
    edges: Vec<(usize, usize, f64, usize)>,
    n_points: usize,
    n_clusters: usize,
}

/// Condenses the single-linkage hierarchy. MST edges of equal weight are
/// merged as one multiway node, so the tree depends only on the connected
/// components at each distinct level and not on point order.
fn condense(n: usize, mst: &[(usize, usize, f64)], min_size: usize) -> CondensedTree {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // Union-find roots are points; `node_of` maps a root to its merge-tree node.
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut children: Vec<Vec<usize>> = Vec::new();
    let mut weight: Vec<f64> = Vec::new();
    let mut size: Vec<usize> = vec![1; n];
    let mut k = 0;
    while k < mst.len() {
        let w = mst[k].2;
        let end = k + mst[k..].iter().take_while(|e| e.2 == w).count();
        let mut before: Vec<(usize, usize)> = Vec::new();
        for &(a, b, _) in &mst[k..end] {
            for v in [a, b] {
                let r = find(&mut parent, v);
                if !before.iter().any(|&(root, _)| root == r) {
                    before.push((r, node_of[r]));
                }
            }
        }
        for &(a, b, _) in &mst[k..end] {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent[hi] = lo;
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for (r, node) in before {
            let root = find(&mut parent, r);
            match groups.iter_mut().find(|g| g.0 == root) {
                Some(g) => g.1.push(node),
                None => groups.push((root, vec![node])),
            }
        }
        for (root, kids) in groups {
            let id = n + children.len();
            size.push(kids.iter().map(|&c| size[c]).sum());
            children.push(kids);
            weight.push(w);
            node_of[root] = id;
        }
        k = end;
    }
    let finite_max = weight.iter().filter(|&&w| w > 0.0).map(|w| 1.0 / w).fold(1.0, f64::max);
    // Zero-distance merges would give infinite λ; they are capped above every finite one.
    let lambda_of = |node: usize| {
        let w = weight[node - n];
        if w > 0.0 {
            1.0 / w
        } else {
            2.0 * finite_max
        }
    };
    let leaves_of = |node: usize| {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            if v < n {
                out.push(v);
            } else {
                stack.extend(children[v - n].iter().copied());
            }
        }
        out.sort_unstable();
        out
    };
    let root = n + children.len() - 1;
    let mut edges = Vec::new();
    let mut next_label = n + 1;
    let mut stack = vec![(root, n)];
    while let Some((node, label)) = stack.pop() {
        if node < n {
            continue;
        }
        let lambda = lambda_of(node);
        let mut big: Vec<(usize, usize)> = Vec::new();
        for &c in &children[node - n] {
            let members = leaves_of(c);
            if size[c] >= min_size {
                big.push((members[0], c));
            } else {
                for p in members {
                    edges.push((label, p, lambda, 1));
                }
            }
        }
        big.sort_unstable();
        match big.len() {
            0 => {}
            1 => stack.push((big[0].1, label)),
            _ => {
                // pushed in reverse so the child with the smallest member is expanded first
                let labels: Vec<usize> = (0..big.len()).map(|i| next_label + i).collect();
                next_label += big.len();
                for (&(_, c), &l) in big.iter().zip(&labels) {
                    edges.push((label, l, lambda, size[c]));
                }
                for (&(_, c), &l) in big.iter().zip(&labels).rev() {
                    stack.push((c, l));
                }
            }
        }
    }
    CondensedTree { edges, n_points: n, n_clusters: next_label - n }
}

impl CondensedTree {
    fn parent_of(&self) -> Vec<Option<usize>> {
        let mut p = vec![None; self.n_points + self.n_clusters];
        for &(par, child, _, _) in &self.edges {
            p[child] = Some(par);
        }
        p
    }

    fn select(&self, mode: ClusterSelection) -> Vec<bool> {
        let n = self.n_points;
        let m = self.n_clusters;
        let mut has_child_cluster = vec![false; m];
        let mut birth = vec![0.0; m];
        for &(par, child, lambda, _) in &self.edges {
            if child >= n {
                has_child_cluster[par - n] = true;
                birth[child - n] = lambda;
            }
        }
        let mut selected = vec![false; m];
        if !has_child_cluster[0] {
            return selected;
        }
        match mode {
            ClusterSelection::Leaf => {
                for c in 1..m {
                    selected[c] = !has_child_cluster[c];
                }
            }
            ClusterSelection::Eom => {
                let mut stability = vec![0.0; m];
                let mut kids: Vec<Vec<usize>> = vec![Vec::new(); m];
                for &(par, child, lambda, sz) in &self.edges {
                    stability[par - n] += (lambda - birth[par - n]) * sz as f64;
                    if child >= n {
                        kids[par - n].push(child - n);
                    }
                }
                // Children always carry larger labels than their parent.
                for c in (1..m).rev() {
                    let sub: f64 = kids[c].iter().map(|&k| stability[k]).sum();
                    if kids[c].is_empty() || stability[c] >= sub {
                        selected[c] = true;
                        let mut stack = kids[c].clone();
                        while let Some(k) = stack.pop() {
                            selected[k] = false;
                            stack.extend(kids[k].iter().copied());
                        }
                    } else {
                        stability[c] = sub;
                    }
                }
            }
        }
        selected
    }
}

/// HDBSCAN over Euclidean rows of `x`. `min_samples` defaults to
/// `min_cluster_size`; the point itself counts as its first neighbor.
pub fn density_cluster(
    x: &DMatrix<f64>,
    min_cluster_size: usize,
    min_samples: Option<usize>,
    mode: ClusterSelection,
) -> Result<Clustering, MlError> {
    if min_cluster_size < 2 {
        return Err(MlError::InvalidParameter("min_cluster_size must be at least 2".into()));
    }
    let k = min_samples.unwrap_or(min_cluster_size);
    if k == 0 {
        return Err(MlError::InvalidParameter("min_samples must be positive".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(MlError::InvalidParameter("non-finite coordinates".into()));
    }
    let n = x.nrows();
    if n < min_cluster_size {
        return Ok(Clustering { labels: vec![NOISE; n], n_clusters: 0, core_distances: vec![f64::INFINITY; n], mst: Vec::new() });
    }
    let core: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<f64> = (0..n).map(|j| euclid(x, i, j)).collect();
            d.sort_by(f64::total_cmp);
            d[(k - 1).min(n - 1)]
        })
        .collect();
    let mst = prim(n, |i, j| euclid(x, i, j).max(core[i]).max(core[j]));
    let tree = condense(n, &mst, min_cluster_size);
    let selected = tree.select(mode);
    let parent = tree.parent_of();
    let mut raw = vec![None; n];
    for (p, slot) in raw.iter_mut().enumerate() {
        let mut c = parent[p];
        while let Some(cl) = c {
            if selected[cl - n] {
                *slot = Some(cl);
                break;
            }
            c = parent[cl];
        }
    }
    let mut remap = std::collections::HashMap::new();
    let labels: Vec<i32> = raw
        .iter()
        .map(|r| match r {
            None => NOISE,
            Some(cl) => {
                let next = remap.len() as i32;
                *remap.entry(*cl).or_insert(next)
            }
        })
        .collect();
    Ok(Clustering { n_clusters: remap.len(), labels, core_distances: core, mst })
}
