//! Sensitivity-bounded similarity graphs and exact triangle-motif statistics.
//!
//! A [`Support`] is the undirected edge structure (sorted pairs plus sorted
//! adjacency lists carrying pair indices). A [`SparseWeightedGraph`] attaches
//! one strictly positive weight to every pair of a support. Keeping the two
//! apart lets the synthesis code run motif arithmetic over weight vectors
//! that may contain zeros (padding pairs absent from the input graph).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest weight a similarity edge can carry. Cosine weights live in [0, 1].
pub const W_MAX: f64 = 1.0;

/// Default degree bound.
pub const DEFAULT_D_MAX: usize = 100;

/// Node-count guard for the cubic triangle oracle.
pub const BRUTEFORCE_MAX_NODES: usize = 200;

/// Undirected edge structure with no weights attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    n_nodes: usize,
    pairs: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Support {
    pub fn empty(n_nodes: usize) -> Self {
        Support {
            n_nodes,
            pairs: Vec::new(),
            adjacency: vec![Vec::new(); n_nodes],
        }
    }

    /// Builds a support from unordered pairs. Pairs may be given in either
    /// orientation and in any order; they are canonicalized to `i < j` and
    /// sorted lexicographically.
    pub fn from_pairs(n_nodes: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon: Vec<(usize, usize)> = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(Error::invalid(format!("self loop at node {a}")));
            }
            if a >= n_nodes || b >= n_nodes {
                return Err(Error::invalid(format!(
                    "pair ({a}, {b}) out of range for {n_nodes} nodes"
                )));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate pair {:?}", w[0])));
        }
        let mut adjacency = vec![Vec::new(); n_nodes];
        for (idx, &(i, j)) in canon.iter().enumerate() {
            adjacency[i].push((j, idx));
            adjacency[j].push((i, idx));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Support {
            n_nodes,
            pairs: canon,
            adjacency,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Neighbors of `node` as `(neighbor, pair index)`, sorted by neighbor.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn pair_index(&self, a: usize, b: usize) -> Option<usize> {
        if a >= self.n_nodes || b >= self.n_nodes {
            return None;
        }
        let list = &self.adjacency[a];
        list.binary_search_by_key(&b, |&(nb, _)| nb)
            .ok()
            .map(|pos| list[pos].1)
    }

    /// Calls `f(k, pair(a,k), pair(b,k))` for every common neighbor `k` of
    /// `a` and `b`, in ascending order of `k`.
    #[inline]
    pub fn for_each_common_neighbor(&self, a: usize, b: usize, mut f: impl FnMut(usize, usize, usize)) {
        let (la, lb) = (&self.adjacency[a], &self.adjacency[b]);
        let (mut x, mut y) = (0, 0);
        while x < la.len() && y < lb.len() {
            let (ka, ea) = la[x];
            let (kb, eb) = lb[y];
            match ka.cmp(&kb) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    f(ka, ea, eb);
                    x += 1;
                    y += 1;
                }
            }
        }
    }

    /// Per-pair motif mass `τ_ij = Σ_k w_ik·w_jk` over common neighbors in
    /// this support, for an arbitrary weight vector aligned with `pairs()`.
    pub fn motif_mass(&self, weights: &[f64]) -> Vec<f64> {
        debug_assert_eq!(weights.len(), self.pairs.len());
        self.pairs
            .iter()
            .map(|&(i, j)| {
                let mut tau = 0.0;
                self.for_each_common_neighbor(i, j, |_, e_ik, e_jk| {
                    tau += weights[e_ik] * weights[e_jk];
                });
                tau
            })
            .collect()
    }
}

/// Symmetric graph with strictly positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseWeightedGraph {
    support: Support,
    weights: Vec<f64>,
}

impl SparseWeightedGraph {
    pub fn empty(n_nodes: usize) -> Self {
        SparseWeightedGraph {
            support: Support::empty(n_nodes),
            weights: Vec::new(),
        }
    }

    /// Builds a graph from `(i, j, w)` triples. Rejects self loops, repeated
    /// pairs, and weights that are not finite and strictly positive.
    pub fn from_edges(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut triples: Vec<(usize, usize, f64)> = edges
            .into_iter()
            .map(|(a, b, w)| (a.min(b), a.max(b), w))
            .collect();
        for &(i, j, w) in &triples {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!("edge ({i}, {j}) has weight {w}; weights must be positive")));
            }
        }
        triples.sort_by_key(|a| (a.0, a.1));
        let support = Support::from_pairs(n_nodes, triples.iter().map(|&(i, j, _)| (i, j)))?;
        let weights = triples.into_iter().map(|(_, _, w)| w).collect();
        Ok(SparseWeightedGraph { support, weights })
    }

    /// Attaches weights to an existing support, one per pair.
    pub fn with_support(support: Support, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != support.n_pairs() {
            return Err(Error::SupportMismatch(format!(
                "{} weights for {} pairs",
                weights.len(),
                support.n_pairs()
            )));
        }
        if let Some((idx, &w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::invalid(format!("weight {idx} is {w}; weights must be positive")));
        }
        Ok(SparseWeightedGraph { support, weights })
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn n_nodes(&self) -> usize {
        self.support.n_nodes()
    }

    pub fn n_edges(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Edges as `(i, j, w)` with `i < j`, lexicographically ordered.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.support
            .pairs()
            .iter()
            .zip(&self.weights)
            .map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.support.pair_index(a, b).map(|e| self.weights[e])
    }

    pub fn degree(&self, node: usize) -> usize {
        self.support.degree(node)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Returns a copy with `(a, b)` set to `w`, inserting the edge if absent.
    pub fn with_edge(&self, a: usize, b: usize, w: f64) -> Result<Self> {
        let (a, b) = (a.min(b), a.max(b));
        let edges = self
            .edges()
            .filter(|&(i, j, _)| (i, j) != (a, b))
            .chain(std::iter::once((a, b, w)));
        SparseWeightedGraph::from_edges(self.n_nodes(), edges)
    }

    /// Returns a copy with `(a, b)` removed (a no-op when absent).
    pub fn without_edge(&self, a: usize, b: usize) -> Self {
        let (a, b) = (a.min(b), a.max(b));
        let edges = self.edges().filter(|&(i, j, _)| (i, j) != (a, b));
        SparseWeightedGraph::from_edges(self.n_nodes(), edges).expect("subgraph of a valid graph is valid")
    }
}

/// Graph whose every node has degree at most `d_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClippedGraph {
    pub graph: SparseWeightedGraph,
    pub d_max: usize,
}

impl ClippedGraph {
    /// Wraps `graph` after checking the degree bound by exhaustive scan.
    pub fn new(graph: SparseWeightedGraph, d_max: usize) -> Result<Self> {
        if d_max == 0 {
            return Err(Error::invalid("d_max must be at least 1"));
        }
        if let Some(node) = (0..graph.n_nodes()).find(|&v| graph.degree(v) > d_max) {
            return Err(Error::Invariant(format!(
                "node {node} has degree {} > d_max = {d_max}",
                graph.degree(node)
            )));
        }
        Ok(ClippedGraph { graph, d_max })
    }
}

/// Dense symmetric cosine-similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Pairwise cosine similarities of the rows of `features`.
///
/// The diagonal is exactly 1 and the matrix is exactly symmetric (the upper
/// triangle is computed once and mirrored).
pub fn cosine_similarity(features: &[Vec<f64>]) -> Result<SimilarityMatrix> {
    let n = features.len();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 rows, got {n}")));
    }
    let dim = features[0].len();
    let mut norms = Vec::with_capacity(n);
    for (row, f) in features.iter().enumerate() {
        if f.len() != dim {
            return Err(Error::invalid(format!(
                "row {row} has {} columns, expected {dim}",
                f.len()
            )));
        }
        if let Some(&v) = f.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("row {row} contains non-finite value {v}")));
        }
        // Squared norms: dividing by sqrt(|a|²·|b|²) makes parallel rows exactly 1.
        let norm = f.iter().map(|v| v * v).sum::<f64>();
        if norm == 0.0 {
            return Err(Error::ZeroNormRow { row });
        }
        norms.push(norm);
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let dot: f64 = features[i].iter().zip(&features[j]).map(|(a, b)| a * b).sum();
            let s = (dot / (norms[i] * norms[j]).sqrt()).clamp(-1.0, 1.0);
            data[i * n + j] = s;
            data[j * n + i] = s;
        }
    }
    Ok(SimilarityMatrix { n, data })
}

/// Top-`d_max` candidate list of every node: highest similarity first, ties
/// to the lower index, self excluded, similarities `<= w_floor` excluded.
/// Each returned list is sorted by node index.
pub fn candidate_lists(sim: &SimilarityMatrix, d_max: usize, w_floor: f64) -> Vec<Vec<usize>> {
    let n = sim.n();
    (0..n)
        .map(|i| {
            let row = sim.row(i);
            let mut cands: Vec<usize> = (0..n).filter(|&j| j != i && row[j] > w_floor).collect();
            let by_rank = |a: &usize, b: &usize| row[*b].total_cmp(&row[*a]).then(a.cmp(b));
            if cands.len() > d_max {
                cands.select_nth_unstable_by(d_max - 1, by_rank);
                cands.truncate(d_max);
            }
            cands.sort_unstable();
            cands
        })
        .collect()
}

/// Pairs `(i, j)`, `i < j`, where each endpoint lists the other.
pub fn and_symmetrize(lists: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, list) in lists.iter().enumerate() {
        for &j in list.iter().filter(|&&j| j > i) {
            if lists[j].binary_search(&i).is_ok() {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Pairs where at least one endpoint lists the other.
pub fn or_symmetrize(lists: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = lists
        .iter()
        .enumerate()
        .flat_map(|(i, list)| list.iter().map(move |&j| (i.min(j), i.max(j))))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Degree-clipped cosine kNN graph with AND symmetrization.
///
/// Edge weights are `max(cos, 0)` capped at [`W_MAX`]; pairs whose weight
/// would be zero are dropped.
pub fn build_clipped_graph(features: &[Vec<f64>], d_max: usize, w_floor: f64) -> Result<ClippedGraph> {
    let n = features.len();
    if d_max == 0 {
        return Err(Error::invalid("d_max must be at least 1"));
    }
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 nodes, got {n}")));
    }
    if d_max >= n {
        return Err(Error::invalid(format!(
            "d_max = {d_max} must be below the node count {n}; clipping would be vacuous"
        )));
    }
    let sim = cosine_similarity(features)?;
    let lists = candidate_lists(&sim, d_max, w_floor);
    let edges = and_symmetrize(&lists)
        .into_iter()
        .map(|(i, j)| (i, j, sim.get(i, j).max(0.0).min(W_MAX)))
        .filter(|&(_, _, w)| w > 0.0);
    let graph = SparseWeightedGraph::from_edges(n, edges)?;
    ClippedGraph::new(graph, d_max)
}

/// Per-edge and global triangle-motif statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleStats {
    /// Edge pairs `(i, j)`, `i < j`, in the graph's canonical order.
    pub pairs: Vec<(usize, usize)>,
    /// `τ_ij` aligned with `pairs`.
    pub tau: Vec<f64>,
    /// `Σ_{i<j} w_ij·τ_ij / 3`.
    pub weighted_total: f64,
    /// Number of 3-cycles ignoring weights.
    pub triangles: u64,
}

impl TriangleStats {
    pub fn tau_of(&self, a: usize, b: usize) -> Option<f64> {
        let key = (a.min(b), a.max(b));
        self.pairs.binary_search(&key).ok().map(|p| self.tau[p])
    }
}

/// Exact triangle statistics by sorted-adjacency intersection, `O(Σ deg²)`.
pub fn triangle_stats(graph: &SparseWeightedGraph) -> TriangleStats {
    let support = graph.support();
    let tau = support.motif_mass(graph.weights());
    let mut triangles = 0u64;
    for &(i, j) in support.pairs() {
        support.for_each_common_neighbor(i, j, |k, _, _| {
            if k > j {
                triangles += 1;
            }
        });
    }
    let weighted_total = graph.weights().iter().zip(&tau).map(|(w, t)| w * t).sum::<f64>() / 3.0;
    TriangleStats {
        pairs: support.pairs().to_vec(),
        tau,
        weighted_total,
        triangles,
    }
}

/// Cubic oracle for [`triangle_stats`]: enumerates every node triple.
pub fn triangle_stats_bruteforce(graph: &SparseWeightedGraph) -> Result<TriangleStats> {
    let n = graph.n_nodes();
    if n > BRUTEFORCE_MAX_NODES {
        return Err(Error::TooLarge(n, BRUTEFORCE_MAX_NODES));
    }
    let mut dense = vec![0.0; n * n];
    let mut present = vec![false; n * n];
    for (i, j, w) in graph.edges() {
        dense[i * n + j] = w;
        dense[j * n + i] = w;
        present[i * n + j] = true;
        present[j * n + i] = true;
    }
    let mut tau_dense = vec![0.0; n * n];
    let mut triangles = 0u64;
    for a in 0..n {
        for b in (a + 1)..n {
            if !present[a * n + b] {
                continue;
            }
            for c in (b + 1)..n {
                if present[a * n + c] && present[b * n + c] {
                    triangles += 1;
                    tau_dense[a * n + b] += dense[a * n + c] * dense[b * n + c];
                    tau_dense[a * n + c] += dense[a * n + b] * dense[c * n + b];
                    tau_dense[b * n + c] += dense[b * n + a] * dense[c * n + a];
                }
            }
        }
    }
    let pairs = graph.support().pairs().to_vec();
    let tau: Vec<f64> = pairs.iter().map(|&(i, j)| tau_dense[i * n + j]).collect();
    let weighted_total = graph.weights().iter().zip(&tau).map(|(w, t)| w * t).sum::<f64>() / 3.0;
    Ok(TriangleStats {
        pairs,
        tau,
        weighted_total,
        triangles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub max_degree: usize,
    pub mean_degree: f64,
    /// Total edge weight `m`.
    pub total_weight: f64,
}

pub fn degree_stats(graph: &SparseWeightedGraph) -> DegreeStats {
    let n = graph.n_nodes();
    let mean_degree = if n == 0 {
        0.0
    } else {
        2.0 * graph.n_edges() as f64 / n as f64
    };
    DegreeStats {
        max_degree: graph.support().max_degree(),
        mean_degree,
        total_weight: graph.weights().iter().sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize, pairs: &[(usize, usize)]) -> SparseWeightedGraph {
        SparseWeightedGraph::from_edges(n, pairs.iter().map(|&(i, j)| (i, j, 1.0))).unwrap()
    }

    fn k4() -> SparseWeightedGraph {
        unit(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    }

    #[test]
    fn cosine_examples() {
        let s = cosine_similarity(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(s.get(0, 1), 1.0);
        let s = cosine_similarity(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(s.get(0, 1), 0.0);
        let s = cosine_similarity(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!((s.get(0, 1) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.get(0, 1), s.get(1, 0));
    }

    #[test]
    fn cosine_rejects_zero_row() {
        let err = cosine_similarity(&[vec![1.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::ZeroNormRow { row: 1 }));
        assert!(err.to_string().contains('1'));
    }

    #[test]
    fn orthogonal_tie_break_keeps_first_pair() {
        let feats = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let sim = cosine_similarity(&feats).unwrap();
        let lists = candidate_lists(&sim, 1, -1.0);
        assert_eq!(lists, vec![vec![1], vec![0], vec![0]]);
        assert_eq!(and_symmetrize(&lists), vec![(0, 1)]);
        // The surviving pair has cosine 0, which maps to weight 0 and is dropped.
        let clipped = build_clipped_graph(&feats, 1, -1.0).unwrap();
        assert_eq!(clipped.graph.n_edges(), 0);
    }

    #[test]
    fn clipping_rejects_vacuous_bound() {
        let feats = vec![vec![1.0, 0.1], vec![0.9, 0.2], vec![0.8, 0.3]];
        assert!(build_clipped_graph(&feats, 3, 0.0).is_err());
        assert!(build_clipped_graph(&feats, 0, 0.0).is_err());
        let g = build_clipped_graph(&feats, 2, 0.0).unwrap();
        assert_eq!(g.graph.n_edges(), 3);
        assert!(g.graph.weights().iter().all(|&w| w > 0.0 && w <= W_MAX));
    }

    #[test]
    fn triangle_examples() {
        let empty = SparseWeightedGraph::empty(5);
        let st = triangle_stats(&empty);
        assert_eq!((st.weighted_total, st.triangles), (0.0, 0));

        let cycle = unit(3, &[(0, 1), (1, 2), (0, 2)]);
        let st = triangle_stats(&cycle);
        assert_eq!(st.tau, vec![1.0; 3]);
        assert_eq!(st.triangles, 1);
        assert_eq!(st, triangle_stats_bruteforce(&cycle).unwrap());

        let st = triangle_stats(&k4());
        assert_eq!(st.tau, vec![2.0; 6]);
        assert_eq!(st.triangles, 4);
        assert_eq!(st, triangle_stats_bruteforce(&k4()).unwrap());

        let path = unit(3, &[(0, 1), (1, 2)]);
        assert_eq!(triangle_stats_bruteforce(&path).unwrap().tau, vec![0.0, 0.0]);
    }

    #[test]
    fn bruteforce_guard() {
        let big = SparseWeightedGraph::empty(BRUTEFORCE_MAX_NODES + 1);
        assert!(matches!(triangle_stats_bruteforce(&big), Err(Error::TooLarge(..))));
    }

    #[test]
    fn degree_examples() {
        let d = degree_stats(&SparseWeightedGraph::empty(0));
        assert_eq!((d.max_degree, d.mean_degree, d.total_weight), (0, 0.0, 0.0));
        let d = degree_stats(&unit(3, &[(0, 1), (1, 2), (0, 2)]));
        assert_eq!((d.max_degree, d.mean_degree, d.total_weight), (2, 2.0, 3.0));
        let d = degree_stats(&k4());
        assert_eq!((d.max_degree, d.mean_degree, d.total_weight), (3, 3.0, 6.0));
    }

    #[test]
    fn graph_validation() {
        assert!(SparseWeightedGraph::from_edges(3, [(1, 1, 0.5)]).is_err());
        assert!(SparseWeightedGraph::from_edges(3, [(0, 1, 0.5), (1, 0, 0.2)]).is_err());
        assert!(SparseWeightedGraph::from_edges(3, [(0, 1, 0.0)]).is_err());
        assert!(SparseWeightedGraph::from_edges(3, [(0, 5, 0.5)]).is_err());
        let g = SparseWeightedGraph::from_edges(3, [(2, 0, 0.5)]).unwrap();
        assert_eq!(g.weight(0, 2), Some(0.5));
        assert_eq!(g.weight(2, 0), Some(0.5));
        assert_eq!(g.weight(0, 1), None);
    }

    #[test]
    fn and_is_subset_of_or() {
        let lists = vec![vec![1, 2], vec![0], vec![1], vec![0, 2]];
        let and = and_symmetrize(&lists);
        let or = or_symmetrize(&lists);
        assert_eq!(and, vec![(0, 1)]);
        assert!(and.iter().all(|p| or.contains(p)));
    }
}
