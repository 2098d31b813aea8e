//! Hamming-ranking retrieval metrics and triangle count error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{and_symmetrize, triangle_stats, SparseWeightedGraph};
use crate::hashing::CodeMatrix;

pub const DEFAULT_K_CUTOFF: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    ImageToText,
    TextToImage,
}

/// Items sharing at least one label are relevant to each other.
pub fn shares_label(a: &[u32], b: &[u32]) -> bool {
    a.iter().any(|x| b.contains(x))
}

/// One retrieval direction: query codes searched against database codes.
#[derive(Debug, Clone)]
pub struct RetrievalTask<'a> {
    pub direction: Direction,
    pub queries: &'a CodeMatrix,
    pub database: &'a CodeMatrix,
    pub query_labels: &'a [Vec<u32>],
    pub database_labels: &'a [Vec<u32>],
    pub k: usize,
}

/// Database indices by ascending Hamming distance, ties by ascending index.
pub fn hamming_rank(queries: &CodeMatrix, q: usize, database: &CodeMatrix) -> Result<Vec<usize>> {
    if queries.k_bits() != database.k_bits() {
        return Err(Error::invalid(format!(
            "query codes have {} bits, database codes {}",
            queries.k_bits(),
            database.k_bits()
        )));
    }
    let mut keyed: Vec<(u32, usize)> = (0..database.len()).map(|d| (queries.hamming(q, database, d), d)).collect();
    keyed.sort_unstable();
    Ok(keyed.into_iter().map(|(_, d)| d).collect())
}

/// `AP@k = Σ_{r≤k, rel(r)} precision@r / min(k, #relevant)`; 0 without relevant items.
///
/// `relevant` lists the flag of every ranked item, so `#relevant` counts
/// relevant items at any rank.
pub fn average_precision(relevant: &[bool], k: usize) -> f64 {
    let total = relevant.iter().filter(|&&r| r).count();
    if total == 0 || k == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, _) in relevant.iter().take(k).enumerate().filter(|(_, &r)| r) {
        hits += 1;
        sum += hits as f64 / (rank + 1) as f64;
    }
    sum / k.min(total) as f64
}

/// Mean AP@k over all queries of `task`.
pub fn map_at_k(task: &RetrievalTask<'_>) -> Result<f64> {
    let nq = task.queries.len();
    if nq == 0 {
        return Err(Error::invalid("empty query set"));
    }
    if task.query_labels.len() != nq || task.database_labels.len() != task.database.len() {
        return Err(Error::invalid("label lists do not match the code matrices"));
    }
    let mut total = 0.0;
    for q in 0..nq {
        let ranking = hamming_rank(task.queries, q, task.database)?;
        let flags: Vec<bool> = ranking
            .iter()
            .map(|&d| shares_label(&task.query_labels[q], &task.database_labels[d]))
            .collect();
        total += average_precision(&flags, task.k);
    }
    Ok(total / nq as f64)
}

/// Degree-clipped kNN graph in Hamming space: AND symmetrization, unit
/// weights, ties to the lower index.
pub fn hamming_knn_graph(codes: &CodeMatrix, d_max: usize) -> Result<SparseWeightedGraph> {
    let n = codes.len();
    if d_max == 0 {
        return Err(Error::invalid("d_max must be at least 1"));
    }
    let lists: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut cands: Vec<(u32, usize)> =
                (0..n).filter(|&j| j != i).map(|j| (codes.hamming(i, codes, j), j)).collect();
            if cands.len() > d_max {
                cands.select_nth_unstable(d_max - 1);
                cands.truncate(d_max);
            }
            let mut ids: Vec<usize> = cands.into_iter().map(|(_, j)| j).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    SparseWeightedGraph::from_edges(n, and_symmetrize(&lists).into_iter().map(|(i, j)| (i, j, 1.0)))
}

/// `|Δ_H − Δ_G| / max(Δ_G, 1)` from unweighted triangle counts.
pub fn triangle_count_error_from_counts(hamming_triangles: u64, reference_triangles: u64) -> f64 {
    (hamming_triangles as f64 - reference_triangles as f64).abs() / (reference_triangles.max(1) as f64)
}

/// Triangle count error of the code-induced Hamming graph against `reference`.
pub fn triangle_count_error(codes: &CodeMatrix, reference: &SparseWeightedGraph, d_max: usize) -> Result<f64> {
    if codes.len() != reference.n_nodes() {
        return Err(Error::invalid(format!(
            "{} codes but the reference graph has {} nodes",
            codes.len(),
            reference.n_nodes()
        )));
    }
    let induced = hamming_knn_graph(codes, d_max)?;
    Ok(triangle_count_error_from_counts(
        triangle_stats(&induced).triangles,
        triangle_stats(reference).triangles,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub map_i2t: f64,
    pub map_t2i: f64,
    pub map_avg: f64,
    pub tce: f64,
    pub k_bits: usize,
    pub k_cutoff: usize,
    pub seed: u64,
    pub config_digest: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes(rows: &[&str]) -> CodeMatrix {
        let bools: Vec<Vec<bool>> = rows.iter().map(|r| r.chars().map(|c| c == '+').collect()).collect();
        CodeMatrix::from_bools(rows[0].len(), &bools).unwrap()
    }

    #[test]
    fn rank_examples() {
        let q = codes(&["++++"]);
        let db = codes(&["++++", "+--+", "+++-"]);
        assert_eq!(hamming_rank(&q, 0, &db).unwrap(), vec![0, 2, 1]);
        let db = codes(&["-+++", "+-++"]);
        assert_eq!(hamming_rank(&q, 0, &db).unwrap(), vec![0, 1]);
        assert!(hamming_rank(&q, 0, &codes(&["++"])).is_err());
    }

    #[test]
    fn ap_examples() {
        assert!((average_precision(&[true, false, true], 3) - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(average_precision(&[true, true, true], 3), 1.0);
        assert_eq!(average_precision(&[false, false], 2), 0.0);
    }

    #[test]
    fn map_single_query_and_empty() {
        let q = codes(&["++"]);
        let db = codes(&["++", "--", "+-"]);
        let ql = vec![vec![1]];
        let dl = vec![vec![1], vec![2], vec![1, 3]];
        let task = RetrievalTask {
            direction: Direction::ImageToText,
            queries: &q,
            database: &db,
            query_labels: &ql,
            database_labels: &dl,
            k: 3,
        };
        // Ranking (0, 2, 1): relevant, relevant, not.
        assert_eq!(map_at_k(&task).unwrap(), 1.0);
        let empty = CodeMatrix::from_bools(2, &[]).unwrap();
        let task = RetrievalTask { queries: &empty, query_labels: &[], ..task };
        assert!(map_at_k(&task).is_err());
    }

    #[test]
    fn tce_examples() {
        assert_eq!(triangle_count_error_from_counts(2, 4), 0.5);
        assert_eq!(triangle_count_error_from_counts(3, 0), 3.0);
        let c = codes(&["++++", "+++-", "++--", "----"]);
        let induced = hamming_knn_graph(&c, 2).unwrap();
        assert_eq!(triangle_count_error(&c, &induced, 2).unwrap(), 0.0);
        assert!(triangle_count_error(&c, &SparseWeightedGraph::empty(3), 2).is_err());
    }
}
