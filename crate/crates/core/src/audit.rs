//! Exhaustive empirical check of the gradient sensitivity bound.
//!
//! For a small clipped graph `A`, every neighboring graph `A'` reachable by
//! one edge addition, removal, or weight change to `w_max` that keeps the
//! degree bound is enumerated. Both gradients are evaluated on the union
//! support at `W = w_max` everywhere. The data-dependent part of the
//! gradient is linear in `W` with entries of a single sign, so this point
//! maximizes the L2 change over the whole feasible box `[w_pos_floor, w_max]`.
//! Padding pairs are not part of the audited support.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ClippedGraph, SparseWeightedGraph, Support};
use crate::synthesis::{MotifProblem, SynthesisConfig};

pub const AUDIT_MAX_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeChange {
    Add,
    Remove,
    Reweight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub n_nodes: usize,
    pub d_max: usize,
    pub neighbors_checked: usize,
    /// Largest `‖∇L_A(W) − ∇L_A'(W)‖₂` seen.
    pub observed_max: f64,
    /// Bound the observation is compared against.
    pub delta2: f64,
    pub pass: bool,
    /// Neighbor attaining `observed_max`, if any neighbor exists.
    pub worst: Option<(EdgeChange, usize, usize)>,
}

fn gradient_on(support: &Support, graph: &SparseWeightedGraph, w: &[f64], lambda_reg: f64) -> Result<Vec<f64>> {
    let center = support
        .pairs()
        .iter()
        .map(|&(i, j)| graph.weight(i, j).unwrap_or(0.0))
        .collect();
    Ok(MotifProblem::new(support.clone(), center, lambda_reg)?.gradient(w))
}

pub fn empirical_sensitivity_audit(clipped: &ClippedGraph, config: &SynthesisConfig) -> Result<AuditReport> {
    let graph = &clipped.graph;
    let n = graph.n_nodes();
    if n > AUDIT_MAX_NODES {
        return Err(Error::TooLarge(n, AUDIT_MAX_NODES));
    }
    let d_max = clipped.d_max;
    let w_max = config.w_max;
    let delta2 = config.delta2(d_max)?;

    let mut neighbors = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            match graph.weight(i, j) {
                Some(w) => {
                    neighbors.push((EdgeChange::Remove, i, j, graph.without_edge(i, j)));
                    if w < w_max {
                        neighbors.push((EdgeChange::Reweight, i, j, graph.with_edge(i, j, w_max)?));
                    }
                }
                None if graph.degree(i) < d_max && graph.degree(j) < d_max => {
                    neighbors.push((EdgeChange::Add, i, j, graph.with_edge(i, j, w_max)?));
                }
                None => {}
            }
        }
    }

    let mut observed_max: f64 = 0.0;
    let mut worst = None;
    for (change, i, j, other) in &neighbors {
        // The larger of the two graphs carries the union support.
        let union = if other.n_edges() >= graph.n_edges() { other } else { graph };
        let support = union.support();
        let w = vec![w_max; support.n_pairs()];
        let g_a = gradient_on(support, graph, &w, config.lambda_reg)?;
        let g_b = gradient_on(support, other, &w, config.lambda_reg)?;
        let change_norm = g_a.iter().zip(&g_b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        if worst.is_none() || change_norm > observed_max {
            observed_max = change_norm;
            worst = Some((*change, *i, *j));
        }
    }

    Ok(AuditReport {
        n_nodes: n,
        d_max,
        neighbors_checked: neighbors.len(),
        observed_max,
        delta2,
        pass: observed_max <= delta2,
        worst,
    })
}
