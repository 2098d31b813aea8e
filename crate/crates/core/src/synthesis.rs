//! Edge-private motif synthesis by noisy entropic mirror descent.
//!
//! The released object is a [`SanitizedGraph`]: rectified, log-normalized
//! weights in `[0, 1]` plus the [`PrivacyReceipt`] that documents how much
//! noise produced them. Nothing in the sanitized output refers back to the
//! clipped input graph.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ClippedGraph, SparseWeightedGraph, Support, TriangleStats, W_MAX};
use crate::seed::rng_for;

pub const DEFAULT_EPSILON: f64 = 2.0;
pub const DEFAULT_DELTA: f64 = 1e-5;
pub const DEFAULT_CALIB_CONSTANT: f64 = 2.0;

/// Step-size rule of the mirror-descent loop. Every rule only reads the
/// already-noised gradient, so the choice does not affect privacy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `eta / sqrt(t)` for every coordinate.
    Plain,
    /// `eta / sqrt(t)` divided by `max(1, ‖ĝ_t‖∞)`.
    MaxNorm,
    /// Per coordinate `eta / sqrt(Σ_{s≤t} ĝ_s²)`, which decays as `1/sqrt(t)`
    /// for stationary gradient magnitudes.
    AdaGrad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub t_steps: usize,
    /// Base step size; see [`StepRule`] for how it decays.
    pub eta: f64,
    pub step_rule: StepRule,
    pub lambda_reg: f64,
    pub w_max: f64,
    pub w_init: f64,
    pub w_pos_floor: f64,
    pub delta2_override: Option<f64>,
    pub calib_constant: f64,
    /// Random data-independent pairs added to the support, as a multiple of
    /// the clipped edge count.
    pub pad_factor: f64,
    pub seed: u64,
    /// Forces the noise scale to zero. The output is NOT private.
    pub noiseless: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            epsilon: DEFAULT_EPSILON,
            delta: DEFAULT_DELTA,
            t_steps: 500,
            eta: 1.0,
            step_rule: StepRule::AdaGrad,
            lambda_reg: 0.1,
            w_max: W_MAX,
            w_init: 0.1,
            w_pos_floor: 1e-6,
            delta2_override: None,
            calib_constant: DEFAULT_CALIB_CONSTANT,
            pad_factor: 1.0,
            seed: 0,
            noiseless: false,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta must be in (0, 1), got {}", self.delta)));
        }
        if self.t_steps == 0 {
            return Err(Error::invalid("t_steps must be at least 1"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!("eta must be > 0, got {}", self.eta)));
        }
        if !(self.lambda_reg >= 0.0 && self.lambda_reg.is_finite()) {
            return Err(Error::invalid(format!("lambda_reg must be >= 0, got {}", self.lambda_reg)));
        }
        if !(0.0 < self.w_pos_floor && self.w_pos_floor < self.w_init && self.w_init <= self.w_max) {
            return Err(Error::invalid(format!(
                "need 0 < w_pos_floor ({}) < w_init ({}) <= w_max ({})",
                self.w_pos_floor, self.w_init, self.w_max
            )));
        }
        if !(self.calib_constant > 0.0) {
            return Err(Error::invalid("calib_constant must be > 0"));
        }
        if !(self.pad_factor >= 0.0 && self.pad_factor.is_finite()) {
            return Err(Error::invalid("pad_factor must be >= 0"));
        }
        Ok(())
    }

    /// Sensitivity bound in effect: the override if set, else the default bound.
    pub fn delta2(&self, d_max: usize) -> Result<f64> {
        match self.delta2_override {
            Some(d) => Ok(d),
            None => sensitivity_bound(d_max, self.w_max, self.lambda_reg),
        }
    }

    pub fn support_mode(&self) -> String {
        format!("clipped+random_pad(x{})", self.pad_factor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReceipt {
    pub epsilon: f64,
    pub delta: f64,
    pub t_steps: usize,
    pub delta2: f64,
    pub sigma: f64,
    pub d_max: usize,
    pub seed: u64,
    pub support_mode: String,
    pub signal_lost: bool,
    pub audit_noiseless: bool,
    pub calib_constant: f64,
    pub eta: f64,
    pub step_rule: StepRule,
    pub lambda_reg: f64,
    pub w_max: f64,
    pub w_init: f64,
    pub w_pos_floor: f64,
}

impl PrivacyReceipt {
    /// Checks that `sigma` is exactly what the calibration rule yields.
    pub fn verify(&self) -> Result<()> {
        let expected = if self.audit_noiseless {
            0.0
        } else {
            calibrate_noise(self.delta2, self.epsilon, self.delta, self.t_steps, self.calib_constant)?
        };
        if self.sigma.to_bits() != expected.to_bits() {
            return Err(Error::Invariant(format!(
                "receipt sigma {} differs from calibrated {expected}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Released synthetic graph: entries in `[0, 1]`; pairs not stored read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SanitizedGraph {
    pub graph: SparseWeightedGraph,
    pub receipt: PrivacyReceipt,
}

impl SanitizedGraph {
    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    /// `Ŵ_ij`, with 1 on the diagonal and 0 for pairs outside the stored entries.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            self.graph.weight(i, j).unwrap_or(0.0)
        }
    }
}

/// Default L2 sensitivity bound `4·d_max·w_max² + 2·λ_reg·w_max`.
pub fn sensitivity_bound(d_max: usize, w_max: f64, lambda_reg: f64) -> Result<f64> {
    if d_max == 0 {
        return Err(Error::invalid("d_max must be at least 1"));
    }
    if !(w_max > 0.0) {
        return Err(Error::invalid(format!("w_max must be > 0, got {w_max}")));
    }
    if !(lambda_reg >= 0.0) {
        return Err(Error::invalid(format!("lambda_reg must be >= 0, got {lambda_reg}")));
    }
    Ok(4.0 * d_max as f64 * w_max * w_max + 2.0 * lambda_reg * w_max)
}

/// Per-step Gaussian scale `σ = c·Δ₂·sqrt(T·ln(1/δ)) / ε`.
pub fn calibrate_noise(delta2: f64, epsilon: f64, delta: f64, t_steps: usize, c: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be > 0, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must be in (0, 1), got {delta}")));
    }
    if !(delta2 > 0.0) {
        return Err(Error::invalid(format!("delta2 must be > 0, got {delta2}")));
    }
    if t_steps == 0 {
        return Err(Error::invalid("t_steps must be at least 1"));
    }
    if !(c > 0.0) {
        return Err(Error::invalid(format!("calibration constant must be > 0, got {c}")));
    }
    Ok(c * delta2 * (t_steps as f64 * (1.0 / delta).ln()).sqrt() / epsilon)
}

/// Squared motif residual plus quadratic pull towards the input weights,
/// over a fixed support. All vectors are aligned with `support.pairs()`.
#[derive(Debug, Clone)]
pub struct MotifProblem {
    support: Support,
    /// Every triangle of the support once, as its three pair indices.
    triangles: Vec<[u32; 3]>,
    center: Vec<f64>,
    targets: Vec<f64>,
    lambda_reg: f64,
}

/// Triangles `a < b < c` of `support` as `[pair(a,b), pair(a,c), pair(b,c)]`.
fn support_triangles(support: &Support) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for (e_ab, &(a, b)) in support.pairs().iter().enumerate() {
        support.for_each_common_neighbor(a, b, |c, e_ac, e_bc| {
            if c > b {
                out.push([e_ab as u32, e_ac as u32, e_bc as u32]);
            }
        });
    }
    out
}

fn triangle_mass(triangles: &[[u32; 3]], w: &[f64]) -> Vec<f64> {
    let mut tau = vec![0.0; w.len()];
    for &[x, y, z] in triangles {
        let (x, y, z) = (x as usize, y as usize, z as usize);
        tau[x] += w[y] * w[z];
        tau[y] += w[x] * w[z];
        tau[z] += w[x] * w[y];
    }
    tau
}

impl MotifProblem {
    /// `center` holds the input weights on the support (0 for padding pairs);
    /// the targets are the motif masses those weights induce.
    pub fn new(support: Support, center: Vec<f64>, lambda_reg: f64) -> Result<Self> {
        if center.len() != support.n_pairs() {
            return Err(Error::SupportMismatch(format!(
                "{} center weights for {} pairs",
                center.len(),
                support.n_pairs()
            )));
        }
        let triangles = support_triangles(&support);
        let targets = triangle_mass(&triangles, &center);
        Ok(MotifProblem {
            support,
            triangles,
            center,
            targets,
            lambda_reg,
        })
    }

    fn with_targets(support: Support, center: Vec<f64>, targets: Vec<f64>, lambda_reg: f64) -> Self {
        MotifProblem {
            triangles: support_triangles(&support),
            support,
            center,
            targets,
            lambda_reg,
        }
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// `τ(W) − τ(A)` on every supported pair.
    pub fn residuals(&self, w: &[f64]) -> Vec<f64> {
        triangle_mass(&self.triangles, w)
            .into_iter()
            .zip(&self.targets)
            .map(|(tau, t)| tau - t)
            .collect()
    }

    pub fn objective(&self, w: &[f64]) -> f64 {
        let residual: f64 = self.residuals(w).iter().map(|r| r * r).sum();
        let reg: f64 = w.iter().zip(&self.center).map(|(x, c)| (x - c) * (x - c)).sum();
        0.5 * residual + self.lambda_reg * reg
    }

    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        self.gradient_and_objective(w).0
    }

    /// Gradient and objective from one motif-mass evaluation.
    pub fn gradient_and_objective(&self, w: &[f64]) -> (Vec<f64>, f64) {
        let r = self.residuals(w);
        let mut objective = 0.5 * r.iter().map(|x| x * x).sum::<f64>();
        let mut grad = vec![0.0; w.len()];
        for &[x, y, z] in &self.triangles {
            let (x, y, z) = (x as usize, y as usize, z as usize);
            grad[x] += r[y] * w[z] + r[z] * w[y];
            grad[y] += r[x] * w[z] + r[z] * w[x];
            grad[z] += r[x] * w[y] + r[y] * w[x];
        }
        for ((g, &we), &c) in grad.iter_mut().zip(w).zip(&self.center) {
            let diff = we - c;
            objective += self.lambda_reg * diff * diff;
            *g += 2.0 * self.lambda_reg * diff;
        }
        (grad, objective)
    }
}

fn check_shared_support(w: &SparseWeightedGraph, targets: &TriangleStats, center: &[f64]) -> Result<()> {
    if targets.pairs.as_slice() != w.support().pairs() {
        return Err(Error::SupportMismatch("W and the target statistics cover different pairs".into()));
    }
    if targets.tau.len() != targets.pairs.len() || center.len() != w.n_edges() {
        return Err(Error::SupportMismatch(format!(
            "{} targets / {} center weights for {} pairs",
            targets.tau.len(),
            center.len(),
            w.n_edges()
        )));
    }
    Ok(())
}

/// `½·Σ (τ_ij(W) − t_ij)² + λ_reg·Σ (W_ij − A_ij)²` over the support of `w`.
pub fn motif_objective(w: &SparseWeightedGraph, targets: &TriangleStats, center: &[f64], lambda_reg: f64) -> Result<f64> {
    check_shared_support(w, targets, center)?;
    let problem = MotifProblem::with_targets(w.support().clone(), center.to_vec(), targets.tau.clone(), lambda_reg);
    Ok(problem.objective(w.weights()))
}

/// Analytic gradient of [`motif_objective`], one entry per supported pair.
pub fn motif_gradient(w: &SparseWeightedGraph, targets: &TriangleStats, center: &[f64], lambda_reg: f64) -> Result<Vec<f64>> {
    check_shared_support(w, targets, center)?;
    let problem = MotifProblem::with_targets(w.support().clone(), center.to_vec(), targets.tau.clone(), lambda_reg);
    Ok(problem.gradient(w.weights()))
}

/// Entropic mirror step: `W' = clamp(W·exp(−η·g), w_pos_floor, w_max)`.
pub fn mirror_descent_step(w: &[f64], grad: &[f64], eta: f64, w_pos_floor: f64, w_max: f64) -> Result<Vec<f64>> {
    if w.len() != grad.len() {
        return Err(Error::SupportMismatch(format!("{} weights vs {} gradient entries", w.len(), grad.len())));
    }
    if let Some((index, &value)) = grad.iter().enumerate().find(|(_, g)| !g.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    Ok(w.iter()
        .zip(grad)
        .map(|(&x, &g)| (x * (-eta * g).exp()).clamp(w_pos_floor, w_max))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rectified {
    pub values: Vec<f64>,
    /// Every value rectified to zero, so no normalization was possible.
    pub signal_lost: bool,
}

/// `log(1 + max(0, w)) / max_uv log(1 + max(0, w_uv))`; all zeros if the
/// maximum is zero.
pub fn rectified_log_normalize(raw: &[f64]) -> Rectified {
    let logs: Vec<f64> = raw.iter().map(|&w| w.max(0.0).ln_1p()).collect();
    let max = logs.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        Rectified {
            values: logs.into_iter().map(|l| l / max).collect(),
            signal_lost: false,
        }
    } else {
        Rectified {
            values: vec![0.0; raw.len()],
            signal_lost: true,
        }
    }
}

/// Internal view of one synthesis run, exposed for convergence checks.
#[derive(Debug, Clone)]
pub struct SynthesisRun {
    pub sanitized: SanitizedGraph,
    pub problem: MotifProblem,
    /// `W^(T)` before rectification.
    pub final_weights: Vec<f64>,
    /// Objective at `W^(0), …, W^(T)`.
    pub objective_trace: Vec<f64>,
}

impl SynthesisRun {
    /// `max |τ(W^(T)) − τ(A)|` over the support.
    pub fn max_residual(&self) -> f64 {
        self.problem
            .residuals(&self.final_weights)
            .iter()
            .fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Clipped edges plus `round(pad_factor·|E|)` distinct random non-edges.
pub fn padded_support(clipped: &ClippedGraph, pad_factor: f64, seed: u64) -> Result<(Support, Vec<f64>)> {
    let graph = &clipped.graph;
    let n = graph.n_nodes();
    let total_pairs = n * n.saturating_sub(1) / 2;
    let free = total_pairs - graph.n_edges();
    let wanted = ((pad_factor * graph.n_edges() as f64).round() as usize).min(free);
    let mut rng = rng_for(seed, "synthesis/padding");
    let mut pads: Vec<(usize, usize)> = Vec::with_capacity(wanted);
    if wanted > 0 {
        if wanted * 4 > free {
            // Dense regime: sample from the explicit list of free pairs.
            let candidates: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .filter(|&(i, j)| graph.weight(i, j).is_none())
                .collect();
            pads.extend(index::sample(&mut rng, candidates.len(), wanted).into_iter().map(|k| candidates[k]));
        } else {
            let mut seen = std::collections::BTreeSet::new();
            while pads.len() < wanted {
                let i = rng.random_range(0..n);
                let j = rng.random_range(0..n);
                let p = (i.min(j), i.max(j));
                if i != j && graph.weight(p.0, p.1).is_none() && seen.insert(p) {
                    pads.push(p);
                }
            }
        }
    }
    let support = Support::from_pairs(n, graph.support().pairs().iter().copied().chain(pads))?;
    let center = support
        .pairs()
        .iter()
        .map(|&(i, j)| graph.weight(i, j).unwrap_or(0.0))
        .collect();
    Ok((support, center))
}

/// Runs the full private synthesis and returns only the releasable output.
pub fn synthesize(clipped: &ClippedGraph, config: &SynthesisConfig) -> Result<SanitizedGraph> {
    synthesize_traced(clipped, config).map(|run| run.sanitized)
}

/// [`synthesize`] plus the internal state needed to audit convergence.
pub fn synthesize_traced(clipped: &ClippedGraph, config: &SynthesisConfig) -> Result<SynthesisRun> {
    config.validate()?;
    let delta2 = config.delta2(clipped.d_max)?;
    if !(delta2 > 0.0) {
        return Err(Error::invalid(format!("refusing to synthesize with delta2 = {delta2}")));
    }
    let sigma = if config.noiseless {
        0.0
    } else {
        calibrate_noise(delta2, config.epsilon, config.delta, config.t_steps, config.calib_constant)?
    };

    let (support, center) = padded_support(clipped, config.pad_factor, config.seed)?;
    let problem = MotifProblem::new(support, center, config.lambda_reg)?;
    let mut noise_rng = rng_for(config.seed, "synthesis/noise");

    let mut w = vec![config.w_init; problem.support().n_pairs()];
    let mut sq_grad_sum = vec![0.0; w.len()];
    let mut objective_trace = Vec::with_capacity(config.t_steps + 1);
    for t in 1..=config.t_steps {
        let (mut grad, objective) = problem.gradient_and_objective(&w);
        objective_trace.push(objective);
        if sigma > 0.0 {
            for g in &mut grad {
                let z: f64 = noise_rng.sample(StandardNormal);
                *g += sigma * z;
            }
        }
        let base = config.eta / (t as f64).sqrt();
        match config.step_rule {
            StepRule::Plain => w = mirror_descent_step(&w, &grad, base, config.w_pos_floor, config.w_max)?,
            StepRule::MaxNorm => {
                let scale = grad.iter().fold(1.0, |m: f64, g| m.max(g.abs()));
                w = mirror_descent_step(&w, &grad, base / scale, config.w_pos_floor, config.w_max)?;
            }
            StepRule::AdaGrad => {
                // Per-coordinate step sizes are folded into the gradient so
                // the shared step routine applies with unit step size.
                for (acc, g) in sq_grad_sum.iter_mut().zip(grad.iter_mut()) {
                    *acc += *g * *g;
                    if *acc > 0.0 {
                        *g *= config.eta / acc.sqrt();
                    }
                }
                w = mirror_descent_step(&w, &grad, 1.0, config.w_pos_floor, config.w_max)?;
            }
        }
    }
    objective_trace.push(problem.objective(&w));

    let rectified = rectified_log_normalize(&w);
    let entries = problem
        .support()
        .pairs()
        .iter()
        .zip(&rectified.values)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&(i, j), &v)| (i, j, v));
    let graph = SparseWeightedGraph::from_edges(clipped.graph.n_nodes(), entries)?;

    let receipt = PrivacyReceipt {
        epsilon: config.epsilon,
        delta: config.delta,
        t_steps: config.t_steps,
        delta2,
        sigma,
        d_max: clipped.d_max,
        seed: config.seed,
        support_mode: config.support_mode(),
        signal_lost: rectified.signal_lost,
        audit_noiseless: config.noiseless,
        calib_constant: config.calib_constant,
        eta: config.eta,
        step_rule: config.step_rule,
        lambda_reg: config.lambda_reg,
        w_max: config.w_max,
        w_init: config.w_init,
        w_pos_floor: config.w_pos_floor,
    };
    Ok(SynthesisRun {
        sanitized: SanitizedGraph { graph, receipt },
        problem,
        final_weights: w,
        objective_trace,
    })
}
