//! End-to-end orchestration: data → clipped graph → sanitized graph →
//! hash model → retrieval metrics, plus parameter sweeps.

use serde::{Deserialize, Serialize};

use crate::data::{self, generate_synthetic, inductive_split, Item, MultimodalDataset, SyntheticConfig};
use crate::error::{Error, Result};
use crate::eval::{map_at_k, triangle_count_error, Direction, MetricsReport, RetrievalTask, DEFAULT_K_CUTOFF};
use crate::graph::{build_clipped_graph, ClippedGraph, DEFAULT_D_MAX};
use crate::hashing::{binarize, train, HashModel, HashModelConfig, Modality, Trained};
use crate::seed::{derive_seed, hex_digest};
use crate::synthesis::{synthesize, SanitizedGraph, SynthesisConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub synthetic: SyntheticConfig,
    pub query_fraction: f64,
    pub split_seed: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            synthetic: SyntheticConfig::default(),
            query_fraction: 0.1,
            split_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub d_max: usize,
    /// Candidate similarities at or below this value are never selected.
    pub w_floor: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            d_max: DEFAULT_D_MAX,
            w_floor: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k_cutoff: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k_cutoff: DEFAULT_K_CUTOFF,
        }
    }
}

/// Configuration of every phase. Per-phase seeds are derived from the global
/// `seed` by [`RunConfig::effective`]; seed fields inside the phase sections
/// are overwritten there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: String,
    pub data: DataConfig,
    pub graph: GraphConfig,
    pub synthesis: SynthesisConfig,
    pub distill: HashModelConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: "out".to_string(),
            data: DataConfig::default(),
            graph: GraphConfig::default(),
            synthesis: SynthesisConfig::default(),
            distill: HashModelConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl RunConfig {
    /// Copy with phase seeds derived from `seed` and encoder input widths
    /// taken from the data section.
    pub fn effective(&self) -> RunConfig {
        let mut cfg = self.clone();
        cfg.data.synthetic.seed = derive_seed(self.seed, "phase/data");
        cfg.data.split_seed = derive_seed(self.seed, "phase/split");
        cfg.synthesis.seed = derive_seed(self.seed, "phase/synthesis");
        cfg.distill.seed = derive_seed(self.seed, "phase/distill");
        cfg.distill.image_dim = cfg.data.synthetic.image_dim;
        cfg.distill.text_dim = cfg.data.synthetic.text_dim;
        cfg
    }

    /// SHA-256 of the compact JSON serialization.
    pub fn digest(&self) -> String {
        hex_digest(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    pub fn validate(&self) -> Result<()> {
        self.data.synthetic.validate()?;
        self.synthesis.validate()?;
        if self.graph.d_max == 0 || self.eval.k_cutoff == 0 {
            return Err(Error::invalid("d_max and k_cutoff must be positive"));
        }
        Ok(())
    }
}

pub fn generate_data(cfg: &DataConfig) -> Result<MultimodalDataset> {
    let dataset = generate_synthetic(&cfg.synthetic)?;
    inductive_split(&dataset, cfg.query_fraction, cfg.split_seed)
}

/// Clipped graph over `train`, node `i` being `train[i]`.
pub fn build_graph(train: &[Item], cfg: &GraphConfig) -> Result<ClippedGraph> {
    build_clipped_graph(&data::graph_features(train), cfg.d_max, cfg.w_floor)
}

pub fn distill(train_items: &[Item], sanitized: &SanitizedGraph, cfg: &HashModelConfig) -> Result<Trained> {
    train(&data::images(train_items), &data::texts(train_items), sanitized, cfg)
}

/// Retrieval metrics of `model`: query items search the training items
/// (I→T and T→I), and the training image codes are compared with the
/// reference graph by triangle count error.
pub fn evaluate(
    model: &HashModel,
    train_items: &[Item],
    query_items: &[Item],
    reference: &ClippedGraph,
    k_cutoff: usize,
    seed: u64,
    config_digest: String,
) -> Result<MetricsReport> {
    let db_img = binarize(model, &data::images(train_items), Modality::Image)?;
    let db_txt = binarize(model, &data::texts(train_items), Modality::Text)?;
    let q_img = binarize(model, &data::images(query_items), Modality::Image)?;
    let q_txt = binarize(model, &data::texts(query_items), Modality::Text)?;
    let (ql, dl) = (data::labels(query_items), data::labels(train_items));
    let map_i2t = map_at_k(&RetrievalTask {
        direction: Direction::ImageToText,
        queries: &q_img,
        database: &db_txt,
        query_labels: &ql,
        database_labels: &dl,
        k: k_cutoff,
    })?;
    let map_t2i = map_at_k(&RetrievalTask {
        direction: Direction::TextToImage,
        queries: &q_txt,
        database: &db_img,
        query_labels: &ql,
        database_labels: &dl,
        k: k_cutoff,
    })?;
    let tce = triangle_count_error(&db_img, &reference.graph, reference.d_max)?;
    Ok(MetricsReport {
        map_i2t,
        map_t2i,
        map_avg: 0.5 * (map_i2t + map_t2i),
        tce,
        k_bits: model.config.k_bits,
        k_cutoff,
        seed,
        config_digest,
    })
}

/// Every artifact of one in-memory pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub config: RunConfig,
    pub dataset: MultimodalDataset,
    pub clipped: ClippedGraph,
    pub sanitized: SanitizedGraph,
    pub trained: Trained,
    pub report: MetricsReport,
}

/// Runs all phases for `config` (made effective first).
pub fn run_pipeline(config: &RunConfig) -> Result<PipelineRun> {
    let cfg = config.effective();
    cfg.validate()?;
    let dataset = generate_data(&cfg.data)?;
    let (train_items, query_items) = (dataset.train_items()?, dataset.query_items()?);
    let clipped = build_graph(&train_items, &cfg.graph)?;
    let sanitized = synthesize(&clipped, &cfg.synthesis)?;
    let trained = distill(&train_items, &sanitized, &cfg.distill)?;
    let report = evaluate(
        &trained.model,
        &train_items,
        &query_items,
        &clipped,
        cfg.eval.k_cutoff,
        cfg.seed,
        cfg.digest(),
    )?;
    Ok(PipelineRun {
        config: cfg,
        dataset,
        clipped,
        sanitized,
        trained,
        report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Epsilon,
    DMax,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Epsilon => "epsilon",
            SweepParameter::DMax => "d_max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    /// Grid value; `inf` for the noiseless ε point.
    pub value: f64,
    pub repeat: usize,
    pub seed: u64,
    pub map_i2t: f64,
    pub map_t2i: f64,
    pub map_avg: f64,
    pub tce: f64,
}

/// Seed of repeat `r`. It does not depend on the grid point, so every point
/// of a sweep sees the same datasets and noise streams.
pub fn repeat_seed(global: u64, repeat: usize) -> u64 {
    derive_seed(global, &format!("repeat/{repeat}"))
}

/// `base` with one grid value applied. An infinite ε selects the noiseless
/// (NOT PRIVATE) reference mode.
pub fn apply_grid_value(base: &RunConfig, parameter: SweepParameter, value: f64) -> Result<RunConfig> {
    let mut cfg = base.clone();
    match parameter {
        SweepParameter::Epsilon if value == f64::INFINITY => cfg.synthesis.noiseless = true,
        SweepParameter::Epsilon => {
            cfg.synthesis.epsilon = value;
            cfg.synthesis.noiseless = false;
        }
        SweepParameter::DMax => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(Error::invalid(format!("d_max grid value {value} is not a positive integer")));
            }
            cfg.graph.d_max = value as usize;
        }
    }
    Ok(cfg)
}

/// Full pipeline per (grid value, repeat); one row each, in grid-major order.
pub fn run_sweep(base: &RunConfig, parameter: SweepParameter, grid: &[f64], repeats: usize) -> Result<Vec<SweepRow>> {
    if grid.is_empty() || repeats == 0 {
        return Err(Error::invalid("sweep needs a non-empty grid and at least one repeat"));
    }
    let mut rows = Vec::with_capacity(grid.len() * repeats);
    for &value in grid {
        for repeat in 0..repeats {
            let mut cfg = apply_grid_value(base, parameter, value)?;
            cfg.seed = repeat_seed(base.seed, repeat);
            let report = run_pipeline(&cfg)?.report;
            rows.push(SweepRow {
                parameter: parameter.name().to_string(),
                value,
                repeat,
                seed: cfg.seed,
                map_i2t: report.map_i2t,
                map_t2i: report.map_t2i,
                map_avg: report.map_avg,
                tce: report.tce,
            });
        }
    }
    Ok(rows)
}

pub const SWEEP_CSV_HEADER: &str = "parameter,value,repeat,seed,map_i2t,map_t2i,map_avg,tce";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.parameter, r.value, r.repeat, r.seed, r.map_i2t, r.map_t2i, r.map_avg, r.tce
        ));
    }
    out
}

/// Grid values averaged over repeats, in first-appearance order.
pub fn sweep_means(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(v, _, _)| v.to_bits() == r.value.to_bits()) {
            Some(e) => {
                e.1 += r.map_avg;
                e.2 += 1;
            }
            None => out.push((r.value, r.map_avg, 1)),
        }
    }
    out.into_iter().map(|(v, s, c)| (v, s / c as f64)).collect()
}

/// Reference clipping thresholds `{10, 20, 50, 100, 200, 500}` for ten
/// thousand training items, rescaled to `n_train`, deduplicated and kept in
/// `[1, n_train)`.
pub fn scaled_d_max_grid(n_train: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = [10.0, 20.0, 50.0, 100.0, 200.0, 500.0]
        .iter()
        .map(|d: &f64| (d * n_train as f64 / 10_000.0).round().clamp(1.0, n_train.saturating_sub(1).max(1) as f64))
        .collect();
    grid.dedup();
    grid
}

pub fn default_epsilon_grid() -> Vec<f64> {
    vec![0.1, 0.5, 1.0, 2.0, 5.0, 10.0, f64::INFINITY]
}

/// Reference graph for a run whose clipped file is unavailable: rebuilt
/// from the public training features with the same clipping parameters.
pub fn rebuild_reference(train_items: &[Item], cfg: &GraphConfig) -> Result<ClippedGraph> {
    build_graph(train_items, cfg)
}
