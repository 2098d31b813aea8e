use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use motifhash_core::audit::empirical_sensitivity_audit;
use motifhash_core::data::{self, Item, SyntheticConfig};
use motifhash_core::graph::ClippedGraph;
use motifhash_core::hashing::{binarize, HashModel, Modality};
use motifhash_core::io::{self, SplitIds};
use motifhash_core::pipeline::{
    self, default_epsilon_grid, rebuild_reference, run_sweep, scaled_d_max_grid, sweep_csv, sweep_means, GraphConfig,
    RunConfig, SweepParameter,
};
use motifhash_core::synthesis::{PrivacyReceipt, SynthesisConfig};

use crate::args::{
    AuditArgs, BuildGraphArgs, Common, DistillArgs, EvaluateArgs, GenDataArgs, PipelineArgs, SweepArgs, SweepParam,
    SynthesizeArgs,
};
use crate::Failure;

const NOT_PRIVATE: &str = "NOT PRIVATE: noiseless audit mode, the released graph carries no privacy guarantee";

/// Defaults or `--config`, the global seed, then `overrides`; validated.
fn load_config(common: &Common, overrides: impl FnOnce(&mut RunConfig)) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => io::load_json::<RunConfig>(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    common.apply(&mut cfg);
    overrides(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

/// Writes the effective configuration as `<dir>/<command>.config.json`.
fn write_config(dir: &Path, command: &str, cfg: &RunConfig) -> Result<()> {
    io::save_json(&dir.join(format!("{command}.config.json")), cfg)?;
    Ok(())
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn print_receipt(receipt: &PrivacyReceipt) {
    if receipt.audit_noiseless {
        println!("{NOT_PRIVATE}");
    }
    println!(
        "receipt: epsilon={} delta={} t_steps={} delta2={} sigma={} d_max={} support={} signal_lost={}",
        receipt.epsilon,
        receipt.delta,
        receipt.t_steps,
        receipt.delta2,
        receipt.sigma,
        receipt.d_max,
        receipt.support_mode,
        receipt.signal_lost
    );
}

pub fn gen_data(args: GenDataArgs) -> Result<u8> {
    let cfg = load_config(&args.common, |c| args.data.apply(c))?.effective();
    let dataset = pipeline::generate_data(&cfg.data)?;
    let split = dataset.split.as_ref().expect("generate_data always splits");
    let (train, query) = (dataset.train_items()?, dataset.query_items()?);
    create_dir(&args.out)?;
    io::save_features(&args.out.join("train.csv"), &train)?;
    io::save_features(&args.out.join("query.csv"), &query)?;
    io::save_json(&args.out.join("split.json"), &SplitIds::from_split(&dataset.items, split))?;
    write_config(&args.out, "gen-data", &cfg)?;
    println!("generated {} train and {} query items in {}", train.len(), query.len(), args.out.display());
    Ok(0)
}

/// Refuses training inputs that contain query items.
fn check_no_leakage(train: &[Item], split: Option<&SplitIds>, query: Option<&[Item]>) -> Result<()> {
    if let Some(split) = split {
        let train_ids: HashSet<u64> = split.train.iter().copied().collect();
        let query_ids: HashSet<u64> = split.query.iter().copied().collect();
        for item in train {
            if query_ids.contains(&item.id) {
                return Err(Failure::Violation(format!("query item {} is among the graph inputs", item.id)).into());
            }
            if !train_ids.contains(&item.id) {
                return Err(Failure::Violation(format!("item {} is not a training item of the split", item.id)).into());
            }
        }
    }
    if let Some(query) = query {
        let query_ids: HashSet<u64> = query.iter().map(|q| q.id).collect();
        if let Some(item) = train.iter().find(|t| query_ids.contains(&t.id)) {
            return Err(Failure::Violation(format!("query item {} is among the graph inputs", item.id)).into());
        }
    }
    Ok(())
}

pub fn build_graph(args: BuildGraphArgs) -> Result<u8> {
    let cfg = load_config(&args.common, |c| args.graph.apply(c))?.effective();
    let train = io::load_features(&args.train)?;
    let split = args.split.as_deref().map(io::load_json::<SplitIds>).transpose()?;
    let query = args.query.as_deref().map(io::load_features).transpose()?;
    check_no_leakage(&train, split.as_ref(), query.as_deref())?;
    let clipped = pipeline::build_graph(&train, &cfg.graph)?;
    let max_degree = clipped.graph.support().max_degree();
    if max_degree > cfg.graph.d_max {
        return Err(Failure::Violation(format!("max degree {max_degree} exceeds d_max {}", cfg.graph.d_max)).into());
    }
    io::save_graph(&args.out, &clipped)?;
    write_config(&parent_dir(&args.out), "build-graph", &cfg)?;
    println!(
        "clipped graph: {} nodes, {} edges, max degree {max_degree} (d_max {})",
        clipped.graph.n_nodes(),
        clipped.graph.n_edges(),
        cfg.graph.d_max
    );
    Ok(0)
}

pub fn synthesize(args: SynthesizeArgs) -> Result<u8> {
    let cfg = load_config(&args.common, |c| args.synth.apply(c))?.effective();
    let clipped = io::load_graph(&args.graph)?;
    let sanitized = motifhash_core::synthesis::synthesize(&clipped, &cfg.synthesis)?;
    io::save_sanitized(&args.out, &sanitized)?;
    write_config(&parent_dir(&args.out), "synthesize", &cfg)?;
    print_receipt(&sanitized.receipt);
    println!("sanitized graph: {} stored entries -> {}", sanitized.graph.n_edges(), args.out.display());
    Ok(0)
}

fn save_train_codes(dir: &Path, model: &HashModel, train: &[Item]) -> Result<()> {
    let ids: Vec<u64> = train.iter().map(|t| t.id).collect();
    io::save_codes(&dir.join("train_image.codes"), &ids, &binarize(model, &data::images(train), Modality::Image)?)?;
    io::save_codes(&dir.join("train_text.codes"), &ids, &binarize(model, &data::texts(train), Modality::Text)?)?;
    Ok(())
}

pub fn distill(args: DistillArgs) -> Result<u8> {
    let mut cfg = load_config(&args.common, |c| args.distill.apply(c))?.effective();
    let train = io::load_features(&args.train)?;
    let sanitized = io::load_sanitized(&args.sanitized)?;
    if sanitized.n_nodes() != train.len() {
        return Err(Failure::Violation(format!(
            "sanitized graph has {} nodes but {} training items were given",
            sanitized.n_nodes(),
            train.len()
        ))
        .into());
    }
    if let Some(first) = train.first() {
        cfg.distill.image_dim = first.image.len();
        cfg.distill.text_dim = first.text.len();
    }
    let trained = pipeline::distill(&train, &sanitized, &cfg.distill)?;
    create_dir(&args.out)?;
    io::save_model(&args.out.join("model.json"), &trained.model)?;
    save_train_codes(&args.out, &trained.model, &train)?;
    write_config(&args.out, "distill", &cfg)?;
    match trained.loss_trace.last() {
        Some(loss) => println!("trained {} epochs, final mean batch loss {loss:.6}", trained.loss_trace.len()),
        None => println!("0 epochs: emitted the initialized model"),
    }
    Ok(0)
}

pub fn evaluate(args: EvaluateArgs) -> Result<u8> {
    let cfg = load_config(&args.common, |c| {
        args.eval.apply(c);
        args.graph.apply(c);
    })?
    .effective();
    let model = io::load_model(&args.model)?;
    let train = io::load_features(&args.train)?;
    let query = io::load_features(&args.query)?;
    let reference: ClippedGraph = match &args.reference {
        Some(path) => io::load_graph(path)?,
        None => rebuild_reference(&train, &cfg.graph)?,
    };
    let report = pipeline::evaluate(&model, &train, &query, &reference, cfg.eval.k_cutoff, cfg.seed, cfg.digest())?;
    io::save_json(&args.out, &report)?;
    write_config(&parent_dir(&args.out), "evaluate", &cfg)?;
    println!(
        "mAP@{}: i2t={:.4} t2i={:.4} avg={:.4}  TCE={:.4}",
        report.k_cutoff, report.map_i2t, report.map_t2i, report.map_avg, report.tce
    );
    Ok(0)
}

pub fn sweep(args: SweepArgs) -> Result<u8> {
    let cfg = load_config(&args.common, |c| {
        args.data.apply(c);
        args.graph.apply(c);
        args.synth.apply(c);
        args.distill.apply(c);
        args.eval.apply(c);
    })?;
    let parameter = match args.param {
        SweepParam::Epsilon => SweepParameter::Epsilon,
        SweepParam::Dmax => SweepParameter::DMax,
    };
    let grid = match &args.grid {
        Some(g) => g.clone(),
        None => match parameter {
            SweepParameter::Epsilon => default_epsilon_grid(),
            SweepParameter::DMax => {
                let n = cfg.data.synthetic.n_items;
                let n_query = (cfg.data.query_fraction * n as f64).round() as usize;
                scaled_d_max_grid(n - n_query)
            }
        },
    };
    if grid.iter().any(|v| v.is_infinite()) && parameter == SweepParameter::Epsilon {
        println!("grid point eps=inf is the noiseless reference: {NOT_PRIVATE}");
    }
    let rows = run_sweep(&cfg, parameter, &grid, args.repeats)?;
    io::write_atomic(&args.out, sweep_csv(&rows).as_bytes())?;
    write_config(&parent_dir(&args.out), "sweep", &cfg)?;
    for (value, mean) in sweep_means(&rows) {
        println!("{}={value}: mean map_avg {mean:.4}", parameter.name());
    }
    Ok(0)
}

pub fn audit_sensitivity(args: AuditArgs) -> Result<u8> {
    let mut cfg = load_config(&args.common, |_| {})?;
    if let Some(l) = args.lambda_reg {
        cfg.synthesis.lambda_reg = l;
    }
    cfg.synthesis.delta2_override = args.delta2;
    let clipped = match &args.graph {
        Some(path) => io::load_graph(path)?,
        None => {
            let synthetic = SyntheticConfig {
                n_items: args.n_nodes,
                n_communities: args.communities,
                seed: cfg.effective().data.synthetic.seed,
                ..Default::default()
            };
            let items = data::generate_synthetic(&synthetic)?.items;
            pipeline::build_graph(&items, &GraphConfig { d_max: args.dmax, w_floor: 0.0 })?
        }
    };
    let synthesis: &SynthesisConfig = &cfg.synthesis;
    let report = empirical_sensitivity_audit(&clipped, synthesis)?;
    io::save_json(&args.out, &report)?;
    write_config(&parent_dir(&args.out), "audit-sensitivity", &cfg)?;
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    println!(
        "{verdict}: observed max {:.6} vs bound {:.6} over {} neighbors ({} nodes, d_max {})",
        report.observed_max, report.delta2, report.neighbors_checked, report.n_nodes, report.d_max
    );
    if report.pass {
        Ok(0)
    } else {
        Err(Failure::Violation(format!(
            "observed sensitivity {} exceeds the bound {}",
            report.observed_max, report.delta2
        ))
        .into())
    }
}

pub fn pipeline(args: PipelineArgs) -> Result<u8> {
    let cfg = load_config(&args.common, |c| {
        args.data.apply(c);
        args.graph.apply(c);
        args.synth.apply(c);
        args.distill.apply(c);
        args.eval.apply(c);
    })?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    let run = pipeline::run_pipeline(&cfg)?;
    let split = run.dataset.split.as_ref().expect("pipeline datasets are split");
    let train = run.dataset.train_items()?;
    create_dir(&out)?;
    io::save_features(&out.join("train.csv"), &train)?;
    io::save_features(&out.join("query.csv"), &run.dataset.query_items()?)?;
    io::save_json(&out.join("split.json"), &SplitIds::from_split(&run.dataset.items, split))?;
    io::save_graph(&out.join("clipped.tsv"), &run.clipped)?;
    io::save_sanitized(&out.join("sanitized.tsv"), &run.sanitized)?;
    io::save_model(&out.join("model.json"), &run.trained.model)?;
    save_train_codes(&out, &run.trained.model, &train)?;
    io::save_json(&out.join("metrics.json"), &run.report)?;
    write_config(&out, "pipeline", &run.config)?;
    print_receipt(&run.sanitized.receipt);
    let r = &run.report;
    println!(
        "mAP@{}: i2t={:.4} t2i={:.4} avg={:.4}  TCE={:.4}  -> {}",
        r.k_cutoff,
        r.map_i2t,
        r.map_t2i,
        r.map_avg,
        r.tce,
        out.display()
    );
    Ok(0)
}
