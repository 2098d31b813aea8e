//! Dual-stream hash distillation against a sanitized target graph.
//!
//! Training consumes only public features and a [`SanitizedGraph`]; there is
//! no way to hand it the clipped input graph.

mod adam;
mod codes;
mod loss;
mod mlp;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use codes::CodeMatrix;
pub use loss::{holistic_loss, similarity_s, LossOutput, LossTerms};
pub use mlp::{Encoder, EncoderGrads, ForwardCache};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed::rng_for;
use crate::synthesis::SanitizedGraph;

pub const MODEL_FORMAT: &str = "motifhash-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Image,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HashModelConfig {
    pub k_bits: usize,
    pub image_dim: usize,
    pub text_dim: usize,
    pub hidden_dim: usize,
    pub lambda_cross: f64,
    pub gamma_quant: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for HashModelConfig {
    fn default() -> Self {
        HashModelConfig {
            k_bits: 16,
            image_dim: 0,
            text_dim: 0,
            hidden_dim: 64,
            lambda_cross: 1.0,
            gamma_quant: 0.01,
            batch_size: 64,
            epochs: 100,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

impl HashModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_bits == 0 || self.hidden_dim == 0 || self.batch_size == 0 {
            return Err(Error::invalid("k_bits, hidden_dim and batch_size must be positive"));
        }
        if self.image_dim == 0 || self.text_dim == 0 {
            return Err(Error::invalid("image_dim and text_dim must be positive"));
        }
        if !(self.lambda_cross >= 0.0) || !(self.gamma_quant >= 0.0) {
            return Err(Error::invalid("lambda_cross and gamma_quant must be >= 0"));
        }
        if !(self.adam.lr > 0.0) {
            return Err(Error::invalid("learning rate must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashModel {
    pub format: String,
    pub version: u32,
    pub config: HashModelConfig,
    pub seed: u64,
    pub image: Encoder,
    pub text: Encoder,
}

impl HashModel {
    pub fn init(config: &HashModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rng_for(config.seed, "distill/init");
        let image = Encoder::init(config.image_dim, config.hidden_dim, config.k_bits, &mut rng);
        let text = Encoder::init(config.text_dim, config.hidden_dim, config.k_bits, &mut rng);
        Ok(HashModel {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            config: config.clone(),
            seed: config.seed,
            image,
            text,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != MODEL_FORMAT || self.version != MODEL_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format {} v{}",
                self.format, self.version
            )));
        }
        self.image.validate()?;
        self.text.validate()
    }

    pub fn encoder(&self, modality: Modality) -> &Encoder {
        match modality {
            Modality::Image => &self.image,
            Modality::Text => &self.text,
        }
    }

    /// Continuous tanh embeddings of `features`.
    pub fn embed(&self, features: &[Vec<f64>], modality: Modality) -> Result<Matrix> {
        self.encoder(modality).embed(&Matrix::from_rows(features)?)
    }
}

/// Signs of the model's embeddings; `sign(0) = +1`.
pub fn binarize(model: &HashModel, features: &[Vec<f64>], modality: Modality) -> Result<CodeMatrix> {
    Ok(CodeMatrix::from_embeddings(&model.embed(features, modality)?))
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: HashModel,
    /// Mean batch loss of each epoch.
    pub loss_trace: Vec<f64>,
}

/// `b × b` block of `Ŵ` for the items in `batch`.
pub fn target_block(sanitized: &SanitizedGraph, batch: &[usize]) -> Matrix {
    let b = batch.len();
    let mut block = Matrix::zeros(b, b);
    for (r, &i) in batch.iter().enumerate() {
        for (c, &j) in batch.iter().enumerate() {
            block.set(r, c, sanitized.entry(i, j));
        }
    }
    block
}

/// Trains both encoders against `sanitized`, whose node `i` must be item `i`
/// of the training features.
pub fn train(images: &[Vec<f64>], texts: &[Vec<f64>], sanitized: &SanitizedGraph, config: &HashModelConfig) -> Result<Trained> {
    let n = images.len();
    if texts.len() != n {
        return Err(Error::invalid(format!("{n} image rows but {} text rows", texts.len())));
    }
    if sanitized.n_nodes() != n {
        return Err(Error::invalid(format!(
            "sanitized graph has {} nodes but the training set has {n} items",
            sanitized.n_nodes()
        )));
    }
    let mut model = HashModel::init(config)?;
    let mut image_state: Vec<AdamState> = model.image.tensors_mut().iter().map(|t| AdamState::new(t.len())).collect();
    let mut text_state: Vec<AdamState> = model.text.tensors_mut().iter().map(|t| AdamState::new(t.len())).collect();
    let mut rng = rng_for(config.seed, "distill/batches");
    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_trace = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(config.batch_size) {
            let x_img = Matrix::gather(images, batch)?;
            let x_txt = Matrix::gather(texts, batch)?;
            let img_cache = model.image.forward(&x_img)?;
            let txt_cache = model.text.forward(&x_txt)?;
            let target = target_block(sanitized, batch);
            let out = holistic_loss(&img_cache.output, &txt_cache.output, &target, config.lambda_cross, config.gamma_quant)?;
            let g_img = model.image.backward(&img_cache, &out.grad_u);
            let g_txt = model.text.backward(&txt_cache, &out.grad_v);
            for ((param, grad), state) in model.image.tensors_mut().into_iter().zip(g_img.tensors()).zip(&mut image_state) {
                adam_step(param, grad, state, &config.adam)?;
            }
            for ((param, grad), state) in model.text.tensors_mut().into_iter().zip(g_txt.tensors()).zip(&mut text_state) {
                adam_step(param, grad, state, &config.adam)?;
            }
            total += out.loss;
            batches += 1;
        }
        loss_trace.push(if batches == 0 { 0.0 } else { total / batches as f64 });
    }
    Ok(Trained { model, loss_trace })
}
