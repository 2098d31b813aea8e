//! Multimodal datasets, the planted-community generator, and the inductive split.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: u64,
    pub image: Vec<f64>,
    pub text: Vec<f64>,
    pub labels: Vec<u32>,
}

/// Train/query partition as sorted indices into the item list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub query: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultimodalDataset {
    pub items: Vec<Item>,
    pub split: Option<Split>,
}

impl MultimodalDataset {
    pub fn new(items: Vec<Item>) -> Result<Self> {
        validate_items(&items)?;
        Ok(MultimodalDataset { items, split: None })
    }

    fn split_or_err(&self) -> Result<&Split> {
        self.split
            .as_ref()
            .ok_or_else(|| Error::invalid("dataset has not been split"))
    }

    pub fn train_items(&self) -> Result<Vec<Item>> {
        Ok(self.split_or_err()?.train.iter().map(|&i| self.items[i].clone()).collect())
    }

    pub fn query_items(&self) -> Result<Vec<Item>> {
        Ok(self.split_or_err()?.query.iter().map(|&i| self.items[i].clone()).collect())
    }
}

/// Checks finite features, consistent per-modality dimensions and unique ids.
pub fn validate_items(items: &[Item]) -> Result<()> {
    let Some(first) = items.first() else {
        return Ok(());
    };
    let (di, dt) = (first.image.len(), first.text.len());
    let mut ids = std::collections::HashSet::new();
    for (r, item) in items.iter().enumerate() {
        if item.image.len() != di || item.text.len() != dt {
            return Err(Error::invalid(format!(
                "item {} has dims ({}, {}), expected ({di}, {dt})",
                item.id,
                item.image.len(),
                item.text.len()
            )));
        }
        if item.image.iter().chain(&item.text).any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("item {} has a non-finite feature", item.id)));
        }
        if !ids.insert(item.id) {
            return Err(Error::invalid(format!("duplicate item id {} at row {r}", item.id)));
        }
    }
    Ok(())
}

pub fn images(items: &[Item]) -> Vec<Vec<f64>> {
    items.iter().map(|it| it.image.clone()).collect()
}

pub fn texts(items: &[Item]) -> Vec<Vec<f64>> {
    items.iter().map(|it| it.text.clone()).collect()
}

pub fn labels(items: &[Item]) -> Vec<Vec<u32>> {
    items.iter().map(|it| it.labels.clone()).collect()
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter().map(|x| x / norm).collect()
    } else {
        v.to_vec()
    }
}

/// Per-item graph features: the unit-normalized image and text vectors
/// concatenated, so both modalities contribute equally to cosine similarity.
pub fn graph_features(items: &[Item]) -> Vec<Vec<f64>> {
    items
        .iter()
        .map(|it| {
            let mut f = normalized(&it.image);
            f.extend(normalized(&it.text));
            f
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_items: usize,
    pub n_communities: usize,
    pub image_dim: usize,
    pub text_dim: usize,
    /// Norm of the isotropic noise added to the unit community anchor.
    pub noise: f64,
    pub hub_fraction: f64,
    /// Mixing weight in `[0, 1]` pulling hub features towards the shared direction.
    pub hub_spread: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_items: 800,
            n_communities: 4,
            image_dim: 64,
            text_dim: 48,
            noise: 1.0,
            hub_fraction: 0.05,
            hub_spread: 0.9,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_communities < 2 {
            return Err(Error::invalid("need at least 2 communities"));
        }
        if self.n_items < 2 {
            return Err(Error::invalid("need at least 2 items"));
        }
        if self.image_dim < self.n_communities + 1 || self.text_dim < self.n_communities + 1 {
            return Err(Error::invalid(format!(
                "feature dims must exceed the community count {}",
                self.n_communities
            )));
        }
        if !(0.0..1.0).contains(&self.hub_fraction) {
            return Err(Error::invalid("hub_fraction must be in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.hub_spread) || !(self.noise >= 0.0) {
            return Err(Error::invalid("hub_spread must be in [0, 1] and noise >= 0"));
        }
        Ok(())
    }
}

/// Weight `w` of the shared direction inside every community anchor, via
/// `w²·(C − 1) = SHARED_AXIS_MASS`. Anchors are centered community directions
/// (pairwise cosine `−1/(C−1)`) plus `w` times a common axis, which keeps
/// cross-community cosines negative while giving hub items (pulled onto the
/// common axis) positive similarity with everyone.
const SHARED_AXIS_MASS: f64 = 0.12;

fn shared_axis_weight(communities: usize) -> f64 {
    (SHARED_AXIS_MASS / (communities - 1) as f64).sqrt()
}

struct ModalitySpace {
    anchors: Vec<Vec<f64>>,
    shared: Vec<f64>,
}

fn gaussian_vec<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn orthonormalize(vectors: &mut [Vec<f64>]) {
    for i in 0..vectors.len() {
        for j in 0..i {
            let proj: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
            let prev = vectors[j].clone();
            vectors[i].iter_mut().zip(&prev).for_each(|(a, b)| *a -= proj * b);
        }
        vectors[i] = normalized(&vectors[i]);
    }
}

fn modality_space<R: Rng>(rng: &mut R, dim: usize, communities: usize) -> ModalitySpace {
    let mut basis: Vec<Vec<f64>> = (0..=communities).map(|_| gaussian_vec(rng, dim)).collect();
    orthonormalize(&mut basis);
    let shared = basis.pop().expect("basis has communities + 1 vectors");
    let w = shared_axis_weight(communities);
    let mean: Vec<f64> = (0..dim)
        .map(|d| basis.iter().map(|b| b[d]).sum::<f64>() / communities as f64)
        .collect();
    let anchors = basis
        .iter()
        .map(|b| {
            let centered: Vec<f64> = b.iter().zip(&mean).map(|(x, m)| x - m).collect();
            let centered = normalized(&centered);
            let anchor: Vec<f64> = centered
                .iter()
                .zip(&shared)
                .map(|(c, s)| c + w * s)
                .collect();
            normalized(&anchor)
        })
        .collect();
    ModalitySpace { anchors, shared }
}

fn draw_feature<R: Rng>(rng: &mut R, space: &ModalitySpace, community: usize, noise: f64, hub_spread: Option<f64>) -> Vec<f64> {
    let anchor = &space.anchors[community];
    let dim = anchor.len();
    let scale = noise / (dim as f64).sqrt();
    let mut x: Vec<f64> = anchor
        .iter()
        .map(|a| a + scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    if let Some(h) = hub_spread {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut()
            .zip(&space.shared)
            .for_each(|(v, s)| *v = (1.0 - h) * *v + h * norm * s);
    }
    x
}

/// Planted-community multimodal data. Each item draws a community; its image
/// and text features are independent noisy copies of that community's anchor
/// in the respective space. Hub items are pulled towards the shared axis.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<MultimodalDataset> {
    generate_with_hub_flags(config).map(|(dataset, _)| dataset)
}

/// [`generate_synthetic`] plus, per item, whether it was drawn as a hub.
pub fn generate_with_hub_flags(config: &SyntheticConfig) -> Result<(MultimodalDataset, Vec<bool>)> {
    config.validate()?;
    let mut hubs = Vec::with_capacity(config.n_items);
    let mut rng = rng_for(config.seed, "data/generator");
    let image_space = modality_space(&mut rng, config.image_dim, config.n_communities);
    let text_space = modality_space(&mut rng, config.text_dim, config.n_communities);
    let items = (0..config.n_items)
        .map(|id| {
            let community = rng.random_range(0..config.n_communities);
            let hub = rng.random::<f64>() < config.hub_fraction;
            hubs.push(hub);
            let spread = hub.then_some(config.hub_spread);
            let image = draw_feature(&mut rng, &image_space, community, config.noise, spread);
            let text = draw_feature(&mut rng, &text_space, community, config.noise, spread);
            Item {
                id: id as u64,
                image,
                text,
                labels: vec![community as u32],
            }
        })
        .collect();
    Ok((MultimodalDataset::new(items)?, hubs))
}

/// Disjoint train/query partition with `round(query_fraction·n)` query items.
pub fn inductive_split(dataset: &MultimodalDataset, query_fraction: f64, seed: u64) -> Result<MultimodalDataset> {
    let n = dataset.items.len();
    if !(query_fraction > 0.0 && query_fraction < 1.0) {
        return Err(Error::invalid(format!("query fraction must be in (0, 1), got {query_fraction}")));
    }
    let n_query = (query_fraction * n as f64).round() as usize;
    if n_query == 0 || n_query >= n {
        return Err(Error::invalid(format!(
            "query fraction {query_fraction} leaves an empty partition for {n} items"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, "data/split"));
    let mut query = order[..n_query].to_vec();
    let mut train = order[n_query..].to_vec();
    query.sort_unstable();
    train.sort_unstable();
    Ok(MultimodalDataset {
        items: dataset.items.clone(),
        split: Some(Split { train, query }),
    })
}
