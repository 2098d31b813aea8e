use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Keeps tanh outputs strictly inside (−1, 1) even when they round to ±1.
const OUTPUT_LIMIT: f64 = 1.0 - f64::EPSILON;

/// Two dense layers: `tanh(W2·tanh(W1·x + b1) + b2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    /// `hidden_dim × input_dim`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `output_dim × hidden_dim`, row-major.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Gradients with the same layout as [`Encoder`]'s parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderGrads {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl EncoderGrads {
    pub fn tensors(&self) -> [&[f64]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }
}

/// Activations kept from the forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Matrix,
    hidden: Matrix,
    pub output: Matrix,
}

impl Encoder {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng>(input_dim: usize, hidden_dim: usize, output_dim: usize, rng: &mut R) -> Self {
        let mut glorot = |fan_in: usize, fan_out: usize| -> Vec<f64> {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)).collect()
        };
        let w1 = glorot(input_dim, hidden_dim);
        let w2 = glorot(hidden_dim, output_dim);
        Encoder {
            input_dim,
            hidden_dim,
            output_dim,
            w1,
            b1: vec![0.0; hidden_dim],
            w2,
            b2: vec![0.0; output_dim],
        }
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.w1.len() == self.hidden_dim * self.input_dim
            && self.b1.len() == self.hidden_dim
            && self.w2.len() == self.output_dim * self.hidden_dim
            && self.b2.len() == self.output_dim;
        if !ok {
            return Err(Error::invalid("encoder tensor shapes do not match its dimensions"));
        }
        Ok(())
    }

    pub fn forward(&self, input: &Matrix) -> Result<ForwardCache> {
        if input.cols() != self.input_dim {
            return Err(Error::invalid(format!(
                "encoder expects {} input features, got {}",
                self.input_dim,
                input.cols()
            )));
        }
        let b = input.rows();
        let mut hidden = Matrix::zeros(b, self.hidden_dim);
        let mut output = Matrix::zeros(b, self.output_dim);
        for r in 0..b {
            let x = input.row(r);
            let h = hidden.row_mut(r);
            for (j, hj) in h.iter_mut().enumerate() {
                let w = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
                *hj = (dot(w, x) + self.b1[j]).tanh();
            }
            let h = hidden.row(r);
            let o = output.row_mut(r);
            for (k, ok) in o.iter_mut().enumerate() {
                let w = &self.w2[k * self.hidden_dim..(k + 1) * self.hidden_dim];
                *ok = (dot(w, h) + self.b2[k]).tanh().clamp(-OUTPUT_LIMIT, OUTPUT_LIMIT);
            }
        }
        Ok(ForwardCache {
            input: input.clone(),
            hidden,
            output,
        })
    }

    pub fn embed(&self, input: &Matrix) -> Result<Matrix> {
        Ok(self.forward(input)?.output)
    }

    /// Backpropagates `d_output` (gradient w.r.t. the tanh outputs).
    pub fn backward(&self, cache: &ForwardCache, d_output: &Matrix) -> EncoderGrads {
        let (b, hd, od, id) = (cache.input.rows(), self.hidden_dim, self.output_dim, self.input_dim);
        let mut g = EncoderGrads {
            w1: vec![0.0; hd * id],
            b1: vec![0.0; hd],
            w2: vec![0.0; od * hd],
            b2: vec![0.0; od],
        };
        let mut dz2 = vec![0.0; od];
        let mut dz1 = vec![0.0; hd];
        for r in 0..b {
            let out = cache.output.row(r);
            let h = cache.hidden.row(r);
            let x = cache.input.row(r);
            for k in 0..od {
                dz2[k] = d_output.get(r, k) * (1.0 - out[k] * out[k]);
                g.b2[k] += dz2[k];
                let gw = &mut g.w2[k * hd..(k + 1) * hd];
                for (gj, hj) in gw.iter_mut().zip(h) {
                    *gj += dz2[k] * hj;
                }
            }
            dz1.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..od {
                let w = &self.w2[k * hd..(k + 1) * hd];
                for (dj, wj) in dz1.iter_mut().zip(w) {
                    *dj += dz2[k] * wj;
                }
            }
            for j in 0..hd {
                dz1[j] *= 1.0 - h[j] * h[j];
                g.b1[j] += dz1[j];
                let gw = &mut g.w1[j * id..(j + 1) * id];
                for (gi, xi) in gw.iter_mut().zip(x) {
                    *gi += dz1[j] * xi;
                }
            }
        }
        g
    }
}
