//! Holistic structural loss with quantization penalty.

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Normalized code similarity `½·(uᵀv / K + 1)`.
pub fn similarity_s(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", u.len(), v.len())));
    }
    if u.is_empty() {
        return Err(Error::invalid("embeddings must have at least one coordinate"));
    }
    Ok(0.5 * (dot(u, v) / u.len() as f64 + 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossTerms {
    pub image: f64,
    pub text: f64,
    /// Cross-modal residual sum, before the `λ` weight.
    pub cross: f64,
    /// Quantization sum, before the `γ` weight.
    pub quant: f64,
}

#[derive(Debug, Clone)]
pub struct LossOutput {
    pub loss: f64,
    pub terms: LossTerms,
    pub grad_u: Matrix,
    pub grad_v: Matrix,
}

/// Loss over all ordered batch pairs, diagonal included:
///
/// `Σ_ij [(S(u_i,u_j) − Ŵ_ij)² + (S(v_i,v_j) − Ŵ_ij)² + λ·(S(u_i,v_j) − Ŵ_ij)²]
///  + γ·Σ_i (‖|u_i| − 1‖² + ‖|v_i| − 1‖²)`
///
/// with exact gradients with respect to `u` and `v`.
pub fn holistic_loss(u: &Matrix, v: &Matrix, target: &Matrix, lambda_cross: f64, gamma_quant: f64) -> Result<LossOutput> {
    let b = u.rows();
    let k = u.cols();
    if b == 0 || k == 0 {
        return Err(Error::invalid("batch must be non-empty with K >= 1"));
    }
    if v.rows() != b || v.cols() != k {
        return Err(Error::invalid(format!(
            "image batch is {b}x{k} but text batch is {}x{}",
            v.rows(),
            v.cols()
        )));
    }
    if target.rows() != b || target.cols() != b {
        return Err(Error::invalid(format!(
            "target block is {}x{}, expected {b}x{b}",
            target.rows(),
            target.cols()
        )));
    }
    let kf = k as f64;
    let s = |x: &[f64], y: &[f64]| 0.5 * (dot(x, y) / kf + 1.0);

    let mut r_uu = Matrix::zeros(b, b);
    let mut r_vv = Matrix::zeros(b, b);
    let mut r_uv = Matrix::zeros(b, b);
    let mut terms = LossTerms {
        image: 0.0,
        text: 0.0,
        cross: 0.0,
        quant: 0.0,
    };
    for i in 0..b {
        for j in 0..b {
            let t = target.get(i, j);
            let ruu = s(u.row(i), u.row(j)) - t;
            let rvv = s(v.row(i), v.row(j)) - t;
            let ruv = s(u.row(i), v.row(j)) - t;
            terms.image += ruu * ruu;
            terms.text += rvv * rvv;
            terms.cross += ruv * ruv;
            r_uu.set(i, j, ruu);
            r_vv.set(i, j, rvv);
            r_uv.set(i, j, ruv);
        }
    }

    let mut grad_u = Matrix::zeros(b, k);
    let mut grad_v = Matrix::zeros(b, k);
    for i in 0..b {
        for j in 0..b {
            let cu = (r_uu.get(i, j) + r_uu.get(j, i)) / kf;
            let cv = (r_vv.get(i, j) + r_vv.get(j, i)) / kf;
            let c_uv = lambda_cross * r_uv.get(i, j) / kf;
            let c_vu = lambda_cross * r_uv.get(j, i) / kf;
            let (uj, vj) = (u.row(j), v.row(j));
            let gu = grad_u.row_mut(i);
            for c in 0..k {
                gu[c] += cu * uj[c] + c_uv * vj[c];
            }
            let gv = grad_v.row_mut(i);
            for c in 0..k {
                gv[c] += cv * vj[c] + c_vu * uj[c];
            }
        }
    }

    for (x, g) in [(u, &mut grad_u), (v, &mut grad_v)] {
        for (xi, gi) in x.as_slice().iter().zip(g.as_mut_slice()) {
            let dev = xi.abs() - 1.0;
            terms.quant += dev * dev;
            let sign = if *xi >= 0.0 { 1.0 } else { -1.0 };
            *gi += gamma_quant * 2.0 * dev * sign;
        }
    }

    let loss = terms.image + terms.text + lambda_cross * terms.cross + gamma_quant * terms.quant;
    Ok(LossOutput {
        loss,
        terms,
        grad_u,
        grad_v,
    })
}
