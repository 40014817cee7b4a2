// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::KernelKind;
use crate::error::{CastError, Result};
use crate::linalg::{ensure_finite, frobenius_norm, svd, ThinSvd};
use crate::rng::seeded;

/// A frozen random Fourier feature draw.
///
/// `weights` is `D × d` (row `j` is `ω_j`) and `phases` holds `b_j ∈ [0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RffParams {
    pub kernel: KernelKind,
    pub gamma: f64,
    pub num_features: usize,
    pub weights: Array2<f64>,
    pub phases: Array1<f64>,
    pub seed: u64,
}

impl RffParams {
    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }
}

/// Draws feature weights and phases.
///
/// RBF: `ω_jk ~ N(0, 2γ)`. Laplacian: `ω_jk = γ·tan(π(u − ½))`, `u ~ U(0, 1)`.
/// Phases are uniform on `[0, 2π)`.
pub fn sample_rff(kernel: KernelKind, gamma: f64, num_features: usize, dim: usize, seed: u64) -> Result<RffParams> {
    if num_features == 0 || dim == 0 {
        return Err(CastError::InvalidParams(format!(
            "feature count and input dimension must be positive (D={num_features}, d={dim})"
        )));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(CastError::InvalidParams(format!("gamma must be positive, got {gamma}")));
    }
    let mut rng = seeded(seed);
    let weights = match kernel {
        KernelKind::Rbf => {
            let normal = Normal::new(0.0, (2.0 * gamma).sqrt())
                .map_err(|e| CastError::InvalidParams(e.to_string()))?;
            Array2::from_shape_simple_fn((num_features, dim), || normal.sample(&mut rng))
        }
        KernelKind::Laplacian => Array2::from_shape_simple_fn((num_features, dim), || {
            let u: f64 = rng.random();
            gamma * (PI * (u - 0.5)).tan()
        }),
        KernelKind::Linear => {
            return Err(CastError::InvalidParams(
                "random Fourier features need a shift-invariant kernel (rbf or laplacian)".into(),
            ))
        }
    };
    let phases = Array1::from_shape_simple_fn(num_features, || rng.random_range(0.0..2.0 * PI));
    Ok(RffParams {
        kernel,
        gamma,
        num_features,
        weights,
        phases,
        seed,
    })
}

/// `Z[a, j] = √(2/D) · cos(ω_jᵀ h_a + b_j)`.
pub fn rff_map(h: ArrayView2<'_, f64>, params: &RffParams) -> Result<Array2<f64>> {
    if h.ncols() != params.input_dim() {
        return Err(CastError::ShapeMismatch(format!(
            "rff_map: input has {} columns, features expect {}",
            h.ncols(),
            params.input_dim()
        )));
    }
    ensure_finite(h, "rff_map")?;
    let scale = (2.0 / params.num_features as f64).sqrt();
    let mut z = h.dot(&params.weights.t());
    z += &params.phases;
    z.mapv_inplace(|x| scale * x.cos());
    Ok(z)
}

/// Least-squares transition in feature space, `T_RFF = Z_outᵀ (Z_in⁺)ᵀ`.
///
/// Stored factored as `T_RFF = factor · basisᵀ` where `basis` (`D × r`) holds
/// the retained right singular vectors of `Z_in`, so the `D × D` matrix never
/// has to be formed for large `D`.
#[derive(Debug, Clone)]
pub struct RffTransform {
    pub factor: Array2<f64>,
    pub basis: Array2<f64>,
}

impl RffTransform {
    pub fn num_features(&self) -> usize {
        self.factor.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dense(&self) -> Array2<f64> {
        self.factor.dot(&self.basis.t())
    }

    /// `Z · T_RFFᵀ`.
    pub fn apply(&self, z: ArrayView2<'_, f64>) -> Array2<f64> {
        z.dot(&self.basis).dot(&self.factor.t())
    }

    /// Singular values of `T_RFF` (length `D`, descending). The basis has
    /// orthonormal columns, so these are the singular values of `factor`
    /// padded with zeros.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let mut sv = if self.rank() == 0 {
            Vec::new()
        } else {
            svd(self.factor.view(), false)?.singular_values
        };
        sv.resize(self.num_features(), 0.0);
        Ok(sv)
    }

    /// `‖Z_out − Z_in·T_RFFᵀ‖_F / ‖Z_out‖_F`.
    pub fn residual_norm(&self, z_in: ArrayView2<'_, f64>, z_out: ArrayView2<'_, f64>) -> Result<f64> {
        let denom = frobenius_norm(z_out);
        if denom == 0.0 {
            return Err(CastError::ZeroDenominator);
        }
        let r = &z_out - &self.apply(z_in);
        Ok(frobenius_norm(r.view()) / denom)
    }
}

pub fn estimate_rff_transform(
    z_in: ArrayView2<'_, f64>,
    z_out: ArrayView2<'_, f64>,
    rcond: f64,
) -> Result<RffTransform> {
    if z_in.dim() != z_out.dim() {
        return Err(CastError::ShapeMismatch(format!(
            "rff transform: {:?} vs {:?}",
            z_in.dim(),
            z_out.dim()
        )));
    }
    let svd = ThinSvd::compute(z_in)?;
    let r = svd.retained(rcond, None);
    let u = svd.u.slice(ndarray::s![.., ..r]);
    let mut factor = z_out.t().dot(&u);
    for (mut col, &s) in factor.columns_mut().into_iter().zip(svd.s.iter()) {
        col.mapv_inplace(|x| x / s);
    }
    let basis = svd.v.slice(ndarray::s![.., ..r]).to_owned();
    Ok(RffTransform { factor, basis })
}
