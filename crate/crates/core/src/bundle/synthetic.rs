// SPDX-License-Identifier: Apache-2.0

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::HiddenStateBundle;
use crate::error::{CastError, Result};
use crate::linalg::{frobenius_norm, random_orthogonal};
use crate::rng::seeded;

/// Ground-truth generator settings. `ranks` and `decays` hold one entry per
/// layer transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub num_rows: usize,
    pub ranks: Vec<usize>,
    pub decays: Vec<f64>,
    pub noise_scale: f64,
    pub seed: u64,
    /// Rows per sequence block; the last block takes the remainder.
    pub sequence_length: usize,
}

impl SyntheticSpec {
    /// Same rank and decay for every transition.
    pub fn uniform(
        num_layers: usize,
        hidden_dim: usize,
        num_rows: usize,
        rank: usize,
        decay: f64,
        noise_scale: f64,
        seed: u64,
    ) -> Self {
        let transitions = num_layers.saturating_sub(1);
        SyntheticSpec {
            num_layers,
            hidden_dim,
            num_rows,
            ranks: vec![rank; transitions],
            decays: vec![decay; transitions],
            noise_scale,
            seed,
            sequence_length: 16,
        }
    }

    pub fn with_sequence_length(mut self, len: usize) -> Self {
        self.sequence_length = len;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CastError::InvalidSpec(msg));
        if self.num_layers < 2 {
            return bad(format!("need at least 2 layers, got {}", self.num_layers));
        }
        if self.hidden_dim == 0 || self.num_rows == 0 {
            return bad("dim and rows must be positive".into());
        }
        let transitions = self.num_layers - 1;
        if self.ranks.len() != transitions || self.decays.len() != transitions {
            return bad(format!(
                "expected {transitions} ranks and decays, got {} and {}",
                self.ranks.len(),
                self.decays.len()
            ));
        }
        for (i, &r) in self.ranks.iter().enumerate() {
            if r == 0 || r > self.hidden_dim {
                return bad(format!(
                    "rank for transition {i} must lie in 1..={}, got {r}",
                    self.hidden_dim
                ));
            }
        }
        for (i, &a) in self.decays.iter().enumerate() {
            if !(a.is_finite() && a >= 0.0) {
                return bad(format!("decay for transition {i} must be >= 0, got {a}"));
            }
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return bad(format!("noise_scale must be >= 0, got {}", self.noise_scale));
        }
        if self.sequence_length == 0 {
            return bad("sequence_length must be positive".into());
        }
        Ok(())
    }

    fn sequence_lengths(&self) -> Vec<usize> {
        let full = self.num_rows / self.sequence_length;
        let mut lens = vec![self.sequence_length; full];
        let rest = self.num_rows % self.sequence_length;
        if rest > 0 {
            lens.push(rest);
        }
        lens
    }
}

/// Draws a bundle whose transitions are known linear maps.
///
/// `H_0` is i.i.d. standard normal. Transition `i` uses
/// `T_i = U_r · diag(exp(−α·1), …, exp(−α·r)) · V_rᵀ` with Haar-random
/// orthonormal `U_r`, `V_r`, and
/// `H_{i+1} = H_i·T_i + noise · ‖H_i·T_i‖_F/√(m·d) · N(0, 1)`.
/// Each `H_{i+1}` is computed from the f32-rounded `H_i` actually stored, so
/// the returned maps are exact for the stored inputs.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(HiddenStateBundle, Vec<Array2<f64>>)> {
    spec.validate()?;
    let (m, d) = (spec.num_rows, spec.hidden_dim);
    if m < d {
        log::warn!("synthetic bundle has fewer rows ({m}) than features ({d}); estimates will not be unique");
    }
    let mut rng = seeded(spec.seed);

    let h0 = Array2::from_shape_simple_fn((m, d), || rng.sample::<f64, _>(StandardNormal) as f32);
    let mut layers = vec![h0];
    let mut transforms = Vec::with_capacity(spec.num_layers - 1);

    for (&rank, &decay) in spec.ranks.iter().zip(&spec.decays) {
        let u = random_orthogonal(d, &mut rng);
        let v = random_orthogonal(d, &mut rng);
        let sigma = Array1::from_shape_fn(rank, |j| (-decay * (j + 1) as f64).exp());
        let u_r = u.slice(ndarray::s![.., ..rank]).to_owned() * &sigma;
        let t = u_r.dot(&v.slice(ndarray::s![.., ..rank]).t());

        let input = layers.last().expect("non-empty").mapv(f64::from);
        let mut out = input.dot(&t);
        if spec.noise_scale > 0.0 {
            let scale = spec.noise_scale * frobenius_norm(out.view()) / ((m * d) as f64).sqrt();
            out.mapv_inplace(|x| x + scale * rng.sample::<f64, _>(StandardNormal));
        }
        layers.push(out.mapv(|x| x as f32));
        transforms.push(t);
    }

    let bundle = HiddenStateBundle::new(
        format!("synthetic-seed{}", spec.seed),
        layers,
        spec.sequence_lengths(),
    )?;
    Ok((bundle, transforms))
}
