// SPDX-License-Identifier: Apache-2.0

//! Per-transition analysis shared by the report pipeline, the bootstrap and
//! the sweeps.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::bundle::HiddenStateBundle;
use crate::error::Result;
use crate::estimation::{center, CenteredPair, Estimator, TransformEstimate};
use crate::kernel::{
    estimate_rff_transform, layer_gammas, rff_map, sample_rff, GammaPolicy, KernelKind, DEFAULT_PAIR_SAMPLE,
    DEFAULT_RFF_DIMS,
};
use crate::linalg::{default_rcond, svd};
use crate::metrics::{LayerMetrics, MetricOptions};
use crate::rng::derive_seed;
use crate::sampling::stratified_rows;

// Seed streams under the master seed. Each consumer derives its own
// sub-streams from one of these.
pub const ROW_STREAM: u64 = 0x100;
pub const GAMMA_STREAM: u64 = 0x200;
pub const RFF_STREAM: u64 = 0x300;
pub const CKA_STREAM: u64 = 0x400;

/// Seed of the feature draw for `transition` in draw group `group`.
pub fn rff_seed(master: u64, group: u64, transition: usize) -> u64 {
    derive_seed(derive_seed(derive_seed(master, RFF_STREAM), group), transition as u64)
}

/// Centered pair for transition `i` (layer `i` → `i + 1`), over all rows or
/// over the given row indices.
pub fn transition_pair(bundle: &HiddenStateBundle, i: usize, rows: Option<&[usize]>) -> Result<CenteredPair> {
    let (h_in, h_out) = match rows {
        None => (bundle.layer_f64(i), bundle.layer_f64(i + 1)),
        Some(r) => (bundle.layer_rows_f64(i, r), bundle.layer_rows_f64(i + 1, r)),
    };
    center(h_in.view(), h_out.view())
}

#[derive(Debug, Clone)]
pub struct LinearTransition {
    pub estimate: TransformEstimate,
    pub metrics: LayerMetrics,
    pub singular_values: Vec<f64>,
}

pub fn linear_transition(
    pair: &CenteredPair,
    estimator: &Estimator,
    layer_index: usize,
    opts: &MetricOptions,
) -> Result<LinearTransition> {
    let estimate = estimator.fit(pair)?;
    let singular_values = svd(estimate.transform.view(), false)?.singular_values;
    let metrics = LayerMetrics::from_spectrum(layer_index, &singular_values, estimate.fit_residual, opts)?;
    Ok(LinearTransition {
        estimate,
        metrics,
        singular_values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RffOptions {
    pub kernel: KernelKind,
    pub num_features: usize,
    pub gamma: GammaPolicy,
    pub pair_sample: usize,
    pub rcond: Option<f64>,
    /// Column-center the feature matrices before fitting.
    pub center_features: bool,
}

impl Default for RffOptions {
    fn default() -> Self {
        RffOptions {
            kernel: KernelKind::Rbf,
            num_features: DEFAULT_RFF_DIMS,
            gamma: GammaPolicy::PerLayer,
            pair_sample: DEFAULT_PAIR_SAMPLE,
            rcond: None,
            center_features: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KernelTransition {
    pub gamma: f64,
    pub metrics: LayerMetrics,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Maps both layers through one shared feature draw, fits `T_RFF` and runs
/// the same metric code as the linear case on its spectrum.
pub fn kernel_transition(
    h_in: ArrayView2<'_, f64>,
    h_out: ArrayView2<'_, f64>,
    layer_index: usize,
    gamma: f64,
    seed: u64,
    rff: &RffOptions,
    opts: &MetricOptions,
) -> Result<KernelTransition> {
    let params = sample_rff(rff.kernel, gamma, rff.num_features, h_in.ncols(), seed)?;
    let mut z_in = rff_map(h_in, &params)?;
    let mut z_out = rff_map(h_out, &params)?;
    if rff.center_features {
        let mu_in = z_in.mean_axis(ndarray::Axis(0)).expect("non-empty");
        let mu_out = z_out.mean_axis(ndarray::Axis(0)).expect("non-empty");
        z_in -= &mu_in;
        z_out -= &mu_out;
    }
    let rcond = rff.rcond.unwrap_or_else(|| default_rcond(z_in.nrows(), z_in.ncols()));
    let t = estimate_rff_transform(z_in.view(), z_out.view(), rcond)?;
    let residual = t.residual_norm(z_in.view(), z_out.view())?;
    let singular_values = t.singular_values()?;
    let metrics = LayerMetrics::from_spectrum(layer_index, &singular_values, residual, opts)?;
    Ok(KernelTransition {
        gamma,
        metrics,
        singular_values,
        rank: t.rank(),
    })
}

/// Capped, stratified row subset shared by every kernel computation, and
/// every layer restricted to it.
pub fn kernel_layers(bundle: &HiddenStateBundle, row_cap: usize, seed: u64) -> (Vec<usize>, Vec<Array2<f64>>) {
    let rows = stratified_rows(bundle.sequence_lengths(), row_cap, derive_seed(seed, ROW_STREAM));
    let layers = (0..bundle.num_layers())
        .map(|i| bundle.layer_rows_f64(i, &rows))
        .collect();
    (rows, layers)
}

/// Bandwidth for each transition. Per-layer bandwidths come from the input
/// layer of the transition; the global one pools every layer.
pub fn transition_gammas(layers: &[Array2<f64>], policy: GammaPolicy, pair_sample: usize, seed: u64) -> Result<Vec<f64>> {
    let n = layers.len().saturating_sub(1);
    let seed = derive_seed(seed, GAMMA_STREAM);
    let mut gammas = match policy {
        GammaPolicy::PerLayer => layer_gammas(&layers[..n], policy, pair_sample, seed)?,
        _ => layer_gammas(layers, policy, pair_sample, seed)?,
    };
    gammas.truncate(n);
    Ok(gammas)
}
