// SPDX-License-Identifier: Apache-2.0

//! Kernel-space analysis: random Fourier feature transitions, exact Gram
//! matrices and centered kernel alignment (CKA) between layers.

mod rff;

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::HiddenStateBundle;
use crate::error::{CastError, Result};
use crate::linalg::ensure_finite;
use crate::rng::{derive_seed, seeded};
use crate::sampling::stratified_rows;

pub use rff::{estimate_rff_transform, rff_map, sample_rff, RffParams, RffTransform};

pub const DEFAULT_PAIR_SAMPLE: usize = 2000;
pub const DEFAULT_RFF_DIMS: usize = 1000;
pub const DEFAULT_ROW_CAP: usize = 4096;
pub const RFF_DIM_GRID: [usize; 8] = [50, 100, 200, 500, 1000, 2000, 5000, 10000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `exp(−γ‖x − y‖²)`
    Rbf,
    /// `exp(−γ‖x − y‖₁)`
    Laplacian,
    /// `xᵀy`; CKA only.
    Linear,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Rbf => "rbf",
            KernelKind::Laplacian => "laplacian",
            KernelKind::Linear => "linear",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = CastError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rbf" => Ok(KernelKind::Rbf),
            "laplacian" => Ok(KernelKind::Laplacian),
            "linear" => Ok(KernelKind::Linear),
            other => Err(CastError::InvalidParams(format!("unknown kernel {other:?}"))),
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the bandwidth is chosen for each layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "gamma", rename_all = "snake_case")]
pub enum GammaPolicy {
    /// Median heuristic on each layer's own rows (for transitions: on the input layer).
    PerLayer,
    /// One median-heuristic bandwidth from the rows of every layer pooled.
    Global,
    Fixed(f64),
}

impl std::str::FromStr for GammaPolicy {
    type Err = CastError;

    /// `per-layer`, `global`, or a positive number taken as a fixed bandwidth.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-layer" | "per_layer" => Ok(GammaPolicy::PerLayer),
            "global" => Ok(GammaPolicy::Global),
            other => match other.parse::<f64>() {
                Ok(g) if g.is_finite() && g > 0.0 => Ok(GammaPolicy::Fixed(g)),
                _ => Err(CastError::InvalidParams(format!(
                    "gamma must be per-layer, global or a positive number, got {other:?}"
                ))),
            },
        }
    }
}

fn euclidean(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median-heuristic bandwidth `γ = 1 / (2·median‖x_a − x_b‖²)`.
///
/// Uses every distinct pair when there are at most `pair_sample` of them,
/// otherwise `pair_sample` uniformly drawn pairs of distinct rows.
pub fn median_bandwidth(h: ArrayView2<'_, f64>, pair_sample: usize, seed: u64) -> Result<f64> {
    let m = h.nrows();
    if m < 2 {
        return Err(CastError::DegenerateData(format!(
            "median heuristic needs at least 2 rows, got {m}"
        )));
    }
    ensure_finite(h, "median_bandwidth")?;
    let total_pairs = m * (m - 1) / 2;
    let mut dists = if total_pairs <= pair_sample.max(1) {
        let mut v = Vec::with_capacity(total_pairs);
        for a in 0..m {
            for b in a + 1..m {
                v.push(euclidean(h.row(a), h.row(b)));
            }
        }
        v
    } else {
        let mut rng = seeded(seed);
        (0..pair_sample)
            .map(|_| {
                let a = rng.random_range(0..m);
                let mut b = rng.random_range(0..m - 1);
                if b >= a {
                    b += 1;
                }
                euclidean(h.row(a), h.row(b))
            })
            .collect()
    };
    let med = median(&mut dists);
    if med <= 0.0 {
        return Err(CastError::DegenerateData(
            "median pairwise distance is zero".into(),
        ));
    }
    Ok(1.0 / (2.0 * med * med))
}

/// Exact `m × m` Gram matrix.
pub fn kernel_matrix(h: ArrayView2<'_, f64>, kernel: KernelKind, gamma: f64) -> Result<Array2<f64>> {
    let m = h.nrows();
    if m < 2 {
        return Err(CastError::DegenerateData(format!(
            "kernel matrix needs at least 2 rows, got {m}"
        )));
    }
    ensure_finite(h, "kernel_matrix")?;
    if kernel == KernelKind::Linear {
        let k = h.dot(&h.t());
        return Ok(symmetrize(k));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(CastError::InvalidParams(format!("gamma must be positive, got {gamma}")));
    }
    let mut k = Array2::<f64>::zeros((m, m));
    for a in 0..m {
        k[[a, a]] = 1.0;
        let ra = h.row(a);
        for b in a + 1..m {
            let rb = h.row(b);
            let dist = match kernel {
                KernelKind::Rbf => ra.iter().zip(rb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>(),
                KernelKind::Laplacian => ra.iter().zip(rb).map(|(x, y)| (x - y).abs()).sum::<f64>(),
                KernelKind::Linear => unreachable!(),
            };
            let v = (-gamma * dist).exp();
            k[[a, b]] = v;
            k[[b, a]] = v;
        }
    }
    Ok(k)
}

fn symmetrize(mut k: Array2<f64>) -> Array2<f64> {
    let m = k.nrows();
    for a in 0..m {
        for b in a + 1..m {
            let v = 0.5 * (k[[a, b]] + k[[b, a]]);
            k[[a, b]] = v;
            k[[b, a]] = v;
        }
    }
    k
}

/// `C·K·C` with `C = I − 11ᵀ/m`.
pub fn center_kernel(k: ArrayView2<'_, f64>) -> Array2<f64> {
    let m = k.nrows() as f64;
    let row_means = k.sum_axis(Axis(1)) / m;
    let col_means = k.sum_axis(Axis(0)) / m;
    let grand = row_means.sum() / m;
    let mut out = k.to_owned();
    for ((a, b), v) in out.indexed_iter_mut() {
        *v = *v - row_means[a] - col_means[b] + grand;
    }
    out
}

fn frobenius_inner(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn check_kernel(k: ArrayView2<'_, f64>) -> Result<()> {
    if k.nrows() != k.ncols() {
        return Err(CastError::ShapeMismatch(format!(
            "kernel matrix must be square, got {:?}",
            k.dim()
        )));
    }
    ensure_finite(k, "cka")?;
    let scale = k.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    for a in 0..k.nrows() {
        for b in a + 1..k.ncols() {
            if (k[[a, b]] - k[[b, a]]).abs() > 1e-8 * scale {
                return Err(CastError::InvalidParams(format!(
                    "kernel matrix is not symmetric at ({a}, {b})"
                )));
            }
        }
    }
    Ok(())
}

/// Centered kernel alignment `tr(K̃_a K̃_b) / √(tr(K̃_a²)·tr(K̃_b²))`.
pub fn cka(k_a: ArrayView2<'_, f64>, k_b: ArrayView2<'_, f64>) -> Result<f64> {
    if k_a.dim() != k_b.dim() {
        return Err(CastError::ShapeMismatch(format!(
            "cka: {:?} vs {:?}",
            k_a.dim(),
            k_b.dim()
        )));
    }
    check_kernel(k_a)?;
    check_kernel(k_b)?;
    let ca = center_kernel(k_a);
    let cb = center_kernel(k_b);
    cka_centered(&ca, &cb)
}

fn cka_centered(ca: &Array2<f64>, cb: &Array2<f64>) -> Result<f64> {
    let aa = frobenius_inner(ca.view(), ca.view());
    let bb = frobenius_inner(cb.view(), cb.view());
    if aa <= 0.0 || bb <= 0.0 {
        return Err(CastError::ZeroCenteredKernel);
    }
    Ok(frobenius_inner(ca.view(), cb.view()) / (aa.sqrt() * bb.sqrt()))
}

/// CKA of the linear kernels of two feature matrices, computed in feature
/// space without forming `m × m` Gram matrices. Applied to random Fourier
/// features this approximates the exact-kernel CKA.
pub fn cka_features(z_a: ArrayView2<'_, f64>, z_b: ArrayView2<'_, f64>) -> Result<f64> {
    if z_a.nrows() != z_b.nrows() {
        return Err(CastError::ShapeMismatch(format!(
            "cka_features: {} vs {} rows",
            z_a.nrows(),
            z_b.nrows()
        )));
    }
    let ca = &z_a - &z_a.mean_axis(Axis(0)).expect("non-empty");
    let cb = &z_b - &z_b.mean_axis(Axis(0)).expect("non-empty");
    let cross = ca.t().dot(&cb);
    let aa = ca.t().dot(&ca);
    let bb = cb.t().dot(&cb);
    let na = frobenius_inner(aa.view(), aa.view()).sqrt();
    let nb = frobenius_inner(bb.view(), bb.view()).sqrt();
    if na <= 0.0 || nb <= 0.0 {
        return Err(CastError::ZeroCenteredKernel);
    }
    Ok(frobenius_inner(cross.view(), cross.view()) / (na * nb))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CkaMode {
    Exact,
    /// Random-feature approximation with this many features (rbf/laplacian only).
    Rff { num_features: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CkaOptions {
    pub kernel: KernelKind,
    pub gamma: GammaPolicy,
    pub mode: CkaMode,
    pub row_cap: usize,
    pub pair_sample: usize,
    pub seed: u64,
}

impl Default for CkaOptions {
    fn default() -> Self {
        CkaOptions {
            kernel: KernelKind::Rbf,
            gamma: GammaPolicy::PerLayer,
            mode: CkaMode::Exact,
            row_cap: DEFAULT_ROW_CAP,
            pair_sample: DEFAULT_PAIR_SAMPLE,
            seed: 42,
        }
    }
}

/// Bandwidth for each layer under `policy`, computed on the given rows.
pub fn layer_gammas(layers: &[Array2<f64>], policy: GammaPolicy, pair_sample: usize, seed: u64) -> Result<Vec<f64>> {
    match policy {
        GammaPolicy::Fixed(g) => Ok(vec![g; layers.len()]),
        GammaPolicy::PerLayer => layers
            .iter()
            .enumerate()
            .map(|(i, h)| median_bandwidth(h.view(), pair_sample, derive_seed(seed, i as u64)))
            .collect(),
        GammaPolicy::Global => {
            let views: Vec<_> = layers.iter().map(|l| l.view()).collect();
            let pooled = ndarray::concatenate(Axis(0), &views)
                .map_err(|e| CastError::ShapeMismatch(e.to_string()))?;
            let g = median_bandwidth(pooled.view(), pair_sample, seed)?;
            Ok(vec![g; layers.len()])
        }
    }
}

/// `L × L` layer similarity matrix over a shared, deterministic row subset.
///
/// Entries are written by index so the result does not depend on the order
/// in which per-layer work completes. The diagonal is exactly one.
pub fn cka_matrix(bundle: &HiddenStateBundle, opts: &CkaOptions) -> Result<Array2<f64>> {
    let rows = stratified_rows(bundle.sequence_lengths(), opts.row_cap, opts.seed);
    let layers: Vec<Array2<f64>> = (0..bundle.num_layers())
        .map(|i| bundle.layer_rows_f64(i, &rows))
        .collect();
    cka_matrix_from_layers(&layers, opts)
}

pub fn cka_matrix_from_layers(layers: &[Array2<f64>], opts: &CkaOptions) -> Result<Array2<f64>> {
    let n = layers.len();
    let gammas = if opts.kernel == KernelKind::Linear {
        vec![1.0; n]
    } else {
        layer_gammas(layers, opts.gamma, opts.pair_sample, opts.seed)?
    };

    let mut out = Array2::<f64>::eye(n);
    match opts.mode {
        CkaMode::Exact => {
            let centered: Vec<Array2<f64>> = layers
                .par_iter()
                .zip(&gammas)
                .map(|(h, &g)| kernel_matrix(h.view(), opts.kernel, g).map(|k| center_kernel(k.view())))
                .collect::<Result<_>>()?;
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let values: Vec<f64> = pairs
                .par_iter()
                .map(|&(i, j)| cka_centered(&centered[i], &centered[j]))
                .collect::<Result<_>>()?;
            for (&(i, j), v) in pairs.iter().zip(values) {
                out[[i, j]] = v;
                out[[j, i]] = v;
            }
        }
        CkaMode::Rff { num_features } => {
            let features: Vec<Array2<f64>> = layers
                .par_iter()
                .zip(&gammas)
                .enumerate()
                .map(|(i, (h, &g))| {
                    let params = sample_rff(
                        opts.kernel,
                        g,
                        num_features,
                        h.ncols(),
                        derive_seed(opts.seed, 1_000 + i as u64),
                    )?;
                    rff_map(h.view(), &params)
                })
                .collect::<Result<_>>()?;
            for i in 0..n {
                for j in i + 1..n {
                    let v = cka_features(features[i].view(), features[j].view())?;
                    out[[i, j]] = v;
                    out[[j, i]] = v;
                }
            }
        }
    }
    Ok(out)
}
