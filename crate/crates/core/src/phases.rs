// SPDX-License-Identifier: Apache-2.0

//! Contiguous phase segmentation of a layer-similarity matrix.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{CastError, Result};

pub const PHASE_LABELS: [&str; 3] = ["feature_extraction", "compression", "specialization"];
pub const MAX_PHASES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePartition {
    /// Interior boundaries `0 < c_1 < … < c_{k−1} < L`; phase `p` spans
    /// `[c_p, c_{p+1})` with `c_0 = 0` and `c_k = L`.
    pub cut_points: Vec<usize>,
    pub objective_value: f64,
    pub per_phase_mean_cka: Vec<f64>,
    pub labels: Vec<String>,
}

impl PhasePartition {
    pub fn phase_ranges(&self, num_layers: usize) -> Vec<(usize, usize)> {
        let mut bounds = Vec::with_capacity(self.cut_points.len() + 2);
        bounds.push(0);
        bounds.extend_from_slice(&self.cut_points);
        bounds.push(num_layers);
        bounds.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

fn block_of(layer: usize, cuts: &[usize]) -> usize {
    cuts.iter().take_while(|&&c| layer >= c).count()
}

/// Mean within-block minus mean between-block similarity for `cuts`.
///
/// Within-block pairs include the diagonal; pairs are ordered `(i, j)`.
pub fn partition_objective(sim: ArrayView2<'_, f64>, cuts: &[usize]) -> f64 {
    let n = sim.nrows();
    let (mut within, mut n_within, mut between, mut n_between) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..n {
        let bi = block_of(i, cuts);
        for j in 0..n {
            if bi == block_of(j, cuts) {
                within += sim[[i, j]];
                n_within += 1;
            } else {
                between += sim[[i, j]];
                n_between += 1;
            }
        }
    }
    let w = within / n_within as f64;
    let b = if n_between == 0 {
        0.0
    } else {
        between / n_between as f64
    };
    w - b
}

fn next_combination(cuts: &mut [usize], n: usize) -> bool {
    // Cuts range over 1..n (exclusive of n); advance lexicographically.
    let k = cuts.len();
    for pos in (0..k).rev() {
        let limit = n - (k - pos);
        if cuts[pos] < limit {
            cuts[pos] += 1;
            for q in pos + 1..k {
                cuts[q] = cuts[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive search over contiguous `k`-way splits, maximizing
/// [`partition_objective`]. Ties go to the lexicographically smallest cuts.
pub fn segment_phases(sim: ArrayView2<'_, f64>, k: usize) -> Result<PhasePartition> {
    let n = sim.nrows();
    if sim.ncols() != n {
        return Err(CastError::ShapeMismatch(format!(
            "similarity matrix must be square, got {:?}",
            sim.dim()
        )));
    }
    if !(2..=MAX_PHASES).contains(&k) {
        return Err(CastError::InvalidParams(format!(
            "phase count must lie in 2..={MAX_PHASES}, got {k}"
        )));
    }
    if n < k {
        return Err(CastError::TooFewLayers { layers: n, phases: k });
    }
    if sim.iter().any(|v| !v.is_finite()) {
        return Err(CastError::NonFiniteInput("segment_phases"));
    }

    let mut cuts: Vec<usize> = (1..k).collect();
    let mut best = cuts.clone();
    let mut best_value = partition_objective(sim, &cuts);
    while next_combination(&mut cuts, n) {
        let v = partition_objective(sim, &cuts);
        if v > best_value {
            best_value = v;
            best.clone_from(&cuts);
        }
    }

    let mut partition = PhasePartition {
        cut_points: best,
        objective_value: best_value,
        per_phase_mean_cka: Vec::new(),
        labels: Vec::new(),
    };
    partition.per_phase_mean_cka = partition
        .phase_ranges(n)
        .into_iter()
        .map(|(lo, hi)| {
            let block = sim.slice(ndarray::s![lo..hi, lo..hi]);
            block.sum() / block.len() as f64
        })
        .collect();
    partition.labels = if k == PHASE_LABELS.len() {
        PHASE_LABELS.iter().map(|s| s.to_string()).collect()
    } else {
        (0..k).map(|p| format!("phase_{p}")).collect()
    };
    Ok(partition)
}
