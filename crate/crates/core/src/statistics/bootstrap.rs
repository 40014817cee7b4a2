// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{coefficient_of_variation, percentile_ci, rows_to_csv, rows_to_json, TableRow};
use crate::analysis::{linear_transition, transition_pair};
use crate::bundle::HiddenStateBundle;
use crate::error::{CastError, Result};
use crate::estimation::Estimator;
use crate::metrics::{LayerMetrics, MetricName, MetricOptions};
use crate::rng::job_rng;
use crate::sampling::{resample_sequences, rows_for_sequences};

pub const DEFAULT_BOOTSTRAP_REPLICATES: usize = 20;
pub const DEFAULT_BOOTSTRAP_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
    pub estimator: Estimator,
    pub metric: MetricOptions,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            replicates: DEFAULT_BOOTSTRAP_REPLICATES,
            level: DEFAULT_BOOTSTRAP_LEVEL,
            seed: 42,
            estimator: Estimator::Pinv { rcond: None },
            metric: MetricOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub metric_name: MetricName,
    pub layer_index: usize,
    pub point_estimate: f64,
    pub samples: Vec<f64>,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    #[serde(rename = "B")]
    pub replicates: usize,
}

impl BootstrapResult {
    pub fn row(&self) -> TableRow {
        TableRow {
            layer: self.layer_index,
            axis: "bootstrap".into(),
            value: self.level,
            metric: self.metric_name.as_str().into(),
            estimate: self.point_estimate,
            ci_low: Some(self.ci_low),
            ci_high: Some(self.ci_high),
            cv: Some(coefficient_of_variation(&self.samples)),
        }
    }

    pub fn to_csv(results: &[BootstrapResult]) -> Result<String> {
        rows_to_csv(&results.iter().map(|r| r.row()).collect::<Vec<_>>())
    }

    pub fn to_json(results: &[BootstrapResult]) -> serde_json::Value {
        let level = results.first().map(|r| vec![r.level]).unwrap_or_default();
        rows_to_json("bootstrap", &level, &results.iter().map(|r| r.row()).collect::<Vec<_>>())
    }
}

/// Resampled sequences of one replicate and the rows they expand to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BootstrapReplicate {
    pub sequences: Vec<usize>,
    pub rows: Vec<usize>,
}

/// Replicate `b` draws `n_seq` sequences with replacement from stream
/// `(seed, b)` and copies each chosen sequence's rows whole.
pub fn bootstrap_replicates(bundle: &HiddenStateBundle, replicates: usize, seed: u64) -> Result<Vec<BootstrapReplicate>> {
    let n_seq = bundle.sequence_lengths().len();
    if n_seq < 2 {
        return Err(CastError::InsufficientSequences(n_seq));
    }
    let offsets = bundle.sequence_offsets();
    Ok((0..replicates)
        .map(|b| {
            let mut rng = job_rng(seed, b as u64);
            let sequences = resample_sequences(n_seq, n_seq, &mut rng);
            let rows = rows_for_sequences(&offsets, &sequences);
            BootstrapReplicate { sequences, rows }
        })
        .collect())
}

/// Percentile bootstrap intervals for `metrics` of transition `transition`.
pub fn bootstrap_ci(
    bundle: &HiddenStateBundle,
    transition: usize,
    metrics: &[MetricName],
    opts: &BootstrapOptions,
) -> Result<Vec<BootstrapResult>> {
    if opts.replicates < 2 {
        return Err(CastError::InvalidParams(format!(
            "bootstrap needs at least 2 replicates, got {}",
            opts.replicates
        )));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(CastError::InvalidParams(format!("level must lie in (0, 1), got {}", opts.level)));
    }
    if transition >= bundle.num_transitions() {
        return Err(CastError::InvalidParams(format!(
            "transition {transition} out of range (bundle has {})",
            bundle.num_transitions()
        )));
    }
    let replicates = bootstrap_replicates(bundle, opts.replicates, opts.seed)?;

    let point = fit(bundle, transition, None, opts)?;
    let fitted: Vec<LayerMetrics> = replicates
        .par_iter()
        .map(|rep| fit(bundle, transition, Some(&rep.rows), opts))
        .collect::<Result<_>>()?;

    metrics
        .iter()
        .map(|&m| {
            let samples: Vec<f64> = fitted.iter().map(|f| f.get(m)).collect();
            let (ci_low, ci_high) = percentile_ci(&samples, opts.level)?;
            Ok(BootstrapResult {
                metric_name: m,
                layer_index: transition,
                point_estimate: point.get(m),
                samples,
                ci_low,
                ci_high,
                level: opts.level,
                replicates: opts.replicates,
            })
        })
        .collect()
}

fn fit(bundle: &HiddenStateBundle, transition: usize, rows: Option<&[usize]>, opts: &BootstrapOptions) -> Result<LayerMetrics> {
    let pair = transition_pair(bundle, transition, rows)?;
    Ok(linear_transition(&pair, &opts.estimator, transition, &opts.metric)?.metrics)
}
