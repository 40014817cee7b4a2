// SPDX-License-Identifier: Apache-2.0

//! Resampling and sensitivity machinery: bootstrap intervals, sweeps over
//! sample size, threshold and feature count, and estimator comparison.
//!
//! Every sweep cell and bootstrap replicate is an independent job seeded from
//! `(master seed, job index)`, so results do not depend on thread count.

mod bootstrap;
mod compare;
mod sweeps;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CastError, Result};
use crate::metrics::MetricName;

pub use bootstrap::{
    bootstrap_ci, bootstrap_replicates, BootstrapOptions, BootstrapReplicate, BootstrapResult,
    DEFAULT_BOOTSTRAP_LEVEL, DEFAULT_BOOTSTRAP_REPLICATES,
};
pub use compare::{compare_estimators, comparison_csv, EstimatorComparison};
pub use sweeps::{
    rff_dim_sweep, sample_size_sweep, threshold_sweep, threshold_sweep_spectra, RffSweepOptions,
    SampleSweepOptions, DEFAULT_SEEDS_PER_SIZE, DEFAULT_THRESHOLD_GRID,
};

/// Value at quantile `q` of ascending `sorted`, interpolating linearly at
/// 1-based position `1 + (n − 1)·q`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "percentile of an empty sample");
    let pos = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Two-sided percentile interval at `level`.
pub fn percentile_ci(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(CastError::InvalidParams(format!(
            "a percentile interval needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(CastError::InvalidParams(format!("level must lie in (0, 1), got {level}")));
    }
    if samples.iter().any(|s| s.is_nan()) {
        return Err(CastError::NonFiniteInput("percentile_ci"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((
        percentile(&sorted, (1.0 - level) / 2.0),
        percentile(&sorted, (1.0 + level) / 2.0),
    ))
}

/// Population standard deviation over `|mean|`. Zero for constant samples,
/// including an all-zero one; `+∞` when the mean is zero but the spread is not.
pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().all(|&v| v == values[0]) {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if mean == 0.0 {
        f64::INFINITY
    } else {
        std / mean.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Threshold,
    SampleSize,
    RffDims,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Threshold => "threshold",
            SweepAxis::SampleSize => "sample_size",
            SweepAxis::RffDims => "rff_dims",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub metric: MetricName,
    pub estimate: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub cv: Option<f64>,
}

/// All cells for one `(layer, axis value)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub layer: usize,
    pub value: f64,
    pub cells: Vec<SweepCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub records: Vec<SweepRecord>,
}

impl SweepTable {
    pub fn rows(&self) -> Vec<TableRow> {
        self.records
            .iter()
            .flat_map(|r| {
                r.cells.iter().map(move |c| TableRow {
                    layer: r.layer,
                    axis: self.axis.as_str().to_string(),
                    value: r.value,
                    metric: c.metric.as_str().to_string(),
                    estimate: c.estimate,
                    ci_low: c.ci_low,
                    ci_high: c.ci_high,
                    cv: c.cv,
                })
            })
            .collect()
    }

    pub fn cell(&self, layer: usize, value: f64, metric: MetricName) -> Option<&SweepCell> {
        self.records
            .iter()
            .find(|r| r.layer == layer && r.value == value)
            .and_then(|r| r.cells.iter().find(|c| c.metric == metric))
    }

    pub fn to_csv(&self) -> Result<String> {
        rows_to_csv(&self.rows())
    }

    pub fn to_json(&self) -> serde_json::Value {
        rows_to_json(self.axis.as_str(), &self.axis_values, &self.rows())
    }
}

/// One CSV line of a sweep or bootstrap output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub layer: usize,
    pub axis: String,
    pub value: f64,
    pub metric: String,
    pub estimate: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub cv: Option<f64>,
}

pub fn rows_to_csv(rows: &[TableRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(["layer", "axis", "value", "metric", "estimate", "ci_low", "ci_high", "cv"])
        .map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| CastError::InvalidParams(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Rows grouped by layer, in first-appearance order.
pub fn rows_to_json(axis: &str, axis_values: &[f64], rows: &[TableRow]) -> serde_json::Value {
    let mut by_layer: BTreeMap<usize, Vec<serde_json::Value>> = BTreeMap::new();
    for r in rows {
        by_layer.entry(r.layer).or_default().push(serde_json::json!({
            "value": r.value,
            "metric": r.metric,
            "estimate": r.estimate,
            "ci_low": r.ci_low,
            "ci_high": r.ci_high,
            "cv": r.cv,
        }));
    }
    let layers: Vec<_> = by_layer
        .into_iter()
        .map(|(layer, cells)| serde_json::json!({ "layer": layer, "cells": cells }))
        .collect();
    serde_json::json!({ "axis": axis, "axis_values": axis_values, "layers": layers })
}

pub(crate) fn csv_error(e: csv::Error) -> CastError {
    CastError::InvalidParams(format!("csv serialization: {e}"))
}
