// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{coefficient_of_variation, SweepAxis, SweepCell, SweepRecord, SweepTable};
use crate::analysis::{kernel_layers, kernel_transition, linear_transition, rff_seed, transition_gammas, transition_pair, RffOptions};
use crate::bundle::HiddenStateBundle;
use crate::error::{CastError, Result};
use crate::estimation::Estimator;
use crate::kernel::DEFAULT_ROW_CAP;
use crate::linalg::svd;
use crate::metrics::{effective_rank, LayerMetrics, MetricName, MetricOptions};
use crate::rng::job_rng;
use crate::sampling::{rows_for_sequences, subsample_sequences};

pub const DEFAULT_THRESHOLD_GRID: [f64; 8] = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1];
pub const DEFAULT_SEEDS_PER_SIZE: usize = 5;

/// Effective rank and rank ratio of each `(layer, spectrum)` at every
/// threshold. Each cell carries the layer's CV across thresholds.
pub fn threshold_sweep_spectra(spectra: &[(usize, Vec<f64>)], thresholds: &[f64]) -> Result<SweepTable> {
    if thresholds.is_empty() {
        return Err(CastError::InvalidParams("threshold grid is empty".into()));
    }
    if thresholds.iter().any(|&t| !(t > 0.0 && t.is_finite())) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CastError::InvalidParams(format!(
            "thresholds must be positive and strictly ascending, got {thresholds:?}"
        )));
    }
    let mut records = Vec::with_capacity(spectra.len() * thresholds.len());
    for (layer, sv) in spectra {
        let ranks: Vec<f64> = thresholds
            .iter()
            .map(|&t| effective_rank(sv, t).map(|r| r as f64))
            .collect::<Result<_>>()?;
        let ratios: Vec<f64> = ranks.iter().map(|r| r / sv.len() as f64).collect();
        let (cv_rank, cv_ratio) = (coefficient_of_variation(&ranks), coefficient_of_variation(&ratios));
        for ((&t, &rank), &ratio) in thresholds.iter().zip(&ranks).zip(&ratios) {
            records.push(SweepRecord {
                layer: *layer,
                value: t,
                cells: vec![
                    cell(MetricName::EffectiveRank, rank, Some(cv_rank)),
                    cell(MetricName::RankRatio, ratio, Some(cv_ratio)),
                ],
            });
        }
    }
    Ok(SweepTable {
        axis: SweepAxis::Threshold,
        axis_values: thresholds.to_vec(),
        records,
    })
}

/// Threshold sweep over every transition of `bundle`, one SVD per layer.
pub fn threshold_sweep(bundle: &HiddenStateBundle, thresholds: &[f64], estimator: &Estimator) -> Result<SweepTable> {
    let spectra: Vec<(usize, Vec<f64>)> = (0..bundle.num_transitions())
        .into_par_iter()
        .map(|i| {
            let pair = transition_pair(bundle, i, None)?;
            let t = estimator.fit(&pair)?;
            Ok((i, svd(t.transform.view(), false)?.singular_values))
        })
        .collect::<Result<_>>()?;
    threshold_sweep_spectra(&spectra, thresholds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSweepOptions {
    pub seeds_per_size: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub metric: MetricOptions,
}

impl Default for SampleSweepOptions {
    fn default() -> Self {
        SampleSweepOptions {
            seeds_per_size: DEFAULT_SEEDS_PER_SIZE,
            seed: 42,
            estimator: Estimator::Pinv { rcond: None },
            metric: MetricOptions::default(),
        }
    }
}

/// For each size (in sequences), fits every transition on `seeds_per_size`
/// subsets drawn without replacement and reports the mean and CV across
/// draws. A subset's sequences are taken in ascending order, so drawing the
/// whole dataset reproduces the full-data fit exactly.
pub fn sample_size_sweep(
    bundle: &HiddenStateBundle,
    sizes: &[usize],
    metrics: &[MetricName],
    opts: &SampleSweepOptions,
) -> Result<SweepTable> {
    let n_seq = bundle.sequence_lengths().len();
    if let Some(&too_big) = sizes.iter().find(|&&s| s > n_seq) {
        return Err(CastError::SizeTooLarge {
            requested: too_big,
            available: n_seq,
        });
    }
    if sizes.contains(&0) || opts.seeds_per_size == 0 {
        return Err(CastError::InvalidParams("sizes and seeds_per_size must be positive".into()));
    }
    let offsets = bundle.sequence_offsets();
    let per_size = opts.seeds_per_size;
    let jobs: Vec<(usize, usize)> = (0..sizes.len())
        .flat_map(|si| (0..per_size).map(move |s| (si, s)))
        .collect();

    let fitted: Vec<Vec<LayerMetrics>> = jobs
        .par_iter()
        .map(|&(si, s)| {
            let mut rng = job_rng(opts.seed, (si * per_size + s) as u64);
            let mut seqs = subsample_sequences(n_seq, sizes[si], &mut rng);
            seqs.sort_unstable();
            let rows = rows_for_sequences(&offsets, &seqs);
            (0..bundle.num_transitions())
                .map(|i| {
                    let pair = transition_pair(bundle, i, Some(&rows))?;
                    Ok(linear_transition(&pair, &opts.estimator, i, &opts.metric)?.metrics)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for layer in 0..bundle.num_transitions() {
        for (si, &size) in sizes.iter().enumerate() {
            let draws = &fitted[si * per_size..(si + 1) * per_size];
            let cells = metrics
                .iter()
                .map(|&m| {
                    let values: Vec<f64> = draws.iter().map(|d| d[layer].get(m)).collect();
                    let mean = values.iter().sum::<f64>() / values.len() as f64;
                    cell(m, mean, Some(coefficient_of_variation(&values)))
                })
                .collect();
            records.push(SweepRecord {
                layer,
                value: size as f64,
                cells,
            });
        }
    }
    Ok(SweepTable {
        axis: SweepAxis::SampleSize,
        axis_values: sizes.iter().map(|&s| s as f64).collect(),
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RffSweepOptions {
    pub rff: RffOptions,
    pub row_cap: usize,
    pub seed: u64,
    pub metric: MetricOptions,
}

impl Default for RffSweepOptions {
    fn default() -> Self {
        RffSweepOptions {
            rff: RffOptions::default(),
            row_cap: DEFAULT_ROW_CAP,
            seed: 42,
            metric: MetricOptions::default(),
        }
    }
}

/// The six core metrics of `T_RFF` for every `(transition, D)`, with a
/// fresh feature draw per `D`. `opts.rff.num_features` is ignored.
pub fn rff_dim_sweep(bundle: &HiddenStateBundle, dims: &[usize], opts: &RffSweepOptions) -> Result<SweepTable> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(CastError::InvalidParams(format!("feature counts must be positive, got {dims:?}")));
    }
    let (_, layers) = kernel_layers(bundle, opts.row_cap, opts.seed);
    let gammas = transition_gammas(&layers, opts.rff.gamma, opts.rff.pair_sample, opts.seed)?;
    let n_t = bundle.num_transitions();
    let jobs: Vec<(usize, usize)> = (0..n_t).flat_map(|i| (0..dims.len()).map(move |di| (i, di))).collect();

    let records: Vec<SweepRecord> = jobs
        .par_iter()
        .map(|&(i, di)| {
            let rff = RffOptions {
                num_features: dims[di],
                ..opts.rff
            };
            let seed = rff_seed(opts.seed, 1 + di as u64, i);
            let kt = kernel_transition(layers[i].view(), layers[i + 1].view(), i, gammas[i], seed, &rff, &opts.metric)?;
            Ok(SweepRecord {
                layer: i,
                value: dims[di] as f64,
                cells: MetricName::CORE
                    .iter()
                    .map(|&m| cell(m, kt.metrics.get(m), None))
                    .collect(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepTable {
        axis: SweepAxis::RffDims,
        axis_values: dims.iter().map(|&d| d as f64).collect(),
        records,
    })
}

fn cell(metric: MetricName, estimate: f64, cv: Option<f64>) -> SweepCell {
    SweepCell {
        metric,
        estimate,
        ci_low: None,
        ci_high: None,
        cv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_threshold_sequence() {
        let t = threshold_sweep_spectra(&[(0, vec![1.0, 1e-3, 1e-6])], &DEFAULT_THRESHOLD_GRID).unwrap();
        let ranks: Vec<f64> = t.records.iter().map(|r| r.cells[0].estimate).collect();
        // σ₃ = 1e−6 still exceeds 1e−7·σ₁, so the rank only drops at 1e−6.
        assert_eq!(ranks, vec![3.0, 3.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0]);
        assert_eq!(t.records.len(), 8);
    }

    #[test]
    fn unsorted_thresholds_rejected() {
        assert!(threshold_sweep_spectra(&[(0, vec![1.0])], &[1e-3, 1e-5]).is_err());
        assert!(threshold_sweep_spectra(&[(0, vec![1.0])], &[0.0, 1e-5]).is_err());
    }
}
