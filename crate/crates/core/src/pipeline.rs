// SPDX-License-Identifier: Apache-2.0

//! End-to-end analysis of a bundle: linear and kernel-space metrics for every
//! transition, the layer similarity matrix and its phase partition.

use std::path::PathBuf;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    kernel_layers, kernel_transition, linear_transition, rff_seed, transition_gammas, transition_pair,
    RffOptions, CKA_STREAM,
};
use crate::bundle::HiddenStateBundle;
use crate::error::{CastError, Result};
use crate::estimation::Estimator;
use crate::kernel::{
    cka_matrix_from_layers, CkaMode, CkaOptions, GammaPolicy, KernelKind, DEFAULT_PAIR_SAMPLE,
    DEFAULT_RFF_DIMS, DEFAULT_ROW_CAP,
};
use crate::metrics::{MetricOptions, SpectrumMode, DEFAULT_THRESHOLD};
use crate::phases::{segment_phases, MAX_PHASES};
use crate::report::{AnalysisReport, Provenance, TransitionReport};
use crate::rng::derive_seed;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PHASES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = CastError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(CastError::InvalidParams(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub bundle_path: PathBuf,
    pub estimator: Estimator,
    /// Relative pseudoinverse cutoff for pinv, truncated SVD and the
    /// feature-space fit. `None` uses `max(m, d)·machine ε`.
    pub rcond: Option<f64>,
    pub threshold: f64,
    pub spectrum_mode: SpectrumMode,
    pub kernel: KernelKind,
    pub rff_dims: usize,
    pub gamma: GammaPolicy,
    pub pair_sample: usize,
    pub center_rff_features: bool,
    /// Row cap for the kernel computations (CKA and feature-space fits).
    pub cka_row_cap: usize,
    pub cka_mode: CkaMode,
    pub phases: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub report_formats: Vec<ReportFormat>,
    pub percent_rn: bool,
    pub deterministic: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            bundle_path: PathBuf::new(),
            estimator: Estimator::Pinv { rcond: None },
            rcond: None,
            threshold: DEFAULT_THRESHOLD,
            spectrum_mode: SpectrumMode::Retained,
            kernel: KernelKind::Rbf,
            rff_dims: DEFAULT_RFF_DIMS,
            gamma: GammaPolicy::PerLayer,
            pair_sample: DEFAULT_PAIR_SAMPLE,
            center_rff_features: false,
            cka_row_cap: DEFAULT_ROW_CAP,
            cka_mode: CkaMode::Exact,
            phases: DEFAULT_PHASES,
            seed: DEFAULT_SEED,
            output_dir: PathBuf::from("cast-report"),
            report_formats: vec![ReportFormat::Json, ReportFormat::Csv],
            percent_rn: false,
            deterministic: false,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CastError::InvalidParams(msg));
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold must lie in (0, 1), got {}", self.threshold));
        }
        if let Some(r) = self.rcond {
            if !(r.is_finite() && r >= 0.0) {
                return bad(format!("rcond must be non-negative, got {r}"));
            }
        }
        if self.rff_dims == 0 {
            return bad("rff_dims must be positive".into());
        }
        if self.kernel == KernelKind::Linear {
            return bad("the feature-space transition needs kernel rbf or laplacian".into());
        }
        if let GammaPolicy::Fixed(g) = self.gamma {
            if !(g.is_finite() && g > 0.0) {
                return bad(format!("fixed gamma must be positive, got {g}"));
            }
        }
        if self.cka_row_cap < 2 || self.pair_sample == 0 {
            return bad("cka_row_cap must be at least 2 and pair_sample positive".into());
        }
        if !(2..=MAX_PHASES).contains(&self.phases) {
            return bad(format!("phases must lie in 2..={MAX_PHASES}, got {}", self.phases));
        }
        if self.report_formats.is_empty() {
            return bad("at least one report format is required".into());
        }
        Ok(())
    }

    /// The estimator with the global `rcond` filled in where it applies.
    pub fn resolved_estimator(&self) -> Estimator {
        match (self.estimator, self.rcond) {
            (Estimator::Pinv { rcond: None }, Some(r)) => Estimator::Pinv { rcond: Some(r) },
            (Estimator::TruncatedSvd { k, rcond: None }, Some(r)) => Estimator::TruncatedSvd { k, rcond: Some(r) },
            (e, _) => e,
        }
    }

    pub fn metric_options(&self) -> MetricOptions {
        MetricOptions {
            threshold: self.threshold,
            mode: self.spectrum_mode,
        }
    }

    pub fn rff_options(&self) -> RffOptions {
        RffOptions {
            kernel: self.kernel,
            num_features: self.rff_dims,
            gamma: self.gamma,
            pair_sample: self.pair_sample,
            rcond: self.rcond,
            center_features: self.center_rff_features,
        }
    }

    pub fn cka_options(&self) -> CkaOptions {
        CkaOptions {
            kernel: self.kernel,
            gamma: self.gamma,
            mode: self.cka_mode,
            row_cap: self.cka_row_cap,
            pair_sample: self.pair_sample,
            seed: derive_seed(self.seed, CKA_STREAM),
        }
    }
}

/// Runs the full analysis. The report does not depend on the number of
/// worker threads.
pub fn analyze(bundle: &HiddenStateBundle, config: &AnalysisConfig) -> Result<AnalysisReport> {
    config.validate()?;
    let estimator = config.resolved_estimator();
    let metric = config.metric_options();
    let rff = config.rff_options();

    let (rows, layers) = kernel_layers(bundle, config.cka_row_cap, config.seed);
    let gammas = transition_gammas(&layers, rff.gamma, rff.pair_sample, config.seed)?;
    log::info!(
        "analyzing {} transitions ({} rows, {} kernel rows)",
        bundle.num_transitions(),
        bundle.num_rows(),
        rows.len()
    );

    let transitions: Vec<TransitionReport> = (0..bundle.num_transitions())
        .into_par_iter()
        .map(|i| {
            let pair = transition_pair(bundle, i, None)?;
            let lin = linear_transition(&pair, &estimator, i, &metric)?;
            drop(pair);
            let kt = kernel_transition(
                layers[i].view(),
                layers[i + 1].view(),
                i,
                gammas[i],
                rff_seed(config.seed, 0, i),
                &rff,
                &metric,
            )?;
            log::debug!("transition {i}: ER {} / RFF ER {}", lin.metrics.effective_rank, kt.metrics.effective_rank);
            Ok(TransitionReport {
                layer_index: i,
                linear: lin.metrics,
                rff: kt.metrics,
                rff_gamma: kt.gamma,
                converged: lin.estimate.converged,
                warnings: lin.estimate.warnings,
                linear_singular_values: lin.singular_values,
                rff_singular_values: kt.singular_values,
            })
        })
        .collect::<Result<_>>()?;

    let cka = cka_matrix_from_layers(&layers, &config.cka_options())?;
    let phases = if bundle.num_layers() >= config.phases {
        Some(segment_phases(cka.view(), config.phases)?)
    } else {
        log::warn!(
            "{} layers cannot be split into {} phases; skipping segmentation",
            bundle.num_layers(),
            config.phases
        );
        None
    };

    let m = bundle.manifest();
    Ok(AnalysisReport {
        provenance: Provenance {
            tool: "cast".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            bundle_checksum: bundle.checksum(),
            model_id: m.model_id.clone(),
            num_layers: bundle.num_layers(),
            hidden_dim: bundle.hidden_dim(),
            num_rows: bundle.num_rows(),
            num_sequences: m.num_sequences(),
            kernel_rows: rows.len(),
            generated_at_unix: None,
        },
        transitions,
        cka_matrix: rows_of(&cka),
        phases,
    })
}

fn rows_of(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}
