// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::csv_error;
use crate::analysis::transition_pair;
use crate::bundle::HiddenStateBundle;
use crate::error::{CastError, Result};
use crate::estimation::{Estimator, EstimatorKind};
use crate::linalg::svd;
use crate::metrics::{condition_number, effective_rank, spectral_decay_rate, POSITIVE_CUTOFF};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorComparison {
    pub estimator: EstimatorKind,
    pub hyperparams: BTreeMap<String, f64>,
    pub reconstruction_error: f64,
    #[serde(with = "crate::metrics::infinite_as_null")]
    pub condition_number: f64,
    pub effective_rank: usize,
    pub decay_rate: f64,
    /// Wall-clock time of the fit alone.
    pub seconds: f64,
    pub converged: bool,
}

/// Fits each configuration on one shared centering of transition
/// `transition` and reports error, conditioning and rank of each estimate.
pub fn compare_estimators(
    bundle: &HiddenStateBundle,
    transition: usize,
    configs: &[Estimator],
    threshold: f64,
) -> Result<Vec<EstimatorComparison>> {
    if configs.len() < 2 {
        return Err(CastError::InvalidParams(format!(
            "comparison needs at least 2 estimators, got {}",
            configs.len()
        )));
    }
    if transition >= bundle.num_transitions() {
        return Err(CastError::InvalidParams(format!(
            "transition {transition} out of range (bundle has {})",
            bundle.num_transitions()
        )));
    }
    let pair = transition_pair(bundle, transition, None)?;
    configs
        .iter()
        .map(|est| {
            let start = Instant::now();
            let fit = est.fit(&pair)?;
            let seconds = start.elapsed().as_secs_f64();
            let sv = svd(fit.transform.view(), false)?.singular_values;
            Ok(EstimatorComparison {
                estimator: fit.estimator,
                hyperparams: fit.hyperparams.clone(),
                reconstruction_error: fit.fit_residual,
                condition_number: condition_number(&sv, POSITIVE_CUTOFF)?,
                effective_rank: effective_rank(&sv, threshold)?,
                decay_rate: spectral_decay_rate(&sv).map(|(a, _)| a).unwrap_or(f64::NAN),
                seconds,
                converged: fit.converged,
            })
        })
        .collect()
}

pub fn comparison_csv(rows: &[EstimatorComparison]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "estimator",
        "reconstruction_error",
        "condition_number",
        "effective_rank",
        "decay_rate",
        "seconds",
        "converged",
    ])
    .map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.estimator.as_str().to_string(),
            r.reconstruction_error.to_string(),
            r.condition_number.to_string(),
            r.effective_rank.to_string(),
            r.decay_rate.to_string(),
            r.seconds.to_string(),
            r.converged.to_string(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| CastError::InvalidParams(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
