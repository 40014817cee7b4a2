// SPDX-License-Identifier: Apache-2.0

//! Spectral characterization of a transition.
//!
//! The per-metric functions take singular values in descending order and
//! evaluate their formula over exactly the values given. [`LayerMetrics`]
//! decides which values to feed them: by default the anisotropy index,
//! information concentration and entropy only see the *retained* values
//! (`σ_j > 1e−12·σ₁`), so exact zeros from rank-deficient estimates do not
//! dominate. [`SpectrumMode::All`] keeps every value.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{CastError, Result};
use crate::estimation::{residual_norm, CenteredPair};
use crate::linalg::svd;

/// Relative cutoff below which a singular value counts as numerically zero.
pub const POSITIVE_CUTOFF: f64 = 1e-12;
pub const DEFAULT_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMode {
    #[default]
    Retained,
    All,
}

/// Count of `σ_j > ε·σ₁`; zero when `σ₁ = 0`.
pub fn effective_rank(sv: &[f64], eps: f64) -> Result<usize> {
    let &s1 = sv.first().ok_or(CastError::EmptySpectrum)?;
    if eps.is_nan() || eps <= 0.0 {
        return Err(CastError::InvalidParams(format!(
            "threshold must be positive, got {eps}"
        )));
    }
    if s1 <= 0.0 {
        return Ok(0);
    }
    let cutoff = eps * s1;
    Ok(sv.iter().filter(|&&s| s > cutoff).count())
}

/// Least-squares fit of `ln σ_j = −α·j + β` over `j = 1..p′`, where `p′`
/// counts the values above `1e−12·σ₁`. Returns `(α, β)`.
pub fn spectral_decay_rate(sv: &[f64]) -> Result<(f64, f64)> {
    let kept = retained(sv);
    let n = kept.len();
    if n < 2 {
        return Err(CastError::InsufficientPoints(n));
    }
    let xs: Vec<f64> = (1..=n).map(|j| j as f64).collect();
    let ys: Vec<f64> = kept.iter().map(|s| s.ln()).collect();
    let x_mean = (n as f64 + 1.0) / 2.0;
    let y_mean = ys.iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - x_mean) * (y - y_mean);
        sxx += (x - x_mean) * (x - x_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    Ok((-slope, intercept))
}

/// Shannon entropy (nats) of `p_j = σ_j / Σσ`; zero terms contribute nothing.
pub fn transformation_entropy(sv: &[f64]) -> Result<f64> {
    let total = positive_sum(sv)?;
    Ok(sv
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|&s| {
            let p = s / total;
            -p * p.ln()
        })
        .sum())
}

/// `(σ_max − σ_min) / σ_mean`.
pub fn anisotropy_index(sv: &[f64]) -> Result<f64> {
    let total = positive_sum(sv)?;
    let max = sv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = total / sv.len() as f64;
    Ok((max - min) / mean)
}

/// Gini-style concentration `2Σ j·σ_j / (n·Σσ) − (n+1)/n` evaluated on the
/// descending order, giving values in `[−(n−1)/n, 0]`.
pub fn information_concentration(sv: &[f64]) -> Result<f64> {
    let total = positive_sum(sv)?;
    let n = sv.len() as f64;
    let weighted: f64 = sv
        .iter()
        .enumerate()
        .map(|(j, &s)| (j + 1) as f64 * s)
        .sum();
    Ok(2.0 * weighted / (n * total) - (n + 1.0) / n)
}

/// `σ₁ / σ_min⁺` over values above `eps_pos·σ₁`; `+∞` with fewer than two.
pub fn condition_number(sv: &[f64], eps_pos: f64) -> Result<f64> {
    let &s1 = sv.first().ok_or(CastError::EmptySpectrum)?;
    let cutoff = eps_pos * s1;
    let kept: Vec<f64> = sv.iter().copied().filter(|&s| s > cutoff && s > 0.0).collect();
    if kept.len() < 2 {
        return Ok(f64::INFINITY);
    }
    Ok(s1 / kept[kept.len() - 1])
}

pub(crate) mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

fn positive_sum(sv: &[f64]) -> Result<f64> {
    if sv.is_empty() {
        return Err(CastError::EmptySpectrum);
    }
    let total: f64 = sv.iter().sum();
    if total > 0.0 {
        Ok(total)
    } else {
        Err(CastError::AllZeroSpectrum)
    }
}

fn retained(sv: &[f64]) -> &[f64] {
    let Some(&s1) = sv.first() else {
        return sv;
    };
    let cutoff = POSITIVE_CUTOFF * s1;
    let n = sv.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    &sv[..n]
}

/// The metric fields of [`LayerMetrics`], addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    EffectiveRank,
    SpectralDecayRate,
    TransformationEntropy,
    AnisotropyIndex,
    InformationConcentration,
    ResidualNorm,
    ConditionNumber,
    ReconstructionError,
    RankRatio,
}

impl MetricName {
    pub const ALL: [MetricName; 9] = [
        MetricName::EffectiveRank,
        MetricName::SpectralDecayRate,
        MetricName::TransformationEntropy,
        MetricName::AnisotropyIndex,
        MetricName::InformationConcentration,
        MetricName::ResidualNorm,
        MetricName::ConditionNumber,
        MetricName::ReconstructionError,
        MetricName::RankRatio,
    ];

    /// The six headline metrics.
    pub const CORE: [MetricName; 6] = [
        MetricName::EffectiveRank,
        MetricName::SpectralDecayRate,
        MetricName::TransformationEntropy,
        MetricName::AnisotropyIndex,
        MetricName::InformationConcentration,
        MetricName::ResidualNorm,
    ];

    /// Metrics resampled by the bootstrap by default.
    pub const BOOTSTRAP: [MetricName; 8] = [
        MetricName::EffectiveRank,
        MetricName::SpectralDecayRate,
        MetricName::TransformationEntropy,
        MetricName::AnisotropyIndex,
        MetricName::InformationConcentration,
        MetricName::ResidualNorm,
        MetricName::ReconstructionError,
        MetricName::RankRatio,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::EffectiveRank => "effective_rank",
            MetricName::SpectralDecayRate => "spectral_decay_rate",
            MetricName::TransformationEntropy => "transformation_entropy",
            MetricName::AnisotropyIndex => "anisotropy_index",
            MetricName::InformationConcentration => "information_concentration",
            MetricName::ResidualNorm => "residual_norm",
            MetricName::ConditionNumber => "condition_number",
            MetricName::ReconstructionError => "reconstruction_error",
            MetricName::RankRatio => "rank_ratio",
        }
    }

    /// Metrics that are relative residuals (scaled by `--percent-rn`).
    pub fn is_residual(self) -> bool {
        matches!(
            self,
            MetricName::ResidualNorm | MetricName::ReconstructionError
        )
    }
}

impl std::fmt::Display for MetricName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MetricName {
    type Err = CastError;

    fn from_str(s: &str) -> Result<Self> {
        MetricName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| CastError::InvalidParams(format!("unknown metric {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    pub threshold: f64,
    pub mode: SpectrumMode,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            threshold: DEFAULT_THRESHOLD,
            mode: SpectrumMode::Retained,
        }
    }
}

/// Spectral metrics for one layer transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerMetrics {
    pub layer_index: usize,
    pub effective_rank: usize,
    pub spectral_decay_rate: f64,
    pub decay_intercept: f64,
    pub transformation_entropy: f64,
    pub anisotropy_index: f64,
    pub information_concentration: f64,
    pub residual_norm: f64,
    /// `+∞` (serialized as `null`) when fewer than two values are retained.
    #[serde(with = "infinite_as_null")]
    pub condition_number: f64,
    pub reconstruction_error: f64,
    pub rank_ratio: f64,
    pub threshold_used: f64,
}

impl LayerMetrics {
    /// Populates every field from a descending spectrum and a precomputed
    /// residual. Linear and kernel-space transitions both go through here.
    pub fn from_spectrum(
        layer_index: usize,
        sv: &[f64],
        residual: f64,
        opts: &MetricOptions,
    ) -> Result<Self> {
        if sv.is_empty() {
            return Err(CastError::EmptySpectrum);
        }
        let shaped = match opts.mode {
            SpectrumMode::Retained => retained(sv),
            SpectrumMode::All => sv,
        };
        if shaped.is_empty() {
            return Err(CastError::AllZeroSpectrum);
        }
        let effective_rank = effective_rank(sv, opts.threshold)?;
        let (alpha, beta) = spectral_decay_rate(sv)?;
        Ok(LayerMetrics {
            layer_index,
            effective_rank,
            spectral_decay_rate: alpha,
            decay_intercept: beta,
            transformation_entropy: transformation_entropy(shaped)?,
            anisotropy_index: anisotropy_index(shaped)?,
            information_concentration: information_concentration(shaped)?,
            residual_norm: residual,
            condition_number: condition_number(sv, POSITIVE_CUTOFF)?,
            reconstruction_error: residual,
            rank_ratio: effective_rank as f64 / sv.len() as f64,
            threshold_used: opts.threshold,
        })
    }

    pub fn get(&self, name: MetricName) -> f64 {
        match name {
            MetricName::EffectiveRank => self.effective_rank as f64,
            MetricName::SpectralDecayRate => self.spectral_decay_rate,
            MetricName::TransformationEntropy => self.transformation_entropy,
            MetricName::AnisotropyIndex => self.anisotropy_index,
            MetricName::InformationConcentration => self.information_concentration,
            MetricName::ResidualNorm => self.residual_norm,
            MetricName::ConditionNumber => self.condition_number,
            MetricName::ReconstructionError => self.reconstruction_error,
            MetricName::RankRatio => self.rank_ratio,
        }
    }
}

/// Metrics for a fitted transition `T` on its centered pair; the spectrum of
/// `T` is computed once.
pub fn layer_metrics(
    t: ArrayView2<'_, f64>,
    pair: &CenteredPair,
    layer_index: usize,
    opts: &MetricOptions,
) -> Result<(LayerMetrics, Vec<f64>)> {
    let spectrum = svd(t, false)?;
    let residual = residual_norm(pair, t)?;
    let metrics = LayerMetrics::from_spectrum(layer_index, &spectrum.singular_values, residual, opts)?;
    Ok((metrics, spectrum.singular_values))
}
