// SPDX-License-Identifier: Apache-2.0

//! Probe-free analysis of transformer layer transitions.
//!
//! Hidden states for consecutive layers are loaded from a bundle, each
//! transition `H_{i+1} ≈ H_i·T_i + 1bᵀ` is estimated by least squares, and
//! the spectrum of `T_i` is summarized by a handful of metrics. The same
//! metrics run on a random-Fourier-feature lift of the states, and a CKA
//! similarity matrix across layers feeds a contiguous phase segmentation.

pub mod analysis;
pub mod bundle;
pub mod error;
pub mod estimation;
pub mod kernel;
pub mod linalg;
pub mod metrics;
pub mod phases;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod statistics;

pub use bundle::{generate_synthetic, load_bundle, write_bundle, BundleManifest, HiddenStateBundle, SyntheticSpec};
pub use error::{CastError, Result};
pub use estimation::{center, CenteredPair, Estimator, EstimatorKind, TransformEstimate};
pub use kernel::{cka, cka_matrix, CkaMode, CkaOptions, GammaPolicy, KernelKind};
pub use linalg::{pinv, svd, Spectrum};
pub use metrics::{LayerMetrics, MetricName, MetricOptions, SpectrumMode};
pub use phases::{segment_phases, PhasePartition};
pub use pipeline::{analyze, AnalysisConfig, ReportFormat};
pub use report::AnalysisReport;
pub use statistics::{BootstrapResult, SweepTable};
