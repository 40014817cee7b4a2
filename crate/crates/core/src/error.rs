// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CastError>;

/// Every failure the analysis library can report.
#[derive(Debug, Error)]
pub enum CastError {
    // bundle I/O
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("size mismatch for {}: expected {expected} bytes, found {actual}", path.display())]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },
    #[error("invalid manifest: {0}")]
    ManifestInvalid(String),
    #[error("non-finite value in layer {layer} at row {row}, column {col}")]
    NonFiniteData { layer: usize, row: usize, col: usize },
    #[error("i/o failure on {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    // linear algebra
    #[error("non-finite input to {0}")]
    NonFiniteInput(&'static str),
    #[error("iteration cap exceeded in {0}")]
    ConvergenceFailure(&'static str),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    // estimation
    #[error("truncation rank k={k} must lie in 1..={max}")]
    InvalidK { k: usize, max: usize },
    #[error("zero denominator: output representation has zero norm")]
    ZeroDenominator,

    // spectral metrics
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("need at least 2 positive singular values for a decay fit, found {0}")]
    InsufficientPoints(usize),
    #[error("all singular values are zero")]
    AllZeroSpectrum,

    // kernels
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("centered kernel is zero (constant representation)")]
    ZeroCenteredKernel,

    // statistics
    #[error("need at least 2 sequences for resampling, found {0}")]
    InsufficientSequences(usize),
    #[error("requested {requested} sequences but only {available} available")]
    SizeTooLarge { requested: usize, available: usize },

    // phases
    #[error("cannot split {layers} layers into {phases} phases")]
    TooFewLayers { layers: usize, phases: usize },
}

impl CastError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CastError::IoFailure {
            path: path.into(),
            source,
        }
    }

    /// True when the failure comes from the numerics rather than from the
    /// caller's inputs or files.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            CastError::NonFiniteInput(_)
                | CastError::ConvergenceFailure(_)
                | CastError::SolveFailure(_)
                | CastError::ZeroDenominator
                | CastError::EmptySpectrum
                | CastError::InsufficientPoints(_)
                | CastError::AllZeroSpectrum
                | CastError::ZeroCenteredKernel
        )
    }
}
