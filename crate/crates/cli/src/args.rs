// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use cast_core::estimation::{DEFAULT_ENET_L1, DEFAULT_ENET_L2, DEFAULT_ENET_MAX_ITER, DEFAULT_ENET_TOL, DEFAULT_RIDGE_LAMBDA};
use cast_core::kernel::{DEFAULT_PAIR_SAMPLE, DEFAULT_RFF_DIMS, DEFAULT_ROW_CAP};
use cast_core::metrics::DEFAULT_THRESHOLD;
use cast_core::pipeline::{DEFAULT_PHASES, DEFAULT_SEED};
use cast_core::{EstimatorKind, GammaPolicy, KernelKind, ReportFormat};

#[derive(Parser, Debug)]
#[command(name = "cast", version, about = "Spectral analysis of transformer layer transitions")]
pub struct Cli {
    /// Increase log verbosity (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate every transition, compute metrics, CKA and phases.
    Analyze(AnalyzeArgs),
    /// Sensitivity sweeps over threshold, sample size or feature count.
    Sweep(SweepArgs),
    /// Bootstrap confidence intervals for one transition.
    Bootstrap(BootstrapArgs),
    /// Compare estimators on one transition.
    Compare(CompareArgs),
    /// Write a synthetic bundle with known transitions.
    Synth(SynthArgs),
    /// Turn a report into plot-ready CSV series.
    Plotdata(PlotdataArgs),
    /// Segment layers into contiguous phases from the CKA matrix.
    Phases(PhasesArgs),
}

#[derive(Args, Debug, Clone)]
pub struct EstimatorArgs {
    #[arg(long, default_value = "pinv")]
    pub estimator: EstimatorKind,
    /// Relative singular-value cutoff for pseudoinverses (default max(m, d)·ε).
    #[arg(long)]
    pub rcond: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_RIDGE_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = DEFAULT_ENET_L1)]
    pub l1: f64,
    #[arg(long, default_value_t = DEFAULT_ENET_L2)]
    pub l2: f64,
    #[arg(long, default_value_t = DEFAULT_ENET_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_ENET_TOL)]
    pub tol: f64,
    /// Rank kept by the truncated-SVD estimator (default: effective rank of the input).
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct KernelArgs {
    /// rbf or laplacian (linear is accepted for CKA only).
    #[arg(long, default_value = "rbf")]
    pub kernel: KernelKind,
    /// per-layer, global or a fixed positive bandwidth.
    #[arg(long, default_value = "per-layer")]
    pub gamma: GammaPolicy,
    /// Row pairs sampled for the median heuristic.
    #[arg(long, default_value_t = DEFAULT_PAIR_SAMPLE)]
    pub pair_sample: usize,
    /// Rows kept for kernel computations (stratified by sequence).
    #[arg(long, default_value_t = DEFAULT_ROW_CAP)]
    pub cka_row_cap: usize,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Feed every singular value (not just the numerically positive ones)
    /// to the entropy, anisotropy and concentration metrics.
    #[arg(long)]
    pub all_singular_values: bool,
    #[arg(long, default_value_t = DEFAULT_RFF_DIMS)]
    pub rff_dims: usize,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Column-center random features before the feature-space fit.
    #[arg(long)]
    pub center_rff: bool,
    /// Use random features instead of exact Gram matrices for CKA.
    #[arg(long)]
    pub cka_rff: bool,
    #[arg(long, default_value_t = DEFAULT_PHASES)]
    pub phases: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = "cast-report")]
    pub out: PathBuf,
    /// Comma-separated subset of json,csv.
    #[arg(long, value_delimiter = ',', default_value = "json,csv")]
    pub format: Vec<ReportFormat>,
    /// Single-threaded run with no timestamp, for byte-identical output.
    #[arg(long)]
    pub deterministic: bool,
    /// Report residual norm and reconstruction error in percent.
    #[arg(long)]
    pub percent_rn: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(subcommand)]
    pub kind: SweepKind,
}

#[derive(Args, Debug, Clone)]
pub struct SweepCommon {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = "cast-sweep")]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "json,csv")]
    pub format: Vec<ReportFormat>,
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Subcommand, Debug)]
pub enum SweepKind {
    /// Effective rank across relative thresholds.
    Threshold {
        #[command(flatten)]
        common: SweepCommon,
        #[command(flatten)]
        estimator: EstimatorArgs,
        /// Comma-separated ascending thresholds (default 1e-8,…,1e-1).
        #[arg(long, value_delimiter = ',')]
        thresholds: Vec<f64>,
    },
    /// Metric variation across sequence subsets of each size.
    Samples {
        #[command(flatten)]
        common: SweepCommon,
        #[command(flatten)]
        estimator: EstimatorArgs,
        /// Comma-separated subset sizes, in sequences.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = cast_core::statistics::DEFAULT_SEEDS_PER_SIZE)]
        seeds_per_size: usize,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Feature-space metrics across random feature counts.
    Rff {
        #[command(flatten)]
        common: SweepCommon,
        #[command(flatten)]
        kernel: KernelArgs,
        /// Comma-separated feature counts (default 50,…,10000).
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Args, Debug)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Transition index (layer i to i + 1); all transitions when omitted.
    #[arg(long)]
    pub transition: Option<usize>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long, default_value_t = cast_core::statistics::DEFAULT_BOOTSTRAP_REPLICATES)]
    pub replicates: usize,
    #[arg(long, default_value_t = cast_core::statistics::DEFAULT_BOOTSTRAP_LEVEL)]
    pub level: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = "cast-bootstrap")]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "json,csv")]
    pub format: Vec<ReportFormat>,
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub transition: usize,
    /// Comma-separated estimators to compare.
    #[arg(long, value_delimiter = ',', default_value = "pinv,ridge,elastic_net,truncated_svd")]
    pub estimators: Vec<EstimatorKind>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value = "cast-compare")]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "json,csv")]
    pub format: Vec<ReportFormat>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 4)]
    pub layers: usize,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 1024)]
    pub rows: usize,
    /// Rank of every transition map.
    #[arg(long, default_value_t = 16)]
    pub rank: usize,
    /// Singular values of each map decay as exp(-decay·j).
    #[arg(long, default_value_t = 0.1)]
    pub decay: f64,
    /// Noise energy relative to the signal.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 16)]
    pub seq_len: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the true maps as CSV.
    #[arg(long)]
    pub write_truth: bool,
}

#[derive(Args, Debug)]
pub struct PlotdataArgs {
    /// Path to a report.json written by `analyze`.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value = "cast-plotdata")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PhasesArgs {
    /// Read the CKA matrix from a report instead of recomputing it.
    #[arg(long, conflicts_with = "bundle", required_unless_present = "bundle")]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = DEFAULT_PHASES)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the partition as JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub deterministic: bool,
}
