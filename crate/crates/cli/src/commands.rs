// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use ndarray::Array2;

use cast_core::bundle::{default_layer_file, MANIFEST_FILE};
use cast_core::kernel::RFF_DIM_GRID;
use cast_core::report::{dense_csv, CKA_CSV, METRICS_CSV, REPORT_JSON};
use cast_core::statistics::{
    bootstrap_ci, compare_estimators, comparison_csv, rff_dim_sweep, sample_size_sweep, threshold_sweep,
    BootstrapOptions, RffSweepOptions, SampleSweepOptions, DEFAULT_THRESHOLD_GRID,
};
use cast_core::{
    analyze, cka_matrix, generate_synthetic, load_bundle, segment_phases, write_bundle, AnalysisConfig,
    AnalysisReport, BootstrapResult, CkaMode, CkaOptions, Estimator, EstimatorKind, HiddenStateBundle, MetricName,
    MetricOptions, ReportFormat, SpectrumMode, SweepTable, SyntheticSpec,
};

use crate::args::*;
use crate::output::{commit, OutputDir};

impl EstimatorArgs {
    pub fn build(&self, kind: EstimatorKind) -> Estimator {
        match kind {
            EstimatorKind::Pinv => Estimator::Pinv { rcond: self.rcond },
            EstimatorKind::Ridge => Estimator::Ridge { lambda: self.lambda },
            EstimatorKind::ElasticNet => Estimator::ElasticNet {
                l1: self.l1,
                l2: self.l2,
                max_iter: self.max_iter,
                tol: self.tol,
            },
            EstimatorKind::TruncatedSvd => Estimator::TruncatedSvd {
                k: self.k,
                rcond: self.rcond,
            },
        }
    }

    fn selected(&self) -> Estimator {
        self.build(self.estimator)
    }
}

fn open_bundle(path: &Path) -> Result<HiddenStateBundle> {
    let bundle = load_bundle(path)?;
    log::info!(
        "loaded {}: {} layers, {} rows, dim {}",
        path.display(),
        bundle.num_layers(),
        bundle.num_rows(),
        bundle.hidden_dim()
    );
    Ok(bundle)
}

fn now_unix() -> Option<u64> {
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
}

fn report_paths(written: &[std::path::PathBuf]) {
    for p in written {
        println!("{}", p.display());
    }
}

fn table_files(stem: &str, formats: &[ReportFormat], csv: impl FnOnce() -> Result<String>, json: serde_json::Value) -> Result<Vec<(String, String)>> {
    let mut files = Vec::new();
    if formats.contains(&ReportFormat::Json) {
        files.push((format!("{stem}.json"), pretty(&json)?));
    }
    if formats.contains(&ReportFormat::Csv) {
        files.push((format!("{stem}.csv"), csv()?));
    }
    if files.is_empty() {
        bail!("at least one output format is required");
    }
    Ok(files)
}

fn pretty(v: &serde_json::Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn analyze_cmd(a: &AnalyzeArgs) -> Result<()> {
    let config = AnalysisConfig {
        bundle_path: a.bundle.clone(),
        estimator: a.estimator.selected(),
        rcond: a.estimator.rcond,
        threshold: a.threshold,
        spectrum_mode: if a.all_singular_values { SpectrumMode::All } else { SpectrumMode::Retained },
        kernel: a.kernel.kernel,
        rff_dims: a.rff_dims,
        gamma: a.kernel.gamma,
        pair_sample: a.kernel.pair_sample,
        center_rff_features: a.center_rff,
        cka_row_cap: a.kernel.cka_row_cap,
        cka_mode: if a.cka_rff {
            CkaMode::Rff { num_features: a.rff_dims }
        } else {
            CkaMode::Exact
        },
        phases: a.phases,
        seed: a.seed,
        output_dir: a.out.clone(),
        report_formats: a.format.clone(),
        percent_rn: a.percent_rn,
        deterministic: a.deterministic,
    };
    config.validate()?;
    let bundle = open_bundle(&a.bundle)?;
    let mut report = analyze(&bundle, &config)?;
    if !a.deterministic {
        report.provenance.generated_at_unix = now_unix();
    }

    let mut files = Vec::new();
    if a.format.contains(&ReportFormat::Json) {
        files.push((REPORT_JSON.to_string(), report.to_json()?));
    }
    if a.format.contains(&ReportFormat::Csv) {
        files.push((METRICS_CSV.to_string(), report.metrics_csv()?));
        files.push((CKA_CSV.to_string(), report.cka_csv()?));
    }
    report_paths(&commit(&a.out, &files)?);
    Ok(())
}

pub fn sweep_cmd(s: &SweepArgs) -> Result<()> {
    let (common, table): (&SweepCommon, SweepTable) = match &s.kind {
        SweepKind::Threshold {
            common,
            estimator,
            thresholds,
        } => {
            let grid = if thresholds.is_empty() { DEFAULT_THRESHOLD_GRID.to_vec() } else { thresholds.clone() };
            let bundle = open_bundle(&common.bundle)?;
            (common, threshold_sweep(&bundle, &grid, &estimator.selected())?)
        }
        SweepKind::Samples {
            common,
            estimator,
            sizes,
            seeds_per_size,
            threshold,
        } => {
            let bundle = open_bundle(&common.bundle)?;
            let opts = SampleSweepOptions {
                seeds_per_size: *seeds_per_size,
                seed: common.seed,
                estimator: estimator.selected(),
                metric: MetricOptions {
                    threshold: *threshold,
                    ..MetricOptions::default()
                },
            };
            (common, sample_size_sweep(&bundle, sizes, &MetricName::CORE, &opts)?)
        }
        SweepKind::Rff {
            common,
            kernel,
            dims,
            threshold,
        } => {
            let grid = if dims.is_empty() { RFF_DIM_GRID.to_vec() } else { dims.clone() };
            let bundle = open_bundle(&common.bundle)?;
            let mut opts = RffSweepOptions {
                row_cap: kernel.cka_row_cap,
                seed: common.seed,
                metric: MetricOptions {
                    threshold: *threshold,
                    ..MetricOptions::default()
                },
                ..RffSweepOptions::default()
            };
            opts.rff.kernel = kernel.kernel;
            opts.rff.gamma = kernel.gamma;
            opts.rff.pair_sample = kernel.pair_sample;
            (common, rff_dim_sweep(&bundle, &grid, &opts)?)
        }
    };
    let stem = format!("sweep_{}", table.axis.as_str());
    let files = table_files(&stem, &common.format, || Ok(table.to_csv()?), table.to_json())?;
    report_paths(&commit(&common.out, &files)?);
    Ok(())
}

pub fn bootstrap_cmd(b: &BootstrapArgs) -> Result<()> {
    let bundle = open_bundle(&b.bundle)?;
    let transitions: Vec<usize> = match b.transition {
        Some(t) => vec![t],
        None => (0..bundle.num_transitions()).collect(),
    };
    let opts = BootstrapOptions {
        replicates: b.replicates,
        level: b.level,
        seed: b.seed,
        estimator: b.estimator.selected(),
        metric: MetricOptions {
            threshold: b.threshold,
            ..MetricOptions::default()
        },
    };
    let mut results = Vec::new();
    for t in transitions {
        results.extend(bootstrap_ci(&bundle, t, &MetricName::BOOTSTRAP, &opts)?);
    }
    let files = table_files(
        "bootstrap",
        &b.format,
        || Ok(BootstrapResult::to_csv(&results)?),
        BootstrapResult::to_json(&results),
    )?;
    report_paths(&commit(&b.out, &files)?);
    Ok(())
}

pub fn compare_cmd(c: &CompareArgs) -> Result<()> {
    let bundle = open_bundle(&c.bundle)?;
    let configs: Vec<Estimator> = c.estimators.iter().map(|&k| c.estimator.build(k)).collect();
    let rows = compare_estimators(&bundle, c.transition, &configs, c.threshold)?;
    for r in &rows {
        log::info!(
            "{}: error {:.4e}, ER {}, {:.3}s",
            r.estimator,
            r.reconstruction_error,
            r.effective_rank,
            r.seconds
        );
    }
    let files = table_files(
        "comparison",
        &c.format,
        || Ok(comparison_csv(&rows)?),
        serde_json::to_value(&rows)?,
    )?;
    report_paths(&commit(&c.out, &files)?);
    Ok(())
}

pub fn synth_cmd(s: &SynthArgs) -> Result<()> {
    let spec = SyntheticSpec::uniform(s.layers, s.dim, s.rows, s.rank, s.decay, s.noise, s.seed)
        .with_sequence_length(s.seq_len);
    let (bundle, truth) = generate_synthetic(&spec)?;

    let mut out = OutputDir::open(&s.out)?;
    out.track(MANIFEST_FILE);
    for i in 0..bundle.num_layers() {
        out.track(&default_layer_file(i));
    }
    let result = (|| -> Result<()> {
        write_bundle(&bundle, out.path())?;
        if s.write_truth {
            for (i, t) in truth.iter().enumerate() {
                let rows: Vec<Vec<f64>> = t.rows().into_iter().map(|r| r.to_vec()).collect();
                out.write(&format!("truth_{i:03}.csv"), dense_csv(&rows)?.as_bytes())?;
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        out.rollback();
        return Err(e);
    }
    println!("{}", bundle.checksum());
    Ok(())
}

pub fn plotdata_cmd(p: &PlotdataArgs) -> Result<()> {
    let report = AnalysisReport::load(&p.report)?;
    report_paths(&commit(&p.out, &report.plot_series()?)?);
    Ok(())
}

pub fn phases_cmd(p: &PhasesArgs) -> Result<()> {
    let sim: Array2<f64> = match (&p.report, &p.bundle) {
        (Some(path), _) => {
            let report = AnalysisReport::load(path)?;
            let n = report.cka_matrix.len();
            let flat: Vec<f64> = report.cka_matrix.iter().flatten().copied().collect();
            Array2::from_shape_vec((n, n), flat).context("report holds a non-square similarity matrix")?
        }
        (None, Some(path)) => {
            let bundle = open_bundle(path)?;
            let opts = CkaOptions {
                kernel: p.kernel.kernel,
                gamma: p.kernel.gamma,
                mode: CkaMode::Exact,
                row_cap: p.kernel.cka_row_cap,
                pair_sample: p.kernel.pair_sample,
                seed: cast_core::rng::derive_seed(p.seed, cast_core::analysis::CKA_STREAM),
            };
            cka_matrix(&bundle, &opts)?
        }
        (None, None) => bail!("phases needs --report or --bundle"),
    };
    let partition = segment_phases(sim.view(), p.k)?;
    let text = pretty(&serde_json::to_value(&partition)?)?;
    match &p.out {
        Some(path) => {
            let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let name = path.file_name().context("--out must name a file")?.to_string_lossy().into_owned();
            report_paths(&commit(dir, &[(name, text)])?);
        }
        None => print!("{text}"),
    }
    Ok(())
}
