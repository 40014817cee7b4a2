// SPDX-License-Identifier: Apache-2.0

//! Report types and their on-disk forms.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CastError, Result};
use crate::metrics::{LayerMetrics, MetricName};
use crate::phases::PhasePartition;
use crate::pipeline::{AnalysisConfig, ReportFormat};

pub const REPORT_JSON: &str = "report.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const CKA_CSV: &str = "cka.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config: AnalysisConfig,
    /// SHA-256 over the manifest and layer bytes.
    pub bundle_checksum: String,
    pub model_id: String,
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub num_rows: usize,
    pub num_sequences: usize,
    pub kernel_rows: usize,
    pub generated_at_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub layer_index: usize,
    pub linear: LayerMetrics,
    pub rff: LayerMetrics,
    pub rff_gamma: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub linear_singular_values: Vec<f64>,
    pub rff_singular_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub provenance: Provenance,
    pub transitions: Vec<TransitionReport>,
    pub cka_matrix: Vec<Vec<f64>>,
    pub phases: Option<PhasePartition>,
}

impl AnalysisReport {
    /// Copy with residual-type metrics scaled to percent when the config asks
    /// for it. Internal values are always fractions.
    pub fn for_output(&self) -> AnalysisReport {
        let mut out = self.clone();
        if self.provenance.config.percent_rn {
            for t in &mut out.transitions {
                for m in [&mut t.linear, &mut t.rff] {
                    m.residual_norm *= 100.0;
                    m.reconstruction_error *= 100.0;
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.for_output())
            .map_err(|e| CastError::InvalidParams(format!("report serialization: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CastError::InvalidParams(format!("unreadable report: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(CastError::MissingFile(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| CastError::io(path, e))?;
        Self::from_json(&text)
    }

    /// One row per `(layer, variant)` with every metric as a column.
    pub fn metrics_csv(&self) -> Result<String> {
        let out = self.for_output();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["layer".to_string(), "variant".to_string()];
        header.extend(MetricName::ALL.iter().map(|m| m.as_str().to_string()));
        header.push("decay_intercept".into());
        header.push("threshold_used".into());
        w.write_record(&header).map_err(csv_err)?;
        for t in &out.transitions {
            for (variant, m) in [("linear", &t.linear), ("rff", &t.rff)] {
                let mut rec = vec![t.layer_index.to_string(), variant.to_string()];
                rec.extend(MetricName::ALL.iter().map(|&n| m.get(n).to_string()));
                rec.push(m.decay_intercept.to_string());
                rec.push(m.threshold_used.to_string());
                w.write_record(&rec).map_err(csv_err)?;
            }
        }
        finish(w)
    }

    pub fn cka_csv(&self) -> Result<String> {
        dense_csv(&self.cka_matrix)
    }

    /// Writes the requested formats into `dir`, returning the paths written.
    pub fn write(&self, dir: impl AsRef<Path>, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
        let mut files = Vec::new();
        if formats.contains(&ReportFormat::Json) {
            files.push((REPORT_JSON.to_string(), self.to_json()?));
        }
        if formats.contains(&ReportFormat::Csv) {
            files.push((METRICS_CSV.to_string(), self.metrics_csv()?));
            files.push((CKA_CSV.to_string(), self.cka_csv()?));
        }
        write_files(dir, &files)
    }

    /// Plot-ready series: sorted singular values per transition, one
    /// metric-vs-layer file per metric and the dense similarity matrix.
    pub fn plot_series(&self) -> Result<Vec<(String, String)>> {
        let out = self.for_output();
        let mut files = Vec::new();
        for t in &out.transitions {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["variant", "index", "sigma", "log10_sigma", "normalized"])
                .map_err(csv_err)?;
            for (variant, sv) in [("linear", &t.linear_singular_values), ("rff", &t.rff_singular_values)] {
                let s1 = sv.first().copied().unwrap_or(0.0);
                for (j, &s) in sv.iter().enumerate() {
                    let log = if s > 0.0 { s.log10().to_string() } else { String::new() };
                    let norm = if s1 > 0.0 { (s / s1).to_string() } else { String::new() };
                    w.write_record([variant.to_string(), (j + 1).to_string(), s.to_string(), log, norm])
                        .map_err(csv_err)?;
                }
            }
            files.push((format!("sigma_layer_{:03}.csv", t.layer_index), finish(w)?));
        }
        for metric in MetricName::ALL {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["layer", "linear", "rff"]).map_err(csv_err)?;
            for t in &out.transitions {
                w.write_record([
                    t.layer_index.to_string(),
                    t.linear.get(metric).to_string(),
                    t.rff.get(metric).to_string(),
                ])
                .map_err(csv_err)?;
            }
            files.push((format!("series_{}.csv", metric.as_str()), finish(w)?));
        }
        files.push(("cka_matrix.csv".to_string(), dense_csv(&out.cka_matrix)?));
        Ok(files)
    }
}

/// Writes `(name, contents)` pairs into `dir`, creating it if needed.
pub fn write_files(dir: impl AsRef<Path>, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| CastError::io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| CastError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn dense_csv(rows: &[Vec<f64>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| CastError::InvalidParams(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn csv_err(e: csv::Error) -> CastError {
    CastError::InvalidParams(format!("csv serialization: {e}"))
}
