// SPDX-License-Identifier: Apache-2.0

//! Hidden-state bundles.
//!
//! A bundle is a directory holding `manifest.json` and one raw binary file per
//! layer. Each layer file is `num_rows · hidden_dim` little-endian IEEE-754
//! binary32 values in row-major order (token index major, feature index
//! minor), with no header. Rows of consecutive sequences are stacked in
//! order; `sequence_lengths` records the block boundaries.

mod synthetic;

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CastError, Result};

pub use synthetic::{generate_synthetic, SyntheticSpec};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ByteOrder {
    Little,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleManifest {
    pub format_version: u32,
    pub model_id: String,
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub num_rows: usize,
    pub dtype: Dtype,
    pub byte_order: ByteOrder,
    pub layer_files: Vec<String>,
    pub sequence_lengths: Vec<usize>,
}

impl BundleManifest {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CastError::ManifestInvalid(msg));
        if self.format_version != FORMAT_VERSION {
            return bad(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            ));
        }
        if self.num_layers < 2 {
            return bad(format!(
                "num_layers must be at least 2, got {}",
                self.num_layers
            ));
        }
        if self.hidden_dim == 0 || self.num_rows == 0 {
            return bad("hidden_dim and num_rows must be positive".into());
        }
        if self.layer_files.len() != self.num_layers {
            return bad(format!(
                "layer_files has {} entries for {} layers",
                self.layer_files.len(),
                self.num_layers
            ));
        }
        if let Some(pos) = self.sequence_lengths.iter().position(|&s| s == 0) {
            return bad(format!("sequence_lengths[{pos}] is zero"));
        }
        let total: usize = self.sequence_lengths.iter().sum();
        if total != self.num_rows {
            return bad(format!(
                "sequence_lengths sum to {total} but num_rows is {}",
                self.num_rows
            ));
        }
        Ok(())
    }

    pub fn layer_bytes(&self) -> u64 {
        (self.num_rows * self.hidden_dim * 4) as u64
    }

    pub fn num_sequences(&self) -> usize {
        self.sequence_lengths.len()
    }
}

/// Per-layer hidden-state matrices `H_0 … H_{L−1}`, each `m × d`.
///
/// Values are kept in their on-disk f32 form; analyses upcast to f64 through
/// [`HiddenStateBundle::layer_f64`].
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenStateBundle {
    manifest: BundleManifest,
    layers: Vec<Array2<f32>>,
}

pub fn default_layer_file(index: usize) -> String {
    format!("layer_{index:03}.bin")
}

impl HiddenStateBundle {
    /// Builds a bundle from in-memory layers, generating the manifest.
    pub fn new(
        model_id: impl Into<String>,
        layers: Vec<Array2<f32>>,
        sequence_lengths: Vec<usize>,
    ) -> Result<Self> {
        let (m, d) = layers.first().map(|l| l.dim()).unwrap_or((0, 0));
        let manifest = BundleManifest {
            format_version: FORMAT_VERSION,
            model_id: model_id.into(),
            num_layers: layers.len(),
            hidden_dim: d,
            num_rows: m,
            dtype: Dtype::F32,
            byte_order: ByteOrder::Little,
            layer_files: (0..layers.len()).map(default_layer_file).collect(),
            sequence_lengths,
        };
        Self::from_parts(manifest, layers)
    }

    pub fn from_parts(manifest: BundleManifest, layers: Vec<Array2<f32>>) -> Result<Self> {
        manifest.validate()?;
        if layers.len() != manifest.num_layers {
            return Err(CastError::ManifestInvalid(format!(
                "{} layers supplied for num_layers {}",
                layers.len(),
                manifest.num_layers
            )));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.dim() != (manifest.num_rows, manifest.hidden_dim) {
                return Err(CastError::ShapeMismatch(format!(
                    "layer {i} has shape {:?}, expected ({}, {})",
                    layer.dim(),
                    manifest.num_rows,
                    manifest.hidden_dim
                )));
            }
            check_finite(i, layer.view())?;
        }
        Ok(HiddenStateBundle { manifest, layers })
    }

    pub fn manifest(&self) -> &BundleManifest {
        &self.manifest
    }

    pub fn num_layers(&self) -> usize {
        self.manifest.num_layers
    }

    pub fn num_transitions(&self) -> usize {
        self.manifest.num_layers - 1
    }

    pub fn hidden_dim(&self) -> usize {
        self.manifest.hidden_dim
    }

    pub fn num_rows(&self) -> usize {
        self.manifest.num_rows
    }

    pub fn sequence_lengths(&self) -> &[usize] {
        &self.manifest.sequence_lengths
    }

    /// Row offset of each sequence block, plus a trailing `m`.
    pub fn sequence_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.manifest.sequence_lengths.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &len in &self.manifest.sequence_lengths {
            acc += len;
            offsets.push(acc);
        }
        offsets
    }

    pub fn layer(&self, index: usize) -> ArrayView2<'_, f32> {
        self.layers[index].view()
    }

    pub fn layers(&self) -> &[Array2<f32>] {
        &self.layers
    }

    pub fn layer_f64(&self, index: usize) -> Array2<f64> {
        self.layers[index].mapv(f64::from)
    }

    /// Selected rows of one layer, upcast to f64.
    pub fn layer_rows_f64(&self, index: usize, rows: &[usize]) -> Array2<f64> {
        let layer = &self.layers[index];
        let d = self.hidden_dim();
        let mut out = Array2::zeros((rows.len(), d));
        for (dst, &r) in out.rows_mut().into_iter().zip(rows) {
            for (o, &v) in dst.into_iter().zip(layer.row(r)) {
                *o = f64::from(v);
            }
        }
        out
    }

    /// SHA-256 over the manifest and every layer's on-disk bytes, hex encoded.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(manifest_json(&self.manifest).as_bytes());
        for layer in &self.layers {
            hasher.update(layer_to_bytes(layer.view()));
        }
        hex::encode(hasher.finalize())
    }
}

fn check_finite(layer: usize, values: ArrayView2<'_, f32>) -> Result<()> {
    for ((row, col), v) in values.indexed_iter() {
        if !v.is_finite() {
            return Err(CastError::NonFiniteData { layer, row, col });
        }
    }
    Ok(())
}

fn manifest_json(manifest: &BundleManifest) -> String {
    let mut s = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    s.push('\n');
    s
}

fn layer_to_bytes(layer: ArrayView2<'_, f32>) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(layer.len() * 4);
    for row in layer.rows() {
        for v in row {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    bytes
}

/// Reads and validates a bundle directory.
pub fn load_bundle(path: impl AsRef<Path>) -> Result<HiddenStateBundle> {
    let dir = path.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => CastError::MissingFile(manifest_path.clone()),
        _ => CastError::io(&manifest_path, e),
    })?;
    let manifest: BundleManifest = serde_json::from_str(&text)
        .map_err(|e| CastError::ManifestInvalid(format!("{}: {e}", manifest_path.display())))?;
    manifest.validate()?;

    let (m, d) = (manifest.num_rows, manifest.hidden_dim);
    let mut layers = Vec::with_capacity(manifest.num_layers);
    for (i, name) in manifest.layer_files.iter().enumerate() {
        let file: PathBuf = dir.join(name);
        let meta = fs::metadata(&file).map_err(|e| match e.kind() {
            ErrorKind::NotFound => CastError::MissingFile(file.clone()),
            _ => CastError::io(&file, e),
        })?;
        if meta.len() != manifest.layer_bytes() {
            return Err(CastError::SizeMismatch {
                path: file,
                expected: manifest.layer_bytes(),
                actual: meta.len(),
            });
        }
        let bytes = fs::read(&file).map_err(|e| CastError::io(&file, e))?;
        if bytes.len() as u64 != manifest.layer_bytes() {
            return Err(CastError::SizeMismatch {
                path: file,
                expected: manifest.layer_bytes(),
                actual: bytes.len() as u64,
            });
        }
        let values: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let layer = Array2::from_shape_vec((m, d), values)
            .map_err(|e| CastError::ShapeMismatch(e.to_string()))?;
        check_finite(i, layer.view())?;
        layers.push(layer);
    }
    Ok(HiddenStateBundle { manifest, layers })
}

/// Writes `bundle` under `path`, creating the directory if needed.
pub fn write_bundle(bundle: &HiddenStateBundle, path: impl AsRef<Path>) -> Result<()> {
    let dir = path.as_ref();
    bundle.manifest.validate()?;
    fs::create_dir_all(dir).map_err(|e| CastError::io(dir, e))?;
    for (name, layer) in bundle.manifest.layer_files.iter().zip(&bundle.layers) {
        let file = dir.join(name);
        fs::write(&file, layer_to_bytes(layer.view())).map_err(|e| CastError::io(&file, e))?;
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, manifest_json(&bundle.manifest))
        .map_err(|e| CastError::io(&manifest_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_bundle() -> HiddenStateBundle {
        let a = Array2::from_shape_fn((6, 4), |(i, j)| (i * 4 + j) as f32 * 0.5);
        let b = Array2::from_shape_fn((6, 4), |(i, j)| (i as f32) - (j as f32) * 1.25);
        HiddenStateBundle::new("toy", vec![a, b], vec![3, 3]).unwrap()
    }

    #[test]
    fn load_small_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let b = small_bundle();
        write_bundle(&b, dir.path()).unwrap();
        for name in &b.manifest().layer_files {
            assert_eq!(fs::metadata(dir.path().join(name)).unwrap().len(), 96);
        }
        let loaded = load_bundle(dir.path()).unwrap();
        assert_eq!(loaded.layer(0).dim(), (6, 4));
        assert_eq!(loaded.layer(1).dim(), (6, 4));
        assert_eq!(loaded, b);
    }

    #[test]
    fn file_bytes_are_little_endian_row_major() {
        let dir = tempfile::tempdir().unwrap();
        let b = small_bundle();
        write_bundle(&b, dir.path()).unwrap();
        let bytes = fs::read(dir.path().join("layer_000.bin")).unwrap();
        // row 1, column 2 -> element 6 -> value 3.0
        let v = f32::from_le_bytes(bytes[24..28].try_into().unwrap());
        assert_eq!(v, 3.0);
    }

    #[test]
    fn truncated_layer_file_is_size_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&small_bundle(), dir.path()).unwrap();
        let f = dir.path().join("layer_001.bin");
        let bytes = fs::read(&f).unwrap();
        fs::write(&f, &bytes[..5 * 4 * 4]).unwrap();
        match load_bundle(dir.path()) {
            Err(CastError::SizeMismatch {
                expected, actual, ..
            }) => {
                assert_eq!(expected, 96);
                assert_eq!(actual, 80);
            }
            other => panic!("expected SizeMismatch, got {other:?}"),
        }
    }

    #[test]
    fn sequence_lengths_must_sum_to_rows() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&small_bundle(), dir.path()).unwrap();
        let p = dir.path().join(MANIFEST_FILE);
        let text = fs::read_to_string(&p)
            .unwrap()
            .replace("\"sequence_lengths\": [\n    3,\n    3\n  ]", "\"sequence_lengths\": [3, 2]");
        fs::write(&p, text).unwrap();
        assert!(matches!(
            load_bundle(dir.path()),
            Err(CastError::ManifestInvalid(_))
        ));
    }

    #[test]
    fn missing_layer_file() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&small_bundle(), dir.path()).unwrap();
        fs::remove_file(dir.path().join("layer_000.bin")).unwrap();
        assert!(matches!(
            load_bundle(dir.path()),
            Err(CastError::MissingFile(p)) if p.ends_with("layer_000.bin")
        ));
    }

    #[test]
    fn missing_manifest() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_bundle(dir.path()),
            Err(CastError::MissingFile(_))
        ));
    }

    #[test]
    fn nan_is_rejected_on_load() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&small_bundle(), dir.path()).unwrap();
        let f = dir.path().join("layer_001.bin");
        let mut bytes = fs::read(&f).unwrap();
        bytes[20..24].copy_from_slice(&f32::NAN.to_le_bytes());
        fs::write(&f, bytes).unwrap();
        assert!(matches!(
            load_bundle(dir.path()),
            Err(CastError::NonFiniteData {
                layer: 1,
                row: 1,
                col: 1
            })
        ));
    }

    #[test]
    fn unwritable_destination_is_io_failure() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("plain_file");
        fs::write(&blocker, b"x").unwrap();
        assert!(matches!(
            write_bundle(&small_bundle(), blocker.join("bundle")),
            Err(CastError::IoFailure { .. })
        ));
    }

    #[test]
    fn single_layer_manifest_rejected() {
        let a = Array2::<f32>::zeros((2, 2));
        assert!(matches!(
            HiddenStateBundle::new("x", vec![a], vec![2]),
            Err(CastError::ManifestInvalid(_))
        ));
    }

    #[test]
    fn offsets_follow_sequence_lengths() {
        let b = small_bundle();
        assert_eq!(b.sequence_offsets(), vec![0, 3, 6]);
    }
}
