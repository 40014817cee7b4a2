// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use cast_core::{generate_synthetic, HiddenStateBundle, SyntheticSpec};
use ndarray::Array2;

/// A noisy synthetic bundle with `layers` layers of `rows × dim`.
pub fn fixture(layers: usize, rows: usize, dim: usize) -> HiddenStateBundle {
    let spec = SyntheticSpec::uniform(layers, dim, rows, dim / 2, 0.05, 0.1, 7);
    generate_synthetic(&spec).expect("valid fixture spec").0
}

pub fn layer(bundle: &HiddenStateBundle, index: usize) -> Array2<f64> {
    bundle.layer_f64(index)
}
