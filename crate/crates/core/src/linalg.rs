// SPDX-License-Identifier: Apache-2.0

//! Dense linear algebra: SVD, pseudoinverse and least squares.
//!
//! Matrices are `ndarray` arrays in f64. Decompositions are delegated to
//! `faer` (single-threaded, so results are bit-reproducible) and converted
//! back at the boundary.

use faer::Mat;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CastError, Result};

/// Singular values in descending order, optionally with singular vectors.
///
/// `left` is `rows × p` and `right` is `cols × p` where `p = min(rows, cols)`,
/// so `A = left · diag(singular_values) · rightᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub singular_values: Vec<f64>,
    #[serde(skip)]
    pub left: Option<Array2<f64>>,
    #[serde(skip)]
    pub right: Option<Array2<f64>>,
}

impl Spectrum {
    pub fn from_values(mut singular_values: Vec<f64>) -> Self {
        singular_values.sort_by(|a, b| b.total_cmp(a));
        Spectrum {
            singular_values,
            left: None,
            right: None,
        }
    }

    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    pub fn largest(&self) -> Option<f64> {
        self.singular_values.first().copied()
    }
}

/// Standard numerical-rank cutoff relative to σ₁: `max(rows, cols) · ε`.
pub fn default_rcond(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

pub fn frobenius_norm(a: ArrayView2<'_, f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn ensure_finite(a: ArrayView2<'_, f64>, what: &'static str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(CastError::NonFiniteInput(what))
    }
}

fn to_faer(a: ArrayView2<'_, f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Thin SVD factors kept around for pseudoinverse-style solves.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// rows × p
    pub u: Array2<f64>,
    /// p, descending
    pub s: Array1<f64>,
    /// cols × p
    pub v: Array2<f64>,
}

impl ThinSvd {
    pub fn compute(a: ArrayView2<'_, f64>) -> Result<Self> {
        ensure_finite(a, "svd")?;
        let (r, c) = a.dim();
        let p = r.min(c);
        if p == 0 {
            return Ok(ThinSvd {
                u: Array2::zeros((r, 0)),
                s: Array1::zeros(0),
                v: Array2::zeros((c, 0)),
            });
        }
        let svd = to_faer(a)
            .thin_svd()
            .map_err(|_| CastError::ConvergenceFailure("svd"))?;
        let s_raw = svd.S().column_vector();
        let mut s: Vec<f64> = (0..p).map(|j| s_raw[j].max(0.0)).collect();
        let mut u = from_faer(svd.U());
        let mut v = from_faer(svd.V());

        // Stable descending order; equal values keep their original column order.
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
        if order.iter().enumerate().any(|(k, &i)| k != i) {
            s = order.iter().map(|&i| s[i]).collect();
            u = u.select(Axis(1), &order);
            v = v.select(Axis(1), &order);
        }
        Ok(ThinSvd {
            u,
            s: Array1::from(s),
            v,
        })
    }

    /// Number of leading triplets with σ_j > rcond·σ₁, optionally capped at `keep`.
    pub fn retained(&self, rcond: f64, keep: Option<usize>) -> usize {
        let Some(&s1) = self.s.first() else {
            return 0;
        };
        let cutoff = rcond * s1;
        let n = self.s.iter().take_while(|&&x| x > cutoff && x > 0.0).count();
        keep.map_or(n, |k| n.min(k))
    }

    /// `pinv(A)·B` using the first `rank` triplets.
    pub fn solve(&self, b: ArrayView2<'_, f64>, rank: usize) -> Array2<f64> {
        let u = self.u.slice(ndarray::s![.., ..rank]);
        let v = self.v.slice(ndarray::s![.., ..rank]);
        let mut utb = u.t().dot(&b);
        for (mut row, &s) in utb.rows_mut().into_iter().zip(self.s.iter()) {
            row.mapv_inplace(|x| x / s);
        }
        v.dot(&utb)
    }

    /// Explicit pseudoinverse from the first `rank` triplets.
    pub fn pseudo_inverse(&self, rank: usize) -> Array2<f64> {
        let u = self.u.slice(ndarray::s![.., ..rank]);
        let mut v = self.v.slice(ndarray::s![.., ..rank]).to_owned();
        for (mut col, &s) in v.columns_mut().into_iter().zip(self.s.iter()) {
            col.mapv_inplace(|x| x / s);
        }
        v.dot(&u.t())
    }
}

/// Singular values of `a`, with singular vectors when `want_vectors`.
pub fn svd(a: ArrayView2<'_, f64>, want_vectors: bool) -> Result<Spectrum> {
    if !want_vectors {
        ensure_finite(a, "svd")?;
        if a.is_empty() {
            return Ok(Spectrum::from_values(Vec::new()));
        }
        let values = to_faer(a)
            .singular_values()
            .map_err(|_| CastError::ConvergenceFailure("svd"))?;
        return Ok(Spectrum::from_values(
            values.into_iter().map(|x| x.max(0.0)).collect(),
        ));
    }
    let t = ThinSvd::compute(a)?;
    Ok(Spectrum {
        singular_values: t.s.to_vec(),
        left: Some(t.u),
        right: Some(t.v),
    })
}

/// Moore–Penrose pseudoinverse; singular values `σ_j ≤ rcond·σ₁` are treated as zero.
pub fn pinv(a: ArrayView2<'_, f64>, rcond: f64) -> Result<Array2<f64>> {
    check_rcond(rcond)?;
    let t = ThinSvd::compute(a)?;
    let rank = t.retained(rcond, None);
    Ok(t.pseudo_inverse(rank))
}

/// Minimum-norm least-squares solution `X = pinv(A, rcond)·B`.
pub fn lstsq(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, rcond: f64) -> Result<Array2<f64>> {
    if a.nrows() != b.nrows() {
        return Err(CastError::ShapeMismatch(format!(
            "lstsq: A has {} rows, B has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    check_rcond(rcond)?;
    ensure_finite(b, "lstsq")?;
    let t = ThinSvd::compute(a)?;
    let rank = t.retained(rcond, None);
    Ok(t.solve(b, rank))
}

fn check_rcond(rcond: f64) -> Result<()> {
    if rcond.is_finite() && rcond >= 0.0 {
        Ok(())
    } else {
        Err(CastError::InvalidParams(format!(
            "rcond must be finite and non-negative, got {rcond}"
        )))
    }
}

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with
/// the sign of R's diagonal folded into Q).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Array2<f64> {
    let g = Mat::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.R();
    let mut q = from_faer(qr.compute_thin_Q().as_ref());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).mapv_inplace(|x| -x);
        }
    }
    q
}
