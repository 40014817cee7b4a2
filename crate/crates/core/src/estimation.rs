// SPDX-License-Identifier: Apache-2.0

//! Layer-transition estimation.
//!
//! Representations follow the row-vector convention: a transition maps
//! centered inputs to centered outputs as `H̃_out ≈ H̃_in · T`, and on raw
//! data `h_out ≈ h_in · T + b` with `b = μ_out − Tᵀ μ_in`.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{CastError, Result};
use crate::linalg::{default_rcond, ensure_finite, frobenius_norm, ThinSvd};

/// Column-centered input/output pair with the removed means.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredPair {
    pub input: Array2<f64>,
    pub output: Array2<f64>,
    pub input_mean: Array1<f64>,
    pub output_mean: Array1<f64>,
}

impl CenteredPair {
    pub fn rows(&self) -> usize {
        self.input.nrows()
    }

    pub fn dim(&self) -> usize {
        self.input.ncols()
    }
}

fn center_columns(h: ArrayView2<'_, f64>) -> (Array2<f64>, Array1<f64>) {
    let m = h.nrows() as f64;
    let mean = h.sum_axis(Axis(0)) / m;
    let centered = &h - &mean;
    (centered, mean)
}

/// Subtracts column means from both matrices.
pub fn center(h_in: ArrayView2<'_, f64>, h_out: ArrayView2<'_, f64>) -> Result<CenteredPair> {
    if h_in.dim() != h_out.dim() {
        return Err(CastError::ShapeMismatch(format!(
            "center: input {:?} vs output {:?}",
            h_in.dim(),
            h_out.dim()
        )));
    }
    if h_in.nrows() == 0 {
        return Err(CastError::ShapeMismatch("center: zero rows".into()));
    }
    ensure_finite(h_in, "center")?;
    ensure_finite(h_out, "center")?;
    let (input, input_mean) = center_columns(h_in);
    let (output, output_mean) = center_columns(h_out);
    Ok(CenteredPair {
        input,
        output,
        input_mean,
        output_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Pinv,
    Ridge,
    ElasticNet,
    TruncatedSvd,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Pinv => "pinv",
            EstimatorKind::Ridge => "ridge",
            EstimatorKind::ElasticNet => "elastic_net",
            EstimatorKind::TruncatedSvd => "truncated_svd",
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = CastError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pinv" => Ok(EstimatorKind::Pinv),
            "ridge" => Ok(EstimatorKind::Ridge),
            "elastic_net" | "enet" => Ok(EstimatorKind::ElasticNet),
            "truncated_svd" | "tsvd" => Ok(EstimatorKind::TruncatedSvd),
            other => Err(CastError::InvalidParams(format!("unknown estimator {other:?}"))),
        }
    }
}

/// Estimator with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    Pinv {
        rcond: Option<f64>,
    },
    Ridge {
        lambda: f64,
    },
    ElasticNet {
        l1: f64,
        l2: f64,
        max_iter: usize,
        tol: f64,
    },
    TruncatedSvd {
        /// `None` picks the effective rank of the centered input at 1e−5.
        k: Option<usize>,
        rcond: Option<f64>,
    },
}

pub const DEFAULT_RIDGE_LAMBDA: f64 = 1e-3;
pub const DEFAULT_ENET_L1: f64 = 1e-3;
pub const DEFAULT_ENET_L2: f64 = 1e-3;
pub const DEFAULT_ENET_MAX_ITER: usize = 500;
pub const DEFAULT_ENET_TOL: f64 = 1e-6;
pub const DEFAULT_TSVD_THRESHOLD: f64 = 1e-5;

impl Estimator {
    pub fn default_for(kind: EstimatorKind) -> Self {
        match kind {
            EstimatorKind::Pinv => Estimator::Pinv { rcond: None },
            EstimatorKind::Ridge => Estimator::Ridge {
                lambda: DEFAULT_RIDGE_LAMBDA,
            },
            EstimatorKind::ElasticNet => Estimator::ElasticNet {
                l1: DEFAULT_ENET_L1,
                l2: DEFAULT_ENET_L2,
                max_iter: DEFAULT_ENET_MAX_ITER,
                tol: DEFAULT_ENET_TOL,
            },
            EstimatorKind::TruncatedSvd => Estimator::TruncatedSvd { k: None, rcond: None },
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        match self {
            Estimator::Pinv { .. } => EstimatorKind::Pinv,
            Estimator::Ridge { .. } => EstimatorKind::Ridge,
            Estimator::ElasticNet { .. } => EstimatorKind::ElasticNet,
            Estimator::TruncatedSvd { .. } => EstimatorKind::TruncatedSvd,
        }
    }

    pub fn fit(&self, pair: &CenteredPair) -> Result<TransformEstimate> {
        match *self {
            Estimator::Pinv { rcond } => estimate_pinv(pair, rcond),
            Estimator::Ridge { lambda } => estimate_ridge(pair, lambda),
            Estimator::ElasticNet {
                l1,
                l2,
                max_iter,
                tol,
            } => estimate_elastic_net(pair, l1, l2, max_iter, tol),
            Estimator::TruncatedSvd { k, rcond } => estimate_truncated_svd(pair, k, rcond),
        }
    }
}

/// A fitted transition.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformEstimate {
    /// `d × d`, row convention.
    pub transform: Array2<f64>,
    pub bias: Array1<f64>,
    pub estimator: EstimatorKind,
    pub hyperparams: BTreeMap<String, f64>,
    /// Relative Frobenius residual on the centered data.
    pub fit_residual: f64,
    /// False when an iterative estimator stopped at its iteration cap.
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl TransformEstimate {
    fn build(
        pair: &CenteredPair,
        transform: Array2<f64>,
        estimator: EstimatorKind,
        hyperparams: BTreeMap<String, f64>,
    ) -> Result<Self> {
        ensure_finite(transform.view(), "estimate")?;
        let fit_residual = residual_norm(pair, transform.view())?;
        let bias = &pair.output_mean - &transform.t().dot(&pair.input_mean);
        let mut warnings = Vec::new();
        if pair.rows() < pair.dim() {
            let msg = format!(
                "only {} rows for {} features: the transition is not uniquely determined",
                pair.rows(),
                pair.dim()
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        Ok(TransformEstimate {
            transform,
            bias,
            estimator,
            hyperparams,
            fit_residual,
            converged: true,
            iterations: 0,
            warnings,
        })
    }

    /// `h_in · T + b` for raw (uncentered) rows.
    pub fn predict(&self, h_in: ArrayView2<'_, f64>) -> Array2<f64> {
        h_in.dot(&self.transform) + &self.bias
    }
}

/// Minimum-norm least-squares transition `T = pinv(H̃_in)·H̃_out`.
pub fn estimate_pinv(pair: &CenteredPair, rcond: Option<f64>) -> Result<TransformEstimate> {
    let rcond = rcond.unwrap_or_else(|| default_rcond(pair.rows(), pair.dim()));
    let svd = ThinSvd::compute(pair.input.view())?;
    let rank = svd.retained(rcond, None);
    let t = svd.solve(pair.output.view(), rank);
    let params = BTreeMap::from([("rcond".to_string(), rcond)]);
    TransformEstimate::build(pair, t, EstimatorKind::Pinv, params)
}

/// Ridge transition `(H̃ᵀH̃ + λI)⁻¹ H̃ᵀ Y`, solved as the augmented least-squares
/// problem `[H̃; √λ I] T ≈ [Y; 0]`.
pub fn estimate_ridge(pair: &CenteredPair, lambda: f64) -> Result<TransformEstimate> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(CastError::InvalidParams(format!(
            "ridge lambda must be positive, got {lambda}"
        )));
    }
    let (m, d) = pair.input.dim();
    let mut a = Array2::zeros((m + d, d));
    a.slice_mut(ndarray::s![..m, ..]).assign(&pair.input);
    let root = lambda.sqrt();
    for j in 0..d {
        a[[m + j, j]] = root;
    }
    let mut b = Array2::zeros((m + d, pair.output.ncols()));
    b.slice_mut(ndarray::s![..m, ..]).assign(&pair.output);

    let svd = ThinSvd::compute(a.view())?;
    let rank = svd.retained(default_rcond(m + d, d), None);
    if rank < d {
        return Err(CastError::SolveFailure(format!(
            "augmented ridge system lost rank ({rank} < {d})"
        )));
    }
    let t = svd.solve(b.view(), rank);
    let params = BTreeMap::from([("lambda".to_string(), lambda)]);
    TransformEstimate::build(pair, t, EstimatorKind::Ridge, params)
}

/// Elastic-net objective `½‖Y − XT‖²_F + l1·‖T‖₁ + ½·l2·‖T‖²_F`.
pub fn elastic_net_objective(pair: &CenteredPair, t: ArrayView2<'_, f64>, l1: f64, l2: f64) -> f64 {
    let r = &pair.output - &pair.input.dot(&t);
    let fit = 0.5 * r.iter().map(|x| x * x).sum::<f64>();
    let abs: f64 = t.iter().map(|x| x.abs()).sum();
    let sq: f64 = t.iter().map(|x| x * x).sum();
    fit + l1 * abs + 0.5 * l2 * sq
}

fn soft_threshold(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Elastic-net transition by proximal gradient (ISTA) with constant step
/// `1/(σ_max(H̃_in)² + l2)`, starting from zero.
///
/// Columns of `T` are independent problems; they are iterated jointly since
/// the step size and Gram matrix are shared. Stops once the relative change
/// between iterates falls below `tol`, or after `max_iter` steps with
/// `converged = false`.
pub fn estimate_elastic_net(
    pair: &CenteredPair,
    l1: f64,
    l2: f64,
    max_iter: usize,
    tol: f64,
) -> Result<TransformEstimate> {
    if !(l1 >= 0.0 && l2 >= 0.0 && l1.is_finite() && l2.is_finite() && l1 + l2 > 0.0) {
        return Err(CastError::InvalidParams(format!(
            "elastic net needs l1, l2 >= 0 with l1 + l2 > 0, got l1={l1}, l2={l2}"
        )));
    }
    let gram = pair.input.t().dot(&pair.input);
    let cross = pair.input.t().dot(&pair.output);
    let top = crate::linalg::svd(pair.input.view(), false)?
        .largest()
        .unwrap_or(0.0);
    let lipschitz = top * top + l2;
    let step = 1.0 / lipschitz;
    let threshold = l1 * step;

    let d = pair.dim();
    let mut t = Array2::<f64>::zeros((d, pair.output.ncols()));
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let grad = gram.dot(&t) - &cross + &(&t * l2);
        let mut next = &t - &(grad * step);
        next.mapv_inplace(|x| soft_threshold(x, threshold));
        let change = frobenius_norm((&next - &t).view());
        let scale = frobenius_norm(next.view()).max(f64::MIN_POSITIVE);
        t = next;
        if change <= tol * scale || change == 0.0 {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("elastic net stopped at max_iter={max_iter} before reaching tol={tol}");
    }
    let params = BTreeMap::from([
        ("l1".to_string(), l1),
        ("l2".to_string(), l2),
        ("max_iter".to_string(), max_iter as f64),
        ("tol".to_string(), tol),
    ]);
    let mut est = TransformEstimate::build(pair, t, EstimatorKind::ElasticNet, params)?;
    est.converged = converged;
    est.iterations = iterations;
    Ok(est)
}

/// Rank-`k` pseudoinverse transition built from the top-`k` singular
/// triplets of `H̃_in`.
pub fn estimate_truncated_svd(
    pair: &CenteredPair,
    k: Option<usize>,
    rcond: Option<f64>,
) -> Result<TransformEstimate> {
    let d = pair.dim();
    let rcond = rcond.unwrap_or_else(|| default_rcond(pair.rows(), d));
    let svd = ThinSvd::compute(pair.input.view())?;
    let k = match k {
        Some(k) => k,
        None => {
            let s1 = svd.s.first().copied().unwrap_or(0.0);
            svd.s
                .iter()
                .filter(|&&x| x > DEFAULT_TSVD_THRESHOLD * s1)
                .count()
                .max(1)
        }
    };
    if k == 0 || k > d {
        return Err(CastError::InvalidK { k, max: d });
    }
    let rank = svd.retained(rcond, Some(k));
    let t = svd.solve(pair.output.view(), rank);
    let params = BTreeMap::from([("k".to_string(), k as f64), ("rcond".to_string(), rcond)]);
    TransformEstimate::build(pair, t, EstimatorKind::TruncatedSvd, params)
}

/// `‖H̃_out − H̃_in·T‖_F / ‖H̃_out‖_F` on the centered pair.
pub fn residual_norm(pair: &CenteredPair, t: ArrayView2<'_, f64>) -> Result<f64> {
    relative_residual(pair.input.view(), pair.output.view(), t, None)
}

/// Residual on raw data, `‖H_out − (H_in·T + 1bᵀ)‖_F / ‖H_out‖_F`.
pub fn residual_norm_uncentered(
    h_in: ArrayView2<'_, f64>,
    h_out: ArrayView2<'_, f64>,
    t: ArrayView2<'_, f64>,
    bias: ArrayView1<'_, f64>,
) -> Result<f64> {
    relative_residual(h_in, h_out, t, Some(bias))
}

fn relative_residual(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    t: ArrayView2<'_, f64>,
    bias: Option<ArrayView1<'_, f64>>,
) -> Result<f64> {
    if x.ncols() != t.nrows() || y.ncols() != t.ncols() || x.nrows() != y.nrows() {
        return Err(CastError::ShapeMismatch(format!(
            "residual: X {:?}, T {:?}, Y {:?}",
            x.dim(),
            t.dim(),
            y.dim()
        )));
    }
    let denom = frobenius_norm(y);
    if denom == 0.0 {
        return Err(CastError::ZeroDenominator);
    }
    let mut r = &y - &x.dot(&t);
    if let Some(b) = bias {
        r -= &b;
    }
    Ok(frobenius_norm(r.view()) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian(m: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = crate::rng::seeded(seed);
        Array2::from_shape_simple_fn((m, d), || rng.sample(StandardNormal))
    }

    #[test]
    fn identical_rows_center_to_zero() {
        let h = Array2::from_shape_fn((5, 3), |(_, j)| j as f64 + 0.5);
        let p = center(h.view(), h.view()).unwrap();
        assert!(p.input.iter().all(|&x| x == 0.0));
        assert_eq!(p.input_mean, array![0.5, 1.5, 2.5]);
    }

    #[test]
    fn already_centered_is_untouched() {
        let h = array![[1.0, -1.0], [-1.0, 1.0]];
        let p = center(h.view(), h.view()).unwrap();
        assert_eq!(p.input_mean, array![0.0, 0.0]);
        assert_eq!(p.input, h);
    }

    #[test]
    fn centered_columns_sum_to_zero() {
        let h = gaussian(100, 8, 3) + 4.0;
        let p = center(h.view(), h.view()).unwrap();
        for s in p.input.sum_axis(Axis(0)) {
            assert!(s.abs() <= 1e-10, "column sum {s}");
        }
    }

    #[test]
    fn center_shape_mismatch() {
        let a = Array2::<f64>::zeros((4, 3));
        let b = Array2::<f64>::zeros((4, 2));
        assert!(matches!(
            center(a.view(), b.view()),
            Err(CastError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn identity_transition() {
        let h = gaussian(60, 6, 1);
        let p = center(h.view(), h.view()).unwrap();
        let e = estimate_pinv(&p, None).unwrap();
        let err = frobenius_norm((&e.transform - &Array2::<f64>::eye(6)).view());
        assert!(err < 1e-8);
        assert!(e.fit_residual < 1e-8);
    }

    #[test]
    fn rank_deficient_input_gives_minimum_norm_solution() {
        // Column 2 duplicates column 0, so T and T + n·zᵀ fit equally well
        // for any z when n spans the null space.
        let mut x = gaussian(30, 3, 8);
        let c0 = x.column(0).to_owned();
        x.column_mut(2).assign(&c0);
        let t_true = array![[1.0, 0.5], [0.0, 2.0], [0.0, 0.0]];
        let y = x.dot(&t_true);
        // Pad output to square so center() accepts the pair.
        let y3 = ndarray::concatenate![Axis(1), y, Array2::<f64>::zeros((30, 1))];
        let p = center(x.view(), y3.view()).unwrap();
        let e = estimate_pinv(&p, None).unwrap();
        assert!(e.fit_residual < 1e-10);

        let null = array![1.0, 0.0, -1.0];
        let mut alt = e.transform.clone();
        for mut col in alt.columns_mut() {
            col.scaled_add(0.3, &null);
        }
        assert!(residual_norm(&p, alt.view()).unwrap() < 1e-10);
        assert!(frobenius_norm(e.transform.view()) <= frobenius_norm(alt.view()));
        // The minimum-norm solution is orthogonal to the null direction.
        for col in e.transform.columns() {
            assert!(col.dot(&null).abs() < 1e-10);
        }
    }

    #[test]
    fn ridge_limits() {
        let x = gaussian(80, 5, 2);
        let y = gaussian(80, 5, 3);
        let p = center(x.view(), y.view()).unwrap();
        let pinv = estimate_pinv(&p, None).unwrap();
        let tiny = estimate_ridge(&p, 1e-12).unwrap();
        let diff = frobenius_norm((&tiny.transform - &pinv.transform).view());
        assert!(diff < 1e-6 * frobenius_norm(pinv.transform.view()));

        let huge = estimate_ridge(&p, 1e9).unwrap();
        assert!(
            frobenius_norm(huge.transform.view()) < 1e-6 * frobenius_norm(pinv.transform.view())
        );
        assert!(tiny.fit_residual >= pinv.fit_residual - 1e-12);
        assert!(huge.fit_residual >= pinv.fit_residual);
    }

    #[test]
    fn ridge_rejects_nonpositive_lambda() {
        let x = gaussian(10, 2, 2);
        let p = center(x.view(), x.view()).unwrap();
        assert!(estimate_ridge(&p, 0.0).is_err());
    }

    #[test]
    fn elastic_net_without_l1_is_ridge() {
        let x = gaussian(50, 4, 5);
        let y = gaussian(50, 4, 6);
        let p = center(x.view(), y.view()).unwrap();
        let ridge = estimate_ridge(&p, 0.5).unwrap();
        let enet = estimate_elastic_net(&p, 0.0, 0.5, 20_000, 1e-13).unwrap();
        assert!(enet.converged);
        let diff = frobenius_norm((&enet.transform - &ridge.transform).view());
        assert!(diff < 1e-5 * frobenius_norm(ridge.transform.view()));
    }

    #[test]
    fn elastic_net_large_l1_kills_everything() {
        let x = gaussian(40, 4, 7);
        let y = gaussian(40, 4, 8);
        let p = center(x.view(), y.view()).unwrap();
        let e = estimate_elastic_net(&p, 1e6, 0.0, 100, 1e-8).unwrap();
        assert!(e.transform.iter().all(|&v| v == 0.0));
        assert!((e.fit_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn elastic_net_objective_never_increases() {
        let x = gaussian(30, 4, 9);
        let y = gaussian(30, 4, 10);
        let p = center(x.view(), y.view()).unwrap();
        let mut last = f64::INFINITY;
        for iters in 1..40 {
            let e = estimate_elastic_net(&p, 0.5, 0.1, iters, 0.0).unwrap();
            let obj = elastic_net_objective(&p, e.transform.view(), 0.5, 0.1);
            assert!(obj <= last + 1e-12, "objective rose at {iters}: {obj} > {last}");
            last = obj;
        }
    }

    #[test]
    fn elastic_net_flags_nonconvergence() {
        let x = gaussian(30, 4, 9);
        let y = gaussian(30, 4, 10);
        let p = center(x.view(), y.view()).unwrap();
        let e = estimate_elastic_net(&p, 0.01, 0.01, 2, 1e-15).unwrap();
        assert!(!e.converged);
        assert_eq!(e.iterations, 2);
    }

    #[test]
    fn truncated_svd_matches_pinv_at_full_rank_and_degrades_below() {
        let x = gaussian(60, 5, 11);
        let y = gaussian(60, 5, 12);
        let p = center(x.view(), y.view()).unwrap();
        let pinv = estimate_pinv(&p, None).unwrap();
        let full = estimate_truncated_svd(&p, Some(5), None).unwrap();
        let diff = frobenius_norm((&full.transform - &pinv.transform).view());
        assert!(diff < 1e-8);
        let mut last = f64::INFINITY;
        for k in 1..=5 {
            let e = estimate_truncated_svd(&p, Some(k), None).unwrap();
            assert!(e.fit_residual <= last + 1e-12);
            last = e.fit_residual;
        }
        assert!(matches!(
            estimate_truncated_svd(&p, Some(0), None),
            Err(CastError::InvalidK { .. })
        ));
        assert!(matches!(
            estimate_truncated_svd(&p, Some(6), None),
            Err(CastError::InvalidK { .. })
        ));
    }

    #[test]
    fn residual_of_zero_map_is_one() {
        let x = gaussian(20, 3, 13);
        let y = gaussian(20, 3, 14);
        let p = center(x.view(), y.view()).unwrap();
        let r = residual_norm(&p, Array2::<f64>::zeros((3, 3)).view()).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn residual_zero_denominator() {
        let x = gaussian(20, 3, 13);
        let y = Array2::from_elem((20, 3), 2.0);
        let p = center(x.view(), y.view()).unwrap();
        assert!(matches!(
            residual_norm(&p, Array2::<f64>::eye(3).view()),
            Err(CastError::ZeroDenominator)
        ));
    }

    #[test]
    fn bias_reconstructs_uncentered_data() {
        let x = gaussian(40, 4, 15) + 3.0;
        let y = gaussian(40, 4, 16) - 1.0;
        let p = center(x.view(), y.view()).unwrap();
        let e = estimate_pinv(&p, None).unwrap();
        let raw = e.predict(x.view());
        let via_centered = p.input.dot(&e.transform) + &p.output_mean;
        for (a, b) in raw.iter().zip(via_centered.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        let r_raw = residual_norm_uncentered(x.view(), y.view(), e.transform.view(), e.bias.view())
            .unwrap();
        assert!(r_raw.is_finite() && r_raw > 0.0);
    }

    #[test]
    fn constant_shift_changes_only_bias() {
        let x = gaussian(50, 4, 17);
        let y = gaussian(50, 4, 18);
        let shift = array![1.0, -2.0, 3.0, 0.5];
        let p0 = center(x.view(), y.view()).unwrap();
        let p1 = center((&x + &shift).view(), (&y + &shift).view()).unwrap();
        let e0 = estimate_pinv(&p0, None).unwrap();
        let e1 = estimate_pinv(&p1, None).unwrap();
        assert!(frobenius_norm((&e0.transform - &e1.transform).view()) < 1e-8);
        assert!((&e0.bias - &e1.bias).iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn underdetermined_input_warns() {
        let x = gaussian(3, 5, 19);
        let y = gaussian(3, 5, 20);
        let p = center(x.view(), y.view()).unwrap();
        let e = estimate_pinv(&p, None).unwrap();
        assert_eq!(e.warnings.len(), 1);
    }

    #[test]
    fn estimator_names_round_trip() {
        for kind in [
            EstimatorKind::Pinv,
            EstimatorKind::Ridge,
            EstimatorKind::ElasticNet,
            EstimatorKind::TruncatedSvd,
        ] {
            assert_eq!(kind.as_str().parse::<EstimatorKind>().unwrap(), kind);
        }
    }
}
