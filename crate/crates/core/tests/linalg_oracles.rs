// SPDX-License-Identifier: Apache-2.0

mod common;

use cast_core::linalg::{default_rcond, lstsq, pinv, random_orthogonal, svd, ThinSvd};
use cast_core::rng::seeded;
use common::{fro, gaussian, low_rank, oracle_singular_values, rel_diff};
use ndarray::Array2;

#[test]
fn singular_values_match_jacobi_oracle() {
    for (m, n, seed) in [(30, 12, 1), (12, 30, 2), (25, 25, 3)] {
        let a = gaussian(m, n, seed);
        let got = svd(a.view(), false).unwrap().singular_values;
        let want = oracle_singular_values(a.view());
        assert_eq!(got.len(), m.min(n));
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9 * want[0], "{g} vs {w}");
        }
    }
}

#[test]
fn thin_svd_reconstructs() {
    let a = gaussian(40, 15, 4);
    let s = ThinSvd::compute(a.view()).unwrap();
    let us = &s.u * &s.s;
    let back = us.dot(&s.v.t());
    assert!(rel_diff(back.view(), a.view()) < 1e-12);
    let utu = s.u.t().dot(&s.u);
    assert!(rel_diff(utu.view(), Array2::eye(15).view()) < 1e-12);
}

#[test]
fn pinv_satisfies_penrose_conditions() {
    let a = low_rank(40, 20, 10, 5);
    let p = pinv(a.view(), 1e-10).unwrap();
    let scale = fro(a.view()) * fro(p.view());
    // A A⁺ A = A, A⁺ A A⁺ = A⁺, and both products symmetric.
    assert!(rel_diff(a.dot(&p).dot(&a).view(), a.view()) < 1e-10);
    assert!(rel_diff(p.dot(&a).dot(&p).view(), p.view()) < 1e-10);
    let ap = a.dot(&p);
    let pa = p.dot(&a);
    assert!(fro((&ap - &ap.t()).view()) < 1e-10 * scale);
    assert!(fro((&pa - &pa.t()).view()) < 1e-10 * scale);
}

#[test]
fn lstsq_beats_random_alternatives() {
    let a = gaussian(50, 8, 6);
    let b = gaussian(50, 3, 7);
    let x = lstsq(a.view(), b.view(), default_rcond(50, 8)).unwrap();
    let best = fro((&b - &a.dot(&x)).view());
    for k in 0..100 {
        let perturbed = &x + &(gaussian(8, 3, 100 + k) * 0.05);
        let r = fro((&b - &a.dot(&perturbed)).view());
        assert!(r >= best - 1e-12);
    }
    // Normal equations hold.
    let grad = a.t().dot(&(&b - &a.dot(&x)));
    assert!(fro(grad.view()) < 1e-10 * fro(a.view()) * fro(b.view()));
}

#[test]
fn lstsq_minimum_norm_on_rank_deficient() {
    let a = low_rank(30, 10, 4, 8);
    let b = gaussian(30, 2, 9);
    let x = lstsq(a.view(), b.view(), 1e-10).unwrap();
    let s = ThinSvd::compute(a.view()).unwrap();
    // The minimum-norm solution has no component in the null space of A.
    let null = s.v.slice(ndarray::s![.., 4..]);
    assert!(fro(null.t().dot(&x).view()) < 1e-10 * fro(x.view()));
}

#[test]
fn random_orthogonal_is_orthogonal() {
    let mut rng = seeded(10);
    let q = random_orthogonal(16, &mut rng);
    let qtq = q.t().dot(&q);
    assert!(rel_diff(qtq.view(), Array2::eye(16).view()) < 1e-12);
    let sv = svd(q.view(), false).unwrap().singular_values;
    assert!(sv.iter().all(|s| (s - 1.0).abs() < 1e-12));
}
