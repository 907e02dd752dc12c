mod common;

use common::*;
use gdtraj::linalg::{factor_pd, solve_linear, spectral_radius, sym_eig, singular_values};
use gdtraj::Matrix;
use num_complex::Complex64;
use rand::Rng;

#[test]
fn symmetric_eigendecomposition_reconstructs() {
    let mut rng = rng(1);
    for _ in 0..300 {
        let n = rng.gen_range(1..=6);
        let m = random_symmetric(&mut rng, n, 5.0);
        let eig = sym_eig(&m, 1e-12).unwrap();
        let v = eig.vectors.as_ref().unwrap();
        let lambda = Matrix::from_diag(&eig.real_values());
        let rebuilt = &(v * &lambda) * &v.transpose();
        assert!((&rebuilt - &m).norm_fro() <= 1e-9 * m.norm_fro().max(1.0));
        let orth = &(&v.transpose() * v) - &Matrix::identity(n);
        assert!(orth.max_abs() < 1e-12);
        assert!(eig.real_values().windows(2).all(|w| w[0] <= w[1]));
    }
}

fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    // λ² + bλ + c
    let disc = Complex64::new(b * b - 4.0 * c, 0.0).sqrt();
    [(-b + disc) / 2.0, (-b - disc) / 2.0]
}

fn cubic_roots(a2: f64, a1: f64, a0: f64) -> [Complex64; 3] {
    // Cardano for λ³ + a2λ² + a1λ + a0 via the depressed cubic t³ + pt + q.
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2.powi(3) / 27.0 - a2 * a1 / 3.0 + a0;
    let shift = Complex64::new(-a2 / 3.0, 0.0);
    let disc = Complex64::new(q * q / 4.0 + p.powi(3) / 27.0, 0.0).sqrt();
    let mut u = (Complex64::new(-q / 2.0, 0.0) + disc).cbrt();
    if u.norm() < 1e-14 {
        u = (Complex64::new(-q / 2.0, 0.0) - disc).cbrt();
    }
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    for (k, r) in roots.iter_mut().enumerate() {
        let uk = u * omega.powu(k as u32);
        let vk = if uk.norm() < 1e-300 { Complex64::new(0.0, 0.0) } else { -p / (3.0 * uk) };
        *r = uk + vk + shift;
    }
    roots
}

#[test]
fn spectral_radius_matches_closed_form_roots() {
    let mut rng = rng(2);
    for _ in 0..500 {
        let m = random_matrix(&mut rng, 2, 2, 3.0);
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let expected = quadratic_roots(-m.trace(), det).iter().map(|r| r.norm()).fold(0.0, f64::max);
        assert!((spectral_radius(&m).unwrap() - expected).abs() <= 1e-6 * expected.max(1.0));
    }
    for _ in 0..500 {
        let m = random_matrix(&mut rng, 3, 3, 3.0);
        let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)]
            - m[(0, 2)] * m[(2, 0)]
            + m[(1, 1)] * m[(2, 2)]
            - m[(1, 2)] * m[(2, 1)];
        let det = m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);
        let expected = cubic_roots(-m.trace(), minors, -det).iter().map(|r| r.norm()).fold(0.0, f64::max);
        assert!((spectral_radius(&m).unwrap() - expected).abs() <= 1e-6 * expected.max(1.0));
    }
}

#[test]
fn cholesky_agrees_with_eigenvalue_sign() {
    let mut rng = rng(3);
    let mut pd_seen = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=5);
        let base = random_symmetric(&mut rng, n, 1.0);
        let shift = rng.gen_range(-0.5..2.5);
        let m = &base + &Matrix::identity(n).scale(shift);
        let min_eig = sym_eig(&m, 1e-12).unwrap().real_values()[0];
        if min_eig.abs() < 1e-10 {
            continue;
        }
        let factor = factor_pd(&m).unwrap();
        assert_eq!(factor.is_pd(), min_eig > 0.0, "min eigenvalue {min_eig}");
        if let Ok(l) = factor.into_result() {
            pd_seen += 1;
            assert!((&(&l * &l.transpose()) - &m).max_abs() < 1e-12 * m.max_abs().max(1.0));
        }
    }
    assert!(pd_seen > 100 && pd_seen < 900);
}

#[test]
fn linear_solve_recovers_known_solution() {
    let mut rng = rng(4);
    let mut tested = 0;
    while tested < 300 {
        let n = rng.gen_range(1..=8);
        let m = random_matrix(&mut rng, n, n, 1.0);
        let sv = singular_values(&m);
        let cond = sv[0] / sv[sv.len() - 1];
        if !(cond < 1e6) {
            continue;
        }
        tested += 1;
        let k = rng.gen_range(1..=3);
        let x0 = random_matrix(&mut rng, n, k, 1.0);
        let x = solve_linear(&m, &(&m * &x0)).unwrap();
        assert!((&x - &x0).norm_fro() <= 1e-8 * x0.norm_fro());
    }
}
