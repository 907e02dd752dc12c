mod common;

use common::*;
use gdtraj::linalg::{min_sym_eigenvalue, Matrix};
use gdtraj::sdp::{check_solution, solve_feasibility, LmiBlock, LmiProblem, SdpStatus};
use rand::Rng;

struct Planted {
    problem: LmiProblem,
    z_star: Vec<f64>,
}

/// Problem built around a known point `z*`: one random block whose value at
/// `z*` is a chosen SPD matrix, a box block `|zᵢ| ≤ 10`, and one equality
/// through `z*`.
fn planted(rng: &mut impl Rng, scale: f64) -> Planted {
    let d = rng.gen_range(1..=4);
    let k = rng.gen_range(2..=4);
    let z_star = random_vector(rng, d);
    let coefficients: Vec<Matrix> = (0..d).map(|_| random_symmetric(rng, k, 1.0)).collect();
    let target = random_spd(rng, k, 0.05);
    let mut constant = target.clone();
    for (zi, fi) in z_star.iter().zip(&coefficients) {
        constant = &constant - &fi.scale(*zi);
    }
    let mut problem = LmiProblem::new(d);
    problem.add_block(LmiBlock::new(
        "planted",
        constant.scale(scale),
        coefficients.iter().map(|f| f.scale(scale)).collect(),
    ));
    let box_const = Matrix::identity(2 * d).scale(10.0 * scale);
    let box_coeffs = (0..d)
        .map(|i| {
            let mut c = Matrix::zeros(2 * d, 2 * d);
            c[(2 * i, 2 * i)] = -scale;
            c[(2 * i + 1, 2 * i + 1)] = scale;
            c
        })
        .collect();
    problem.add_block(LmiBlock::new("box", box_const, box_coeffs));
    if d > 1 {
        let row = random_vector(rng, d);
        let rhs = row.iter().zip(&z_star).map(|(a, b)| a * b).sum();
        problem.add_equality(&row, rhs);
    }
    Planted { problem, z_star }
}

#[test]
fn solver_margin_dominates_planted_point() {
    let mut rng = rng(10);
    for _ in 0..60 {
        let Planted { problem, z_star } = planted(&mut rng, 1.0);
        let at_star = check_solution(&problem, &z_star).unwrap();
        let sol = solve_feasibility(&problem, 1e-8).unwrap();
        assert!(sol.margin >= at_star.margin - 1e-9, "{} < {}", sol.margin, at_star.margin);
        assert!(sol.margin <= sol.margin_upper_bound + 1e-9);
        assert_eq!(sol.status, SdpStatus::Feasible);
    }
}

#[test]
fn feasible_solutions_survive_independent_check() {
    let mut rng = rng(11);
    for _ in 0..60 {
        let Planted { problem, .. } = planted(&mut rng, 1.0);
        let sol = solve_feasibility(&problem, 1e-8).unwrap();
        let report = check_solution(&problem, &sol.z).unwrap();
        assert!(report.margin > 0.0 && report.equality_residual <= 1e-8);
        assert!((report.margin - sol.margin).abs() <= 1e-6);
        let direct = problem
            .blocks
            .iter()
            .map(|b| min_sym_eigenvalue(&b.evaluate(&sol.z)))
            .fold(f64::INFINITY, f64::min);
        assert!((direct - sol.margin).abs() <= 1e-9 * direct.abs().max(1.0));
    }
}

#[test]
fn margin_history_is_non_decreasing() {
    let mut rng = rng(12);
    for _ in 0..40 {
        let Planted { problem, .. } = planted(&mut rng, 1.0);
        let sol = solve_feasibility(&problem, 1e-8).unwrap();
        assert!(!sol.history.is_empty());
        assert!(sol.history.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn scaling_the_blocks_scales_the_margin() {
    for seed in 0..30 {
        let base = planted(&mut rng(100 + seed), 1.0);
        let base_sol = solve_feasibility(&base.problem, 1e-8).unwrap();
        for c in [0.1, 7.0] {
            let scaled = planted(&mut rng(100 + seed), c);
            let sol = solve_feasibility(&scaled.problem, 1e-8).unwrap();
            assert_eq!(sol.status, base_sol.status);
            assert!(
                (sol.margin - c * base_sol.margin).abs() <= 1e-6 * (c * base_sol.margin).abs(),
                "c = {c}: {} vs {}",
                sol.margin,
                c * base_sol.margin
            );
        }
    }
}

#[test]
fn problems_round_trip_through_json() {
    let Planted { problem, .. } = planted(&mut rng(13), 1.0);
    let text = serde_json::to_string(&problem).unwrap();
    let back: LmiProblem = serde_json::from_str(&text).unwrap();
    assert_eq!(back, problem);
}
