#![allow(dead_code)]

use gdtraj::{Matrix, SystemModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-scale..scale)).collect())
}

pub fn random_symmetric(rng: &mut impl Rng, n: usize, scale: f64) -> Matrix {
    random_matrix(rng, n, n, scale).sym_part()
}

/// `M Mᵀ + shift·I`.
pub fn random_spd(rng: &mut impl Rng, n: usize, shift: f64) -> Matrix {
    let m = random_matrix(rng, n, n, 1.0);
    &(&m * &m.transpose()) + &Matrix::identity(n).scale(shift)
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v = random_vector(rng, n);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Random stabilizable system with n ≤ max_n, m ≤ max_m.
pub fn random_system(rng: &mut impl Rng, max_n: usize, max_m: usize) -> SystemModel {
    loop {
        let n = rng.gen_range(1..=max_n);
        let m = rng.gen_range(1..=max_m.min(n));
        let a = random_matrix(rng, n, n, 1.2);
        let b = random_matrix(rng, n, m, 1.0);
        let sys = SystemModel::new(a, b).unwrap();
        if sys.is_stabilizable() {
            return sys;
        }
    }
}

pub fn steering() -> SystemModel {
    SystemModel::new(
        Matrix::from_rows(&[[1.0, 0.2], [0.0, 1.0]]).unwrap(),
        Matrix::from_rows(&[[0.06], [0.2]]).unwrap(),
    )
    .unwrap()
}
