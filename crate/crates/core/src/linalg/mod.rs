//! Dense real matrix kernel sized for small control problems (n ≤ 16).

mod decomp;
mod eigen;
mod matrix;

pub use decomp::{
    affine_solution_set, factor_pd, factor_pd_tol, inverse, inverse_spd, rank, singular_values,
    solve_linear, AffineSolutionSet, PdFactor,
};
pub use eigen::{
    eigenvalues, min_sym_eigenvalue, spectral_radius, sym_eig, sym_eigenvalues, EigenResult,
    QR_ITERATION_CAP,
};
pub use matrix::Matrix;
