//! Infinite-horizon LQR and its gradient-descent reading.
//!
//! The optimal closed loop `A + B K̄` can be written as `I − 2 Γ̄ P̄` with
//! `Γ̄ = ½ (I − (A + B K̄)) P̄⁻¹`, so every LQR controller is a
//! trajectory-oriented gradient step on its own value function.
//!
//! ```
//! use gdtraj::lqr::{solve_dare, lqr_gain, LqrWeights};
//! use gdtraj::{Matrix, SystemModel};
//!
//! let sys = SystemModel::new(Matrix::from_diag(&[0.5]), Matrix::identity(1))?;
//! let w = LqrWeights::new(Matrix::identity(1), Matrix::identity(1))?;
//! let p = solve_dare(&sys, &w)?.p;
//! assert!((p[(0, 0)] - (0.25 + 4.0625f64.sqrt()) / 2.0).abs() < 1e-9);
//! let k = lqr_gain(&sys, &p, w.r())?;
//! assert!((k[(0, 0)] + 0.2656).abs() < 1e-4);
//! # Ok::<(), gdtraj::Error>(())
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gd::GdDesign;
use crate::linalg::{factor_pd, inverse_spd, min_sym_eigenvalue, solve_linear, spectral_radius, Matrix};
use crate::system::SystemModel;

pub const DARE_TOL: f64 = 1e-12;
pub const DARE_MAX_ITER: usize = 100_000;

/// State and input weights of `Σ xᵀQx + uᵀRu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights", into = "RawWeights")]
pub struct LqrWeights {
    q: Matrix,
    r: Matrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    #[serde(rename = "Q")]
    q: Matrix,
    #[serde(rename = "R")]
    r: Matrix,
}

impl TryFrom<RawWeights> for LqrWeights {
    type Error = Error;

    fn try_from(raw: RawWeights) -> Result<Self> {
        LqrWeights::new(raw.q, raw.r)
    }
}

impl From<LqrWeights> for RawWeights {
    fn from(w: LqrWeights) -> Self {
        RawWeights { q: w.q, r: w.r }
    }
}

impl LqrWeights {
    pub fn new(q: Matrix, r: Matrix) -> Result<Self> {
        if !q.is_square() || !r.is_square() {
            return Err(Error::Dimension("Q and R must be square".into()));
        }
        q.check_symmetric(q.default_sym_tol())?;
        r.check_symmetric(r.default_sym_tol())?;
        let q_min = min_sym_eigenvalue(&q);
        if q_min < -1e-10 {
            return Err(Error::Precondition(format!(
                "Q must be positive semidefinite (smallest eigenvalue {q_min:.3e})"
            )));
        }
        factor_pd(&r)?.into_result()?;
        Ok(Self { q, r })
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    fn check_against(&self, system: &SystemModel) -> Result<()> {
        if self.q.rows() != system.states() || self.r.rows() != system.inputs() {
            return Err(Error::Dimension(format!(
                "weights are {}x{} / {}x{} but the system has n = {}, m = {}",
                self.q.rows(),
                self.q.cols(),
                self.r.rows(),
                self.r.cols(),
                system.states(),
                system.inputs()
            )));
        }
        Ok(())
    }
}

/// Riccati solution from value iteration.
#[derive(Debug, Clone)]
pub struct DareSolution {
    pub p: Matrix,
    pub iterations: usize,
    /// Last step size ‖P_{t+1} − P_t‖_∞ (largest entry).
    pub last_step: f64,
}

/// Value iteration `P ← Q + AᵀPA − AᵀPB (R + BᵀPB)⁻¹ BᵀPA` from `P = Q`.
pub fn solve_dare(system: &SystemModel, weights: &LqrWeights) -> Result<DareSolution> {
    weights.check_against(system)?;
    if !system.is_stabilizable() {
        return Err(Error::Precondition("(A, B) is not stabilizable".into()));
    }
    let a = system.a();
    let b = system.b();
    let at = a.transpose();
    let bt = b.transpose();
    let mut p = weights.q.clone();
    let mut last_step = f64::INFINITY;
    for it in 1..=DARE_MAX_ITER {
        let pa = &p * a;
        let pb = &p * b;
        let gram = weights.r() + &(&bt * &pb);
        let bpa = &bt * &pa;
        let correction = &pb * &solve_linear(&gram, &bpa)?;
        let next = (&(weights.q() + &(&at * &pa)) - &(&at * &correction)).sym_part();
        if !next.is_finite() {
            return Err(Error::NonFinite);
        }
        last_step = (&next - &p).max_abs();
        let done = last_step <= DARE_TOL * p.max_abs();
        p = next;
        if done {
            return Ok(DareSolution {
                p,
                iterations: it,
                last_step,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "Riccati value iteration",
        iterations: DARE_MAX_ITER,
        residual: last_step,
    })
}

/// `K̄ = −(R + BᵀP̄B)⁻¹ BᵀP̄A`, for the policy `u = K̄x`.
pub fn lqr_gain(system: &SystemModel, p: &Matrix, r: &Matrix) -> Result<Matrix> {
    let bt = system.b().transpose();
    let gram = r + &(&(&bt * p) * system.b());
    let rhs = &(&bt * p) * system.a();
    Ok(solve_linear(&gram, &rhs)?.scale(-1.0))
}

/// ‖P − (Q + KᵀRK + (A+BK)ᵀP(A+BK))‖_∞ (largest entry).
pub fn riccati_residual(system: &SystemModel, weights: &LqrWeights, p: &Matrix, k: &Matrix) -> Result<f64> {
    let acl = system.closed_loop(k)?;
    let rhs = &(weights.q() + &(&(&k.transpose() * weights.r()) * k)) + &(&(&acl.transpose() * p) * &acl);
    Ok((p - &rhs).max_abs())
}

/// `Γ̄ = ½ (I − (A + BK̄)) P̄⁻¹`; checks `I − 2Γ̄P̄ = A + BK̄` to 1e-9.
pub fn gamma_of_lqr(system: &SystemModel, k: &Matrix, p: &Matrix) -> Result<Matrix> {
    let acl = system.closed_loop(k)?;
    let rho = spectral_radius(&acl)?;
    if rho >= 1.0 {
        return Err(Error::Precondition(format!(
            "closed loop is not stable (spectral radius {rho:.6})"
        )));
    }
    let n = acl.rows();
    let step = &Matrix::identity(n) - &acl;
    let gamma = (&step * &inverse_spd(p)?).scale(0.5);
    let back = &Matrix::identity(n) - &(&gamma * p).scale(2.0);
    let err = (&back - &acl).max_abs();
    if err > 1e-9 * (1.0 + acl.max_abs()) {
        return Err(Error::NumericalFailure {
            reason: format!("Γ̄ reconstruction error {err:.3e}"),
            log: Vec::new(),
        });
    }
    Ok(gamma)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LqrDesign {
    pub weights: LqrWeights,
    #[serde(rename = "P_bar")]
    pub p: Matrix,
    #[serde(rename = "K_bar")]
    pub k: Matrix,
    #[serde(rename = "Gamma_bar")]
    pub gamma: Matrix,
    pub iterations: usize,
    pub residual: f64,
}

/// DARE, optimal gain and Γ̄ in one call.
pub fn design_lqr(system: &SystemModel, weights: &LqrWeights) -> Result<LqrDesign> {
    let dare = solve_dare(system, weights)?;
    let k = lqr_gain(system, &dare.p, weights.r())?;
    let gamma = gamma_of_lqr(system, &k, &dare.p)?;
    let residual = riccati_residual(system, weights, &dare.p, &k)?;
    Ok(LqrDesign {
        weights: weights.clone(),
        p: dare.p,
        k,
        gamma,
        iterations: dare.iterations,
        residual,
    })
}

/// Solves `S = M + Aᵀ S A` for a Schur-stable `A` by squaring:
/// `S ← S + AₜᵀSAₜ`, `Aₜ ← Aₜ²`, which sums the series `Σ (Aᵀ)ᵗ M Aᵗ`.
pub fn lyapunov_sum(a: &Matrix, m: &Matrix) -> Result<Matrix> {
    let rho = spectral_radius(a)?;
    if rho >= 1.0 {
        return Err(Error::Precondition(format!(
            "Lyapunov sum diverges (spectral radius {rho:.6})"
        )));
    }
    let mut s = m.sym_part();
    let mut at = a.clone();
    for _ in 0..64 {
        let term = &(&at.transpose() * &s) * &at;
        let next = (&s + &term).sym_part();
        let step = term.max_abs();
        s = next;
        if step <= DARE_TOL * s.max_abs() || step == 0.0 {
            return Ok(s);
        }
        at = &at * &at;
    }
    Err(Error::NoConvergence {
        what: "Lyapunov doubling",
        iterations: 64,
        residual: f64::NAN,
    })
}

/// Cost matrix `S` with `J(x₀) = x₀ᵀ S x₀` for the policy `u = Kx`.
pub fn cost_matrix(system: &SystemModel, k: &Matrix, weights: &LqrWeights) -> Result<Matrix> {
    weights.check_against(system)?;
    let acl = system.closed_loop(k)?;
    let stage = weights.q() + &(&(&k.transpose() * weights.r()) * k);
    lyapunov_sum(&acl, &stage).map_err(|e| match e {
        Error::Precondition(_) => Error::Precondition("gain is not stabilizing; the cost diverges".into()),
        other => other,
    })
}

/// `Σ xₜᵀQxₜ + uₜᵀRuₜ` along `x⁺ = (A + BK)x` from `x0`.
pub fn closed_loop_cost(system: &SystemModel, k: &Matrix, weights: &LqrWeights, x0: &[f64]) -> Result<f64> {
    if x0.len() != system.states() {
        return Err(Error::Dimension(format!(
            "initial state has length {}, expected {}",
            x0.len(),
            system.states()
        )));
    }
    Ok(cost_matrix(system, k, weights)?.quad_form(x0))
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub lqr_gain: Matrix,
    /// ‖K − K̄‖_∞ (largest entry).
    pub gain_distance: f64,
    /// ‖(A + BK) − (A + BK̄)‖_∞ (largest entry).
    pub closed_loop_distance: f64,
}

/// Compares a design's gain with the LQR gain for the given weights.
pub fn lqr_equivalence_check(system: &SystemModel, design: &GdDesign, weights: &LqrWeights) -> Result<EquivalenceReport> {
    let dare = solve_dare(system, weights)?;
    let k_bar = lqr_gain(system, &dare.p, weights.r())?;
    let gain_distance = (&design.k - &k_bar).max_abs();
    let closed_loop_distance = (&system.closed_loop(&design.k)? - &system.closed_loop(&k_bar)?).max_abs();
    Ok(EquivalenceReport {
        lqr_gain: k_bar,
        gain_distance,
        closed_loop_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steering() -> SystemModel {
        SystemModel::new(
            Matrix::from_rows(&[[1.0, 0.2], [0.0, 1.0]]).unwrap(),
            Matrix::from_rows(&[[0.06], [0.2]]).unwrap(),
        )
        .unwrap()
    }

    fn steering_weights() -> LqrWeights {
        LqrWeights::new(Matrix::identity(2), Matrix::from_diag(&[10.0])).unwrap()
    }

    fn scalar() -> (SystemModel, LqrWeights) {
        (
            SystemModel::new(Matrix::from_diag(&[0.5]), Matrix::identity(1)).unwrap(),
            LqrWeights::new(Matrix::identity(1), Matrix::identity(1)).unwrap(),
        )
    }

    #[test]
    fn zero_dynamics_gives_q() {
        let sys = SystemModel::new(Matrix::zeros(2, 2), Matrix::from_rows(&[[1.0], [0.0]]).unwrap()).unwrap();
        let w = LqrWeights::new(Matrix::from_diag(&[2.0, 3.0]), Matrix::identity(1)).unwrap();
        let d = solve_dare(&sys, &w).unwrap();
        assert_eq!(d.p, *w.q());
        assert_eq!(lqr_gain(&sys, &d.p, w.r()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn scalar_closed_form() {
        let (sys, w) = scalar();
        let p = solve_dare(&sys, &w).unwrap().p[(0, 0)];
        // positive root of p² − 0.25p − 1 = 0
        let root = (0.25 + (0.0625f64 + 4.0).sqrt()) / 2.0;
        assert!((p - root).abs() < 1e-10);
        let k = lqr_gain(&sys, &Matrix::from_diag(&[p]), w.r()).unwrap()[(0, 0)];
        assert!((k + p * 0.5 / (1.0 + p)).abs() < 1e-12);
        assert!((k + 0.2656).abs() < 1e-4);
        let g = gamma_of_lqr(&sys, &Matrix::from_diag(&[k]), &Matrix::from_diag(&[p])).unwrap()[(0, 0)];
        assert!((g - 0.5 * (1.0 - (0.5 + k)) / p).abs() < 1e-12);
        assert!((g - 0.3380).abs() < 1e-4);
    }

    #[test]
    fn steering_golden() {
        let d = design_lqr(&steering(), &steering_weights()).unwrap();
        let p_ref = Matrix::from_rows(&[[13.08, 13.30], [13.30, 37.63]]).unwrap();
        assert!((&d.p - &p_ref).max_abs() <= 0.01, "{:?}", d.p);
        let k_ref = Matrix::from_rows(&[[-0.29, -0.76]]).unwrap();
        assert!((&d.k - &k_ref).max_abs() <= 0.01, "{:?}", d.k);
        assert!(d.residual <= 1e-8 * d.p.norm_inf());
    }

    #[test]
    fn gamma_bar_doubled_matches_printed_matrix() {
        let sys = steering();
        let d = design_lqr(&sys, &steering_weights()).unwrap();
        let acl = sys.closed_loop(&d.k).unwrap();
        let back = &Matrix::identity(2) - &(&d.gamma * &d.p).scale(2.0);
        assert!((&back - &acl).max_abs() <= 1e-9);
        let printed = Matrix::from_rows(&[[0.0085, -0.0071], [0.00052, 0.0038]]).unwrap();
        assert!((&d.gamma.scale(2.0) - &printed).max_abs() <= 5e-4, "{:?}", d.gamma);
    }

    #[test]
    fn deadbeat_gamma() {
        let sys = SystemModel::new(Matrix::identity(2), Matrix::identity(2)).unwrap();
        let g = gamma_of_lqr(&sys, &Matrix::identity(2).scale(-1.0), &Matrix::identity(2)).unwrap();
        assert!((&g - &Matrix::identity(2).scale(0.5)).max_abs() < 1e-15);
    }

    #[test]
    fn steering_costs() {
        let sys = steering();
        let w = steering_weights();
        let x0 = [-1.0, -0.3];
        let d = design_lqr(&sys, &w).unwrap();
        let j_bar = closed_loop_cost(&sys, &d.k, &w, &x0).unwrap();
        assert!((j_bar - 24.45).abs() <= 0.02, "{j_bar}");
        assert!((j_bar - d.p.quad_form(&x0)).abs() <= 1e-8 * j_bar);
        let k_gd = Matrix::from_rows(&[[-0.23, -0.69]]).unwrap();
        let j_gd = closed_loop_cost(&sys, &k_gd, &w, &x0).unwrap();
        assert!((j_gd - 24.99).abs() <= 0.3, "{j_gd}");
    }

    #[test]
    fn zero_gain_on_zero_dynamics_costs_one_stage() {
        let sys = SystemModel::new(Matrix::zeros(2, 2), Matrix::zeros(2, 1)).unwrap();
        let w = LqrWeights::new(Matrix::from_diag(&[2.0, 5.0]), Matrix::identity(1)).unwrap();
        let j = closed_loop_cost(&sys, &Matrix::zeros(1, 2), &w, &[1.0, 2.0]).unwrap();
        assert_eq!(j, 22.0);
    }

    #[test]
    fn unstable_gain_is_rejected() {
        let sys = steering();
        assert!(matches!(
            closed_loop_cost(&sys, &Matrix::zeros(1, 2), &steering_weights(), &[1.0, 0.0]),
            Err(Error::Precondition(_))
        ));
        assert!(gamma_of_lqr(&sys, &Matrix::zeros(1, 2), &Matrix::identity(2)).is_err());
    }

    #[test]
    fn lyapunov_sum_matches_direct_series() {
        let a = Matrix::from_rows(&[[0.5, 0.3], [-0.2, 0.4]]).unwrap();
        let m = Matrix::from_diag(&[1.0, 2.0]);
        let s = lyapunov_sum(&a, &m).unwrap();
        let mut direct = Matrix::zeros(2, 2);
        let mut at = Matrix::identity(2);
        for _ in 0..400 {
            direct = &direct + &(&(&at.transpose() * &m) * &at);
            at = &at * &a;
        }
        assert!((&s - &direct).max_abs() < 1e-12);
    }

    #[test]
    fn weights_validation() {
        assert!(LqrWeights::new(Matrix::from_diag(&[-1.0]), Matrix::identity(1)).is_err());
        assert!(LqrWeights::new(Matrix::identity(1), Matrix::zeros(1, 1)).is_err());
        assert!(LqrWeights::new(Matrix::identity(1), Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap()).is_err());
    }

    #[test]
    fn equivalence_of_lqr_design_with_itself() {
        let sys = steering();
        let w = steering_weights();
        let d = design_lqr(&sys, &w).unwrap();
        let gd = GdDesign::from_gain(&sys, &d.k, &d.p, 1.0).unwrap();
        let rep = lqr_equivalence_check(&sys, &gd, &w).unwrap();
        assert!(rep.gain_distance <= 1e-6 && rep.closed_loop_distance <= 1e-6);
    }
}
