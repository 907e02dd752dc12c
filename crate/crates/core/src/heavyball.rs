//! Two-step feedback `u_k = K₁x_k + K₂x_{k−1}` shaped as heavy-ball descent.
//!
//! The closed loop `x⁺ = (A + BK₁)x + BK₂x₋` is designed to coincide with
//! `x⁺ = x − 2ΓPx + Δ(x − x₋)`, i.e. a gradient step plus momentum. In the
//! augmented state `X = [x; x₋]` that is
//!
//! ```text
//! X⁺ = [ I − 2ΓP + Δ   −Δ ] X,
//!      [ I              0 ]
//! ```
//!
//! and `V̄ = xᵀPx + μ x₋ᵀPx₋` contracts at rate λ when
//!
//! ```text
//! [ λY     0     Mᵀ   √μY ]
//! [ 0      λμY   −Wᵀ  0   ]
//! [ M      −W    Y    0   ]  ⪰ 0,    M = Y − 2Γ + W,
//! [ √μY    0     0    Y   ]
//! ```
//!
//! with `Y = P⁻¹` and `W = ΔY`. The gains follow from `AY + BF₁ = M` and
//! `BF₂ = −W`, where `F₁ = K₁Y`, `F₂ = K₂Y`.
//!
//! The delay weight μ defaults to 1. With μ = 1 the top-left block of the
//! condition reads `(λ − 1)P − TᵀPT ⪰ 0` for `T = I − 2ΓP + Δ`, so no
//! design exists for λ < 1 and λ = 1 forces `T = 0`. Any μ < λ removes
//! that obstruction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gd::{self, GammaMode, GammaSpec};
use crate::linalg::{factor_pd, inverse_spd, min_sym_eigenvalue, solve_linear, spectral_radius, Matrix};
use crate::sdp::{self, AffineMatrix, LmiProblem, SdpStatus};
use crate::system::SystemModel;

/// Default contraction rate for heavy-ball synthesis.
pub const DEFAULT_HB_LAMBDA: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavyBallDesign {
    #[serde(rename = "Gamma")]
    pub gamma: Matrix,
    #[serde(rename = "P")]
    pub p: Matrix,
    #[serde(rename = "Delta")]
    pub delta: Matrix,
    #[serde(rename = "K1")]
    pub k1: Matrix,
    #[serde(rename = "K2")]
    pub k2: Matrix,
    #[serde(rename = "Y")]
    pub y: Matrix,
    #[serde(rename = "F1")]
    pub f1: Matrix,
    #[serde(rename = "F2")]
    pub f2: Matrix,
    #[serde(rename = "W")]
    pub w: Matrix,
    pub lambda: f64,
    pub delay_weight: f64,
    pub margin: f64,
}

impl HeavyBallDesign {
    /// ‖AY + BF₁ − (Y − 2Γ + W)‖_∞ (largest entry).
    pub fn momentum_step_residual(&self, system: &SystemModel) -> f64 {
        let lhs = &(system.a() * &self.y) + &(system.b() * &self.f1);
        let rhs = &(&self.y - &self.gamma.scale(2.0)) + &self.w;
        (&lhs - &rhs).max_abs()
    }

    /// ‖BF₂ + W‖_∞ (largest entry).
    pub fn momentum_residual(&self, system: &SystemModel) -> f64 {
        (&(system.b() * &self.f2) + &self.w).max_abs()
    }

    /// `[[A + BK₁, BK₂], [I, 0]]`.
    pub fn augmented_closed_loop(&self, system: &SystemModel) -> Result<Matrix> {
        augmented_closed_loop(system, &self.k1, &self.k2)
    }

    /// `[[I − 2ΓP + Δ, −Δ], [I, 0]]`.
    pub fn augmented_gradient_map(&self) -> Result<Matrix> {
        augmented_matrix(&self.gamma, &self.p, &self.delta)
    }

    /// Largest entry of the difference between the two augmented forms.
    pub fn augmented_residual(&self, system: &SystemModel) -> Result<f64> {
        Ok((&self.augmented_closed_loop(system)? - &self.augmented_gradient_map()?).max_abs())
    }

    pub fn spectral_radius(&self, system: &SystemModel) -> Result<f64> {
        spectral_radius(&self.augmented_closed_loop(system)?)
    }

    /// `diag(P, μP)`, the weight of `V̄`.
    pub fn augmented_value(&self) -> Matrix {
        augmented_weight(&self.p, self.delay_weight)
    }
}

/// `[[I − 2ΓP + Δ, −Δ], [I, 0]]`.
pub fn augmented_matrix(gamma: &Matrix, p: &Matrix, delta: &Matrix) -> Result<Matrix> {
    let n = p.rows();
    if gamma.shape() != (n, n) || p.shape() != (n, n) || delta.shape() != (n, n) {
        return Err(Error::Dimension("Γ, P and Δ must all be n×n".into()));
    }
    let i = Matrix::identity(n);
    let top_left = &(&i - &(gamma * p).scale(2.0)) + delta;
    let top_right = delta.scale(-1.0);
    Ok(Matrix::block(&[vec![Some(&top_left), Some(&top_right)], vec![Some(&i), None]]))
}

/// `[[A + BK₁, BK₂], [I, 0]]`.
pub fn augmented_closed_loop(system: &SystemModel, k1: &Matrix, k2: &Matrix) -> Result<Matrix> {
    let top_left = system.closed_loop(k1)?;
    let top_right = &system.closed_loop(k2)? - system.a();
    let i = Matrix::identity(system.states());
    Ok(Matrix::block(&[vec![Some(&top_left), Some(&top_right)], vec![Some(&i), None]]))
}

fn augmented_weight(p: &Matrix, mu: f64) -> Matrix {
    let q = p.scale(mu);
    Matrix::block(&[vec![Some(p), None], vec![None, Some(&q)]])
}

#[derive(Debug, Clone)]
pub struct HbContractivityReport {
    /// Smallest eigenvalue of the 4n×4n block matrix.
    pub lmi_margin: f64,
    /// Smallest eigenvalue of `λ diag(P, μP) − Nᵀ diag(P, μP) N`,
    /// N the augmented map with `P = Y⁻¹`, `Δ = WY⁻¹`.
    pub direct_margin: f64,
}

impl HbContractivityReport {
    pub fn lmi_holds(&self) -> bool {
        self.lmi_margin >= 0.0
    }

    pub fn direct_holds(&self) -> bool {
        self.direct_margin >= 0.0
    }
}

fn hb_block(y: &AffineMatrix, gamma: &AffineMatrix, w: &AffineMatrix, lambda: f64, mu: f64) -> AffineMatrix {
    let m = y.sub(&gamma.scale(2.0)).add(w);
    let mt = m.transpose();
    let neg_w = w.scale(-1.0);
    let neg_wt = neg_w.transpose();
    let ly = y.scale(lambda);
    let lmy = y.scale(lambda * mu);
    let ry = y.scale(mu.sqrt());
    AffineMatrix::block(&[
        vec![Some(&ly), None, Some(&mt), Some(&ry)],
        vec![None, Some(&lmy), Some(&neg_wt), None],
        vec![Some(&m), Some(&neg_w), Some(y), None],
        vec![Some(&ry), None, None, Some(y)],
    ])
}

/// Evaluates both forms of the augmented λ-contractivity condition with
/// equal weights on the current and delayed state.
pub fn check_hb_contractivity(y: &Matrix, gamma: &Matrix, w: &Matrix, lambda: f64) -> Result<HbContractivityReport> {
    check_hb_contractivity_weighted(y, gamma, w, lambda, 1.0)
}

/// As [`check_hb_contractivity`] with delay weight `mu`.
pub fn check_hb_contractivity_weighted(
    y: &Matrix,
    gamma: &Matrix,
    w: &Matrix,
    lambda: f64,
    mu: f64,
) -> Result<HbContractivityReport> {
    gd::check_rate(lambda)?;
    check_delay_weight(mu)?;
    let n = y.rows();
    if y.shape() != (n, n) || gamma.shape() != (n, n) || w.shape() != (n, n) {
        return Err(Error::Dimension("Y, Γ and W must all be n×n".into()));
    }
    if !factor_pd(y)?.is_pd() {
        return Err(Error::Precondition("Y must be positive definite".into()));
    }
    let lmi = hb_block(
        &AffineMatrix::constant(y.clone(), 0),
        &AffineMatrix::constant(gamma.clone(), 0),
        &AffineMatrix::constant(w.clone(), 0),
        lambda,
        mu,
    )
    .evaluate(&[]);
    let p = inverse_spd(y)?;
    let delta = solve_linear(&y.transpose(), &w.transpose())?.transpose();
    let nmap = augmented_matrix(gamma, &p, &delta)?;
    let pp = augmented_weight(&p, mu);
    let direct = &pp.scale(lambda) - &(&(&nmap.transpose() * &pp) * &nmap);
    Ok(HbContractivityReport {
        lmi_margin: min_sym_eigenvalue(&lmi),
        direct_margin: min_sym_eigenvalue(&direct),
    })
}

fn check_delay_weight(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("delay weight μ = {mu} must be positive")))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HbOptions {
    /// Constrain W = 0 and F₂ = 0, which reduces to static gradient descent.
    pub without_momentum: bool,
    /// μ in `V̄ = xᵀPx + μ x₋ᵀPx₋`.
    pub delay_weight: f64,
}

impl Default for HbOptions {
    fn default() -> Self {
        Self {
            without_momentum: false,
            delay_weight: 1.0,
        }
    }
}

struct HbLayout {
    y: AffineMatrix,
    f1: AffineMatrix,
    f2: AffineMatrix,
    w: AffineMatrix,
    gamma: AffineMatrix,
    scale: Option<usize>,
}

fn hb_problem(system: &SystemModel, lambda: f64, spec: &GammaSpec, options: HbOptions) -> (LmiProblem, HbLayout) {
    let n = system.states();
    let m = system.inputs();
    let ny = n * (n + 1) / 2;
    let ng = gd::gamma_unknowns(&spec.mode, n);
    let with_scale = matches!(spec.mode, GammaMode::Fixed { .. });
    let dim = ny + 2 * m * n + n * n + ng + usize::from(with_scale);
    let scale = with_scale.then_some(dim - 1);

    let y = AffineMatrix::symmetric_variable(n, 0, dim);
    let f1 = AffineMatrix::full_variable(m, n, ny, dim);
    let f2 = AffineMatrix::full_variable(m, n, ny + m * n, dim);
    let w = AffineMatrix::full_variable(n, n, ny + 2 * m * n, dim);
    let gamma = gd::gamma_affine(&spec.mode, n, ny + 2 * m * n + n * n, scale, dim);

    let mut problem = LmiProblem::new(dim);
    problem.add_block(hb_block(&y, &gamma, &w, lambda, options.delay_weight).into_block("augmented-contractivity"));
    gd::add_gamma_blocks(&mut problem, &gamma, spec);

    // A Y + B F₁ − (Y − 2Γ + W) = 0
    y.left_mul(system.a())
        .add(&f1.left_mul(system.b()))
        .sub(&y)
        .add(&gamma.scale(2.0))
        .sub(&w)
        .constrain_zero(&mut problem);
    // B F₂ + W = 0
    f2.left_mul(system.b()).add(&w).constrain_zero(&mut problem);
    if options.without_momentum {
        w.constrain_zero(&mut problem);
        f2.constrain_zero(&mut problem);
    }
    gd::add_trace_normalization(&mut problem, &y);
    (
        problem,
        HbLayout {
            y,
            f1,
            f2,
            w,
            gamma,
            scale,
        },
    )
}

/// Designs `(Γ, P, Δ, K₁, K₂)` for the two-step policy.
pub fn synthesize_hb(system: &SystemModel, lambda: f64, spec: &GammaSpec) -> Result<HeavyBallDesign> {
    synthesize_hb_with(system, lambda, spec, HbOptions::default())
}

pub fn synthesize_hb_with(
    system: &SystemModel,
    lambda: f64,
    spec: &GammaSpec,
    options: HbOptions,
) -> Result<HeavyBallDesign> {
    gd::check_rate(lambda)?;
    check_delay_weight(options.delay_weight)?;
    spec.validate(system.states())?;
    if !system.is_stabilizable() {
        return Err(Error::Precondition("(A, B) is not stabilizable".into()));
    }
    let (problem, layout) = hb_problem(system, lambda, spec, options);
    let sol = sdp::solve_feasibility(&problem, sdp::DEFAULT_STRICTNESS)?;
    // the augmented condition is non-strict
    if !matches!(sol.status, SdpStatus::Feasible | SdpStatus::Marginal) {
        return Err(Error::Infeasible {
            margin: sol.margin,
            block: sol.active_block,
        });
    }
    let s = layout.scale.map_or(1.0, |i| sol.z[i]);
    if !(s > 0.0) {
        return Err(Error::NumericalFailure {
            reason: format!("scale variable ended at {s:.3e}"),
            log: Vec::new(),
        });
    }
    let at = |a: &AffineMatrix| a.evaluate(&sol.z).scale(1.0 / s);
    let y = at(&layout.y).sym_part();
    let (f1, f2, w, gamma) = (at(&layout.f1), at(&layout.f2), at(&layout.w), at(&layout.gamma));
    let yt = y.transpose();
    let k1 = solve_linear(&yt, &f1.transpose())?.transpose();
    let k2 = solve_linear(&yt, &f2.transpose())?.transpose();
    let delta = solve_linear(&yt, &w.transpose())?.transpose();
    let p = inverse_spd(&y)?;
    Ok(HeavyBallDesign {
        gamma,
        p,
        delta,
        k1,
        k2,
        y,
        f1,
        f2,
        w,
        lambda,
        delay_weight: options.delay_weight,
        margin: sol.margin / s,
    })
}
