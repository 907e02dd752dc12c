//! Static state feedback shaped as gradient descent.
//!
//! A design is a triplet `(Γ, P, K)` with `A + B K = I − 2 Γ P`, so the closed
//! loop moves each state against the gradient `2 P x` of `V = xᵀ P x`,
//! weighted by the direction matrix `Γ`. Synthesis works in the variables
//! `Y = P⁻¹`, `F = K Y`, where the design conditions become
//!
//! ```text
//! [ λY        (Y − 2Γ)ᵀ ]
//! [ Y − 2Γ    Y         ]  ≻ 0,        A Y + B F = Y − 2Γ.
//! ```
//!
//! Scaling `(Y, F, Γ)` by `c > 0` leaves `K` unchanged, so synthesis fixes
//! the scale with `trace(Y) = n` and maximizes the smallest eigenvalue over
//! all constraint blocks. A bound `U` is read at that scale. A fixed Γ is
//! only fixed up to scale while solving; the result is mapped back so that
//! the returned Γ is the given one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues, factor_pd, inverse_spd, min_sym_eigenvalue, solve_linear, spectral_radius, Matrix,
};
use crate::sdp::{self, AffineMatrix, LmiProblem, SdpStatus};
use crate::system::SystemModel;

/// How the direction matrix Γ enters the synthesis problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GammaMode {
    /// Γ = γ I with γ a decision variable.
    Scalar,
    /// Γ given.
    Fixed { value: Matrix },
    /// Γ an unstructured decision variable.
    Free,
    /// Free Γ with sym(Γ) ⪯ U.
    Bounded { bound: Matrix },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSpec {
    pub mode: GammaMode,
    /// ε_Γ in sym(Γ) ⪰ ε_Γ I; the strictness margin applies on top.
    pub pd_floor: f64,
}

impl GammaSpec {
    pub fn scalar() -> Self {
        Self::with_mode(GammaMode::Scalar)
    }

    pub fn free() -> Self {
        Self::with_mode(GammaMode::Free)
    }

    pub fn fixed(value: Matrix) -> Self {
        Self::with_mode(GammaMode::Fixed { value })
    }

    pub fn bounded(bound: Matrix) -> Self {
        Self::with_mode(GammaMode::Bounded { bound })
    }

    pub fn with_mode(mode: GammaMode) -> Self {
        Self { mode, pd_floor: 0.0 }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match &self.mode {
            GammaMode::Bounded { bound } => {
                if bound.shape() != (n, n) {
                    return Err(Error::Dimension(format!("Γ bound must be {n}x{n}")));
                }
                bound.check_symmetric(bound.default_sym_tol())?;
            }
            GammaMode::Fixed { value } => {
                if value.shape() != (n, n) {
                    return Err(Error::Dimension(format!("fixed Γ must be {n}x{n}")));
                }
                let eig = eigenvalues(value)?;
                if eig.values.iter().any(|v| v.re <= 0.0) {
                    return Err(Error::Precondition(
                        "fixed Γ must have eigenvalues with positive real parts".into(),
                    ));
                }
            }
            GammaMode::Scalar | GammaMode::Free => {}
        }
        if !(self.pd_floor >= 0.0 && self.pd_floor.is_finite()) {
            return Err(Error::Precondition("Γ floor must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Position of each unknown inside the decision vector.
///
/// With a scale variable `s`, the fixed Γ enters as `s Γ`; a solution maps
/// back to the original problem by dividing by `s`.
#[derive(Debug, Clone)]
pub struct SynthesisLayout {
    pub n: usize,
    pub m: usize,
    pub y: AffineMatrix,
    pub f: AffineMatrix,
    pub gamma: AffineMatrix,
    /// Index of the scale variable, if present.
    pub scale: Option<usize>,
    pub dim: usize,
    mode: GammaMode,
}

impl SynthesisLayout {
    pub fn new(n: usize, m: usize, mode: &GammaMode, with_scale: bool) -> Self {
        let ny = n * (n + 1) / 2;
        let nf = m * n;
        let ng = gamma_unknowns(mode, n);
        let scale = with_scale.then_some(ny + nf + ng);
        let dim = ny + nf + ng + usize::from(with_scale);
        let y = AffineMatrix::symmetric_variable(n, 0, dim);
        let f = AffineMatrix::full_variable(m, n, ny, dim);
        let gamma = gamma_affine(mode, n, ny + nf, scale, dim);
        Self {
            n,
            m,
            y,
            f,
            gamma,
            scale,
            dim,
            mode: mode.clone(),
        }
    }

    /// Packs (Y, F, Γ) into a decision vector with unit scale. Γ is ignored
    /// in fixed mode; in scalar mode γ is read from Γ's mean diagonal.
    pub fn encode(&self, y: &Matrix, f: &Matrix, gamma: &Matrix) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.dim);
        for i in 0..self.n {
            for j in i..self.n {
                z.push(0.5 * (y[(i, j)] + y[(j, i)]));
            }
        }
        z.extend_from_slice(f.as_slice());
        match self.mode {
            GammaMode::Scalar => z.push(gamma.trace() / self.n as f64),
            GammaMode::Fixed { .. } => {}
            GammaMode::Free | GammaMode::Bounded { .. } => z.extend_from_slice(gamma.as_slice()),
        }
        if self.scale.is_some() {
            z.push(1.0);
        }
        z
    }

    /// Unpacks (Y, F, Γ, s); `s = 1` without a scale variable.
    pub fn decode(&self, z: &[f64]) -> (Matrix, Matrix, Matrix, f64) {
        (
            self.y.evaluate(z).sym_part(),
            self.f.evaluate(z),
            self.gamma.evaluate(z),
            self.scale.map_or(1.0, |s| z[s]),
        )
    }
}

pub(crate) fn gamma_unknowns(mode: &GammaMode, n: usize) -> usize {
    match mode {
        GammaMode::Scalar => 1,
        GammaMode::Fixed { .. } => 0,
        GammaMode::Free | GammaMode::Bounded { .. } => n * n,
    }
}

/// Γ as an affine map of the unknowns starting at `offset`.
pub(crate) fn gamma_affine(mode: &GammaMode, n: usize, offset: usize, scale: Option<usize>, dim: usize) -> AffineMatrix {
    match mode {
        GammaMode::Scalar => AffineMatrix::scalar_identity(n, offset, dim),
        GammaMode::Fixed { value } => match scale {
            Some(s) => AffineMatrix::scalar_identity(n, s, dim).left_mul(value),
            None => AffineMatrix::constant(value.clone(), dim),
        },
        GammaMode::Free | GammaMode::Bounded { .. } => AffineMatrix::full_variable(n, n, offset, dim),
    }
}

/// Adds `sym(Γ) ⪰ ε_Γ I` and, in bounded mode, `U − sym(Γ) ⪰ 0`.
pub(crate) fn add_gamma_blocks(problem: &mut LmiProblem, gamma: &AffineMatrix, spec: &GammaSpec) {
    let n = gamma.shape().0;
    if !matches!(spec.mode, GammaMode::Fixed { .. }) {
        let floor = gamma.sym_part().add_constant(&Matrix::identity(n).scale(-spec.pd_floor));
        problem.add_block(floor.into_block("gamma-floor"));
    }
    if let GammaMode::Bounded { bound } = &spec.mode {
        let room = gamma.sym_part().scale(-1.0).add_constant(bound);
        problem.add_block(room.into_block("gamma-bound"));
    }
}

pub(crate) fn add_trace_normalization(problem: &mut LmiProblem, y: &AffineMatrix) {
    let trace_row: Vec<f64> = y.coefficients.iter().map(Matrix::trace).collect();
    problem.add_equality(&trace_row, y.shape().0 as f64);
}

/// The contractivity block `[[λY, (Y − 2Γ)ᵀ], [Y − 2Γ, Y]]` as an affine map.
fn contractivity_block(y: &AffineMatrix, gamma: &AffineMatrix, lambda: f64) -> AffineMatrix {
    let step = y.sub(&gamma.scale(2.0));
    let step_t = step.transpose();
    let ly = y.scale(lambda);
    AffineMatrix::block(&[vec![Some(&ly), Some(&step_t)], vec![Some(&step), Some(y)]])
}

/// Builds the synthesis problem.
///
/// With `normalize`, the problem carries `trace(Y) = n`, and a fixed Γ gets
/// a scale variable. Without it, the problem is the literal one, suitable
/// for checking a given design.
pub fn synthesis_problem(
    system: &SystemModel,
    lambda: f64,
    spec: &GammaSpec,
    normalize: bool,
) -> (LmiProblem, SynthesisLayout) {
    let n = system.states();
    let m = system.inputs();
    let with_scale = normalize && matches!(spec.mode, GammaMode::Fixed { .. });
    let layout = SynthesisLayout::new(n, m, &spec.mode, with_scale);
    let mut problem = LmiProblem::new(layout.dim);

    problem.add_block(contractivity_block(&layout.y, &layout.gamma, lambda).into_block("contractivity"));
    add_gamma_blocks(&mut problem, &layout.gamma, spec);

    // A Y + B F − (Y − 2Γ) = 0
    let residual = layout
        .y
        .left_mul(system.a())
        .add(&layout.f.left_mul(system.b()))
        .sub(&layout.y)
        .add(&layout.gamma.scale(2.0));
    residual.constrain_zero(&mut problem);

    if normalize {
        add_trace_normalization(&mut problem, &layout.y);
    }
    (problem, layout)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdDesign {
    #[serde(rename = "Gamma")]
    pub gamma: Matrix,
    #[serde(rename = "P")]
    pub p: Matrix,
    #[serde(rename = "K")]
    pub k: Matrix,
    #[serde(rename = "Y")]
    pub y: Matrix,
    #[serde(rename = "F")]
    pub f: Matrix,
    pub lambda: f64,
    pub margin: f64,
}

impl GdDesign {
    /// A + B K for this design's gain.
    pub fn closed_loop(&self, system: &SystemModel) -> Result<Matrix> {
        system.closed_loop(&self.k)
    }

    /// I − 2ΓP.
    pub fn gradient_step_matrix(&self) -> Matrix {
        let n = self.p.rows();
        &Matrix::identity(n) - &(&self.gamma * &self.p).scale(2.0)
    }

    /// ‖(A + BK) − (I − 2ΓP)‖_∞ (largest entry).
    pub fn closed_loop_residual(&self, system: &SystemModel) -> Result<f64> {
        Ok((&self.closed_loop(system)? - &self.gradient_step_matrix()).max_abs())
    }

    /// ‖A Y + B F − (Y − 2Γ)‖_∞ (largest entry).
    pub fn equality_residual(&self, system: &SystemModel) -> f64 {
        let lhs = &(system.a() * &self.y) + &(system.b() * &self.f);
        let rhs = &self.y - &self.gamma.scale(2.0);
        (&lhs - &rhs).max_abs()
    }

    pub fn spectral_radius_with(&self, system: &SystemModel) -> Result<f64> {
        spectral_radius(&self.closed_loop(system)?)
    }

    /// ρ(I − 2ΓP), which equals ρ(A + BK) for a consistent design.
    pub fn spectral_radius(&self) -> Result<f64> {
        spectral_radius(&self.gradient_step_matrix())
    }

    /// Representative of the design's scaling class with `trace(Y) = n`.
    /// K and the closed loop are unchanged.
    pub fn canonicalize(&self) -> GdDesign {
        let n = self.y.rows() as f64;
        let c = n / self.y.trace();
        GdDesign {
            gamma: self.gamma.scale(c),
            p: self.p.scale(1.0 / c),
            k: self.k.clone(),
            y: self.y.scale(c),
            f: self.f.scale(c),
            lambda: self.lambda,
            margin: self.margin * c,
        }
    }

    /// Builds a design from any stabilizing gain and value matrix.
    pub fn from_gain(system: &SystemModel, k: &Matrix, p: &Matrix, lambda: f64) -> Result<GdDesign> {
        let inv = inverse_parameterize(system, k, p)?;
        let y = inverse_spd(p)?;
        let f = k * &y;
        let margin = check_contractivity(&y, &inv.gamma, lambda)?.margin;
        Ok(GdDesign {
            gamma: inv.gamma,
            p: p.clone(),
            k: k.clone(),
            y,
            f,
            lambda,
            margin,
        })
    }
}

/// Result of evaluating the contractivity LMI at a point.
#[derive(Debug, Clone)]
pub struct ContractivityReport {
    /// Smallest eigenvalue of the assembled block matrix.
    pub margin: f64,
    pub block: Matrix,
}

impl ContractivityReport {
    pub fn is_contractive(&self) -> bool {
        self.margin > 0.0
    }
}

/// Evaluates the λ-contractivity LMI for V = xᵀ Y⁻¹ x under x⁺ = (I − 2ΓY⁻¹) x.
pub fn check_contractivity(y: &Matrix, gamma: &Matrix, lambda: f64) -> Result<ContractivityReport> {
    check_rate(lambda)?;
    if y.shape() != gamma.shape() || !y.is_square() {
        return Err(Error::Dimension("Y and Γ must be square and of equal size".into()));
    }
    if !factor_pd(y)?.is_pd() {
        return Err(Error::Precondition("Y must be positive definite".into()));
    }
    let step = y - &gamma.scale(2.0);
    let step_t = step.transpose();
    let ly = y.scale(lambda);
    let block = Matrix::block(&[vec![Some(&ly), Some(&step_t)], vec![Some(&step), Some(y)]]);
    Ok(ContractivityReport {
        margin: min_sym_eigenvalue(&block),
        block,
    })
}

pub(crate) fn check_rate(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("contraction rate λ = {lambda} must lie in (0, 1]")))
    }
}

/// PBH stabilizability test.
pub fn is_stabilizable(system: &SystemModel) -> bool {
    system.is_stabilizable()
}

/// Designs `(Γ, P, K)` with `A + BK = I − 2ΓP` and the closed loop
/// λ-contractive for `V = xᵀPx`.
pub fn synthesize_gd(system: &SystemModel, lambda: f64, spec: &GammaSpec) -> Result<GdDesign> {
    check_rate(lambda)?;
    spec.validate(system.states())?;
    if !system.is_stabilizable() {
        return Err(Error::Precondition("(A, B) is not stabilizable".into()));
    }
    let (problem, layout) = synthesis_problem(system, lambda, spec, true);
    let sol = sdp::solve_feasibility(&problem, sdp::DEFAULT_STRICTNESS)?;
    if sol.status != SdpStatus::Feasible {
        return Err(Error::Infeasible {
            margin: sol.margin,
            block: sol.active_block,
        });
    }
    let (y, f, gamma, scale) = layout.decode(&sol.z);
    if !(scale > 0.0) {
        return Err(Error::NumericalFailure {
            reason: format!("scale variable ended at {scale:.3e}"),
            log: Vec::new(),
        });
    }
    let (y, f, gamma) = (y.scale(1.0 / scale), f.scale(1.0 / scale), gamma.scale(1.0 / scale));
    let k = solve_linear(&y.transpose(), &f.transpose())?.transpose();
    let p = inverse_spd(&y)?;
    Ok(GdDesign {
        gamma,
        p,
        k,
        y,
        f,
        lambda,
        margin: sol.margin / scale,
    })
}

/// Γ recovered from a stabilizing gain, with the spectral diagnostics.
#[derive(Debug, Clone)]
pub struct InverseParameterization {
    pub gamma: Matrix,
    /// Every eigenvalue of I − (A + BK) has real part in (0, 2).
    pub step_spectrum_in_range: bool,
    /// Every eigenvalue of Γ has positive real part. Reported, not guaranteed.
    pub gamma_eigenvalues_positive: bool,
    /// sym(Γ) ≻ 0. Reported, not guaranteed.
    pub gamma_sym_part_pd: bool,
}

/// Γ = ½ (I − (A + BK)) P⁻¹ for a stabilizing K and P ≻ 0.
pub fn inverse_parameterize(system: &SystemModel, k: &Matrix, p: &Matrix) -> Result<InverseParameterization> {
    let acl = system.closed_loop(k)?;
    let rho = spectral_radius(&acl)?;
    if rho >= 1.0 {
        return Err(Error::Precondition(format!(
            "gain is not stabilizing (spectral radius {rho:.6})"
        )));
    }
    let step = &Matrix::identity(acl.rows()) - &acl;
    let p_inv = inverse_spd(p).map_err(|_| Error::Precondition("P must be positive definite".into()))?;
    let gamma = (&step * &p_inv).scale(0.5);

    let step_spectrum_in_range = eigenvalues(&step)?
        .values
        .iter()
        .all(|v| v.re > 0.0 && v.re < 2.0);
    let gamma_eigenvalues_positive = eigenvalues(&gamma)?.values.iter().all(|v| v.re > 0.0);
    let gamma_sym_part_pd = min_sym_eigenvalue(&gamma) > 0.0;
    Ok(InverseParameterization {
        gamma,
        step_spectrum_in_range,
        gamma_eigenvalues_positive,
        gamma_sym_part_pd,
    })
}

/// A + B K.
pub fn closed_loop(system: &SystemModel, k: &Matrix) -> Result<Matrix> {
    system.closed_loop(k)
}

/// How well `I − (A + BK)` matches a scalar multiple of `P`, as happens
/// for steepest-descent designs with Γ = γ I.
#[derive(Debug, Clone)]
pub struct CollinearityReport {
    /// Entrywise ratios over entries where P is not negligible.
    pub ratios: Vec<f64>,
    pub mean_ratio: f64,
    /// max |ratio − mean| / |mean|.
    pub relative_spread: f64,
    /// γ implied by the ratio (half of it).
    pub implied_gamma: f64,
}

pub fn collinearity(system: &SystemModel, k: &Matrix, p: &Matrix) -> Result<CollinearityReport> {
    let acl = system.closed_loop(k)?;
    let step = &Matrix::identity(acl.rows()) - &acl;
    let cutoff = 1e-9 * p.max_abs();
    let ratios: Vec<f64> = step
        .as_slice()
        .iter()
        .zip(p.as_slice())
        .filter(|(_, pv)| pv.abs() > cutoff)
        .map(|(s, pv)| s / pv)
        .collect();
    if ratios.is_empty() {
        return Err(Error::Precondition("P has no significant entries".into()));
    }
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let relative_spread = ratios
        .iter()
        .map(|r| (r - mean_ratio).abs())
        .fold(0.0, f64::max)
        / mean_ratio.abs().max(f64::MIN_POSITIVE);
    Ok(CollinearityReport {
        ratios,
        mean_ratio,
        relative_spread,
        implied_gamma: 0.5 * mean_ratio,
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

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn contractivity_examples() {
        let i = Matrix::identity(2);
        let r = check_contractivity(&i, &i.scale(0.5), 1.0).unwrap();
        assert!((r.margin - 1.0).abs() < 1e-14);
        let r = check_contractivity(&i, &Matrix::zeros(2, 2), 1.0).unwrap();
        assert!(r.margin.abs() < 1e-14);
        assert!(matches!(
            check_contractivity(&i.scale(-1.0), &i, 1.0),
            Err(Error::Precondition(_))
        ));
        assert!(check_contractivity(&i, &i, 0.0).is_err());
    }

    #[test]
    fn printed_scalar_design_is_contractive_with_consistent_gamma() {
        let sys = steering();
        let p = m(&[&[1.69, 5.65], &[5.65, 32.95]]);
        let k = m(&[&[-1.33, -7.76]]);
        let inv = inverse_parameterize(&sys, &k, &p).unwrap();
        // the recovered Γ is close to 0.0236·I
        assert!((inv.gamma[(0, 0)] - 0.0236).abs() < 5e-4);
        assert!((inv.gamma[(1, 1)] - 0.0236).abs() < 5e-4);
        let y = inverse_spd(&p).unwrap();
        let r = check_contractivity(&y, &inv.gamma, 1.0).unwrap();
        assert!(r.margin > 0.0, "margin {}", r.margin);
    }

    #[test]
    fn printed_scalar_design_closed_loop() {
        let acl = closed_loop(&steering(), &m(&[&[-1.33, -7.76]])).unwrap();
        let expected = m(&[&[0.9202, -0.2656], &[-0.266, -0.552]]);
        assert!((&acl - &expected).max_abs() < 1e-12);
        assert_eq!(closed_loop(&steering(), &Matrix::zeros(1, 2)).unwrap(), *steering().a());
    }

    #[test]
    fn inverse_deadbeat() {
        // A = I, B = I, K = −I gives A + BK = 0
        let sys = SystemModel::new(Matrix::identity(2), Matrix::identity(2)).unwrap();
        let inv = inverse_parameterize(&sys, &Matrix::identity(2).scale(-1.0), &Matrix::identity(2)).unwrap();
        assert!((&inv.gamma - &Matrix::identity(2).scale(0.5)).max_abs() < 1e-15);
        assert!(inv.step_spectrum_in_range && inv.gamma_eigenvalues_positive && inv.gamma_sym_part_pd);
    }

    #[test]
    fn inverse_rejects_unstable_gain() {
        assert!(matches!(
            inverse_parameterize(&steering(), &Matrix::zeros(1, 2), &Matrix::identity(2)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn inverse_of_lqr_design_matches_hand_evaluation() {
        let sys = steering();
        let p = m(&[&[13.08, 13.30], &[13.30, 37.63]]);
        let k = m(&[&[-0.29, -0.76]]);
        let inv = inverse_parameterize(&sys, &k, &p).unwrap();
        // ½ (I − (A + BK)) P⁻¹ with the 2×2 adjugate
        let step = m(&[&[0.0174, -0.1544], &[0.058, 0.152]]);
        let det = 13.08 * 37.63 - 13.30 * 13.30;
        let p_inv = m(&[&[37.63, -13.30], &[-13.30, 13.08]]).scale(1.0 / det);
        let expected = (&step * &p_inv).scale(0.5);
        assert!((&inv.gamma - &expected).max_abs() < 1e-12);
        let approx = m(&[&[0.00430, -0.00357], &[0.00026, 0.00193]]);
        assert!((&inv.gamma - &approx).max_abs() < 5e-5, "{:?}", inv.gamma);
    }

    #[test]
    fn scalar_mode_on_steering() {
        let sys = steering();
        let d = synthesize_gd(&sys, 1.0, &GammaSpec::scalar()).unwrap();
        assert!(d.equality_residual(&sys) <= 1e-7);
        assert!(d.closed_loop_residual(&sys).unwrap() <= 1e-6);
        assert!(d.margin > 0.0);
        assert!(d.spectral_radius_with(&sys).unwrap() < 1.0);
        assert!((d.y.trace() - 2.0).abs() < 1e-9);
        let acl = d.closed_loop(&sys).unwrap();
        assert!(acl.asymmetry() < 1e-5);
        let col = collinearity(&sys, &d.k, &d.p).unwrap();
        assert!(col.relative_spread < 1e-4);
        assert!((col.implied_gamma - d.gamma[(0, 0)]).abs() < 1e-8);
    }

    #[test]
    fn degenerate_zero_system_free_mode() {
        let sys = SystemModel::new(Matrix::zeros(2, 2), Matrix::zeros(2, 1)).unwrap();
        let d = synthesize_gd(&sys, 1.0, &GammaSpec::free()).unwrap();
        assert!(d.k.max_abs() < 1e-9, "K = {:?}", d.k);
        assert!((&d.gamma - &d.y.scale(0.5)).max_abs() < 1e-9);
    }

    #[test]
    fn unstabilizable_is_a_precondition_error() {
        let sys = SystemModel::new(Matrix::from_diag(&[2.0, 0.5]), Matrix::zeros(2, 1)).unwrap();
        assert!(matches!(
            synthesize_gd(&sys, 1.0, &GammaSpec::scalar()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn fixed_gamma_must_be_positive() {
        let spec = GammaSpec::fixed(Matrix::identity(2).scale(-1.0));
        assert!(spec.validate(2).is_err());
        let spec = GammaSpec::bounded(m(&[&[1.0, 2.0], &[0.0, 1.0]]));
        assert!(spec.validate(2).is_err());
    }

    #[test]
    fn canonicalize_preserves_gain() {
        let sys = steering();
        let d = synthesize_gd(&sys, 1.0, &GammaSpec::free()).unwrap();
        let scaled = GdDesign {
            gamma: d.gamma.scale(3.7),
            p: d.p.scale(1.0 / 3.7),
            y: d.y.scale(3.7),
            f: d.f.scale(3.7),
            ..d.clone()
        };
        let k_scaled = solve_linear(&scaled.y.transpose(), &scaled.f.transpose()).unwrap().transpose();
        assert!((&k_scaled - &d.k).max_abs() < 1e-6);
        let back = scaled.canonicalize();
        assert!((&back.y - &d.y).max_abs() < 1e-12);
        assert!((&back.gamma - &d.gamma).max_abs() < 1e-12);
    }
}
