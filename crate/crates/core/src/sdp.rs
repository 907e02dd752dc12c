//! Feasibility solver for linear matrix inequalities with linear equalities.
//!
//! A problem is a list of affine symmetric blocks `F_b(z) = F₀ + Σ zᵢ Fᵢ`
//! together with equalities `E z = g`. The solver eliminates the equalities
//! exactly (`z = z₀ + N w`, with `N` an orthonormal null-space basis) and then
//! maximizes the common margin `t` in `F_b(z) ⪰ t I` with a log-det barrier
//! path-following method on `(w, t)`. Each outer stage re-centers with damped
//! Newton steps; the best margin seen so far is recorded per stage, and the
//! barrier parameter gives a certified upper bound on the optimal margin.
//!
//! When an objective `c` is supplied, a second phase minimizes `cᵀz` over
//! `F_b(z) ⪰ ε I` starting from the max-margin point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{affine_solution_set, factor_pd_tol, min_sym_eigenvalue, Matrix, PdFactor};

/// Default strictness gap for `≻ 0` constraints.
pub const DEFAULT_STRICTNESS: f64 = 1e-8;

/// Margin accepted for non-strict `⪰ 0` constraints.
pub const NONSTRICT_FLOOR: f64 = -1e-10;

/// Equality residual accepted as satisfied.
pub const EQUALITY_TOL: f64 = 1e-8;

/// One affine symmetric block `F₀ + Σ zᵢ Fᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmiBlock {
    pub name: String,
    pub constant: Matrix,
    pub coefficients: Vec<Matrix>,
}

impl LmiBlock {
    pub fn new(name: impl Into<String>, constant: Matrix, coefficients: Vec<Matrix>) -> Self {
        Self {
            name: name.into(),
            constant,
            coefficients,
        }
    }

    pub fn size(&self) -> usize {
        self.constant.rows()
    }

    /// F(z).
    pub fn evaluate(&self, z: &[f64]) -> Matrix {
        let mut out = self.constant.clone();
        for (zi, fi) in z.iter().zip(&self.coefficients) {
            if *zi != 0.0 {
                out = &out + &fi.scale(*zi);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmiProblem {
    pub dim: usize,
    pub blocks: Vec<LmiBlock>,
    /// Equality matrix E (rows = constraint count, cols = dim).
    pub eq_matrix: Matrix,
    pub eq_rhs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Vec<f64>>,
}

impl LmiProblem {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            blocks: Vec::new(),
            eq_matrix: Matrix::zeros(0, dim),
            eq_rhs: Vec::new(),
            objective: None,
        }
    }

    pub fn add_block(&mut self, block: LmiBlock) {
        self.blocks.push(block);
    }

    /// Appends one equality row `eᵀ z = g`.
    pub fn add_equality(&mut self, row: &[f64], rhs: f64) {
        assert_eq!(row.len(), self.dim);
        let r = Matrix::from_vec(1, self.dim, row.to_vec());
        self.eq_matrix = if self.eq_matrix.rows() == 0 {
            r
        } else {
            self.eq_matrix.vstack(&r)
        };
        self.eq_rhs.push(rhs);
    }

    pub fn equality_count(&self) -> usize {
        self.eq_rhs.len()
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        for b in &self.blocks {
            if b.coefficients.len() != self.dim {
                return Err(Error::Dimension(format!(
                    "block `{}` has {} coefficient matrices, expected {}",
                    b.name,
                    b.coefficients.len(),
                    self.dim
                )));
            }
            let k = b.size();
            for f in std::iter::once(&b.constant).chain(&b.coefficients) {
                if f.shape() != (k, k) {
                    return Err(Error::Dimension(format!(
                        "block `{}` mixes sizes {k} and {}x{}",
                        b.name,
                        f.rows(),
                        f.cols()
                    )));
                }
                f.check_symmetric(1e-9 * f.norm_inf().max(1.0))?;
            }
        }
        if self.eq_matrix.cols() != self.dim {
            return Err(Error::Dimension(format!(
                "equality matrix has {} columns, expected {}",
                self.eq_matrix.cols(),
                self.dim
            )));
        }
        if self.eq_matrix.rows() != self.eq_rhs.len() {
            return Err(Error::Dimension(format!(
                "equality matrix has {} rows but {} right-hand sides",
                self.eq_matrix.rows(),
                self.eq_rhs.len()
            )));
        }
        if let Some(c) = &self.objective {
            if c.len() != self.dim {
                return Err(Error::Dimension("objective length must equal dim".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Feasible,
    Marginal,
    Infeasible,
    NumericalFailure,
}

impl SdpStatus {
    fn classify(margin: f64, residual: f64, strictness: f64) -> Self {
        if !margin.is_finite() || !residual.is_finite() {
            SdpStatus::NumericalFailure
        } else if residual > EQUALITY_TOL {
            SdpStatus::Infeasible
        } else if margin > strictness {
            SdpStatus::Feasible
        } else if margin >= NONSTRICT_FLOOR {
            SdpStatus::Marginal
        } else {
            SdpStatus::Infeasible
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub z: Vec<f64>,
    /// Smallest eigenvalue over all blocks at `z`.
    pub margin: f64,
    /// ‖E z − g‖_∞.
    pub equality_residual: f64,
    pub status: SdpStatus,
    /// Name of the block attaining the margin.
    pub active_block: String,
    /// Certified upper bound on the best achievable margin.
    pub margin_upper_bound: f64,
    /// Best margin after each outer stage; non-decreasing.
    pub history: Vec<f64>,
    pub newton_steps: usize,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub strictness: f64,
    /// Outer (barrier parameter) stages.
    pub max_outer: usize,
    /// Newton iterations per centering.
    pub max_newton: usize,
    /// Stop once the certified gap falls below this fraction of the data scale.
    pub gap_tol: f64,
    /// Proximal weight on the reduced variables; fixes directions that no
    /// block depends on.
    pub regularization: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            strictness: DEFAULT_STRICTNESS,
            max_outer: 60,
            max_newton: 100,
            gap_tol: 1e-11,
            regularization: 1e-8,
        }
    }
}

/// Maximizes the common margin of all blocks subject to the equalities.
pub fn solve_feasibility(problem: &LmiProblem, strictness: f64) -> Result<SdpSolution> {
    solve_with(
        problem,
        &SolverOptions {
            strictness,
            ..SolverOptions::default()
        },
    )
}

#[derive(Debug, Clone)]
pub struct BlockMargin {
    pub name: String,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct SolutionReport {
    pub blocks: Vec<BlockMargin>,
    pub margin: f64,
    pub equality_residual: f64,
    pub status: SdpStatus,
}

/// Re-evaluates a candidate `z` directly on the assembled blocks.
pub fn check_solution(problem: &LmiProblem, z: &[f64]) -> Result<SolutionReport> {
    check_solution_with(problem, z, DEFAULT_STRICTNESS)
}

pub fn check_solution_with(problem: &LmiProblem, z: &[f64], strictness: f64) -> Result<SolutionReport> {
    if z.len() != problem.dim {
        return Err(Error::Dimension(format!(
            "candidate has length {}, problem dim is {}",
            z.len(),
            problem.dim
        )));
    }
    let blocks: Vec<BlockMargin> = problem
        .blocks
        .iter()
        .map(|b| BlockMargin {
            name: b.name.clone(),
            min_eigenvalue: min_sym_eigenvalue(&b.evaluate(z)),
        })
        .collect();
    let margin = blocks
        .iter()
        .map(|b| b.min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let equality_residual = equality_residual(problem, z);
    Ok(SolutionReport {
        status: SdpStatus::classify(margin, equality_residual, strictness),
        blocks,
        margin,
        equality_residual,
    })
}

fn equality_residual(problem: &LmiProblem, z: &[f64]) -> f64 {
    problem
        .eq_matrix
        .matvec(z)
        .iter()
        .zip(&problem.eq_rhs)
        .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
}

/// Block data after substituting `z = z₀ + N w`.
struct ReducedBlock {
    constant: Matrix,
    directions: Vec<Matrix>,
}

struct Reduced {
    blocks: Vec<ReducedBlock>,
    nvars: usize,
    total_size: usize,
    scale: f64,
}

/// How the last variable is treated during centering.
#[derive(Clone, Copy)]
enum Phase {
    /// Variables (w, t): maximize t with blocks ⪰ t I and t < cap.
    Margin { cap: f64 },
    /// Variables w: minimize a linear cost with blocks ⪰ floor I.
    Objective { floor: f64 },
}

struct Barrier<'a> {
    reduced: &'a Reduced,
    phase: Phase,
    /// Linear term in the barrier objective (already multiplied by s).
    linear: Vec<f64>,
    regularization: f64,
}

struct Evaluation {
    value: f64,
    gradient: Vec<f64>,
    hessian: Matrix,
}

impl Barrier<'_> {
    fn shift(&self, x: &[f64]) -> f64 {
        match self.phase {
            Phase::Margin { .. } => x[self.reduced.nvars],
            Phase::Objective { floor } => floor,
        }
    }

    fn slack(&self, block: &ReducedBlock, x: &[f64]) -> Matrix {
        let mut s = block.constant.clone();
        let k = s.rows();
        for (wi, g) in x.iter().zip(&block.directions) {
            if *wi != 0.0 {
                for r in 0..k {
                    for c in 0..k {
                        s[(r, c)] += wi * g[(r, c)];
                    }
                }
            }
        }
        let shift = self.shift(x);
        for r in 0..k {
            s[(r, r)] -= shift;
        }
        s
    }

    fn extra_log(&self, x: &[f64]) -> Option<f64> {
        match self.phase {
            Phase::Margin { cap } => {
                let gap = cap - x[self.reduced.nvars];
                (gap > 0.0).then(|| -gap.ln())
            }
            Phase::Objective { .. } => Some(0.0),
        }
    }

    fn proximal(&self, x: &[f64]) -> f64 {
        0.5 * self.regularization
            * x[..self.reduced.nvars].iter().map(|v| v * v).sum::<f64>()
    }

    fn linear_term(&self, x: &[f64]) -> f64 {
        self.linear.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Barrier value, or None outside the domain.
    fn value(&self, x: &[f64]) -> Option<f64> {
        let mut v = self.linear_term(x) + self.proximal(x) + self.extra_log(x)?;
        for block in &self.reduced.blocks {
            let l = cholesky_lower(&self.slack(block, x))?;
            v -= 2.0 * (0..l.rows()).map(|i| l[(i, i)].ln()).sum::<f64>();
        }
        Some(v)
    }

    fn evaluate(&self, x: &[f64]) -> Option<Evaluation> {
        let nx = x.len();
        let nw = self.reduced.nvars;
        let mut gradient = self.linear.clone();
        let mut hessian = Matrix::zeros(nx, nx);
        let mut value = self.linear_term(x) + self.proximal(x) + self.extra_log(x)?;
        for i in 0..nw {
            gradient[i] += self.regularization * x[i];
            hessian[(i, i)] += self.regularization;
        }
        if let Phase::Margin { cap } = self.phase {
            let gap = cap - x[nw];
            gradient[nw] += 1.0 / gap;
            hessian[(nw, nw)] += 1.0 / (gap * gap);
        }

        for block in &self.reduced.blocks {
            let k = block.constant.rows();
            let l = cholesky_lower(&self.slack(block, x))?;
            value -= 2.0 * (0..k).map(|i| l[(i, i)].ln()).sum::<f64>();
            let linv = lower_inverse(&l);
            // whitened directions L⁻¹ D L⁻ᵀ; the margin variable has D = −I
            let mut whitened: Vec<Matrix> = block
                .directions
                .iter()
                .map(|d| &(&linv * d) * &linv.transpose())
                .collect();
            if let Phase::Margin { .. } = self.phase {
                whitened.push((&linv * &linv.transpose()).scale(-1.0));
            }
            for i in 0..nx {
                gradient[i] -= whitened[i].trace();
                for j in 0..=i {
                    let h: f64 = whitened[i]
                        .as_slice()
                        .iter()
                        .zip(whitened[j].as_slice())
                        .map(|(a, b)| a * b)
                        .sum();
                    hessian[(i, j)] += h;
                    if i != j {
                        hessian[(j, i)] += h;
                    }
                }
            }
        }
        if !value.is_finite() || gradient.iter().any(|g| !g.is_finite()) {
            return None;
        }
        Some(Evaluation {
            value,
            gradient,
            hessian,
        })
    }

    /// Damped Newton centering from a strictly feasible `x`.
    fn center(&self, x: &mut Vec<f64>, max_newton: usize, steps: &mut usize, log: &mut Vec<String>) -> Result<()> {
        for it in 0..max_newton {
            let Some(ev) = self.evaluate(x) else {
                return Err(Error::NumericalFailure {
                    reason: "barrier evaluation left the domain".into(),
                    log: log.clone(),
                });
            };
            let dx = newton_direction(&ev.hessian, &ev.gradient).ok_or_else(|| Error::NumericalFailure {
                reason: "Newton system could not be solved".into(),
                log: log.clone(),
            })?;
            let slope: f64 = ev.gradient.iter().zip(&dx).map(|(g, d)| g * d).sum();
            let decrement2 = -slope;
            if decrement2 <= 2e-14 || !decrement2.is_finite() {
                return Ok(());
            }
            // backtracking: stay inside the domain, then Armijo
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + alpha * d).collect();
                if let Some(v) = self.value(&trial) {
                    if v <= ev.value + 0.25 * alpha * slope {
                        *x = trial;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            *steps += 1;
            if !accepted {
                log.push(format!(
                    "newton iteration {it}: line search stalled (decrement² {decrement2:.3e})"
                ));
                return Ok(());
            }
        }
        log.push(format!("centering hit the {max_newton}-iteration cap"));
        Ok(())
    }
}

fn cholesky_lower(s: &Matrix) -> Option<Matrix> {
    match factor_pd_tol(s, f64::INFINITY).ok()? {
        PdFactor::Lower(l) => Some(l),
        PdFactor::NotPositiveDefinite { .. } => None,
    }
}

fn lower_inverse(l: &Matrix) -> Matrix {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in j..i {
                s -= l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = s / l[(i, i)];
        }
    }
    inv
}

/// Solves H dx = −g, adding a ridge if H is numerically indefinite.
fn newton_direction(h: &Matrix, g: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    let diag_scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut ridge = 0.0;
    for _ in 0..12 {
        let mut hr = h.clone();
        for i in 0..n {
            hr[(i, i)] += ridge;
        }
        if let Some(l) = cholesky_lower(&hr) {
            let mut y = vec![0.0; n];
            for i in 0..n {
                let mut s = -g[i];
                for k in 0..i {
                    s -= l[(i, k)] * y[k];
                }
                y[i] = s / l[(i, i)];
            }
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                let mut s = y[i];
                for k in (i + 1)..n {
                    s -= l[(k, i)] * x[k];
                }
                x[i] = s / l[(i, i)];
            }
            if x.iter().all(|v| v.is_finite()) {
                return Some(x);
            }
        }
        ridge = if ridge == 0.0 { 1e-14 * diag_scale } else { ridge * 100.0 };
    }
    None
}

fn reduce(problem: &LmiProblem) -> Result<(Reduced, crate::linalg::AffineSolutionSet)> {
    let set = affine_solution_set(&problem.eq_matrix, &problem.eq_rhs)?;
    let nvars = set.null_basis.cols();
    let mut scale: f64 = 0.0;
    let blocks: Vec<ReducedBlock> = problem
        .blocks
        .iter()
        .map(|b| {
            let constant = b.evaluate(&set.particular).sym_part();
            let directions: Vec<Matrix> = (0..nvars)
                .map(|i| {
                    let mut d = Matrix::zeros(b.size(), b.size());
                    for (j, fj) in b.coefficients.iter().enumerate() {
                        let nji = set.null_basis[(j, i)];
                        if nji != 0.0 {
                            d = &d + &fj.scale(nji);
                        }
                    }
                    d.sym_part()
                })
                .collect();
            scale = scale.max(constant.norm_fro());
            for d in &directions {
                scale = scale.max(d.norm_fro());
            }
            ReducedBlock { constant, directions }
        })
        .collect();
    let total_size = blocks.iter().map(|b| b.constant.rows()).sum();
    Ok((
        Reduced {
            blocks,
            nvars,
            total_size,
            scale: if scale > 0.0 { scale } else { 1.0 },
        },
        set,
    ))
}

/// Zeroes the components of `w` along directions that no block depends on.
/// Margins are unchanged and the point becomes least-norm in those directions.
fn project_out_invisible(reduced: &Reduced, w: &mut [f64]) -> Result<()> {
    let nw = reduced.nvars;
    if nw == 0 {
        return Ok(());
    }
    let rows: usize = reduced.blocks.iter().map(|b| b.constant.rows().pow(2)).sum();
    let mut d = Matrix::zeros(rows.max(1), nw);
    for i in 0..nw {
        let mut r = 0;
        for b in &reduced.blocks {
            for v in b.directions[i].as_slice() {
                d[(r, i)] = *v;
                r += 1;
            }
        }
    }
    let invisible = affine_solution_set(&d, &vec![0.0; d.rows()])?.null_basis;
    for j in 0..invisible.cols() {
        let coef: f64 = (0..nw).map(|i| invisible[(i, j)] * w[i]).sum();
        for (i, wi) in w.iter_mut().enumerate() {
            *wi -= coef * invisible[(i, j)];
        }
    }
    Ok(())
}

fn reduced_margin(reduced: &Reduced, w: &[f64]) -> f64 {
    let probe = Barrier {
        reduced,
        phase: Phase::Objective { floor: 0.0 },
        linear: Vec::new(),
        regularization: 0.0,
    };
    reduced
        .blocks
        .iter()
        .map(|b| min_sym_eigenvalue(&probe.slack(b, w)))
        .fold(f64::INFINITY, f64::min)
}

/// Full solver with explicit options.
pub fn solve_with(problem: &LmiProblem, options: &SolverOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let (reduced, set) = reduce(problem)?;
    let nw = reduced.nvars;
    let sigma = reduced.scale;
    let barrier_degree = (reduced.total_size + 1) as f64;
    let mut log = Vec::new();
    let mut newton_steps = 0;

    let mut w = vec![0.0; nw];
    let mut best_w = w.clone();
    let mut best_margin = reduced_margin(&reduced, &w);
    let mut history = Vec::new();
    let mut upper_bound = f64::INFINITY;

    if !reduced.blocks.is_empty() {
        let cap = best_margin.max(0.0) + 1e4 * sigma;
        let mut x = w.clone();
        x.push(best_margin - sigma);
        let mut s = barrier_degree / sigma;
        for stage in 0..options.max_outer {
            let mut linear = vec![0.0; nw + 1];
            linear[nw] = -s;
            let barrier = Barrier {
                reduced: &reduced,
                phase: Phase::Margin { cap },
                linear,
                regularization: options.regularization,
            };
            barrier.center(&mut x, options.max_newton, &mut newton_steps, &mut log)?;
            let m = reduced_margin(&reduced, &x[..nw]);
            if m > best_margin {
                best_margin = m;
                best_w = x[..nw].to_vec();
            }
            history.push(best_margin);
            let gap = barrier_degree / s;
            upper_bound = x[nw] + gap;
            log.push(format!(
                "stage {stage}: s={s:.3e} t={:.6e} margin={m:.6e} gap≤{gap:.3e}",
                x[nw]
            ));
            if gap <= options.gap_tol * sigma {
                break;
            }
            s *= 10.0;
        }
        w = best_w.clone();
        project_out_invisible(&reduced, &mut w)?;

        if let Some(c) = &problem.objective {
            if best_margin > options.strictness {
                let floor = options.strictness;
                let reduced_cost: Vec<f64> = (0..nw)
                    .map(|i| (0..problem.dim).map(|j| set.null_basis[(j, i)] * c[j]).sum())
                    .collect();
                let mut x = w.clone();
                let mut s = 1.0 / sigma;
                for _ in 0..options.max_outer {
                    let barrier = Barrier {
                        reduced: &reduced,
                        phase: Phase::Objective { floor },
                        linear: reduced_cost.iter().map(|v| v * s).collect(),
                        regularization: options.regularization,
                    };
                    barrier.center(&mut x, options.max_newton, &mut newton_steps, &mut log)?;
                    if (reduced.total_size as f64) / s <= options.gap_tol * sigma {
                        break;
                    }
                    s *= 10.0;
                }
                w = x;
                project_out_invisible(&reduced, &mut w)?;
            }
        }
    }

    let z = set.point(&w);
    let report = check_solution_with(problem, &z, options.strictness)?;
    let active_block = report
        .blocks
        .iter()
        .min_by(|a, b| a.min_eigenvalue.total_cmp(&b.min_eigenvalue))
        .map(|b| b.name.clone())
        .unwrap_or_default();
    let margin = if report.blocks.is_empty() { f64::INFINITY } else { report.margin };
    Ok(SdpSolution {
        status: SdpStatus::classify(margin, report.equality_residual, options.strictness),
        z,
        margin,
        equality_residual: report.equality_residual,
        active_block,
        margin_upper_bound: upper_bound,
        history,
        newton_steps,
    })
}

/// Matrix-valued affine function `C + Σ zᵢ Mᵢ` of the decision vector, used
/// to write LMI blocks and matrix equalities in matrix form.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMatrix {
    pub constant: Matrix,
    pub coefficients: Vec<Matrix>,
}

impl AffineMatrix {
    pub fn constant(c: Matrix, dim: usize) -> Self {
        let (r, k) = c.shape();
        Self {
            constant: c,
            coefficients: vec![Matrix::zeros(r, k); dim],
        }
    }

    pub fn zeros(rows: usize, cols: usize, dim: usize) -> Self {
        Self::constant(Matrix::zeros(rows, cols), dim)
    }

    /// Symmetric n×n unknown occupying `n(n+1)/2` entries from `offset`,
    /// upper triangle row by row.
    pub fn symmetric_variable(n: usize, offset: usize, dim: usize) -> Self {
        let mut out = Self::zeros(n, n, dim);
        let mut idx = offset;
        for i in 0..n {
            for j in i..n {
                out.coefficients[idx][(i, j)] = 1.0;
                out.coefficients[idx][(j, i)] = 1.0;
                idx += 1;
            }
        }
        out
    }

    /// Unstructured rows×cols unknown, row-major from `offset`.
    pub fn full_variable(rows: usize, cols: usize, offset: usize, dim: usize) -> Self {
        let mut out = Self::zeros(rows, cols, dim);
        for i in 0..rows {
            for j in 0..cols {
                out.coefficients[offset + i * cols + j][(i, j)] = 1.0;
            }
        }
        out
    }

    /// `z[index] · I`.
    pub fn scalar_identity(n: usize, index: usize, dim: usize) -> Self {
        let mut out = Self::zeros(n, n, dim);
        out.coefficients[index] = Matrix::identity(n);
        out
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.constant.shape()
    }

    fn map(&self, f: impl Fn(&Matrix) -> Matrix) -> Self {
        Self {
            constant: f(&self.constant),
            coefficients: self.coefficients.iter().map(&f).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&Matrix, &Matrix) -> Matrix) -> Self {
        assert_eq!(self.dim(), other.dim(), "affine dimension mismatch");
        Self {
            constant: f(&self.constant, &other.constant),
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn add_constant(&self, c: &Matrix) -> Self {
        let mut out = self.clone();
        out.constant = &out.constant + c;
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|m| m.scale(c))
    }

    /// `L · self`.
    pub fn left_mul(&self, l: &Matrix) -> Self {
        self.map(|m| l * m)
    }

    /// `self · R`.
    pub fn right_mul(&self, r: &Matrix) -> Self {
        self.map(|m| m * r)
    }

    pub fn transpose(&self) -> Self {
        self.map(Matrix::transpose)
    }

    pub fn sym_part(&self) -> Self {
        self.map(Matrix::sym_part)
    }

    pub fn evaluate(&self, z: &[f64]) -> Matrix {
        let mut out = self.constant.clone();
        for (zi, m) in z.iter().zip(&self.coefficients) {
            if *zi != 0.0 {
                out = &out + &m.scale(*zi);
            }
        }
        out
    }

    /// Block assembly; `None` entries are zero blocks.
    pub fn block(grid: &[Vec<Option<&AffineMatrix>>]) -> Self {
        let dim = grid
            .iter()
            .flatten()
            .flatten()
            .map(|a| a.dim())
            .next()
            .expect("block grid needs at least one entry");
        let pick = |f: &dyn Fn(&AffineMatrix) -> &Matrix| {
            // zero blocks need concrete sizes; borrow them from a sibling
            let owned: Vec<Vec<Option<Matrix>>> = grid
                .iter()
                .map(|row| row.iter().map(|e| e.map(|a| f(a).clone())).collect())
                .collect();
            let refs: Vec<Vec<Option<&Matrix>>> = owned
                .iter()
                .map(|row| row.iter().map(|e| e.as_ref()).collect())
                .collect();
            Matrix::block(&refs)
        };
        Self {
            constant: pick(&|a| &a.constant),
            coefficients: (0..dim).map(|i| pick(&|a| &a.coefficients[i])).collect(),
        }
    }

    pub fn into_block(self, name: impl Into<String>) -> LmiBlock {
        LmiBlock::new(
            name,
            self.constant.sym_part(),
            self.coefficients.iter().map(Matrix::sym_part).collect(),
        )
    }

    /// Adds the entrywise equalities `self(z) = 0` to `problem`.
    pub fn constrain_zero(&self, problem: &mut LmiProblem) {
        let (r, c) = self.shape();
        for i in 0..r {
            for j in 0..c {
                let row: Vec<f64> = self.coefficients.iter().map(|m| m[(i, j)]).collect();
                problem.add_equality(&row, -self.constant[(i, j)]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_midpoint_problem() -> LmiProblem {
        // F(z) = diag(z, 1 − z)
        let mut p = LmiProblem::new(1);
        p.add_block(LmiBlock::new(
            "diag",
            Matrix::from_diag(&[0.0, 1.0]),
            vec![Matrix::from_diag(&[1.0, -1.0])],
        ));
        p
    }

    #[test]
    fn midpoint_example() {
        let sol = solve_feasibility(&diag_midpoint_problem(), DEFAULT_STRICTNESS).unwrap();
        assert!((sol.z[0] - 0.5).abs() < 1e-8, "z = {}", sol.z[0]);
        assert!((sol.margin - 0.5).abs() < 1e-8);
        assert_eq!(sol.status, SdpStatus::Feasible);
        assert!(sol.margin_upper_bound >= sol.margin - 1e-12);
        assert!(sol.margin_upper_bound - sol.margin < 1e-9);
    }

    #[test]
    fn zero_variable_deadbeat_witness() {
        // Lemma-1 block with Y = I, Γ = ½I, λ = 1 and no decision variables
        let i2 = Matrix::identity(2);
        let zero = Matrix::zeros(2, 2);
        let block = Matrix::block(&[vec![Some(&i2), Some(&zero)], vec![Some(&zero), Some(&i2)]]);
        let mut p = LmiProblem::new(0);
        p.add_block(LmiBlock::new("lemma", block, vec![]));
        let sol = solve_feasibility(&p, DEFAULT_STRICTNESS).unwrap();
        assert_eq!(sol.margin, 1.0);
        assert_eq!(sol.status, SdpStatus::Feasible);
        let rep = check_solution(&p, &[]).unwrap();
        assert_eq!(rep.margin, 1.0);
        assert_eq!(rep.equality_residual, 0.0);
    }

    #[test]
    fn violated_equality_is_reported() {
        let mut p = diag_midpoint_problem();
        p.add_equality(&[1.0], 0.5);
        let rep = check_solution(&p, &[0.6]).unwrap();
        assert!((rep.equality_residual - 0.1).abs() < 1e-12);
        assert_eq!(rep.status, SdpStatus::Infeasible);
        let sol = solve_feasibility(&p, DEFAULT_STRICTNESS).unwrap();
        assert!(sol.equality_residual < 1e-15);
        assert_eq!(sol.status, SdpStatus::Feasible);
    }

    #[test]
    fn infeasible_problem_reports_negative_margin() {
        // z ≥ 1 and −z ≥ 0 cannot both hold; best margin is −½
        let mut p = LmiProblem::new(1);
        p.add_block(LmiBlock::new("lo", Matrix::from_diag(&[-1.0]), vec![Matrix::from_diag(&[1.0])]));
        p.add_block(LmiBlock::new("hi", Matrix::from_diag(&[0.0]), vec![Matrix::from_diag(&[-1.0])]));
        let sol = solve_feasibility(&p, DEFAULT_STRICTNESS).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        assert!((sol.margin + 0.5).abs() < 1e-8);
        assert!(sol.margin_upper_bound < 0.0);
    }

    #[test]
    fn inconsistent_equalities_error() {
        let mut p = diag_midpoint_problem();
        p.add_equality(&[1.0], 0.2);
        p.add_equality(&[2.0], 0.8);
        assert!(matches!(
            solve_feasibility(&p, DEFAULT_STRICTNESS),
            Err(Error::InconsistentEqualities { .. })
        ));
    }

    #[test]
    fn validation_catches_shape_errors() {
        let mut p = LmiProblem::new(2);
        p.add_block(LmiBlock::new("bad", Matrix::identity(2), vec![Matrix::identity(2)]));
        assert!(matches!(p.validate(), Err(Error::Dimension(_))));
        let mut p = LmiProblem::new(1);
        p.add_block(LmiBlock::new(
            "asym",
            Matrix::identity(2),
            vec![Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap()],
        ));
        assert!(matches!(p.validate(), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn objective_phase_minimizes_cost() {
        // minimize z subject to diag(z, 1 − z) ⪰ ε I
        let mut p = diag_midpoint_problem();
        p.objective = Some(vec![1.0]);
        let sol = solve_feasibility(&p, 1e-6).unwrap();
        assert!(sol.z[0] < 1e-5 && sol.z[0] > 1e-6, "z = {}", sol.z[0]);
    }

    #[test]
    fn affine_symmetric_variable_round_trip() {
        let y = AffineMatrix::symmetric_variable(2, 0, 3);
        let m = y.evaluate(&[1.0, 2.0, 3.0]);
        assert_eq!(m, Matrix::from_rows(&[[1.0, 2.0], [2.0, 3.0]]).unwrap());
        let a = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let ay = y.left_mul(&a).evaluate(&[1.0, 2.0, 3.0]);
        assert_eq!(ay, &a * &m);
    }

    #[test]
    fn free_direction_stays_at_least_norm() {
        // second variable does not enter any block
        let mut p = LmiProblem::new(2);
        p.add_block(LmiBlock::new(
            "diag",
            Matrix::from_diag(&[0.0, 1.0]),
            vec![Matrix::from_diag(&[1.0, -1.0]), Matrix::zeros(2, 2)],
        ));
        let sol = solve_feasibility(&p, DEFAULT_STRICTNESS).unwrap();
        assert!((sol.z[0] - 0.5).abs() < 1e-8);
        assert!(sol.z[1].abs() < 1e-12);
    }
}
