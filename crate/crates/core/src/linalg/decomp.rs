//! Factorizations and linear solves: Cholesky, partial-pivoted LU,
//! rank-revealing Householder QR and one-sided Jacobi singular values.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Outcome of a Cholesky attempt on a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum PdFactor {
    /// Lower-triangular `L` with `L Lᵀ = M`.
    Lower(Matrix),
    /// The pivot at `index` (zero-based) was not strictly positive.
    NotPositiveDefinite { index: usize, pivot: f64 },
}

impl PdFactor {
    pub fn is_pd(&self) -> bool {
        matches!(self, PdFactor::Lower(_))
    }

    pub fn into_result(self) -> Result<Matrix> {
        match self {
            PdFactor::Lower(l) => Ok(l),
            PdFactor::NotPositiveDefinite { index, pivot } => {
                Err(Error::NotPositiveDefinite { index, pivot })
            }
        }
    }
}

/// Cholesky factorization with the default symmetry tolerance.
pub fn factor_pd(m: &Matrix) -> Result<PdFactor> {
    factor_pd_tol(m, m.default_sym_tol())
}

pub fn factor_pd_tol(m: &Matrix, sym_tol: f64) -> Result<PdFactor> {
    m.check_symmetric(sym_tol)?;
    let n = m.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Ok(PdFactor::NotPositiveDefinite { index: j, pivot: d });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            // lower triangle of m is read so small asymmetries are ignored consistently
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(PdFactor::Lower(l))
}

/// Solves `M X = RHS` by Gaussian elimination with partial pivoting.
pub fn solve_linear(m: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "solve_linear needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if rhs.rows() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has {} rows, expected {n}",
            rhs.rows()
        )));
    }
    let k = rhs.cols();
    let mut a = m.clone();
    let mut b = rhs.clone();
    let scale = m.max_abs();
    let threshold = f64::EPSILON * (n as f64) * scale;

    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= threshold || piv_abs == 0.0 {
            return Err(Error::Singular { pivot: piv_abs });
        }
        if piv != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            for j in 0..k {
                let tmp = b[(col, j)];
                b[(col, j)] = b[(piv, j)];
                b[(piv, j)] = tmp;
            }
        }
        let p = a[(col, col)];
        for r in (col + 1)..n {
            let f = a[(r, col)] / p;
            if f == 0.0 {
                continue;
            }
            a[(r, col)] = 0.0;
            for j in (col + 1)..n {
                a[(r, j)] -= f * a[(col, j)];
            }
            for j in 0..k {
                b[(r, j)] -= f * b[(col, j)];
            }
        }
    }

    let mut x = Matrix::zeros(n, k);
    for j in 0..k {
        for i in (0..n).rev() {
            let mut s = b[(i, j)];
            for c in (i + 1)..n {
                s -= a[(i, c)] * x[(c, j)];
            }
            x[(i, j)] = s / a[(i, i)];
        }
    }
    Ok(x)
}

pub fn inverse(m: &Matrix) -> Result<Matrix> {
    solve_linear(m, &Matrix::identity(m.rows()))
}

/// Inverse of a symmetric positive definite matrix, symmetrized.
pub fn inverse_spd(m: &Matrix) -> Result<Matrix> {
    let l = factor_pd(m)?.into_result()?;
    let n = m.rows();
    // L⁻¹ by forward substitution, then M⁻¹ = L⁻ᵀ L⁻¹
    let mut linv = Matrix::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in j..i {
                s -= l[(i, k)] * linv[(k, j)];
            }
            linv[(i, j)] = s / l[(i, i)];
        }
    }
    Ok((&linv.transpose() * &linv).sym_part())
}

/// Singular values in descending order (one-sided Jacobi).
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let a = if m.rows() < m.cols() { m.transpose() } else { m.clone() };
    let (rows, cols) = a.shape();
    let mut cols_data: Vec<Vec<f64>> = (0..cols).map(|j| a.col(j)).collect();

    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    alpha += cols_data[p][i] * cols_data[p][i];
                    beta += cols_data[q][i] * cols_data[q][i];
                    gamma += cols_data[p][i] * cols_data[q][i];
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let up = cols_data[p][i];
                    let uq = cols_data[q][i];
                    cols_data[p][i] = c * up - s * uq;
                    cols_data[q][i] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols_data
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank: singular values above `rel_tol · σ_max`.
pub fn rank(m: &Matrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Affine parameterization `z = z0 + N w` of the solution set of `E z = g`.
#[derive(Debug, Clone)]
pub struct AffineSolutionSet {
    /// Least-norm particular solution.
    pub particular: Vec<f64>,
    /// Orthonormal basis of the null space of `E`, one column per free direction.
    pub null_basis: Matrix,
    pub rank: usize,
}

impl AffineSolutionSet {
    pub fn point(&self, w: &[f64]) -> Vec<f64> {
        let mut z = self.particular.clone();
        for (i, zi) in z.iter_mut().enumerate() {
            for (j, wj) in w.iter().enumerate() {
                *zi += self.null_basis[(i, j)] * wj;
            }
        }
        z
    }
}

/// Reduces `E z = g` (E is r×d) via Householder QR with column pivoting on Eᵀ.
pub fn affine_solution_set(e: &Matrix, g: &[f64]) -> Result<AffineSolutionSet> {
    let r = e.rows();
    let d = e.cols();
    if g.len() != r {
        return Err(Error::Dimension(format!(
            "equality right-hand side has length {}, expected {r}",
            g.len()
        )));
    }
    if r == 0 {
        return Ok(AffineSolutionSet {
            particular: vec![0.0; d],
            null_basis: Matrix::identity(d),
            rank: 0,
        });
    }

    let mut a = e.transpose(); // d × r
    let mut perm: Vec<usize> = (0..r).collect();
    let tol = 1e-11 * e.max_abs().max(f64::MIN_POSITIVE) * (d.max(r) as f64);
    let mut reflectors: Vec<Vec<f64>> = Vec::new();
    let mut rank = 0;

    for k in 0..d.min(r) {
        // pivot on the largest remaining column norm
        let norms: Vec<f64> = (k..r)
            .map(|j| (k..d).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt())
            .collect();
        let (off, &best) = norms
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .unwrap();
        if best <= tol {
            break;
        }
        let jp = k + off;
        if jp != k {
            for i in 0..d {
                let tmp = a[(i, k)];
                a[(i, k)] = a[(i, jp)];
                a[(i, jp)] = tmp;
            }
            perm.swap(k, jp);
        }
        let alpha = if a[(k, k)] >= 0.0 { -best } else { best };
        let mut v: Vec<f64> = (k..d).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..r {
                let dot: f64 = (k..d).map(|i| v[i - k] * a[(i, j)]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..d {
                    a[(i, j)] -= f * v[i - k];
                }
            }
        }
        reflectors.push(v);
        rank += 1;
    }

    // Q = H_0 H_1 ... H_{rank-1}, built by applying reflectors to I in reverse.
    let mut q = Matrix::identity(d);
    for (k, v) in reflectors.iter().enumerate().rev() {
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in 0..d {
            let dot: f64 = (k..d).map(|i| v[i - k] * q[(i, j)]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..d {
                q[(i, j)] -= f * v[i - k];
            }
        }
    }

    // Rᵀ y = g[perm] on the leading rank×rank lower-triangular system
    let mut y = vec![0.0; rank];
    for i in 0..rank {
        let mut s = g[perm[i]];
        for (j, yj) in y.iter().enumerate().take(i) {
            s -= a[(j, i)] * yj;
        }
        y[i] = s / a[(i, i)];
    }
    let mut particular = vec![0.0; d];
    for (i, zi) in particular.iter_mut().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            *zi += q[(i, j)] * yj;
        }
    }

    let ez = e.matvec(&particular);
    let residual = ez
        .iter()
        .zip(g)
        .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
    let gscale = g.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    if residual > 1e-9 * gscale {
        return Err(Error::InconsistentEqualities { residual });
    }

    Ok(AffineSolutionSet {
        particular,
        null_basis: q.submatrix(0, rank, d, d - rank),
        rank,
    })
}
