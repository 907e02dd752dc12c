use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix stored row-major.
///
/// Serializes as a nested array of rows, which is also the on-disk form used
/// by the command-line tool.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must equal rows * cols");
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows, rejecting ragged, empty or non-finite input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("matrix must have at least one row".into()));
        }
        let cols = rows[0].as_ref().len();
        if cols == 0 {
            return Err(Error::Dimension("matrix must have at least one column".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Column vector from a slice.
    pub fn column(v: &[f64]) -> Self {
        Self::from_vec(v.len(), 1, v.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// (M + Mᵀ) / 2.
    pub fn sym_part(&self) -> Self {
        assert!(self.is_square());
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                s[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        s
    }

    /// Largest entry of |M - Mᵀ|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Default symmetry tolerance, 1e-9 relative to the infinity norm.
    pub fn default_sym_tol(&self) -> f64 {
        1e-9 * self.norm_inf().max(f64::MIN_POSITIVE)
    }

    /// Errors unless square and symmetric within `tol`.
    pub fn check_symmetric(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let asymmetry = self.asymmetry();
        if asymmetry > tol {
            return Err(Error::NotSymmetric { asymmetry, tol });
        }
        Ok(())
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// xᵀ M x.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Copy of the sub-block starting at (r0, c0).
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut s = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                s[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        s
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Assembles a block matrix from a grid. `None` entries are zero blocks;
    /// every block row needs at least one concrete block to fix its height,
    /// and likewise for block columns.
    pub fn block(grid: &[Vec<Option<&Matrix>>]) -> Self {
        let nbr = grid.len();
        let nbc = grid[0].len();
        let mut heights = vec![None; nbr];
        let mut widths = vec![None; nbc];
        for (bi, row) in grid.iter().enumerate() {
            assert_eq!(row.len(), nbc, "ragged block grid");
            for (bj, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    assert!(heights[bi].is_none_or(|h| h == b.rows), "block height mismatch");
                    assert!(widths[bj].is_none_or(|w| w == b.cols), "block width mismatch");
                    heights[bi] = Some(b.rows);
                    widths[bj] = Some(b.cols);
                }
            }
        }
        let heights: Vec<usize> = heights.into_iter().map(|h| h.expect("empty block row")).collect();
        let widths: Vec<usize> = widths.into_iter().map(|w| w.expect("empty block column")).collect();
        let mut out = Self::zeros(heights.iter().sum(), widths.iter().sum());
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    out.set_block(r0, c0, b);
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        out
    }

    pub fn hstack(&self, other: &Matrix) -> Self {
        Self::block(&[vec![Some(self), Some(other)]])
    }

    pub fn vstack(&self, other: &Matrix) -> Self {
        Self::block(&[vec![Some(self)], vec![Some(other)]])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for v in self.row(i) {
                write!(f, "{v:>12.6} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Mul<f64> for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: f64) -> Matrix {
        self.scale(rhs)
    }
}

fn zip_with(a: &Matrix, b: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
    assert_eq!(a.shape(), b.shape(), "elementwise dimension mismatch");
    Matrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_rejects_ragged_and_nonfinite() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(matches!(
            Matrix::from_rows(&[vec![f64::NAN]]),
            Err(Error::NonFinite)
        ));
        assert!(Matrix::from_rows::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn block_assembly() {
        let i = Matrix::identity(2);
        let two = i.scale(2.0);
        let m = Matrix::block(&[vec![Some(&i), None], vec![None, Some(&two)]]);
        assert_eq!(m, Matrix::from_diag(&[1.0, 1.0, 2.0, 2.0]));
    }

    #[test]
    fn products_and_norms() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let b = &a * &Matrix::identity(2);
        assert_eq!(a, b);
        assert_eq!(a.norm_inf(), 7.0);
        assert_eq!(a.max_abs(), 4.0);
        assert_eq!(a.trace(), 5.0);
        assert_eq!(a.quad_form(&[1.0, 1.0]), 10.0);
        assert_eq!(a.asymmetry(), 1.0);
    }

    #[test]
    fn serde_nested_rows() {
        let a = Matrix::from_rows(&[[1.0, 2.5]]).unwrap();
        let back: Matrix = Matrix::try_from(Vec::<Vec<f64>>::from(a.clone())).unwrap();
        assert_eq!(a, back);
    }
}
