use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, rank, Matrix};

/// Discrete-time linear plant `x⁺ = A x + B u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem", into = "RawSystem")]
pub struct SystemModel {
    a: Matrix,
    b: Matrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(rename = "A")]
    a: Matrix,
    #[serde(rename = "B")]
    b: Matrix,
}

impl TryFrom<RawSystem> for SystemModel {
    type Error = Error;

    fn try_from(raw: RawSystem) -> Result<Self> {
        SystemModel::new(raw.a, raw.b)
    }
}

impl From<SystemModel> for RawSystem {
    fn from(s: SystemModel) -> Self {
        RawSystem { a: s.a, b: s.b }
    }
}

impl SystemModel {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "A must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if b.rows() != a.rows() {
            return Err(Error::Dimension(format!(
                "B has {} rows but A is {}x{}",
                b.rows(),
                a.rows(),
                a.cols()
            )));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    /// State dimension n.
    pub fn states(&self) -> usize {
        self.a.rows()
    }

    /// Input dimension m.
    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    /// A + B K.
    pub fn closed_loop(&self, k: &Matrix) -> Result<Matrix> {
        if k.shape() != (self.inputs(), self.states()) {
            return Err(Error::Dimension(format!(
                "gain must be {}x{}, got {}x{}",
                self.inputs(),
                self.states(),
                k.rows(),
                k.cols()
            )));
        }
        Ok(&self.a + &(&self.b * k))
    }

    /// PBH test: every eigenvalue μ of A with |μ| ≥ 1 must leave
    /// `[μI − A, B]` with full row rank.
    pub fn is_stabilizable(&self) -> bool {
        let n = self.states();
        let m = self.inputs();
        let Ok(eig) = eigenvalues(&self.a) else {
            return false;
        };
        eig.values.iter().filter(|mu| mu.norm() >= 1.0 - 1e-10).all(|mu| {
            // complex [μI − A, B] embedded as a real matrix of twice the size
            let mut re = Matrix::zeros(n, n + m);
            let mut im = Matrix::zeros(n, n + m);
            for i in 0..n {
                for j in 0..n {
                    re[(i, j)] = -self.a[(i, j)];
                }
                re[(i, i)] += mu.re;
                im[(i, i)] = mu.im;
                for j in 0..m {
                    re[(i, n + j)] = self.b[(i, j)];
                }
            }
            let neg_im = im.scale(-1.0);
            let embedded = Matrix::block(&[
                vec![Some(&re), Some(&neg_im)],
                vec![Some(&im), Some(&re)],
            ]);
            rank(&embedded, 1e-9) == 2 * n
        })
    }
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

    #[test]
    fn stabilizability_examples() {
        assert!(steering().is_stabilizable());
        let unstable = SystemModel::new(Matrix::from_diag(&[2.0, 0.5]), Matrix::zeros(2, 1)).unwrap();
        assert!(!unstable.is_stabilizable());
        let zero = SystemModel::new(Matrix::zeros(2, 2), Matrix::zeros(2, 1)).unwrap();
        assert!(zero.is_stabilizable());
    }

    #[test]
    fn jordan_block_without_input_is_not_stabilizable() {
        let a = Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        let s = SystemModel::new(a.clone(), Matrix::zeros(2, 1)).unwrap();
        assert!(!s.is_stabilizable());
        // input acting only on the first state cannot reach the second
        let s = SystemModel::new(a.clone(), Matrix::from_rows(&[[1.0], [0.0]]).unwrap()).unwrap();
        assert!(!s.is_stabilizable());
        let s = SystemModel::new(a, Matrix::from_rows(&[[0.0], [1.0]]).unwrap()).unwrap();
        assert!(s.is_stabilizable());
    }

    #[test]
    fn complex_unstable_mode() {
        // rotation scaled by 1.1 with no input
        let a = Matrix::from_rows(&[[0.0, -1.1], [1.1, 0.0]]).unwrap();
        assert!(!SystemModel::new(a.clone(), Matrix::zeros(2, 1)).unwrap().is_stabilizable());
        assert!(SystemModel::new(a, Matrix::from_rows(&[[1.0], [0.0]]).unwrap())
            .unwrap()
            .is_stabilizable());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SystemModel::new(Matrix::zeros(2, 3), Matrix::zeros(2, 1)).is_err());
        assert!(SystemModel::new(Matrix::zeros(2, 2), Matrix::zeros(3, 1)).is_err());
    }
}
