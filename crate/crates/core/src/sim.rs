//! Closed-loop simulation and trajectory diagnostics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{factor_pd, Matrix};
use crate::system::SystemModel;

/// Feedback law applied during simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Policy {
    /// `u_k = K x_k`.
    Static { k: Matrix },
    /// `u_k = K₁ x_k + K₂ x_{k−1}`.
    TwoStep { k1: Matrix, k2: Matrix },
}

impl Policy {
    fn check(&self, n: usize, m: usize) -> Result<()> {
        let gains: Vec<&Matrix> = match self {
            Policy::Static { k } => vec![k],
            Policy::TwoStep { k1, k2 } => vec![k1, k2],
        };
        for g in gains {
            if g.shape() != (m, n) {
                return Err(Error::Dimension(format!(
                    "gain must be {m}x{n}, got {}x{}",
                    g.rows(),
                    g.cols()
                )));
            }
        }
        Ok(())
    }

    fn input(&self, x: &[f64], x_prev: &[f64]) -> Vec<f64> {
        match self {
            Policy::Static { k } => k.matvec(x),
            Policy::TwoStep { k1, k2 } => {
                let a = k1.matvec(x);
                let b = k2.matvec(x_prev);
                a.iter().zip(&b).map(|(p, q)| p + q).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// x₀ … x_N.
    pub states: Vec<Vec<f64>>,
    /// u₀ … u_{N−1}.
    pub inputs: Vec<Vec<f64>>,
    /// V₀ … V_N with `V = xᵀPx`, when a value matrix was supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.inputs.len()
    }

    /// Attaches `V_k = x_kᵀ P x_k`.
    pub fn with_values(mut self, p: &Matrix) -> Result<Self> {
        let n = self.states.first().map_or(0, Vec::len);
        if p.shape() != (n, n) {
            return Err(Error::Dimension(format!("value matrix must be {n}x{n}")));
        }
        self.values = Some(self.states.iter().map(|x| p.quad_form(x)).collect());
        Ok(self)
    }

    /// CSV with header `k,x1..xn,u1..um,V` (plus `angle` when given), one
    /// row per step, 17 significant digits. Missing cells are empty.
    pub fn to_csv(&self, angles: Option<&[Option<f64>]>) -> String {
        let n = self.states.first().map_or(0, Vec::len);
        let m = self.inputs.first().map_or(0, Vec::len);
        let mut out = String::from("k");
        for i in 1..=n {
            write!(out, ",x{i}").unwrap();
        }
        for i in 1..=m {
            write!(out, ",u{i}").unwrap();
        }
        out.push_str(",V");
        if angles.is_some() {
            out.push_str(",angle");
        }
        out.push('\n');
        for (k, x) in self.states.iter().enumerate() {
            write!(out, "{k}").unwrap();
            for v in x {
                write!(out, ",{}", fmt17(*v)).unwrap();
            }
            match self.inputs.get(k) {
                Some(u) => u.iter().for_each(|v| write!(out, ",{}", fmt17(*v)).unwrap()),
                None => (0..m).for_each(|_| out.push(',')),
            }
            out.push(',');
            if let Some(v) = self.values.as_ref().and_then(|vals| vals.get(k)) {
                out.push_str(&fmt17(*v));
            }
            if let Some(a) = angles {
                out.push(',');
                if let Some(Some(v)) = a.get(k) {
                    out.push_str(&fmt17(*v));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Runs the closed loop for `steps` steps. Two-step policies start with
/// `x₋₁ = x₀`.
pub fn simulate(system: &SystemModel, policy: &Policy, x0: &[f64], steps: usize, p: Option<&Matrix>) -> Result<Trajectory> {
    simulate_from(system, policy, x0, x0, steps, p)
}

/// As [`simulate`] with an explicit `x₋₁`.
pub fn simulate_from(
    system: &SystemModel,
    policy: &Policy,
    x0: &[f64],
    x_prev: &[f64],
    steps: usize,
    p: Option<&Matrix>,
) -> Result<Trajectory> {
    let n = system.states();
    let m = system.inputs();
    policy.check(n, m)?;
    if x0.len() != n || x_prev.len() != n {
        return Err(Error::Dimension(format!("initial states must have length {n}")));
    }
    if steps == 0 {
        return Err(Error::Precondition("at least one step is required".into()));
    }
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps);
    states.push(x0.to_vec());
    let mut prev = x_prev.to_vec();
    for step in 0..steps {
        let x = &states[step];
        let u = policy.input(x, &prev);
        let ax = system.a().matvec(x);
        let bu = system.b().matvec(&u);
        let next: Vec<f64> = ax.iter().zip(&bu).map(|(a, b)| a + b).collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: step + 1 });
        }
        prev = x.clone();
        inputs.push(u);
        states.push(next);
    }
    let traj = Trajectory {
        states,
        inputs,
        values: None,
    };
    match p {
        Some(p) => traj.with_values(p),
        None => Ok(traj),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionProfile {
    /// `V_{k+1} / V_k` for every k with `V_k > 1e-300`.
    pub ratios: Vec<(usize, f64)>,
    pub max_ratio: Option<f64>,
    /// First k with `V_{k+1} > (λ + 1e-9) V_k`.
    pub first_violation: Option<usize>,
}

/// Per-step contraction of `V = xᵀPx` along a trajectory.
pub fn contraction_profile(traj: &Trajectory, p: &Matrix, lambda: f64) -> Result<ContractionProfile> {
    factor_pd(p)?.into_result()?;
    let values: Vec<f64> = match &traj.values {
        Some(v) => v.clone(),
        None => traj.states.iter().map(|x| p.quad_form(x)).collect(),
    };
    let ratios: Vec<(usize, f64)> = values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] > 1e-300)
        .map(|(k, w)| (k, w[1] / w[0]))
        .collect();
    let max_ratio = ratios.iter().map(|r| r.1).reduce(f64::max);
    let first_violation = ratios.iter().find(|r| r.1 > lambda + 1e-9).map(|r| r.0);
    Ok(ContractionProfile {
        ratios,
        max_ratio,
        first_violation,
    })
}

/// Angle between `a` and `b` in [0, π], accurate near 0 and π.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    let (mut d, mut s) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (u, v) = (x / na, y / nb);
        d += (u - v) * (u - v);
        s += (u + v) * (u + v);
    }
    2.0 * d.sqrt().atan2(s.sqrt())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Angle between each step `x_{k+1} − x_k` and the descent direction
/// `−2Px_k`. Steps with `‖x_k‖ ≤ 1e-12` or a vanishing step are `None`.
pub fn descent_angles(traj: &Trajectory, p: &Matrix) -> Result<Vec<Option<f64>>> {
    factor_pd(p)?.into_result()?;
    Ok(traj
        .states
        .windows(2)
        .map(|w| {
            let x = &w[0];
            let step: Vec<f64> = w[1].iter().zip(x).map(|(a, b)| a - b).collect();
            let descent: Vec<f64> = p.matvec(x).iter().map(|v| -2.0 * v).collect();
            let nx = norm(x);
            if nx <= 1e-12 || norm(&step) <= 1e-14 * nx || norm(&descent) == 0.0 {
                None
            } else {
                Some(angle_between(&step, &descent))
            }
        })
        .collect())
}

/// Closed polylines `{x : xᵀPx = c}` for a 2×2 `P`, `resolution` distinct
/// points per level with the first repeated at the end.
pub fn level_sets(p: &Matrix, levels: &[f64], resolution: usize) -> Result<Vec<Vec<[f64; 2]>>> {
    if p.shape() != (2, 2) {
        return Err(Error::UnsupportedDimension(p.rows()));
    }
    if resolution < 3 {
        return Err(Error::Precondition("resolution must be at least 3".into()));
    }
    if levels.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
        return Err(Error::Precondition("levels must be positive".into()));
    }
    let l = factor_pd(p)?.into_result()?;
    // x = √c L⁻ᵀ u with |u| = 1
    let (l11, l21, l22) = (l[(0, 0)], l[(1, 0)], l[(1, 1)]);
    Ok(levels
        .iter()
        .map(|&c| {
            let r = c.sqrt();
            let mut curve: Vec<[f64; 2]> = (0..resolution)
                .map(|i| {
                    let th = std::f64::consts::TAU * i as f64 / resolution as f64;
                    let (u1, u2) = (th.cos(), th.sin());
                    let x2 = u2 / l22;
                    let x1 = (u1 - l21 * x2) / l11;
                    [r * x1, r * x2]
                })
                .collect();
            curve.push(curve[0]);
            curve
        })
        .collect())
}

/// Level sets of the restriction of `xᵀPx` to the plane of coordinates
/// `(i, j)`.
pub fn level_sets_slice(
    p: &Matrix,
    coords: (usize, usize),
    levels: &[f64],
    resolution: usize,
) -> Result<Vec<Vec<[f64; 2]>>> {
    let (i, j) = coords;
    if i == j || i >= p.rows() || j >= p.rows() || !p.is_square() {
        return Err(Error::Dimension(format!("invalid coordinate pair ({i}, {j})")));
    }
    let sub = Matrix::from_rows(&[[p[(i, i)], p[(i, j)]], [p[(j, i)], p[(j, j)]]])?;
    level_sets(&sub, levels, resolution)
}

/// CSV with header `level,x1,x2`, one row per polyline vertex.
pub fn level_sets_csv(levels: &[f64], curves: &[Vec<[f64; 2]>]) -> String {
    let mut out = String::from("level,x1,x2\n");
    for (c, curve) in levels.iter().zip(curves) {
        for pt in curve {
            writeln!(out, "{},{},{}", fmt17(*c), fmt17(pt[0]), fmt17(pt[1])).unwrap();
        }
    }
    out
}
