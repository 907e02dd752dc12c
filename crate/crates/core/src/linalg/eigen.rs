//! Eigenvalue routines: cyclic Jacobi for symmetric matrices and Hessenberg
//! reduction followed by Francis double-shift QR for general ones.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Per-eigenvalue iteration cap for the Francis QR sweep.
pub const QR_ITERATION_CAP: usize = 500;

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<Complex64>,
    /// Column eigenvectors when computed (symmetric path only).
    pub vectors: Option<Matrix>,
}

impl EigenResult {
    /// Real parts, for results known to be real.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back ascending with orthonormal eigenvectors in matching
/// columns.
pub fn sym_eig(m: &Matrix, tol: f64) -> Result<EigenResult> {
    m.check_symmetric(tol)?;
    let (values, vectors) = jacobi(m);
    Ok(EigenResult {
        values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        vectors: Some(vectors),
    })
}

/// Ascending eigenvalues of the symmetric part of `m`, no symmetry check.
pub fn sym_eigenvalues(m: &Matrix) -> Vec<f64> {
    jacobi(&m.sym_part()).0
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_sym_eigenvalue(m: &Matrix) -> f64 {
    if m.rows() == 0 {
        return f64::INFINITY;
    }
    sym_eigenvalues(m)[0]
}

fn jacobi(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.rows();
    let mut a = m.sym_part();
    let mut v = Matrix::identity(n);
    let scale = a.norm_fro().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A ← Jᵀ A J on rows/columns p, q
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    (values, vectors)
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &Matrix) -> Result<EigenResult> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut h = m.clone();
    hessenberg(&mut h);
    let values = francis_qr(h)?;
    Ok(EigenResult {
        values,
        vectors: None,
    })
}

/// Maximum eigenvalue modulus.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .values
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max))
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg(h: &mut Matrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let f: f64 = (m..=high).rev().map(|i| ort[i] * h[(i, j)]).sum::<f64>() / hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let f: f64 = (m..=high).rev().map(|j| ort[j] * h[(i, j)]).sum::<f64>() / hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        h[(m, m - 1)] = scale * g;
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
fn francis_qr(mut h: Matrix) -> Result<Vec<Complex64>> {
    let nn = h.rows();
    let mut re = vec![0.0; nn];
    let mut im = vec![0.0; nn];
    if nn == 0 {
        return Ok(Vec::new());
    }
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    while n >= 0 {
        let nu = n as usize;
        // look for a single small sub-diagonal element
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            // one root
            h[(nu, nu)] += exshift;
            re[nu] = h[(nu, nu)];
            im[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            // two roots
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            x = h[(nu, nu)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                re[nu - 1] = x + z;
                re[nu] = re[nu - 1];
                if z != 0.0 {
                    re[nu] = x - w / z;
                }
                im[nu - 1] = 0.0;
                im[nu] = 0.0;
            } else {
                re[nu - 1] = x + p;
                re[nu] = x + p;
                im[nu - 1] = z;
                im[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // form shift
            x = h[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > QR_ITERATION_CAP {
                return Err(Error::NoConvergence {
                    what: "Francis QR",
                    iterations: iter,
                    residual: h[(nu, nu - 1)].abs(),
                });
            }

            // look for two consecutive small sub-diagonal elements
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // double QR step on rows l..=n and columns m..=n
            let mut k = m;
            while k < nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }

    Ok(re
        .into_iter()
        .zip(im)
        .map(|(a, b)| Complex64::new(a, b))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn symmetric_examples() {
        let e = sym_eig(&Matrix::identity(2), 1e-12).unwrap();
        assert_eq!(e.real_values(), vec![1.0, 1.0]);
        let e = sym_eig(&Matrix::from_diag(&[3.0, 2.0]), 1e-12).unwrap();
        assert_eq!(e.real_values(), vec![2.0, 3.0]);

        // quadratic formula on trace 34.64, det 23.763
        let p = m(&[&[1.69, 5.65], &[5.65, 32.95]]);
        let (tr, det) = (34.64_f64, 1.69 * 32.95 - 5.65 * 5.65);
        let disc = (tr * tr - 4.0 * det).sqrt();
        let lo = (tr - disc) / 2.0;
        let hi = (tr + disc) / 2.0;
        let e = sym_eig(&p, 1e-12).unwrap().real_values();
        assert!((e[0] - lo).abs() < 1e-12 && (e[1] - hi).abs() < 1e-12);
        assert!((lo - 0.70).abs() < 0.005 && (hi - 33.94).abs() < 0.005);
    }

    #[test]
    fn symmetric_rejects_asymmetric() {
        assert!(matches!(
            sym_eig(&m(&[&[1.0, 1.0], &[0.0, 1.0]]), 1e-9),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            sym_eig(&Matrix::zeros(2, 3), 1e-9),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn radius_examples() {
        assert!((spectral_radius(&Matrix::identity(3)).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(spectral_radius(&m(&[&[0.0, 1.0], &[0.0, 0.0]])).unwrap(), 0.0);
        let acl = m(&[&[0.9202, -0.2656], &[-0.266, -0.552]]);
        let (tr, det) = (0.3682_f64, 0.9202 * -0.552 - (-0.2656 * -0.266));
        let disc = (tr * tr - 4.0 * det).sqrt();
        let expected = ((tr + disc) / 2.0).abs().max(((tr - disc) / 2.0).abs());
        let rho = spectral_radius(&acl).unwrap();
        assert!((rho - expected).abs() < 1e-12);
        assert!((rho - 0.967).abs() < 5e-4);
    }

    #[test]
    fn rotation_has_complex_pair() {
        let (c, s) = (0.6_f64, 0.8_f64);
        let rot = m(&[&[c, -s, 0.0], &[s, c, 0.0], &[0.0, 0.0, 0.5]]);
        let e = eigenvalues(&rot).unwrap();
        let mut ims: Vec<f64> = e.values.iter().map(|v| v.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 0.8).abs() < 1e-12 && (ims[2] - 0.8).abs() < 1e-12);
        assert!((spectral_radius(&rot).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn companion_matrix_roots() {
        // roots 1, 2, 3, 4: x^4 - 10x^3 + 35x^2 - 50x + 24
        let c = m(&[
            &[10.0, -35.0, 50.0, -24.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let mut re = eigenvalues(&c).unwrap().real_values();
        re.sort_by(f64::total_cmp);
        for (got, want) in re.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }
}
