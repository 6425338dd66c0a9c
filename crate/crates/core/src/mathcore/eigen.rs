//! Hermitian eigendecomposition (cyclic complex Jacobi) and singular values
//! (one-sided Hestenes-Jacobi). Both target the small matrices the simulator
//! works with, where Jacobi methods give high relative accuracy.

use num_complex::Complex64;

use super::{ComplexMatrix, MathError};

/// Relative tolerance on `‖M − Mᴴ‖` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default relative singular-value threshold for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let lambda: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let d = ComplexMatrix::diag(&lambda);
        debug_assert_eq!(d.rows(), n);
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<(), MathError> {
    if !m.is_square() {
        return Err(MathError::NotSquare);
    }
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL * scale && defect > 0.0 {
        return Err(MathError::NotHermitian { defect });
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>, MathError> {
    Ok(hermitian_eigen(m)?.values)
}

/// Full eigendecomposition `M = Q Λ Qᴴ` of a Hermitian matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen, MathError> {
    check_hermitian(m)?;
    let n = m.rows();
    // Symmetrize so round-off in the input does not leak into the rotations.
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale * 1e-2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = D·P with D = diag(1, e^{-iφ}) on (p, q); Gᴴ A G zeroes (p, q).
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Ok(HermitianEigen { values, vectors })
}

/// Singular values, sorted descending, `min(rows, cols)` of them.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    // Work on the orientation with fewer columns.
    let a = if m.cols() > m.rows() { m.adjoint() } else { m.clone() };
    let (rows, cols) = a.shape();
    let mut columns: Vec<Vec<Complex64>> = (0..cols).map(|j| a.column(j)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha: f64 = columns[i].iter().map(Complex64::norm_sqr).sum();
                let beta: f64 = columns[j].iter().map(Complex64::norm_sqr).sum();
                let gamma: Complex64 = columns[i]
                    .iter()
                    .zip(&columns[j])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let xi = columns[i][k];
                    let xj = columns[j][k] * phase.conj();
                    columns[i][k] = xi * c - xj * s;
                    columns[j][k] = xi * s + xj * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = columns
        .iter()
        .map(|col| col.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv.truncate(rows.min(cols));
    sv
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank(m: &ComplexMatrix, rel_tol: f64) -> usize {
    assert!(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol must lie in (0, 1)");
    let sv = singular_values(m);
    let largest = sv.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * largest).count()
}
