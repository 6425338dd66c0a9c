use num_complex::Complex64;

use super::{ComplexMatrix, MathError};

/// Relative diagonal loading applied once when a plain factorization fails.
pub const JITTER_REL: f64 = 1e-12;

/// Lower-triangular Cholesky factor of a real symmetric PSD matrix, stored
/// row-major as a dense `n × n` array.
#[derive(Debug, Clone, PartialEq)]
pub struct RealCholesky {
    n: usize,
    lower: Vec<f64>,
    jittered: bool,
}

impl RealCholesky {
    /// Factors `a` (row-major `n × n`, symmetric). On failure the diagonal is
    /// loaded once with `JITTER_REL · trace / n` and the factorization retried.
    pub fn factor(n: usize, a: &[f64]) -> Result<Self, MathError> {
        assert_eq!(a.len(), n * n);
        if let Some(lower) = try_factor(n, a, 0.0) {
            return Ok(Self {
                n,
                lower,
                jittered: false,
            });
        }
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let jitter = JITTER_REL * trace.abs().max(f64::MIN_POSITIVE) / n as f64;
        try_factor(n, a, jitter)
            .map(|lower| Self {
                n,
                lower,
                jittered: true,
            })
            .ok_or(MathError::NotPsd)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn jittered(&self) -> bool {
        self.jittered
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    /// `L · v` for complex `v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let row = &self.lower[i * self.n..i * self.n + i + 1];
                row.iter().zip(v).map(|(&l, &x)| x * l).sum()
            })
            .collect()
    }

    /// Solves `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.get(i, k) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.get(k, i) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        y
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        let data = self.lower.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        ComplexMatrix::from_vec(self.n, self.n, data).expect("finite factor")
    }
}

fn try_factor(n: usize, a: &[f64], jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j] + jitter;
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Some(l)
}

/// Symmetric Toeplitz matrix with the given first row, row-major.
pub fn toeplitz(first_row: &[f64]) -> Vec<f64> {
    let n = first_row.len();
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[i * n + j] = first_row[i.abs_diff(j)];
        }
    }
    t
}

/// Real Cholesky factor of the symmetric Toeplitz matrix built from `first_row`.
pub fn real_toeplitz_cholesky(first_row: &[f64]) -> Result<RealCholesky, MathError> {
    if first_row.is_empty() {
        return Err(MathError::Empty);
    }
    RealCholesky::factor(first_row.len(), &toeplitz(first_row))
}

/// Lower-triangular `L` with `L Lᵀ ≈ T` for the symmetric Toeplitz `T`.
pub fn toeplitz_cholesky(first_row: &[f64]) -> Result<ComplexMatrix, MathError> {
    Ok(real_toeplitz_cholesky(first_row)?.to_complex())
}

/// Cholesky factor of a real symmetric PSD matrix held in a `ComplexMatrix`
/// (imaginary parts must vanish).
pub fn real_symmetric_cholesky(m: &ComplexMatrix) -> Result<RealCholesky, MathError> {
    if !m.is_square() {
        return Err(MathError::NotSquare);
    }
    if m.as_slice().iter().any(|z| z.im.abs() > 1e-12) {
        return Err(MathError::NotReal);
    }
    if m.hermitian_defect() > 1e-10 * m.frobenius_norm().max(1.0) {
        return Err(MathError::NotHermitian {
            defect: m.hermitian_defect(),
        });
    }
    let a: Vec<f64> = m.as_slice().iter().map(|z| z.re).collect();
    RealCholesky::factor(m.rows(), &a)
}
