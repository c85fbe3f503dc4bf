use super::{LinalgError, Matrix};

/// Lower-triangular Cholesky factor `L` with `A = L·Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors a symmetric positive definite matrix. Only the lower triangle
    /// of `a` is read.
    pub fn new(a: &Matrix) -> Result<Self, LinalgError> {
        LinalgError::require_square("cholesky", a)?;
        a.ensure_finite("cholesky")?;
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a[(j, j)];
            for p in 0..j {
                diag -= l[(j, p)] * l[(j, p)];
            }
            if diag <= 0.0 || !diag.is_finite() {
                return Err(LinalgError::NotPositiveDefinite {
                    pivot: j,
                    value: diag,
                });
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for p in 0..j {
                    s -= l[(i, p)] * l[(j, p)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        let n = self.l.rows();
        if rhs.rows() != n {
            return Err(LinalgError::dims("cholesky solve", self.l.shape(), rhs.shape()));
        }
        let mut x = rhs.clone();
        for c in 0..x.cols() {
            let col = x.column_mut(c);
            // L y = b
            for i in 0..n {
                let mut s = col[i];
                for p in 0..i {
                    s -= self.l[(i, p)] * col[p];
                }
                col[i] = s / self.l[(i, i)];
            }
            // Lᵀ x = y
            for i in (0..n).rev() {
                let mut s = col[i];
                for p in i + 1..n {
                    s -= self.l[(p, i)] * col[p];
                }
                col[i] = s / self.l[(i, i)];
            }
        }
        Ok(x)
    }
}

/// Solves `A·X = rhs` for symmetric positive definite `A`.
pub fn solve_spd(a: &Matrix, rhs: &Matrix) -> Result<Matrix, LinalgError> {
    if a.rows() != rhs.rows() {
        return Err(LinalgError::dims("solve_spd", a.shape(), rhs.shape()));
    }
    let x = Cholesky::new(a)?.solve(rhs)?;
    x.ensure_finite("solve_spd")?;
    Ok(x)
}
