use super::{LinalgError, Matrix};

/// LU factorization with partial pivoting, `P·A = L·U`.
///
/// Used for general dense solves, in particular the Kronecker-vectorized
/// form of a Sylvester equation that serves as a cross-check.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &Matrix) -> Result<Self, LinalgError> {
        LinalgError::require_square("lu", a)?;
        a.ensure_finite("lu")?;
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = f64::EPSILON * a.max_abs() * n as f64;
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[(i, k)].abs() > lu[(p, k)].abs() {
                    p = i;
                }
            }
            if lu[(p, k)].abs() <= tiny {
                return Err(LinalgError::Singular { pivot: k });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(p, j)];
                    lu[(p, j)] = lu[(k, j)];
                    lu[(k, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] /= pivot;
            }
            let multipliers: Vec<f64> = lu.column(k)[k + 1..].to_vec();
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj == 0.0 {
                    continue;
                }
                let col = &mut lu.column_mut(j)[k + 1..];
                for (c, &m) in col.iter_mut().zip(&multipliers) {
                    *c -= m * ukj;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        let n = self.lu.rows();
        if rhs.rows() != n {
            return Err(LinalgError::dims("lu solve", self.lu.shape(), rhs.shape()));
        }
        let mut x = Matrix::zeros(n, rhs.cols());
        for c in 0..rhs.cols() {
            let b = rhs.column(c);
            let col = x.column_mut(c);
            for (i, &p) in self.perm.iter().enumerate() {
                col[i] = b[p];
            }
            for i in 0..n {
                let mut s = col[i];
                for p in 0..i {
                    s -= self.lu[(i, p)] * col[p];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for p in i + 1..n {
                    s -= self.lu[(i, p)] * col[p];
                }
                col[i] = s / self.lu[(i, i)];
            }
        }
        Ok(x)
    }
}
