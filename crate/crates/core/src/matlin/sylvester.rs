use super::schur::{block_eigenvalues, diagonal_blocks};
use super::{real_schur, LinalgError, Matrix, SchurOptions};

/// Settings for [`solve_sylvester_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SylvesterOptions {
    pub schur: SchurOptions,
    /// An eigenvalue pair with `|λ(A) + λ(B)| < pencil_tol·(‖A‖_F + ‖B‖_F)`
    /// is reported as a singular pencil.
    pub pencil_tol: f64,
}

impl Default for SylvesterOptions {
    fn default() -> Self {
        SylvesterOptions {
            schur: SchurOptions::default(),
            pencil_tol: 1e-12,
        }
    }
}

/// Solves `A·W + W·B = C` by the Bartels–Stewart method with default options.
pub fn solve_sylvester(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Matrix, LinalgError> {
    solve_sylvester_with(a, b, c, &SylvesterOptions::default())
}

/// `‖A·W + W·B − C‖_F`.
pub fn sylvester_residual(a: &Matrix, w: &Matrix, b: &Matrix, c: &Matrix) -> Result<f64, LinalgError> {
    let r = a.matmul(w)?.add(&w.matmul(b)?)?.sub(c)?;
    Ok(r.frobenius_norm())
}

/// Solves `A·W + W·B = C` for `W`, with `A` k×k, `B` d×d and `C` k×d.
///
/// Both coefficient matrices are reduced to real Schur form, the transformed
/// right-hand side is solved block column by block column against the
/// quasi-triangular factors, and the result is rotated back.
pub fn solve_sylvester_with(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    opts: &SylvesterOptions,
) -> Result<Matrix, LinalgError> {
    LinalgError::require_square("solve_sylvester", a)?;
    LinalgError::require_square("solve_sylvester", b)?;
    if c.rows() != a.rows() || c.cols() != b.rows() {
        return Err(LinalgError::dims(
            "solve_sylvester",
            (a.rows(), b.rows()),
            c.shape(),
        ));
    }
    c.ensure_finite("solve_sylvester")?;
    let (k, d) = c.shape();
    if k == 0 || d == 0 {
        return Ok(Matrix::zeros(k, d));
    }

    let sa = real_schur(a, opts.schur.budget(k), opts.schur.tol)?;
    let sb = real_schur(b, opts.schur.budget(d), opts.schur.tol)?;

    let threshold = opts.pencil_tol * (a.frobenius_norm() + b.frobenius_norm());
    check_pencil(&sa.t, &sb.t, threshold)?;

    let f = sa.q.t_matmul(c)?.matmul(&sb.q)?;
    let y = solve_quasi_triangular(&sa.t, &sb.t, &f, threshold)?;
    let w = sa.q.matmul(&y)?.matmul_t(&sb.q)?;
    w.ensure_finite("solve_sylvester")?;
    Ok(w)
}

fn check_pencil(ta: &Matrix, tb: &Matrix, threshold: f64) -> Result<(), LinalgError> {
    let ea = block_eigenvalues(ta);
    let eb = block_eigenvalues(tb);
    let mut worst = f64::INFINITY;
    for &(ar, ai) in &ea {
        for &(br, bi) in &eb {
            worst = worst.min((ar + br).hypot(ai + bi));
        }
    }
    if worst < threshold || worst == 0.0 {
        return Err(LinalgError::SingularPencil {
            gap: worst,
            threshold,
        });
    }
    Ok(())
}

/// Solves `Ta·Y + Y·Tb = F` with both factors quasi-upper-triangular.
fn solve_quasi_triangular(
    ta: &Matrix,
    tb: &Matrix,
    f: &Matrix,
    threshold: f64,
) -> Result<Matrix, LinalgError> {
    let (k, d) = f.shape();
    let a_blocks = diagonal_blocks(ta);
    let b_blocks = diagonal_blocks(tb);
    let mut y = Matrix::zeros(k, d);

    for &(j, nb) in &b_blocks {
        // right-hand side for this block column: F_j − Σ_{i<j} Y_i·Tb[i, j]
        let mut rhs = vec![[0.0f64; 2]; k];
        for (c, col) in (j..j + nb).enumerate() {
            let fcol = f.column(col);
            for r in 0..k {
                rhs[r][c] = fcol[r];
            }
            for i in 0..j {
                let tij = tb[(i, col)];
                if tij == 0.0 {
                    continue;
                }
                let ycol = y.column(i);
                for r in 0..k {
                    rhs[r][c] -= ycol[r] * tij;
                }
            }
        }
        let bjj = [
            [tb[(j, j)], if nb == 2 { tb[(j, j + 1)] } else { 0.0 }],
            [
                if nb == 2 { tb[(j + 1, j)] } else { 0.0 },
                if nb == 2 { tb[(j + 1, j + 1)] } else { 0.0 },
            ],
        ];

        // back-substitution over the diagonal blocks of Ta
        for &(p, na) in a_blocks.iter().rev() {
            let mut local = [[0.0f64; 2]; 2];
            for ri in 0..na {
                for c in 0..nb {
                    let mut s = rhs[p + ri][c];
                    for q in p + na..k {
                        s -= ta[(p + ri, q)] * y[(q, j + c)];
                    }
                    local[ri][c] = s;
                }
            }
            let app = [
                [ta[(p, p)], if na == 2 { ta[(p, p + 1)] } else { 0.0 }],
                [
                    if na == 2 { ta[(p + 1, p)] } else { 0.0 },
                    if na == 2 { ta[(p + 1, p + 1)] } else { 0.0 },
                ],
            ];
            let z = small_sylvester(&app, na, &bjj, nb, &local, threshold)?;
            for ri in 0..na {
                for c in 0..nb {
                    y[(p + ri, j + c)] = z[ri][c];
                }
            }
        }
    }
    Ok(y)
}

/// Solves the at most 4×4 system `A·Z + Z·B = R` for one pair of diagonal
/// blocks via its Kronecker form, with complete pivoting.
fn small_sylvester(
    a: &[[f64; 2]; 2],
    na: usize,
    b: &[[f64; 2]; 2],
    nb: usize,
    r: &[[f64; 2]; 2],
    threshold: f64,
) -> Result<[[f64; 2]; 2], LinalgError> {
    let n = na * nb;
    let mut m = [[0.0f64; 4]; 4];
    let mut rhs = [0.0f64; 4];
    // unknown index: z[i][c] ↦ c·na + i
    for c in 0..nb {
        for i in 0..na {
            let row = c * na + i;
            rhs[row] = r[i][c];
            for i2 in 0..na {
                m[row][c * na + i2] += a[i][i2];
            }
            for c2 in 0..nb {
                m[row][c2 * na + i] += b[c2][c];
            }
        }
    }

    let mut col_perm = [0usize, 1, 2, 3];
    for step in 0..n {
        let (mut pr, mut pc, mut best) = (step, step, -1.0);
        for (i, row) in m.iter().enumerate().take(n).skip(step) {
            for (jj, v) in row.iter().enumerate().take(n).skip(step) {
                if v.abs() > best {
                    best = v.abs();
                    pr = i;
                    pc = jj;
                }
            }
        }
        if best == 0.0 || best < threshold * f64::EPSILON {
            return Err(LinalgError::SingularPencil {
                gap: best,
                threshold,
            });
        }
        m.swap(step, pr);
        rhs.swap(step, pr);
        for row in m.iter_mut() {
            row.swap(step, pc);
        }
        col_perm.swap(step, pc);
        for i in step + 1..n {
            let factor = m[i][step] / m[step][step];
            if factor == 0.0 {
                continue;
            }
            for jj in step..n {
                m[i][jj] -= factor * m[step][jj];
            }
            rhs[i] -= factor * rhs[step];
        }
    }
    let mut sol = [0.0f64; 4];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for jj in i + 1..n {
            s -= m[i][jj] * sol[jj];
        }
        sol[i] = s / m[i][i];
    }
    let mut z = [[0.0f64; 2]; 2];
    for (pos, &var) in col_perm.iter().enumerate().take(n) {
        z[var % na][var / na] = sol[pos];
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case() {
        let w = solve_sylvester(
            &Matrix::from_rows(&[[2.0]]),
            &Matrix::from_rows(&[[3.0]]),
            &Matrix::from_rows(&[[10.0]]),
        )
        .unwrap();
        assert!((w[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn identity_case() {
        let i2 = Matrix::identity(2);
        let w = solve_sylvester(&i2, &i2, &i2.scale(2.0)).unwrap();
        assert!(w.max_abs_diff(&i2).unwrap() < 1e-15);
    }

    #[test]
    fn complex_blocks_on_both_sides() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 0.0], [-2.0, 1.0, 0.5], [0.0, 0.0, 3.0]]);
        let b = Matrix::from_rows(&[[0.5, -1.5], [1.5, 0.5]]);
        let c = Matrix::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.0, 4.0]]);
        let w = solve_sylvester(&a, &b, &c).unwrap();
        let res = sylvester_residual(&a, &w, &b, &c).unwrap();
        assert!(res < 1e-12 * c.frobenius_norm(), "{res:e}");
    }

    #[test]
    fn shared_zero_eigenvalue_is_a_singular_pencil() {
        let a = Matrix::from_diag(&[0.0, 1.0]);
        let b = Matrix::from_diag(&[0.0, 2.0, 3.0]);
        let c = Matrix::zeros(2, 3);
        assert!(matches!(
            solve_sylvester(&a, &b, &c),
            Err(LinalgError::SingularPencil { .. })
        ));
    }

    #[test]
    fn shape_errors() {
        let a = Matrix::identity(2);
        let b = Matrix::identity(3);
        assert!(solve_sylvester(&a, &b, &Matrix::zeros(3, 2)).is_err());
        assert!(solve_sylvester(&Matrix::zeros(2, 3), &b, &Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn small_solver_matches_hand_solution() {
        // [1 2; 0 3]·Z + Z·[4] = R  with Z = [1; 1]  →  R = [7; 7]
        let a = [[1.0, 2.0], [0.0, 3.0]];
        let b = [[4.0, 0.0], [0.0, 0.0]];
        let r = [[7.0, 0.0], [7.0, 0.0]];
        let z = small_sylvester(&a, 2, &b, 1, &r, 1e-12).unwrap();
        assert!((z[0][0] - 1.0).abs() < 1e-15 && (z[1][0] - 1.0).abs() < 1e-15);
    }
}
