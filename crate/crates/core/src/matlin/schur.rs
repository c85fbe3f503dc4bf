use super::{LinalgError, Matrix};

/// Relative size below which a subdiagonal entry is treated as zero.
pub const DEFLATION_TOL: f64 = 1e-12;

/// Iteration budget and deflation tolerance for [`real_schur`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurOptions {
    /// Total Francis sweeps allowed; `None` means `30·n`.
    pub max_iters: Option<usize>,
    pub tol: f64,
}

impl Default for SchurOptions {
    fn default() -> Self {
        SchurOptions {
            max_iters: None,
            tol: DEFLATION_TOL,
        }
    }
}

impl SchurOptions {
    pub fn budget(&self, n: usize) -> usize {
        self.max_iters.unwrap_or(30 * n.max(1))
    }
}

/// Real Schur decomposition `A = Q·T·Qᵀ`.
///
/// `t` is quasi-upper-triangular: 1×1 diagonal blocks carry real eigenvalues,
/// 2×2 blocks carry complex conjugate pairs in standardized form (equal
/// diagonal entries, off-diagonals of opposite sign).
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub q: Matrix,
    pub t: Matrix,
}

impl SchurForm {
    /// Diagonal block layout as `(start, size)` pairs, top to bottom.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        diagonal_blocks(&self.t)
    }

    /// Eigenvalues as `(re, im)` pairs in block order.
    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        block_eigenvalues(&self.t)
    }
}

pub(crate) fn diagonal_blocks(t: &Matrix) -> Vec<(usize, usize)> {
    let n = t.rows();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            out.push((i, 2));
            i += 2;
        } else {
            out.push((i, 1));
            i += 1;
        }
    }
    out
}

pub(crate) fn block_eigenvalues(t: &Matrix) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(t.rows());
    for (i, size) in diagonal_blocks(t) {
        if size == 1 {
            out.push((t[(i, i)], 0.0));
        } else {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mean = 0.5 * (a + d);
            let half = 0.5 * (a - d);
            let disc = half * half + b * c;
            if disc >= 0.0 {
                let r = disc.sqrt();
                out.push((mean + r, 0.0));
                out.push((mean - r, 0.0));
            } else {
                let im = (-disc).sqrt();
                out.push((mean, im));
                out.push((mean, -im));
            }
        }
    }
    out
}

/// Computes the real Schur form of a square matrix.
///
/// Householder reduction to upper Hessenberg form followed by implicit
/// Francis double-shift QR sweeps. `max_iters` bounds the total number of
/// sweeps; `tol` is the deflation threshold relative to the neighbouring
/// diagonal magnitudes.
pub fn real_schur(a: &Matrix, max_iters: usize, tol: f64) -> Result<SchurForm, LinalgError> {
    LinalgError::require_square("real_schur", a)?;
    a.ensure_finite("real_schur")?;
    let n = a.rows();
    let mut h = a.clone();
    let mut q = Matrix::identity(n);
    if n == 0 {
        return Ok(SchurForm { q, t: h });
    }
    hessenberg(&mut h, &mut q);
    francis(&mut h, &mut q, max_iters, tol)?;
    for j in 0..n {
        for i in j + 2..n {
            h[(i, j)] = 0.0;
        }
    }
    Ok(SchurForm { q, t: h })
}

/// Householder vector for `x`: returns `(v, beta)` with `v[0] = 1` such that
/// `(I - beta·v·vᵀ)·x` is a multiple of the first unit vector.
fn householder(x: &[f64]) -> (Vec<f64>, f64) {
    let mut v = x.to_vec();
    let sigma: f64 = x[1..].iter().map(|t| t * t).sum();
    if sigma == 0.0 {
        return (v, 0.0);
    }
    let x0 = x[0];
    let mu = (x0 * x0 + sigma).sqrt();
    let v0 = if x0 <= 0.0 { x0 - mu } else { -sigma / (x0 + mu) };
    let beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
    v[0] = 1.0;
    for t in v[1..].iter_mut() {
        *t /= v0;
    }
    (v, beta)
}

/// `M[rows, cols] ← (I - beta·v·vᵀ)·M[rows, cols]` with `rows = r0..r0+v.len()`.
fn reflect_rows(m: &mut Matrix, v: &[f64], beta: f64, r0: usize, cols: std::ops::Range<usize>) {
    if beta == 0.0 {
        return;
    }
    for j in cols {
        let col = &mut m.column_mut(j)[r0..r0 + v.len()];
        let s: f64 = col.iter().zip(v).map(|(c, vi)| c * vi).sum::<f64>() * beta;
        for (c, vi) in col.iter_mut().zip(v) {
            *c -= s * vi;
        }
    }
}

/// `M[rows, cols] ← M[rows, cols]·(I - beta·v·vᵀ)` with `cols = c0..c0+v.len()`.
fn reflect_cols(m: &mut Matrix, v: &[f64], beta: f64, c0: usize, rows: std::ops::Range<usize>) {
    if beta == 0.0 {
        return;
    }
    for i in rows {
        let s: f64 = v.iter().enumerate().map(|(p, vi)| m[(i, c0 + p)] * vi).sum::<f64>() * beta;
        for (p, vi) in v.iter().enumerate() {
            m[(i, c0 + p)] -= s * vi;
        }
    }
}

fn hessenberg(h: &mut Matrix, q: &mut Matrix) {
    let n = h.rows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = h.column(k)[k + 1..].to_vec();
        let (v, beta) = householder(&x);
        if beta == 0.0 {
            continue;
        }
        reflect_rows(h, &v, beta, k + 1, k..n);
        reflect_cols(h, &v, beta, k + 1, 0..n);
        reflect_cols(q, &v, beta, k + 1, 0..n);
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
}

fn negligible(h: &Matrix, i: usize, tol: f64, fallback: f64) -> bool {
    let mut scale = h[(i - 1, i - 1)].abs() + h[(i, i)].abs();
    if scale == 0.0 {
        scale = fallback;
    }
    h[(i, i - 1)].abs() <= tol * scale
}

fn francis(h: &mut Matrix, q: &mut Matrix, max_iters: usize, tol: f64) -> Result<(), LinalgError> {
    let n = h.rows();
    let fallback = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            return Ok(());
        }
        // find the top of the unreduced block ending at `hi`
        let mut l = hi;
        while l > 0 {
            if negligible(h, l, tol, fallback) {
                h[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        if l + 1 == hi {
            standardize_block(h, q, l);
            if hi < 2 {
                return Ok(());
            }
            hi -= 2;
            its = 0;
            continue;
        }
        if total >= max_iters {
            return Err(LinalgError::NoConvergence { iters: total });
        }
        total += 1;
        its += 1;

        let (s, t) = shifts(h, l, hi, its);
        francis_sweep(h, q, l, hi, s, t);
    }
}

/// Sum and product of the two shifts for a sweep on `h[l..=hi, l..=hi]`.
fn shifts(h: &Matrix, l: usize, hi: usize, its: usize) -> (f64, f64) {
    let (h11, h12, h21, h22) = if its % 20 == 10 {
        let s = h[(l + 1, l)].abs() + h[(l + 2, l + 1)].abs();
        let h11 = 0.75 * s + h[(l, l)];
        (h11, -0.4375 * s, s, h11)
    } else if its % 20 == 0 {
        let s = h[(hi, hi - 1)].abs() + h[(hi - 1, hi - 2)].abs();
        let h11 = 0.75 * s + h[(hi, hi)];
        (h11, -0.4375 * s, s, h11)
    } else {
        (
            h[(hi - 1, hi - 1)],
            h[(hi - 1, hi)],
            h[(hi, hi - 1)],
            h[(hi, hi)],
        )
    };
    (h11 + h22, h11 * h22 - h12 * h21)
}

fn francis_sweep(h: &mut Matrix, q: &mut Matrix, l: usize, hi: usize, s: f64, t: f64) {
    let n = h.rows();
    let h00 = h[(l, l)];
    let h10 = h[(l + 1, l)];
    let mut x = h00 * h00 + h[(l, l + 1)] * h10 - s * h00 + t;
    let mut y = h10 * (h00 + h[(l + 1, l + 1)] - s);
    let mut z = h10 * h[(l + 2, l + 1)];
    for k in l..hi - 1 {
        let scale = x.abs() + y.abs() + z.abs();
        let (v, beta) = if scale == 0.0 {
            (vec![1.0, 0.0, 0.0], 0.0)
        } else {
            householder(&[x / scale, y / scale, z / scale])
        };
        let c0 = if k > l { k - 1 } else { l };
        reflect_rows(h, &v, beta, k, c0..n);
        let r_end = (k + 3).min(hi) + 1;
        reflect_cols(h, &v, beta, k, 0..r_end);
        reflect_cols(q, &v, beta, k, 0..n);
        if k > l {
            h[(k + 1, k - 1)] = 0.0;
            h[(k + 2, k - 1)] = 0.0;
        }
        x = h[(k + 1, k)];
        y = h[(k + 2, k)];
        if k + 3 <= hi {
            z = h[(k + 3, k)];
        }
    }
    let k = hi - 1;
    let (v, beta) = householder(&[x, y]);
    reflect_rows(h, &v, beta, k, (k - 1)..n);
    reflect_cols(h, &v, beta, k, 0..hi + 1);
    reflect_cols(q, &v, beta, k, 0..n);
    h[(hi, hi - 2)] = 0.0;
}

/// Rotates the 2×2 diagonal block at `(i, i)` into standard form: upper
/// triangular when its eigenvalues are real, equal diagonal otherwise.
fn standardize_block(h: &mut Matrix, q: &mut Matrix, i: usize) {
    let n = h.rows();
    let (a, b, c, d) = (h[(i, i)], h[(i, i + 1)], h[(i + 1, i)], h[(i + 1, i + 1)]);
    let (aa, bb, cc, dd, cs, sn) = lanv2(a, b, c, d);
    // rows i, i+1 to the right of the block
    for j in i + 2..n {
        let (x, y) = (h[(i, j)], h[(i + 1, j)]);
        h[(i, j)] = cs * x + sn * y;
        h[(i + 1, j)] = cs * y - sn * x;
    }
    // columns i, i+1 above the block
    for r in 0..i {
        let (x, y) = (h[(r, i)], h[(r, i + 1)]);
        h[(r, i)] = cs * x + sn * y;
        h[(r, i + 1)] = cs * y - sn * x;
    }
    for r in 0..n {
        let (x, y) = (q[(r, i)], q[(r, i + 1)]);
        q[(r, i)] = cs * x + sn * y;
        q[(r, i + 1)] = cs * y - sn * x;
    }
    h[(i, i)] = aa;
    h[(i, i + 1)] = bb;
    h[(i + 1, i)] = cc;
    h[(i + 1, i + 1)] = dd;
}

fn sign(a: f64, b: f64) -> f64 {
    // Fortran SIGN: |a| with the sign of b, treating +0 as positive
    if b >= 0.0 || (b == 0.0 && b.is_sign_positive()) {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Schur factorization of a real 2×2 nonsymmetric matrix in standardized
/// form (LAPACK `dlanv2`). Returns `(a, b, c, d, cs, sn)` such that
/// `[a b; c d]_in = R·[a b; c d]_out·Rᵀ` with `R = [cs -sn; sn cs]`.
fn lanv2(
    mut a: f64,
    mut b: f64,
    mut c: f64,
    mut d: f64,
) -> (f64, f64, f64, f64, f64, f64) {
    let eps = f64::EPSILON;
    let (mut cs, mut sn);
    if c == 0.0 {
        cs = 1.0;
        sn = 0.0;
    } else if b == 0.0 {
        cs = 0.0;
        sn = 1.0;
        std::mem::swap(&mut a, &mut d);
        b = -c;
        c = 0.0;
    } else if a - d == 0.0 && sign(1.0, b) != sign(1.0, c) {
        cs = 1.0;
        sn = 0.0;
    } else {
        let temp = a - d;
        let mut p = 0.5 * temp;
        let bcmax = b.abs().max(c.abs());
        let bcmis = b.abs().min(c.abs()) * sign(1.0, b) * sign(1.0, c);
        let scale = p.abs().max(bcmax);
        let mut z = p / scale * p + bcmax / scale * bcmis;
        if z >= 4.0 * eps {
            // real eigenvalues
            z = p + sign(scale.sqrt() * z.sqrt(), p);
            a = d + z;
            d -= bcmax / z * bcmis;
            let tau = c.hypot(z);
            cs = z / tau;
            sn = c / tau;
            b -= c;
            c = 0.0;
        } else {
            // complex or nearly equal real eigenvalues: equalize the diagonal
            let sigma = b + c;
            let tau = sigma.hypot(temp);
            cs = (0.5 * (1.0 + sigma.abs() / tau)).sqrt();
            sn = -(p / (tau * cs)) * sign(1.0, sigma);
            let aa = a * cs + b * sn;
            let bb = -a * sn + b * cs;
            let cc = c * cs + d * sn;
            let dd = -c * sn + d * cs;
            a = aa * cs + cc * sn;
            b = bb * cs + dd * sn;
            c = -aa * sn + cc * cs;
            d = -bb * sn + dd * cs;
            let mid = 0.5 * (a + d);
            a = mid;
            d = mid;
            if c != 0.0 {
                if b != 0.0 {
                    if sign(1.0, b) == sign(1.0, c) {
                        // real eigenvalues after all
                        let sab = b.abs().sqrt();
                        let sac = c.abs().sqrt();
                        p = sign(sab * sac, c);
                        let tau = 1.0 / (b + c).abs().sqrt();
                        a = mid + p;
                        d = mid - p;
                        b -= c;
                        c = 0.0;
                        let cs1 = sab * tau;
                        let sn1 = sac * tau;
                        let t = cs * cs1 - sn * sn1;
                        sn = cs * sn1 + sn * cs1;
                        cs = t;
                    }
                } else {
                    b = -c;
                    c = 0.0;
                    let t = cs;
                    cs = -sn;
                    sn = t;
                }
            }
        }
    }
    (a, b, c, d, cs, sn)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(a: &Matrix, f: &SchurForm) {
        let n = a.rows();
        let qtq = f.q.t_matmul(&f.q).unwrap();
        let orth = qtq.sub(&Matrix::identity(n)).unwrap().frobenius_norm();
        assert!(orth <= 1e-10 * n as f64, "orthogonality {orth:e}");
        let rec = f.q.matmul(&f.t).unwrap().matmul_t(&f.q).unwrap();
        let err = rec.sub(a).unwrap().frobenius_norm();
        assert!(err <= 1e-8 * a.frobenius_norm().max(f64::MIN_POSITIVE), "reconstruction {err:e}");
        for j in 0..n {
            for i in j + 2..n {
                assert_eq!(f.t[(i, j)], 0.0);
            }
        }
        for j in 0..n.saturating_sub(2) {
            assert!(f.t[(j + 1, j)] == 0.0 || f.t[(j + 2, j + 1)] == 0.0, "adjacent subdiagonals");
        }
    }

    fn schur(a: &Matrix) -> SchurForm {
        let f = real_schur(a, 30 * a.rows(), DEFLATION_TOL).unwrap();
        check_invariants(a, &f);
        f
    }

    #[test]
    fn diagonal_input_is_fixed() {
        let a = Matrix::from_diag(&[3.0, -1.0, 2.5, 0.0]);
        let f = schur(&a);
        assert_eq!(f.t, a);
        for i in 0..4 {
            assert_eq!(f.q[(i, i)].abs(), 1.0);
        }
    }

    #[test]
    fn rotation_generator_is_a_single_complex_block() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]);
        let f = schur(&a);
        assert_eq!(f.blocks(), vec![(0, 2)]);
        let ev = f.eigenvalues();
        assert!(ev[0].0.abs() < 1e-14 && (ev[0].1.abs() - 1.0).abs() < 1e-14);
        assert!(ev[1].0.abs() < 1e-14 && (ev[1].1.abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn real_2x2_block_gets_triangularized() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let f = schur(&a);
        assert_eq!(f.t[(1, 0)], 0.0);
        let mut ev: Vec<f64> = f.eigenvalues().into_iter().map(|e| e.0).collect();
        ev.sort_by(f64::total_cmp);
        let r = 33f64.sqrt();
        assert!((ev[0] - (5.0 - r) / 2.0).abs() < 1e-13);
        assert!((ev[1] - (5.0 + r) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn permutation_cycle_needs_exceptional_shift() {
        // 4-cycle: eigenvalues ±1, ±i; plain Francis shifts stall on it
        let a = Matrix::from_rows(&[
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ]);
        let f = schur(&a);
        let mut mods: Vec<f64> = f.eigenvalues().iter().map(|(r, i)| r.hypot(*i)).collect();
        mods.sort_by(f64::total_cmp);
        for m in mods {
            assert!((m - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(matches!(
            real_schur(&Matrix::zeros(2, 3), 10, DEFLATION_TOL),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn tiny_budget_reports_non_convergence() {
        let a = Matrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + (i == j) as u8 as f64);
        assert!(matches!(
            real_schur(&a, 0, DEFLATION_TOL),
            Err(LinalgError::NoConvergence { .. })
        ));
    }

    #[test]
    fn trivial_sizes() {
        let f = schur(&Matrix::from_rows(&[[5.0]]));
        assert_eq!(f.t[(0, 0)], 5.0);
        let e = real_schur(&Matrix::zeros(0, 0), 1, DEFLATION_TOL).unwrap();
        assert_eq!(e.t.shape(), (0, 0));
    }

    #[test]
    fn lanv2_reconstructs() {
        for &(a, b, c, d) in &[
            (1.0, 2.0, 3.0, 4.0),
            (0.0, 1.0, -1.0, 0.0),
            (2.0, -5.0, 1.0, 3.0),
            (1.0, 0.0, 2.0, 1.0),
            (1.0, 1e-9, 1e-9, 1.0),
        ] {
            let (aa, bb, cc, dd, cs, sn) = lanv2(a, b, c, d);
            let r = Matrix::from_rows(&[[cs, -sn], [sn, cs]]);
            let s = Matrix::from_rows(&[[aa, bb], [cc, dd]]);
            let back = r.matmul(&s).unwrap().matmul_t(&r).unwrap();
            let orig = Matrix::from_rows(&[[a, b], [c, d]]);
            assert!(back.max_abs_diff(&orig).unwrap() < 1e-12, "{a} {b} {c} {d}");
            assert!(cc == 0.0 || (aa == dd && bb * cc < 0.0));
        }
    }
}
