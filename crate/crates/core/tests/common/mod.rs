#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sae_zsl::matlin::{Lu, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn randn(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `G·Gᵀ` for a random square `G`.
pub fn random_psd(rng: &mut impl Rng, n: usize) -> Matrix {
    randn(rng, n, n).gram_rows()
}

/// Solves `A·W + W·B = C` through the vectorized form
/// `(I ⊗ A + Bᵀ ⊗ I)·vec(W) = vec(C)` with a dense LU solve.
pub fn kronecker_sylvester(a: &Matrix, b: &Matrix, c: &Matrix) -> Matrix {
    let k = a.rows();
    let d = b.rows();
    let n = k * d;
    let mut m = Matrix::zeros(n, n);
    for j in 0..d {
        for i in 0..k {
            let row = j * k + i;
            for i2 in 0..k {
                m[(row, j * k + i2)] += a[(i, i2)];
            }
            for j2 in 0..d {
                m[(row, j2 * k + i)] += b[(j2, j)];
            }
        }
    }
    let rhs = Matrix::from_col_major(n, 1, c.as_slice().to_vec()).unwrap();
    let x = Lu::new(&m).unwrap().solve(&rhs).unwrap();
    Matrix::from_col_major(k, d, x.into_vec()).unwrap()
}
