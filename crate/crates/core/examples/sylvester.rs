//! Bartels–Stewart against a dense solve of the vectorized system, and the
//! solve time as the sample count grows with d and k fixed.
//!
//! cargo run --release --example sylvester

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sae_zsl::matlin::{solve_sylvester, sylvester_residual, Lu, Matrix};
use sae_zsl::sae::SylvesterSystem;
use sae_zsl::TrainConfig;

fn randn(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

fn kronecker(a: &Matrix, b: &Matrix, c: &Matrix) -> Matrix {
    let (k, d) = c.shape();
    let mut m = Matrix::zeros(k * d, k * d);
    for j in 0..d {
        for i in 0..k {
            for i2 in 0..k {
                m[(j * k + i, j * k + i2)] += a[(i, i2)];
            }
            for j2 in 0..d {
                m[(j * k + i, j2 * k + i)] += b[(j2, j)];
            }
        }
    }
    let rhs = Matrix::from_col_major(k * d, 1, c.as_slice().to_vec()).unwrap();
    Matrix::from_col_major(k, d, Lu::new(&m).unwrap().solve(&rhs).unwrap().into_vec()).unwrap()
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("{:>3} {:>3}  {:>12}  {:>12}", "k", "d", "residual", "vs oracle");
    for (k, d) in [(2, 3), (5, 5), (8, 20), (20, 20)] {
        let a = randn(&mut rng, k, k).gram_rows();
        let b = randn(&mut rng, d, d).gram_rows().add_diagonal(1.0);
        let c = randn(&mut rng, k, d);
        let w = solve_sylvester(&a, &b, &c).unwrap();
        let res = sylvester_residual(&a, &w, &b, &c).unwrap() / c.frobenius_norm();
        let dev = w.max_abs_diff(&kronecker(&a, &b, &c)).unwrap();
        println!("{k:>3} {d:>3}  {res:>12.3e}  {dev:>12.3e}");
    }

    println!("\nd = k = 64; Gram products scale with N, the solve does not");
    let map = randn(&mut rng, 64, 64);
    for n in [1_000, 10_000, 50_000] {
        let s = randn(&mut rng, 64, n);
        let x = map.matmul(&s).unwrap();
        let t = Instant::now();
        let sys = SylvesterSystem::from_data(&x, &s, 0.2).unwrap();
        let gram = t.elapsed();
        let t = Instant::now();
        sys.solve(&TrainConfig::with_lambda(0.2)).unwrap();
        println!("N = {n:>6}: Gram {:>8.2} ms, solve {:>6.2} ms", 1e3 * gram.as_secs_f64(), 1e3 * t.elapsed().as_secs_f64());
    }
}
