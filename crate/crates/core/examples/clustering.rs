//! Supervised clustering on the two synthetic 3-D benchmarks: SAE
//! projection + k-means against k-means on the raw coordinates.
//!
//! cargo run --release --example clustering -- [seed]

use sae_zsl::clustering::{run_benchmark, SynthKind, DEFAULT_RESTARTS};
use sae_zsl::sae::DEFAULT_LAMBDA;

fn main() -> sae_zsl::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    println!("{:<16} {:>10} {:>10}", "dataset", "SAE Δ", "raw Δ");
    for kind in SynthKind::ALL {
        let out = run_benchmark(kind, seed, DEFAULT_LAMBDA, DEFAULT_RESTARTS)?;
        println!("{:<16} {:>10.4} {:>10.4}", kind.to_string(), out.sae_loss, out.raw_loss);
    }
    Ok(())
}
