//! SAE against the two ridge baselines on the synthetic zero-shot task,
//! each with class-wise cross-validated λ.
//!
//! cargo run --release --example ablation -- [seeds]

use sae_zsl::data::zsl_split;
use sae_zsl::zsl::synthetic::{generate, SyntheticZslConfig};
use sae_zsl::zsl::{cross_validate_lambda, evaluate_zsl, natural_direction, CvConfig, Direction, DistanceKind};
use sae_zsl::Method;

fn main() -> sae_zsl::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let cfg = SyntheticZslConfig::default();
    println!("{:>4}  {:>16}  {:>16}  {:>16}  {:>9}", "seed", "SAE", "ridge F→S", "ridge S→F", "SAE (Wᵀ)");
    for seed in 0..seeds {
        let task = generate(&cfg, seed)?;
        let split = zsl_split(&task.dataset, &task.split)?;
        let protos = split.train.semantics().expect("synthetic task has semantics");
        let mut cells = Vec::new();
        let mut sae_w = None;
        for method in Method::ALL {
            let direction = natural_direction(method);
            let cv = CvConfig {
                method,
                direction,
                ..CvConfig::default()
            };
            let best = cross_validate_lambda(split.train.features(), split.train.labels(), protos, &cv)?.best_lambda;
            let w = method.fit(split.train.features(), &split.train.semantic_matrix()?, best)?;
            let acc = evaluate_zsl(&w, &split.test, DistanceKind::Cosine, direction)?;
            cells.push(format!("{:.4} (λ={best})", acc.overall));
            if method == Method::Sae {
                sae_w = Some(w);
            }
        }
        let dec = evaluate_zsl(sae_w.as_ref().unwrap(), &split.test, DistanceKind::Cosine, Direction::Decoder)?;
        println!("{seed:>4}  {:>16}  {:>16}  {:>16}  {:>9.4}", cells[0], cells[1], cells[2], dec.overall);
    }
    Ok(())
}
