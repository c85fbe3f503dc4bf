//! Class-wise cross-validation of λ on the seen classes.
//!
//! cargo run --release --example lambda_cv -- [seed]

use sae_zsl::data::zsl_split;
use sae_zsl::zsl::synthetic::{generate, SyntheticZslConfig};
use sae_zsl::zsl::{cross_validate_lambda, CvConfig};

fn main() -> sae_zsl::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    // noisier than the default task, so λ matters
    let cfg = SyntheticZslConfig {
        feature_noise: 6.0,
        ..SyntheticZslConfig::default()
    };
    let task = generate(&cfg, seed)?;
    let train = zsl_split(&task.dataset, &task.split)?.train;
    let cv = CvConfig::default();
    let out = cross_validate_lambda(
        train.features(),
        train.labels(),
        train.semantics().expect("synthetic task has semantics"),
        &cv,
    )?;
    println!("{} folds over {} seen classes", cv.folds, train.classes().len());
    for s in &out.scores {
        match s.accuracy {
            Some(a) => println!("  λ = {:<6} {a:.4}", s.lambda),
            None => println!("  λ = {:<6} failed", s.lambda),
        }
    }
    println!("selected λ = {}", out.best_lambda);
    Ok(())
}
