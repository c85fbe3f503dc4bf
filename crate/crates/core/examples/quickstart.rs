//! Train on the seen classes of a synthetic task and classify the unseen
//! ones through both routes.
//!
//! cargo run --release --example quickstart -- [seed]

use sae_zsl::data::zsl_split;
use sae_zsl::zsl::synthetic::{generate, SyntheticZslConfig};
use sae_zsl::zsl::{evaluate_zsl, Direction, DistanceKind};
use sae_zsl::{train_sae, TrainConfig};

fn main() -> sae_zsl::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let task = generate(&SyntheticZslConfig::default(), seed)?;
    let split = zsl_split(&task.dataset, &task.split)?;
    println!(
        "{} seen classes ({} samples), {} unseen classes ({} samples), d = {}",
        task.split.seen.len(),
        split.train.len(),
        task.split.unseen.len(),
        split.test.len(),
        split.train.dim()
    );

    let model = train_sae(split.train.features(), &split.train.semantic_matrix()?, &TrainConfig::with_lambda(0.2))?;
    println!("W is {}×{}, Sylvester residual {:.2e}", model.k(), model.d(), model.train_residual());

    for direction in [Direction::Encoder, Direction::Decoder] {
        let acc = evaluate_zsl(&model, &split.test, DistanceKind::Cosine, direction)?;
        println!(
            "{:<9} accuracy {:.4}  mean per class {:.4}",
            direction.row_label(),
            acc.overall,
            acc.mean_per_class
        );
    }
    Ok(())
}
