//! Writes every built-in synthetic dataset as CSV plus a manifest, then
//! reloads each and checks it is unchanged.
//!
//! cargo run --release --example export_dataset -- <dir>

use std::path::PathBuf;

use sae_zsl::clustering::{synth_generate, SynthKind};
use sae_zsl::data::{load_manifest, save_dataset};
use sae_zsl::zsl::synthetic::{generate, SyntheticZslConfig};

fn main() -> sae_zsl::Result<()> {
    let root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sae-export"));
    for kind in SynthKind::ALL {
        let ds = synth_generate(kind, 0);
        let manifest = save_dataset(root.join(kind.to_string()), &ds, None)?;
        let (back, _) = load_manifest(&manifest)?;
        assert_eq!(back.features(), ds.features());
        println!("{:<16} {:>5} samples -> {}", kind.to_string(), ds.len(), manifest.display());
    }
    let task = generate(&SyntheticZslConfig::default(), 0)?;
    let manifest = save_dataset(root.join("zsl"), &task.dataset, Some(&task.split))?;
    let (back, split) = load_manifest(&manifest)?;
    assert_eq!(back.semantics(), task.dataset.semantics());
    assert_eq!(split.as_ref(), Some(&task.split));
    println!("{:<16} {:>5} samples -> {}", "zsl", task.dataset.len(), manifest.display());
    Ok(())
}
