//! Writes a generated problem family to a directory: `theory.p`, `train/` and
//! `heldout/`.

use guided_prover::harness::{generate_family, FamilyConfig};

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "family".into());
    let fam = generate_family(&FamilyConfig::default());
    fam.write(&dir).unwrap();
    println!("{} training and {} held-out problems in {dir}", fam.train.len(), fam.heldout.len());
    println!("first training problem:\n{}", fam.train[0].text);
}
