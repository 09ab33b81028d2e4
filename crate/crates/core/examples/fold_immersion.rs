//! Fold a representative with illegal turns into an immersion of the same
//! outer endomorphism.
//!
//! Run with: cargo run --example fold_immersion

use traintrack::graphmap::{default_fold_budget, fold_to_immersion, GraphMap};
use traintrack::word::Endomorphism;

fn main() {
    for images in [["ba", "BaaB"], ["bb", "Baab"], ["abAA", "BBA"]] {
        let phi = Endomorphism::from_images(2, &images).unwrap();
        let rose = GraphMap::rose_map(&phi).unwrap();
        println!(
            "phi = {phi}: rose map immersion: {}",
            rose.is_immersion()
        );
        match fold_to_immersion(&rose, default_fold_budget(&phi)) {
            Ok(g) => {
                println!(
                    "  folded to {} vertices / {} edges, immersion: {}",
                    g.graph().vertex_count(),
                    g.graph().edge_count(),
                    g.is_immersion()
                );
                for e in 0..g.graph().edge_count() {
                    println!("  edge {e} image: {:?}", g.edge_image(e));
                }
            }
            Err(e) => println!("  {e}"),
        }
        println!();
    }

    // automorphisms have no expanding immersion representative
    let golden = Endomorphism::from_images(2, &["b", "ba"]).unwrap();
    let rose = GraphMap::rose_map(&golden).unwrap();
    println!(
        "golden {golden}: {}",
        fold_to_immersion(&rose, 100).unwrap_err()
    );
}
