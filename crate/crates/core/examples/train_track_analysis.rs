//! Transition matrices, Perron–Frobenius data, turns, and the immersion
//! criterion on rose representatives.
//!
//! Run with: cargo run --example train_track_analysis

use traintrack::graphmap::{pf_data, GraphMap};
use traintrack::word::Endomorphism;

fn main() {
    for images in [["ab", "ba"], ["b", "ba"], ["aab", "ba"]] {
        let phi = Endomorphism::from_images(2, &images).unwrap();
        let f = GraphMap::rose_map(&phi).unwrap();
        let m = f.transition_matrix();
        println!("phi = {phi}");
        print!("{m}");
        println!("primitive: {}", m.is_primitive());
        if let Ok(pf) = pf_data(&m) {
            println!("lambda = {:.10}, v = {:?}", pf.lambda, pf.vector);
        }
        let turns = f.turn_table().unwrap();
        println!(
            "turns: {} total, {} illegal; immersion: {}",
            turns.turns.len(),
            turns.illegal.len(),
            f.is_immersion()
        );
        if let Ok((metric, lambda)) = f.pf_metric() {
            // the metric stretches every edge image by exactly lambda
            for e in 0..2 {
                let img: f64 = f.edge_image(e).iter().map(|d| metric[d.edge()]).sum();
                println!(
                    "  edge {e}: length {:.6}, image length {:.6} = lambda * {:.6}",
                    metric[e],
                    img,
                    img / lambda
                );
            }
        }
        println!();
    }
}
