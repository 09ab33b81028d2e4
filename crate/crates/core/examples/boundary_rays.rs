//! Boundary dynamics: attracting fixed rays, cylinder covers of iterated
//! images, and a stable-lamination leaf segment.
//!
//! Run with: cargo run --example boundary_rays

use traintrack::boundary::{
    attraction_probe, boundary_fixed_points, cylinder_cover, lamination_leaf,
};
use traintrack::graphmap::GraphMap;
use traintrack::word::Endomorphism;

fn main() {
    let phi = Endomorphism::from_images(2, &["ab", "ba"]).unwrap();

    let rays = boundary_fixed_points(&phi, 16).unwrap();
    println!("fixed rays (bound {}):", rays.bound);
    for (i, r) in rays.rays.iter().enumerate() {
        println!("  X{}: {}", i + 1, r.prefix_word(&rays.map).unwrap());
    }
    for (i, r) in rays.higher.iter().enumerate() {
        println!(
            "  Y{} (power {}): {}",
            i + 1,
            r.power,
            r.prefix_word(&rays.map).unwrap()
        );
    }

    let report = attraction_probe(&phi, &rays, 100, 6, 42).unwrap();
    println!(
        "attraction probe: pass {} (min final overlap {})",
        report.pass, report.min_final_overlap
    );

    println!("\ncylinder covers of iterated images:");
    for k in 0..=4 {
        let cover = cylinder_cover(&phi, k).unwrap();
        let prefixes: Vec<String> = cover.prefixes.iter().map(|w| w.to_string()).collect();
        println!("  k={k}: {}", prefixes.join(" "));
    }

    let f = GraphMap::rose_map(&phi).unwrap();
    let leaf = lamination_leaf(&f, 16).unwrap();
    println!(
        "\nleaf segment (power {}): {}",
        leaf.power,
        leaf.word(&f, 16).unwrap()
    );
}
