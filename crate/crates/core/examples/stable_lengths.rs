//! Stable length functions: the rescaled limit of iterated loop lengths
//! under the Perron–Frobenius metric, and the homothety law.
//!
//! Run with: cargo run --example stable_lengths

use traintrack::dynamics::{homothety_check, stable_spectrum, StableMap, STABLE_KMAX, STABLE_TOL};
use traintrack::word::{Basis, Endomorphism, Word};

fn main() {
    let basis = Basis::new(2).unwrap();
    let phi = Endomorphism::from_images(2, &["ab", "ba"]).unwrap();

    let sm = StableMap::for_endomorphism(&phi).unwrap();
    println!("lambda = {}", sm.lambda());
    for g in ["a", "b", "ab", "aB", "aabB"] {
        let w = Word::parse(g, &basis).unwrap();
        let l = sm.stable_length(&w, STABLE_TOL, STABLE_KMAX).unwrap();
        println!("stable length of {g}: {l:.10}");
    }

    let (_, spectrum) = stable_spectrum(&phi, 3).unwrap();
    println!("\nprojectivized stable spectrum (classes up to length 3):");
    for (class, value) in spectrum.classes().iter().zip(spectrum.values()) {
        println!("  [{class}] -> {value:.10}");
    }

    let report = homothety_check(&phi, 6, 1e-8).unwrap();
    println!(
        "\nhomothety law on classes <= 6: max deviation {:.3e} (pass: {})",
        report.max_deviation, report.pass
    );
}
