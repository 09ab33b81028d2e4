//! The expansive-or-automorphism dichotomy, probed through the girth of
//! iterated image subgroup graphs.
//!
//! Run with: cargo run --example expansiveness

use traintrack::stallings::expansiveness_probe;
use traintrack::word::Endomorphism;

fn main() {
    let cases = [
        ("doubling", Endomorphism::from_images(2, &["ab", "ba"]).unwrap()),
        ("golden", Endomorphism::from_images(2, &["b", "ba"]).unwrap()),
        (
            "vertex-fixing",
            Endomorphism::from_images(3, &["a", "baB", "bbaBB"]).unwrap(),
        ),
    ];
    for (name, phi) in cases {
        match expansiveness_probe(&phi, 5) {
            Ok(report) => {
                let girths: Vec<String> = report
                    .girth_sequence
                    .iter()
                    .map(|(k, g)| format!("g({k})={g}"))
                    .collect();
                println!("{name} {phi}: {} [{}]", report.verdict, girths.join(" "));
            }
            Err(e) => println!("{name} {phi}: {e}"),
        }
    }
}
