//! The vertex-fixing counterexample to admissibility, and the double-ratio
//! rigidity of iterated image subgroups.
//!
//! Run with: cargo run --example admissibility_and_rigidity

use traintrack::dynamics::{
    admissibility_check, right_action, rigidity_probe, TreePoint,
};
use traintrack::word::{Basis, Endomorphism};

fn main() {
    // a -> a, b -> bab^-1, c -> b^2ab^-2 is injective, but its image fixes
    // the <a, b> vertex of the splitting F3 = <a, b> * <c>
    let phi = Endomorphism::from_images(3, &["a", "baB", "bbaBB"]).unwrap();
    let b3 = Basis::new(3).unwrap();
    let splitting = TreePoint::rose(b3, vec![0.0, 0.0, 1.0]).unwrap();
    let verdicts = admissibility_check(&phi, std::slice::from_ref(&splitting)).unwrap();
    println!(
        "collapse a,b under {phi}: {} (vertex group {})",
        verdicts[0].verdict,
        verdicts[0].vertex_group.as_deref().unwrap_or("-")
    );
    println!("right action: {}", right_action(&splitting, &phi).unwrap_err());

    // the doubling map is admissible at the same kind of splitting
    let tm = Endomorphism::from_images(2, &["ab", "ba"]).unwrap();
    let b2 = Basis::new(2).unwrap();
    let splitting = TreePoint::rose(b2, vec![0.0, 1.0]).unwrap();
    let verdicts = admissibility_check(&tm, &[splitting]).unwrap();
    println!("collapse a under {tm}: {}", verdicts[0].verdict);

    // double-ratio rigidity tightens with the iteration count
    println!("\nrigidity of iterated images (100 samples, seed 42):");
    for k in [2usize, 4, 6] {
        let report = rigidity_probe(&tm, k, 100, 42).unwrap();
        println!(
            "  C_{k} = {:.6} (min sampled length {:.4})",
            report.max_deviation, report.min_length_seen
        );
    }
}
