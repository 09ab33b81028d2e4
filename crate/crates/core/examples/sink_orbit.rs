//! Sink dynamics on compactified Outer space: every starting tree flows to
//! the stable spectrum under the right action.
//!
//! Run with: cargo run --example sink_orbit

use traintrack::dynamics::{orbit_converge, random_tree, TreePoint};
use traintrack::rng::SplitMix64;
use traintrack::word::{Basis, Endomorphism};

fn main() {
    let basis = Basis::new(2).unwrap();
    let phi = Endomorphism::from_images(2, &["ab", "ba"]).unwrap();

    // an interior point with a simple marking
    let t0 = TreePoint::rose(basis, vec![1.0, 2.0]).unwrap();
    let report = orbit_converge(&t0, &phi, 3, 1e-6, 60).unwrap();
    println!(
        "rose(1,2): converged in {} steps via {:?}",
        report.converged_at, report.engine
    );
    for (k, d) in report.distances.iter().enumerate() {
        println!("  step {k}: distance {d:.3e}");
    }

    // a collapsed boundary start
    let t0 = TreePoint::rose(basis, vec![0.0, 1.0]).unwrap();
    let report = orbit_converge(&t0, &phi, 3, 1e-6, 60).unwrap();
    println!(
        "collapsed a-petal: converged in {} steps, eventually monotone: {}",
        report.converged_at, report.eventually_monotone
    );

    // a random Nielsen-marked start
    let mut rng = SplitMix64::new(7);
    let t0 = random_tree(&mut rng, basis, false);
    println!("random marking {}:", t0.twist());
    let report = orbit_converge(&t0, &phi, 3, 1e-6, 60).unwrap();
    println!(
        "  converged in {} steps via {:?}",
        report.converged_at, report.engine
    );
}
