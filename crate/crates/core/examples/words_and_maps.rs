//! Exact free-group word algebra: reduction, endomorphism application,
//! composition, and canonical conjugacy representatives.
//!
//! Run with: cargo run --example words_and_maps

use traintrack::word::{cyclic_reduce, Basis, Endomorphism, Word};

fn main() {
    let basis = Basis::new(2).unwrap();

    // free reduction
    for raw in ["aA", "abBa", "abBA", "aabBAb"] {
        let reduced = Word::parse(raw, &basis).unwrap();
        println!("reduce({raw}) = {reduced}");
    }

    // the doubling substitution a -> ab, b -> ba
    let phi = Endomorphism::from_images(2, &["ab", "ba"]).unwrap();
    let w = Word::parse("aB", &basis).unwrap();
    println!("phi = {phi}");
    println!("phi(aB) = {}", phi.apply(&w));
    println!("phi^2: a -> {}", phi.power(2).image(0));
    println!("phi^3(a) = {}", phi.power(3).apply(&Word::parse("a", &basis).unwrap()));

    // composition is substitution
    let psi = Endomorphism::from_images(2, &["b", "ba"]).unwrap();
    let comp = phi.compose(&psi).unwrap();
    println!("phi o psi = {comp}");

    // conjugacy classes: cyclic reduction plus a canonical rotation
    for raw in ["Aba", "ab", "bab", "abbA"] {
        let class = cyclic_reduce(&Word::parse(raw, &basis).unwrap());
        println!("[{raw}] = {class}");
    }

    // the three-generator example from the admissibility story
    let ex = Endomorphism::from_images(3, &["a", "baB", "bbaBB"]).unwrap();
    let c = ex.image(2).clone();
    println!("ex = {ex}");
    println!("ex(ex(c)) = {}", ex.apply(&c));
}
