//! Stallings subgroup graphs: folding, membership, index, and conjugate
//! containment.
//!
//! Run with: cargo run --example stallings_graphs

use traintrack::stallings::{conjugate_into, FoldedGraph};
use traintrack::word::{Basis, Word};

fn main() {
    let basis = Basis::new(2).unwrap();
    let words = |ws: &[&str]| -> Vec<Word> {
        ws.iter().map(|s| Word::parse(s, &basis).unwrap()).collect()
    };

    let h = FoldedGraph::subgroup_graph(basis, &words(&["ab", "ba"]));
    println!("graph of <ab, ba>:");
    print!("{}", h.write_dump());
    println!("vertices: {}  rank: {}", h.vertex_count(), h.rank());
    for w in ["abba", "a", "abab", ""] {
        let member = h.contains(&Word::parse(w, &basis).unwrap());
        println!("  contains({w:?}) = {member}");
    }
    println!("  index: {}", h.index().unwrap());
    println!("  girth: {}", h.girth().unwrap());

    // a finite-index subgroup is a cover of the rose
    let k = FoldedGraph::subgroup_graph(basis, &words(&["a", "bb", "baB"]));
    println!("index of <a, b^2, bab^-1>: {}", k.index().unwrap());

    // conjugate containment via a label-preserving morphism of cores
    let inner = FoldedGraph::subgroup_graph(basis, &words(&["baB"]));
    let target = FoldedGraph::subgroup_graph(basis, &words(&["a"]));
    println!(
        "<bab^-1> conjugates into <a>: {}",
        conjugate_into(&inner, &target)
    );
    println!(
        "<a> conjugates into <bab^-1>: {}",
        conjugate_into(&target, &inner)
    );
}
