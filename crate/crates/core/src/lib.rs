//! Computable dynamics of free-group endomorphisms.
//!
//! The crate turns the main objects of substitution-like endomorphisms of a
//! free group into things a program can hold and check:
//!
//! - exact word algebra: reduction, cyclic conjugacy classes, composition
//!   ([`word`]);
//! - Stallings subgroup graphs with folding, membership, finite-index
//!   detection, conjugate containment, and a girth-based expansiveness probe
//!   ([`stallings`]);
//! - marked graphs and graph self-maps: transition matrices, primitivity,
//!   Perron–Frobenius data, turn analysis, immersion train-track
//!   representatives obtained by folding ([`graphmap`]);
//! - points of Outer space and its simplicial boundary as marked metric
//!   graphs, hyperbolic length functions, stable length spectra, sink-orbit
//!   convergence, admissibility and rigidity probes ([`dynamics`]);
//! - boundary dynamics: attracting fixed rays, cylinder covers of iterated
//!   image subgroups, stable-lamination leaf segments ([`boundary`]).
//!
//! Every sampled computation takes an explicit seed; identical inputs and
//! seeds reproduce identical results.
//!
//! ```
//! use traintrack::word::Endomorphism;
//! use traintrack::graphmap::{GraphMap, pf_data};
//!
//! let phi = Endomorphism::from_images(2, &["ab", "ba"]).unwrap();
//! let f = GraphMap::rose_map(&phi).unwrap();
//! assert!(f.is_immersion());
//! let pf = pf_data(&f.transition_matrix()).unwrap();
//! assert!((pf.lambda - 2.0).abs() < 1e-9);
//! ```
//!
//! The `examples/` directory contains one runnable program per capability;
//! `cargo run -- help` shows the batch command-line front end.

pub mod boundary;
pub mod cli;
pub mod dynamics;
mod fold;
pub mod graphmap;
pub mod rng;
pub mod sampling;
pub mod stallings;
pub mod word;

mod blocks;

pub use graphmap::{GraphMap, MarkedGraph, PFData, TransitionMatrix};
pub use word::{Basis, CyclicWord, Endomorphism, Letter, Word};
