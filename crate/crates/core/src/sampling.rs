//! Seeded sample generators used by probes and tests: random reduced words,
//! random endomorphisms, Nielsen-generated markings, and random points of
//! Outer space.

use std::ops::RangeInclusive;

use crate::rng::SplitMix64;
use crate::word::{Basis, Endomorphism, Letter, Word};

/// Freely reduced word of exactly `len` letters (no backtracking by
/// construction), or shorter only when `len == 0`.
pub fn random_reduced_word(rng: &mut SplitMix64, basis: Basis, len: usize) -> Word {
    let alphabet = 2 * basis.rank();
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    for _ in 0..len {
        let forbidden = letters.last().map(|l| l.inverse());
        loop {
            let cand = Letter::from_code(rng.below(alphabet));
            if Some(cand) != forbidden {
                letters.push(cand);
                break;
            }
        }
    }
    Word::reduce(letters)
}

/// Nontrivial reduced word with length drawn from `lens`.
pub fn random_nontrivial_word(
    rng: &mut SplitMix64,
    basis: Basis,
    lens: RangeInclusive<usize>,
) -> Word {
    let len = rng.range(*lens.start().max(&1), *lens.end());
    random_reduced_word(rng, basis, len)
}

/// Endomorphism with independent random reduced images, lengths from `lens`.
pub fn random_endomorphism(
    rng: &mut SplitMix64,
    basis: Basis,
    lens: RangeInclusive<usize>,
) -> Endomorphism {
    let images = (0..basis.rank())
        .map(|_| random_nontrivial_word(rng, basis, lens.clone()))
        .collect();
    Endomorphism::new(basis, images).expect("images over the same basis")
}

/// One elementary Nielsen automorphism: a transvection `x_i -> x_i x_j^±`
/// (or left-sided), a swap, or an inversion.
pub fn random_nielsen_move(rng: &mut SplitMix64, basis: Basis) -> Endomorphism {
    let n = basis.rank();
    let mut images: Vec<Word> = basis.generators().map(|g| Word::reduce([g])).collect();
    let i = rng.below(n);
    let xi = Letter::new(i, false);
    match rng.below(3) {
        0 if n >= 2 => {
            // transvection
            let mut j = rng.below(n - 1);
            if j >= i {
                j += 1;
            }
            let xj = Letter::new(j, rng.chance(0.5));
            let img = if rng.chance(0.5) {
                Word::reduce([xi, xj])
            } else {
                Word::reduce([xj, xi])
            };
            images[i] = img;
        }
        1 if n >= 2 => {
            // swap x_i <-> x_j
            let mut j = rng.below(n - 1);
            if j >= i {
                j += 1;
            }
            images.swap(i, j);
        }
        _ => {
            images[i] = Word::reduce([xi.inverse()]);
        }
    }
    Endomorphism::new(basis, images).expect("valid images")
}

/// Automorphism built by composing `moves` elementary Nielsen moves.
pub fn random_marking_automorphism(
    rng: &mut SplitMix64,
    basis: Basis,
    moves: usize,
) -> Endomorphism {
    let mut acc = Endomorphism::identity(basis);
    for _ in 0..moves {
        let m = random_nielsen_move(rng, basis);
        acc = m.compose(&acc).expect("same basis");
    }
    acc
}

/// Random rational length in [0.1, 10.0] with two decimal digits.
pub fn random_rational_length(rng: &mut SplitMix64) -> f64 {
    rng.range(10, 1000) as f64 / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_are_reduced_and_full_length() {
        let basis = Basis::new(2).unwrap();
        let mut rng = SplitMix64::new(11);
        for _ in 0..200 {
            let w = random_reduced_word(&mut rng, basis, 10);
            assert_eq!(w.len(), 10);
        }
    }

    #[test]
    fn nielsen_moves_are_automorphisms() {
        // every elementary move composed with a candidate inverse is identity-like:
        // here we just check images generate (checked properly in stallings tests)
        let basis = Basis::new(3).unwrap();
        let mut rng = SplitMix64::new(12);
        for _ in 0..50 {
            let m = random_marking_automorphism(&mut rng, basis, 5);
            assert!(!m.is_trivial());
        }
    }
}
