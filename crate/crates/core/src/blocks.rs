//! Exact spectrum evaluation along substitution orbits via cyclic block
//! counts.
//!
//! When the rose map of an endomorphism is an immersion, images of
//! cyclically reduced words are cyclically reduced, so the vector of cyclic
//! `b`-block counts of iterated images evolves by an exact integer-linear
//! substitution matrix. A length function expressible as a sum of per-block
//! weights can then be evaluated on iterates whose materialized length would
//! be astronomical. Locality of a given length function is never assumed:
//! callers verify the block functional against direct evaluation and fall
//! back when verification fails.

use std::collections::HashMap;

use crate::word::{Basis, Endomorphism, Letter, Word};

/// The reduced words of a fixed length `b`, indexed.
pub(crate) struct BlockSpace {
    pub b: usize,
    pub blocks: Vec<Vec<Letter>>,
    index: HashMap<Vec<Letter>, usize>,
}

impl BlockSpace {
    pub fn new(basis: Basis, b: usize) -> BlockSpace {
        assert!(b >= 1);
        let mut blocks = Vec::new();
        let mut stack: Vec<Letter> = Vec::new();
        enumerate_reduced(basis, b, &mut stack, &mut blocks);
        let index = blocks
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        BlockSpace { b, blocks, index }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn index_of(&self, block: &[Letter]) -> Option<usize> {
        self.index.get(block).copied()
    }

    /// Counts of the `L` cyclic windows of a cyclically reduced word of
    /// length `L >= 1`. Wrapping windows of a cyclically reduced word are
    /// reduced, so every window is a valid block.
    pub fn cyclic_counts(&self, letters: &[Letter]) -> Option<Vec<f64>> {
        let n = letters.len();
        if n == 0 {
            return Some(vec![0.0; self.len()]);
        }
        let mut counts = vec![0.0; self.len()];
        let mut window = Vec::with_capacity(self.b);
        for i in 0..n {
            window.clear();
            for j in 0..self.b {
                window.push(letters[(i + j) % n]);
            }
            counts[self.index_of(&window)?] += 1.0;
        }
        Some(counts)
    }
}

fn enumerate_reduced(basis: Basis, len: usize, stack: &mut Vec<Letter>, out: &mut Vec<Vec<Letter>>) {
    if stack.len() == len {
        out.push(stack.clone());
        return;
    }
    for code in 0..2 * basis.rank() {
        let l = Letter::from_code(code);
        if stack.last() == Some(&l.inverse()) {
            continue;
        }
        stack.push(l);
        enumerate_reduced(basis, len, stack, out);
        stack.pop();
    }
}

/// Column-sparse block substitution matrix: entry lists for column `w` pair
/// each block of `phi(w)` anchored in the image of the first letter with its
/// multiplicity. Returns `None` when substitution is not cancellation-free,
/// in which case block dynamics would be wrong and the caller must fall
/// back to direct evaluation.
pub(crate) fn substitution_matrix(
    space: &BlockSpace,
    phi: &Endomorphism,
) -> Option<Vec<Vec<(u32, f64)>>> {
    let mut cols = Vec::with_capacity(space.len());
    for block in &space.blocks {
        let mut image: Vec<Letter> = Vec::new();
        for &l in block {
            let img = phi.image_of(l);
            if img.is_empty() {
                return None;
            }
            if let Some(&last) = image.last() {
                if last == img.letters()[0].inverse() {
                    return None; // cancellation at a junction
                }
            }
            image.extend_from_slice(img.letters());
        }
        let anchor = phi.image_of(block[0]).len();
        debug_assert!(image.len() >= anchor + space.b - 1);
        let mut entries: HashMap<u32, f64> = HashMap::new();
        for o in 0..anchor {
            let window = &image[o..o + space.b];
            let row = space.index_of(window)? as u32;
            *entries.entry(row).or_insert(0.0) += 1.0;
        }
        let mut col: Vec<(u32, f64)> = entries.into_iter().collect();
        col.sort_unstable_by_key(|&(r, _)| r);
        cols.push(col);
    }
    Some(cols)
}

pub(crate) fn apply_substitution(cols: &[Vec<(u32, f64)>], counts: &[f64], scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; counts.len()];
    for (c, col) in cols.iter().enumerate() {
        let x = counts[c];
        if x == 0.0 {
            continue;
        }
        for &(r, m) in col {
            out[r as usize] += m * x * scale;
        }
    }
    out
}

/// Per-block weights for a length function `F` on conjugacy classes, built
/// from prefix increments of a linear (non-cyclic) evaluator: the weight of
/// a block is the length added by its last letter given the preceding
/// `b - 1` letters of context.
pub(crate) fn functional_weights(
    space: &BlockSpace,
    linear_eval: &mut dyn FnMut(&Word) -> f64,
) -> Vec<f64> {
    space
        .blocks
        .iter()
        .map(|block| {
            let full = Word::from_reduced(block.clone());
            let prefix = Word::from_reduced(block[..space.b - 1].to_vec());
            linear_eval(&full) - linear_eval(&prefix)
        })
        .collect()
}

pub(crate) fn predict(weights: &[f64], counts: &[f64]) -> f64 {
    counts
        .iter()
        .zip(weights)
        .map(|(c, w)| c * w)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{cyclic_classes, CyclicWord};

    #[test]
    fn block_space_sizes() {
        let basis = Basis::new(2).unwrap();
        assert_eq!(BlockSpace::new(basis, 1).len(), 4);
        assert_eq!(BlockSpace::new(basis, 2).len(), 12);
        assert_eq!(BlockSpace::new(basis, 3).len(), 36);
    }

    #[test]
    fn cyclic_counts_total_is_length() {
        let basis = Basis::new(2).unwrap();
        let space = BlockSpace::new(basis, 2);
        for class in cyclic_classes(basis, 4) {
            let counts = space.cyclic_counts(class.letters()).unwrap();
            let total: f64 = counts.iter().sum();
            assert_eq!(total as usize, class.len());
        }
    }

    #[test]
    fn substitution_matrix_tracks_counts_exactly() {
        let basis = Basis::new(2).unwrap();
        let phi = Endomorphism::from_images(2, &["ab", "ba"]).unwrap();
        let space = BlockSpace::new(basis, 2);
        let cols = substitution_matrix(&space, &phi).unwrap();
        for class in cyclic_classes(basis, 3) {
            let mut word = class.to_word();
            let mut counts = space.cyclic_counts(class.letters()).unwrap();
            for _ in 0..6 {
                word = phi.apply(&word);
                counts = apply_substitution(&cols, &counts, 1.0);
                let direct = space
                    .cyclic_counts(CyclicWord::of(&word).letters())
                    .unwrap();
                assert_eq!(counts, direct);
            }
        }
    }

    #[test]
    fn cancelling_substitution_is_rejected() {
        let phi = Endomorphism::from_images(2, &["ab", "Ab"]).unwrap();
        let basis = Basis::new(2).unwrap();
        let space = BlockSpace::new(basis, 2);
        // the block "aB" maps to "ab" followed by "Ba" (the inverse image),
        // which cancels at the junction, so the matrix must be refused
        assert!(substitution_matrix(&space, &phi).is_none());
    }
}
