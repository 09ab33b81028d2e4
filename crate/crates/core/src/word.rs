//! Exact word algebra for free groups: free and cyclic reduction,
//! endomorphism application and composition, canonical conjugacy
//! representatives.
//!
//! Generators are lowercase letters `a, b, c, ...`; the uppercase letter is
//! the inverse of the corresponding generator. All values are immutable after
//! construction and every operation here is a pure function.

use std::fmt;

use thiserror::Error;

/// Largest supported rank (one generator per lowercase ASCII letter).
pub const MAX_RANK: usize = 26;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum WordError {
    #[error("unknown letter {0:?}: outside the basis alphabet")]
    UnknownLetter(char),
    #[error("invalid rank {0}: must be between 1 and 26")]
    InvalidRank(usize),
    #[error("basis mismatch: operands live over different ranks")]
    BasisMismatch,
    #[error("endomorphism needs one image per generator (got {got}, rank {rank})")]
    ImageCount { got: usize, rank: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A signed generator. The internal code is `2 * generator + orientation`
/// with orientation 1 for the inverse, so `inverse()` is a single bit flip
/// and the natural order on codes is `a < A < b < B < ...`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Letter {
        debug_assert!(generator < MAX_RANK);
        Letter((generator as u8) << 1 | inverse as u8)
    }

    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_code(code: usize) -> Letter {
        debug_assert!(code < 2 * MAX_RANK);
        Letter(code as u8)
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a'..='z' => Some(Letter::new(c as usize - 'a' as usize, false)),
            'A'..='Z' => Some(Letter::new(c as usize - 'A' as usize, true)),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.generator() as u8) as char
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A basis of the free group: the first `rank` lowercase letters.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Basis {
    rank: usize,
}

impl Basis {
    pub fn new(rank: usize) -> Result<Basis, WordError> {
        if rank == 0 || rank > MAX_RANK {
            return Err(WordError::InvalidRank(rank));
        }
        Ok(Basis { rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn contains(&self, l: Letter) -> bool {
        l.generator() < self.rank
    }

    /// The positive generators, in order.
    pub fn generators(&self) -> impl Iterator<Item = Letter> {
        (0..self.rank).map(|g| Letter::new(g, false))
    }

    /// All signed letters `a, A, b, B, ...`, in code order.
    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..2 * self.rank).map(Letter::from_code)
    }
}

/// A freely reduced word; the empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    /// Freely reduce an arbitrary letter sequence. Idempotent.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word(stack)
    }

    /// Parse a string of letters over `basis` and freely reduce it.
    /// The empty string and `"1"` both denote the identity.
    pub fn parse(s: &str, basis: &Basis) -> Result<Word, WordError> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let l = Letter::from_char(c).ok_or(WordError::UnknownLetter(c))?;
            if !basis.contains(l) {
                return Err(WordError::UnknownLetter(c));
            }
            letters.push(l);
        }
        Ok(Word::reduce(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Reduced product `self * other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut stack = self.0.clone();
        for &l in &other.0 {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word(stack)
    }

    /// Conjugate `g * self * g^-1`, reduced.
    pub fn conjugate(&self, g: &Word) -> Word {
        g.concat(self).concat(&g.inverse())
    }

    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Word {
        debug_assert!(letters.windows(2).all(|w| w[0] != w[1].inverse()));
        Word(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// A conjugacy class: cyclically reduced word stored in its canonical
/// rotation (lexicographically least under the letter-code order), so
/// structural equality is equality of conjugacy classes of cyclic rotations.
/// Inverse classes are *not* identified here.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord(Vec<Letter>);

impl CyclicWord {
    /// Cyclically reduce a word and rotate to canonical form.
    pub fn of(w: &Word) -> CyclicWord {
        let mut v = w.0.clone();
        // strip conjugating prefix/suffix pairs
        let mut lo = 0usize;
        let mut hi = v.len();
        while hi - lo >= 2 && v[lo] == v[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        v = v[lo..hi].to_vec();
        CyclicWord(canonical_rotation(&v))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_empty()
    }

    /// The canonical rotation as an ordinary word.
    pub fn to_word(&self) -> Word {
        Word(self.0.clone())
    }

    /// Canonical form of the inverse class.
    pub fn inverse(&self) -> CyclicWord {
        let inv: Vec<Letter> = self.0.iter().rev().map(|l| l.inverse()).collect();
        CyclicWord(canonical_rotation(&inv))
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn canonical_rotation(v: &[Letter]) -> Vec<Letter> {
    if v.len() <= 1 {
        return v.to_vec();
    }
    let n = v.len();
    let mut best = 0usize;
    for start in 1..n {
        for k in 0..n {
            let a = v[(start + k) % n];
            let b = v[(best + k) % n];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    best = start;
                    break;
                }
                std::cmp::Ordering::Greater => break,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    (0..n).map(|k| v[(best + k) % n]).collect()
}

/// Cyclically reduced canonical representative of the conjugacy class of `w`.
pub fn cyclic_reduce(w: &Word) -> CyclicWord {
    CyclicWord::of(w)
}

/// All nontrivial conjugacy classes of cyclic length at most `max_len`, in
/// deterministic (length, canonical-word) order. Inverse classes are kept
/// distinct; callers that want one representative per `{[g], [g^-1]}` pair
/// deduplicate on top of this.
pub fn cyclic_classes(basis: Basis, max_len: usize) -> Vec<CyclicWord> {
    let alphabet = 2 * basis.rank();
    let mut seen = std::collections::HashSet::new();
    let mut out: Vec<CyclicWord> = Vec::new();
    for len in 1..=max_len {
        let mut stack: Vec<Letter> = Vec::new();
        let mut found: Vec<CyclicWord> = Vec::new();
        // depth-first enumeration of reduced words of exactly `len` letters
        fn rec(
            stack: &mut Vec<Letter>,
            len: usize,
            alphabet: usize,
            seen: &mut std::collections::HashSet<CyclicWord>,
            found: &mut Vec<CyclicWord>,
        ) {
            if stack.len() == len {
                // cyclically reduced: first letter is not inverse of last
                if stack[0] != stack[len - 1].inverse() || len == 1 {
                    let c = CyclicWord::of(&Word::from_reduced(stack.clone()));
                    if c.len() == len && seen.insert(c.clone()) {
                        found.push(c);
                    }
                }
                return;
            }
            for code in 0..alphabet {
                let l = Letter::from_code(code);
                if stack.last() == Some(&l.inverse()) {
                    continue;
                }
                stack.push(l);
                rec(stack, len, alphabet, seen, found);
                stack.pop();
            }
        }
        rec(&mut stack, len, alphabet, &mut seen, &mut found);
        found.sort_by(|a, b| a.letters().cmp(b.letters()));
        out.extend(found);
    }
    out
}

/// An endomorphism of the free group, given by one image word per generator.
#[derive(Clone, PartialEq, Eq)]
pub struct Endomorphism {
    basis: Basis,
    images: Vec<Word>,
}

impl Endomorphism {
    pub fn new(basis: Basis, images: Vec<Word>) -> Result<Endomorphism, WordError> {
        if images.len() != basis.rank() {
            return Err(WordError::ImageCount {
                got: images.len(),
                rank: basis.rank(),
            });
        }
        for img in &images {
            for l in img.letters() {
                if !basis.contains(*l) {
                    return Err(WordError::UnknownLetter(l.to_char()));
                }
            }
        }
        Ok(Endomorphism { basis, images })
    }

    /// Convenience constructor from image strings, e.g. `["ab", "ba"]`.
    pub fn from_images(rank: usize, images: &[&str]) -> Result<Endomorphism, WordError> {
        let basis = Basis::new(rank)?;
        let words = images
            .iter()
            .map(|s| Word::parse(s, &basis))
            .collect::<Result<Vec<_>, _>>()?;
        Endomorphism::new(basis, words)
    }

    pub fn identity(basis: Basis) -> Endomorphism {
        let images = basis
            .generators()
            .map(|g| Word(vec![g]))
            .collect();
        Endomorphism { basis, images }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    /// Image of a generator (by index).
    pub fn image(&self, generator: usize) -> &Word {
        &self.images[generator]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    /// Image of a signed letter.
    pub fn image_of(&self, l: Letter) -> Word {
        let img = &self.images[l.generator()];
        if l.is_inverse() {
            img.inverse()
        } else {
            img.clone()
        }
    }

    /// Freely reduced image of a word; a homomorphism on reduced products.
    pub fn apply(&self, w: &Word) -> Word {
        let mut stack: Vec<Letter> = Vec::new();
        for &l in w.letters() {
            let img = &self.images[l.generator()];
            if l.is_inverse() {
                for &m in img.letters().iter().rev() {
                    push_reduced(&mut stack, m.inverse());
                }
            } else {
                for &m in img.letters() {
                    push_reduced(&mut stack, m);
                }
            }
        }
        Word(stack)
    }

    /// Composition `self ∘ other`: `x ↦ self(other(x))`.
    pub fn compose(&self, other: &Endomorphism) -> Result<Endomorphism, WordError> {
        if self.basis != other.basis {
            return Err(WordError::BasisMismatch);
        }
        let images = other.images.iter().map(|w| self.apply(w)).collect();
        Ok(Endomorphism {
            basis: self.basis,
            images,
        })
    }

    /// `self` composed with itself `k` times; `power(0)` is the identity.
    pub fn power(&self, k: usize) -> Endomorphism {
        let mut acc = Endomorphism::identity(self.basis);
        for _ in 0..k {
            acc = self.compose(&acc).expect("same basis");
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.basis
            .generators()
            .zip(&self.images)
            .all(|(g, img)| img.letters() == [g])
    }

    /// True when every image is the empty word (the trivial map).
    pub fn is_trivial(&self) -> bool {
        self.images.iter().all(|w| w.is_identity())
    }

    /// Total length of all generator images.
    pub fn total_image_length(&self) -> usize {
        self.images.iter().map(|w| w.len()).sum()
    }

    /// The shortest representative of the outer class reachable by greedy
    /// conjugation: repeatedly replace the map by an inner-twisted copy
    /// while the total image length strictly drops.
    pub fn inner_reduced(&self) -> Endomorphism {
        let mut best = self.clone();
        loop {
            let mut improved = false;
            for l in best.basis.letters() {
                let c = Word::reduce([l]);
                let cinv = c.inverse();
                let images: Vec<Word> = best
                    .images
                    .iter()
                    .map(|w| cinv.concat(w).concat(&c))
                    .collect();
                let total: usize = images.iter().map(|w| w.len()).sum();
                if total < best.total_image_length() {
                    best = Endomorphism {
                        basis: best.basis,
                        images,
                    };
                    improved = true;
                    break;
                }
            }
            if !improved {
                return best;
            }
        }
    }

    /// Parse the endomorphism text format: a `rank n` header followed by one
    /// `x -> image` mapping per line. `#` starts a comment; blank lines and
    /// extra whitespace are ignored.
    pub fn parse(text: &str) -> Result<Endomorphism, WordError> {
        let mut basis: Option<Basis> = None;
        let mut images: Vec<Option<Word>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("rank") {
                if basis.is_some() {
                    return Err(WordError::Parse {
                        line: line_no,
                        msg: "duplicate rank header".into(),
                    });
                }
                let rank: usize = rest.trim().parse().map_err(|_| WordError::Parse {
                    line: line_no,
                    msg: format!("bad rank {:?}", rest.trim()),
                })?;
                basis = Some(Basis::new(rank).map_err(|e| WordError::Parse {
                    line: line_no,
                    msg: e.to_string(),
                })?);
                images = vec![None; rank];
                continue;
            }
            let basis = basis.ok_or(WordError::Parse {
                line: line_no,
                msg: "mapping before rank header".into(),
            })?;
            let (lhs, rhs) = line.split_once("->").ok_or(WordError::Parse {
                line: line_no,
                msg: "expected `x -> image`".into(),
            })?;
            let lhs = lhs.trim();
            let mut chars = lhs.chars();
            let (gen, extra) = (chars.next(), chars.next());
            let gen = match (gen, extra) {
                (Some(c), None) => Letter::from_char(c).filter(|l| !l.is_inverse()),
                _ => None,
            }
            .ok_or(WordError::Parse {
                line: line_no,
                msg: format!("bad generator {:?}", lhs),
            })?;
            if !basis.contains(gen) {
                return Err(WordError::Parse {
                    line: line_no,
                    msg: format!("generator {:?} outside rank", lhs),
                });
            }
            if images[gen.generator()].is_some() {
                return Err(WordError::Parse {
                    line: line_no,
                    msg: format!("duplicate mapping for {}", lhs),
                });
            }
            let img = Word::parse(rhs, &basis).map_err(|e| WordError::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            images[gen.generator()] = Some(img);
        }
        let basis = basis.ok_or(WordError::Parse {
            line: 0,
            msg: "missing rank header".into(),
        })?;
        let images = images
            .into_iter()
            .enumerate()
            .map(|(g, img)| {
                img.ok_or(WordError::Parse {
                    line: 0,
                    msg: format!("missing mapping for {}", Letter::new(g, false).to_char()),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Endomorphism::new(basis, images)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("rank {}\n", self.rank());
        for (g, img) in self.basis.generators().zip(&self.images) {
            out.push_str(&format!("{} -> {}\n", g.to_char(), img));
        }
        out
    }
}

impl fmt::Display for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .basis
            .generators()
            .zip(&self.images)
            .map(|(g, img)| format!("{}->{}", g.to_char(), img))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl fmt::Debug for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn push_reduced(stack: &mut Vec<Letter>, l: Letter) {
    if stack.last() == Some(&l.inverse()) {
        stack.pop();
    } else {
        stack.push(l);
    }
}
