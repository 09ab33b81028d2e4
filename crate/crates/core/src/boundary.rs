//! Dynamics on the boundary of the free group: attracting fixed rays of the
//! induced boundary map, cylinder covers of iterated image subgroups, and
//! stable-lamination leaf segments.
//!
//! Rays are stored lazily, as generator data plus a materialized prefix:
//! fixed rays of substitution type are not eventually periodic, so no finite
//! closed form exists; any requested depth is exact.

use std::fmt;

use thiserror::Error;

use crate::graphmap::{
    default_fold_budget, fold_to_immersion, invert_path, rose_path_as_word, Dir, EdgePath,
    GraphMap, GraphMapError,
};
use crate::rng::SplitMix64;
use crate::sampling;
use crate::stallings::{self, FoldedGraph};
use crate::word::{Endomorphism, Letter, Word};

#[derive(Debug, Error, PartialEq, Clone)]
pub enum BoundaryError {
    #[error("surjective input: automorphisms are out of scope for boundary rays")]
    SurjectiveInput,
    #[error("rank {0} is below the dynamic range: rank >= 2 required")]
    RankTooSmall(usize),
    #[error("count bound violated: {count} rays exceed the bound {bound}")]
    CountBound { count: usize, bound: usize },
    #[error(transparent)]
    GraphMap(#[from] GraphMapError),
}

/// A fixed ray of the boundary map: a direction fixed by the `power`-th
/// iterate of an immersion, together with a materialized prefix.
#[derive(Clone, Debug)]
pub struct Ray {
    pub vertex: u32,
    pub direction: Dir,
    pub power: usize,
    prefix: EdgePath,
}

impl Ray {
    pub fn prefix(&self) -> &EdgePath {
        &self.prefix
    }

    /// Prefix as a word when the carrying graph is a rose.
    pub fn prefix_word(&self, f: &GraphMap) -> Option<Word> {
        f.graph().is_rose().then(|| rose_path_as_word(&self.prefix))
    }

    /// Materialize the prefix to `m` letters by iterating the map at the
    /// ray's power; the previous prefix always stays an initial segment.
    pub fn extend(&mut self, f: &GraphMap, m: usize) {
        if self.prefix.is_empty() {
            self.prefix.push(self.direction);
        }
        while self.prefix.len() < m {
            let mut next = self.prefix.clone();
            for _ in 0..self.power {
                next = f.map_path(&next);
            }
            debug_assert!(next.starts_with(&self.prefix));
            if next.len() == self.prefix.len() {
                break; // non-expanding direction; prefix is complete
            }
            self.prefix = next;
        }
        self.prefix.truncate(m.max(1));
    }
}

/// All periodic directions of the direction map, with minimal periods:
/// direction `d` at vertex `v` such that the `p`-th iterate fixes both.
pub fn fixed_directions(f: &GraphMap) -> Vec<(u32, Dir, usize)> {
    let Ok(table) = f.turn_table() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let dirs = 2 * f.graph().edge_count();
    for code in 0..dirs {
        let d = Dir::from_code(code);
        let mut x = d;
        for p in 1..=dirs {
            x = table.direction_map[x.code()];
            if x == d {
                out.push((f.graph().dir_from(d), d, p));
                break;
            }
        }
    }
    out.sort_by_key(|&(_, d, p)| (p, d.code()));
    out
}

/// The length-`m` prefix of the ray obtained by iterating the `p`-th power
/// of the map from a `p`-periodic direction.
pub fn eigenray(f: &GraphMap, direction: Dir, power: usize, m: usize) -> Ray {
    let mut ray = Ray {
        vertex: f.graph().dir_from(direction),
        direction,
        power,
        prefix: Vec::new(),
    };
    ray.extend(f, m);
    ray
}

/// The boundary fixed-ray data of a non-surjective injective endomorphism:
/// rays of the immersion representative, split into the fixed directions
/// (power 1, the fixed points of the boundary map) and the extra periodic
/// directions of higher power.
#[derive(Clone)]
pub struct BoundaryRays {
    pub map: GraphMap,
    pub rays: Vec<Ray>,
    pub higher: Vec<Ray>,
    pub bound: usize,
}

impl fmt::Debug for BoundaryRays {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BoundaryRays({} fixed, {} higher, bound {})",
            self.rays.len(),
            self.higher.len(),
            self.bound
        )
    }
}

/// Eigenrays at the fixed directions of the immersion representative of
/// `phi`, materialized to `m` letters. The number of fixed rays may not
/// exceed twice the rank; a violation is surfaced as an error.
pub fn boundary_fixed_points(
    phi: &Endomorphism,
    m: usize,
) -> Result<BoundaryRays, BoundaryError> {
    if phi.rank() < 2 {
        return Err(BoundaryError::RankTooSmall(phi.rank()));
    }
    let rose = GraphMap::rose_map(phi)?;
    let f = fold_to_immersion(&rose, default_fold_budget(phi)).map_err(|e| match e {
        GraphMapError::SurjectiveInput => BoundaryError::SurjectiveInput,
        other => BoundaryError::GraphMap(other),
    })?;
    let bound = 2 * phi.rank();
    let mut rays = Vec::new();
    let mut higher = Vec::new();
    for (_, d, p) in fixed_directions(&f) {
        let ray = eigenray(&f, d, p, m);
        if p == 1 {
            rays.push(ray);
        } else {
            higher.push(ray);
        }
    }
    if rays.len() > bound {
        return Err(BoundaryError::CountBound {
            count: rays.len(),
            bound,
        });
    }
    Ok(BoundaryRays {
        map: f,
        rays,
        higher,
        bound,
    })
}

#[derive(Clone, Debug)]
pub struct AttractionReport {
    pub samples: usize,
    pub depth: usize,
    pub failures: usize,
    pub pass: bool,
    /// Smallest over samples of the final common-prefix length.
    pub min_final_overlap: usize,
}

/// Statistical check that the rays attract: iterate sampled reduced words
/// and record the longest common prefix with any periodic ray (the fixed
/// rays together with the higher-power ones: orbits that are not fixed by
/// the map itself cycle through the higher rays). A sample passes when the
/// overlap is nondecreasing in the iteration count and finally exceeds the
/// word length by `depth * (min growth - 1) / 2`.
pub fn attraction_probe(
    phi: &Endomorphism,
    rays: &BoundaryRays,
    samples: usize,
    depth: usize,
    seed: u64,
) -> Result<AttractionReport, BoundaryError> {
    let basis = phi.basis();
    let min_growth = phi
        .images()
        .iter()
        .map(|w| w.len())
        .min()
        .unwrap_or(0);
    let max_start = 8usize;
    let needed = (max_start * min_growth.max(2).pow(depth as u32)).min(1 << 16);
    let mut ray_words: Vec<Word> = Vec::new();
    let mut rays_local = rays.clone();
    for ray in rays_local.rays.iter_mut().chain(rays_local.higher.iter_mut()) {
        ray.extend(&rays_local.map, needed);
        match ray.prefix_word(&rays_local.map) {
            Some(w) => ray_words.push(w),
            None => {
                return Err(BoundaryError::GraphMap(GraphMapError::InvalidGraph(
                    "attraction probe needs a rose immersion representative".into(),
                )))
            }
        }
    }
    let mut rng = SplitMix64::new(seed);
    let mut failures = 0usize;
    let mut min_final = usize::MAX;
    for _ in 0..samples {
        let len = rng.range(4, max_start);
        let w = sampling::random_reduced_word(&mut rng, basis, len);
        let mut image = w.clone();
        let mut prev_best = 0usize;
        let mut ok = true;
        let mut final_best = 0usize;
        for _ in 1..=depth {
            image = phi.apply(&image);
            let best = ray_words
                .iter()
                .map(|r| common_prefix_len(r.letters(), image.letters()))
                .max()
                .unwrap_or(0);
            if best < prev_best {
                ok = false;
            }
            prev_best = best;
            final_best = best;
        }
        let threshold = w.len() as f64 + depth as f64 * (min_growth as f64 - 1.0) / 2.0;
        if (final_best as f64) < threshold {
            ok = false;
        }
        if !ok {
            failures += 1;
        }
        min_final = min_final.min(final_best);
    }
    Ok(AttractionReport {
        samples,
        depth,
        failures,
        pass: failures == 0,
        min_final_overlap: if min_final == usize::MAX { 0 } else { min_final },
    })
}

fn common_prefix_len(a: &[Letter], b: &[Letter]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Prefixes whose cylinders cover the boundary of the k-th image subgroup.
#[derive(Clone, Debug)]
pub struct CylinderCover {
    pub k: usize,
    pub prefixes: Vec<Word>,
}

impl CylinderCover {
    pub fn min_prefix_len(&self) -> usize {
        self.prefixes.iter().map(|w| w.len()).min().unwrap_or(0)
    }
}

/// Unfold the direction germs at the basepoint of the folded graph of the
/// k-th image subgroup into reduced words, following each germ until it
/// returns to the basepoint or meets a branch vertex.
pub fn cylinder_cover(phi: &Endomorphism, k: usize) -> Result<CylinderCover, BoundaryError> {
    let n = phi.rank();
    let image_rank = stallings::image_rank(phi);
    if image_rank < n {
        return Err(BoundaryError::GraphMap(GraphMapError::NotInjective {
            image_rank,
            rank: n,
        }));
    }
    let images = phi.power(k).images().to_vec();
    let graph = FoldedGraph::subgroup_graph(phi.basis(), &images);
    let base = graph.basepoint();
    let mut prefixes = Vec::new();
    for l in phi.basis().letters() {
        let Some(mut at) = graph.step(base, l) else {
            continue;
        };
        let mut word = vec![l];
        let mut seen = std::collections::HashSet::from([base]);
        loop {
            if at == base {
                break;
            }
            if !seen.insert(at) {
                break; // entered a cycle away from the basepoint
            }
            let back = word.last().unwrap().inverse();
            let continuations: Vec<Letter> = phi
                .basis()
                .letters()
                .filter(|&c| c != back && graph.step(at, c).is_some())
                .collect();
            if continuations.len() != 1 {
                break; // branch vertex: the germ's fundamental segment ends
            }
            let c = continuations[0];
            at = graph.step(at, c).unwrap();
            word.push(c);
        }
        prefixes.push(Word::reduce(word));
    }
    Ok(CylinderCover { k, prefixes })
}

/// A two-sided leaf segment of the stable lamination: two rays at a common
/// periodic vertex, read backwards then forwards.
#[derive(Clone, Debug)]
pub struct LeafSegment {
    pub left: Ray,
    pub right: Ray,
    pub power: usize,
}

impl LeafSegment {
    /// The reduced two-sided word of `2m` letters (for rose carriers).
    pub fn word(&self, f: &GraphMap, m: usize) -> Option<Word> {
        if !f.graph().is_rose() {
            return None;
        }
        let mut path = invert_path(&self.left.prefix()[..m.min(self.left.prefix().len())]);
        path.extend_from_slice(&self.right.prefix()[..m.min(self.right.prefix().len())]);
        Some(rose_path_as_word(&path))
    }
}

/// Expand a leaf of the stable lamination around a periodic vertex of the
/// immersion: the backward and forward rays of the two periodic directions
/// carried by the first periodic edge.
pub fn lamination_leaf(f: &GraphMap, m: usize) -> Result<LeafSegment, BoundaryError> {
    if !f.transition_matrix().is_primitive() {
        return Err(BoundaryError::GraphMap(GraphMapError::NotPrimitive));
    }
    if !f.is_immersion() {
        return Err(BoundaryError::GraphMap(GraphMapError::DegenerateEdge));
    }
    let periodic = fixed_directions(f);
    // prefer the two orientations of a single edge: the leaf then runs
    // through the corresponding periodic point on that edge
    let mut choice: Option<(Dir, usize, Dir, usize)> = None;
    for &(_, d, p) in &periodic {
        if d.is_reversed() {
            continue;
        }
        if let Some(&(_, _, q)) = periodic
            .iter()
            .find(|&&(_, dd, _)| dd == d.reversed())
        {
            choice = Some((d, p, d.reversed(), q));
            break;
        }
    }
    // otherwise any two distinct periodic directions at a common vertex
    if choice.is_none() {
        'outer: for &(v, d, p) in &periodic {
            for &(v2, d2, q) in &periodic {
                if v2 == v && d2 != d {
                    choice = Some((d, p, d2, q));
                    break 'outer;
                }
            }
        }
    }
    let Some((right_dir, p, left_dir, q)) = choice else {
        return Err(BoundaryError::GraphMap(GraphMapError::InvalidGraph(
            "no pair of periodic directions at a common vertex".into(),
        )));
    };
    let power = lcm(p, q);
    let right = eigenray(f, right_dir, p, m);
    let left = eigenray(f, left_dir, q, m);
    Ok(LeafSegment { left, right, power })
}

fn lcm(a: usize, b: usize) -> usize {
    let gcd = |mut x: usize, mut y: usize| {
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x
    };
    a / gcd(a, b) * b
}
