//! Stallings subgroup graphs: folding (union-find over vertices), cores,
//! membership, finite-index detection, conjugate containment, and the
//! girth-based expansiveness probe for iterated images of an endomorphism.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::word::{Basis, Endomorphism, Letter, Word};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum StallingsError {
    #[error("graph is not a core: a dangling vertex remains off the basepoint")]
    NotCore,
    #[error("graph is a forest: no cycle exists")]
    Forest,
    #[error("folding certificate: image subgroup has rank {image_rank} < {rank}, kernel detected")]
    NotInjectiveWitness { image_rank: usize, rank: usize },
    #[error("dump parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Which clash the folding loop resolves first. Folding is confluent, so the
/// result is the same based graph up to isomorphism; tests exercise this.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FoldOrder {
    First,
    Last,
}

/// A folded, based, connected graph with edges labeled by generators:
/// at every vertex there is at most one outgoing and one incoming edge per
/// label. Vertices are canonically numbered by a BFS from the basepoint, so
/// structural equality is isomorphism of based labeled graphs.
#[derive(Clone, PartialEq, Eq)]
pub struct FoldedGraph {
    basis: Basis,
    out: Vec<Vec<Option<u32>>>,
    inn: Vec<Vec<Option<u32>>>,
    basepoint: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SubgroupIndex {
    Finite(usize),
    Infinite,
}

impl fmt::Display for SubgroupIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupIndex::Finite(k) => write!(f, "{k}"),
            SubgroupIndex::Infinite => write!(f, "infinite"),
        }
    }
}

impl FoldedGraph {
    /// Folded based graph whose basepoint loops read exactly the subgroup
    /// generated by `gens`; trimmed to the base core and canonically labeled.
    pub fn subgroup_graph(basis: Basis, gens: &[Word]) -> FoldedGraph {
        FoldedGraph::subgroup_graph_with_order(basis, gens, FoldOrder::First)
    }

    pub fn subgroup_graph_with_order(
        basis: Basis,
        gens: &[Word],
        order: FoldOrder,
    ) -> FoldedGraph {
        // wedge of subdivided loops at the basepoint
        let mut n: u32 = 1;
        let mut edges: Vec<(u32, usize, u32)> = Vec::new();
        for w in gens {
            let letters = w.letters();
            if letters.is_empty() {
                continue;
            }
            let mut prev = 0u32;
            for (i, &l) in letters.iter().enumerate() {
                let next = if i + 1 == letters.len() {
                    0
                } else {
                    n += 1;
                    n - 1
                };
                if l.is_inverse() {
                    edges.push((next, l.generator(), prev));
                } else {
                    edges.push((prev, l.generator(), next));
                }
                prev = next;
            }
        }
        let (edges, n, base) = fold_edges(edges, n, order);
        FoldedGraph::from_edge_list(basis, edges, n, base).trimmed_to_base_core()
    }

    fn from_edge_list(
        basis: Basis,
        edges: Vec<(u32, usize, u32)>,
        n: u32,
        basepoint: u32,
    ) -> FoldedGraph {
        let mut out = vec![vec![None; basis.rank()]; n as usize];
        let mut inn = vec![vec![None; basis.rank()]; n as usize];
        for (u, g, v) in edges {
            debug_assert!(out[u as usize][g].is_none(), "graph not folded");
            debug_assert!(inn[v as usize][g].is_none(), "graph not folded");
            out[u as usize][g] = Some(v);
            inn[v as usize][g] = Some(u);
        }
        let mut graph = FoldedGraph {
            basis,
            out,
            inn,
            basepoint,
        };
        graph.canonicalize();
        graph
    }

    /// Remove degree-1 vertices other than the basepoint, repeatedly.
    fn trimmed_to_base_core(mut self) -> FoldedGraph {
        loop {
            let mut removed = false;
            for v in 0..self.vertex_count() as u32 {
                if v != self.basepoint && self.valence(v) <= 1 {
                    self.delete_vertex(v);
                    removed = true;
                    break;
                }
            }
            if !removed {
                break;
            }
        }
        self.canonicalize();
        self
    }

    /// The cyclic core: every degree-1 vertex trimmed, basepoint included.
    /// The basepoint moves along its hanging path onto the cycle part.
    pub fn cyclic_core(&self) -> FoldedGraph {
        let mut g = self.clone();
        loop {
            let mut removed = false;
            for v in 0..g.vertex_count() as u32 {
                if g.valence(v) <= 1 && g.vertex_count() > 1 {
                    if v == g.basepoint {
                        if let Some(next) = g.unique_neighbor(v) {
                            g.basepoint = next;
                        } else {
                            break;
                        }
                    }
                    g.delete_vertex(v);
                    removed = true;
                    break;
                }
            }
            if !removed {
                break;
            }
        }
        g.canonicalize();
        g
    }

    fn unique_neighbor(&self, v: u32) -> Option<u32> {
        let mut found = None;
        for g in 0..self.basis.rank() {
            for t in [self.out[v as usize][g], self.inn[v as usize][g]]
                .into_iter()
                .flatten()
            {
                if t != v {
                    found = Some(t);
                }
            }
        }
        found
    }

    fn valence(&self, v: u32) -> usize {
        let mut d = 0;
        for g in 0..self.basis.rank() {
            if self.out[v as usize][g].is_some() {
                d += 1;
            }
            if self.inn[v as usize][g].is_some() {
                d += 1;
            }
        }
        d
    }

    fn delete_vertex(&mut self, v: u32) {
        let last = self.vertex_count() as u32 - 1;
        // detach
        for g in 0..self.basis.rank() {
            if let Some(t) = self.out[v as usize][g] {
                self.inn[t as usize][g] = None;
            }
            if let Some(t) = self.inn[v as usize][g] {
                self.out[t as usize][g] = None;
            }
        }
        // swap-remove with index fixup
        self.out.swap(v as usize, last as usize);
        self.inn.swap(v as usize, last as usize);
        self.out.pop();
        self.inn.pop();
        if self.basepoint == last {
            self.basepoint = v;
        }
        for row in self.out.iter_mut().chain(self.inn.iter_mut()) {
            for slot in row.iter_mut() {
                if *slot == Some(last) {
                    *slot = Some(v);
                }
            }
        }
    }

    /// Renumber vertices by BFS from the basepoint in label order. Makes
    /// structural equality a based-isomorphism test.
    fn canonicalize(&mut self) {
        let n = self.vertex_count();
        let mut order: Vec<Option<u32>> = vec![None; n];
        let mut queue = std::collections::VecDeque::new();
        order[self.basepoint as usize] = Some(0);
        queue.push_back(self.basepoint);
        let mut next_id = 1u32;
        while let Some(v) = queue.pop_front() {
            for g in 0..self.basis.rank() {
                for t in [self.out[v as usize][g], self.inn[v as usize][g]]
                    .into_iter()
                    .flatten()
                {
                    if order[t as usize].is_none() {
                        order[t as usize] = Some(next_id);
                        next_id += 1;
                        queue.push_back(t);
                    }
                }
            }
        }
        debug_assert_eq!(next_id as usize, n, "graph must be connected");
        let mut out = vec![vec![None; self.basis.rank()]; n];
        let mut inn = vec![vec![None; self.basis.rank()]; n];
        for v in 0..n {
            let nv = order[v].unwrap() as usize;
            for g in 0..self.basis.rank() {
                out[nv][g] = self.out[v][g].map(|t| order[t as usize].unwrap());
                inn[nv][g] = self.inn[v][g].map(|t| order[t as usize].unwrap());
            }
        }
        self.out = out;
        self.inn = inn;
        self.basepoint = 0;
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn basepoint(&self) -> u32 {
        self.basepoint
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out
            .iter()
            .map(|row| row.iter().filter(|s| s.is_some()).count())
            .sum()
    }

    /// First Betti number `E - V + 1`; the rank of the subgroup.
    pub fn rank(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    pub fn out_edge(&self, v: u32, generator: usize) -> Option<u32> {
        self.out[v as usize][generator]
    }

    pub fn in_edge(&self, v: u32, generator: usize) -> Option<u32> {
        self.inn[v as usize][generator]
    }

    /// Follow a signed letter from `v`, if the corresponding edge exists.
    pub fn step(&self, v: u32, l: Letter) -> Option<u32> {
        if l.is_inverse() {
            self.inn[v as usize][l.generator()]
        } else {
            self.out[v as usize][l.generator()]
        }
    }

    /// True iff `w` traces a closed path at the basepoint.
    pub fn contains(&self, w: &Word) -> bool {
        let mut v = self.basepoint;
        for &l in w.letters() {
            match self.step(v, l) {
                Some(t) => v = t,
                None => return false,
            }
        }
        v == self.basepoint
    }

    /// `Finite(vertex count)` iff the graph is a cover of the rose (every
    /// vertex has one in- and one out-edge per label); `Infinite` otherwise.
    pub fn index(&self) -> Result<SubgroupIndex, StallingsError> {
        for v in 0..self.vertex_count() as u32 {
            if v != self.basepoint && self.valence(v) <= 1 {
                return Err(StallingsError::NotCore);
            }
        }
        let full = (0..self.vertex_count()).all(|v| {
            (0..self.basis.rank()).all(|g| self.out[v][g].is_some() && self.inn[v][g].is_some())
        });
        if full {
            Ok(SubgroupIndex::Finite(self.vertex_count()))
        } else {
            Ok(SubgroupIndex::Infinite)
        }
    }

    pub fn is_rose(&self) -> bool {
        self.vertex_count() == 1
            && (0..self.basis.rank()).all(|g| self.out[0][g].is_some())
    }

    /// Length of the shortest cycle in the underlying (undirected) graph.
    pub fn girth(&self) -> Result<usize, StallingsError> {
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for v in 0..self.vertex_count() as u32 {
            for g in 0..self.basis.rank() {
                if let Some(t) = self.out[v as usize][g] {
                    edges.push((v, t));
                }
            }
        }
        let mut best: Option<usize> = None;
        for (skip, &(u, v)) in edges.iter().enumerate() {
            if u == v {
                return Ok(1);
            }
            // shortest u-v path avoiding edge `skip`
            let mut dist = vec![usize::MAX; self.vertex_count()];
            dist[u as usize] = 0;
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(u);
            'bfs: while let Some(x) = queue.pop_front() {
                for (i, &(a, b)) in edges.iter().enumerate() {
                    if i == skip {
                        continue;
                    }
                    for (p, q) in [(a, b), (b, a)] {
                        if p == x && dist[q as usize] == usize::MAX {
                            dist[q as usize] = dist[x as usize] + 1;
                            if q == v {
                                break 'bfs;
                            }
                            queue.push_back(q);
                        }
                    }
                }
            }
            if dist[v as usize] != usize::MAX {
                let cycle = dist[v as usize] + 1;
                best = Some(best.map_or(cycle, |b| b.min(cycle)));
            }
        }
        best.ok_or(StallingsError::Forest)
    }

    /// Dump format: `basepoint <id>` header, then one `u <label> v` line per
    /// edge, in canonical order.
    pub fn write_dump(&self) -> String {
        let mut s = format!("basepoint {}\n", self.basepoint);
        for v in 0..self.vertex_count() as u32 {
            for g in 0..self.basis.rank() {
                if let Some(t) = self.out[v as usize][g] {
                    s.push_str(&format!("{} {} {}\n", v, Letter::new(g, false).to_char(), t));
                }
            }
        }
        s
    }

    pub fn parse_dump(basis: Basis, text: &str) -> Result<FoldedGraph, StallingsError> {
        let mut basepoint: Option<u32> = None;
        let mut edges: Vec<(u32, usize, u32)> = Vec::new();
        let mut max_v = 0u32;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let line_no = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("basepoint") {
                basepoint = Some(rest.trim().parse().map_err(|_| StallingsError::Parse {
                    line: line_no,
                    msg: "bad basepoint id".into(),
                })?);
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(StallingsError::Parse {
                    line: line_no,
                    msg: "expected `u label v`".into(),
                });
            }
            let u: u32 = parts[0].parse().map_err(|_| StallingsError::Parse {
                line: line_no,
                msg: "bad vertex id".into(),
            })?;
            let v: u32 = parts[2].parse().map_err(|_| StallingsError::Parse {
                line: line_no,
                msg: "bad vertex id".into(),
            })?;
            let l = parts[1]
                .chars()
                .next()
                .and_then(Letter::from_char)
                .filter(|l| !l.is_inverse() && basis.contains(*l))
                .ok_or(StallingsError::Parse {
                    line: line_no,
                    msg: format!("bad label {:?}", parts[1]),
                })?;
            max_v = max_v.max(u).max(v);
            edges.push((u, l.generator(), v));
        }
        let basepoint = basepoint.ok_or(StallingsError::Parse {
            line: 0,
            msg: "missing basepoint header".into(),
        })?;
        Ok(FoldedGraph::from_edge_list(
            basis,
            edges,
            max_v + 1,
            basepoint,
        ))
    }
}

impl fmt::Debug for FoldedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FoldedGraph(V={}, E={}, base={})",
            self.vertex_count(),
            self.edge_count(),
            self.basepoint
        )
    }
}

/// Union-find folding. Returns deduplicated folded edges on compacted
/// vertex ids, the vertex count, and the image of the basepoint.
fn fold_edges(
    mut edges: Vec<(u32, usize, u32)>,
    n: u32,
    order: FoldOrder,
) -> (Vec<(u32, usize, u32)>, u32, u32) {
    let mut uf = UnionFind::new(n as usize);
    loop {
        let mut merge: Option<(u32, u32)> = None;
        let mut out_seen: HashMap<(u32, usize), u32> = HashMap::new();
        let mut in_seen: HashMap<(u32, usize), u32> = HashMap::new();
        let iter: Box<dyn Iterator<Item = &(u32, usize, u32)>> = match order {
            FoldOrder::First => Box::new(edges.iter()),
            FoldOrder::Last => Box::new(edges.iter().rev()),
        };
        for &(u, g, v) in iter {
            let cu = uf.find(u);
            let cv = uf.find(v);
            if let Some(&prev) = out_seen.get(&(cu, g)) {
                if prev != cv {
                    merge = Some((prev, cv));
                    break;
                }
            } else {
                out_seen.insert((cu, g), cv);
            }
            if let Some(&prev) = in_seen.get(&(cv, g)) {
                if prev != cu {
                    merge = Some((prev, cu));
                    break;
                }
            } else {
                in_seen.insert((cv, g), cu);
            }
        }
        match merge {
            Some((a, b)) => uf.union(a, b),
            None => break,
        }
    }
    // compact classes and deduplicate edges
    let mut remap: HashMap<u32, u32> = HashMap::new();
    let mut next = 0u32;
    let id = |c: u32, remap: &mut HashMap<u32, u32>, next: &mut u32| -> u32 {
        *remap.entry(c).or_insert_with(|| {
            let v = *next;
            *next += 1;
            v
        })
    };
    let base = id(uf.find(0), &mut remap, &mut next);
    let mut seen = std::collections::HashSet::new();
    edges = edges
        .into_iter()
        .filter_map(|(u, g, v)| {
            let cu = id(uf.find(u), &mut remap, &mut next);
            let cv = id(uf.find(v), &mut remap, &mut next);
            if seen.insert((cu, g, cv)) {
                Some((cu, g, cv))
            } else {
                None
            }
        })
        .collect();
    (edges, next, base)
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[rb as usize] = ra;
        }
    }
}

/// True iff some conjugate of the subgroup of `h` lies in the subgroup of
/// `v`: searched as a label-preserving morphism between cyclic cores. The
/// target is folded, so a morphism is determined by the image of one vertex.
pub fn conjugate_into(h: &FoldedGraph, v: &FoldedGraph) -> bool {
    let hc = h.cyclic_core();
    let vc = v.cyclic_core();
    if hc.edge_count() == 0 {
        return true;
    }
    'targets: for target in 0..vc.vertex_count() as u32 {
        let mut image: Vec<Option<u32>> = vec![None; hc.vertex_count()];
        image[0] = Some(target);
        let mut queue = std::collections::VecDeque::from([0u32]);
        while let Some(u) = queue.pop_front() {
            let m = image[u as usize].unwrap();
            for g in 0..hc.basis().rank() {
                let pairs = [
                    (hc.out_edge(u, g), vc.out_edge(m, g)),
                    (hc.in_edge(u, g), vc.in_edge(m, g)),
                ];
                for (hu, vm) in pairs {
                    if let Some(hu) = hu {
                        let Some(vm) = vm else { continue 'targets };
                        match image[hu as usize] {
                            None => {
                                image[hu as usize] = Some(vm);
                                queue.push_back(hu);
                            }
                            Some(prev) if prev != vm => continue 'targets,
                            _ => {}
                        }
                    }
                }
            }
        }
        return true;
    }
    false
}

/// True iff the folded based graph of the generator images is the rose,
/// i.e. the image subgroup is the whole group.
pub fn is_surjective(phi: &Endomorphism) -> bool {
    FoldedGraph::subgroup_graph(phi.basis(), phi.images()).is_rose()
}

/// Rank of the image subgroup; `rank < n` certifies a kernel.
pub fn image_rank(phi: &Endomorphism) -> usize {
    FoldedGraph::subgroup_graph(phi.basis(), phi.images()).rank()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Surjective,
    ExpansiveLikely,
    NotExpansive,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Surjective => "Surjective",
            Verdict::ExpansiveLikely => "ExpansiveLikely",
            Verdict::NotExpansive => "NotExpansive",
            Verdict::Inconclusive => "Inconclusive",
        };
        write!(f, "{s}")
    }
}

/// Result of probing iterated image subgroups. The verdict is a
/// semi-decision: `ExpansiveLikely` is evidence, not proof.
#[derive(Clone, Debug)]
pub struct ExpansivenessReport {
    pub verdict: Verdict,
    /// `(k, girth of the core of the subgroup graph of the k-th image)`.
    pub girth_sequence: Vec<(u32, usize)>,
    pub kmax: u32,
}

/// Probe expansiveness of `phi` by folding the subgroup graphs of its
/// iterated images and watching their girth.
pub fn expansiveness_probe(
    phi: &Endomorphism,
    kmax: u32,
) -> Result<ExpansivenessReport, StallingsError> {
    let n = phi.rank();
    let rank = image_rank(phi);
    if rank < n {
        return Err(StallingsError::NotInjectiveWitness {
            image_rank: rank,
            rank: n,
        });
    }
    let surjective = is_surjective(phi);
    let mut girths: Vec<(u32, usize)> = Vec::with_capacity(kmax as usize);
    let mut fixed_generator = false;
    let mut images: Vec<Word> = phi.images().to_vec();
    for k in 1..=kmax {
        let graph = FoldedGraph::subgroup_graph(phi.basis(), &images);
        let girth = graph.girth().unwrap_or(usize::MAX);
        girths.push((k, girth));
        for (g, img) in phi.basis().generators().zip(&images) {
            if img.letters() == [g] {
                fixed_generator = true;
            }
        }
        if k < kmax {
            images = images.iter().map(|w| phi.apply(w)).collect();
        }
    }
    let girth_values: Vec<usize> = girths.iter().map(|&(_, g)| g).collect();
    let tail_constant = girth_values.len() >= 3
        && girth_values[girth_values.len() - 3..]
            .windows(2)
            .all(|w| w[0] == w[1]);
    let m = (kmax as usize).div_ceil(2);
    let tail_increasing = girth_values[girth_values.len() - m..]
        .windows(2)
        .all(|w| w[0] < w[1]);
    let verdict = if surjective {
        Verdict::Surjective
    } else if fixed_generator || tail_constant {
        Verdict::NotExpansive
    } else if tail_increasing {
        Verdict::ExpansiveLikely
    } else {
        Verdict::Inconclusive
    };
    Ok(ExpansivenessReport {
        verdict,
        girth_sequence: girths,
        kmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::sampling;

    fn b2() -> Basis {
        Basis::new(2).unwrap()
    }

    fn words(basis: &Basis, ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|s| Word::parse(s, basis).unwrap()).collect()
    }

    fn tm() -> Endomorphism {
        Endomorphism::from_images(2, &["ab", "ba"]).unwrap()
    }

    #[test]
    fn hand_folding_oracle_ab_ba() {
        let g = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["ab", "ba"]));
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 4);
        // v -a-> x, x -b-> v, v -b-> y, y -a-> v
        let v = g.basepoint();
        let x = g.out_edge(v, 0).unwrap();
        let y = g.out_edge(v, 1).unwrap();
        assert_ne!(x, y);
        assert_eq!(g.out_edge(x, 1), Some(v));
        assert_eq!(g.out_edge(y, 0), Some(v));
    }

    #[test]
    fn single_generator_and_rose() {
        let g = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["a"]));
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 1);
        assert!(!g.is_rose());
        let rose = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["a", "b"]));
        assert!(rose.is_rose());
    }

    #[test]
    fn membership_examples() {
        let g = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["ab", "ba"]));
        assert!(g.contains(&Word::parse("abba", &b2()).unwrap()));
        assert!(!g.contains(&Word::parse("a", &b2()).unwrap()));
        assert!(g.contains(&Word::identity()));
    }

    #[test]
    fn index_examples() {
        let g = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["a", "bb", "baB"]));
        assert_eq!(g.index().unwrap(), SubgroupIndex::Finite(2));
        let h = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["ab", "ba"]));
        assert_eq!(h.index().unwrap(), SubgroupIndex::Infinite);
        let rose = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["a", "b"]));
        assert_eq!(rose.index().unwrap(), SubgroupIndex::Finite(1));
    }

    #[test]
    fn index_requires_core() {
        // hand-build a graph with a dangling vertex: basepoint --a--> v
        let g = FoldedGraph::from_edge_list(b2(), vec![(0, 0, 1)], 2, 0);
        assert_eq!(g.index().unwrap_err(), StallingsError::NotCore);
    }

    #[test]
    fn conjugate_into_examples() {
        let h = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["baB"]));
        let v = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["a"]));
        assert!(conjugate_into(&h, &v));
        let full = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["a", "b"]));
        assert!(!conjugate_into(&full, &v));
        // the 3-generator example: the image subgroup lies in <a, b>
        let b3 = Basis::new(3).unwrap();
        let image = FoldedGraph::subgroup_graph(b3, &words(&b3, &["a", "baB", "bbaBB"]));
        let ab = FoldedGraph::subgroup_graph(b3, &words(&b3, &["a", "b"]));
        assert!(conjugate_into(&image, &ab));
    }

    #[test]
    fn girth_examples() {
        let g = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["ab", "ba"]));
        assert_eq!(g.girth().unwrap(), 2);
        let rose = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["a", "b"]));
        assert_eq!(rose.girth().unwrap(), 1);
        let phi2 = tm().power(2);
        let g2 = FoldedGraph::subgroup_graph(b2(), phi2.images());
        assert_eq!(g2.girth().unwrap(), 4);
        let trivial = FoldedGraph::subgroup_graph(b2(), &[]);
        assert_eq!(trivial.girth().unwrap_err(), StallingsError::Forest);
    }

    #[test]
    fn surjectivity_examples() {
        let fib = Endomorphism::from_images(2, &["b", "ba"]).unwrap();
        assert!(is_surjective(&fib));
        assert!(!is_surjective(&tm()));
        assert!(is_surjective(&Endomorphism::identity(b2())));
    }

    #[test]
    fn probe_examples() {
        let report = expansiveness_probe(&tm(), 5).unwrap();
        assert_eq!(report.verdict, Verdict::ExpansiveLikely);
        assert_eq!(report.girth_sequence.len(), 5);
        assert_eq!(report.girth_sequence[0], (1, 2));
        assert_eq!(report.girth_sequence[1], (2, 4));
        let fib = Endomorphism::from_images(2, &["b", "ba"]).unwrap();
        assert_eq!(
            expansiveness_probe(&fib, 3).unwrap().verdict,
            Verdict::Surjective
        );
        let ex = Endomorphism::from_images(3, &["a", "baB", "bbaBB"]).unwrap();
        let r = expansiveness_probe(&ex, 4).unwrap();
        assert_eq!(r.verdict, Verdict::NotExpansive);
        assert!(r.girth_sequence.iter().all(|&(_, g)| g == 1));
    }

    #[test]
    fn probe_detects_kernel() {
        let phi = Endomorphism::from_images(2, &["a", "a"]).unwrap();
        assert_eq!(
            expansiveness_probe(&phi, 2).unwrap_err(),
            StallingsError::NotInjectiveWitness {
                image_rank: 1,
                rank: 2
            }
        );
    }

    #[test]
    fn folding_confluent_small() {
        let mut rng = SplitMix64::new(0xf01d);
        for _ in 0..100 {
            let count = rng.range(1, 3);
            let gens: Vec<Word> = (0..count)
                .map(|_| sampling::random_nontrivial_word(&mut rng, b2(), 1..=6))
                .collect();
            let first = FoldedGraph::subgroup_graph_with_order(b2(), &gens, FoldOrder::First);
            let last = FoldedGraph::subgroup_graph_with_order(b2(), &gens, FoldOrder::Last);
            assert_eq!(first, last);
        }
    }

    #[test]
    fn membership_soundness_seeded() {
        let mut rng = SplitMix64::new(0x5eed_0005);
        for _ in 0..100 {
            let count = rng.range(1, 3);
            let gens: Vec<Word> = (0..count)
                .map(|_| sampling::random_nontrivial_word(&mut rng, b2(), 1..=5))
                .collect();
            let graph = FoldedGraph::subgroup_graph(b2(), &gens);
            // random product of generators is a member
            let mut h = Word::identity();
            for _ in 0..rng.range(1, 4) {
                let pick = &gens[rng.below(gens.len())];
                let factor = if rng.chance(0.5) {
                    pick.clone()
                } else {
                    pick.inverse()
                };
                h = h.concat(&factor);
            }
            assert!(graph.contains(&h));
            // a rejected short word is not any product of up to 3 factors
            let len = rng.range(1, 6);
            let w = sampling::random_reduced_word(&mut rng, b2(), len);
            if !graph.contains(&w) {
                let mut products = vec![Word::identity()];
                for _ in 0..3 {
                    let mut next = Vec::new();
                    for p in &products {
                        for gword in &gens {
                            next.push(p.concat(gword));
                            next.push(p.concat(&gword.inverse()));
                        }
                    }
                    products.extend(next);
                }
                assert!(products.iter().all(|p| *p != w));
            }
        }
    }

    #[test]
    fn index_one_iff_rose() {
        let mut rng = SplitMix64::new(0x5eed_0006);
        for _ in 0..100 {
            let gens: Vec<Word> = (0..rng.range(1, 3))
                .map(|_| sampling::random_nontrivial_word(&mut rng, b2(), 1..=5))
                .collect();
            let graph = FoldedGraph::subgroup_graph(b2(), &gens);
            let index_one = graph.index() == Ok(SubgroupIndex::Finite(1));
            assert_eq!(index_one, graph.is_rose());
        }
    }

    #[test]
    fn conjugate_into_reflexive_and_monotone() {
        let mut rng = SplitMix64::new(0x5eed_0007);
        for _ in 0..50 {
            let gens: Vec<Word> = (0..rng.range(1, 2))
                .map(|_| sampling::random_nontrivial_word(&mut rng, b2(), 1..=5))
                .collect();
            let h = FoldedGraph::subgroup_graph(b2(), &gens);
            assert!(conjugate_into(&h, &h));
            // enlarge: V = <gens, extra> contains H, so H conj-into V
            let mut bigger = gens.clone();
            bigger.push(sampling::random_nontrivial_word(&mut rng, b2(), 1..=4));
            let v = FoldedGraph::subgroup_graph(b2(), &bigger);
            assert!(conjugate_into(&h, &v));
        }
    }

    #[test]
    fn dump_roundtrip() {
        let g = FoldedGraph::subgroup_graph(b2(), &words(&b2(), &["ab", "ba"]));
        let dump = g.write_dump();
        let back = FoldedGraph::parse_dump(b2(), &dump).unwrap();
        assert_eq!(g, back);
    }
}
