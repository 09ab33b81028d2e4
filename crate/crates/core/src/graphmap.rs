//! Marked graphs and graph self-maps: transition matrices, primitivity,
//! Perron–Frobenius data, turn analysis, and immersion detection.
//!
//! A [`MarkedGraph`] is a finite connected graph together with a marking:
//! one tight edge-loop per basis generator, based at a common vertex, that
//! identifies the fundamental group with the free group. A [`GraphMap`] is a
//! self-map sending vertices to vertices and edges to tight edge paths.

use std::fmt;

use thiserror::Error;

use crate::stallings;
use crate::word::{Basis, Endomorphism, Letter, Word, WordError};

#[derive(Debug, Error, PartialEq, Clone)]
pub enum GraphMapError {
    #[error("trivial image: an edge image is empty where dynamics needs expansion")]
    TrivialImage,
    #[error("degenerate edge: an edge maps to a vertex, turn analysis undefined")]
    DegenerateEdge,
    #[error("transition matrix is not primitive")]
    NotPrimitive,
    #[error("surjective input: automorphisms admit no expanding immersion representative")]
    SurjectiveInput,
    #[error("non-injective input: image subgroup has rank {image_rank} < {rank}")]
    NotInjective { image_rank: usize, rank: usize },
    #[error("fold budget of {budget} exhausted after {performed} elementary moves")]
    FoldBudgetExceeded { budget: usize, performed: usize },
    #[error("fold would drop the graph rank; the map cannot be injective")]
    RankDropped,
    #[error("folded representative failed the length-spectrum check at class {class}")]
    RepresentativeCheck { class: String },
    #[error("invalid marked graph: {0}")]
    InvalidGraph(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// An oriented edge: code `2 * edge + 1` for the reversed orientation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dir(u32);

impl Dir {
    pub fn new(edge: usize, reversed: bool) -> Dir {
        Dir((edge as u32) << 1 | reversed as u32)
    }

    pub fn edge(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_reversed(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn reversed(self) -> Dir {
        Dir(self.0 ^ 1)
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_code(code: usize) -> Dir {
        Dir(code as u32)
    }
}

impl fmt::Debug for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}{}", self.edge(), if self.is_reversed() { "'" } else { "" })
    }
}

/// A path of oriented edges. Invariants are maintained by the helpers below,
/// not by the type.
pub type EdgePath = Vec<Dir>;

/// Remove backtracking (`d` followed by `d` reversed).
pub fn tighten(path: &[Dir]) -> EdgePath {
    let mut stack: EdgePath = Vec::with_capacity(path.len());
    for &d in path {
        if stack.last() == Some(&d.reversed()) {
            stack.pop();
        } else {
            stack.push(d);
        }
    }
    stack
}

/// Tighten a loop cyclically: free reduction plus cancellation across the
/// wrap-around.
pub fn cyclic_tighten(path: &[Dir]) -> EdgePath {
    let mut v = tighten(path);
    let mut lo = 0usize;
    let mut hi = v.len();
    while hi - lo >= 2 && v[lo] == v[hi - 1].reversed() {
        lo += 1;
        hi -= 1;
    }
    v.truncate(hi);
    v.drain(..lo);
    v
}

pub fn invert_path(path: &[Dir]) -> EdgePath {
    path.iter().rev().map(|d| d.reversed()).collect()
}

/// A finite connected marked graph of the same rank as its basis.
#[derive(Clone, PartialEq)]
pub struct MarkedGraph {
    basis: Basis,
    vertex_count: usize,
    edges: Vec<(u32, u32)>,
    base: u32,
    marking: Vec<EdgePath>,
}

impl MarkedGraph {
    /// The rose: one vertex, one loop per generator, identity marking.
    pub fn rose(basis: Basis) -> MarkedGraph {
        MarkedGraph {
            basis,
            vertex_count: 1,
            edges: vec![(0, 0); basis.rank()],
            base: 0,
            marking: (0..basis.rank()).map(|e| vec![Dir::new(e, false)]).collect(),
        }
    }

    /// The rose with marking twisted by an endomorphism: generator `x` is
    /// marked by the loop spelling `psi(x)`. Requires `psi` to be
    /// pi1-surjective (e.g. an automorphism) so the marking is valid.
    pub fn rose_marked(psi: &Endomorphism) -> Result<MarkedGraph, GraphMapError> {
        let basis = psi.basis();
        let marking = psi.images().iter().map(word_as_rose_path).collect();
        MarkedGraph::new(basis, 1, vec![(0, 0); basis.rank()], 0, marking)
    }

    pub fn new(
        basis: Basis,
        vertex_count: usize,
        edges: Vec<(u32, u32)>,
        base: u32,
        marking: Vec<EdgePath>,
    ) -> Result<MarkedGraph, GraphMapError> {
        let graph = MarkedGraph {
            basis,
            vertex_count,
            edges,
            base,
            marking,
        };
        graph.validate()?;
        Ok(graph)
    }

    fn validate(&self) -> Result<(), GraphMapError> {
        if self.vertex_count == 0 {
            return Err(GraphMapError::InvalidGraph("no vertices".into()));
        }
        if (self.base as usize) >= self.vertex_count {
            return Err(GraphMapError::InvalidGraph("basepoint out of range".into()));
        }
        for &(u, v) in &self.edges {
            if u as usize >= self.vertex_count || v as usize >= self.vertex_count {
                return Err(GraphMapError::InvalidGraph("edge endpoint out of range".into()));
            }
        }
        // connectivity
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![self.base];
        seen[self.base as usize] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                for (p, q) in [(a, b), (b, a)] {
                    if p == v && !seen[q as usize] {
                        seen[q as usize] = true;
                        stack.push(q);
                    }
                }
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(GraphMapError::InvalidGraph("graph is not connected".into()));
        }
        let rank = self.edges.len() + 1 - self.vertex_count;
        if rank != self.basis.rank() {
            return Err(GraphMapError::InvalidGraph(format!(
                "graph rank {} does not match basis rank {}",
                rank,
                self.basis.rank()
            )));
        }
        if self.marking.len() != self.basis.rank() {
            return Err(GraphMapError::InvalidGraph("one marking loop per generator required".into()));
        }
        for path in &self.marking {
            if tighten(path) != *path {
                return Err(GraphMapError::InvalidGraph("marking loop is not tight".into()));
            }
            let mut at = self.base;
            for &d in path {
                if self.dir_from(d) != at {
                    return Err(GraphMapError::InvalidGraph("marking path is not connected".into()));
                }
                at = self.dir_to(d);
            }
            if at != self.base {
                return Err(GraphMapError::InvalidGraph("marking path is not a based loop".into()));
            }
        }
        // pi1-surjectivity of the marking, via the spanning-tree basis
        let collapse = self.collapse_endomorphism();
        if !stallings::is_surjective(&collapse) {
            return Err(GraphMapError::InvalidGraph(
                "marking is not pi1-surjective".into(),
            ));
        }
        Ok(())
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn edge_endpoints(&self, e: usize) -> (u32, u32) {
        self.edges[e]
    }

    pub fn marking(&self, generator: usize) -> &EdgePath {
        &self.marking[generator]
    }

    pub fn dir_from(&self, d: Dir) -> u32 {
        let (u, v) = self.edges[d.edge()];
        if d.is_reversed() {
            v
        } else {
            u
        }
    }

    pub fn dir_to(&self, d: Dir) -> u32 {
        self.dir_from(d.reversed())
    }

    pub fn directions(&self) -> impl Iterator<Item = Dir> {
        (0..2 * self.edges.len()).map(Dir::from_code)
    }

    pub fn is_rose(&self) -> bool {
        self.vertex_count == 1
    }

    /// Identity marking: petal `i` marks generator `i`.
    pub fn has_identity_marking(&self) -> bool {
        self.is_rose()
            && self
                .marking
                .iter()
                .enumerate()
                .all(|(i, p)| p.as_slice() == [Dir::new(i, false)])
    }

    /// The tight edge path spelled by a word through the marking.
    pub fn word_to_path(&self, w: &Word) -> EdgePath {
        let mut out: EdgePath = Vec::new();
        for &l in w.letters() {
            let img = &self.marking[l.generator()];
            if l.is_inverse() {
                for d in img.iter().rev() {
                    push_tight(&mut out, d.reversed());
                }
            } else {
                for &d in img {
                    push_tight(&mut out, d);
                }
            }
        }
        out
    }

    /// Cyclically tight loop representing the conjugacy class of `w`.
    pub fn cyclic_path(&self, w: &Word) -> EdgePath {
        cyclic_tighten(&self.word_to_path(w))
    }

    /// BFS spanning tree: for each non-base vertex, the direction leading to
    /// it from its parent; plus the list of non-tree edges in edge order.
    pub(crate) fn spanning_tree(&self) -> (Vec<Option<Dir>>, Vec<usize>) {
        let mut parent: Vec<Option<Dir>> = vec![None; self.vertex_count];
        let mut seen = vec![false; self.vertex_count];
        let mut tree_edge = vec![false; self.edges.len()];
        seen[self.base as usize] = true;
        let mut queue = std::collections::VecDeque::from([self.base]);
        while let Some(v) = queue.pop_front() {
            for code in 0..2 * self.edges.len() {
                let d = Dir::from_code(code);
                if self.dir_from(d) == v {
                    let t = self.dir_to(d);
                    if !seen[t as usize] {
                        seen[t as usize] = true;
                        parent[t as usize] = Some(d);
                        tree_edge[d.edge()] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        let nontree = (0..self.edges.len()).filter(|&e| !tree_edge[e]).collect();
        (parent, nontree)
    }

    /// Tight path from the base vertex to `v` through the spanning tree.
    pub(crate) fn tree_path(&self, parent: &[Option<Dir>], v: u32) -> EdgePath {
        let mut back: EdgePath = Vec::new();
        let mut at = v;
        while at != self.base {
            let d = parent[at as usize].expect("spanning tree covers the graph");
            back.push(d);
            at = self.dir_from(d);
        }
        back.reverse();
        back
    }

    /// Express a path as a word over the spanning-tree basis (one letter per
    /// non-tree edge). Collapsing the tree is a pi1 isomorphism.
    pub(crate) fn collapse_path(&self, nontree: &[usize], path: &[Dir]) -> Word {
        let index_of: std::collections::HashMap<usize, usize> = nontree
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i))
            .collect();
        let letters: Vec<Letter> = path
            .iter()
            .filter_map(|d| {
                index_of
                    .get(&d.edge())
                    .map(|&i| Letter::new(i, d.is_reversed()))
            })
            .collect();
        Word::reduce(letters)
    }

    /// The marking expressed over the spanning-tree basis: an endomorphism of
    /// the standard rank-n free group which is surjective exactly when the
    /// marking is pi1-surjective.
    pub(crate) fn collapse_endomorphism(&self) -> Endomorphism {
        let (_, nontree) = self.spanning_tree();
        debug_assert_eq!(nontree.len(), self.basis.rank());
        let images = self
            .marking
            .iter()
            .map(|p| self.collapse_path(&nontree, p))
            .collect();
        Endomorphism::new(self.basis, images).expect("collapse words over the same rank")
    }
}

impl fmt::Debug for MarkedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MarkedGraph(V={}, E={}, rank={})",
            self.vertex_count,
            self.edges.len(),
            self.rank()
        )
    }
}

fn push_tight(stack: &mut EdgePath, d: Dir) {
    if stack.last() == Some(&d.reversed()) {
        stack.pop();
    } else {
        stack.push(d);
    }
}

pub(crate) fn word_as_rose_path(w: &Word) -> EdgePath {
    w.letters()
        .iter()
        .map(|l| Dir::new(l.generator(), l.is_inverse()))
        .collect()
}

pub(crate) fn rose_path_as_word(path: &[Dir]) -> Word {
    Word::reduce(
        path.iter()
            .map(|d| Letter::new(d.edge(), d.is_reversed())),
    )
}

/// A topological self-map of a marked graph: vertices to vertices, edges to
/// tight edge paths whose endpoints match the vertex images.
#[derive(Clone, PartialEq)]
pub struct GraphMap {
    graph: MarkedGraph,
    vertex_map: Vec<u32>,
    edge_map: Vec<EdgePath>,
}

impl GraphMap {
    pub fn new(
        graph: MarkedGraph,
        vertex_map: Vec<u32>,
        edge_map: Vec<EdgePath>,
    ) -> Result<GraphMap, GraphMapError> {
        if vertex_map.len() != graph.vertex_count() || edge_map.len() != graph.edge_count() {
            return Err(GraphMapError::InvalidGraph(
                "vertex/edge map sizes do not match the graph".into(),
            ));
        }
        for &t in &vertex_map {
            if t as usize >= graph.vertex_count() {
                return Err(GraphMapError::InvalidGraph("vertex image out of range".into()));
            }
        }
        for (e, path) in edge_map.iter().enumerate() {
            if tighten(path) != *path {
                return Err(GraphMapError::InvalidGraph(format!(
                    "image of edge {e} is not tight"
                )));
            }
            let (u, v) = graph.edge_endpoints(e);
            let (fu, fv) = (vertex_map[u as usize], vertex_map[v as usize]);
            if path.is_empty() {
                if fu != fv {
                    return Err(GraphMapError::InvalidGraph(format!(
                        "degenerate edge {e} with mismatched endpoint images"
                    )));
                }
            } else {
                let mut at = fu;
                for &d in path {
                    if graph.dir_from(d) != at {
                        return Err(GraphMapError::InvalidGraph(format!(
                            "image of edge {e} is not a path from its start image"
                        )));
                    }
                    at = graph.dir_to(d);
                }
                if at != fv {
                    return Err(GraphMapError::InvalidGraph(format!(
                        "image of edge {e} does not end at its end image"
                    )));
                }
            }
        }
        Ok(GraphMap {
            graph,
            vertex_map,
            edge_map,
        })
    }

    /// The obvious representative on the rose: edge `i` maps to the path
    /// spelling the image of generator `i`.
    pub fn rose_map(phi: &Endomorphism) -> Result<GraphMap, GraphMapError> {
        if phi.images().iter().any(|w| w.is_identity()) && !phi.is_trivial() {
            return Err(GraphMapError::TrivialImage);
        }
        if phi.is_trivial() {
            return Err(GraphMapError::TrivialImage);
        }
        let graph = MarkedGraph::rose(phi.basis());
        let edge_map = phi.images().iter().map(word_as_rose_path).collect();
        GraphMap::new(graph, vec![0], edge_map)
    }

    pub fn graph(&self) -> &MarkedGraph {
        &self.graph
    }

    pub fn vertex_image(&self, v: u32) -> u32 {
        self.vertex_map[v as usize]
    }

    pub fn edge_image(&self, e: usize) -> &EdgePath {
        &self.edge_map[e]
    }

    /// Image of an oriented edge, oriented along `d`.
    pub fn dir_image(&self, d: Dir) -> EdgePath {
        if d.is_reversed() {
            invert_path(&self.edge_map[d.edge()])
        } else {
            self.edge_map[d.edge()].clone()
        }
    }

    /// Substitute edge images along a path, without tightening.
    pub fn map_path(&self, path: &[Dir]) -> EdgePath {
        let mut out = Vec::new();
        for &d in path {
            let img = &self.edge_map[d.edge()];
            if d.is_reversed() {
                out.extend(img.iter().rev().map(|x| x.reversed()));
            } else {
                out.extend(img.iter().copied());
            }
        }
        out
    }

    pub fn map_path_tight(&self, path: &[Dir]) -> EdgePath {
        tighten(&self.map_path(path))
    }

    /// Literal composite `self^r` without tightening; its transition matrix
    /// is exactly the r-th power of the transition matrix.
    pub fn power_raw(&self, r: usize) -> GraphMap {
        let mut vertex_map: Vec<u32> = (0..self.graph.vertex_count() as u32).collect();
        let mut edge_map: Vec<EdgePath> = (0..self.graph.edge_count())
            .map(|e| vec![Dir::new(e, false)])
            .collect();
        for _ in 0..r {
            vertex_map = vertex_map
                .iter()
                .map(|&v| self.vertex_map[v as usize])
                .collect();
            edge_map = edge_map.iter().map(|p| self.map_path(p)).collect();
        }
        GraphMap {
            graph: self.graph.clone(),
            vertex_map,
            edge_map,
        }
    }

    /// Crossing counts: entry `(i, j)` is the number of times the image of
    /// edge `j` crosses edge `i` in either orientation.
    pub fn transition_matrix(&self) -> TransitionMatrix {
        let k = self.graph.edge_count();
        let mut m = TransitionMatrix::zero(k);
        for (j, path) in self.edge_map.iter().enumerate() {
            for d in path {
                *m.entry_mut(d.edge(), j) += 1;
            }
        }
        m
    }

    /// Direction map and illegal-turn classification.
    pub fn turn_table(&self) -> Result<TurnTable, GraphMapError> {
        if self.edge_map.iter().any(|p| p.is_empty()) {
            return Err(GraphMapError::DegenerateEdge);
        }
        let dirs = 2 * self.graph.edge_count();
        let mut direction_map = Vec::with_capacity(dirs);
        for code in 0..dirs {
            let d = Dir::from_code(code);
            let img = if d.is_reversed() {
                self.edge_map[d.edge()].last().unwrap().reversed()
            } else {
                self.edge_map[d.edge()][0]
            };
            direction_map.push(img);
        }
        // enumerate turns: unordered pairs of distinct directions at a vertex
        let mut turns: Vec<(Dir, Dir)> = Vec::new();
        for a in 0..dirs {
            for b in (a + 1)..dirs {
                let (da, db) = (Dir::from_code(a), Dir::from_code(b));
                if self.graph.dir_from(da) == self.graph.dir_from(db) {
                    turns.push((da, db));
                }
            }
        }
        // classify by following the induced map on turns until the orbit
        // repeats (legal) or degenerates (illegal)
        let mut illegal = Vec::new();
        for &(a, b) in &turns {
            let mut seen = std::collections::HashSet::new();
            let (mut x, mut y) = (a, b);
            let degenerates = loop {
                if x == y {
                    break true;
                }
                let key = if x < y { (x, y) } else { (y, x) };
                if !seen.insert(key) {
                    break false;
                }
                x = direction_map[x.code()];
                y = direction_map[y.code()];
            };
            if degenerates {
                illegal.push((a, b));
            }
        }
        Ok(TurnTable {
            direction_map,
            turns,
            illegal,
        })
    }

    /// True iff every edge image is tight and nonempty and there is no
    /// illegal turn; equivalently the map sends reduced paths to reduced
    /// paths.
    pub fn is_immersion(&self) -> bool {
        match self.turn_table() {
            Ok(table) => table.illegal.is_empty(),
            Err(_) => false,
        }
    }

    /// Edge lengths from the Perron–Frobenius theory under which the map
    /// stretches every legal path by the PF eigenvalue: the positive left
    /// eigenvector of the transition matrix, normalized to sum 1.
    pub fn pf_metric(&self) -> Result<(Vec<f64>, f64), GraphMapError> {
        let m = self.transition_matrix();
        let data = pf_data(&m.transpose())?;
        Ok((data.vector, data.lambda))
    }

    /// The outer endomorphism induced on the spanning-tree basis of the
    /// fundamental group. For a rose map this is the defining endomorphism.
    pub fn induced_endomorphism(&self) -> Endomorphism {
        let g = &self.graph;
        let (parent, nontree) = g.spanning_tree();
        let conj = g.tree_path(&parent, self.vertex_map[g.base() as usize]);
        let images = nontree
            .iter()
            .map(|&e| {
                let (u, v) = g.edge_endpoints(e);
                let mut loop_path = g.tree_path(&parent, u);
                loop_path.push(Dir::new(e, false));
                loop_path.extend(invert_path(&g.tree_path(&parent, v)));
                let mut full = conj.clone();
                full.extend(self.map_path(&loop_path));
                full.extend(invert_path(&conj));
                g.collapse_path(&nontree, &tighten(&full))
            })
            .collect();
        let basis = Basis::new(nontree.len()).expect("rank bounded by basis rank");
        Endomorphism::new(basis, images).expect("collapse words over the tree basis")
    }
}

impl fmt::Debug for GraphMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GraphMap on {:?}", self.graph)
    }
}

/// Nonnegative integer crossing-count matrix, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TransitionMatrix {
    n: usize,
    data: Vec<u64>,
}

impl TransitionMatrix {
    pub fn zero(n: usize) -> TransitionMatrix {
        TransitionMatrix {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn from_rows(rows: &[&[u64]]) -> TransitionMatrix {
        let n = rows.len();
        let mut m = TransitionMatrix::zero(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n);
            for (j, &x) in row.iter().enumerate() {
                *m.entry_mut(i, j) = x;
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.n + j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut u64 {
        &mut self.data[i * self.n + j]
    }

    pub fn identity(n: usize) -> TransitionMatrix {
        let mut m = TransitionMatrix::zero(n);
        for i in 0..n {
            *m.entry_mut(i, i) = 1;
        }
        m
    }

    pub fn mul(&self, other: &TransitionMatrix) -> TransitionMatrix {
        assert_eq!(self.n, other.n);
        let mut out = TransitionMatrix::zero(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                let a = self.entry(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..self.n {
                    *out.entry_mut(i, j) += a * other.entry(k, j);
                }
            }
        }
        out
    }

    pub fn pow(&self, r: usize) -> TransitionMatrix {
        let mut out = TransitionMatrix::identity(self.n);
        for _ in 0..r {
            out = out.mul(self);
        }
        out
    }

    pub fn transpose(&self) -> TransitionMatrix {
        let mut out = TransitionMatrix::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                *out.entry_mut(j, i) = self.entry(i, j);
            }
        }
        out
    }

    /// Primitivity over the boolean semiring: some power up to the Wielandt
    /// bound `(n-1)^2 + 1` is entrywise positive. This equals irreducibility
    /// of every power.
    pub fn is_primitive(&self) -> bool {
        let n = self.n;
        if n == 0 {
            return false;
        }
        let bound = (n - 1) * (n - 1) + 1;
        let base: Vec<bool> = self.data.iter().map(|&x| x > 0).collect();
        let mut acc = base.clone();
        for _ in 0..bound {
            if acc.iter().all(|&b| b) {
                return true;
            }
            let mut next = vec![false; n * n];
            for i in 0..n {
                for k in 0..n {
                    if acc[i * n + k] {
                        for j in 0..n {
                            if base[k * n + j] {
                                next[i * n + j] = true;
                            }
                        }
                    }
                }
            }
            if next == acc {
                return false;
            }
            acc = next;
        }
        acc.iter().all(|&b| b)
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j)).collect())
            .collect()
    }
}

impl fmt::Display for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.entry(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Perron–Frobenius eigenvalue and positive eigenvector (sum-normalized),
/// computed by power iteration.
#[derive(Clone, Debug)]
pub struct PFData {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

const PF_LAMBDA_TOL: f64 = 1e-12;
const PF_RESIDUAL_GATE: f64 = 1e-9;
const PF_MAX_ITER: usize = 100_000;

/// Power iteration on a primitive matrix until successive eigenvalue
/// estimates differ by less than `1e-12` (at most `1e5` iterations).
pub fn pf_data(m: &TransitionMatrix) -> Result<PFData, GraphMapError> {
    if !m.is_primitive() {
        return Err(GraphMapError::NotPrimitive);
    }
    let n = m.size();
    let mut v = vec![1.0 / n as f64; n];
    let mut lambda = 0.0f64;
    for _ in 0..PF_MAX_ITER {
        let mut w = vec![0.0f64; n];
        for (i, slot) in w.iter_mut().enumerate() {
            for (j, &vj) in v.iter().enumerate() {
                *slot += m.entry(i, j) as f64 * vj;
            }
        }
        let total: f64 = w.iter().sum();
        let next_lambda = total;
        for x in w.iter_mut() {
            *x /= total;
        }
        let done = (next_lambda - lambda).abs() < PF_LAMBDA_TOL;
        v = w;
        lambda = next_lambda;
        if done && pf_residual(m, &v, lambda) < PF_RESIDUAL_GATE {
            break;
        }
    }
    let residual = pf_residual(m, &v, lambda);
    Ok(PFData {
        lambda,
        vector: v,
        residual,
    })
}

fn pf_residual(m: &TransitionMatrix, v: &[f64], lambda: f64) -> f64 {
    let mut worst = 0.0f64;
    for (i, &vi) in v.iter().enumerate() {
        let mut mv = 0.0;
        for (j, &vj) in v.iter().enumerate() {
            mv += m.entry(i, j) as f64 * vj;
        }
        worst = worst.max((mv - lambda * vi).abs());
    }
    worst
}

/// Turns (unordered pairs of directions at a common vertex), the direction
/// map, and the set of turns whose orbit degenerates.
#[derive(Clone, Debug)]
pub struct TurnTable {
    pub direction_map: Vec<Dir>,
    pub turns: Vec<(Dir, Dir)>,
    pub illegal: Vec<(Dir, Dir)>,
}

/// Fold a representative into an immersion of the same outer endomorphism.
/// See the `fold` module for the elementary moves; this is the public entry.
pub fn fold_to_immersion(f: &GraphMap, max_folds: usize) -> Result<GraphMap, GraphMapError> {
    crate::fold::fold_to_immersion(f, max_folds)
}

/// Default elementary-move budget for [`fold_to_immersion`].
pub fn default_fold_budget(phi: &Endomorphism) -> usize {
    10 * phi.rank() * phi.total_image_length().max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tm() -> Endomorphism {
        Endomorphism::from_images(2, &["ab", "ba"]).unwrap()
    }

    fn fib() -> Endomorphism {
        Endomorphism::from_images(2, &["b", "ba"]).unwrap()
    }

    #[test]
    fn rose_map_examples() {
        let f = GraphMap::rose_map(&tm()).unwrap();
        assert_eq!(f.edge_image(0), &vec![Dir::new(0, false), Dir::new(1, false)]);
        let id = GraphMap::rose_map(&Endomorphism::identity(Basis::new(2).unwrap())).unwrap();
        assert_eq!(id.edge_image(0), &vec![Dir::new(0, false)]);
        let partial = Endomorphism::from_images(2, &["", "b"]).unwrap();
        assert_eq!(GraphMap::rose_map(&partial).unwrap_err(), GraphMapError::TrivialImage);
    }

    #[test]
    fn transition_matrix_examples() {
        let m = GraphMap::rose_map(&tm()).unwrap().transition_matrix();
        assert_eq!(m.rows(), vec![vec![1, 1], vec![1, 1]]);
        let m = GraphMap::rose_map(&fib()).unwrap().transition_matrix();
        assert_eq!(m.rows(), vec![vec![0, 1], vec![1, 1]]);
        let id = GraphMap::rose_map(&Endomorphism::identity(Basis::new(2).unwrap())).unwrap();
        assert_eq!(id.transition_matrix(), TransitionMatrix::identity(2));
    }

    #[test]
    fn primitivity_examples() {
        assert!(TransitionMatrix::from_rows(&[&[1, 1], &[1, 1]]).is_primitive());
        assert!(!TransitionMatrix::identity(2).is_primitive());
        assert!(!TransitionMatrix::from_rows(&[&[0, 1], &[1, 0]]).is_primitive());
        assert!(TransitionMatrix::from_rows(&[&[2]]).is_primitive());
    }

    #[test]
    fn pf_examples() {
        let d = pf_data(&TransitionMatrix::from_rows(&[&[1, 1], &[1, 1]])).unwrap();
        assert!((d.lambda - 2.0).abs() < 1e-9);
        assert!((d.vector[0] - 0.5).abs() < 1e-9);
        assert!(d.residual < 1e-9);
        let d = pf_data(&TransitionMatrix::from_rows(&[&[0, 1], &[1, 1]])).unwrap();
        assert!((d.lambda - 1.618033988749895).abs() < 1e-9);
        let d = pf_data(&TransitionMatrix::from_rows(&[&[2]])).unwrap();
        assert!((d.lambda - 2.0).abs() < 1e-12);
        assert_eq!(d.vector, vec![1.0]);
        assert_eq!(
            pf_data(&TransitionMatrix::identity(2)).unwrap_err(),
            GraphMapError::NotPrimitive
        );
    }

    #[test]
    fn turn_table_examples() {
        let f = GraphMap::rose_map(&tm()).unwrap();
        let t = f.turn_table().unwrap();
        // a -> a, b -> b, a' -> b', b' -> a'
        assert_eq!(t.direction_map[Dir::new(0, false).code()], Dir::new(0, false));
        assert_eq!(t.direction_map[Dir::new(1, false).code()], Dir::new(1, false));
        assert_eq!(t.direction_map[Dir::new(0, true).code()], Dir::new(1, true));
        assert_eq!(t.direction_map[Dir::new(1, true).code()], Dir::new(0, true));
        assert!(t.illegal.is_empty());

        let f = GraphMap::rose_map(&fib()).unwrap();
        let t = f.turn_table().unwrap();
        assert_eq!(t.direction_map[Dir::new(0, false).code()], Dir::new(1, false));
        assert_eq!(t.direction_map[Dir::new(1, false).code()], Dir::new(1, false));
        assert!(t
            .illegal
            .contains(&(Dir::new(0, false), Dir::new(1, false))));

        let f = GraphMap::rose_map(&Endomorphism::from_images(2, &["aab", "ba"]).unwrap()).unwrap();
        assert!(f.turn_table().unwrap().illegal.is_empty());
    }

    #[test]
    fn immersion_examples() {
        assert!(GraphMap::rose_map(&tm()).unwrap().is_immersion());
        assert!(!GraphMap::rose_map(&fib()).unwrap().is_immersion());
        let swap = Endomorphism::from_images(2, &["b", "a"]).unwrap();
        assert!(GraphMap::rose_map(&swap).unwrap().is_immersion());
    }

    #[test]
    fn pf_metric_scales_legal_paths() {
        let f = GraphMap::rose_map(&tm()).unwrap();
        let (metric, lambda) = f.pf_metric().unwrap();
        assert!((metric[0] - 0.5).abs() < 1e-9);
        let img_len: f64 = f.edge_image(0).iter().map(|d| metric[d.edge()]).sum();
        assert!((img_len - lambda * metric[0]).abs() < 1e-9);

        let g = GraphMap::rose_map(&Endomorphism::from_images(2, &["aab", "ba"]).unwrap()).unwrap();
        let (metric, lambda) = g.pf_metric().unwrap();
        assert!((lambda - (3.0 + 5.0f64.sqrt()) / 2.0).abs() < 1e-9);
        for e in 0..2 {
            let img_len: f64 = g.edge_image(e).iter().map(|d| metric[d.edge()]).sum();
            assert!((img_len - lambda * metric[e]).abs() < 1e-9);
        }
        // asymmetric case: the left eigenvector is the one that scales
        let h = GraphMap::rose_map(&Endomorphism::from_images(2, &["ab", "aab"]).unwrap()).unwrap();
        let (metric, lambda) = h.pf_metric().unwrap();
        for e in 0..2 {
            let img_len: f64 = h.edge_image(e).iter().map(|d| metric[d.edge()]).sum();
            assert!((img_len - lambda * metric[e]).abs() < 1e-9);
        }
    }

    #[test]
    fn immersion_images_never_cancel_seeded() {
        use crate::rng::SplitMix64;
        use crate::sampling;
        // for an immersion, the edge counts of an image path are exactly
        // the transition-count prediction: no cancellation anywhere
        let immersions = [tm(), Endomorphism::from_images(2, &["aab", "ba"]).unwrap()];
        let mut rng = SplitMix64::new(0x1333);
        for phi in immersions {
            let f = GraphMap::rose_map(&phi).unwrap();
            assert!(f.is_immersion());
            let m = f.transition_matrix();
            for _ in 0..250 {
                let len = rng.range(1, 8);
                let w = sampling::random_reduced_word(&mut rng, phi.basis(), len);
                let loop_path = f.graph().cyclic_path(&w);
                if loop_path.is_empty() {
                    continue;
                }
                let mut counts = [0u64; 2];
                for d in &loop_path {
                    counts[d.edge()] += 1;
                }
                let image = f.map_path(&loop_path);
                assert_eq!(cyclic_tighten(&image), image, "cancellation for {w}");
                let mut image_counts = [0u64; 2];
                for d in &image {
                    image_counts[d.edge()] += 1;
                }
                let predicted: Vec<u64> = (0..2)
                    .map(|i| (0..2).map(|j| m.entry(i, j) * counts[j]).sum())
                    .collect();
                assert_eq!(image_counts.to_vec(), predicted);
            }
        }
    }

    #[test]
    fn pf_residual_and_growth_on_seeded_matrices() {
        use crate::rng::SplitMix64;
        let mut rng = SplitMix64::new(0x9f09);
        let mut checked = 0;
        while checked < 100 {
            let n = rng.range(1, 3);
            let mut m = TransitionMatrix::zero(n);
            for i in 0..n {
                for j in 0..n {
                    *m.entry_mut(i, j) = rng.below(3) as u64;
                }
            }
            if !m.is_primitive() {
                continue;
            }
            let pf = pf_data(&m).unwrap();
            assert!(pf.residual < 1e-9, "residual {}", pf.residual);
            let has_heavy_column =
                (0..n).any(|j| (0..n).map(|i| m.entry(i, j)).sum::<u64>() >= 2);
            if has_heavy_column {
                assert!(pf.lambda > 1.0, "lambda {} for {m}", pf.lambda);
            }
            checked += 1;
        }
    }

    #[test]
    fn matrix_power_identity_on_raw_composites() {
        let f = GraphMap::rose_map(&tm()).unwrap();
        let m = f.transition_matrix();
        for r in 0..=5 {
            assert_eq!(f.power_raw(r).transition_matrix(), m.pow(r));
        }
    }

    #[test]
    fn induced_endomorphism_of_rose_map_is_identity_operation() {
        let f = GraphMap::rose_map(&tm()).unwrap();
        assert_eq!(f.induced_endomorphism(), tm());
    }

    #[test]
    fn marked_graph_rejects_bad_markings() {
        let basis = Basis::new(2).unwrap();
        // theta graph: 2 vertices, 3 edges; marking via two loops
        let edges = vec![(0, 1), (0, 1), (0, 1)];
        let m0 = vec![Dir::new(0, false), Dir::new(1, true)];
        let m1 = vec![Dir::new(0, false), Dir::new(2, true)];
        assert!(MarkedGraph::new(basis, 2, edges.clone(), 0, vec![m0.clone(), m1]).is_ok());
        // marking that misses rank: both loops equal
        let bad = MarkedGraph::new(basis, 2, edges, 0, vec![m0.clone(), m0]);
        assert!(bad.is_err());
    }

    #[test]
    fn cyclic_tighten_cancels_across_wrap() {
        let p = vec![Dir::new(1, false), Dir::new(0, false), Dir::new(1, true)];
        assert_eq!(cyclic_tighten(&p), vec![Dir::new(0, false)]);
    }
}
