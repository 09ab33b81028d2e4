//! Points of Outer space and collapsed simplicial boundary points as marked
//! metric graphs; hyperbolic length functions; the right action of an
//! endomorphism; stable length functions; convergence, admissibility, and
//! rigidity probes.
//!
//! A [`TreePoint`] is a marked metric graph: a strict [`MarkedGraph`], a
//! twist endomorphism precomposing the marking (so right actions never need
//! the marking to stay surjective), and one nonnegative length per edge.
//! All-positive lengths encode an interior point; zero lengths encode a
//! collapsed simplicial boundary point with trivial edge stabilizers.

use std::fmt;

use thiserror::Error;

use crate::blocks::{self, BlockSpace};
use crate::graphmap::{
    cyclic_tighten, default_fold_budget, fold_to_immersion, tighten, GraphMap, GraphMapError,
    MarkedGraph, TransitionMatrix,
};
use crate::rng::SplitMix64;
use crate::sampling;
use crate::stallings::{self, FoldedGraph};
use crate::word::{cyclic_classes, Basis, CyclicWord, Endomorphism, Letter, Word, WordError};

#[derive(Debug, Error, PartialEq, Clone)]
pub enum DynamicsError {
    #[error("trivial pullback: the image subgroup fixes a vertex of the splitting (vertex group {vertex_group})")]
    TrivialPullback { vertex_group: String },
    #[error("degenerate lengths: the length function vanishes on all short witness classes")]
    DegenerateLengths,
    #[error("no convergence after {steps} steps (budget limited: {budget_limited})")]
    NoConvergence { steps: usize, budget_limited: bool },
    #[error("zero translation length for {class}: a sampled image class is elliptic")]
    ZeroLength { class: String },
    #[error("unsupported splitting: {0}")]
    UnsupportedSplitting(String),
    #[error("rank {0} is below the dynamic range: rank >= 2 required")]
    RankTooSmall(usize),
    #[error("tree file parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    GraphMap(#[from] GraphMapError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A marked metric graph: point of unprojectivized Outer space when all
/// lengths are positive, collapsed simplicial boundary point otherwise.
#[derive(Clone, PartialEq)]
pub struct TreePoint {
    graph: MarkedGraph,
    twist: Endomorphism,
    lengths: Vec<f64>,
}

impl TreePoint {
    pub fn new(graph: MarkedGraph, lengths: Vec<f64>) -> Result<TreePoint, DynamicsError> {
        let twist = Endomorphism::identity(graph.basis());
        TreePoint::with_twist(graph, twist, lengths)
    }

    pub fn with_twist(
        graph: MarkedGraph,
        twist: Endomorphism,
        lengths: Vec<f64>,
    ) -> Result<TreePoint, DynamicsError> {
        if lengths.len() != graph.edge_count() {
            return Err(DynamicsError::Parse {
                line: 0,
                msg: "one length per edge required".into(),
            });
        }
        if lengths.iter().any(|&l| l < 0.0 || !l.is_finite()) {
            return Err(DynamicsError::Parse {
                line: 0,
                msg: "edge lengths must be finite and nonnegative".into(),
            });
        }
        if !lengths.iter().any(|&l| l > 0.0) {
            return Err(DynamicsError::DegenerateLengths);
        }
        let t = TreePoint {
            graph,
            twist,
            lengths,
        };
        // the quotient length function must not vanish identically: checked
        // against all classes of length <= 2 over the marking basis
        let alive = cyclic_classes(t.basis(), 2)
            .iter()
            .any(|c| tree_length(&t, &c.to_word()) > 0.0);
        if !alive {
            return Err(DynamicsError::DegenerateLengths);
        }
        Ok(t)
    }

    fn unchecked(graph: MarkedGraph, twist: Endomorphism, lengths: Vec<f64>) -> TreePoint {
        TreePoint {
            graph,
            twist,
            lengths,
        }
    }

    /// Rose with identity marking and the given petal lengths.
    pub fn rose(basis: Basis, lengths: Vec<f64>) -> Result<TreePoint, DynamicsError> {
        TreePoint::new(MarkedGraph::rose(basis), lengths)
    }

    /// Rose whose marking is twisted by `psi` (any endomorphism; for points
    /// of Outer space, an automorphism).
    pub fn rose_marked(psi: &Endomorphism, lengths: Vec<f64>) -> Result<TreePoint, DynamicsError> {
        TreePoint::with_twist(MarkedGraph::rose(psi.basis()), psi.clone(), lengths)
    }

    pub fn basis(&self) -> Basis {
        self.graph.basis()
    }

    pub fn graph(&self) -> &MarkedGraph {
        &self.graph
    }

    pub fn twist(&self) -> &Endomorphism {
        &self.twist
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn is_interior(&self) -> bool {
        self.lengths.iter().all(|&l| l > 0.0)
    }

    pub fn zero_edges(&self) -> Vec<usize> {
        self.lengths
            .iter()
            .enumerate()
            .filter_map(|(e, &l)| (l == 0.0).then_some(e))
            .collect()
    }

    /// Text format: `rank`/`vertices` headers, one `edge id from to hint
    /// length` line per edge, one `marking x -> tokens` line per generator
    /// (token `eK` crosses edge K forwards, `eK'` backwards).
    pub fn to_text(&self) -> String {
        let mut s = format!("rank {}\n", self.basis().rank());
        s.push_str(&format!("vertices {}\n", self.graph.vertex_count()));
        for e in 0..self.graph.edge_count() {
            let (u, v) = self.graph.edge_endpoints(e);
            let hint = if self.graph.is_rose() && e < self.basis().rank() {
                Letter::new(e, false).to_char()
            } else {
                '-'
            };
            s.push_str(&format!("edge e{} {} {} {} {}\n", e + 1, u, v, hint, self.lengths[e]));
        }
        for (i, g) in self.basis().generators().enumerate() {
            let path = tighten(&self.graph.word_to_path(&self.twist.image(i).clone()));
            let tokens: Vec<String> = path
                .iter()
                .map(|d| format!("e{}{}", d.edge() + 1, if d.is_reversed() { "'" } else { "" }))
                .collect();
            s.push_str(&format!("marking {} -> {}\n", g.to_char(), tokens.join(" ")));
        }
        s
    }

    pub fn parse(text: &str) -> Result<TreePoint, DynamicsError> {
        use crate::graphmap::Dir;
        let mut rank: Option<usize> = None;
        let mut vertices: Option<usize> = None;
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut lengths: Vec<f64> = Vec::new();
        let mut edge_ids: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
        let mut marking_lines: Vec<(usize, usize, Vec<String>)> = Vec::new();
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
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("rank") => {
                    rank = Some(parse_num(parts.next(), line_no, "rank")?);
                }
                Some("vertices") => {
                    vertices = Some(parse_num(parts.next(), line_no, "vertex count")?);
                }
                Some("edge") => {
                    let id = parts.next().ok_or_else(|| bad_line(line_no, "edge id"))?;
                    let u: u32 = parse_num(parts.next(), line_no, "edge endpoint")? as u32;
                    let v: u32 = parse_num(parts.next(), line_no, "edge endpoint")? as u32;
                    let _hint = parts.next().ok_or_else(|| bad_line(line_no, "label hint"))?;
                    let len: f64 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad_line(line_no, "edge length"))?;
                    if edge_ids.insert(id.to_string(), edges.len()).is_some() {
                        return Err(bad_line(line_no, "duplicate edge id"));
                    }
                    edges.push((u, v));
                    lengths.push(len);
                }
                Some("marking") => {
                    let lhs = parts.next().ok_or_else(|| bad_line(line_no, "generator"))?;
                    let gen = lhs
                        .chars()
                        .next()
                        .and_then(Letter::from_char)
                        .filter(|l| !l.is_inverse())
                        .ok_or_else(|| bad_line(line_no, "generator"))?;
                    let arrow = parts.next();
                    if arrow != Some("->") {
                        return Err(bad_line(line_no, "`->`"));
                    }
                    marking_lines.push((
                        line_no,
                        gen.generator(),
                        parts.map(|s| s.to_string()).collect(),
                    ));
                }
                _ => return Err(bad_line(line_no, "rank/vertices/edge/marking")),
            }
        }
        let rank = rank.ok_or_else(|| bad_line(0, "rank header"))?;
        let vertices = vertices.ok_or_else(|| bad_line(0, "vertices header"))?;
        let basis = Basis::new(rank).map_err(|e| DynamicsError::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
        let mut marking: Vec<Option<Vec<Dir>>> = vec![None; rank];
        for (line_no, gen, tokens) in marking_lines {
            let mut path = Vec::new();
            for tok in tokens {
                let (name, rev) = match tok.strip_suffix('\'') {
                    Some(n) => (n, true),
                    None => (tok.as_str(), false),
                };
                let e = *edge_ids
                    .get(name)
                    .ok_or_else(|| bad_line(line_no, "known edge id"))?;
                path.push(Dir::new(e, rev));
            }
            if gen >= rank || marking[gen].replace(path).is_some() {
                return Err(bad_line(line_no, "one marking per generator"));
            }
        }
        let marking: Vec<Vec<Dir>> = marking
            .into_iter()
            .enumerate()
            .map(|(g, m)| {
                m.ok_or_else(|| {
                    bad_line(
                        0,
                        &format!("marking for {}", Letter::new(g, false).to_char()),
                    )
                })
            })
            .collect::<Result<_, _>>()?;
        let graph = MarkedGraph::new(basis, vertices, edges, 0, marking)
            .map_err(DynamicsError::GraphMap)?;
        TreePoint::new(graph, lengths)
    }
}

impl fmt::Debug for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TreePoint({:?}, lengths {:?})",
            self.graph, self.lengths
        )
    }
}

fn parse_num(tok: Option<&str>, line: usize, what: &str) -> Result<usize, DynamicsError> {
    tok.and_then(|s| s.parse().ok())
        .ok_or_else(|| bad_line(line, what))
}

fn bad_line(line: usize, what: &str) -> DynamicsError {
    DynamicsError::Parse {
        line,
        msg: format!("expected {what}"),
    }
}

/// Translation length of `g` on the tree: map through the twisted marking,
/// tighten cyclically, and sum edge lengths (zero-length edges contribute
/// nothing). Conjugation-invariant.
pub fn tree_length(t: &TreePoint, g: &Word) -> f64 {
    let path = t.graph.word_to_path(&t.twist.apply(g));
    cyclic_tighten(&path)
        .iter()
        .map(|d| t.lengths[d.edge()])
        .sum()
}

/// Length of the tightened (not cyclically tightened) path of `g`: the
/// based displacement used to build block functionals.
pub fn path_length(t: &TreePoint, g: &Word) -> f64 {
    let path = t.graph.word_to_path(&t.twist.apply(g));
    path.iter().map(|d| t.lengths[d.edge()]).sum()
}

/// The right action: the tree whose length function is `g -> l_T(phi(g))`,
/// realized by precomposing the twist. Errors with `TrivialPullback` when
/// the result vanishes on all witness classes of length <= 3 and a folded
/// certificate shows the image subgroup fixes a vertex of the splitting.
pub fn right_action(t: &TreePoint, phi: &Endomorphism) -> Result<TreePoint, DynamicsError> {
    let twist = t.twist.compose(phi)?;
    let out = TreePoint::unchecked(t.graph.clone(), twist, t.lengths.clone());
    let vanishes = cyclic_classes(t.basis(), 3)
        .iter()
        .all(|c| tree_length(&out, &c.to_word()) <= 1e-12);
    if vanishes {
        if let Some(vg) = fixed_vertex_certificate(t, &out.twist) {
            return Err(DynamicsError::TrivialPullback { vertex_group: vg });
        }
        return Err(DynamicsError::DegenerateLengths);
    }
    Ok(out)
}

/// For an identity-marked rose with collapsed petals, check whether the
/// composite image subgroup conjugates into the vertex group generated by
/// the zero petals.
fn fixed_vertex_certificate(t: &TreePoint, composite: &Endomorphism) -> Option<String> {
    if !t.graph.has_identity_marking() {
        return None;
    }
    let zero = t.zero_edges();
    if zero.is_empty() {
        return None;
    }
    let basis = t.basis();
    let vertex_gens: Vec<Word> = zero
        .iter()
        .map(|&e| Word::reduce([Letter::new(e, false)]))
        .collect();
    let image = FoldedGraph::subgroup_graph(basis, composite.images());
    let vertex = FoldedGraph::subgroup_graph(basis, &vertex_gens);
    if stallings::conjugate_into(&image, &vertex) {
        let names: Vec<String> = zero
            .iter()
            .map(|&e| Letter::new(e, false).to_char().to_string())
            .collect();
        Some(format!("<{}>", names.join(", ")))
    } else {
        None
    }
}

/// Fixed enumeration of witness conjugacy classes: all classes of cyclic
/// length at most `max_len`, one per `{[g], [g^-1]}` pair, identity
/// excluded, in deterministic order.
pub fn witness_classes(basis: Basis, max_len: usize) -> Vec<CyclicWord> {
    cyclic_classes(basis, max_len)
        .into_iter()
        .filter(|c| {
            let inv = c.inverse();
            c.letters() <= inv.letters()
        })
        .collect()
}

/// Values of a length function on the witness set.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthSpectrum {
    classes: Vec<CyclicWord>,
    values: Vec<f64>,
}

impl LengthSpectrum {
    pub fn new(classes: Vec<CyclicWord>, values: Vec<f64>) -> LengthSpectrum {
        assert_eq!(classes.len(), values.len());
        LengthSpectrum { classes, values }
    }

    pub fn of_tree(t: &TreePoint, max_len: usize) -> LengthSpectrum {
        let classes = witness_classes(t.basis(), max_len);
        let values = classes.iter().map(|c| tree_length(t, &c.to_word())).collect();
        LengthSpectrum { classes, values }
    }

    pub fn classes(&self) -> &[CyclicWord] {
        &self.classes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_of(&self, class: &CyclicWord) -> Option<f64> {
        self.classes
            .iter()
            .position(|c| c == class)
            .map(|i| self.values[i])
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Sum-normalized copy; `None` when the spectrum vanishes.
    pub fn projectivized(&self) -> Option<LengthSpectrum> {
        let total = self.sum();
        if total <= 0.0 {
            return None;
        }
        Some(LengthSpectrum {
            classes: self.classes.clone(),
            values: self.values.iter().map(|v| v / total).collect(),
        })
    }

    /// L-infinity distance; both spectra must share the witness set.
    pub fn linf_distance(&self, other: &LengthSpectrum) -> f64 {
        assert_eq!(self.classes, other.classes);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// An immersion representative with its Perron–Frobenius metric: the edge
/// lengths under which the map stretches every path by the PF eigenvalue.
#[derive(Clone)]
pub struct StableMap {
    map: GraphMap,
    matrix: TransitionMatrix,
    metric: Vec<f64>,
    lambda: f64,
}

pub const STABLE_TOL: f64 = 1e-10;
pub const STABLE_KMAX: usize = 60;

impl StableMap {
    pub fn new(map: GraphMap) -> Result<StableMap, DynamicsError> {
        if !map.is_immersion() {
            return Err(DynamicsError::GraphMap(GraphMapError::DegenerateEdge));
        }
        let (metric, lambda) = map.pf_metric()?;
        let matrix = map.transition_matrix();
        Ok(StableMap {
            map,
            matrix,
            metric,
            lambda,
        })
    }

    /// Fold the rose representative of `phi` into an immersion and equip it
    /// with the PF metric.
    pub fn for_endomorphism(phi: &Endomorphism) -> Result<StableMap, DynamicsError> {
        if phi.rank() < 2 {
            return Err(DynamicsError::RankTooSmall(phi.rank()));
        }
        let rose = GraphMap::rose_map(phi)?;
        let immersion = fold_to_immersion(&rose, default_fold_budget(phi))?;
        StableMap::new(immersion)
    }

    pub fn map(&self) -> &GraphMap {
        &self.map
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn metric(&self) -> &[f64] {
        &self.metric
    }

    /// Stable length of `g`: the limit of rescaled tightened-image lengths.
    /// For an immersion the iterates never cancel, so edge-crossing counts
    /// evolve by the transition matrix exactly.
    pub fn stable_length(&self, g: &Word, tol: f64, kmax: usize) -> Result<f64, DynamicsError> {
        let loop_path = self.map.graph().cyclic_path(g);
        if loop_path.is_empty() {
            return Ok(0.0);
        }
        let n = self.matrix.size();
        let mut counts = vec![0.0f64; n];
        for d in &loop_path {
            counts[d.edge()] += 1.0;
        }
        let mut prev: Option<f64> = None;
        for _ in 0..kmax {
            let est: f64 = counts.iter().zip(&self.metric).map(|(c, m)| c * m).sum();
            if let Some(p) = prev {
                if (est - p).abs() < tol {
                    return Ok(est);
                }
            }
            prev = Some(est);
            let mut next = vec![0.0f64; n];
            for (j, &c) in counts.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (i, slot) in next.iter_mut().enumerate() {
                    *slot += self.matrix.entry(i, j) as f64 * c / self.lambda;
                }
            }
            counts = next;
        }
        Err(DynamicsError::NoConvergence {
            steps: kmax,
            budget_limited: false,
        })
    }

    /// Stable lengths on the witness set, projectivized.
    pub fn spectrum(&self, basis: Basis, max_len: usize) -> Result<LengthSpectrum, DynamicsError> {
        let classes = witness_classes(basis, max_len);
        let values = classes
            .iter()
            .map(|c| self.stable_length(&c.to_word(), STABLE_TOL, STABLE_KMAX))
            .collect::<Result<Vec<_>, _>>()?;
        LengthSpectrum::new(classes, values)
            .projectivized()
            .ok_or(DynamicsError::DegenerateLengths)
    }
}

/// Stable length spectrum of an endomorphism on all witness classes of
/// length at most `max_len`, together with the immersion it came from.
pub fn stable_spectrum(
    phi: &Endomorphism,
    max_len: usize,
) -> Result<(StableMap, LengthSpectrum), DynamicsError> {
    let sm = StableMap::for_endomorphism(phi)?;
    let spec = sm.spectrum(phi.basis(), max_len)?;
    Ok((sm, spec))
}

#[derive(Clone, Debug)]
pub struct HomothetyReport {
    pub lambda: f64,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Check the homothety law: the stable length of `phi(g)` is `lambda` times
/// the stable length of `g`, relatively on every witness class.
pub fn homothety_check(
    phi: &Endomorphism,
    max_len: usize,
    tol: f64,
) -> Result<HomothetyReport, DynamicsError> {
    let sm = StableMap::for_endomorphism(phi)?;
    let mut worst = 0.0f64;
    for class in witness_classes(phi.basis(), max_len) {
        let g = class.to_word();
        let lg = sm.stable_length(&g, STABLE_TOL, STABLE_KMAX)?;
        let lpg = sm.stable_length(&phi.apply(&g), STABLE_TOL, STABLE_KMAX)?;
        let dev = (lpg - sm.lambda * lg).abs() / lg.max(1e-12);
        worst = worst.max(dev);
    }
    Ok(HomothetyReport {
        lambda: sm.lambda,
        max_deviation: worst,
        tol,
        pass: worst < tol,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OrbitEngine {
    /// Direct evaluation on materialized iterated words.
    Direct,
    /// Verified cyclic block-count dynamics with the given block length.
    Blocks(usize),
}

#[derive(Clone, Debug)]
pub struct OrbitReport {
    pub distances: Vec<f64>,
    pub converged_at: usize,
    pub eventually_monotone: bool,
    pub engine: OrbitEngine,
}

// materialized words are kept short while the verified block engine runs
// (they only serve as cross-checks there) and long when it is the sole
// evaluator
const ORBIT_WORD_BUDGET_CHECK: usize = 1 << 12;
const ORBIT_WORD_BUDGET_SOLE: usize = 1 << 20;

/// Iterate the right action of `phi` on `t0`, recording the projective
/// L-infinity distance of the witness spectrum to the stable spectrum per
/// step; succeeds when the distance drops below `tol`.
pub fn orbit_converge(
    t0: &TreePoint,
    phi: &Endomorphism,
    max_len: usize,
    tol: f64,
    max_iter: usize,
) -> Result<OrbitReport, DynamicsError> {
    // a trivial pullback is surfaced before anything else: the stable
    // spectrum need not even exist for such inputs
    right_action(t0, phi)?;
    let (_, stable) = stable_spectrum(phi, max_len)?;
    let classes = stable.classes().to_vec();
    let lambda = {
        // rescale factor for block counts; any positive constant works
        let rose = GraphMap::rose_map(phi)?;
        crate::graphmap::pf_data(&rose.transition_matrix())
            .map(|d| d.lambda)
            .unwrap_or(2.0)
    };
    let mut engine = BlockEngine::build(t0, phi, &classes, lambda);
    let mut words: Option<Vec<Word>> = Some(classes.iter().map(|c| c.to_word()).collect());
    let mut distances: Vec<f64> = Vec::new();
    for step in 0..=max_iter {
        let direct: Option<Vec<f64>> = words
            .as_ref()
            .map(|ws| ws.iter().map(|w| tree_length(t0, w)).collect());
        if let (Some(dv), Some(eng)) = (&direct, engine.as_ref()) {
            // the engine rescales its counts each step, so compare the
            // sum-normalized vectors
            let ev = eng.values();
            let (ds, es) = (dv.iter().sum::<f64>(), ev.iter().sum::<f64>());
            let agree = if ds > 0.0 && es > 0.0 {
                dv.iter()
                    .zip(&ev)
                    .all(|(a, b)| (a / ds - b / es).abs() <= 1e-9)
            } else {
                (ds <= 0.0) == (es <= 0.0)
            };
            if !agree {
                engine = None;
            }
        }
        let values = match (&direct, engine.as_ref()) {
            (Some(dv), _) => dv.clone(),
            (None, Some(eng)) => eng.values(),
            (None, None) => {
                return Err(DynamicsError::NoConvergence {
                    steps: step,
                    budget_limited: true,
                })
            }
        };
        let spectrum = LengthSpectrum::new(classes.clone(), values);
        let Some(projective) = spectrum.projectivized() else {
            // vanished: certify the trivial pullback through phi^step
            let composite = t0.twist.compose(&phi.power(step))?;
            if let Some(vg) = fixed_vertex_certificate(t0, &composite) {
                return Err(DynamicsError::TrivialPullback { vertex_group: vg });
            }
            return Err(DynamicsError::DegenerateLengths);
        };
        let d = projective.linf_distance(&stable);
        distances.push(d);
        if d < tol {
            return Ok(OrbitReport {
                eventually_monotone: eventually_monotone(&distances),
                converged_at: step,
                engine: match engine {
                    Some(eng) => OrbitEngine::Blocks(eng.block_len()),
                    None => OrbitEngine::Direct,
                },
                distances,
            });
        }
        // advance one step
        if let Some(ws) = &mut words {
            let budget = if engine.is_some() {
                ORBIT_WORD_BUDGET_CHECK
            } else {
                ORBIT_WORD_BUDGET_SOLE
            };
            let next: Vec<Word> = ws.iter().map(|w| phi.apply(w)).collect();
            if next.iter().map(|w| w.len()).max().unwrap_or(0) > budget {
                words = None;
            } else {
                *ws = next;
            }
        }
        if let Some(eng) = &mut engine {
            eng.step();
        }
        if words.is_none() && engine.is_none() {
            return Err(DynamicsError::NoConvergence {
                steps: step + 1,
                budget_limited: true,
            });
        }
    }
    Err(DynamicsError::NoConvergence {
        steps: max_iter,
        budget_limited: false,
    })
}

fn eventually_monotone(distances: &[f64]) -> bool {
    if distances.len() < 2 {
        return true;
    }
    let half = distances.len() / 2;
    distances[half..]
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12)
}

struct BlockEngine {
    space: BlockSpace,
    cols: Vec<Vec<(u32, f64)>>,
    weights: Vec<f64>,
    counts: Vec<Vec<f64>>,
    scale: f64,
}

impl BlockEngine {
    /// Build a verified engine, or `None` when substitution cancels or no
    /// attempted block length reproduces the tree's length function exactly.
    fn build(
        t0: &TreePoint,
        phi: &Endomorphism,
        classes: &[CyclicWord],
        lambda: f64,
    ) -> Option<BlockEngine> {
        let basis = phi.basis();
        for b in [2usize, 3, 4, 6, 8] {
            let space = BlockSpace::new(basis, b);
            let cols = blocks::substitution_matrix(&space, phi)?;
            let mut lin = |w: &Word| path_length(t0, w);
            let weights = blocks::functional_weights(&space, &mut lin);
            if !verify_weights(&space, &weights, t0, basis) {
                continue;
            }
            let counts = classes
                .iter()
                .map(|c| space.cyclic_counts(c.letters()))
                .collect::<Option<Vec<_>>>()?;
            return Some(BlockEngine {
                space,
                cols,
                weights,
                counts,
                scale: 1.0 / lambda,
            });
        }
        None
    }

    fn block_len(&self) -> usize {
        self.space.b
    }

    fn values(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|c| blocks::predict(&self.weights, c))
            .collect()
    }

    fn step(&mut self) {
        for c in self.counts.iter_mut() {
            *c = blocks::apply_substitution(&self.cols, c, self.scale);
        }
    }
}

/// The block functional must reproduce the tree's length function exactly:
/// exhaustively on short classes and on seeded long random classes.
fn verify_weights(space: &BlockSpace, weights: &[f64], t0: &TreePoint, basis: Basis) -> bool {
    let max_len = if basis.rank() <= 2 { 9 } else { 6 };
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-8 * (1.0 + a.abs().max(b.abs()));
    for class in cyclic_classes(basis, max_len) {
        let Some(counts) = space.cyclic_counts(class.letters()) else {
            return false;
        };
        let predicted = blocks::predict(weights, &counts);
        if !close(predicted, tree_length(t0, &class.to_word())) {
            return false;
        }
    }
    let mut rng = SplitMix64::new(0xb10c_c0de);
    for _ in 0..200 {
        let len = rng.range(20, 120);
        let raw = sampling::random_reduced_word(&mut rng, basis, len);
        let class = CyclicWord::of(&raw);
        if class.is_trivial() {
            continue;
        }
        let Some(counts) = space.cyclic_counts(class.letters()) else {
            return false;
        };
        let predicted = blocks::predict(weights, &counts);
        if !close(predicted, tree_length(t0, &class.to_word())) {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SplittingVerdict {
    Trivial,
    NonTrivial,
}

impl fmt::Display for SplittingVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplittingVerdict::Trivial => write!(f, "Trivial"),
            SplittingVerdict::NonTrivial => write!(f, "NonTrivial"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SplittingReport {
    pub verdict: SplittingVerdict,
    pub vertex_group: Option<String>,
}

/// For each splitting (a tree point with collapsed edges), decide whether
/// the right action of `phi` collapses it to a point: trivial exactly when
/// the image subgroup conjugates into a vertex group.
pub fn admissibility_check(
    phi: &Endomorphism,
    splittings: &[TreePoint],
) -> Result<Vec<SplittingReport>, DynamicsError> {
    let mut out = Vec::with_capacity(splittings.len());
    for (i, t) in splittings.iter().enumerate() {
        if t.is_interior() {
            // a free simplicial action: any injective endomorphism pulls it
            // back to a nontrivial tree
            out.push(SplittingReport {
                verdict: SplittingVerdict::NonTrivial,
                vertex_group: None,
            });
            continue;
        }
        if !t.graph().has_identity_marking() {
            return Err(DynamicsError::UnsupportedSplitting(format!(
                "splitting {}: only collapses of identity-marked roses encode \
                 trivial-edge-stabilizer splittings here",
                i + 1
            )));
        }
        let composite = t.twist.compose(phi)?;
        match fixed_vertex_certificate(t, &composite) {
            Some(vg) => out.push(SplittingReport {
                verdict: SplittingVerdict::Trivial,
                vertex_group: Some(vg),
            }),
            None => out.push(SplittingReport {
                verdict: SplittingVerdict::NonTrivial,
                vertex_group: None,
            }),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct RigidityReport {
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    /// Max over samples of `max(R, 1/R)` for the double ratio `R`.
    pub max_deviation: f64,
    pub min_length_seen: f64,
}

/// Sample the double-ratio deviation of translation lengths of `phi^k`
/// images over random tree pairs. Every sampled length must be positive;
/// a zero is surfaced loudly as it would falsify rigidity.
pub fn rigidity_probe(
    phi: &Endomorphism,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<RigidityReport, DynamicsError> {
    if phi.rank() < 2 {
        return Err(DynamicsError::RankTooSmall(phi.rank()));
    }
    if stallings::is_surjective(phi) {
        return Err(DynamicsError::GraphMap(GraphMapError::SurjectiveInput));
    }
    let n = phi.rank();
    let image_rank = stallings::image_rank(phi);
    if image_rank < n {
        return Err(DynamicsError::GraphMap(GraphMapError::NotInjective {
            image_rank,
            rank: n,
        }));
    }
    let basis = phi.basis();
    let phik = phi.power(k);
    let mut rng = SplitMix64::new(seed);
    let mut worst = 1.0f64;
    let mut min_len = f64::INFINITY;
    for _ in 0..samples {
        let w1 = sampling::random_nontrivial_word(&mut rng, basis, 1..=5);
        let w2 = sampling::random_nontrivial_word(&mut rng, basis, 1..=5);
        let h1 = phik.apply(&w1);
        let h2 = phik.apply(&w2);
        let t1 = random_tree(&mut rng, basis, true);
        let t2 = random_tree(&mut rng, basis, true);
        let mut lengths = [0.0f64; 4];
        for (slot, (t, h)) in [(&t1, &h1), (&t1, &h2), (&t2, &h1), (&t2, &h2)]
            .iter()
            .enumerate()
        {
            let l = tree_length(t, h);
            if l <= 1e-12 {
                return Err(DynamicsError::ZeroLength {
                    class: CyclicWord::of(h).to_string(),
                });
            }
            lengths[slot] = l;
            min_len = min_len.min(l);
        }
        let ratio = (lengths[0] / lengths[1]) / (lengths[2] / lengths[3]);
        worst = worst.max(ratio.max(1.0 / ratio));
    }
    Ok(RigidityReport {
        k,
        samples,
        seed,
        max_deviation: worst,
        min_length_seen: min_len,
    })
}

/// Random interior tree: rational lengths in [0.1, 10] and a marking built
/// from 1–5 elementary Nielsen moves. With `allow_collapse`, one petal is
/// collapsed to length zero one time in five.
pub fn random_tree(rng: &mut SplitMix64, basis: Basis, allow_collapse: bool) -> TreePoint {
    loop {
        let moves = rng.range(1, 5);
        let psi = sampling::random_marking_automorphism(rng, basis, moves);
        let mut lengths: Vec<f64> = (0..basis.rank())
            .map(|_| sampling::random_rational_length(rng))
            .collect();
        if allow_collapse && rng.chance(0.2) {
            lengths[rng.below(basis.rank())] = 0.0;
        }
        if let Ok(t) = TreePoint::rose_marked(&psi, lengths) {
            return t;
        }
    }
}

/// Random single-petal collapse of the identity-marked rose.
pub fn random_collapsed_rose(rng: &mut SplitMix64, basis: Basis) -> TreePoint {
    let mut lengths: Vec<f64> = (0..basis.rank())
        .map(|_| sampling::random_rational_length(rng))
        .collect();
    lengths[rng.below(basis.rank())] = 0.0;
    TreePoint::rose(basis, lengths).expect("one petal stays positive for rank >= 2")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b2() -> Basis {
        Basis::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, &Basis::new(3).unwrap()).unwrap()
    }

    fn tm() -> Endomorphism {
        Endomorphism::from_images(2, &["ab", "ba"]).unwrap()
    }

    fn example_f3() -> Endomorphism {
        Endomorphism::from_images(3, &["a", "baB", "bbaBB"]).unwrap()
    }

    #[test]
    fn tree_length_examples() {
        let t = TreePoint::rose(b2(), vec![1.0, 1.0]).unwrap();
        assert_eq!(tree_length(&t, &w("ab")), 2.0);
        assert_eq!(tree_length(&t, &w("abA")), 1.0);
        let b3 = Basis::new(3).unwrap();
        let collapsed = TreePoint::rose(b3, vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(tree_length(&collapsed, &w("baB")), 0.0);
        assert_eq!(tree_length(&collapsed, &w("c")), 1.0);
        assert_eq!(tree_length(&collapsed, &w("bcB")), 1.0);
    }

    #[test]
    fn tree_length_conjugation_invariant_seeded() {
        let mut rng = SplitMix64::new(0x5eed_0010);
        let t = random_tree(&mut rng, b2(), false);
        for _ in 0..1000 {
            let g = sampling::random_reduced_word(&mut rng, b2(), 5);
            let x = sampling::random_reduced_word(&mut rng, b2(), 7);
            let conj = x.conjugate(&g);
            assert!((tree_length(&t, &conj) - tree_length(&t, &x)).abs() < 1e-9);
        }
    }

    #[test]
    fn right_action_examples() {
        let t = TreePoint::rose(b2(), vec![1.0, 1.0]).unwrap();
        let t1 = right_action(&t, &tm()).unwrap();
        assert_eq!(tree_length(&t1, &w("a")), 2.0);
        assert_eq!(tree_length(&t1, &w("aB")), 4.0);
        let same = right_action(&t, &Endomorphism::identity(b2())).unwrap();
        let s0 = LengthSpectrum::of_tree(&t, 3);
        let s1 = LengthSpectrum::of_tree(&same, 3);
        assert!(s0.linf_distance(&s1) < 1e-12);
    }

    #[test]
    fn right_action_functoriality_seeded() {
        let mut rng = SplitMix64::new(0x5eed_0011);
        for _ in 0..100 {
            let t = random_tree(&mut rng, b2(), false);
            let phi = sampling::random_endomorphism(&mut rng, b2(), 1..=3);
            let psi = sampling::random_endomorphism(&mut rng, b2(), 1..=3);
            let Ok(a) = right_action(&t, &phi) else { continue };
            let Ok(ab) = right_action(&a, &psi) else { continue };
            let Ok(direct) = right_action(&t, &phi.compose(&psi).unwrap()) else {
                continue;
            };
            let sa = LengthSpectrum::of_tree(&ab, 3);
            let sb = LengthSpectrum::of_tree(&direct, 3);
            assert!(sa.linf_distance(&sb) < 1e-9);
        }
    }

    #[test]
    fn trivial_pullback_is_detected() {
        // the 3-generator example against the collapse of <a, b>
        let b3 = Basis::new(3).unwrap();
        let t = TreePoint::rose(b3, vec![0.0, 0.0, 1.0]).unwrap();
        let err = right_action(&t, &example_f3()).unwrap_err();
        match err {
            DynamicsError::TrivialPullback { vertex_group } => {
                assert_eq!(vertex_group, "<a, b>");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stable_length_examples() {
        let sm = StableMap::for_endomorphism(&tm()).unwrap();
        let la = sm.stable_length(&w("a"), STABLE_TOL, STABLE_KMAX).unwrap();
        assert!((la - 0.5).abs() < 1e-9);
        let lab = sm.stable_length(&w("aB"), STABLE_TOL, STABLE_KMAX).unwrap();
        assert!((lab - 1.0).abs() < 1e-9);
        let lid = sm
            .stable_length(&Word::identity(), STABLE_TOL, STABLE_KMAX)
            .unwrap();
        assert_eq!(lid, 0.0);
    }

    #[test]
    fn stable_spectrum_values_and_outer_invariance() {
        let (_, spec) = stable_spectrum(&tm(), 2).unwrap();
        let value = |s: &str| {
            spec.value_of(&CyclicWord::of(&w(s)))
                .expect("witness class present")
        };
        // proportional to 1/2, 1/2, 1, 1 at a, b, ab, aB
        let base = value("a");
        assert!((value("b") - base).abs() < 1e-9);
        assert!((value("ab") - 2.0 * base).abs() < 1e-9);
        assert!((value("aB") - 2.0 * base).abs() < 1e-9);
        assert!((spec.sum() - 1.0).abs() < 1e-12);
        // outer-class invariance: conjugated representative
        let conj_images: Vec<Word> = tm()
            .images()
            .iter()
            .map(|u| u.conjugate(&Word::parse("a", &b2()).unwrap()))
            .collect();
        let conj = Endomorphism::new(b2(), conj_images).unwrap();
        let (_, spec2) = stable_spectrum(&conj, 2).unwrap();
        assert!(spec.linf_distance(&spec2) < 1e-9);
    }

    #[test]
    fn homothety_examples() {
        let r = homothety_check(&tm(), 3, 1e-8).unwrap();
        assert!(r.pass, "max deviation {}", r.max_deviation);
        assert!((r.lambda - 2.0).abs() < 1e-9);
        let phi = Endomorphism::from_images(2, &["aab", "ba"]).unwrap();
        let r = homothety_check(&phi, 3, 1e-8).unwrap();
        assert!(r.pass);
        assert!((r.lambda - (3.0 + 5.0f64.sqrt()) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn stable_length_matches_literal_iteration_on_a_folded_immersion() {
        // independent oracle: materialize the iterated loop and rescale its
        // metric length, on a representative that is not a rose
        let phi = Endomorphism::from_images(2, &["ba", "BaaB"]).unwrap();
        let sm = StableMap::for_endomorphism(&phi).unwrap();
        assert!(sm.map().graph().vertex_count() > 1);
        for class in witness_classes(b2(), 3) {
            let g = class.to_word();
            let stable = sm.stable_length(&g, STABLE_TOL, STABLE_KMAX).unwrap();
            let mut loop_path = sm.map().graph().cyclic_path(&g);
            let mut scale = 1.0;
            for _ in 0..10 {
                loop_path = sm.map().map_path(&loop_path);
                scale *= sm.lambda();
            }
            let length: f64 = loop_path.iter().map(|d| sm.metric()[d.edge()]).sum();
            assert!(
                (length / scale - stable).abs() < 1e-7,
                "class {class}: iterated {} vs stable {stable}",
                length / scale
            );
        }
    }

    #[test]
    fn stable_scaling_on_witness_classes() {
        let sm = StableMap::for_endomorphism(&tm()).unwrap();
        for class in witness_classes(b2(), 4) {
            let g = class.to_word();
            let lg = sm.stable_length(&g, STABLE_TOL, STABLE_KMAX).unwrap();
            let lpg = sm
                .stable_length(&tm().apply(&g), STABLE_TOL, STABLE_KMAX)
                .unwrap();
            assert!((lpg - sm.lambda() * lg).abs() < 1e-8);
        }
    }

    #[test]
    fn orbit_converges_from_simple_interior_point() {
        let t0 = TreePoint::rose(b2(), vec![1.0, 2.0]).unwrap();
        let report = orbit_converge(&t0, &tm(), 3, 1e-6, 60).unwrap();
        assert!(report.converged_at <= 60);
        assert!(report.distances.last().unwrap() < &1e-6);
    }

    #[test]
    fn orbit_fixed_point_has_distance_zero() {
        // start at a tree whose spectrum is already stable: the PF rose
        let t0 = TreePoint::rose(b2(), vec![0.5, 0.5]).unwrap();
        let report = orbit_converge(&t0, &tm(), 3, 1e-6, 60).unwrap();
        assert_eq!(report.converged_at, 0);
        assert!(report.distances[0] < 1e-9);
    }

    #[test]
    fn orbit_converges_from_collapsed_start() {
        let t0 = TreePoint::rose(b2(), vec![0.0, 1.0]).unwrap();
        let report = orbit_converge(&t0, &tm(), 3, 1e-6, 60).unwrap();
        assert!(report.converged_at <= 60);
    }

    #[test]
    fn admissibility_examples() {
        let b3 = Basis::new(3).unwrap();
        let split = TreePoint::rose(b3, vec![0.0, 0.0, 1.0]).unwrap();
        let verdicts = admissibility_check(&example_f3(), &[split]).unwrap();
        assert_eq!(verdicts[0].verdict, SplittingVerdict::Trivial);
        assert_eq!(verdicts[0].vertex_group.as_deref(), Some("<a, b>"));

        let split = TreePoint::rose(b2(), vec![0.0, 1.0]).unwrap();
        let verdicts = admissibility_check(&tm(), &[split]).unwrap();
        assert_eq!(verdicts[0].verdict, SplittingVerdict::NonTrivial);

        let interior = TreePoint::rose(b2(), vec![1.0, 1.0]).unwrap();
        let verdicts = admissibility_check(&tm(), &[interior]).unwrap();
        assert_eq!(verdicts[0].verdict, SplittingVerdict::NonTrivial);
    }

    #[test]
    fn rigidity_degenerate_ratios_are_one() {
        // the double ratio collapses to exactly 1 when the classes or the
        // trees coincide
        let mut rng = SplitMix64::new(0x5eed_0020);
        let phik = tm().power(3);
        let h = phik.apply(&sampling::random_nontrivial_word(&mut rng, b2(), 2..=4));
        let h2 = phik.apply(&sampling::random_nontrivial_word(&mut rng, b2(), 2..=4));
        let t1 = random_tree(&mut rng, b2(), false);
        let t2 = random_tree(&mut rng, b2(), false);
        let ratio_same_class =
            (tree_length(&t1, &h) / tree_length(&t1, &h)) / (tree_length(&t2, &h) / tree_length(&t2, &h));
        assert_eq!(ratio_same_class, 1.0);
        let ratio_same_tree =
            (tree_length(&t1, &h) / tree_length(&t1, &h2)) / (tree_length(&t1, &h) / tree_length(&t1, &h2));
        assert_eq!(ratio_same_tree, 1.0);

        let r = rigidity_probe(&tm(), 3, 10, 42).unwrap();
        assert!(r.max_deviation >= 1.0);
        assert!(r.min_length_seen > 0.0);
    }

    #[test]
    fn rigidity_tightens_with_k_seed_42() {
        let c3 = rigidity_probe(&tm(), 3, 100, 42).unwrap().max_deviation;
        let c6 = rigidity_probe(&tm(), 6, 100, 42).unwrap().max_deviation;
        assert!(c6 < c3, "C6 = {c6} should beat C3 = {c3}");
    }

    #[test]
    fn rank_one_rejected_by_dynamics() {
        let single = Endomorphism::from_images(1, &["aa"]).unwrap();
        assert!(matches!(
            StableMap::for_endomorphism(&single),
            Err(DynamicsError::RankTooSmall(1))
        ));
        assert_eq!(
            rigidity_probe(&single, 2, 4, 1).unwrap_err(),
            DynamicsError::RankTooSmall(1)
        );
        // the single-loop representative itself stays analyzable
        let f = crate::graphmap::GraphMap::rose_map(&single).unwrap();
        let (metric, lambda) = f.pf_metric().unwrap();
        assert_eq!(metric, vec![1.0]);
        assert!((lambda - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tree_text_roundtrip() {
        let t = TreePoint::rose(b2(), vec![1.0, 2.0]).unwrap();
        let text = t.to_text();
        let back = TreePoint::parse(&text).unwrap();
        let s0 = LengthSpectrum::of_tree(&t, 3);
        let s1 = LengthSpectrum::of_tree(&back, 3);
        assert!(s0.linf_distance(&s1) < 1e-12);
        // a marked rose also roundtrips through its absorbed marking
        let psi = Endomorphism::from_images(2, &["ab", "b"]).unwrap();
        let t = TreePoint::rose_marked(&psi, vec![1.0, 0.5]).unwrap();
        let back = TreePoint::parse(&t.to_text()).unwrap();
        let s0 = LengthSpectrum::of_tree(&t, 3);
        let s1 = LengthSpectrum::of_tree(&back, 3);
        assert!(s0.linf_distance(&s1) < 1e-12);
    }

    #[test]
    fn interior_lengths_positive() {
        let mut rng = SplitMix64::new(0x5eed_0012);
        for _ in 0..50 {
            let t = random_tree(&mut rng, b2(), false);
            let g = sampling::random_nontrivial_word(&mut rng, b2(), 1..=6);
            if CyclicWord::of(&g).is_trivial() {
                continue;
            }
            assert!(tree_length(&t, &g) > 0.0);
        }
    }

    #[test]
    fn only_the_stable_spectrum_is_projectively_fixed() {
        let (_, stable) = stable_spectrum(&tm(), 3).unwrap();
        let mut rng = SplitMix64::new(0x5eed_0013);
        for _ in 0..50 {
            let t = random_tree(&mut rng, b2(), false);
            let spec = LengthSpectrum::of_tree(&t, 3).projectivized().unwrap();
            let acted = right_action(&t, &tm()).unwrap();
            let spec_acted = LengthSpectrum::of_tree(&acted, 3).projectivized().unwrap();
            let moved = spec.linf_distance(&spec_acted);
            let at_stable = spec.linf_distance(&stable);
            // fixed (within 1e-9) only if already at the stable spectrum
            if moved < 1e-9 {
                assert!(at_stable < 1e-6);
            }
        }
    }
}
