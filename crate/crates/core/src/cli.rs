//! Batch command-line front end: file I/O and machine-readable reports.
//!
//! Subcommands: `analyze`, `fold`, `orbit`, `rays`, `admissible`,
//! `rigidity`. Exit codes: 0 on success, 1 on input errors, 2 on findings
//! that deserve attention (a violated count bound, a zero length where
//! rigidity promises positivity, a non-converged orbit).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::boundary::{self, BoundaryError};
use crate::dynamics::{
    self, DynamicsError, SplittingVerdict, TreePoint,
};
use crate::graphmap::{self, GraphMap};
use crate::stallings::{self, FoldedGraph};
use crate::word::{Basis, Endomorphism, Letter};

pub const SCHEMA_VERSION: u32 = 1;

const EXIT_OK: i32 = 0;
const EXIT_INPUT: i32 = 1;
const EXIT_FINDING: i32 = 2;

#[derive(Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub results: ReportBody,
    /// Wall-clock milliseconds; the only nondeterministic field.
    pub timing_ms: f64,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportBody {
    Analyze {
        rank: usize,
        image_rank: usize,
        injective: bool,
        surjective: bool,
        expansiveness_verdict: Option<String>,
        girth_sequence: Vec<(u32, usize)>,
        transition_matrix: Vec<Vec<u64>>,
        primitive: bool,
        lambda: Option<f64>,
        pf_vector: Option<Vec<f64>>,
        pf_residual: Option<f64>,
        immersion: bool,
        illegal_turns: usize,
        irreducibility_certificate: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        image_graph_dump: Option<String>,
    },
    Fold {
        folds_budget: usize,
        vertices: usize,
        edges: usize,
        lambda: Option<f64>,
        map_dump: String,
    },
    Orbit {
        converged: bool,
        iterations: Option<usize>,
        distances: Vec<f64>,
        eventually_monotone: bool,
        engine: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        stable_spectrum: Option<Vec<(String, f64)>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
    Rays {
        count: usize,
        bound: usize,
        count_ok: bool,
        rays: Vec<RayOut>,
        higher_power_rays: Vec<RayOut>,
    },
    Admissible {
        verdicts: Vec<SplittingOut>,
        admissible_for_tested: bool,
    },
    Rigidity {
        k: usize,
        c_k: f64,
        k_reference: usize,
        c_reference: f64,
        decreasing: bool,
        min_length_seen: f64,
        samples: usize,
    },
}

#[derive(Serialize)]
pub struct RayOut {
    pub label: String,
    pub power: usize,
    pub prefix: String,
}

#[derive(Serialize)]
pub struct SplittingOut {
    pub splitting: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_group: Option<String>,
}

/// Run the CLI on `args` (without the program name); prints to stdout and
/// returns the exit code.
pub fn run(args: &[String]) -> i32 {
    let (code, out) = run_capture(args);
    print!("{out}");
    code
}

/// Same as [`run`] but returning the output, for tests.
pub fn run_capture(args: &[String]) -> (i32, String) {
    match dispatch(args) {
        Ok((code, out)) => (code, out),
        Err(msg) => (EXIT_INPUT, format!("error: {msg}\n")),
    }
}

fn dispatch(args: &[String]) -> Result<(i32, String), String> {
    let Some(command) = args.first() else {
        return Ok((EXIT_INPUT, usage()));
    };
    let flags = Flags::parse(&args[1..])?;
    let started = std::time::Instant::now();
    match command.as_str() {
        "help" | "--help" | "-h" => Ok((EXIT_OK, usage())),
        "analyze" => cmd_analyze(&flags, started),
        "fold" => cmd_fold(&flags, started),
        "orbit" => cmd_orbit(&flags, started),
        "rays" => cmd_rays(&flags, started),
        "admissible" => cmd_admissible(&flags, started),
        "rigidity" => cmd_rigidity(&flags, started),
        other => Err(format!("unknown command {other:?}\n{}", usage())),
    }
}

fn usage() -> String {
    "traintrack: endomorphism dynamics toolbox

usage: traintrack <command> [flags]

commands:
  analyze     injectivity, surjectivity, expansiveness probe, transition
              matrix, Perron-Frobenius data, turns, immersion
  fold        fold the rose representative into an immersion and dump it
  orbit       iterate the right action toward the stable spectrum
  rays        attracting boundary fixed rays
  admissible  per-splitting triviality of the right action
  rigidity    double-ratio rigidity probe for iterated image subgroups

flags:
  -f, --endo <file>        endomorphism file (rank header + one map per line)
      --tree <file>        tree point file
      --splitting <spec>   collapse:<generators>, e.g. collapse:a,b
      --classes-maxlen <L> witness class length bound (default 3)
      --tol <x>            tolerance (default per command)
      --max-iter <N>       orbit iteration cap (default 60)
      --kmax <k>           expansiveness probe depth (default 5)
      --max-folds <N>      fold move budget (default 10*n*image length)
  -k, --power <k>          endomorphism power for rigidity (default 6)
      --samples <N>        sample count (default 100)
      --seed <s>           seed for sampled commands (required when sampling)
  -n, --prefix-len <m>     ray prefix length (default 8)
      --json               emit the machine-readable report
      --dump-graph         include the folded image subgroup graph
"
    .to_string()
}

struct Flags {
    values: BTreeMap<String, String>,
    switches: Vec<String>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Flags, String> {
        let mut values = BTreeMap::new();
        let mut switches = Vec::new();
        let mut it = args.iter().peekable();
        while let Some(arg) = it.next() {
            let canonical = match arg.as_str() {
                "-f" | "--endo" => "endo",
                "--tree" => "tree",
                "--splitting" => "splitting",
                "--classes-maxlen" => "classes-maxlen",
                "--tol" => "tol",
                "--max-iter" => "max-iter",
                "--kmax" => "kmax",
                "--max-folds" => "max-folds",
                "-k" | "--power" => "power",
                "--samples" => "samples",
                "--seed" => "seed",
                "-n" | "--prefix-len" => "prefix-len",
                "--json" => {
                    switches.push("json".to_string());
                    continue;
                }
                "--dump-graph" => {
                    switches.push("dump-graph".to_string());
                    continue;
                }
                other => return Err(format!("unknown flag {other:?}")),
            };
            let value = it
                .next()
                .ok_or_else(|| format!("flag {arg} expects a value"))?;
            if canonical == "splitting" {
                // repeatable
                let entry = values.entry("splitting".to_string()).or_insert_with(String::new);
                if !entry.is_empty() {
                    entry.push(';');
                }
                entry.push_str(value);
            } else {
                values.insert(canonical.to_string(), value.clone());
            }
        }
        Ok(Flags { values, switches })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn has(&self, key: &str) -> bool {
        self.switches.iter().any(|s| s == key)
    }

    fn num<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, String> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| format!("flag --{key} expects a number, got {s:?}")),
        }
    }

    fn endo(&self) -> Result<Endomorphism, String> {
        let path = self
            .get("endo")
            .ok_or("an endomorphism file is required (-f/--endo)")?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {path}: {e}"))?;
        Endomorphism::parse(&text).map_err(|e| format!("{path}: {e}"))
    }

    fn tree(&self, basis: Basis) -> Result<Option<TreePoint>, String> {
        let Some(path) = self.get("tree") else {
            return Ok(None);
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {path}: {e}"))?;
        let t = TreePoint::parse(&text).map_err(|e| format!("{path}: {e}"))?;
        if t.basis() != basis {
            return Err(format!("{path}: tree rank does not match the endomorphism"));
        }
        Ok(Some(t))
    }

    fn splittings(&self, basis: Basis) -> Result<Vec<(String, TreePoint)>, String> {
        let mut out = Vec::new();
        if let Some(spec) = self.get("splitting") {
            for part in spec.split(';') {
                let gens = part
                    .strip_prefix("collapse:")
                    .ok_or_else(|| format!("bad splitting {part:?}: expected collapse:<gens>"))?;
                let mut lengths = vec![1.0; basis.rank()];
                for name in gens.split(',') {
                    let letter = name
                        .trim()
                        .chars()
                        .next()
                        .and_then(Letter::from_char)
                        .filter(|l| !l.is_inverse() && basis.contains(*l))
                        .ok_or_else(|| format!("bad generator {name:?} in splitting"))?;
                    lengths[letter.generator()] = 0.0;
                }
                let t = TreePoint::rose(basis, lengths)
                    .map_err(|e| format!("splitting {part:?}: {e}"))?;
                out.push((part.to_string(), t));
            }
        }
        Ok(out)
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    command: &str,
    flags: &Flags,
    inputs: BTreeMap<String, String>,
    seed: Option<u64>,
    tolerances: BTreeMap<String, f64>,
    results: ReportBody,
    text: String,
    code: i32,
    started: std::time::Instant,
) -> Result<(i32, String), String> {
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        inputs,
        seed,
        tolerances,
        results,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    if flags.has("json") {
        let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
        Ok((code, format!("{json}\n")))
    } else {
        Ok((code, text))
    }
}

fn cmd_analyze(flags: &Flags, started: std::time::Instant) -> Result<(i32, String), String> {
    let phi = flags.endo()?;
    let kmax: u32 = flags.num("kmax", 5)?;
    let n = phi.rank();
    let image_rank = stallings::image_rank(&phi);
    let injective = image_rank == n;
    let surjective = stallings::is_surjective(&phi);
    let probe = if injective {
        Some(stallings::expansiveness_probe(&phi, kmax).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let rose = GraphMap::rose_map(&phi).map_err(|e| e.to_string())?;
    let matrix = rose.transition_matrix();
    let primitive = matrix.is_primitive();
    let pf = if primitive {
        Some(graphmap::pf_data(&matrix).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let turns = rose.turn_table().ok();
    let immersion = rose.is_immersion();
    let illegal = turns.as_ref().map(|t| t.illegal.len()).unwrap_or(0);
    let certificate = if !injective {
        "none: folding detected a kernel".to_string()
    } else if surjective {
        "not applicable: the endomorphism is surjective".to_string()
    } else if primitive
        && probe.as_ref().map(|r| r.verdict) == Some(stallings::Verdict::ExpansiveLikely)
    {
        "candidate: primitive transition matrix with growing girth sequence \
         (semi-decision for this representative, not a proof)"
            .to_string()
    } else {
        "not established".to_string()
    };
    let dump = flags.has("dump-graph").then(|| {
        FoldedGraph::subgroup_graph(phi.basis(), phi.images()).write_dump()
    });

    let mut text = String::new();
    let _ = writeln!(text, "endomorphism: {phi}");
    let _ = writeln!(text, "rank: {n}  image rank: {image_rank}  injective: {injective}");
    let _ = writeln!(text, "surjective: {surjective}");
    if let Some(r) = &probe {
        let girths: Vec<String> = r
            .girth_sequence
            .iter()
            .map(|(k, g)| format!("k={k}:{g}"))
            .collect();
        let _ = writeln!(text, "expansiveness: {} [{}]", r.verdict, girths.join(" "));
    } else {
        let _ = writeln!(text, "expansiveness: skipped (kernel detected)");
    }
    let _ = write!(text, "transition matrix:\n{matrix}");
    let _ = writeln!(text, "primitive: {primitive}");
    if let Some(pf) = &pf {
        let _ = writeln!(
            text,
            "lambda: {:.10}  residual: {:.3e}",
            pf.lambda, pf.residual
        );
    }
    let _ = writeln!(text, "immersion: {immersion}  illegal turns: {illegal}");
    let _ = writeln!(text, "irreducibility certificate: {certificate}");
    let _ = write!(text, "{}", graph_map_dump(&rose, pf.as_ref().map(|p| p.lambda)));
    if let Some(d) = &dump {
        let _ = write!(text, "image subgroup graph:\n{d}");
    }

    let mut inputs = BTreeMap::new();
    inputs.insert("endo".into(), phi.to_text());
    let results = ReportBody::Analyze {
        rank: n,
        image_rank,
        injective,
        surjective,
        expansiveness_verdict: probe.as_ref().map(|r| r.verdict.to_string()),
        girth_sequence: probe.map(|r| r.girth_sequence).unwrap_or_default(),
        transition_matrix: matrix.rows(),
        primitive,
        lambda: pf.as_ref().map(|p| p.lambda),
        pf_vector: pf.as_ref().map(|p| p.vector.clone()),
        pf_residual: pf.as_ref().map(|p| p.residual),
        immersion,
        illegal_turns: illegal,
        irreducibility_certificate: certificate,
        image_graph_dump: dump,
    };
    finish(
        "analyze",
        flags,
        inputs,
        None,
        BTreeMap::new(),
        results,
        text,
        EXIT_OK,
        started,
    )
}

/// Graph-map dump: one `eK: u->v -> tokens` line per edge plus the marking.
fn graph_map_dump(f: &GraphMap, lambda: Option<f64>) -> String {
    let g = f.graph();
    let mut s = String::new();
    let _ = writeln!(s, "graph map ({} vertices, {} edges):", g.vertex_count(), g.edge_count());
    for e in 0..g.edge_count() {
        let (u, v) = g.edge_endpoints(e);
        let tokens: Vec<String> = f
            .edge_image(e)
            .iter()
            .map(|d| format!("e{}{}", d.edge() + 1, if d.is_reversed() { "'" } else { "" }))
            .collect();
        let _ = writeln!(s, "  e{}: {}->{} -> {}", e + 1, u, v, tokens.join(" "));
    }
    for (i, gen) in g.basis().generators().enumerate() {
        let tokens: Vec<String> = g
            .marking(i)
            .iter()
            .map(|d| format!("e{}{}", d.edge() + 1, if d.is_reversed() { "'" } else { "" }))
            .collect();
        let _ = writeln!(s, "  marking {} -> {}", gen.to_char(), tokens.join(" "));
    }
    if let Some(l) = lambda {
        let _ = writeln!(s, "  lambda: {l:.10}");
    }
    s
}

fn cmd_fold(flags: &Flags, started: std::time::Instant) -> Result<(i32, String), String> {
    let phi = flags.endo()?;
    let budget: usize = flags.num("max-folds", graphmap::default_fold_budget(&phi))?;
    let rose = GraphMap::rose_map(&phi).map_err(|e| e.to_string())?;
    let folded = match graphmap::fold_to_immersion(&rose, budget) {
        Ok(f) => f,
        Err(e @ graphmap::GraphMapError::FoldBudgetExceeded { .. }) => {
            return Ok((EXIT_FINDING, format!("fold: {e}\n")));
        }
        Err(e) => return Err(e.to_string()),
    };
    let lambda = folded.pf_metric().ok().map(|(_, l)| l);
    let dump = graph_map_dump(&folded, lambda);
    let text = format!("folded immersion representative:\n{dump}");
    let mut inputs = BTreeMap::new();
    inputs.insert("endo".into(), phi.to_text());
    let results = ReportBody::Fold {
        folds_budget: budget,
        vertices: folded.graph().vertex_count(),
        edges: folded.graph().edge_count(),
        lambda,
        map_dump: dump,
    };
    finish(
        "fold",
        flags,
        inputs,
        None,
        BTreeMap::new(),
        results,
        text,
        EXIT_OK,
        started,
    )
}

fn cmd_orbit(flags: &Flags, started: std::time::Instant) -> Result<(i32, String), String> {
    let phi = flags.endo()?;
    let t0 = flags
        .tree(phi.basis())?
        .ok_or("orbit requires a tree file (--tree)")?;
    let max_len: usize = flags.num("classes-maxlen", 3)?;
    let tol: f64 = flags.num("tol", 1e-6)?;
    let max_iter: usize = flags.num("max-iter", 60)?;
    let mut tolerances = BTreeMap::new();
    tolerances.insert("tol".into(), tol);
    let mut inputs = BTreeMap::new();
    inputs.insert("endo".into(), phi.to_text());
    inputs.insert("tree".into(), t0.to_text());
    inputs.insert("classes_maxlen".into(), max_len.to_string());
    match dynamics::orbit_converge(&t0, &phi, max_len, tol, max_iter) {
        Ok(report) => {
            let stable = dynamics::stable_spectrum(&phi, max_len).ok();
            let mut text = String::new();
            let _ = writeln!(
                text,
                "converged: true  iterations: {}  engine: {:?}",
                report.converged_at, report.engine
            );
            if let Some((sm, _)) = &stable {
                let _ = writeln!(text, "lambda: {:.10}", sm.lambda());
            }
            let _ = writeln!(text, "eventually monotone: {}", report.eventually_monotone);
            for (k, d) in report.distances.iter().enumerate() {
                let _ = writeln!(text, "step {k}: distance {d:.3e}");
            }
            let results = ReportBody::Orbit {
                converged: true,
                iterations: Some(report.converged_at),
                distances: report.distances.clone(),
                eventually_monotone: report.eventually_monotone,
                engine: format!("{:?}", report.engine),
                lambda: stable.as_ref().map(|(sm, _)| sm.lambda()),
                stable_spectrum: stable.as_ref().map(|(_, spec)| {
                    spec.classes()
                        .iter()
                        .zip(spec.values())
                        .map(|(c, v)| (c.to_string(), *v))
                        .collect()
                }),
                error: None,
            };
            finish(
                "orbit", flags, inputs, None, tolerances, results, text, EXIT_OK, started,
            )
        }
        Err(e @ DynamicsError::TrivialPullback { .. }) => {
            let text = format!("orbit: {e}\n");
            let results = ReportBody::Orbit {
                converged: false,
                iterations: None,
                distances: Vec::new(),
                eventually_monotone: false,
                engine: "none".into(),
                lambda: None,
                stable_spectrum: None,
                error: Some(e.to_string()),
            };
            finish(
                "orbit", flags, inputs, None, tolerances, results, text, EXIT_OK, started,
            )
        }
        Err(e @ DynamicsError::NoConvergence { .. }) => {
            let text = format!("orbit: {e}\n");
            let results = ReportBody::Orbit {
                converged: false,
                iterations: None,
                distances: Vec::new(),
                eventually_monotone: false,
                engine: "none".into(),
                lambda: None,
                stable_spectrum: None,
                error: Some(e.to_string()),
            };
            finish(
                "orbit", flags, inputs, None, tolerances, results, text, EXIT_FINDING, started,
            )
        }
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_rays(flags: &Flags, started: std::time::Instant) -> Result<(i32, String), String> {
    let phi = flags.endo()?;
    let m: usize = flags.num("prefix-len", 8)?;
    let mut inputs = BTreeMap::new();
    inputs.insert("endo".into(), phi.to_text());
    inputs.insert("prefix_len".into(), m.to_string());
    match boundary::boundary_fixed_points(&phi, m) {
        Ok(rays) => {
            let render = |r: &boundary::Ray| -> String {
                match r.prefix_word(&rays.map) {
                    Some(w) => w.to_string(),
                    None => r
                        .prefix()
                        .iter()
                        .map(|d| format!("e{}{}", d.edge() + 1, if d.is_reversed() { "'" } else { "" }))
                        .collect::<Vec<_>>()
                        .join(" "),
                }
            };
            let mut text = String::new();
            let mut rays_out = Vec::new();
            for (i, r) in rays.rays.iter().enumerate() {
                let prefix = render(r);
                let _ = writeln!(text, "X{}: {prefix}", i + 1);
                rays_out.push(RayOut {
                    label: format!("X{}", i + 1),
                    power: r.power,
                    prefix,
                });
            }
            let mut higher_out = Vec::new();
            for (i, r) in rays.higher.iter().enumerate() {
                let prefix = render(r);
                let _ = writeln!(text, "Y{} (power {}): {prefix}", i + 1, r.power);
                higher_out.push(RayOut {
                    label: format!("Y{}", i + 1),
                    power: r.power,
                    prefix,
                });
            }
            let _ = writeln!(
                text,
                "count: {} <= bound {}: ok",
                rays.rays.len(),
                rays.bound
            );
            let results = ReportBody::Rays {
                count: rays.rays.len(),
                bound: rays.bound,
                count_ok: true,
                rays: rays_out,
                higher_power_rays: higher_out,
            };
            finish(
                "rays",
                flags,
                inputs,
                None,
                BTreeMap::new(),
                results,
                text,
                EXIT_OK,
                started,
            )
        }
        Err(BoundaryError::CountBound { count, bound }) => Ok((
            EXIT_FINDING,
            format!("rays: count bound violated: {count} rays exceed {bound}\n"),
        )),
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_admissible(flags: &Flags, started: std::time::Instant) -> Result<(i32, String), String> {
    let phi = flags.endo()?;
    let mut splittings = flags.splittings(phi.basis())?;
    if let Some(t) = flags.tree(phi.basis())? {
        splittings.push(("tree file".to_string(), t));
    }
    if splittings.is_empty() {
        return Err("admissible requires --splitting collapse:<gens> or --tree".into());
    }
    let trees: Vec<TreePoint> = splittings.iter().map(|(_, t)| t.clone()).collect();
    let reports = dynamics::admissibility_check(&phi, &trees).map_err(|e| e.to_string())?;
    let mut text = String::new();
    let mut out = Vec::new();
    let mut all_nontrivial = true;
    for ((name, _), r) in splittings.iter().zip(&reports) {
        match r.verdict {
            SplittingVerdict::Trivial => {
                all_nontrivial = false;
                let _ = writeln!(
                    text,
                    "{name}: NOT ADMISSIBLE (pullback trivial, image fixes vertex group {})",
                    r.vertex_group.as_deref().unwrap_or("?")
                );
            }
            SplittingVerdict::NonTrivial => {
                let _ = writeln!(text, "{name}: nontrivial pullback");
            }
        }
        out.push(SplittingOut {
            splitting: name.clone(),
            verdict: r.verdict.to_string(),
            vertex_group: r.vertex_group.clone(),
        });
    }
    let mut inputs = BTreeMap::new();
    inputs.insert("endo".into(), phi.to_text());
    let results = ReportBody::Admissible {
        verdicts: out,
        admissible_for_tested: all_nontrivial,
    };
    finish(
        "admissible",
        flags,
        inputs,
        None,
        BTreeMap::new(),
        results,
        text,
        EXIT_OK,
        started,
    )
}

fn cmd_rigidity(flags: &Flags, started: std::time::Instant) -> Result<(i32, String), String> {
    let phi = flags.endo()?;
    let k: usize = flags.num("power", 6)?;
    let samples: usize = flags.num("samples", 100)?;
    let seed: u64 = match flags.get("seed") {
        Some(s) => s
            .parse()
            .map_err(|_| format!("flag --seed expects a number, got {s:?}"))?,
        None => return Err("rigidity samples randomly and requires --seed".into()),
    };
    let k_reference = (k / 2).max(1);
    let probe = |kk: usize| dynamics::rigidity_probe(&phi, kk, samples, seed);
    let (main, reference) = match (probe(k), probe(k_reference)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(DynamicsError::ZeroLength { class }), _)
        | (_, Err(DynamicsError::ZeroLength { class })) => {
            return Ok((
                EXIT_FINDING,
                format!("rigidity: zero translation length for {class}, rigidity violated\n"),
            ));
        }
        (Err(e), _) | (_, Err(e)) => return Err(e.to_string()),
    };
    let decreasing = main.max_deviation < reference.max_deviation;
    let mut text = String::new();
    let _ = writeln!(text, "C_{k} = {:.6}  (over {samples} samples, seed {seed})", main.max_deviation);
    let _ = writeln!(text, "C_{k_reference} = {:.6}", reference.max_deviation);
    let _ = writeln!(text, "C_{k} < C_{k_reference}: {decreasing}");
    let _ = writeln!(text, "min sampled length: {:.6}", main.min_length_seen);
    let mut inputs = BTreeMap::new();
    inputs.insert("endo".into(), phi.to_text());
    let results = ReportBody::Rigidity {
        k,
        c_k: main.max_deviation,
        k_reference,
        c_reference: reference.max_deviation,
        decreasing,
        min_length_seen: main.min_length_seen,
        samples,
    };
    finish(
        "rigidity",
        flags,
        inputs,
        Some(seed),
        BTreeMap::new(),
        results,
        text,
        EXIT_OK,
        started,
    )
}
