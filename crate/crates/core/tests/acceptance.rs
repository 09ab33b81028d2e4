//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//! Every tolerance and threshold is pinned here.

use std::time::Instant;

use traintrack::boundary;
use traintrack::dynamics::{
    self, orbit_converge, random_collapsed_rose, random_tree, rigidity_probe, DynamicsError,
    TreePoint,
};
use traintrack::graphmap::{
    default_fold_budget, fold_to_immersion, pf_data, GraphMap, TransitionMatrix,
};
use traintrack::rng::SplitMix64;
use traintrack::sampling;
use traintrack::stallings::{self, FoldedGraph, FoldOrder, Verdict};
use traintrack::word::{Basis, Endomorphism, Word};

fn thue_morse() -> Endomorphism {
    Endomorphism::from_images(2, &["ab", "ba"]).unwrap()
}

fn fibonacci() -> Endomorphism {
    Endomorphism::from_images(2, &["b", "ba"]).unwrap()
}

fn example_f3() -> Endomorphism {
    Endomorphism::from_images(3, &["a", "baB", "bbaBB"]).unwrap()
}

#[test]
fn criterion_1_pf_correctness() {
    let cases = [
        (vec![vec![0u64, 1], vec![1, 1]], 1.618_033_988_7_f64),
        (vec![vec![2u64, 1], vec![1, 1]], 2.618_033_988_7_f64),
    ];
    for (rows, expected) in cases {
        let refs: Vec<&[u64]> = rows.iter().map(|r| r.as_slice()).collect();
        let m = TransitionMatrix::from_rows(&refs);
        let started = Instant::now();
        let pf = pf_data(&m).unwrap();
        let elapsed = started.elapsed();
        assert!(
            (pf.lambda - expected).abs() < 1e-9,
            "lambda {} vs {expected}",
            pf.lambda
        );
        assert!(
            elapsed.as_micros() < 1000,
            "pf_data took {elapsed:?}, budget 1 ms"
        );
    }
    println!("criterion 1 (PF correctness, lambda within 1e-9, < 1 ms): PASS");
}

#[test]
fn criterion_2_stable_homothety() {
    for phi in [thue_morse(), Endomorphism::from_images(2, &["aab", "ba"]).unwrap()] {
        let report = dynamics::homothety_check(&phi, 6, 1e-8).unwrap();
        assert!(
            report.pass,
            "{phi}: max deviation {} over tolerance 1e-8",
            report.max_deviation
        );
    }
    println!("criterion 2 (stable homothety on classes <= 6 at 1e-8): PASS");
}

#[test]
fn criterion_3_sink_dynamics() {
    let started = Instant::now();
    let phi = thue_morse();
    let basis = Basis::new(2).unwrap();
    let mut rng = SplitMix64::new(0xc3_5eed);
    let mut starts: Vec<TreePoint> = (0..20).map(|_| random_tree(&mut rng, basis, false)).collect();
    starts.extend((0..5).map(|_| random_collapsed_rose(&mut rng, basis)));
    for (i, t0) in starts.iter().enumerate() {
        let report = orbit_converge(t0, &phi, 3, 1e-6, 60)
            .unwrap_or_else(|e| panic!("start {i} failed to converge: {e}"));
        assert!(report.converged_at <= 60);
        assert!(*report.distances.last().unwrap() < 1e-6);
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "sink dynamics took {elapsed:?}, budget 10 s"
    );
    println!(
        "criterion 3 (sink dynamics: 25 starts < 1e-6 within 60 steps, {:.2}s < 10s): PASS",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_4_boundary_dynamics() {
    let phi = thue_morse();
    let rays = boundary::boundary_fixed_points(&phi, 8).unwrap();
    assert_eq!(rays.rays.len(), 2);
    let words: Vec<String> = rays
        .rays
        .iter()
        .map(|r| r.prefix_word(&rays.map).unwrap().to_string())
        .collect();
    assert_eq!(words, vec!["abbabaab".to_string(), "baababba".to_string()]);

    // twenty seeded foldable non-surjective examples respect the 2n bound
    let basis = Basis::new(2).unwrap();
    let mut rng = SplitMix64::new(0xc4_5eed);
    let mut found = 0;
    let mut tried = 0;
    while found < 20 {
        tried += 1;
        assert!(tried < 5000, "could not sample 20 foldable examples");
        let cand = sampling::random_endomorphism(&mut rng, basis, 2..=4);
        if stallings::image_rank(&cand) < 2 || stallings::is_surjective(&cand) {
            continue;
        }
        let Ok(rose) = GraphMap::rose_map(&cand) else {
            continue;
        };
        if fold_to_immersion(&rose, default_fold_budget(&cand)).is_err() {
            continue;
        }
        match boundary::boundary_fixed_points(&cand, 4) {
            Ok(b) => {
                assert!(b.rays.len() <= b.bound, "{cand}: {} rays", b.rays.len());
                found += 1;
            }
            Err(boundary::BoundaryError::CountBound { count, bound }) => {
                panic!("{cand}: {count} rays exceed the bound {bound}");
            }
            Err(_) => continue,
        }
    }

    let report = boundary::attraction_probe(&phi, &rays, 100, 6, 42).unwrap();
    assert!(report.pass, "{} attraction failures", report.failures);
    println!(
        "criterion 4 (2 rays with the stated prefixes; bound holds on 20 seeded foldable \
         examples; attraction at depth 6 over 100 samples): PASS"
    );
}

#[test]
fn criterion_5_cylinder_growth() {
    let phi = thue_morse();
    let mut prev = 0usize;
    for k in 1..=4 {
        let cover = boundary::cylinder_cover(&phi, k).unwrap();
        assert_eq!(cover.prefixes.len(), 4, "k={k}");
        // oracle: the minimal prefix must trace into the folded graph of the
        // k-th images without closing early
        let graph = FoldedGraph::subgroup_graph(phi.basis(), phi.power(k).images());
        for p in &cover.prefixes {
            let mut v = graph.basepoint();
            for &l in p.letters() {
                v = graph.step(v, l).expect("prefix must trace in the core");
            }
        }
        assert!(cover.min_prefix_len() > prev, "k={k}");
        prev = cover.min_prefix_len();
    }
    println!("criterion 5 (cylinder covers: 4 prefixes, strictly growing minimum): PASS");
}

#[test]
fn criterion_6_expansiveness_dichotomy() {
    let fib = stallings::expansiveness_probe(&fibonacci(), 5).unwrap();
    assert_eq!(fib.verdict, Verdict::Surjective);

    let tm = stallings::expansiveness_probe(&thue_morse(), 5).unwrap();
    assert_eq!(tm.verdict, Verdict::ExpansiveLikely);
    let girths: Vec<usize> = tm.girth_sequence.iter().map(|&(_, g)| g).collect();
    assert!(girths.windows(2).all(|w| w[0] < w[1]), "girths {girths:?}");

    let ex = stallings::expansiveness_probe(&example_f3(), 5).unwrap();
    assert_eq!(ex.verdict, Verdict::NotExpansive);
    println!("criterion 6 (dichotomy evidence: Surjective / ExpansiveLikely / NotExpansive): PASS");
}

#[test]
fn criterion_7_non_admissibility() {
    let phi = example_f3();
    let basis = Basis::new(3).unwrap();
    let splitting = TreePoint::rose(basis, vec![0.0, 0.0, 1.0]).unwrap();
    let verdicts = dynamics::admissibility_check(&phi, std::slice::from_ref(&splitting)).unwrap();
    assert_eq!(verdicts[0].verdict, dynamics::SplittingVerdict::Trivial);
    let err = dynamics::right_action(&splitting, &phi).unwrap_err();
    assert!(matches!(err, DynamicsError::TrivialPullback { .. }), "{err}");
    println!("criterion 7 (the 3-generator example is not admissible at collapse a,b): PASS");
}

#[test]
fn criterion_8_ratio_rigidity() {
    let phi = thue_morse();
    let c2 = rigidity_probe(&phi, 2, 100, 42).unwrap();
    let c4 = rigidity_probe(&phi, 4, 100, 42).unwrap();
    let c6 = rigidity_probe(&phi, 6, 100, 42).unwrap();
    assert!(c2.min_length_seen > 0.0);
    assert!(c4.min_length_seen > 0.0);
    assert!(c6.min_length_seen > 0.0);
    assert!(
        c2.max_deviation > c4.max_deviation && c4.max_deviation > c6.max_deviation,
        "C2 {} C4 {} C6 {}",
        c2.max_deviation,
        c4.max_deviation,
        c6.max_deviation
    );
    println!(
        "criterion 8 (rigidity: all lengths positive, C2 {:.4} > C4 {:.4} > C6 {:.4}): PASS",
        c2.max_deviation, c4.max_deviation, c6.max_deviation
    );
}

#[test]
fn criterion_9_structural_identities() {
    // transition-matrix power identity on 200 seeded maps
    let basis = Basis::new(2).unwrap();
    let mut rng = SplitMix64::new(0xc9_5eed);
    for _ in 0..200 {
        let phi = sampling::random_endomorphism(&mut rng, basis, 1..=4);
        let Ok(f) = GraphMap::rose_map(&phi) else {
            continue;
        };
        let m = f.transition_matrix();
        for r in 0..=5 {
            assert_eq!(f.power_raw(r).transition_matrix(), m.pow(r));
        }
    }

    // folding confluence on 500 seeded generator sets
    for _ in 0..500 {
        let count = rng.range(1, 3);
        let gens: Vec<Word> = (0..count)
            .map(|_| sampling::random_nontrivial_word(&mut rng, basis, 1..=6))
            .collect();
        let first = FoldedGraph::subgroup_graph_with_order(basis, &gens, FoldOrder::First);
        let last = FoldedGraph::subgroup_graph_with_order(basis, &gens, FoldOrder::Last);
        assert_eq!(first, last, "fold order changed the based graph: {gens:?}");
    }

    // primitivity agrees with brute force on all 3x3 {0,1,2} matrices
    let mut entries = [0u64; 9];
    loop {
        let m = TransitionMatrix::from_rows(&[&entries[0..3], &entries[3..6], &entries[6..9]]);
        assert_eq!(
            m.is_primitive(),
            brute_force_primitive(&m, 50),
            "matrix {entries:?}"
        );
        let mut i = 0;
        loop {
            if i == 9 {
                break;
            }
            entries[i] += 1;
            if entries[i] <= 2 {
                break;
            }
            entries[i] = 0;
            i += 1;
        }
        if i == 9 {
            break;
        }
    }
    println!(
        "criterion 9 (matrix powers on 200 maps; folding confluence on 500 sets; \
         primitivity vs brute force on all 3x3 {{0,1,2}} matrices): PASS"
    );
}

fn brute_force_primitive(m: &TransitionMatrix, max_power: usize) -> bool {
    let n = m.size();
    let mut p = TransitionMatrix::identity(n);
    for _ in 1..=max_power {
        p = boolean_mul(&p, m);
        if (0..n).all(|i| (0..n).all(|j| p.entry(i, j) > 0)) {
            return true;
        }
    }
    false
}

fn boolean_mul(a: &TransitionMatrix, b: &TransitionMatrix) -> TransitionMatrix {
    let n = a.size();
    let mut out = TransitionMatrix::zero(n);
    for i in 0..n {
        for j in 0..n {
            let hit = (0..n).any(|k| a.entry(i, k) > 0 && b.entry(k, j) > 0);
            *out.entry_mut(i, j) = hit as u64;
        }
    }
    out
}
