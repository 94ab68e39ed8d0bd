//! Acceptance run: one PASS/FAIL/SKIP line per criterion.
//!
//! Criteria that need the TU benchmarks read them from `NMFPOOL_DATA`
//! (a directory holding `ENZYMES/`, `PROTEINS/`, ...). Without it they
//! report SKIP; set `NMFPOOL_REQUIRE_DATA=1` to turn a SKIP into a failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use nmfpool::dataset::{parse_tu_dataset, pool_sizes, published_pooling, DatasetBundle};
use nmfpool::graph::{adjacency, normalize_adjacency};
use nmfpool::linalg::DenseMatrix;
use nmfpool::model::{gradcheck_model, prepare_graph, toy_graph, toy_suite, ModelConfig, TOY_CLASSES};
use nmfpool::nmf::{factorize, initial_factors, multiplicative_step, NmfConfig, NmfFactors};
use nmfpool::synthetic::synthetic_dataset;
use nmfpool::train::{cross_validate, TrainReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const STATS_TOL: f64 = 0.5;
const STATS_BUDGET: Duration = Duration::from_secs(60);
const MONOTONE_SLACK: f64 = 1e-10;
const MONOTONE_BUDGET: Duration = Duration::from_secs(10);
const RANK_ONE_REL: f64 = 1e-6;
const RANK_ONE_MIN_SEEDS: usize = 95;
const GRADCHECK_TOL: f64 = 1e-5;
const GRADCHECK_STEP: f64 = 1e-6;
const GRADCHECK_SEEDS: u64 = 5;
const GRADCHECK_BUDGET: Duration = Duration::from_secs(60);
const SYMMETRY_TOL: f64 = 1e-10;
const CONGRUENCE_TOL: f64 = 1e-9;
const DIRECTIONAL_MARGIN: f64 = 0.02;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Run {
    failures: usize,
    skips: usize,
}

impl Run {
    fn record(&mut self, id: usize, title: &str, outcome: Outcome) {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                self.failures += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => {
                self.skips += 1;
                ("SKIP", d)
            }
        };
        println!("[{tag}] criterion {id}: {title}: {detail}");
    }
}

fn data_root() -> Option<PathBuf> {
    std::env::var_os("NMFPOOL_DATA").map(PathBuf::from).filter(|p| p.is_dir())
}

fn load(name: &str) -> Option<DatasetBundle> {
    let root = data_root()?;
    match parse_tu_dataset(&root, name) {
        Ok(b) => Some(b),
        Err(e) => {
            println!("       could not load {name}: {e}");
            None
        }
    }
}

fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `‖A − W H‖_F` with explicit loops, independent of the library kernels.
fn residual(a: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> f64 {
    let mut total = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let mut wh = 0.0;
            for r in 0..w.cols() {
                wh += w.get(i, r) * h.get(r, j);
            }
            total += (a.get(i, j) - wh).powi(2);
        }
    }
    total.sqrt()
}

/// `Sᵀ A S` with explicit loops.
fn congruence(s: &DenseMatrix, a: &DenseMatrix) -> DenseMatrix {
    let (n, k) = s.shape();
    DenseMatrix::from_fn(k, k, |p, q| {
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += s.get(i, p) * a.get(i, j) * s.get(j, q);
            }
        }
        total
    })
}

// Published benchmark statistics: graphs, classes, mean nodes, mean edges.
const PUBLISHED_STATS: [(&str, usize, usize, f64, f64); 5] = [
    ("COLLAB", 5000, 3, 74.49, 2457.78),
    ("DD", 1178, 2, 284.32, 715.66),
    ("ENZYMES", 600, 6, 32.63, 62.14),
    ("NCI1", 4110, 2, 29.87, 32.30),
    ("PROTEINS", 1113, 2, 39.06, 72.82),
];

fn criterion_1() -> Outcome {
    if data_root().is_none() {
        return Outcome::Skip("NMFPOOL_DATA not set; benchmark files unavailable".into());
    }
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, graphs, classes, nodes, edges) in PUBLISHED_STATS {
        let start = Instant::now();
        let Some(b) = load(name) else {
            notes.push(format!("{name} missing"));
            ok = false;
            continue;
        };
        let elapsed = start.elapsed();
        let good = b.len() == graphs
            && b.num_classes == classes
            && (b.stats.avg_nodes - nodes).abs() <= STATS_TOL
            && (b.stats.avg_edges - edges).abs() <= STATS_TOL
            && elapsed < STATS_BUDGET;
        ok &= good;
        notes.push(format!(
            "{name} {}/{}/{:.2}/{:.2} in {:.1}s",
            b.len(),
            b.num_classes,
            b.stats.avg_nodes,
            b.stats.avg_edges,
            elapsed.as_secs_f64()
        ));
    }
    let detail = notes.join("; ");
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn criterion_2() -> Outcome {
    let cases: [(&str, f64, f64, usize, &[usize]); 4] = [
        ("ENZYMES", 32.63, 0.25, 2, &[8, 4]),
        ("COLLAB", 74.49, 0.22, 2, &[16, 8]),
        ("PROTEINS", 39.06, 0.21, 2, &[8, 4]),
        ("DD", 284.32, 0.05, 1, &[14]),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, avg, p, depth, expected) in cases {
        let got = pool_sizes(avg, p, depth);
        let good = got.as_deref().ok() == Some(expected);
        ok &= good;
        notes.push(format!("{name} {got:?}"));
    }
    let nci = pool_sizes(29.87, 0.24, 1).ok();
    let override_ks = published_pooling("NCI1").map(|p| p.ks);
    ok &= nci == Some(vec![7]) && override_ks == Some([6, 3]);
    notes.push(format!("NCI1 formula {nci:?}, override {override_ks:?}"));
    let detail = notes.join("; ");
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

/// Returns the outcome and a report string used for the determinism check.
fn criterion_3() -> (Outcome, String) {
    let start = Instant::now();
    let mut report = String::new();
    let mut worst_increase = f64::NEG_INFINITY;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DenseMatrix::from_fn(10, 10, |_, _| rng.gen::<f64>());
        let k = 2 + (seed as usize % 2);
        let (w, h) = initial_factors(&a, k, seed);
        let mut f = NmfFactors::from_factors(&a, w, h).unwrap();
        let mut previous = residual(&a, &f.w, &f.h);
        for _ in 0..200 {
            f = multiplicative_step(&a, &f).unwrap();
            let current = residual(&a, &f.w, &f.h);
            worst_increase = worst_increase.max(current - previous);
            previous = current;
        }
        write!(report, "{previous:.12e};").unwrap();
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "largest step increase {worst_increase:.3e} (slack {MONOTONE_SLACK:e}), {:.2}s",
        elapsed.as_secs_f64()
    );
    let outcome = if worst_increase <= MONOTONE_SLACK && elapsed < MONOTONE_BUDGET {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    };
    (outcome, report)
}

fn criterion_4() -> (Outcome, String) {
    let mut report = String::new();
    let mut hits = 0;
    let mut worst_iters = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let u: Vec<f64> = (0..6).map(|_| rng.gen_range(0.1..1.0)).collect();
        let v: Vec<f64> = (0..6).map(|_| rng.gen_range(0.1..1.0)).collect();
        let a = DenseMatrix::from_fn(6, 6, |i, j| u[i] * v[j]);
        let f = factorize(&a, &NmfConfig::new(1, seed)).unwrap();
        let rel = residual(&a, &f.w, &f.h) / frobenius(a.data());
        if rel < RANK_ONE_REL && f.iterations_run <= 200 {
            hits += 1;
        }
        worst_iters = worst_iters.max(f.iterations_run);
        write!(report, "{rel:.6e}/{};", f.iterations_run).unwrap();
    }
    let detail = format!("{hits}/100 seeds below {RANK_ONE_REL:e} relative residual, at most {worst_iters} iterations");
    let outcome = if hits >= RANK_ONE_MIN_SEEDS {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    };
    (outcome, report)
}

fn criterion_5() -> (Outcome, String) {
    let start = Instant::now();
    let mut report = String::new();
    let mut worst = (0.0f64, String::new());
    let mut undetected = Vec::new();
    for seed in 0..GRADCHECK_SEEDS {
        for (name, cfg) in toy_suite(seed) {
            let g = toy_graph(1);
            let r = gradcheck_model(&cfg, TOY_CLASSES, &g, GRADCHECK_STEP, false).unwrap();
            if r.max_rel_error > worst.0 {
                worst = (r.max_rel_error, format!("{name} seed {seed}"));
            }
            // A doubled gradient must be caught, or the check proves nothing.
            let bad = gradcheck_model(&cfg, TOY_CLASSES, &g, GRADCHECK_STEP, true).unwrap();
            if bad.max_rel_error < 0.4 {
                undetected.push(format!("{name} seed {seed}"));
            }
            write!(report, "{name}/{seed}:{:.6e};", r.max_rel_error).unwrap();
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "max relative error {:.3e} ({}), corruption missed in {:?}, {:.1}s",
        worst.0,
        worst.1,
        undetected,
        elapsed.as_secs_f64()
    );
    let outcome = if worst.0 < GRADCHECK_TOL && undetected.is_empty() && elapsed < GRADCHECK_BUDGET {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    };
    (outcome, report)
}

/// Checks the pooled adjacencies of every graph in `bundle` at `ks`.
fn coarsening_invariants(bundle: &DatasetBundle, ks: Vec<usize>) -> (bool, String, String) {
    let cfg = ModelConfig::pooled(ks, 64, bundle.default_feature_spec());
    let mut report = String::new();
    let (mut asym, mut neg, mut cong) = (0.0f64, 0.0f64, 0.0f64);
    for (i, g) in bundle.graphs.iter().enumerate() {
        let prepared = prepare_graph(g, &cfg, i).unwrap();
        let mut a_in = normalize_adjacency(&adjacency(g));
        for level in &prepared.pools {
            let a_out = &level.adjacency;
            asym = asym.max(a_out.asymmetry());
            neg = neg.max(-a_out.min());
            cong = cong.max(congruence(&level.s, &a_in).max_abs_diff(a_out));
            write!(report, "{:.9e};", a_out.sum()).unwrap();
            a_in = a_out.clone();
        }
    }
    let ok = asym <= SYMMETRY_TOL && neg <= 0.0 && cong <= CONGRUENCE_TOL;
    let detail = format!(
        "{} graphs, asymmetry {asym:.2e}, most negative {:.2e}, congruence error {cong:.2e}",
        bundle.len(),
        -neg
    );
    (ok, detail, report)
}

fn criterion_6() -> (Outcome, String) {
    match load("ENZYMES") {
        Some(b) => {
            let (ok, detail, report) = coarsening_invariants(&b, vec![8, 4]);
            (if ok { Outcome::Pass(detail) } else { Outcome::Fail(detail) }, report)
        }
        None => {
            // Same checks on generated graphs so the code path still runs.
            let b = synthetic_dataset("SYN", 3, 100, 17).unwrap();
            let (ok, detail, report) = coarsening_invariants(&b, vec![4, 2]);
            let verdict = if ok { "holds" } else { "FAILS" };
            let outcome = if ok {
                Outcome::Skip(format!("ENZYMES unavailable; synthetic proxy {verdict}: {detail}"))
            } else {
                Outcome::Fail(format!("synthetic proxy: {detail}"))
            };
            (outcome, report)
        }
    }
}

fn jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn cv(bundle: &DatasetBundle, cfg: &ModelConfig) -> TrainReport {
    let start = Instant::now();
    let r = cross_validate(bundle, cfg, 3, jobs()).unwrap();
    println!(
        "       {} {} seed {}: {:.3} ({:.3}) in {:.0}s",
        bundle.name,
        r.model,
        cfg.seed,
        r.mean_accuracy,
        r.std_over_folds,
        start.elapsed().as_secs_f64()
    );
    r
}

fn accuracy_config(bundle: &DatasetBundle, model: &str, seed: u64) -> ModelConfig {
    let spec = bundle.default_feature_spec();
    let ks = published_pooling(&bundle.name).expect("published pool sizes").ks;
    let cfg = match model {
        "1-NMFPool" => ModelConfig::pooled(vec![ks[0]], 64, spec),
        "2-NMFPool" => ModelConfig::pooled(ks.to_vec(), 64, spec),
        "1-GC" => ModelConfig::plain(1, 64, spec),
        "2-GC" => ModelConfig::plain(2, 64, spec),
        "3-GC" => ModelConfig::plain(3, 64, spec),
        other => panic!("unknown model {other}"),
    };
    ModelConfig { seed, ..cfg }
}

fn serialized(report: &TrainReport) -> String {
    let mut r = report.clone();
    for f in &mut r.folds {
        f.seconds = 0.0;
    }
    serde_json::to_string(&r).unwrap()
}

/// Published accuracy windows for the desk-scale runs.
const ACCURACY_TARGETS: [(&str, &str, f64, f64); 4] = [
    ("ENZYMES", "1-NMFPool", 0.19, 0.30),
    ("ENZYMES", "1-GC", 0.18, 0.27),
    ("PROTEINS", "1-NMFPool", 0.68, 0.76),
    ("PROTEINS", "2-GC", 0.68, 0.76),
];

fn criterion_7(enzymes: Option<&DatasetBundle>, proteins: Option<&DatasetBundle>) -> (Outcome, Vec<String>) {
    let (Some(enzymes), Some(proteins)) = (enzymes, proteins) else {
        return (Outcome::Skip("ENZYMES and PROTEINS unavailable".into()), Vec::new());
    };
    let mut notes = Vec::new();
    let mut reports = Vec::new();
    let mut ok = true;
    for (name, model, lo, hi) in ACCURACY_TARGETS {
        let bundle = if name == "ENZYMES" { enzymes } else { proteins };
        let r = cv(bundle, &accuracy_config(bundle, model, 0));
        let good = (lo..=hi).contains(&r.mean_accuracy);
        ok &= good;
        notes.push(format!("{name} {model} {:.3} in [{lo}, {hi}]: {good}", r.mean_accuracy));
        reports.push(serialized(&r));
    }
    let detail = notes.join("; ");
    (if ok { Outcome::Pass(detail) } else { Outcome::Fail(detail) }, reports)
}

fn criterion_8(enzymes: Option<&DatasetBundle>, proteins: Option<&DatasetBundle>) -> Outcome {
    let (Some(enzymes), Some(proteins)) = (enzymes, proteins) else {
        return Outcome::Skip("ENZYMES and PROTEINS unavailable".into());
    };
    let mut notes = Vec::new();
    let mut ok = true;
    for bundle in [enzymes, proteins] {
        let family_best = |models: &[&str]| -> (f64, String) {
            models
                .iter()
                .map(|m| {
                    let mean = (0..3)
                        .map(|seed| cv(bundle, &accuracy_config(bundle, m, seed)).mean_accuracy)
                        .sum::<f64>()
                        / 3.0;
                    (mean, m.to_string())
                })
                .fold((f64::NEG_INFINITY, String::new()), |a, b| if b.0 > a.0 { b } else { a })
        };
        let pooled = family_best(&["1-NMFPool", "2-NMFPool"]);
        let plain = family_best(&["1-GC", "2-GC", "3-GC"]);
        let good = pooled.0 >= plain.0 - DIRECTIONAL_MARGIN;
        ok &= good;
        notes.push(format!(
            "{} best pooled {} {:.3} vs best plain {} {:.3}",
            bundle.name, pooled.1, pooled.0, plain.1, plain.0
        ));
    }
    let detail = notes.join("; ");
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn main() {
    // Ignore the flags the test harness passes to every target.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let require_data = std::env::var("NMFPOOL_REQUIRE_DATA").is_ok_and(|v| v == "1");
    let mut run = Run { failures: 0, skips: 0 };

    run.record(1, "dataset statistics", criterion_1());
    run.record(2, "pool-size rule", criterion_2());
    let (o3, r3) = criterion_3();
    run.record(3, "NMF objective is monotone", o3);
    let (o4, r4) = criterion_4();
    run.record(4, "NMF recovers rank-1 inputs", o4);
    let (o5, r5) = criterion_5();
    run.record(5, "gradient check", o5);
    let (o6, r6) = criterion_6();
    run.record(6, "coarsening invariants", o6);

    let enzymes = load("ENZYMES");
    let proteins = load("PROTEINS");
    let (o7, r7) = criterion_7(enzymes.as_ref(), proteins.as_ref());
    run.record(7, "desk-scale accuracy", o7);
    run.record(8, "pooling does not lose to plain GC", criterion_8(enzymes.as_ref(), proteins.as_ref()));

    // Determinism: rerun and compare the serialized reports.
    let mut same = r3 == criterion_3().1 && r4 == criterion_4().1 && r5 == criterion_5().1 && r6 == criterion_6().1;
    let mut scope = "criteria 3-6".to_string();
    match (enzymes.as_ref(), r7.first()) {
        (Some(b), Some(first)) => {
            same &= *first == serialized(&cv(b, &accuracy_config(b, "1-NMFPool", 0)));
            scope.push_str(" and ENZYMES 1-NMFPool cross-validation");
        }
        _ => {
            let b = synthetic_dataset("SYN", 3, 20, 23).unwrap();
            let cfg = ModelConfig { max_epochs: 20, ..accuracy_config_synthetic(&b) };
            let a = serialized(&cross_validate(&b, &cfg, 3, jobs()).unwrap());
            same &= a == serialized(&cross_validate(&b, &cfg, 3, 1).unwrap());
            scope.push_str(" and synthetic cross-validation (benchmarks unavailable)");
        }
    }
    let detail = format!("byte-identical reruns over {scope}");
    run.record(9, "determinism", if same { Outcome::Pass(detail) } else { Outcome::Fail(detail) });

    println!(
        "acceptance: {} failed, {} skipped{}",
        run.failures,
        run.skips,
        if run.skips > 0 { " (set NMFPOOL_DATA to run the benchmark criteria)" } else { "" }
    );
    if run.failures > 0 || (require_data && run.skips > 0) {
        std::process::exit(1);
    }
}

fn accuracy_config_synthetic(b: &DatasetBundle) -> ModelConfig {
    ModelConfig::pooled(vec![4], 32, b.default_feature_spec())
}
