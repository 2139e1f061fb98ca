//! Acceptance suite. Prints one line per criterion:
//! `PASS`, `FAIL` or `BLOCKED` (inputs unavailable in this environment),
//! followed by the measured figures. Exits non-zero if any criterion fails.
//!
//! Benchmark files are looked up in `$SPECIOUS_DATA_DIR` (default `data/` at
//! the workspace root) as `mushroom.dat`, `chess.dat` and `plants.dat`.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specious::measures::{
    birch_p, birch_p_nested_sub, birch_p_nested_super, conditional_leverages, conditional_mi, leverage, mi_counts,
    LogFactorials, PairCounts,
};
use specious::miner::MinerConfig;
use specious::specdetect::{detect_rules, DetectConfig, Detection, VerdictKind};
use specious::synthgen::{
    brute_force_birch, brute_force_detect, brute_force_top_k, first_difference, plant_simpson, PlantSpec, ANTECEDENT,
    CONFOUNDER, CONSEQUENT,
};
use specious::{mine_top_k, Dataset, Polarity};

enum Outcome {
    Pass(String),
    Fail(String),
    Blocked(String),
}

fn relative_error(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn birch_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB1C4);
    let mut worst = 0.0f64;
    for trial in 0..10_000 {
        let pc = common::random_table(&mut rng, 60);
        let fast = birch_p(&pc).expect("consistent");
        let exact = brute_force_birch(&pc).expect("within guard");
        let err = relative_error(fast, exact);
        worst = worst.max(err);
        if err > 1e-10 {
            return Outcome::Fail(format!("trial {trial}: {pc:?} fast={fast:e} exact={exact:e}"));
        }
    }
    let mut worst_nested = 0.0f64;
    let mut worst_nested_oracle = 0.0f64;
    for trial in 0..2_000 {
        let pc = common::table_x_within_q(&mut rng, 60);
        let full = birch_p(&pc).expect("consistent");
        let sub = birch_p_nested_sub(pc.n, pc.n_c, pc.n_x, pc.n_xc, pc.n_q - pc.n_x, pc.n_qc - pc.n_xc)
            .expect("nested margins");
        let pc2 = common::table_q_within_x(&mut rng, 60);
        let full2 = birch_p(&pc2).expect("consistent");
        let sup = birch_p_nested_super(pc2.n_x, pc2.n_xc, pc2.n_q, pc2.n_qc).expect("nested margins");
        let e = relative_error(sub, full).max(relative_error(sup, full2));
        worst_nested = worst_nested.max(e);
        let o = relative_error(sub, brute_force_birch(&pc).unwrap())
            .max(relative_error(sup, brute_force_birch(&pc2).unwrap()));
        worst_nested_oracle = worst_nested_oracle.max(o);
        if e > 1e-12 || o > 1e-10 {
            return Outcome::Fail(format!("nested trial {trial}: {pc:?} / {pc2:?} full-vs-reduced {e:e}"));
        }
    }
    Outcome::Pass(format!(
        "10000 tables n<=60, max rel err {worst:.2e}; 4000 nested, reduced-vs-full {worst_nested:.2e}, vs oracle {worst_nested_oracle:.2e}"
    ))
}

fn ln_hypergeom(lf: &LogFactorials, n: u64, marked: u64, drawn: u64, k: u64) -> f64 {
    lf.ln_choose(marked, k) + lf.ln_choose(n - marked, drawn - k) - lf.ln_choose(n, drawn)
}

/// `ln P(N_qc = n_qc)` with both strata of `X` hypergeometric.
fn ln_conditional_point(lf: &LogFactorials, pc: &PairCounts) -> f64 {
    let terms: Vec<f64> = (0..=pc.n_qc)
        .map(|i| lf.log_hypergeom_point(pc, i, pc.n_qc - i).expect("consistent"))
        .filter(|t| t.is_finite())
        .collect();
    let hi = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi + terms.iter().map(|t| (t - hi).exp()).sum::<f64>().ln()
}

fn measure_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1DE7);
    let (mut dec, mut chain, mut ratio) = (0.0f64, 0.0f64, 0.0f64);
    let mut tables = 0;
    while tables < 10_000 {
        let pc = common::random_table(&mut rng, 5_000);
        if pc.n_x == 0 || pc.n_x == pc.n {
            continue;
        }
        tables += 1;
        let n = pc.n;
        let (d1, d2) = conditional_leverages(&pc);
        let px = pc.p(pc.n_x);
        let rhs = d1
            + d2
            + leverage(n, pc.n_x, pc.n_q, pc.n_xq).unwrap() * leverage(n, pc.n_x, pc.n_c, pc.n_xc).unwrap()
                / (px * (1.0 - px));
        let e = (leverage(n, pc.n_q, pc.n_c, pc.n_qc).unwrap() - rhs).abs();
        dec = dec.max(e);
        if e > 1e-12 {
            return Outcome::Fail(format!("decomposition off by {e:e} on {pc:?}"));
        }

        let (a, b) = conditional_mi(&pc);
        let (c, d) = conditional_mi(&pc.swapped());
        let lhs = (a + b) - (c + d);
        let rhs = mi_counts(n, pc.n_q, pc.n_c, pc.n_qc) - mi_counts(n, pc.n_x, pc.n_c, pc.n_xc);
        let e = (lhs - rhs).abs();
        chain = chain.max(e / n as f64);
        if e > 1e-9 * n as f64 {
            return Outcome::Fail(format!("chain rule off by {e:e} on {pc:?}"));
        }
    }
    let mut ratios = 0;
    while ratios < 10_000 {
        let pc = common::random_table(&mut rng, 60);
        ratios += 1;
        let lf = LogFactorials::new(pc.n);
        let lhs = ln_hypergeom(&lf, pc.n, pc.n_x, pc.n_c, pc.n_xc) - ln_hypergeom(&lf, pc.n, pc.n_q, pc.n_c, pc.n_qc);
        let rhs = ln_conditional_point(&lf, &pc.swapped()) - ln_conditional_point(&lf, &pc);
        let e = ((lhs - rhs).exp() - 1.0).abs();
        ratio = ratio.max(e);
        if e > 1e-10 {
            return Outcome::Fail(format!("ratio preservation off by {e:e} on {pc:?}"));
        }
    }
    Outcome::Pass(format!(
        "10000 tables each: decomposition {dec:.2e}, chain rule {chain:.2e}*n, ratio {ratio:.2e} relative"
    ))
}

fn miner_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3117);
    let mut rules = 0;
    for trial in 0..200 {
        let d = common::usable_dataset(&mut rng, (10, 200), (2, 10));
        let cfg = common::random_miner_config(&mut rng, &d, 50);
        let fast = mine_top_k(&d, &cfg).expect("usable");
        let slow = brute_force_top_k(&d, &cfg).expect("within guard");
        if let Some(diff) = first_difference(&fast.rules, &slow.rules) {
            return Outcome::Fail(format!(
                "dataset {trial} (n={}, k={}, {cfg:?}): {diff}",
                d.n(),
                d.n_attrs()
            ));
        }
        rules += fast.len();
    }
    Outcome::Pass(format!(
        "200 datasets k<=10 n<=200 K<=50, {rules} rules identical in set and order"
    ))
}

fn detector_completeness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xDE7E);
    let mut judged = 0;
    let mut specious = 0;
    for trial in 0..200 {
        let d = common::usable_dataset(&mut rng, (10, 200), (2, 8));
        let cfg = common::random_miner_config(&mut rng, &d, 50);
        let top = mine_top_k(&d, &cfg).expect("usable");
        let theta = [0.5, 0.5, 2.0, 8.0][trial % 4];
        let dcfg = DetectConfig {
            theta,
            ..DetectConfig::default()
        };
        let det = detect_rules(&top.rules, &d, &dcfg).expect("ordered list");
        let oracle = brute_force_detect(&d, &top.rules, &dcfg);
        for (i, (j, o)) in det.judgements.iter().zip(&oracle).enumerate() {
            if j.verdict.kind != o.kind || j.verdict.mediator != o.mediator {
                return Outcome::Fail(format!(
                    "dataset {trial}, rank {i}: detector {:?}/{:?}, oracle {:?}/{:?}",
                    j.verdict.kind, j.verdict.mediator, o.kind, o.mediator
                ));
            }
        }
        judged += det.judgements.len();
        specious += det.judgements.iter().filter(|j| j.verdict.kind.is_specious()).count();
    }
    Outcome::Pass(format!(
        "200 datasets k<=8, {judged} verdicts agree ({specious} specious)"
    ))
}

fn planted_recall() -> Outcome {
    let mut hits = 0;
    let mut misses = Vec::new();
    for seed in 0..100u64 {
        let plant = plant_simpson(&PlantSpec::classic(1000, 10, seed)).expect("realisable");
        let d = &plant.dataset;
        let top = mine_top_k(d, &MinerConfig::top(50)).expect("usable");
        let det = detect_rules(&top.rules, d, &DetectConfig::default()).expect("ordered");
        let x = d.attr_set(&[CONFOUNDER]).unwrap();
        let q = d.attr_set(&[ANTECEDENT]).unwrap();
        let c = d.attr(CONSEQUENT).unwrap();
        let hit = det.judgements.iter().any(|j| {
            j.rule.antecedent == q
                && j.rule.consequent == c
                && j.rule.polarity == Polarity::One
                && j.verdict.kind == VerdictKind::Type2YuleSimpson
                && j.verdict.pair.as_ref().is_some_and(|p| p.mediator.antecedent == x)
        });
        if hit {
            hits += 1;
        } else {
            misses.push(seed);
        }
    }
    let line = format!("{hits}/100 seeds flag the planted rule as type2 via the confounder (misses: {misses:?})");
    if hits >= 95 {
        Outcome::Pass(line)
    } else {
        Outcome::Fail(line)
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os("SPECIOUS_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn run_benchmark(name: &str, k: usize) -> Result<Option<(Detection, f64)>, String> {
    let path = data_dir().join(format!("{name}.dat"));
    if !path.exists() {
        return Ok(None);
    }
    let d = Dataset::load_fimi(&path).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let top = mine_top_k(&d, &MinerConfig::top(k)).map_err(|e| e.to_string())?;
    let det = detect_rules(&top.rules, &d, &DetectConfig::default()).map_err(|e| e.to_string())?;
    Ok(Some((det, t.elapsed().as_secs_f64())))
}

fn specious_share(det: &Detection) -> f64 {
    let s = det.judgements.iter().filter(|j| j.verdict.kind.is_specious()).count();
    s as f64 / det.judgements.len().max(1) as f64
}

fn benchmarks() -> (Outcome, Outcome) {
    let runs = [("mushroom", 1000), ("chess", 1000), ("plants", 100)];
    let mut lines = Vec::new();
    let mut missing = Vec::new();
    let mut failed = false;
    let mut type3 = Vec::new();
    for (name, k) in runs {
        match run_benchmark(name, k) {
            Err(e) => {
                failed = true;
                lines.push(format!("{name}: error {e}"));
            }
            Ok(None) => missing.push(name),
            Ok(Some((det, secs))) => {
                let share = specious_share(&det);
                let ok = if name == "plants" {
                    det.judgements.iter().all(|j| !j.verdict.kind.is_specious())
                } else {
                    share >= 0.85
                };
                failed |= !ok;
                lines.push(format!("{name} top-{k}: specious {share:.3} ({secs:.1}s)"));
                let bad = det.significant_type3(0.05);
                type3.push(format!("{name}: {} type3 with p_B<0.05", bad.len()));
                if !bad.is_empty() {
                    type3.push(format!("{name} violations at ranks {bad:?}"));
                }
            }
        }
    }
    if !missing.is_empty() {
        let why = format!(
            "benchmark files not found in {} ({}); no network access to fetch them",
            data_dir().display(),
            missing.join(", ")
        );
        let bench = Outcome::Blocked(format!("{why}; ran: {lines:?}"));
        let sanity = Outcome::Blocked(format!("{why}; ran: {type3:?}"));
        return (bench, sanity);
    }
    let bench = if failed {
        Outcome::Fail(lines.join("; "))
    } else {
        Outcome::Pass(lines.join("; "))
    };
    let sanity = if type3.iter().any(|l| l.contains("violations")) {
        Outcome::Fail(type3.join("; "))
    } else {
        Outcome::Pass(type3.join("; "))
    };
    (bench, sanity)
}

fn main() {
    // a lone argument that is not a flag filters criteria by name
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let selected = |name: &str| filter.as_deref().is_none_or(|f| name.contains(f));
    let mut results: Vec<(&str, Outcome, f64)> = Vec::new();
    let mut run = |name: &'static str, f: &dyn Fn() -> Outcome| {
        if selected(name) {
            let t = Instant::now();
            let o = f();
            results.push((name, o, t.elapsed().as_secs_f64()));
        }
    };
    run("birch_oracle_equivalence", &birch_oracle);
    run("measure_identities", &measure_identities);
    run("miner_oracle_equivalence", &miner_oracle);
    run("detector_completeness", &detector_completeness);
    run("planted_paradox_recall", &planted_recall);
    if selected("benchmark_reproduction") || selected("type3_pruning_sanity") {
        let t = Instant::now();
        let (bench, sanity) = benchmarks();
        let secs = t.elapsed().as_secs_f64();
        results.push(("benchmark_reproduction", bench, secs));
        results.push(("type3_pruning_sanity", sanity, 0.0));
    }
    let mut failures = 0;
    for (name, outcome, secs) in &results {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failures += 1;
                ("FAIL", d)
            }
            Outcome::Blocked(d) => ("BLOCKED", d),
        };
        println!("{tag:<7} {name} [{secs:.1}s]: {detail}");
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
