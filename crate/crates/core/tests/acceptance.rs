//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line, even when all of them pass.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewjoin::cli::{run_experiment, ExperimentConfig, RelationSpec};
use skewjoin::rational::{int, ratio, to_f64, Ratio};
use skewjoin::{
    assign_classes, brute_force_chain, brute_force_join, build_frequency_tree, chain_cardinality,
    class_workload, execute_plan_with, generate_histogram, hash_plan, hjps_plan, ideal_workload,
    join_cardinality, join_selectivity, materialize_relation, product_classes, prpd_plan,
    relative_frequencies, verify_output, ChainSpec, Distribution, ExecuteOptions, JoinValue,
    OracleBudget, Strategy, ValueHistogram,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Exact jps_factor of the hash baseline on the Zipf instance, frozen from
/// one run of this simulator.
const HASH_JPS_GOLDEN: (u128, u128) = (300_729_148, 48_898_471);

fn random_hist(rng: &mut ChaCha8Rng, m: u32, max_total: u64) -> ValueHistogram {
    let total = rng.random_range(1..=max_total);
    // a few heavy hitters on top of a random background
    let mut counts = vec![0u64; m as usize];
    for _ in 0..total {
        let v = if rng.random_bool(0.3) {
            rng.random_range(0..m.min(3))
        } else {
            rng.random_range(0..m)
        };
        counts[v as usize] += 1;
    }
    ValueHistogram::from_dense(&counts).unwrap()
}

fn selectivity_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    let budget = OracleBudget::default();
    for case in 0..1000 {
        let m = rng.random_range(1..=32);
        let hr = random_hist(&mut rng, m, 200);
        let hs = random_hist(&mut rng, m, 200);
        let r = materialize_relation(&hr, "R", case).map_err(|e| e.to_string())?;
        let s = materialize_relation(&hs, "S", case + 1).map_err(|e| e.to_string())?;
        let mu = join_selectivity(
            &relative_frequencies(&hr).unwrap(),
            &relative_frequencies(&hs).unwrap(),
        )
        .map_err(|e| e.to_string())?;
        let estimate = mu.value() * int(hr.total()) * int(hs.total());
        let actual = brute_force_join(&r, &s, budget)
            .map_err(|e| e.to_string())?
            .len();
        if estimate != int(actual as u64) {
            return Err(format!(
                "case {case}: estimate {estimate} vs brute force {actual}"
            ));
        }
    }
    Ok("1000 pairs, exact".into())
}

fn chain_estimate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB2);
    let budget = OracleBudget::default();
    let mut nonzero = 0;
    for case in 0..200 {
        let k = rng.random_range(2..=4);
        let domains: Vec<u32> = (0..k - 1).map(|_| rng.random_range(1..=8)).collect();
        let first = random_hist(&mut rng, domains[0], 8);
        let interiors = (1..k - 1)
            .map(|j| {
                (
                    random_hist(&mut rng, domains[j - 1], 5),
                    random_hist(&mut rng, domains[j], 5),
                )
            })
            .collect();
        let last = random_hist(&mut rng, domains[k - 2], 8);
        let spec =
            ChainSpec::from_cross_products(first, interiors, last).map_err(|e| e.to_string())?;
        let estimate = chain_cardinality(&spec).map_err(|e| e.to_string())?;
        let tables = spec.materialize().map_err(|e| e.to_string())?;
        let actual = brute_force_chain(&tables, budget).map_err(|e| e.to_string())?;
        if estimate != int(actual) {
            return Err(format!(
                "case {case} (k = {k}): estimate {estimate} vs brute force {actual}"
            ));
        }
        nonzero += usize::from(actual > 0);
    }
    Ok(format!(
        "200 chains, exact ({nonzero} with non-empty output)"
    ))
}

fn plan_completeness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let budget = OracleBudget::default();
    let mut checked = 0;
    for case in 0..200u64 {
        let m = rng.random_range(1..=64);
        let n = [2usize, 4, 8][rng.random_range(0..3)];
        let hr = random_hist(&mut rng, m, 500);
        let hs = random_hist(&mut rng, m, 500);
        let r = materialize_relation(&hr, "R", 2 * case).unwrap();
        let s = materialize_relation(&hs, "S", 2 * case + 1).unwrap();
        let plans = [
            hash_plan(m, n),
            hjps_plan(&hr, &hs, n),
            prpd_plan(&hr, &hs, n, &ratio(1, n as u64)),
        ];
        for plan in plans {
            let plan = plan.map_err(|e| format!("case {case}: {e}"))?;
            let rep = execute_plan_with(&plan, &r, &s, ExecuteOptions::default())
                .map_err(|e| e.to_string())?;
            if !verify_output(&rep, &r, &s, budget).map_err(|e| e.to_string())? {
                return Err(format!(
                    "case {case}: {} output differs from nested-loop join (m = {m}, n = {n})",
                    plan.strategy
                ));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} executions verified"))
}

fn skew_reduction() -> Outcome {
    let zipf = Distribution::Zipf { theta: 1.0 };
    let hr = generate_histogram(1000, 100_000, &zipf, 7).map_err(|e| e.to_string())?;
    let hs = generate_histogram(1000, 100_000, &zipf, 11).map_err(|e| e.to_string())?;
    let r = materialize_relation(&hr, "R", 7).unwrap();
    let s = materialize_relation(&hs, "S", 11).unwrap();
    let run = |strategy: Strategy| -> Result<Ratio, String> {
        let plan = match strategy {
            Strategy::Hash => hash_plan(1000, 8),
            _ => hjps_plan(&hr, &hs, 8),
        }
        .map_err(|e| e.to_string())?;
        let rep = execute_plan_with(&plan, &r, &s, ExecuteOptions::counts_only())
            .map_err(|e| e.to_string())?;
        Ok(rep.metrics.jps_factor)
    };
    let hash = run(Strategy::Hash)?;
    let hjps = run(Strategy::Hjps)?;
    let golden = ratio(HASH_JPS_GOLDEN.0, HASH_JPS_GOLDEN.1);
    let detail = format!(
        "hash {hash} (~{:.4}), hjps {hjps} (~{:.4})",
        to_f64(&hash),
        to_f64(&hjps)
    );
    if hash != golden {
        return Err(format!(
            "hash baseline drifted from golden {golden}: {detail}"
        ));
    }
    let mut broken = Vec::new();
    if hjps >= hash {
        broken.push("hjps not below hash");
    }
    if hjps > int(2) {
        broken.push("hjps above 2");
    }
    if broken.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}: {detail}", broken.join(", ")))
    }
}

fn hjps_hand_trace() -> Outcome {
    let mut counts = vec![10u64; 11];
    counts[0] = 100;
    let h = ValueHistogram::from_dense(&counts).unwrap();
    let plan = hjps_plan(&h, &h, 8).map_err(|e| e.to_string())?;
    let stats = plan.skew_stats.as_ref().ok_or("no skew stats")?;
    let groups = plan.dedicated_groups();
    let mut errs = Vec::new();
    if stats.tpc != 11_000 {
        errs.push(format!("tpc {}", stats.tpc));
    }
    if stats.pwl != int(1375) {
        errs.push(format!("pwl {}", stats.pwl));
    }
    if stats.skewed != [JoinValue(0)] {
        errs.push(format!("sk {:?}", stats.skewed));
    }
    if groups.len() != 1 || groups[0].1 != [0, 1, 2, 3, 4, 5, 6] {
        errs.push(format!("groups {groups:?}"));
    }
    if plan.residual_processors != [7] {
        errs.push(format!("residual {:?}", plan.residual_processors));
    }
    if errs.is_empty() {
        Ok("tpc 11000, pwl 1375, sk {b1}, group 0..=6, residual {7}".into())
    } else {
        Err(errs.join("; "))
    }
}

fn class_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD4);
    for case in 0..500 {
        let m = rng.random_range(1..=40);
        let hr = random_hist(&mut rng, m, 300);
        let hs = random_hist(&mut rng, m, 300);
        let n = rng.random_range(1..=8);
        let (tr, ts) = (hr.total(), hs.total());
        let cs = product_classes(
            &relative_frequencies(&hr).unwrap(),
            &relative_frequencies(&hs).unwrap(),
        )
        .map_err(|e| e.to_string())?;
        let sum: Ratio = cs
            .classes
            .iter()
            .map(|c| class_workload(c.len(), &c.key, tr, ts, cs.mode))
            .sum();
        let expected = join_cardinality(&hr, &hs).map_err(|e| e.to_string())?;
        if sum != int(expected) {
            return Err(format!(
                "case {case}: class workloads sum to {sum}, join has {expected}"
            ));
        }
        let tree = build_frequency_tree(&cs);
        let (class_loads, leaf_loads) = cs.workloads(tr, ts);
        let assignment =
            assign_classes(&tree, &class_loads, &leaf_loads, n).map_err(|e| e.to_string())?;
        let ideal = ideal_workload(&cs, tr, ts, n).map_err(|e| e.to_string())?;
        let max_leaf = leaf_loads.values().max().cloned().unwrap_or_else(|| int(0));
        if assignment.max_load() > &ideal + &max_leaf {
            return Err(format!(
                "case {case}: max load {} exceeds ideal {ideal} + max value load {max_leaf}",
                assignment.max_load()
            ));
        }
    }
    Ok("500 pairs, sums exact, assignment within bound".into())
}

fn snapshot(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        files.push((name, fs::read(&path).map_err(|e| e.to_string())?));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig {
        r: RelationSpec {
            domain: 200,
            tuples: 5000,
            dist: Distribution::Zipf { theta: 1.0 },
            seed: 7,
        },
        s: RelationSpec {
            domain: 200,
            tuples: 5000,
            dist: Distribution::Zipf { theta: 0.8 },
            seed: 11,
        },
        procs: 8,
        strategies: vec![
            Strategy::Hash,
            Strategy::Hjps,
            Strategy::Prpd,
            Strategy::Freqclass,
        ],
        skew_threshold: "2".into(),
        prpd_threshold: None,
        oracle_budget: None,
        verify: false,
        digest: true,
        out_dir: None,
    };
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_experiment(&cfg, a.path()).map_err(|e| format!("{e:#}"))?;
    run_experiment(&cfg, b.path()).map_err(|e| format!("{e:#}"))?;
    let (sa, sb) = (snapshot(a.path())?, snapshot(b.path())?);
    let names: Vec<&str> = sa.iter().map(|(n, _)| n.as_str()).collect();
    for wanted in [
        "r.hist.json",
        "s.hist.json",
        "plan-hjps.json",
        "report-hjps.json",
    ] {
        if !names.contains(&wanted) {
            return Err(format!("{wanted} missing from pipeline output"));
        }
    }
    if sa.len() != sb.len() {
        return Err("runs wrote different file sets".into());
    }
    for ((na, ba), (nb, bb)) in sa.iter().zip(&sb) {
        if na != nb || ba != bb {
            return Err(format!("{na} differs between runs"));
        }
    }
    Ok(format!("{} files byte-identical", sa.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("selectivity identity vs brute-force join", selectivity_identity),
        ("chain estimate vs brute-force chain", chain_estimate),
        ("plan completeness (hash, hjps, prpd)", plan_completeness),
        ("zipf skew reduction", skew_reduction),
        ("hjps n = 8 hand trace", hjps_hand_trace),
        ("frequency-class conservation", class_conservation),
        ("pipeline determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
