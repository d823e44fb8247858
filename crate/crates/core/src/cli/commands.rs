use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::json;

use super::pipeline::{compare_strategies, make_plan, run_experiment, write_csv};
use super::{
    ChainArgs, ClassModeArg, ClassesArgs, Command, CompareArgs, ExperimentConfig, GenArgs,
    MaterializeArgs, PlanArgs, SimulateArgs,
};
use crate::data::{
    generate_histogram, materialize_relation, read_relation, relative_frequencies, write_relation,
    ValueHistogram,
};
use crate::freqclass::{
    assign_classes, build_frequency_tree, exact_classes, fk_classes, ideal_workload,
    product_classes, range_classes,
};
use crate::planner::PartitionPlan;
use crate::rational::{format_ratio, parse_ratio};
use crate::selectivity::{
    brute_force_chain, chain_cardinality, chain_selectivities, chain_selectivity, ChainSpec,
    OracleBudget,
};
use crate::simulator::{execute_plan_with, verify_output, ExecuteOptions};

pub(super) fn dispatch(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Materialize(a) => materialize(a),
        Command::Plan(a) => plan(a),
        Command::Simulate(a) => simulate(a),
        Command::Chain(a) => chain(a),
        Command::Classes(a) => classes(a),
        Command::Compare(a) => compare(a),
    }
}

/// Replaces `path` with `bytes` via a temporary file in the same directory.
pub(super) fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub(super) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub(super) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))
}

fn gen(a: GenArgs) -> anyhow::Result<()> {
    let h = generate_histogram(a.domain, a.tuples, &a.dist, a.seed)?;
    write_json(&a.out, &h)
}

fn materialize(a: MaterializeArgs) -> anyhow::Result<()> {
    let h: ValueHistogram = read_json(&a.hist)?;
    let rel = materialize_relation(&h, &a.name, a.seed)?;
    let mut buf = Vec::new();
    write_relation(&rel, &mut buf)?;
    write_atomic(&a.out, &buf)
}

fn plan(a: PlanArgs) -> anyhow::Result<()> {
    let h_r: ValueHistogram = read_json(&a.r)?;
    let h_s: ValueHistogram = read_json(&a.s)?;
    let skew_threshold = parse_ratio(&a.skew_threshold)?;
    let prpd_threshold = a.prpd_threshold.as_deref().map(parse_ratio).transpose()?;
    let plan = make_plan(
        a.strategy,
        &h_r,
        &h_s,
        a.procs,
        &skew_threshold,
        prpd_threshold.as_ref(),
    )?;
    write_json(&a.out, &plan)
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let plan: PartitionPlan = read_json(&a.plan)?;
    let open = |p: &Path, name: &str| -> anyhow::Result<_> {
        let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
        read_relation(BufReader::new(f), name, plan.domain_size)
            .with_context(|| format!("reading {}", p.display()))
    };
    let r = open(&a.r, "R")?;
    let s = open(&a.s, "S")?;
    let opts = ExecuteOptions {
        digest: !a.no_digest,
        ..Default::default()
    };
    let report = execute_plan_with(&plan, &r, &s, opts)?;
    write_json(&a.report, &report)?;
    if a.verify {
        let budget = OracleBudget::from_env()?;
        if !verify_output(&report, &r, &s, budget)? {
            bail!("verification failed: distributed output differs from the nested-loop join");
        }
    }
    Ok(())
}

fn chain(a: ChainArgs) -> anyhow::Result<()> {
    let spec: ChainSpec = read_json(&a.spec)?;
    let cardinality = chain_cardinality(&spec)?;
    let mus = chain_selectivities(&spec)?;
    let (pairwise, overall) = match &mus {
        Some(m) => (
            m.iter()
                .map(|mu| format_ratio(mu.value()))
                .collect::<Vec<_>>(),
            Some(format_ratio(chain_selectivity(m)?.value())),
        ),
        None => (Vec::new(), None),
    };
    let brute = if a.brute_force {
        let tables = spec.materialize()?;
        Some(brute_force_chain(&tables, OracleBudget::from_env()?)?)
    } else {
        None
    };
    let matches = brute.map(|b| crate::rational::int(b) == cardinality);
    let out = json!({
        "selectivities": pairwise,
        "chain_selectivity": overall,
        "cardinality": format_ratio(&cardinality),
        "brute_force": brute.map(|b| b.to_string()),
        "match": matches,
    });
    match &a.out {
        Some(p) => write_json(p, &out)?,
        None => println!("{}", serde_json::to_string_pretty(&out)?),
    }
    if matches == Some(false) {
        bail!(
            "chain estimate {} differs from brute-force count {}",
            format_ratio(&cardinality),
            brute.unwrap()
        );
    }
    Ok(())
}

fn classes(a: ClassesArgs) -> anyhow::Result<()> {
    let h_r: ValueHistogram = read_json(&a.r)?;
    let h_s: Option<ValueHistogram> = a.s.as_deref().map(read_json).transpose()?;
    let need_s = || h_s.as_ref().context("--s is required for this mode");
    let (cs, total_r, total_s) = match a.mode {
        ClassModeArg::Exact => {
            let other = h_s.as_ref().unwrap_or(&h_r);
            (
                exact_classes(&relative_frequencies(&h_r)?),
                h_r.total(),
                other.total(),
            )
        }
        ClassModeArg::Product => {
            let s = need_s()?;
            (
                product_classes(&relative_frequencies(&h_r)?, &relative_frequencies(s)?)?,
                h_r.total(),
                s.total(),
            )
        }
        ClassModeArg::Range => {
            let s = need_s()?;
            if a.boundaries.is_empty() {
                bail!("range mode needs --boundaries");
            }
            let bounds = a
                .boundaries
                .iter()
                .map(|b| parse_ratio(b))
                .collect::<Result<Vec<_>, _>>()?;
            (
                range_classes(
                    &relative_frequencies(&h_r)?,
                    &relative_frequencies(s)?,
                    &bounds,
                )?,
                h_r.total(),
                s.total(),
            )
        }
        ClassModeArg::Fk => {
            let s = need_s()?;
            (
                fk_classes(&h_r, &relative_frequencies(s)?)?,
                h_r.total(),
                s.total(),
            )
        }
    };
    let tree = build_frequency_tree(&cs);
    let (class_loads, leaf_loads) = cs.workloads(total_r, total_s);
    let assignment = assign_classes(&tree, &class_loads, &leaf_loads, a.procs)?;
    let out = json!({
        "classes": cs,
        "tree": tree,
        "class_workloads": class_loads.iter().map(format_ratio).collect::<Vec<_>>(),
        "ideal_workload": format_ratio(&ideal_workload(&cs, total_r, total_s, a.procs)?),
        "assignment": assignment.to_json(&tree),
    });
    write_json(&a.out, &out)
}

fn compare(a: CompareArgs) -> anyhow::Result<()> {
    if let Some(cfg_path) = &a.config {
        let mut cfg: ExperimentConfig = read_json(cfg_path)?;
        if a.out_dir.is_some() {
            cfg.out_dir = a.out_dir.clone();
        }
        let out_dir = cfg
            .out_dir
            .clone()
            .context("--out-dir (or out_dir in the config) is required")?;
        let outputs = run_experiment(&cfg, &out_dir)?;
        if let Some(csv_path) = &a.out {
            write_csv(csv_path, &outputs.rows)?;
        }
        if outputs.verified == Some(false) {
            bail!("verification failed for at least one strategy");
        }
        return Ok(());
    }
    let (Some(r), Some(s)) = (&a.r, &a.s) else {
        bail!("compare needs either --config or both --r and --s");
    };
    let procs = a.procs.context("--procs is required with --r/--s")?;
    let out = a.out.as_ref().context("--out is required with --r/--s")?;
    let h_r: ValueHistogram = read_json(r)?;
    let h_s: ValueHistogram = read_json(s)?;
    let r_rel = materialize_relation(&h_r, "R", a.seed_r)?;
    let s_rel = materialize_relation(&h_s, "S", a.seed_s)?;
    let skew_threshold = parse_ratio(&a.skew_threshold)?;
    let prpd_threshold = a.prpd_threshold.as_deref().map(parse_ratio).transpose()?;
    let budget = a.verify.then(OracleBudget::from_env).transpose()?;
    let (rows, verified) = compare_strategies(
        &a.strategies,
        &r_rel,
        &s_rel,
        procs,
        &skew_threshold,
        prpd_threshold.as_ref(),
        budget,
    )?;
    write_csv(out, &rows)?;
    if verified == Some(false) {
        bail!("verification failed for at least one strategy");
    }
    Ok(())
}
