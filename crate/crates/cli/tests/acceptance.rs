//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use trc_core::classifier::{ClassifierSpec, ModelSpec};
use trc_core::ensembles::{EnsembleMethod, EnsembleSpec, SamplingProbs};
use trc_core::evaluation::{evaluate_at, randomization_significance, temporal_evaluate, temporal_stability, CvSelected};
use trc_core::io::{ingest_dir, IngestOptions};
use trc_core::mining::{global_link_recency, granularity_sweep, temporal_link_probability, SweepDirection};
use trc_core::representation::{named_model_config, GranularitySpec, NamedModel, RepresentationConfig};
use trc_core::synth::generate_synthetic;

use support::checks::{aggregate_error, auc_errors, corpus, kernel_errors, rbc_error};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn union_rbc() -> ModelSpec {
    ModelSpec::new(RepresentationConfig::uniform(GranularitySpec::Union), ClassifierSpec::rbc())
}

fn tvrc(theta: f64, classifier: ClassifierSpec) -> ModelSpec {
    ModelSpec::new(named_model_config(NamedModel::Tvrc, theta, theta).unwrap(), classifier)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn kernels() -> Outcome {
    let start = Instant::now();
    let (k, mass) = kernel_errors(10_000, 1);
    let el = start.elapsed();
    outcome(
        k < 1e-12 && mass < 1e-12 && within(el, Duration::from_secs(5)),
        format!("max kernel error {k:.1e}, max mass error {mass:.1e}, {el:.2?}"),
    )
}

fn rbc_oracle() -> Outcome {
    let start = Instant::now();
    let (mut worst, mut compared) = (0.0f64, 0);
    for raw in corpus(100, 2) {
        let (e, n) = rbc_error(&raw);
        worst = worst.max(e);
        compared += n;
    }
    let el = start.elapsed();
    outcome(
        worst < 1e-9 && compared > 0 && within(el, Duration::from_secs(10)),
        format!("max posterior error {worst:.1e} over {compared} fitted timesteps, {el:.2?}"),
    )
}

fn aggregate_oracle() -> Outcome {
    let worst = corpus(100, 2).iter().map(aggregate_error).fold(0.0f64, f64::max);
    outcome(worst < 1e-9, format!("max aggregate error {worst:.1e}"))
}

fn auc_oracle() -> Outcome {
    let (e, complement) = auc_errors(1000, 4);
    outcome(
        e < 1e-12 && complement,
        format!("max error {e:.1e}, complement identity exact: {complement}"),
    )
}

fn temporal_recovery() -> Outcome {
    let start = Instant::now();
    let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut gaps = Vec::new();
    for seed in 0..10 {
        let g = generate_synthetic(300, 8, 0.7, 0.8, seed).unwrap();
        let selected = CvSelected {
            candidates: grid.iter().map(|&th| tvrc(th, ClassifierSpec::rbc())).collect(),
            k: 4,
            seed,
        };
        let u = temporal_evaluate(&g, &union_rbc()).unwrap().mean_auc;
        let t = temporal_evaluate(&g, &selected).unwrap().mean_auc;
        gaps.push(t - u);
    }
    let el = start.elapsed();
    let gap = mean(&gaps);
    outcome(
        gap >= 0.05 && within(el, Duration::from_secs(120)),
        format!("mean gap TVRC(cv) - UNION {gap:.4}, {el:.2?}"),
    )
}

fn ensemble_direction() -> Outcome {
    let start = Instant::now();
    let base = tvrc(0.5, ClassifierSpec::rpt());
    let (mut single, mut ens) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let g = generate_synthetic(300, 8, 0.7, 0.8, seed).unwrap();
        let method = EnsembleMethod::StructureSampling {
            probs: SamplingProbs::Recency { theta: 0.5 },
        };
        let spec = EnsembleSpec::new(10, method, base.clone(), seed);
        single.push(temporal_evaluate(&g, &base).unwrap().mean_auc);
        ens.push(temporal_evaluate(&g, &spec).unwrap().mean_auc);
    }
    let el = start.elapsed();
    let (ms, me) = (mean(&single), mean(&ens));
    let (ss, se) = (temporal_stability(&single).unwrap(), temporal_stability(&ens).unwrap());
    outcome(
        me >= ms && se <= ss && within(el, Duration::from_secs(300)),
        format!("single {ms:.4} (std {ss:.4}), ensemble {me:.4} (std {se:.4}), {el:.2?}"),
    )
}

fn significance_order() -> Outcome {
    let attrs = ["signal".to_string(), "noise".to_string()];
    let mut wins = 0;
    for seed in 0..10 {
        let g = generate_synthetic(300, 8, 0.7, 0.8, seed).unwrap();
        let r = randomization_significance(&g, &union_rbc(), &attrs, 8, seed, 3).unwrap();
        let total = |a: &str| r.ranking.iter().find(|x| x.0 == a).map_or(0.0, |x| x.1);
        wins += usize::from(total("signal") > total("noise"));
    }
    outcome(wins >= 9, format!("signal outranks noise in {wins}/10 seeds"))
}

fn sweep_shape() -> Outcome {
    let (mut monotone, mut exact) = (0, 0);
    for seed in 0..10 {
        let g = generate_synthetic(300, 8, 0.3, 0.8, seed).unwrap();
        let r = granularity_sweep(&g, &union_rbc(), SweepDirection::PastToPresent, 8).unwrap();
        let aucs: Option<Vec<f64>> = r.points.iter().map(|p| p.1).collect();
        if aucs.is_some_and(|a| a.windows(2).all(|w| w[1] >= w[0] - 0.02)) {
            monotone += 1;
        }
        if r.points.last().unwrap().1 == evaluate_at(&g, &union_rbc(), 8).unwrap() {
            exact += 1;
        }
    }
    outcome(
        monotone >= 8 && exact == 10,
        format!("non-decreasing in {monotone}/10 seeds, full window equals UNION in {exact}/10"),
    )
}

fn toy_fixture() -> trc_core::graph::TemporalGraph {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy");
    ingest_dir(&dir, IngestOptions::default()).unwrap()
}

fn mining_golden() -> Outcome {
    let g = toy_fixture();
    let recency = global_link_recency(&g, 3).unwrap();
    let probs = temporal_link_probability(&g, 3).unwrap();
    let golden = recency == 0.5 && probs == BTreeMap::from([(1, 0.5), (2, 0.5)]);
    let sums = g.timesteps().all(|t| {
        let p = temporal_link_probability(&g, t).unwrap();
        (p.values().sum::<f64>() - 1.0).abs() < 1e-12
    });
    outcome(
        golden && sums,
        format!("recency(3) = {recency}, lag distribution {probs:?}, sums to 1: {sums}"),
    )
}

fn trc(args: &[&str], dir: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_trc"))
        .args(args)
        .current_dir(dir)
        .env_remove("TRC_SEED")
        .env("RUST_LOG", "error")
        .stdout(Stdio::null())
        .status()
        .is_ok_and(|s| s.success())
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .map(|entries| {
            entries
                .filter_map(|e| e.ok())
                .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
                .collect()
        })
        .unwrap_or_default()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    fs::write(
        root.join("experiment.conf"),
        "seed = 5\n\
         output.dir = out\n\
         data.dir = data\n\
         model.name = TVRC\n\
         model.theta = 0.5\n\
         cv.thetas = 0.3, 0.7\n\
         ensemble.method = structure_sampling\n\
         ensemble.size = 3\n\
         synth.nodes = 80\n\
         synth.timesteps = 6\n",
    )
    .unwrap();
    if !trc(&["synth", "experiment.conf", "--out", "data"], root) {
        return outcome(false, "synth failed to produce the dataset");
    }
    let commands = ["evaluate", "cv", "ensemble", "significance", "sweep", "stats", "synth"];
    let mut differing = Vec::new();
    for cmd in commands {
        let runs: Vec<_> = ["run1", "run2"]
            .iter()
            .enumerate()
            .map(|(i, run)| {
                let out = format!("{cmd}-{run}");
                // the second run is single-threaded to shake out scheduling effects
                let ok = if i == 0 {
                    trc(&[cmd, "experiment.conf", "--out", &out], root)
                } else {
                    trc(&["--jobs", "1", cmd, "experiment.conf", "--out", &out], root)
                };
                (ok, read_dir(&root.join(&out)))
            })
            .collect();
        let same = runs.iter().all(|r| r.0 && !r.1.is_empty()) && runs[0].1 == runs[1].1;
        if !same {
            differing.push(cmd);
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} subcommands byte-identical across runs", commands.len())
        } else {
            format!("outputs differ or runs failed for: {}", differing.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("kernel correctness", kernels),
        ("rbc oracle equivalence", rbc_oracle),
        ("aggregate oracle equivalence", aggregate_oracle),
        ("auc oracle", auc_oracle),
        ("synthetic temporal recovery", temporal_recovery),
        ("ensemble direction", ensemble_direction),
        ("significance rank order", significance_order),
        ("sweep behavior", sweep_shape),
        ("mining golden values", mining_golden),
        ("cli determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.pass);
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
