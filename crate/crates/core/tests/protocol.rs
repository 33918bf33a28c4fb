//! Temporal protocol behavior on whole datasets.

use std::fs::OpenOptions;
use std::io::Write;

use trc_core::classifier::{ClassifierSpec, ModelSpec};
use trc_core::evaluation::{cross_validate, evaluate_at, labeled_nodes, temporal_evaluate, TemporalMethod};
use trc_core::graph::{GraphBuilder, TemporalGraph};
use trc_core::io::{ingest_dir, write_dataset, IngestOptions};
use trc_core::mining::{granularity_sweep, SweepDirection};
use trc_core::representation::{named_model_config, GranularitySpec, NamedModel, RepresentationConfig};
use trc_core::synth::generate_synthetic;

fn union(classifier: ClassifierSpec) -> ModelSpec {
    ModelSpec::new(RepresentationConfig::uniform(GranularitySpec::Union), classifier)
}

/// Copy of `g` with an attribute that reveals the label but is only
/// observed at the final timestep.
fn with_future_oracle(g: &TemporalGraph) -> TemporalGraph {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(g, dir.path()).unwrap();
    let t = g.t_max();
    let mut f = OpenOptions::new().append(true).open(dir.path().join("nodes.csv")).unwrap();
    for v in g.nodes() {
        if let Some(c) = g.label_at(v, t) {
            writeln!(f, "{},{t},oracle,{}", g.node_name(v), g.classes()[c]).unwrap();
        }
    }
    drop(f);
    ingest_dir(dir.path(), IngestOptions::default()).unwrap()
}

#[test]
fn future_values_never_reach_training_or_prediction() {
    let g = generate_synthetic(120, 5, 0.5, 0.8, 3).unwrap();
    let leaky = with_future_oracle(&g);
    assert!(leaky.attribute("oracle").is_some());
    for classifier in [ClassifierSpec::rbc(), ClassifierSpec::rpt()] {
        let spec = union(classifier);
        let nodes: Vec<_> = labeled_nodes(&g, 4).into_iter().map(|(v, _)| v).collect();
        let clean = spec.fit_predict(&g, 3, 4, &nodes).unwrap();
        let probed = spec.fit_predict(&leaky, 3, 4, &nodes).unwrap();
        for (a, b) in clean.iter().zip(&probed) {
            assert_eq!(a.probs(), b.probs());
        }
        assert_eq!(evaluate_at(&g, &spec, 4).unwrap(), evaluate_at(&leaky, &spec, 4).unwrap());
    }
}

#[test]
fn two_timesteps_give_one_score() {
    let mut b = GraphBuilder::new();
    for v in ["a", "b", "c", "d"] {
        b.add_node(v);
    }
    for (u, v, t) in [("a", "b", 1), ("c", "d", 1), ("a", "c", 2), ("b", "d", 2)] {
        b.add_edge(u, v, t);
    }
    for (v, l) in [("a", "x"), ("b", "x"), ("c", "y"), ("d", "y")] {
        b.set_static_label(v, l).unwrap();
    }
    let g = b.build().unwrap();
    let r = temporal_evaluate(&g, &union(ClassifierSpec::rbc())).unwrap();
    assert_eq!(r.per_timestep_auc.len(), 1);
    assert!(r.per_timestep_auc.contains_key(&2));
}

#[test]
fn cv_recovers_fast_decay() {
    let grid = [0.3, 0.5, 0.9];
    let mut hits = 0;
    for seed in 0..5 {
        let g = generate_synthetic(300, 8, 0.9, 0.8, seed).unwrap();
        let candidates: Vec<ModelSpec> = grid
            .iter()
            .map(|&th| ModelSpec::new(named_model_config(NamedModel::Tvrc, th, th).unwrap(), ClassifierSpec::rbc()))
            .collect();
        let cv = cross_validate(&g, &candidates, 4, 7, seed).unwrap();
        hits += usize::from(cv.best == 2);
    }
    assert!(hits >= 4, "{hits}/5");
}

#[test]
fn full_window_sweep_is_the_union_model() {
    let g = generate_synthetic(150, 6, 0.5, 0.8, 9).unwrap();
    let base = union(ClassifierSpec::rbc());
    let r = granularity_sweep(&g, &base, SweepDirection::PastToPresent, 6).unwrap();
    assert_eq!(r.points.last().unwrap().1, evaluate_at(&g, &base, 6).unwrap());
}
