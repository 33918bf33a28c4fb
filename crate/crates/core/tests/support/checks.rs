//! Comparisons of library results against the oracles.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trc_core::evaluation::auc;
use trc_core::graph::{NodeId, Timestep};
use trc_core::rbc::{rbc_fit, rbc_predict, RbcParams};
use trc_core::representation::{build_summary, kernel_weight, GranularitySpec, KernelKind, KernelSpec, Orientation, RepresentationConfig};
use trc_core::rpt::{rpt_features, FeatureContext, FeatureSpec};

use super::oracles::{auc_oracle, kernel_oracle, OracleAgg, RawGraph, LABEL};

pub fn corpus(n: usize, seed: u64) -> Vec<RawGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![RawGraph::toy()];
    out.extend((0..n).map(|_| RawGraph::random(&mut rng, 12, 3)));
    out
}

/// Largest kernel deviation over `n` random tuples, and the largest
/// deviation of the exponential mass identity.
pub fn kernel_errors(n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = [
        (KernelKind::Exponential, "exponential"),
        (KernelKind::Linear, "linear"),
        (KernelKind::InverseLinear, "inverse_linear"),
        (KernelKind::Uniform, "uniform"),
    ];
    let (mut kernel_err, mut mass_err) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let (kind, name) = kinds[rng.gen_range(0..kinds.len())];
        let theta = rng.gen_range(1e-6..=1.0);
        let t_o = rng.gen_range(0..50);
        let t = t_o + rng.gen_range(0..60);
        let t_i = rng.gen_range(t_o..=t);
        let as_printed = rng.gen_bool(0.5);
        let orientation = if as_printed { Orientation::AsPrinted } else { Orientation::RecencyCorrected };
        let k = if kind == KernelKind::Uniform {
            KernelSpec::uniform()
        } else {
            KernelSpec::new(kind, theta).unwrap()
        }
        .with_orientation(orientation);
        let got = kernel_weight(&k, t_i, t, t_o).unwrap();
        kernel_err = kernel_err.max((got - kernel_oracle(name, theta, t_o, t_i, t, as_printed)).abs());
        if kind == KernelKind::Exponential {
            let mass: f64 = (t_o..=t).map(|s| kernel_weight(&k, s, t, t_o).unwrap()).sum();
            let closed = 1.0 - (1.0 - theta).powf(f64::from(t - t_o + 1));
            mass_err = mass_err.max((mass - closed).abs());
        }
    }
    (kernel_err, mass_err)
}

fn single_step(t: Timestep) -> RepresentationConfig {
    RepresentationConfig::uniform(GranularitySpec::Timestep(t))
}

/// Largest posterior deviation between the fitted RBC and the naive Bayes
/// oracle over every timestep of `raw`, with the number of timesteps
/// compared. Timesteps both sides reject as degenerate are skipped; panics
/// if only one side rejects.
pub fn rbc_error(raw: &RawGraph) -> (f64, usize) {
    let g = raw.build();
    let params = RbcParams::default();
    let (mut err, mut compared) = (0.0f64, 0);
    for t in 1..=raw.t_max {
        let s = build_summary(&g, &single_step(t), t).unwrap();
        let model = rbc_fit(&s, &g, &params);
        let Some(nb) = raw.naive_bayes(t, params.alpha, params.bins) else {
            assert!(model.is_err(), "library fitted a model the oracle rejects");
            continue;
        };
        let model = model.unwrap();
        compared += 1;
        for (a, b) in model.prior.iter().zip(&nb.prior) {
            err = err.max((a - b).abs());
        }
        for v in 0..raw.n() {
            let p = rbc_predict(&model, &s, NodeId(v as u32)).unwrap().probs();
            for (a, b) in p.iter().zip(&nb.posteriors[v]) {
                err = err.max((a - b).abs());
            }
        }
    }
    (err, compared)
}

/// Largest deviation between library aggregates and the oracle for every
/// applicable (source, attribute, aggregator) at every timestep.
pub fn aggregate_error(raw: &RawGraph) -> f64 {
    let g = raw.build();
    let mut err = 0.0f64;
    for t in 1..=raw.t_max {
        let ctx = FeatureContext::from_summary(build_summary(&g, &single_step(t), t).unwrap());
        let mut specs: Vec<(String, (String, bool, String))> = vec![("relational::DEGREE".into(), (String::new(), true, "DEGREE".into()))];
        for attr in raw.attr_names() {
            let numeric = raw.attrs.iter().any(|a| a.name == attr && a.numeric);
            let mut aggs = vec!["COUNT".to_string()];
            if numeric {
                aggs.push("AVERAGE".into());
                aggs.push("MODE".into());
            } else {
                aggs.push("MODE".into());
                let values: Vec<String> = if attr == LABEL {
                    raw.classes()
                } else {
                    let a = raw.attrs.iter().find(|a| a.name == attr).unwrap();
                    let mut v: Vec<String> = a.values.values().cloned().collect();
                    v.sort();
                    v.dedup();
                    v
                };
                for x in values.iter().chain(std::iter::once(&"absent".to_string())) {
                    aggs.push(format!("PROPORTION({x})"));
                    aggs.push(format!("EXISTS({x})"));
                }
            }
            for source in ["intrinsic", "relational"] {
                // feature selection never offers a node its own static label
                if source == "intrinsic" && attr == LABEL && raw.is_static() {
                    continue;
                }
                for agg in &aggs {
                    specs.push((format!("{source}:{attr}:{agg}"), (attr.clone(), source == "relational", agg.clone())));
                }
            }
        }
        let parsed: Vec<FeatureSpec> = specs.iter().map(|(s, _)| s.parse().unwrap()).collect();
        for v in 0..raw.n() {
            let fv = rpt_features(&ctx, NodeId(v as u32), &parsed).unwrap();
            for (i, (_, (attr, relational, agg))) in specs.iter().enumerate() {
                let inner = |p: &str| agg.strip_prefix(p).and_then(|r| r.strip_suffix(')')).map(str::to_string);
                let (prop, exists) = (inner("PROPORTION("), inner("EXISTS("));
                let oagg = match agg.as_str() {
                    "DEGREE" => OracleAgg::Degree,
                    "COUNT" => OracleAgg::Count,
                    "AVERAGE" => OracleAgg::Average,
                    "MODE" => OracleAgg::Mode,
                    _ if prop.is_some() => OracleAgg::Proportion(prop.as_deref().unwrap()),
                    _ => OracleAgg::Exists(exists.as_deref().unwrap()),
                };
                let (want, missing) = raw.aggregate(attr, v, t, *relational, oagg);
                assert_eq!(fv.missing[i], missing, "missing flag of {} at node {v}, t={t}", specs[i].0);
                err = err.max((fv.values[i] - want).abs());
            }
        }
    }
    err
}

/// Largest AUC deviation from the all-pairs oracle over `n` random
/// instances, and whether `auc(y) + auc(!y) == 1` held exactly throughout.
pub fn auc_errors(n: usize, seed: u64) -> (f64, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut err, mut complement) = (0.0f64, true);
    let mut done = 0;
    while done < n {
        let len = rng.gen_range(2..80);
        let levels = rng.gen_range(2..20);
        let scores: Vec<f64> = (0..len).map(|_| f64::from(rng.gen_range(0..levels)) / f64::from(levels) + rng.gen_range(0..2) as f64 * 1e-3).collect();
        let pos: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.4)).collect();
        if pos.iter().all(|&p| p) || pos.iter().all(|&p| !p) {
            continue;
        }
        let flipped: Vec<bool> = pos.iter().map(|p| !p).collect();
        let a = auc(&scores, &pos).unwrap();
        err = err.max((a - auc_oracle(&scores, &pos)).abs());
        complement &= a + auc(&scores, &flipped).unwrap() == 1.0;
        done += 1;
    }
    (err, complement)
}
