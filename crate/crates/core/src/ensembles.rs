//! Temporal ensembles.
//!
//! Members differ by a transform of the temporal dimension: sampled link
//! structure, resampled kernels or randomized attribute slices, values
//! shuffled across time, labels substituted by earlier predictions, or the
//! base learner itself. Member posteriors are combined by a weighted mean.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;

use log::warn;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;

use crate::classifier::{ClassifierSpec, FittedModel, ModelSpec};
use crate::error::{Error, Result};
use crate::evaluation::{posterior_auc, stratified_folds};
use crate::format::fmt_num;
use crate::graph::{ClassId, NodeId, TemporalGraph, Timestep};
use crate::model::{Posterior, TrainingSet};
use crate::representation::KernelSpec;
use crate::seeding::{derive_seed, rng};

fn check_fraction(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name}: must lie in [0, 1], got {x}")))
    }
}

/// Keeps each edge occurrence at `t` independently with probability
/// `probs[t]` (1 where absent). Node ids, attributes and labels are kept.
pub fn sample_structure(g: &TemporalGraph, probs: &BTreeMap<Timestep, f64>, seed: u64) -> TemporalGraph {
    let mut r = rng(seed, &[]);
    let mut parts = g.parts();
    parts.edges.retain(|e| {
        let p = probs.get(&e.t).copied().unwrap_or(1.0);
        // always draw, so one edge's fate does not shift the others' stream
        let u: f64 = r.gen();
        u < p
    });
    parts.into_graph()
}

/// Retention `(1 - theta)^(t - t_i)`: the exponential kernel normalized to
/// 1 at the summary time, so recent structure is favoured.
pub fn recency_probs(theta: f64, t: Timestep, t_o: Timestep) -> BTreeMap<Timestep, f64> {
    (t_o..=t)
        .map(|ti| (ti, (1.0 - theta).powi((t - ti) as i32)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseTarget {
    AttrsAcrossTime,
    LinksAcrossTime,
}

impl fmt::Display for NoiseTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseTarget::AttrsAcrossTime => write!(f, "attrs_across_time"),
            NoiseTarget::LinksAcrossTime => write!(f, "links_across_time"),
        }
    }
}

impl std::str::FromStr for NoiseTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attrs_across_time" => Ok(NoiseTarget::AttrsAcrossTime),
            "links_across_time" => Ok(NoiseTarget::LinksAcrossTime),
            other => Err(Error::Config(format!(
                "unknown noise target `{other}` (expected attrs_across_time or links_across_time)"
            ))),
        }
    }
}

fn choose_nodes(n: usize, fraction: f64, r: &mut impl Rng) -> Vec<usize> {
    let k = (fraction * n as f64).floor() as usize;
    let mut v = index::sample(r, n, k.min(n)).into_vec();
    v.sort_unstable();
    v
}

/// Shuffles, for `floor(fraction * n)` seeded nodes, either each attribute's
/// values across that node's timesteps or the timesteps of its incident
/// edge occurrences. A reassigned edge time that would precede an
/// endpoint's creation keeps the original time.
pub fn inject_temporal_noise(
    g: &TemporalGraph,
    fraction: f64,
    target: NoiseTarget,
    seed: u64,
) -> Result<TemporalGraph> {
    check_fraction("temporal_noise.fraction", fraction)?;
    let mut r = rng(seed, &[]);
    let selected = choose_nodes(g.node_count(), fraction, &mut r);
    let mut parts = g.parts();
    match target {
        NoiseTarget::AttrsAcrossTime => {
            for attr in &mut parts.attrs {
                for &v in &selected {
                    let v = NodeId(v as u32);
                    let keys: Vec<(NodeId, Timestep)> = attr
                        .values
                        .range((v, Timestep::MIN)..=(v, Timestep::MAX))
                        .map(|(k, _)| *k)
                        .collect();
                    let mut vals: Vec<_> = keys.iter().map(|k| attr.values[k]).collect();
                    vals.shuffle(&mut r);
                    for (k, x) in keys.into_iter().zip(vals) {
                        attr.values.insert(k, x);
                    }
                }
            }
        }
        NoiseTarget::LinksAcrossTime => {
            let mut touched = vec![false; parts.edges.len()];
            for &v in &selected {
                let ids: Vec<usize> = g
                    .incident_edges(NodeId(v as u32))
                    .iter()
                    .copied()
                    .filter(|&e| !touched[e])
                    .collect();
                let mut times: Vec<Timestep> = ids.iter().map(|&e| parts.edges[e].t).collect();
                times.shuffle(&mut r);
                for (&e, t_new) in ids.iter().zip(times) {
                    touched[e] = true;
                    let edge = &parts.edges[e];
                    let ok = [edge.src, edge.dst]
                        .iter()
                        .all(|u| g.creation_time(*u).map_or(true, |c| c <= t_new));
                    if ok {
                        parts.edges[e].t = t_new;
                    }
                }
            }
        }
    }
    Ok(parts.into_graph())
}

/// Moves `node`'s value of `attr` at each key of `mapping` to the mapped
/// timestep. The mapping must be a permutation of timesteps carrying values.
pub fn permute_attribute_timesteps(
    g: &TemporalGraph,
    node: NodeId,
    attr: &str,
    mapping: &BTreeMap<Timestep, Timestep>,
) -> Result<TemporalGraph> {
    let a = g
        .attribute_index(attr)
        .ok_or_else(|| Error::Config(format!("unknown attribute `{attr}`")))?;
    let mut parts = g.parts();
    let values = &mut parts.attrs[a].values;
    let mut moved = Vec::new();
    for (&from, &to) in mapping {
        let x = values.get(&(node, from)).copied().ok_or_else(|| {
            Error::Contract(format!("node has no `{attr}` value at t={from}"))
        })?;
        moved.push((to, x));
    }
    let mut targets: Vec<_> = mapping.values().copied().collect();
    targets.sort_unstable();
    if targets != mapping.keys().copied().collect::<Vec<_>>() {
        return Err(Error::Contract("timestep mapping is not a permutation".into()));
    }
    for (to, x) in moved {
        values.insert((node, to), x);
    }
    Ok(parts.into_graph())
}

/// Permutes the values of `attr` among the nodes carrying it at `t`,
/// preserving that timestep's value distribution.
pub fn randomize_attribute_slice(g: &TemporalGraph, attr: &str, t: Timestep, seed: u64) -> Result<TemporalGraph> {
    let a = g
        .attribute_index(attr)
        .ok_or_else(|| Error::Config(format!("unknown attribute `{attr}`")))?;
    let mut r = rng(seed, &[]);
    let mut parts = g.parts();
    let values = &mut parts.attrs[a].values;
    let keys: Vec<(NodeId, Timestep)> = values.keys().filter(|k| k.1 == t).copied().collect();
    let mut vals: Vec<_> = keys.iter().map(|k| values[k]).collect();
    vals.shuffle(&mut r);
    for (k, x) in keys.into_iter().zip(vals) {
        values.insert(k, x);
    }
    Ok(parts.into_graph())
}

/// Replaces the training label of `floor(fraction * n)` seeded nodes by the
/// previous model's prediction.
pub fn permute_prior_labels(
    true_labels: &BTreeMap<NodeId, ClassId>,
    predicted: &BTreeMap<NodeId, ClassId>,
    fraction: f64,
    seed: u64,
) -> Result<BTreeMap<NodeId, ClassId>> {
    check_fraction("label_permutation.fraction", fraction)?;
    if !true_labels.keys().eq(predicted.keys()) {
        return Err(Error::Contract(
            "true and predicted label maps cover different nodes".into(),
        ));
    }
    let nodes: Vec<NodeId> = true_labels.keys().copied().collect();
    let mut r = rng(seed, &[]);
    let mut out = true_labels.clone();
    for i in choose_nodes(nodes.len(), fraction, &mut r) {
        out.insert(nodes[i], predicted[&nodes[i]]);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureTransform {
    /// Each member permutes one randomly chosen `(attr, timestep)` slice
    /// within its timestep; `attrs = None` means every attribute.
    LocalizedRandomization {
        timesteps: Vec<Timestep>,
        attrs: Option<Vec<String>>,
    },
    /// Each member draws its link and attribute kernel from the grid.
    KernelResample { grid: Vec<KernelSpec> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeaturePerturbation {
    None,
    Kernel(KernelSpec),
    Randomize { attr: String, t: Timestep },
}

/// One seeded perturbation per member.
pub fn perturb_features(
    mode: &FeatureTransform,
    size: usize,
    g: &TemporalGraph,
    seed: u64,
) -> Result<Vec<FeaturePerturbation>> {
    let mut r = rng(seed, &[0x7065_7274]);
    match mode {
        FeatureTransform::KernelResample { grid } => {
            if grid.is_empty() {
                return Err(Error::Config("feature_transform.grid: empty kernel grid".into()));
            }
            grid.iter().try_for_each(|k| k.validate())?;
            Ok((0..size)
                .map(|_| FeaturePerturbation::Kernel(grid[r.gen_range(0..grid.len())]))
                .collect())
        }
        FeatureTransform::LocalizedRandomization { timesteps, attrs } => {
            let names: Vec<String> = match attrs {
                Some(a) => {
                    for name in a {
                        if g.attribute_index(name).is_none() {
                            return Err(Error::Config(format!(
                                "feature_transform.attrs: unknown attribute `{name}`"
                            )));
                        }
                    }
                    a.clone()
                }
                None => g.attributes().iter().map(|a| a.name.clone()).collect(),
            };
            let slices: Vec<(String, Timestep)> = names
                .iter()
                .flat_map(|a| timesteps.iter().map(move |&t| (a.clone(), t)))
                .collect();
            if slices.is_empty() {
                return Ok(vec![FeaturePerturbation::None; size]);
            }
            Ok((0..size)
                .map(|_| {
                    let (attr, t) = slices[r.gen_range(0..slices.len())].clone();
                    FeaturePerturbation::Randomize { attr, t }
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingProbs {
    /// `(1 - theta)^(t - t_i)` relative to each summary time `t`.
    Recency { theta: f64 },
    /// Per-timestep retention; timesteps not listed keep everything.
    Fixed(BTreeMap<Timestep, f64>),
}

impl SamplingProbs {
    fn at(&self, t: Timestep, t_o: Timestep) -> BTreeMap<Timestep, f64> {
        match self {
            SamplingProbs::Recency { theta } => recency_probs(*theta, t, t_o),
            SamplingProbs::Fixed(m) => m.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SamplingProbs::Recency { theta } => {
                if *theta >= 0.0 && *theta < 1.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "structure_sampling.theta: must lie in [0, 1), got {theta}"
                    )))
                }
            }
            SamplingProbs::Fixed(m) => m
                .values()
                .try_for_each(|&p| check_fraction("structure_sampling.probs", p)),
        }
    }
}

impl fmt::Display for SamplingProbs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingProbs::Recency { theta } => write!(f, "recency({})", fmt_num(*theta)),
            SamplingProbs::Fixed(m) => {
                let items: Vec<String> = m.iter().map(|(t, p)| format!("{t}:{}", fmt_num(*p))).collect();
                write!(f, "fixed({})", items.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleMethod {
    /// Replicates of the base model; a reference point.
    Replicate,
    StructureSampling { probs: SamplingProbs },
    FeatureTransform(FeatureTransform),
    TemporalNoise { fraction: f64, target: NoiseTarget },
    LabelPermutation { fraction: f64 },
    AlgorithmMix { pool: Vec<ClassifierSpec> },
}

impl EnsembleMethod {
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleMethod::Replicate => "replicate",
            EnsembleMethod::StructureSampling { .. } => "structure_sampling",
            EnsembleMethod::FeatureTransform(_) => "feature_transform",
            EnsembleMethod::TemporalNoise { .. } => "temporal_noise",
            EnsembleMethod::LabelPermutation { .. } => "label_permutation",
            EnsembleMethod::AlgorithmMix { .. } => "algorithm_mix",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MemberWeighting {
    #[default]
    Uniform,
    /// Proportional to AUC on a stratified 25% holdout of the training nodes.
    CrossValidated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub size: usize,
    pub method: EnsembleMethod,
    pub base: ModelSpec,
    pub weighting: MemberWeighting,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(size: usize, method: EnsembleMethod, base: ModelSpec, seed: u64) -> Self {
        EnsembleSpec {
            size,
            method,
            base,
            weighting: MemberWeighting::Uniform,
            seed,
        }
    }

    pub fn validate(&self, g: &TemporalGraph) -> Result<()> {
        if self.size < 1 {
            return Err(Error::Config("ensemble.size: must be at least 1".into()));
        }
        self.base.validate(g)?;
        match &self.method {
            EnsembleMethod::Replicate => Ok(()),
            EnsembleMethod::StructureSampling { probs } => probs.validate(),
            EnsembleMethod::FeatureTransform(mode) => perturb_features(mode, 0, g, 0).map(|_| ()),
            EnsembleMethod::TemporalNoise { fraction, .. } => check_fraction("ensemble.fraction", *fraction),
            EnsembleMethod::LabelPermutation { fraction } => check_fraction("ensemble.fraction", *fraction),
            EnsembleMethod::AlgorithmMix { pool } => {
                if pool.is_empty() {
                    Err(Error::Config("ensemble.pool: empty algorithm pool".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn plans(&self, g: &TemporalGraph) -> Result<Vec<MemberPlan>> {
        let mut plans: Vec<MemberPlan> = (0..self.size)
            .map(|m| MemberPlan {
                index: m,
                seed: derive_seed(self.seed, &[m as u64]),
                spec: self.base.clone(),
                train_view: ViewKind::Identity,
                predict_view: ViewKind::Identity,
                label_fraction: None,
            })
            .collect();
        match &self.method {
            EnsembleMethod::Replicate => {}
            EnsembleMethod::StructureSampling { probs } => {
                for p in &mut plans {
                    p.train_view = ViewKind::Sample(probs.clone());
                    p.predict_view = ViewKind::Sample(probs.clone());
                }
            }
            EnsembleMethod::FeatureTransform(mode) => {
                let perturbations = perturb_features(mode, self.size, g, self.seed)?;
                for (p, x) in plans.iter_mut().zip(perturbations) {
                    match x {
                        FeaturePerturbation::None => {}
                        FeaturePerturbation::Kernel(k) => {
                            p.spec.representation = p.spec.representation.with_kernel(k);
                        }
                        FeaturePerturbation::Randomize { attr, t } => {
                            p.train_view = ViewKind::Randomize(attr, t);
                        }
                    }
                }
            }
            EnsembleMethod::TemporalNoise { fraction, target } => {
                for p in &mut plans {
                    p.train_view = ViewKind::Noise(*fraction, *target);
                }
            }
            EnsembleMethod::LabelPermutation { fraction } => {
                for p in &mut plans {
                    p.label_fraction = Some(*fraction);
                }
            }
            EnsembleMethod::AlgorithmMix { pool } => {
                let mut r = rng(self.seed, &[0x6d69_78]);
                let mut order: Vec<usize> = Vec::new();
                while order.len() < self.size {
                    let mut block: Vec<usize> = (0..pool.len()).collect();
                    block.shuffle(&mut r);
                    order.extend(block);
                }
                for (p, i) in plans.iter_mut().zip(order) {
                    p.spec.classifier = pool[i].clone();
                }
            }
        }
        Ok(plans)
    }
}

/// A member's view of the graph at one summary time.
#[derive(Debug, Clone, PartialEq)]
enum ViewKind {
    Identity,
    Sample(SamplingProbs),
    Noise(f64, NoiseTarget),
    Randomize(String, Timestep),
}

impl ViewKind {
    fn apply<'g>(&self, g: &'g TemporalGraph, t: Timestep, seed: u64) -> Result<Cow<'g, TemporalGraph>> {
        let seed = derive_seed(seed, &[u64::from(t)]);
        Ok(match self {
            ViewKind::Identity => Cow::Borrowed(g),
            ViewKind::Sample(p) => Cow::Owned(sample_structure(g, &p.at(t, g.t_min()), seed)),
            ViewKind::Noise(f, target) => Cow::Owned(inject_temporal_noise(g, *f, *target, seed)?),
            ViewKind::Randomize(attr, ts) => Cow::Owned(randomize_attribute_slice(g, attr, *ts, seed)?),
        })
    }

    fn describe(&self) -> String {
        match self {
            ViewKind::Identity => "identity".into(),
            ViewKind::Sample(p) => format!("sample {p}"),
            ViewKind::Noise(f, target) => format!("noise {target} {}", fmt_num(*f)),
            ViewKind::Randomize(attr, t) => format!("randomize {attr}@{t}"),
        }
    }
}

#[derive(Debug, Clone)]
struct MemberPlan {
    index: usize,
    seed: u64,
    spec: ModelSpec,
    train_view: ViewKind,
    predict_view: ViewKind,
    label_fraction: Option<f64>,
}

const TRAIN: u64 = 1;
const PREDICT: u64 = 2;
const HOLDOUT: u64 = 3;
const LABELS: u64 = 4;

#[derive(Debug, Clone)]
pub struct Member {
    pub index: usize,
    pub spec: ModelSpec,
    pub model: FittedModel,
    pub weight: f64,
    seed: u64,
    train_view: ViewKind,
    predict_view: ViewKind,
}

/// Fitted members with normalized weights.
#[derive(Debug, Clone)]
pub struct EnsembleModel {
    pub t: Timestep,
    pub method: &'static str,
    pub members: Vec<Member>,
}

fn member_training(plan: &MemberPlan, g: &TemporalGraph, ctx: &crate::rpt::FeatureContext, t: Timestep) -> Result<TrainingSet> {
    let train = TrainingSet::at(g, ctx.base());
    let Some(fraction) = plan.label_fraction else {
        return Ok(train);
    };
    if t <= g.t_min() {
        return Ok(train);
    }
    let prior = match plan.spec.fit_at(g, t - 1) {
        Ok(m) => m,
        Err(Error::DegenerateModel(_) | Error::EmptyTraining(_)) => return Ok(train),
        Err(e) => return Err(e),
    };
    let truth = train.label_map();
    let mut predicted = BTreeMap::new();
    for &v in truth.keys() {
        predicted.insert(v, prior.predict(ctx, v)?.argmax());
    }
    let labels = permute_prior_labels(&truth, &predicted, fraction, derive_seed(plan.seed, &[LABELS, u64::from(t)]))?;
    Ok(train.relabel(&labels))
}

fn holdout_weight(plan: &MemberPlan, ctx: &crate::rpt::FeatureContext, train: &TrainingSet, t: Timestep) -> Result<f64> {
    let folds = stratified_folds(train, 4, derive_seed(plan.seed, &[HOLDOUT, u64::from(t)]));
    let held: std::collections::BTreeSet<NodeId> = folds[0].iter().copied().collect();
    let fit_part = train.filter(|v| !held.contains(&v));
    let model = plan.spec.fit(ctx, &fit_part)?;
    let mut posts = Vec::new();
    let mut labels = Vec::new();
    for &(v, c, _) in train.examples.iter().filter(|e| held.contains(&e.0)) {
        posts.push(model.predict(ctx, v)?);
        labels.push(c);
    }
    Ok(posterior_auc(&posts, &labels, train.classes.len()).unwrap_or(0.5))
}

/// Trains every member at summary time `t`. Members whose training data is
/// degenerate are dropped.
pub fn ensemble_fit(g: &TemporalGraph, spec: &EnsembleSpec, t: Timestep) -> Result<EnsembleModel> {
    spec.validate(g)?;
    let plans = spec.plans(g)?;
    let fitted: Vec<Result<Option<Member>>> = plans
        .par_iter()
        .map(|plan| {
            let view = plan.train_view.apply(g, t, derive_seed(plan.seed, &[TRAIN]))?;
            let ctx = plan.spec.context(&view, t)?;
            let train = member_training(plan, &view, &ctx, t)?;
            let result = plan.spec.fit(&ctx, &train).and_then(|model| {
                let weight = match spec.weighting {
                    MemberWeighting::Uniform => 1.0,
                    MemberWeighting::CrossValidated => holdout_weight(plan, &ctx, &train, t)?,
                };
                Ok((model, weight))
            });
            match result {
                Ok((model, weight)) => Ok(Some(Member {
                    index: plan.index,
                    spec: plan.spec.clone(),
                    model,
                    weight,
                    seed: plan.seed,
                    train_view: plan.train_view.clone(),
                    predict_view: plan.predict_view.clone(),
                })),
                Err(Error::DegenerateModel(m) | Error::EmptyTraining(m)) => {
                    warn!("ensemble member {} dropped at t={t}: {m}", plan.index);
                    Ok(None)
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut members = Vec::new();
    for f in fitted {
        if let Some(m) = f? {
            members.push(m);
        }
    }
    if members.is_empty() {
        return Err(Error::DegenerateModel(format!(
            "every ensemble member failed to train at t={t}"
        )));
    }
    let total: f64 = members.iter().map(|m| m.weight).sum();
    if total > 0.0 {
        members.iter_mut().for_each(|m| m.weight /= total);
    } else {
        let w = 1.0 / members.len() as f64;
        members.iter_mut().for_each(|m| m.weight = w);
    }
    Ok(EnsembleModel {
        t,
        method: spec.method.name(),
        members,
    })
}

/// Weighted mean of member posteriors.
pub fn ensemble_predict(members: &[(f64, Posterior)]) -> Posterior {
    let refs: Vec<(f64, &Posterior)> = members.iter().map(|(w, p)| (*w, p)).collect();
    Posterior::mixture(&refs)
}

impl EnsembleModel {
    /// Posteriors for `nodes` at prediction time `t`; each member reads its
    /// own view of `g`.
    pub fn predict(&self, g: &TemporalGraph, t: Timestep, nodes: &[NodeId]) -> Result<Vec<Posterior>> {
        let per_member: Vec<Vec<Posterior>> = self
            .members
            .par_iter()
            .map(|m| {
                let view = m.predict_view.apply(g, t, derive_seed(m.seed, &[PREDICT]))?;
                let ctx = m.spec.context(&view, t)?;
                nodes.iter().map(|&v| m.model.predict(&ctx, v)).collect()
            })
            .collect::<Result<_>>()?;
        Ok((0..nodes.len())
            .map(|i| {
                let items: Vec<(f64, &Posterior)> = self
                    .members
                    .iter()
                    .zip(&per_member)
                    .map(|(m, posts)| (m.weight, &posts[i]))
                    .collect();
                Posterior::mixture(&items)
            })
            .collect())
    }

    /// Line-oriented text form of every member.
    pub fn to_text(&self) -> String {
        let mut out = format!("ensemble v1\nmethod\t{}\nt\t{}\nmembers\t{}\n", self.method, self.t, self.members.len());
        for m in &self.members {
            out += &format!(
                "member\t{}\tweight={}\ttrain={}\tpredict={}\t{}\n",
                m.index,
                fmt_num(m.weight),
                m.train_view.describe(),
                m.predict_view.describe(),
                m.spec
            );
            out += &m.model.to_text();
            out += "end\n";
        }
        out
    }
}
