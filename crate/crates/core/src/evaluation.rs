//! The temporal evaluation protocol and its statistics.
//!
//! For every timestep `t` a method is trained on the summary at `t` and
//! scored on the nodes labeled at `t + 1`, using the summary at `t + 1`.
//! Scores are ranked by AUC; binary tasks use the first class in sorted
//! order as the positive class, wider tasks average one-vs-rest AUCs.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::classifier::ModelSpec;
use crate::ensembles::{ensemble_fit, randomize_attribute_slice, EnsembleSpec};
use crate::error::{Error, Result};
use crate::format::fmt_num;
use crate::graph::{ClassId, NodeId, TemporalGraph, Timestep};
use crate::model::{Posterior, TrainingSet};
use crate::seeding::{derive_seed, rng};

/// Mann-Whitney AUC: the fraction of (positive, negative) pairs ranked
/// correctly, ties counting one half.
pub fn auc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    if scores.len() != positive.len() {
        return Err(Error::Contract(format!(
            "{} scores for {} labels",
            scores.len(),
            positive.len()
        )));
    }
    let n_pos = positive.iter().filter(|&&p| p).count() as u64;
    let n_neg = positive.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Undefined("AUC needs both classes".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // doubled mid-ranks keep the rank sum integral
    let mut twice_rank_sum: u64 = 0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let twice_rank = (i + 1 + j + 1) as u64;
        for &k in &idx[i..=j] {
            if positive[k] {
                twice_rank_sum += twice_rank;
            }
        }
        i = j + 1;
    }
    let twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    let twice_pairs = 2 * n_pos * n_neg;
    // computing the smaller side directly makes auc(s, y) + auc(s, !y) == 1
    Ok(if 2 * twice_u > twice_pairs {
        1.0 - (twice_pairs - twice_u) as f64 / twice_pairs as f64
    } else {
        twice_u as f64 / twice_pairs as f64
    })
}

/// AUC of posteriors against true classes: the positive-class log-odds for
/// two classes, the mean defined one-vs-rest AUC otherwise.
pub fn posterior_auc(posts: &[Posterior], labels: &[ClassId], n_classes: usize) -> Result<f64> {
    let one_vs_rest = |c: ClassId| {
        let scores: Vec<f64> = posts.iter().map(|p| p.log_odds(c)).collect();
        let pos: Vec<bool> = labels.iter().map(|&y| y == c).collect();
        auc(&scores, &pos)
    };
    if n_classes <= 2 {
        return one_vs_rest(0);
    }
    let defined: Vec<f64> = (0..n_classes).filter_map(|c| one_vs_rest(c).ok()).collect();
    if defined.is_empty() {
        return Err(Error::Undefined("AUC needs at least two classes".into()));
    }
    Ok(defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Nodes labeled at `t` that exist by `t`, with their classes.
pub fn labeled_nodes(g: &TemporalGraph, t: Timestep) -> Vec<(NodeId, ClassId)> {
    g.nodes()
        .filter(|&v| g.first_seen(v).is_some_and(|s| s <= t))
        .filter_map(|v| g.label_at(v, t).map(|c| (v, c)))
        .collect()
}

/// Seeded stratified split of the training nodes into `k` folds.
pub fn stratified_folds(train: &TrainingSet, k: usize, seed: u64) -> Vec<Vec<NodeId>> {
    let mut r = rng(seed, &[0x666f_6c64]);
    let mut by_class: BTreeMap<ClassId, Vec<NodeId>> = BTreeMap::new();
    for &(v, c, _) in &train.examples {
        by_class.entry(c).or_default().push(v);
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for nodes in by_class.values_mut() {
        nodes.shuffle(&mut r);
        for &v in nodes.iter() {
            folds[next % k].push(v);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort();
    }
    folds
}

/// Something that can be trained at one time and scored at a later one.
pub trait TemporalMethod: Sync {
    fn fit_predict(
        &self,
        g: &TemporalGraph,
        t_train: Timestep,
        t_pred: Timestep,
        nodes: &[NodeId],
    ) -> Result<Vec<Posterior>>;

    fn name(&self) -> String;
}

impl TemporalMethod for ModelSpec {
    fn fit_predict(
        &self,
        g: &TemporalGraph,
        t_train: Timestep,
        t_pred: Timestep,
        nodes: &[NodeId],
    ) -> Result<Vec<Posterior>> {
        let model = self.fit_at(g, t_train)?;
        let ctx = self.context(g, t_pred)?;
        let unweighted = nodes.iter().filter(|&&v| ctx.base().node_weight(v) <= 0.0).count();
        if unweighted > 0 {
            warn!("{unweighted} nodes without weight at t={t_pred} are scored with the class prior");
        }
        nodes.iter().map(|&v| model.predict(&ctx, v)).collect()
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

impl TemporalMethod for EnsembleSpec {
    fn fit_predict(
        &self,
        g: &TemporalGraph,
        t_train: Timestep,
        t_pred: Timestep,
        nodes: &[NodeId],
    ) -> Result<Vec<Posterior>> {
        ensemble_fit(g, self, t_train)?.predict(g, t_pred, nodes)
    }

    fn name(&self) -> String {
        format!("ensemble {} x{} over {}", self.method.name(), self.size, self.base)
    }
}

/// Chooses among candidate specs by k-fold cross-validation at every
/// training time, then fits the winner.
#[derive(Debug, Clone)]
pub struct CvSelected {
    pub candidates: Vec<ModelSpec>,
    pub k: usize,
    pub seed: u64,
}

impl TemporalMethod for CvSelected {
    fn fit_predict(
        &self,
        g: &TemporalGraph,
        t_train: Timestep,
        t_pred: Timestep,
        nodes: &[NodeId],
    ) -> Result<Vec<Posterior>> {
        let cv = cross_validate(g, &self.candidates, self.k, t_train, self.seed)?;
        self.candidates[cv.best].fit_predict(g, t_train, t_pred, nodes)
    }

    fn name(&self) -> String {
        format!("cv({} candidates, k={})", self.candidates.len(), self.k)
    }
}

/// AUC of `method` trained at `t - 1` and scored at `t`; `None` when the
/// timestep cannot be scored.
pub fn evaluate_at(g: &TemporalGraph, method: &dyn TemporalMethod, t: Timestep) -> Result<Option<f64>> {
    if t <= g.t_min() || t > g.t_max() {
        return Err(Error::Range {
            t,
            lo: g.t_min() + 1,
            hi: g.t_max(),
        });
    }
    let test = labeled_nodes(g, t);
    let nodes: Vec<NodeId> = test.iter().map(|e| e.0).collect();
    let labels: Vec<ClassId> = test.iter().map(|e| e.1).collect();
    let posts = match method.fit_predict(g, t - 1, t, &nodes) {
        Ok(p) => p,
        Err(Error::DegenerateModel(m) | Error::EmptyTraining(m)) => {
            warn!("t={t} skipped: {m}");
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    match posterior_auc(&posts, &labels, g.classes().len()) {
        Ok(a) => Ok(Some(a)),
        Err(Error::Undefined(m)) => {
            warn!("t={t} skipped: {m}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceEntry {
    pub attr: String,
    pub t: Timestep,
    pub delta_auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub method: String,
    /// AUC keyed by prediction timestep.
    pub per_timestep_auc: BTreeMap<Timestep, f64>,
    pub skipped: Vec<Timestep>,
    pub mean_auc: f64,
    pub stability: Option<f64>,
    pub significance: Option<Vec<SignificanceEntry>>,
}

impl EvaluationReport {
    pub fn from_points(method: String, points: BTreeMap<Timestep, Option<f64>>) -> Result<Self> {
        let skipped: Vec<Timestep> = points.iter().filter(|(_, a)| a.is_none()).map(|(t, _)| *t).collect();
        let per_timestep_auc: BTreeMap<Timestep, f64> =
            points.into_iter().filter_map(|(t, a)| a.map(|a| (t, a))).collect();
        if per_timestep_auc.is_empty() {
            return Err(Error::Undefined("no timestep could be scored".into()));
        }
        let values: Vec<f64> = per_timestep_auc.values().copied().collect();
        let mean_auc = values.iter().sum::<f64>() / values.len() as f64;
        Ok(EvaluationReport {
            method,
            stability: temporal_stability(&values).ok(),
            per_timestep_auc,
            skipped,
            mean_auc,
            significance: None,
        })
    }

    /// `t,auc` rows in timestep order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,auc\n");
        for (t, a) in &self.per_timestep_auc {
            out += &format!("{t},{}\n", fmt_num(*a));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = format!("method: {}\n", self.method);
        out += &format!("timesteps scored: {}\n", self.per_timestep_auc.len());
        if !self.skipped.is_empty() {
            let s: Vec<String> = self.skipped.iter().map(|t| t.to_string()).collect();
            out += &format!("timesteps skipped: {}\n", s.join(" "));
        }
        out += &format!("mean auc: {}\n", fmt_num(self.mean_auc));
        match self.stability {
            Some(s) => out += &format!("temporal stability: {}\n", fmt_num(s)),
            None => out += "temporal stability: undefined\n",
        }
        out
    }
}

/// Runs the protocol for every prediction time `t_min + 1 ..= t_max`.
pub fn temporal_evaluate(g: &TemporalGraph, method: &dyn TemporalMethod) -> Result<EvaluationReport> {
    if g.t_max() <= g.t_min() {
        return Err(Error::Config(
            "temporal evaluation needs at least two timesteps".into(),
        ));
    }
    let ts: Vec<Timestep> = (g.t_min() + 1..=g.t_max()).collect();
    let points: Vec<(Timestep, Option<f64>)> = ts
        .par_iter()
        .map(|&t| evaluate_at(g, method, t).map(|a| (t, a)))
        .collect::<Result<_>>()?;
    EvaluationReport::from_points(method.name(), points.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best: usize,
    /// Mean validation AUC per candidate; `None` when no fold was scorable.
    pub scores: Vec<Option<f64>>,
}

/// Stratified k-fold selection among `candidates` on the nodes labeled at
/// `t`. Ties go to the earlier candidate.
pub fn cross_validate(
    g: &TemporalGraph,
    candidates: &[ModelSpec],
    k: usize,
    t: Timestep,
    seed: u64,
) -> Result<CvResult> {
    if candidates.is_empty() {
        return Err(Error::Config("cross-validation needs at least one candidate".into()));
    }
    if k < 2 {
        return Err(Error::Config(format!("cv.folds: must be at least 2, got {k}")));
    }
    g.check_range(t)?;
    let labeled = TrainingSet {
        classes: g.classes().to_vec(),
        examples: labeled_nodes(g, t).into_iter().map(|(v, c)| (v, c, 1.0)).collect(),
    };
    if labeled.len() < k {
        return Err(Error::Config(format!(
            "cross-validation needs at least {k} labeled nodes at t={t}, found {}",
            labeled.len()
        )));
    }
    let folds = stratified_folds(&labeled, k, derive_seed(seed, &[u64::from(t)]));
    let truth = labeled.label_map();
    let scores: Vec<Option<f64>> = candidates
        .par_iter()
        .map(|spec| -> Result<Option<f64>> {
            let ctx = spec.context(g, t)?;
            let all = TrainingSet::at(g, ctx.base());
            let mut aucs = Vec::new();
            for fold in &folds {
                let held: BTreeSet<NodeId> = fold.iter().copied().collect();
                let train = all.filter(|v| !held.contains(&v));
                let model = match spec.fit(&ctx, &train) {
                    Ok(m) => m,
                    Err(Error::DegenerateModel(_) | Error::EmptyTraining(_)) => continue,
                    Err(e) => return Err(e),
                };
                let posts: Vec<Posterior> = fold.iter().map(|&v| model.predict(&ctx, v)).collect::<Result<_>>()?;
                let labels: Vec<ClassId> = fold.iter().map(|v| truth[v]).collect();
                if let Ok(a) = posterior_auc(&posts, &labels, g.classes().len()) {
                    aucs.push(a);
                }
            }
            Ok((!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = s {
            if best.map_or(true, |b| *s > scores[b].unwrap()) {
                best = Some(i);
            }
        }
    }
    let best = best.ok_or_else(|| {
        Error::Undefined(format!("cross-validation at t={t}: every fold was single-class"))
    })?;
    Ok(CvResult { best, scores })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceReport {
    pub baseline_auc: f64,
    /// Sorted by descending ΔAUC, then attribute and timestep.
    pub entries: Vec<SignificanceEntry>,
    /// Attributes by descending summed ΔAUC.
    pub ranking: Vec<(String, f64)>,
}

impl SignificanceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("attr,t,delta_auc\n");
        for e in &self.entries {
            out += &format!("{},{},{}\n", e.attr, e.t, fmt_num(e.delta_auc));
        }
        out
    }

    pub fn ranking_csv(&self) -> String {
        let mut out = String::from("attr,total_delta_auc\n");
        for (a, d) in &self.ranking {
            out += &format!("{a},{}\n", fmt_num(*d));
        }
        out
    }
}

/// Drop in AUC at prediction time `t` when one attribute's values are
/// permuted among nodes within one timestep, for every attribute in `attrs`
/// and every timestep up to `t`. Each slice is permuted `repeats` times and
/// the drops averaged.
pub fn randomization_significance(
    g: &TemporalGraph,
    method: &dyn TemporalMethod,
    attrs: &[String],
    t: Timestep,
    seed: u64,
    repeats: usize,
) -> Result<SignificanceReport> {
    let baseline = evaluate_at(g, method, t)?
        .ok_or_else(|| Error::Undefined(format!("baseline AUC at t={t} is undefined")))?;
    let mut slices = Vec::new();
    for (i, attr) in attrs.iter().enumerate() {
        if g.attribute_index(attr).is_none() {
            return Err(Error::Config(format!("significance.attrs: unknown attribute `{attr}`")));
        }
        for ts in g.t_min()..=t {
            slices.push((i, attr.clone(), ts));
        }
    }
    let repeats = repeats.max(1);
    let mut entries: Vec<SignificanceEntry> = slices
        .par_iter()
        .map(|(i, attr, ts)| -> Result<SignificanceEntry> {
            let mut total = 0.0;
            for r in 0..repeats {
                let s = derive_seed(seed, &[*i as u64, u64::from(*ts), r as u64]);
                let h = randomize_attribute_slice(g, attr, *ts, s)?;
                total += baseline - evaluate_at(&h, method, t)?.unwrap_or(0.5);
            }
            Ok(SignificanceEntry {
                attr: attr.clone(),
                t: *ts,
                delta_auc: total / repeats as f64,
            })
        })
        .collect::<Result<_>>()?;
    entries.sort_by(|a, b| {
        b.delta_auc
            .total_cmp(&a.delta_auc)
            .then_with(|| a.attr.cmp(&b.attr))
            .then(a.t.cmp(&b.t))
    });
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    for e in &entries {
        *sums.entry(e.attr.clone()).or_insert(0.0) += e.delta_auc;
    }
    let mut ranking: Vec<(String, f64)> = sums.into_iter().collect();
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(SignificanceReport {
        baseline_auc: baseline,
        entries,
        ranking,
    })
}

/// Sample standard deviation of an AUC series.
pub fn temporal_stability(aucs: &[f64]) -> Result<f64> {
    if aucs.len() < 2 {
        return Err(Error::Undefined(
            "temporal stability needs at least two AUC values".into(),
        ));
    }
    let n = aucs.len() as f64;
    let mean = aucs.iter().sum::<f64>() / n;
    Ok((aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ClassifierSpec;
    use crate::graph::fixtures::toy;
    use crate::representation::{GranularitySpec, RepresentationConfig};
    use proptest::prelude::*;

    fn brute_auc(scores: &[f64], pos: &[bool]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if pos[i] && !pos[j] {
                    den += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_examples() {
        let y = [true, true, false, false];
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &y).unwrap(), 1.0);
        assert_eq!(auc(&[0.5; 4], &y).unwrap(), 0.5);
        assert_eq!(auc(&[0.9, 0.3, 0.5, 0.1], &y).unwrap(), 0.75);
        assert!(matches!(auc(&[0.1, 0.2], &[true, true]), Err(Error::Undefined(_))));
    }

    #[test]
    fn stability_examples() {
        assert!(temporal_stability(&[0.7, 0.7, 0.7]).unwrap() < 1e-12);
        assert!((temporal_stability(&[0.6, 0.8]).unwrap() - 0.1414213562373095).abs() < 1e-12);
        assert_eq!(temporal_stability(&[0.6, 0.8]).unwrap(), temporal_stability(&[0.8, 0.6]).unwrap());
        assert!(temporal_stability(&[0.6]).is_err());
    }

    fn union(c: ClassifierSpec) -> ModelSpec {
        ModelSpec::new(RepresentationConfig::uniform(GranularitySpec::Union), c)
    }

    #[test]
    fn toy_protocol_scores_two_timesteps() {
        let g = toy();
        let r = temporal_evaluate(&g, &union(ClassifierSpec::rbc())).unwrap();
        assert_eq!(r.per_timestep_auc.keys().copied().collect::<Vec<_>>(), [2, 3]);
        assert_eq!(r, temporal_evaluate(&g, &union(ClassifierSpec::rbc())).unwrap());
        let mean = r.per_timestep_auc.values().sum::<f64>() / 2.0;
        assert_eq!(r.mean_auc, mean);
        assert!(r.to_csv().starts_with("t,auc\n2,"));
    }

    #[test]
    fn cv_tie_goes_to_first() {
        let g = toy();
        let spec = union(ClassifierSpec::rbc());
        let cv = cross_validate(&g, &[spec.clone(), spec], 2, 3, 5).unwrap();
        assert_eq!(cv.best, 0);
        assert_eq!(cv.scores[0], cv.scores[1]);
        assert!(cross_validate(&g, &[union(ClassifierSpec::rbc())], 1, 3, 5).is_err());
    }

    #[test]
    fn folds_are_stratified_partitions() {
        let g = toy();
        let train = TrainingSet {
            classes: g.classes().to_vec(),
            examples: labeled_nodes(&g, 3).into_iter().map(|(v, c)| (v, c, 1.0)).collect(),
        };
        let folds = stratified_folds(&train, 2, 1);
        let mut all: Vec<NodeId> = folds.concat();
        all.sort();
        assert_eq!(all, g.nodes().collect::<Vec<_>>());
        for f in &folds {
            let classes: BTreeSet<ClassId> = f.iter().map(|v| g.label_at(*v, 3).unwrap()).collect();
            assert_eq!(classes.len(), 2);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn auc_matches_brute_force(
            data in proptest::collection::vec((0u8..6, any::<bool>()), 2..50),
        ) {
            let scores: Vec<f64> = data.iter().map(|d| f64::from(d.0) / 5.0).collect();
            let pos: Vec<bool> = data.iter().map(|d| d.1).collect();
            let flipped: Vec<bool> = pos.iter().map(|p| !p).collect();
            match auc(&scores, &pos) {
                Ok(a) => {
                    prop_assert!((a - brute_auc(&scores, &pos)).abs() < 1e-12);
                    prop_assert_eq!(a + auc(&scores, &flipped).unwrap(), 1.0);
                }
                Err(_) => prop_assert!(pos.iter().all(|&p| p) || pos.iter().all(|&p| !p)),
            }
        }
    }
}
