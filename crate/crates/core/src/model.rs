//! Types shared by the weighted classifiers: class posteriors, training
//! sets and attribute selections.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{ClassId, NodeId, TaskKind, TemporalGraph};
use crate::representation::{SummaryData, LABEL_ATTR};

/// Whether a feature reads the node's own attributes or its neighbors'.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Intrinsic,
    Relational,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Intrinsic => write!(f, "intrinsic"),
            Source::Relational => write!(f, "relational"),
        }
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// A normalized class distribution, stored in log space so that scores
/// stay rankable when probabilities saturate.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    log_probs: Vec<f64>,
}

impl Posterior {
    pub fn from_log_weights(mut log_w: Vec<f64>) -> Self {
        let z = log_sum_exp(log_w.iter().copied());
        if z.is_finite() {
            for x in &mut log_w {
                *x -= z;
            }
        } else {
            let u = -(log_w.len() as f64).ln();
            log_w.iter_mut().for_each(|x| *x = u);
        }
        Posterior { log_probs: log_w }
    }

    pub fn from_probs(p: &[f64]) -> Self {
        Self::from_log_weights(p.iter().map(|x| x.ln()).collect())
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn prob(&self, c: ClassId) -> f64 {
        self.log_probs[c].exp()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|x| x.exp()).collect()
    }

    pub fn log_prob(&self, c: ClassId) -> f64 {
        self.log_probs[c]
    }

    /// Most probable class; ties go to the lowest class id.
    pub fn argmax(&self) -> ClassId {
        let mut best = 0;
        for (c, &lp) in self.log_probs.iter().enumerate() {
            if lp > self.log_probs[best] {
                best = c;
            }
        }
        best
    }

    /// `log p(c) - log(1 - p(c))`, a ranking score monotone in `p(c)`.
    pub fn log_odds(&self, c: ClassId) -> f64 {
        let rest = log_sum_exp(
            self.log_probs
                .iter()
                .enumerate()
                .filter(move |&(k, _)| k != c)
                .map(|(_, &x)| x),
        );
        self.log_probs[c] - rest
    }

    /// Weighted arithmetic mean of member posteriors.
    pub fn mixture(members: &[(f64, &Posterior)]) -> Posterior {
        let k = members.first().map(|(_, p)| p.len()).unwrap_or(0);
        let log_w: Vec<f64> = (0..k)
            .map(|c| {
                log_sum_exp(
                    members
                        .iter()
                        .filter(|(w, _)| *w > 0.0)
                        .map(move |(w, p)| w.ln() + p.log_probs[c]),
                )
            })
            .collect();
        Posterior::from_log_weights(log_w)
    }
}

/// Labeled nodes with their training weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub classes: Vec<String>,
    pub examples: Vec<(NodeId, ClassId, f64)>,
}

impl TrainingSet {
    /// Nodes labeled at the summary time that carry positive node weight.
    pub fn at(g: &TemporalGraph, s: &SummaryData) -> Self {
        let examples = g
            .nodes()
            .filter_map(|v| {
                let w = s.node_weight(v);
                match g.label_at(v, s.t) {
                    Some(c) if w > 0.0 => Some((v, c, w)),
                    _ => None,
                }
            })
            .collect();
        TrainingSet {
            classes: g.classes().to_vec(),
            examples,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        self.examples.iter().map(|e| e.0).collect()
    }

    pub fn label_map(&self) -> BTreeMap<NodeId, ClassId> {
        self.examples.iter().map(|&(v, c, _)| (v, c)).collect()
    }

    pub fn class_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.classes.len()];
        for &(_, c, x) in &self.examples {
            w[c] += x;
        }
        w
    }

    pub fn filter(&self, keep: impl Fn(NodeId) -> bool) -> Self {
        TrainingSet {
            classes: self.classes.clone(),
            examples: self
                .examples
                .iter()
                .copied()
                .filter(|e| keep(e.0))
                .collect(),
        }
    }

    /// Replaces labels for the nodes present in `labels`.
    pub fn relabel(&self, labels: &BTreeMap<NodeId, ClassId>) -> Self {
        TrainingSet {
            classes: self.classes.clone(),
            examples: self
                .examples
                .iter()
                .map(|&(v, c, w)| (v, labels.get(&v).copied().unwrap_or(c), w))
                .collect(),
        }
    }

    /// Checks for positive total weight and at least two classes.
    pub fn check_trainable(&self) -> Result<()> {
        let w = self.class_weights();
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyTraining(
                "no labeled node with positive weight".into(),
            ));
        }
        if w.iter().filter(|&&x| x > 0.0).count() < 2 {
            return Err(Error::DegenerateModel(
                "training data contains a single class".into(),
            ));
        }
        Ok(())
    }
}

/// Which attributes a classifier reads. `None` selects every attribute.
/// Previously observed labels are exposed as [`LABEL_ATTR`]; they are
/// never an intrinsic feature on static tasks, where they would reveal
/// the target.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSelection {
    pub intrinsic: Option<Vec<String>>,
    pub relational: Option<Vec<String>>,
    pub use_labels: bool,
}

impl Default for FeatureSelection {
    fn default() -> Self {
        FeatureSelection {
            intrinsic: None,
            relational: None,
            use_labels: true,
        }
    }
}

impl FeatureSelection {
    pub fn none() -> Self {
        FeatureSelection {
            intrinsic: Some(Vec::new()),
            relational: Some(Vec::new()),
            use_labels: false,
        }
    }

    pub fn intrinsic_only(attrs: &[&str]) -> Self {
        FeatureSelection {
            intrinsic: Some(attrs.iter().map(|s| s.to_string()).collect()),
            relational: Some(Vec::new()),
            use_labels: false,
        }
    }

    /// Summary attribute indices for the intrinsic and relational sides.
    pub fn resolve(&self, s: &SummaryData) -> Result<(Vec<usize>, Vec<usize>)> {
        let pick = |names: &Option<Vec<String>>, intrinsic: bool| -> Result<Vec<usize>> {
            let allow_label = self.use_labels && !(intrinsic && s.task == TaskKind::Static);
            match names {
                None => Ok(s
                    .attrs()
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| !a.is_label || allow_label)
                    .map(|(i, _)| i)
                    .collect()),
                Some(list) => {
                    let mut out = Vec::new();
                    for name in list {
                        let idx = s.attr_index(name).ok_or_else(|| {
                            Error::Config(format!("unknown attribute `{name}` in feature selection"))
                        })?;
                        if name == LABEL_ATTR && !allow_label {
                            continue;
                        }
                        out.push(idx);
                    }
                    if allow_label && !list.iter().any(|n| n == LABEL_ATTR) {
                        if let Some(l) = s.label_attr() {
                            out.push(l);
                        }
                    }
                    out.sort_unstable();
                    out.dedup();
                    Ok(out)
                }
            }
        };
        Ok((pick(&self.intrinsic, true)?, pick(&self.relational, false)?))
    }
}
