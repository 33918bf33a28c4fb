//! Reference implementations written against raw edge and attribute lists,
//! without going through summaries, kernels-as-code or the classifiers.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use trc_core::graph::{GraphBuilder, TemporalGraph, Timestep};

/// Closed-form kernel weight. `kind` is one of `exponential`, `linear`,
/// `inverse_linear`, `uniform`.
pub fn kernel_oracle(kind: &str, theta: f64, t_o: Timestep, t_i: Timestep, t: Timestep, as_printed: bool) -> f64 {
    let (t_o, t_i, t) = (t_o as f64, t_i as f64, t as f64);
    match (kind, as_printed) {
        ("uniform", _) => 1.0,
        ("exponential", _) => theta * (1.0 - theta).powf(t - t_i),
        ("linear", false) => theta * (t_i - t_o + 1.0) / (t - t_o + 1.0),
        ("linear", true) => theta * (t - t_i + 1.0) / (t - t_o + 1.0),
        ("inverse_linear", false) => theta / (t - t_i + 1.0),
        ("inverse_linear", true) => theta / (t_i - t_o + 1.0),
        _ => panic!("unknown kernel {kind}"),
    }
}

/// All-pairs AUC with ties counted as one half.
pub fn auc_oracle(scores: &[f64], positive: &[bool]) -> f64 {
    let mut hits = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if positive[i] && !positive[j] {
                pairs += 1.0;
                hits += if si > sj {
                    1.0
                } else if si == sj {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    hits / pairs
}

#[derive(Debug, Clone)]
pub struct RawAttr {
    pub name: String,
    pub numeric: bool,
    pub values: BTreeMap<(usize, Timestep), String>,
}

#[derive(Debug, Clone)]
pub enum RawLabels {
    Static(BTreeMap<usize, String>),
    Temporal(BTreeMap<(usize, Timestep), String>),
}

/// A dataset kept as plain lists; node `i` is named so that name order
/// equals index order.
#[derive(Debug, Clone)]
pub struct RawGraph {
    pub names: Vec<String>,
    pub t_max: Timestep,
    pub directed: bool,
    pub edges: Vec<(usize, usize, Timestep)>,
    pub attrs: Vec<RawAttr>,
    pub labels: RawLabels,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleAgg<'a> {
    Average,
    Mode,
    Count,
    Proportion(&'a str),
    Exists(&'a str),
    Degree,
}

pub const LABEL: &str = "__label__";

impl RawGraph {
    pub fn toy() -> RawGraph {
        let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let mut topic = BTreeMap::new();
        for (v, seq) in [(0, "XXX"), (1, "XYY"), (2, "YYY")] {
            for (i, ch) in seq.chars().enumerate() {
                topic.insert((v, i as Timestep + 1), ch.to_string());
            }
        }
        topic.insert((3, 2), "Y".into());
        topic.insert((3, 3), "Y".into());
        RawGraph {
            names,
            t_max: 3,
            directed: false,
            edges: vec![(0, 1, 1), (0, 2, 2), (0, 1, 3), (2, 3, 3)],
            attrs: vec![RawAttr {
                name: "topic".into(),
                numeric: false,
                values: topic,
            }],
            labels: RawLabels::Static(
                [(0, "+"), (1, "+"), (2, "-"), (3, "-")]
                    .into_iter()
                    .map(|(v, l)| (v, l.to_string()))
                    .collect(),
            ),
        }
    }

    /// Up to `max_nodes` nodes, 2-3 timesteps, up to `max_attrs` node
    /// attributes (categorical or numeric), static or temporal labels.
    pub fn random(rng: &mut impl Rng, max_nodes: usize, max_attrs: usize) -> RawGraph {
        let n = rng.gen_range(3..=max_nodes);
        let t_max = rng.gen_range(2..=3);
        let names = (0..n).map(|i| format!("v{i:02}")).collect();
        let mut edges = Vec::new();
        for t in 1..=t_max {
            for _ in 0..rng.gen_range(1..=2 * n) {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                edges.push((a, b, t));
            }
        }
        let mut attrs = Vec::new();
        for k in 0..rng.gen_range(0..=max_attrs) {
            let numeric = rng.gen_bool(0.3);
            let domain = rng.gen_range(2..=3);
            let mut values = BTreeMap::new();
            for v in 0..n {
                for t in 1..=t_max {
                    if rng.gen_bool(0.7) {
                        let x = if numeric {
                            format!("{}", rng.gen_range(1..=6))
                        } else {
                            ["p", "q", "r"][rng.gen_range(0..domain)].to_string()
                        };
                        values.insert((v, t), x);
                    }
                }
            }
            if !values.is_empty() {
                attrs.push(RawAttr {
                    name: format!("a{k}"),
                    numeric,
                    values,
                });
            }
        }
        let classes = rng.gen_range(2..=3);
        let class = |rng: &mut dyn rand::RngCore| format!("c{}", rng.gen_range(0..classes));
        let labels = if rng.gen_bool(0.5) {
            let mut m = BTreeMap::new();
            for v in 0..n {
                if rng.gen_bool(0.85) {
                    m.insert(v, class(rng));
                }
            }
            RawLabels::Static(m)
        } else {
            let mut m = BTreeMap::new();
            for v in 0..n {
                for t in 1..=t_max {
                    if rng.gen_bool(0.8) {
                        m.insert((v, t), class(rng));
                    }
                }
            }
            RawLabels::Temporal(m)
        };
        RawGraph {
            names,
            t_max,
            directed: rng.gen_bool(0.3),
            edges,
            attrs,
            labels,
        }
    }

    pub fn build(&self) -> TemporalGraph {
        let mut b = GraphBuilder::new().directed(self.directed);
        for name in &self.names {
            b.add_node(name);
        }
        for &(u, v, t) in &self.edges {
            b.add_edge(&self.names[u], &self.names[v], t);
        }
        for a in &self.attrs {
            for (&(v, t), x) in &a.values {
                b.set_attr(&self.names[v], t, &a.name, x);
            }
        }
        match &self.labels {
            RawLabels::Static(m) => {
                for (&v, l) in m {
                    b.set_static_label(&self.names[v], l).unwrap();
                }
            }
            RawLabels::Temporal(m) => {
                for (&(v, t), l) in m {
                    b.set_label(&self.names[v], t, l).unwrap();
                }
            }
        }
        b.build().unwrap()
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn classes(&self) -> Vec<String> {
        let set: BTreeSet<&String> = match &self.labels {
            RawLabels::Static(m) => m.values().collect(),
            RawLabels::Temporal(m) => m.values().collect(),
        };
        set.into_iter().cloned().collect()
    }

    pub fn is_static(&self) -> bool {
        matches!(self.labels, RawLabels::Static(_))
    }

    pub fn active(&self, v: usize, t: Timestep) -> bool {
        self.edges.iter().any(|&(a, b, s)| s == t && (a == v || b == v))
            || self.attrs.iter().any(|a| a.values.contains_key(&(v, t)))
    }

    pub fn first_seen(&self, v: usize) -> Option<Timestep> {
        (1..=self.t_max).find(|&t| self.active(v, t))
    }

    /// Neighbor multiset at `t`, one entry per edge occurrence.
    pub fn neighbors(&self, v: usize, t: Timestep) -> Vec<usize> {
        let mut out = Vec::new();
        for &(a, b, s) in &self.edges {
            if s != t {
                continue;
            }
            if a == v {
                out.push(b);
            } else if b == v && !self.directed {
                out.push(a);
            }
        }
        out
    }

    pub fn label(&self, v: usize, t: Timestep) -> Option<&String> {
        match &self.labels {
            RawLabels::Static(m) => m.get(&v),
            RawLabels::Temporal(m) => m.get(&(v, t)),
        }
    }

    fn attr(&self, name: &str) -> Option<&RawAttr> {
        self.attrs.iter().find(|a| a.name == name)
    }

    /// Own value of `attr` as seen in a single-timestep summary at `t`.
    /// The label is never an own value: static labels are excluded and
    /// temporal labels before `t` lie outside the window.
    fn own(&self, attr: &str, v: usize, t: Timestep) -> Vec<String> {
        if attr == LABEL {
            return Vec::new();
        }
        self.attr(attr)
            .and_then(|a| a.values.get(&(v, t)))
            .cloned()
            .into_iter()
            .collect()
    }

    /// A neighbor's value of `attr` as seen at `t`. Static labels are
    /// visible once the neighbor has appeared before `t`.
    fn seen(&self, attr: &str, u: usize, t: Timestep) -> Option<String> {
        if attr == LABEL {
            return match &self.labels {
                RawLabels::Static(m) => m.get(&u).filter(|_| self.first_seen(u).is_some_and(|s| s < t)).cloned(),
                RawLabels::Temporal(_) => None,
            };
        }
        self.attr(attr)?.values.get(&(u, t)).cloned()
    }

    pub fn multiset(&self, attr: &str, v: usize, t: Timestep, relational: bool) -> Vec<String> {
        if !relational {
            return self.own(attr, v, t);
        }
        self.neighbors(v, t)
            .into_iter()
            .filter_map(|u| self.seen(attr, u, t))
            .collect()
    }

    fn domain(&self, attr: &str) -> Vec<String> {
        if attr == LABEL {
            return self.classes();
        }
        let set: BTreeSet<&String> = self.attr(attr).unwrap().values.values().collect();
        set.into_iter().cloned().collect()
    }

    fn is_numeric(&self, attr: &str) -> bool {
        self.attr(attr).is_some_and(|a| a.numeric)
    }

    pub fn attr_names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.attrs.iter().map(|a| a.name.clone()).collect();
        if !self.classes().is_empty() {
            v.push(LABEL.to_string());
        }
        v
    }

    /// Unweighted aggregate of the multiset; the flag marks a missing value.
    pub fn aggregate(&self, attr: &str, v: usize, t: Timestep, relational: bool, agg: OracleAgg) -> (f64, bool) {
        if agg == OracleAgg::Degree {
            return (self.neighbors(v, t).len() as f64, false);
        }
        let items = self.multiset(attr, v, t, relational);
        let n = items.len() as f64;
        let count = |x: &str| items.iter().filter(|i| i.as_str() == x).count() as f64;
        match agg {
            OracleAgg::Count => (n, false),
            OracleAgg::Proportion(x) => (if n > 0.0 { count(x) / n } else { 0.0 }, false),
            OracleAgg::Exists(x) => (if count(x) > 0.0 { 1.0 } else { 0.0 }, false),
            OracleAgg::Average => {
                if items.is_empty() {
                    (0.0, true)
                } else {
                    (items.iter().map(|i| i.parse::<f64>().unwrap()).sum::<f64>() / n, false)
                }
            }
            OracleAgg::Mode => {
                if items.is_empty() {
                    return (0.0, true);
                }
                // candidates in ascending key order; strict > keeps the smallest on ties
                let keyed: Vec<f64> = if self.is_numeric(attr) {
                    items.iter().map(|i| i.parse().unwrap()).collect()
                } else {
                    let d = self.domain(attr);
                    items.iter().map(|i| d.iter().position(|c| c == i).unwrap() as f64).collect()
                };
                let mut keys = keyed.clone();
                keys.sort_by(f64::total_cmp);
                keys.dedup();
                let mut best = (keys[0], 0usize);
                for k in keys {
                    let c = keyed.iter().filter(|&&x| x == k).count();
                    if c > best.1 {
                        best = (k, c);
                    }
                }
                (best.0, false)
            }
            OracleAgg::Degree => unreachable!(),
        }
    }

    /// Naive Bayes over unweighted multisets at a single timestep `t`:
    /// Laplace `alpha` on the prior and on every conditional, numeric
    /// attributes cut into `bins` equal-frequency bins. Returns `None`
    /// when fewer than two classes have training nodes.
    pub fn naive_bayes(&self, t: Timestep, alpha: f64, bins: usize) -> Option<NaiveBayes> {
        let classes = self.classes();
        let k = classes.len();
        let class_of = |v: usize| -> Option<usize> {
            let l = self.label(v, t)?;
            classes.iter().position(|c| c == l)
        };
        let train: Vec<(usize, usize)> = (0..self.n())
            .filter(|&v| self.active(v, t))
            .filter_map(|v| class_of(v).map(|c| (v, c)))
            .collect();
        let present: BTreeSet<usize> = train.iter().map(|e| e.1).collect();
        if present.len() < 2 {
            return None;
        }
        let n_train = train.len() as f64;
        let prior: Vec<f64> = (0..k)
            .map(|c| (train.iter().filter(|e| e.1 == c).count() as f64 + alpha) / (n_train + alpha * k as f64))
            .collect();

        // per attribute: map a raw value to a cell index, with the domain size
        let mut coders: Vec<(String, Vec<f64>, usize)> = Vec::new();
        for attr in self.attr_names() {
            if self.is_numeric(&attr) {
                let mut xs: Vec<f64> = (0..self.n())
                    .filter_map(|v| self.own(&attr, v, t).first().map(|x| x.parse().unwrap()))
                    .collect();
                xs.sort_by(f64::total_cmp);
                let mut cuts = Vec::new();
                if !xs.is_empty() {
                    for q in 1..bins {
                        let c = xs[(q * xs.len() / bins).min(xs.len() - 1)];
                        if cuts.last() != Some(&c) {
                            cuts.push(c);
                        }
                    }
                    if cuts.last() == xs.last() {
                        cuts.pop();
                    }
                }
                let d = cuts.len() + 1;
                coders.push((attr, cuts, d));
            } else {
                let d = self.domain(&attr).len();
                coders.push((attr, Vec::new(), d));
            }
        }
        let code = |attr: &str, cuts: &[f64], x: &str| -> usize {
            if self.is_numeric(attr) {
                let x: f64 = x.parse().unwrap();
                cuts.iter().filter(|&&c| c < x).count()
            } else {
                self.domain(attr).iter().position(|c| c == x).unwrap()
            }
        };

        // counts[(relational, attr)][class][cell]
        let mut tables: BTreeMap<(bool, String), Vec<Vec<f64>>> = BTreeMap::new();
        for relational in [false, true] {
            for (attr, cuts, d) in &coders {
                let mut counts = vec![vec![0.0; *d]; k];
                for &(v, c) in &train {
                    for x in self.multiset(attr, v, t, relational) {
                        counts[c][code(attr, cuts, &x)] += 1.0;
                    }
                }
                let probs = counts
                    .iter()
                    .map(|row| {
                        let total: f64 = row.iter().sum();
                        row.iter().map(|x| (x + alpha) / (total + alpha * *d as f64)).collect()
                    })
                    .collect();
                tables.insert((relational, attr.clone()), probs);
            }
        }

        let posteriors = (0..self.n())
            .map(|v| {
                if !self.active(v, t) {
                    return prior.clone();
                }
                let mut logp: Vec<f64> = prior.iter().map(|p| p.ln()).collect();
                for relational in [false, true] {
                    for (attr, cuts, _) in &coders {
                        let table = &tables[&(relational, attr.clone())];
                        for x in self.multiset(attr, v, t, relational) {
                            let cell = code(attr, cuts, &x);
                            for (c, lp) in logp.iter_mut().enumerate() {
                                *lp += table[c][cell].ln();
                            }
                        }
                    }
                }
                let m = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = logp.iter().map(|l| (l - m).exp()).sum();
                logp.iter().map(|l| (l - m).exp() / z).collect()
            })
            .collect();
        Some(NaiveBayes { prior, posteriors })
    }
}

#[derive(Debug, Clone)]
pub struct NaiveBayes {
    pub prior: Vec<f64>,
    pub posteriors: Vec<Vec<f64>>,
}
