//! Weighted relational probability trees.
//!
//! Relational multisets are propositionalized by weighted aggregates, then
//! a binary probability estimation tree is grown greedily on the resulting
//! features. Features may carry their own kernel, in which case they are
//! computed on a summary rebuilt with that kernel on links and attributes
//! and the tree chooses among the variants.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::fmt_num;
use crate::graph::{AttrKind, AttrValue, NodeId, TemporalGraph, Timestep};
use crate::model::{FeatureSelection, Posterior, Source, TrainingSet};
use crate::representation::{build_summary, KernelSpec, RepresentationConfig, SummaryData};

#[derive(Debug, Clone, PartialEq)]
pub enum Aggregator {
    Average,
    Mode,
    Count,
    Proportion(String),
    Degree,
    Exists(String),
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregator::Average => write!(f, "AVERAGE"),
            Aggregator::Mode => write!(f, "MODE"),
            Aggregator::Count => write!(f, "COUNT"),
            Aggregator::Proportion(v) => write!(f, "PROPORTION({v})"),
            Aggregator::Degree => write!(f, "DEGREE"),
            Aggregator::Exists(v) => write!(f, "EXISTS({v})"),
        }
    }
}

impl FromStr for Aggregator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let arg = |prefix: &str| {
            s.strip_prefix(prefix)
                .and_then(|r| r.strip_suffix(')'))
                .map(str::to_string)
        };
        Ok(match s {
            "AVERAGE" => Aggregator::Average,
            "MODE" => Aggregator::Mode,
            "COUNT" => Aggregator::Count,
            "DEGREE" => Aggregator::Degree,
            _ => {
                if let Some(v) = arg("PROPORTION(") {
                    Aggregator::Proportion(v)
                } else if let Some(v) = arg("EXISTS(") {
                    Aggregator::Exists(v)
                } else {
                    return Err(Error::Config(format!(
                        "unknown aggregator `{s}` (expected AVERAGE, MODE, COUNT, PROPORTION(v), DEGREE or EXISTS(v))"
                    )));
                }
            }
        })
    }
}

/// One propositional feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub source: Source,
    /// Attribute name; unused by `DEGREE`.
    pub attr: String,
    pub aggregator: Aggregator,
    pub kernel_variant: Option<KernelSpec>,
}

impl FeatureSpec {
    pub fn new(source: Source, attr: &str, aggregator: Aggregator) -> Self {
        FeatureSpec {
            source,
            attr: attr.to_string(),
            aggregator,
            kernel_variant: None,
        }
    }

    pub fn degree() -> Self {
        Self::new(Source::Relational, "", Aggregator::Degree)
    }

    pub fn with_kernel(mut self, k: KernelSpec) -> Self {
        self.kernel_variant = Some(k);
        self
    }

    fn identity(&self) -> String {
        match &self.kernel_variant {
            Some(k) => format!("{}:{}:{}@{:?}", self.source, self.attr, self.aggregator, k.key()),
            None => format!("{}:{}:{}", self.source, self.attr, self.aggregator),
        }
    }

    /// Checks the spec against attribute types and domains of `s`.
    pub fn validate(&self, s: &SummaryData) -> Result<()> {
        if self.aggregator == Aggregator::Degree {
            return Ok(());
        }
        let a = s
            .attr_index(&self.attr)
            .ok_or_else(|| Error::Config(format!("feature {self}: unknown attribute")))?;
        let meta = &s.attrs()[a];
        match (&self.aggregator, meta.kind) {
            (Aggregator::Average, AttrKind::Categorical) => Err(Error::Config(format!(
                "feature {self}: AVERAGE requires a numeric attribute"
            ))),
            (Aggregator::Proportion(v) | Aggregator::Exists(v), AttrKind::Categorical) => {
                if meta.categories.iter().any(|c| c == v) {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "feature {self}: value `{v}` not in the domain of `{}`",
                        self.attr
                    )))
                }
            }
            (Aggregator::Proportion(_) | Aggregator::Exists(_), AttrKind::Numeric) => {
                Err(Error::Config(format!(
                    "feature {self}: value aggregators require a categorical attribute"
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.source, self.attr, self.aggregator)?;
        if let Some(k) = &self.kernel_variant {
            write!(f, "@{k}")?;
        }
        Ok(())
    }
}

impl FromStr for FeatureSpec {
    type Err = Error;
    /// `source:attr:AGGREGATOR[@kernel]`, e.g. `relational:topic:PROPORTION(X)@exponential(0.5)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, kernel) = match s.split_once('@') {
            Some((b, k)) => (b, Some(k.parse::<KernelSpec>()?)),
            None => (s, None),
        };
        let mut parts = body.splitn(3, ':');
        let (Some(src), Some(attr), Some(agg)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Config(format!(
                "invalid feature `{s}` (expected source:attr:AGGREGATOR)"
            )));
        };
        let source = match src {
            "intrinsic" => Source::Intrinsic,
            "relational" => Source::Relational,
            other => {
                return Err(Error::Config(format!(
                    "invalid feature source `{other}` (expected intrinsic or relational)"
                )))
            }
        };
        Ok(FeatureSpec {
            source,
            attr: attr.to_string(),
            aggregator: agg.parse()?,
            kernel_variant: kernel,
        })
    }
}

/// Computed feature values; `missing[i]` marks aggregates of an empty
/// weighted multiset whose value is reported as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
}

/// Summaries needed to evaluate a set of feature specs at one time.
#[derive(Debug, Clone)]
pub struct FeatureContext {
    base: SummaryData,
    variants: Vec<(KernelSpec, SummaryData)>,
}

impl FeatureContext {
    /// Context without kernel variants.
    pub fn from_summary(s: SummaryData) -> Self {
        FeatureContext {
            base: s,
            variants: Vec::new(),
        }
    }

    /// Builds the base summary and one rebuilt summary per distinct kernel
    /// variant referenced by `specs`.
    pub fn build(
        g: &TemporalGraph,
        cfg: &RepresentationConfig,
        t: Timestep,
        specs: &[FeatureSpec],
    ) -> Result<Self> {
        let base = build_summary(g, cfg, t)?;
        let mut ctx = FeatureContext::from_summary(base);
        ctx.add_variants(g, cfg, specs)?;
        Ok(ctx)
    }

    pub fn add_variants(
        &mut self,
        g: &TemporalGraph,
        cfg: &RepresentationConfig,
        specs: &[FeatureSpec],
    ) -> Result<()> {
        for k in specs.iter().filter_map(|f| f.kernel_variant) {
            if self.variant(&k).is_none() {
                let s = build_summary(g, &cfg.with_kernel(k), self.base.t)?;
                self.variants.push((k, s));
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &SummaryData {
        &self.base
    }

    pub fn base_mut(&mut self) -> &mut SummaryData {
        &mut self.base
    }

    fn variant(&self, k: &KernelSpec) -> Option<&SummaryData> {
        self.variants
            .iter()
            .find(|(v, _)| v.key() == k.key())
            .map(|(_, s)| s)
    }

    pub fn summary_for(&self, spec: &FeatureSpec) -> Result<&SummaryData> {
        match &spec.kernel_variant {
            None => Ok(&self.base),
            Some(k) => self.variant(k).ok_or_else(|| {
                Error::Contract(format!("feature {spec}: kernel variant not prepared"))
            }),
        }
    }
}

fn weighted_multiset(s: &SummaryData, a: usize, v: NodeId, source: Source) -> Vec<(AttrValue, f64)> {
    match source {
        Source::Intrinsic => s
            .occurrences(a, v)
            .iter()
            .map(|o| (o.value, o.weight))
            .collect(),
        Source::Relational => s
            .neighbors(v)
            .iter()
            .flat_map(|&(j, e)| {
                let nw = s.node_weight(j);
                s.occurrences(a, j)
                    .iter()
                    .map(move |o| (o.value, e * o.weight * nw))
            })
            .collect(),
    }
}

/// Value and missing flag of one feature for node `v`.
pub fn rpt_feature(s: &SummaryData, v: NodeId, spec: &FeatureSpec) -> Result<(f64, bool)> {
    if spec.aggregator == Aggregator::Degree {
        return Ok((s.neighbors(v).iter().map(|&(_, e)| e).sum(), false));
    }
    let a = s
        .attr_index(&spec.attr)
        .ok_or_else(|| Error::Config(format!("feature {spec}: unknown attribute")))?;
    let meta = &s.attrs()[a];
    let items: Vec<(AttrValue, f64)> = weighted_multiset(s, a, v, spec.source)
        .into_iter()
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let total: f64 = items.iter().map(|&(_, w)| w).sum();
    let cat_weight = |value: &str| -> f64 {
        let Some(k) = meta.categories.iter().position(|c| c == value) else {
            return 0.0;
        };
        items
            .iter()
            .filter(|(x, _)| *x == AttrValue::Cat(k as u32))
            .map(|&(_, w)| w)
            .sum()
    };
    Ok(match &spec.aggregator {
        Aggregator::Count => (total, false),
        Aggregator::Degree => unreachable!(),
        Aggregator::Average => {
            if total > 0.0 {
                let sum: f64 = items
                    .iter()
                    .map(|&(x, w)| match x {
                        AttrValue::Num(x) => x * w,
                        AttrValue::Cat(_) => 0.0,
                    })
                    .sum();
                (sum / total, false)
            } else {
                (0.0, true)
            }
        }
        Aggregator::Proportion(value) => {
            if total > 0.0 {
                (cat_weight(value) / total, false)
            } else {
                (0.0, false)
            }
        }
        Aggregator::Exists(value) => (if cat_weight(value) > 0.0 { 1.0 } else { 0.0 }, false),
        Aggregator::Mode => {
            if items.is_empty() {
                return Ok((0.0, true));
            }
            // keyed so that iteration order is the tie-break order
            let mut acc: Vec<(f64, f64)> = Vec::new();
            for &(x, w) in &items {
                let key = match x {
                    AttrValue::Cat(c) => f64::from(c),
                    AttrValue::Num(x) => x,
                };
                match acc.iter_mut().find(|(k, _)| *k == key) {
                    Some(e) => e.1 += w,
                    None => acc.push((key, w)),
                }
            }
            acc.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut best = acc[0];
            for &e in &acc[1..] {
                if e.1 > best.1 {
                    best = e;
                }
            }
            (best.0, false)
        }
    })
}

/// Feature vector for node `v`.
pub fn rpt_features(ctx: &FeatureContext, v: NodeId, specs: &[FeatureSpec]) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(specs.len());
    let mut missing = Vec::with_capacity(specs.len());
    for spec in specs {
        let (x, m) = rpt_feature(ctx.summary_for(spec)?, v, spec)?;
        values.push(x);
        missing.push(m);
    }
    Ok(FeatureVector { values, missing })
}

/// Feature vectors for many nodes, computed in parallel.
pub fn feature_matrix(
    ctx: &FeatureContext,
    nodes: &[NodeId],
    specs: &[FeatureSpec],
) -> Result<Vec<FeatureVector>> {
    nodes
        .par_iter()
        .map(|&v| rpt_features(ctx, v, specs))
        .collect()
}

/// Cross product of `specs` with the distinct kernels in `grid`.
pub fn rpt_expand_selective(specs: &[FeatureSpec], grid: &[KernelSpec]) -> Result<Vec<FeatureSpec>> {
    if grid.is_empty() {
        return Err(Error::Config("selective kernel grid is empty".into()));
    }
    let mut kernels: Vec<KernelSpec> = Vec::new();
    for k in grid {
        k.validate()?;
        if !kernels.iter().any(|x| x.key() == k.key()) {
            kernels.push(*k);
        }
    }
    let mut out: Vec<FeatureSpec> = Vec::new();
    for spec in specs {
        for k in &kernels {
            let f = spec.clone().with_kernel(*k);
            if !out.iter().any(|x| x.identity() == f.identity()) {
                out.push(f);
            }
        }
    }
    Ok(out)
}

/// A generic feature set over the attributes in `selection`: intrinsic
/// MODE/AVERAGE, relational MODE, COUNT and per-value PROPORTION (for
/// domains of at most `max_values` values), plus DEGREE.
pub fn default_feature_specs(
    s: &SummaryData,
    selection: &FeatureSelection,
    max_values: usize,
) -> Result<Vec<FeatureSpec>> {
    let (intrinsic, relational) = selection.resolve(s)?;
    let mut out = Vec::new();
    for &a in &intrinsic {
        let meta = &s.attrs()[a];
        match meta.kind {
            AttrKind::Numeric => out.push(FeatureSpec::new(Source::Intrinsic, &meta.name, Aggregator::Average)),
            AttrKind::Categorical => {
                out.push(FeatureSpec::new(Source::Intrinsic, &meta.name, Aggregator::Mode));
                if meta.categories.len() <= max_values {
                    for v in &meta.categories {
                        out.push(FeatureSpec::new(
                            Source::Intrinsic,
                            &meta.name,
                            Aggregator::Proportion(v.clone()),
                        ));
                    }
                }
            }
        }
    }
    for &a in &relational {
        let meta = &s.attrs()[a];
        out.push(FeatureSpec::new(Source::Relational, &meta.name, Aggregator::Count));
        match meta.kind {
            AttrKind::Numeric => out.push(FeatureSpec::new(Source::Relational, &meta.name, Aggregator::Average)),
            AttrKind::Categorical => {
                out.push(FeatureSpec::new(Source::Relational, &meta.name, Aggregator::Mode));
                if meta.categories.len() <= max_values {
                    for v in &meta.categories {
                        out.push(FeatureSpec::new(
                            Source::Relational,
                            &meta.name,
                            Aggregator::Proportion(v.clone()),
                        ));
                    }
                }
            }
        }
    }
    out.push(FeatureSpec::degree());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RptParams {
    pub max_depth: usize,
    pub min_leaf_weight: f64,
    /// Laplace constant for leaf distributions.
    pub alpha: f64,
}

impl Default for RptParams {
    fn default() -> Self {
        RptParams {
            max_depth: 8,
            min_leaf_weight: 2.0,
            alpha: 1.0,
        }
    }
}

impl RptParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_leaf_weight > 0.0 && self.min_leaf_weight.is_finite()) {
            return Err(Error::Config(format!(
                "rpt.min_leaf_weight: must be positive, got {}",
                self.min_leaf_weight
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "rpt.alpha: must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitTest {
    /// Left when the value is at most the threshold.
    LessEq(f64),
    /// Left when the value is present and equal to the encoded category.
    Equals(f64),
}

impl SplitTest {
    fn goes_left(&self, x: f64, missing: bool) -> bool {
        match *self {
            SplitTest::LessEq(t) => x <= t,
            SplitTest::Equals(c) => !missing && x == c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        dist: Vec<f64>,
        weight: f64,
    },
    Split {
        feature: usize,
        test: SplitTest,
        gain: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn size(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.size() + right.size(),
        }
    }
}

/// A fitted relational probability tree.
#[derive(Debug, Clone, PartialEq)]
pub struct RptModel {
    pub classes: Vec<String>,
    pub specs: Vec<FeatureSpec>,
    pub params: RptParams,
    /// Laplace-smoothed weighted class frequencies of the training rows.
    pub prior: Vec<f64>,
    pub root: TreeNode,
}

fn entropy(w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    w.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| {
            let p = x / total;
            -p * p.log2()
        })
        .sum()
}

struct Row<'a> {
    x: &'a FeatureVector,
    class: usize,
    weight: f64,
}

struct Grower<'a> {
    k: usize,
    params: &'a RptParams,
    equality: Vec<bool>,
}

impl Grower<'_> {
    fn leaf(&self, rows: &[&Row]) -> TreeNode {
        let mut w = vec![0.0; self.k];
        for r in rows {
            w[r.class] += r.weight;
        }
        let total: f64 = w.iter().sum();
        let a = self.params.alpha;
        let dist = w
            .iter()
            .map(|x| (x + a) / (total + a * self.k as f64))
            .collect();
        TreeNode::Leaf { dist, weight: total }
    }

    fn best_split(&self, rows: &[&Row], parent: &[f64]) -> Option<(usize, SplitTest, f64)> {
        let total: f64 = parent.iter().sum();
        let h = entropy(parent);
        let min_leaf = self.params.min_leaf_weight;
        let mut best: Option<(usize, SplitTest, f64)> = None;
        let mut consider = |f: usize, test: SplitTest, left: &[f64]| {
            let wl: f64 = left.iter().sum();
            let wr = total - wl;
            if wl < min_leaf || wr < min_leaf {
                return;
            }
            let right: Vec<f64> = parent.iter().zip(left).map(|(p, l)| (p - l).max(0.0)).collect();
            let gain = h - (wl / total) * entropy(left) - (wr / total) * entropy(&right);
            if gain >= 1e-12 && best.map_or(true, |(_, _, g)| gain > g) {
                best = Some((f, test, gain));
            }
        };
        let n_features = rows[0].x.values.len();
        for f in 0..n_features {
            if self.equality[f] {
                let mut cats: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
                let mut order: Vec<f64> = Vec::new();
                for r in rows.iter().filter(|r| !r.x.missing[f]) {
                    let v = r.x.values[f];
                    let e = cats.entry(v.to_bits()).or_insert_with(|| {
                        order.push(v);
                        vec![0.0; self.k]
                    });
                    e[r.class] += r.weight;
                }
                order.sort_by(f64::total_cmp);
                for v in order {
                    consider(f, SplitTest::Equals(v), &cats[&v.to_bits()]);
                }
            } else {
                let mut sorted: Vec<&&Row> = rows.iter().collect();
                sorted.sort_by(|a, b| a.x.values[f].total_cmp(&b.x.values[f]));
                let mut left = vec![0.0; self.k];
                for i in 0..sorted.len() - 1 {
                    left[sorted[i].class] += sorted[i].weight;
                    let (a, b) = (sorted[i].x.values[f], sorted[i + 1].x.values[f]);
                    if a < b {
                        consider(f, SplitTest::LessEq(a + (b - a) / 2.0), &left);
                    }
                }
            }
        }
        best
    }

    fn grow(&self, rows: &[&Row], depth: usize) -> TreeNode {
        let mut parent = vec![0.0; self.k];
        for r in rows {
            parent[r.class] += r.weight;
        }
        let total: f64 = parent.iter().sum();
        if depth >= self.params.max_depth || total < 2.0 * self.params.min_leaf_weight || rows.len() < 2 {
            return self.leaf(rows);
        }
        let Some((feature, test, gain)) = self.best_split(rows, &parent) else {
            return self.leaf(rows);
        };
        let (l, r): (Vec<&Row>, Vec<&Row>) = rows
            .iter()
            .partition(|row| test.goes_left(row.x.values[feature], row.x.missing[feature]));
        TreeNode::Split {
            feature,
            test,
            gain,
            left: Box::new(self.grow(&l, depth + 1)),
            right: Box::new(self.grow(&r, depth + 1)),
        }
    }
}

impl RptModel {
    /// Grows a tree on precomputed feature rows `(features, class, weight)`.
    pub fn fit_rows(
        classes: &[String],
        specs: &[FeatureSpec],
        equality: &[bool],
        rows: &[(FeatureVector, usize, f64)],
        params: &RptParams,
    ) -> Result<Self> {
        params.validate()?;
        if specs.is_empty() {
            return Err(Error::Config("rpt requires at least one feature".into()));
        }
        let total: f64 = rows.iter().map(|r| r.2).sum();
        if total <= 0.0 || total < params.min_leaf_weight {
            return Err(Error::EmptyTraining(format!(
                "total training weight {} below rpt.min_leaf_weight {}",
                fmt_num(total),
                fmt_num(params.min_leaf_weight)
            )));
        }
        for (x, _, _) in rows {
            if x.values.len() != specs.len() {
                return Err(Error::Contract(format!(
                    "feature vector of length {} for {} specs",
                    x.values.len(),
                    specs.len()
                )));
            }
        }
        let rows: Vec<Row> = rows
            .iter()
            .filter(|r| r.2 > 0.0)
            .map(|(x, c, w)| Row {
                x,
                class: *c,
                weight: *w,
            })
            .collect();
        let refs: Vec<&Row> = rows.iter().collect();
        let grower = Grower {
            k: classes.len(),
            params,
            equality: equality.to_vec(),
        };
        let TreeNode::Leaf { dist: prior, .. } = grower.leaf(&refs) else {
            unreachable!()
        };
        Ok(RptModel {
            classes: classes.to_vec(),
            specs: specs.to_vec(),
            params: params.clone(),
            prior,
            root: grower.grow(&refs, 0),
        })
    }

    /// Fits on the training nodes, computing features from `ctx`.
    pub fn fit(
        ctx: &FeatureContext,
        train: &TrainingSet,
        specs: &[FeatureSpec],
        params: &RptParams,
    ) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Config("rpt requires at least one feature".into()));
        }
        for spec in specs {
            spec.validate(ctx.summary_for(spec)?)?;
        }
        let equality: Vec<bool> = specs
            .iter()
            .map(|f| {
                f.aggregator == Aggregator::Mode
                    && ctx
                        .base()
                        .attr_index(&f.attr)
                        .is_some_and(|a| ctx.base().attrs()[a].kind == AttrKind::Categorical)
            })
            .collect();
        let nodes = train.nodes();
        let xs = feature_matrix(ctx, &nodes, specs)?;
        let rows: Vec<(FeatureVector, usize, f64)> = xs
            .into_iter()
            .zip(&train.examples)
            .map(|(x, &(_, c, w))| (x, c, w))
            .collect();
        Self::fit_rows(&train.classes, specs, &equality, &rows, params)
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn node_count(&self) -> usize {
        self.root.size()
    }

    /// Routes `x` to its leaf and returns the leaf distribution.
    pub fn predict(&self, x: &FeatureVector) -> Result<Posterior> {
        if x.values.len() != self.specs.len() || x.missing.len() != self.specs.len() {
            return Err(Error::Contract(format!(
                "feature vector of length {} for a tree over {} features",
                x.values.len(),
                self.specs.len()
            )));
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { dist, .. } => return Ok(Posterior::from_probs(dist)),
                TreeNode::Split {
                    feature,
                    test,
                    left,
                    right,
                    ..
                } => {
                    node = if test.goes_left(x.values[*feature], x.missing[*feature]) {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn predict_node(&self, ctx: &FeatureContext, v: NodeId) -> Result<Posterior> {
        self.predict(&rpt_features(ctx, v, &self.specs)?)
    }

    /// Indented text form, one tree node per line in preorder. Split
    /// lines give the offsets of their children relative to the line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("rpt v1\n");
        out += &format!("classes\t{}\n", self.classes.join("\t"));
        out += &format!(
            "params\tmax_depth={}\tmin_leaf_weight={}\talpha={}\n",
            self.params.max_depth,
            fmt_num(self.params.min_leaf_weight),
            fmt_num(self.params.alpha)
        );
        for (i, f) in self.specs.iter().enumerate() {
            out += &format!("feature\t{i}\t{f}\n");
        }
        fn walk(n: &TreeNode, depth: usize, out: &mut String) {
            let pad = "  ".repeat(depth);
            match n {
                TreeNode::Leaf { dist, weight } => {
                    let d: Vec<String> = dist.iter().map(|&p| fmt_num(p)).collect();
                    *out += &format!("{pad}leaf\tweight={}\t{}\n", fmt_num(*weight), d.join("\t"));
                }
                TreeNode::Split {
                    feature,
                    test,
                    gain,
                    left,
                    right,
                } => {
                    let t = match test {
                        SplitTest::LessEq(x) => format!("<= {}", fmt_num(*x)),
                        SplitTest::Equals(x) => format!("== {}", fmt_num(*x)),
                    };
                    *out += &format!(
                        "{pad}split\tf{feature} {t}\tgain={}\tleft=+1\tright=+{}\n",
                        fmt_num(*gain),
                        1 + left.size()
                    );
                    walk(left, depth + 1, out);
                    walk(right, depth + 1, out);
                }
            }
        }
        walk(&self.root, 0, &mut out);
        out
    }

    /// Every split in preorder as `(feature, gain)`.
    pub fn splits(&self) -> Vec<(usize, f64)> {
        fn walk(n: &TreeNode, out: &mut Vec<(usize, f64)>) {
            if let TreeNode::Split {
                feature,
                gain,
                left,
                right,
                ..
            } = n
            {
                out.push((*feature, *gain));
                walk(left, out);
                walk(right, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

/// Fits on every node labeled at the summary time.
pub fn rpt_fit(
    s: &SummaryData,
    g: &TemporalGraph,
    specs: &[FeatureSpec],
    params: &RptParams,
) -> Result<RptModel> {
    let train = TrainingSet::at(g, s);
    RptModel::fit(&FeatureContext::from_summary(s.clone()), &train, specs, params)
}

pub fn rpt_predict(m: &RptModel, x: &FeatureVector) -> Result<Posterior> {
    m.predict(x)
}
