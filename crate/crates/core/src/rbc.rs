//! Weighted relational Bayes classifier.
//!
//! Naive Bayes over weighted multisets: the node's own attribute values
//! (intrinsic) and its neighbors' values (relational) are treated as
//! independent evidence, each occurrence contributing its summary weight to
//! the counts at fit time and to the exponent of its likelihood term at
//! prediction time.

use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::format::fmt_num;
use crate::graph::{AttrKind, AttrValue, NodeId, TemporalGraph};
use crate::model::{FeatureSelection, Posterior, Source, TrainingSet};
use crate::representation::SummaryData;

/// How relational evidence is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelationalWeighting {
    /// Every neighbor occurrence counts with its own weight.
    #[default]
    PerOccurrence,
    /// A node's relational multiset for one attribute is rescaled to unit
    /// total weight, so each node contributes one aggregated cell.
    Normalized,
}

impl fmt::Display for RelationalWeighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationalWeighting::PerOccurrence => write!(f, "per-occurrence"),
            RelationalWeighting::Normalized => write!(f, "normalized"),
        }
    }
}

impl FromStr for RelationalWeighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-occurrence" => Ok(RelationalWeighting::PerOccurrence),
            "normalized" => Ok(RelationalWeighting::Normalized),
            other => Err(Error::Config(format!(
                "unknown relational weighting `{other}` (expected per-occurrence or normalized)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbcParams {
    pub alpha: f64,
    /// Equal-frequency bins for numeric attributes.
    pub bins: usize,
    pub weighting: RelationalWeighting,
}

impl Default for RbcParams {
    fn default() -> Self {
        RbcParams {
            alpha: 1.0,
            bins: 4,
            weighting: RelationalWeighting::PerOccurrence,
        }
    }
}

impl RbcParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "rbc.alpha: must be positive, got {}",
                self.alpha
            )));
        }
        if self.bins < 1 {
            return Err(Error::Config("rbc.bins: must be at least 1".into()));
        }
        Ok(())
    }
}

/// Smoothed `P(value | class)` for one attribute seen from one side.
#[derive(Debug, Clone, PartialEq)]
pub struct CondTable {
    pub source: Source,
    pub attr: String,
    pub values: Vec<String>,
    /// Bin cut points for numeric attributes; value `x` falls in bin
    /// `#{cut < x}`.
    pub cuts: Option<Vec<f64>>,
    /// `probs[class][value]`.
    pub probs: Vec<Vec<f64>>,
}

impl CondTable {
    pub fn prob(&self, class: usize, value: &str) -> Option<f64> {
        let k = self.values.iter().position(|v| v == value)?;
        Some(self.probs[class][k])
    }

    fn value_index(&self, value: AttrValue) -> Option<usize> {
        let k = match (value, &self.cuts) {
            (AttrValue::Num(x), Some(cuts)) => cuts.partition_point(|&c| c < x),
            (AttrValue::Cat(c), None) => c as usize,
            _ => return None,
        };
        (k < self.values.len()).then_some(k)
    }
}

/// A fitted relational Bayes classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct RbcModel {
    pub classes: Vec<String>,
    pub alpha: f64,
    pub weighting: RelationalWeighting,
    pub prior: Vec<f64>,
    pub tables: Vec<CondTable>,
}

fn equal_frequency_cuts(mut xs: Vec<f64>, bins: usize) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    if xs.is_empty() {
        return Vec::new();
    }
    let mut cuts: Vec<f64> = (1..bins)
        .map(|q| xs[(q * xs.len() / bins).min(xs.len() - 1)])
        .collect();
    cuts.dedup();
    // a cut equal to the maximum would leave its upper bin always empty
    if cuts.last() == xs.last() {
        cuts.pop();
    }
    cuts
}

fn bin_labels(cuts: &[f64]) -> Vec<String> {
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut lo = "-inf".to_string();
    for &c in cuts {
        let hi = fmt_num(c);
        out.push(format!("({lo},{hi}]"));
        lo = hi;
    }
    out.push(format!("({lo},inf)"));
    out
}

/// Multiplier applied to a relational multiset before it is counted.
fn relational_scale(
    s: &SummaryData,
    attr: usize,
    v: NodeId,
    weighting: RelationalWeighting,
    with_node_weight: bool,
) -> f64 {
    match weighting {
        RelationalWeighting::PerOccurrence => 1.0,
        RelationalWeighting::Normalized => {
            let total: f64 = s
                .neighbors(v)
                .iter()
                .map(|&(j, e)| {
                    let nw = if with_node_weight { s.node_weight(j) } else { 1.0 };
                    e * nw * s.occurrences(attr, j).iter().map(|o| o.weight).sum::<f64>()
                })
                .sum();
            if total > 0.0 {
                1.0 / total
            } else {
                0.0
            }
        }
    }
}

impl RbcModel {
    /// Fits on `train`, reading the attributes chosen by `selection`.
    pub fn fit(
        s: &SummaryData,
        train: &TrainingSet,
        selection: &FeatureSelection,
        params: &RbcParams,
    ) -> Result<Self> {
        params.validate()?;
        train.check_trainable()?;
        let k = train.classes.len();
        let alpha = params.alpha;
        let (intrinsic, relational) = selection.resolve(s)?;

        let class_w = train.class_weights();
        let total: f64 = class_w.iter().sum();
        let prior = class_w
            .iter()
            .map(|w| (w + alpha) / (total + alpha * k as f64))
            .collect();

        let mut tables = Vec::new();
        for (source, attrs) in [
            (Source::Intrinsic, &intrinsic),
            (Source::Relational, &relational),
        ] {
            for &a in attrs.iter() {
                let meta = &s.attrs()[a];
                let (values, cuts) = match meta.kind {
                    AttrKind::Categorical => (meta.categories.clone(), None),
                    AttrKind::Numeric => {
                        let xs = (0..s.node_count())
                            .flat_map(|v| s.occurrences(a, NodeId(v as u32)))
                            .filter_map(|o| match o.value {
                                AttrValue::Num(x) => Some(x),
                                AttrValue::Cat(_) => None,
                            })
                            .collect();
                        let cuts = equal_frequency_cuts(xs, params.bins);
                        (bin_labels(&cuts), Some(cuts))
                    }
                };
                let mut table = CondTable {
                    source,
                    attr: meta.name.clone(),
                    values,
                    cuts,
                    probs: Vec::new(),
                };
                let mut counts = vec![vec![0.0; table.values.len()]; k];
                for &(i, c, nw_i) in &train.examples {
                    match source {
                        Source::Intrinsic => {
                            for o in s.occurrences(a, i) {
                                if let Some(x) = table.value_index(o.value) {
                                    counts[c][x] += o.weight * nw_i;
                                }
                            }
                        }
                        Source::Relational => {
                            let scale = relational_scale(s, a, i, params.weighting, true);
                            for &(j, e) in s.neighbors(i) {
                                let nw_j = s.node_weight(j);
                                for o in s.occurrences(a, j) {
                                    if let Some(x) = table.value_index(o.value) {
                                        counts[c][x] += scale * e * o.weight * nw_j;
                                    }
                                }
                            }
                        }
                    }
                }
                let m = table.values.len() as f64;
                table.probs = counts
                    .into_iter()
                    .map(|row| {
                        let z: f64 = row.iter().sum::<f64>() + alpha * m;
                        row.into_iter().map(|x| (x + alpha) / z).collect()
                    })
                    .collect();
                tables.push(table);
            }
        }

        Ok(RbcModel {
            classes: train.classes.clone(),
            alpha,
            weighting: params.weighting,
            prior,
            tables,
        })
    }

    pub fn table(&self, source: Source, attr: &str) -> Option<&CondTable> {
        self.tables
            .iter()
            .find(|t| t.source == source && t.attr == attr)
    }

    /// Class posterior for `v` under summary `s`.
    pub fn predict(&self, s: &SummaryData, v: NodeId) -> Result<Posterior> {
        if v.index() >= s.node_count() {
            return Err(Error::Contract(format!(
                "node id {} outside summary of {} nodes",
                v.0,
                s.node_count()
            )));
        }
        let mut log_w: Vec<f64> = self.prior.iter().map(|p| p.ln()).collect();
        if s.node_weight(v) <= 0.0 {
            warn!("node {} has zero weight at t={}; returning the prior", v.0, s.t);
            return Ok(Posterior::from_log_weights(log_w));
        }
        for table in &self.tables {
            let Some(a) = s.attr_index(&table.attr) else {
                return Err(Error::Contract(format!(
                    "attribute `{}` missing from prediction summary",
                    table.attr
                )));
            };
            let mut add = |value: AttrValue, w: f64| {
                if let Some(x) = table.value_index(value) {
                    for (c, lw) in log_w.iter_mut().enumerate() {
                        *lw += w * table.probs[c][x].ln();
                    }
                }
            };
            match table.source {
                Source::Intrinsic => {
                    for o in s.occurrences(a, v) {
                        add(o.value, o.weight);
                    }
                }
                Source::Relational => {
                    let scale = relational_scale(s, a, v, self.weighting, false);
                    for &(j, e) in s.neighbors(v) {
                        for o in s.occurrences(a, j) {
                            add(o.value, scale * e * o.weight);
                        }
                    }
                }
            }
        }
        Ok(Posterior::from_log_weights(log_w))
    }

    /// Versioned, line-oriented, tab-separated text form.
    pub fn to_text(&self) -> String {
        let mut out = String::from("rbc v1\n");
        out += &format!("alpha\t{}\n", fmt_num(self.alpha));
        out += &format!("weighting\t{}\n", self.weighting);
        out += &format!("classes\t{}\n", self.classes.join("\t"));
        for (c, p) in self.classes.iter().zip(&self.prior) {
            out += &format!("prior\t{c}\t{}\n", fmt_num(*p));
        }
        let mut tables: Vec<&CondTable> = self.tables.iter().collect();
        tables.sort_by(|a, b| (&a.attr, a.source).cmp(&(&b.attr, b.source)));
        for t in tables {
            out += &format!("table\t{}\t{}\n", t.source, t.attr);
            if let Some(cuts) = &t.cuts {
                let cuts: Vec<String> = cuts.iter().map(|&c| fmt_num(c)).collect();
                out += &format!("cuts\t{}\n", cuts.join("\t"));
            }
            for (c, row) in self.classes.iter().zip(&t.probs) {
                for (value, p) in t.values.iter().zip(row) {
                    out += &format!("p\t{c}\t{value}\t{}\n", fmt_num(*p));
                }
            }
        }
        out
    }

    /// Parses [`RbcModel::to_text`] output.
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| {
            Error::Malformed {
                file: "rbc model".into(),
                line: line as u64,
                column: "1".into(),
                message: msg.to_string(),
            }
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, "rbc v1")) => {}
            _ => return Err(bad(1, "expected header `rbc v1`")),
        }
        let mut m = RbcModel {
            classes: Vec::new(),
            alpha: 1.0,
            weighting: RelationalWeighting::PerOccurrence,
            prior: Vec::new(),
            tables: Vec::new(),
        };
        let num = |i: usize, s: &str| s.parse::<f64>().map_err(|_| bad(i, "invalid number"));
        for (i, line) in lines {
            let f: Vec<&str> = line.split('\t').collect();
            match f.as_slice() {
                ["alpha", a] => m.alpha = num(i, a)?,
                ["weighting", w] => m.weighting = w.parse()?,
                ["classes", rest @ ..] => {
                    m.classes = rest.iter().map(|s| s.to_string()).collect();
                    m.prior = vec![0.0; m.classes.len()];
                }
                ["prior", c, p] => {
                    let c = m
                        .classes
                        .iter()
                        .position(|x| x == c)
                        .ok_or_else(|| bad(i, "unknown class"))?;
                    m.prior[c] = num(i, p)?;
                }
                ["table", source, attr] => {
                    let source = match *source {
                        "intrinsic" => Source::Intrinsic,
                        "relational" => Source::Relational,
                        _ => return Err(bad(i, "unknown source")),
                    };
                    m.tables.push(CondTable {
                        source,
                        attr: attr.to_string(),
                        values: Vec::new(),
                        cuts: None,
                        probs: vec![Vec::new(); m.classes.len()],
                    });
                }
                ["cuts", rest @ ..] => {
                    let t = m.tables.last_mut().ok_or_else(|| bad(i, "cuts outside table"))?;
                    t.cuts = Some(rest.iter().map(|x| num(i, x)).collect::<Result<_>>()?);
                }
                ["p", c, value, p] => {
                    let c = m
                        .classes
                        .iter()
                        .position(|x| x == c)
                        .ok_or_else(|| bad(i, "unknown class"))?;
                    let p = num(i, p)?;
                    let t = m.tables.last_mut().ok_or_else(|| bad(i, "row outside table"))?;
                    if c == 0 {
                        t.values.push(value.to_string());
                    }
                    t.probs[c].push(p);
                }
                [""] => {}
                _ => return Err(bad(i, "unrecognized line")),
            }
        }
        Ok(m)
    }
}

/// Fits on every node labeled at the summary time, using all attributes
/// and previously observed labels.
pub fn rbc_fit(s: &SummaryData, g: &TemporalGraph, params: &RbcParams) -> Result<RbcModel> {
    let train = TrainingSet::at(g, s);
    RbcModel::fit(s, &train, &FeatureSelection::default(), params)
}

pub fn rbc_predict(m: &RbcModel, s: &SummaryData, v: NodeId) -> Result<Posterior> {
    m.predict(s, v)
}
