//! Temporal-relational representations.
//!
//! Each relational component (links, attributes, nodes) is restricted to a
//! temporal granularity and weighted by a temporal kernel. Materializing a
//! [`RepresentationConfig`] at a prediction timestep yields the weighted
//! [`SummaryData`] that every classifier consumes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{AttrKind, AttrValue, NodeId, TaskKind, TemporalGraph, Timestep};

/// Name of the pseudo-attribute carrying previously observed class labels.
pub const LABEL_ATTR: &str = "__label__";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelKind {
    Exponential,
    Linear,
    InverseLinear,
    Uniform,
}

/// Whether the linear kernels favour recent timesteps (`RecencyCorrected`)
/// or follow the literal formulas, which favour the oldest (`AsPrinted`).
/// The exponential and uniform kernels are the same in both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Orientation {
    #[default]
    RecencyCorrected,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Decay parameter in `(0, 1]`; ignored by the uniform kernel.
    pub theta: f64,
    pub orientation: Orientation,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, theta: f64) -> Result<Self> {
        let k = KernelSpec {
            kind,
            theta,
            orientation: Orientation::default(),
        };
        k.validate()?;
        Ok(k)
    }

    pub fn uniform() -> Self {
        KernelSpec {
            kind: KernelKind::Uniform,
            theta: 1.0,
            orientation: Orientation::default(),
        }
    }

    pub fn exponential(theta: f64) -> Result<Self> {
        Self::new(KernelKind::Exponential, theta)
    }

    pub fn linear(theta: f64) -> Result<Self> {
        Self::new(KernelKind::Linear, theta)
    }

    pub fn inverse_linear(theta: f64) -> Result<Self> {
        Self::new(KernelKind::InverseLinear, theta)
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != KernelKind::Uniform && !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config(format!(
                "kernel theta {} outside (0, 1]",
                self.theta
            )));
        }
        Ok(())
    }

    /// Identity used when deduplicating kernel grids.
    pub fn key(&self) -> (KernelKind, u64, Orientation) {
        let theta = if self.kind == KernelKind::Uniform {
            0
        } else {
            self.theta.to_bits()
        };
        (self.kind, theta, self.orientation)
    }

    /// Kernel factor for an occurrence at `t_i` seen from prediction time
    /// `t`, with `t_o` the first timestep of the dataset. The occurrence
    /// indicator is applied by the caller.
    pub fn weight(&self, t_i: Timestep, t: Timestep, t_o: Timestep) -> Result<f64> {
        self.validate()?;
        if t_i > t || t_i < t_o {
            return Err(Error::Domain(format!(
                "kernel evaluated at t_i={t_i} outside [{t_o}, {t}]"
            )));
        }
        Ok(self.weight_unchecked(t_i, t, t_o))
    }

    pub(crate) fn weight_unchecked(&self, t_i: Timestep, t: Timestep, t_o: Timestep) -> f64 {
        let theta = self.theta;
        let age = f64::from(t - t_i);
        let span = f64::from(t - t_o + 1);
        match (self.kind, self.orientation) {
            (KernelKind::Uniform, _) => 1.0,
            (KernelKind::Exponential, _) => (1.0 - theta).powi((t - t_i) as i32) * theta,
            (KernelKind::Linear, Orientation::RecencyCorrected) => {
                theta * f64::from(t_i - t_o + 1) / span
            }
            (KernelKind::Linear, Orientation::AsPrinted) => theta * (age + 1.0) / span,
            (KernelKind::InverseLinear, Orientation::RecencyCorrected) => theta / (age + 1.0),
            (KernelKind::InverseLinear, Orientation::AsPrinted) => {
                theta / f64::from(t_i - t_o + 1)
            }
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            KernelKind::Exponential => "exponential",
            KernelKind::Linear => "linear",
            KernelKind::InverseLinear => "inverse_linear",
            KernelKind::Uniform => return write!(f, "uniform"),
        };
        write!(f, "{name}({})", self.theta)?;
        if self.orientation == Orientation::AsPrinted {
            write!(f, "[as_printed]")?;
        }
        Ok(())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(KernelKind::Exponential),
            "linear" => Ok(KernelKind::Linear),
            "inverse_linear" => Ok(KernelKind::InverseLinear),
            "uniform" => Ok(KernelKind::Uniform),
            other => Err(Error::Config(format!(
                "unknown kernel `{other}` (expected exponential, linear, inverse_linear or uniform)"
            ))),
        }
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recency_corrected" => Ok(Orientation::RecencyCorrected),
            "as_printed" => Ok(Orientation::AsPrinted),
            other => Err(Error::Config(format!(
                "unknown orientation `{other}` (expected recency_corrected or as_printed)"
            ))),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// Parses the [`fmt::Display`] form, e.g. `exponential(0.5)` or
    /// `linear(0.3)[as_printed]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, orientation) = match s.strip_suffix("[as_printed]") {
            Some(b) => (b, Orientation::AsPrinted),
            None => (s, Orientation::RecencyCorrected),
        };
        if body == "uniform" {
            return Ok(KernelSpec::uniform());
        }
        let (kind, theta) = body
            .strip_suffix(')')
            .and_then(|b| b.split_once('('))
            .ok_or_else(|| Error::Config(format!("invalid kernel `{s}` (expected name(theta))")))?;
        let theta: f64 = theta
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("invalid kernel theta in `{s}`")))?;
        Ok(KernelSpec::new(kind.trim().parse()?, theta)?.with_orientation(orientation))
    }
}

pub fn kernel_weight(k: &KernelSpec, t_i: Timestep, t: Timestep, t_o: Timestep) -> Result<f64> {
    k.weight(t_i, t, t_o)
}

/// The set of timesteps a component may draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GranularitySpec {
    /// A single absolute timestep.
    Timestep(Timestep),
    /// An absolute window `start..=end`, clipped at the summary time.
    Window { start: Timestep, end: Timestep },
    /// A window relative to the summary time `t`: `t-max_lag ..= t-min_lag`.
    /// `max_lag: None` reaches back to the first timestep.
    Lag { min_lag: u32, max_lag: Option<u32> },
    /// Every timestep up to and including the summary time.
    Union,
}

impl GranularitySpec {
    pub fn window(start: Timestep, end: Timestep) -> Result<Self> {
        if start > end {
            return Err(Error::Config(format!(
                "window bounds {start}..{end} are reversed"
            )));
        }
        Ok(GranularitySpec::Window { start, end })
    }

    /// `WINDOW(k)`: the `k` timesteps preceding the summary time.
    pub fn previous(k: u32) -> Self {
        GranularitySpec::Lag {
            min_lag: 1,
            max_lag: Some(k),
        }
    }

    pub fn validate(&self, t_o: Timestep, t_max: Timestep) -> Result<()> {
        let check = |t: Timestep| {
            if t < t_o || t > t_max {
                Err(Error::Config(format!(
                    "granularity references timestep {t} outside [{t_o}, {t_max}]"
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            GranularitySpec::Timestep(k) => check(k),
            GranularitySpec::Window { start, end } => {
                if start > end {
                    return Err(Error::Config(format!(
                        "window bounds {start}..{end} are reversed"
                    )));
                }
                check(start)?;
                check(end)
            }
            GranularitySpec::Lag { min_lag, max_lag } => match max_lag {
                Some(max) if max < min_lag => Err(Error::Config(format!(
                    "lag window {min_lag}..{max} is reversed"
                ))),
                _ => Ok(()),
            },
            GranularitySpec::Union => Ok(()),
        }
    }

    /// Ordered timesteps selected at summary time `t`.
    pub fn timesteps(&self, t: Timestep, t_o: Timestep) -> Vec<Timestep> {
        match *self {
            GranularitySpec::Timestep(k) => {
                if k <= t && k >= t_o {
                    vec![k]
                } else {
                    Vec::new()
                }
            }
            GranularitySpec::Window { start, end } => (start.max(t_o)..=end.min(t)).collect(),
            GranularitySpec::Lag { min_lag, max_lag } => {
                let Some(hi) = t.checked_sub(min_lag) else {
                    return Vec::new();
                };
                let lo = match max_lag {
                    Some(m) => t.saturating_sub(m).max(t_o),
                    None => t_o,
                };
                (lo..=hi).collect()
            }
            GranularitySpec::Union => (t_o..=t).collect(),
        }
    }

    fn contains(&self, t_i: Timestep, t: Timestep, t_o: Timestep) -> bool {
        if t_i > t || t_i < t_o {
            return false;
        }
        match *self {
            GranularitySpec::Timestep(k) => t_i == k,
            GranularitySpec::Window { start, end } => t_i >= start && t_i <= end,
            GranularitySpec::Lag { min_lag, max_lag } => {
                let lag = t - t_i;
                lag >= min_lag && max_lag.is_none_or(|m| lag <= m)
            }
            GranularitySpec::Union => true,
        }
    }
}

impl fmt::Display for GranularitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GranularitySpec::Timestep(k) => write!(f, "timestep:{k}"),
            GranularitySpec::Window { start, end } => write!(f, "window:{start}..{end}"),
            GranularitySpec::Lag { min_lag, max_lag } => match max_lag {
                Some(m) => write!(f, "lag:{min_lag}..{m}"),
                None => write!(f, "lag:{min_lag}.."),
            },
            GranularitySpec::Union => write!(f, "union"),
        }
    }
}

impl FromStr for GranularitySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "invalid granularity `{s}` (expected union, timestep:K, window:I..J or lag:A..[B])"
            ))
        };
        if s == "union" {
            return Ok(GranularitySpec::Union);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "timestep" => Ok(GranularitySpec::Timestep(rest.parse().map_err(|_| bad())?)),
            "window" => {
                let (a, b) = rest.split_once("..").ok_or_else(bad)?;
                GranularitySpec::window(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
            }
            "lag" => {
                let (a, b) = rest.split_once("..").ok_or_else(bad)?;
                let min_lag = a.parse().map_err(|_| bad())?;
                let max_lag = if b.is_empty() {
                    None
                } else {
                    Some(b.parse().map_err(|_| bad())?)
                };
                if max_lag.is_some_and(|m| m < min_lag) {
                    return Err(bad());
                }
                Ok(GranularitySpec::Lag { min_lag, max_lag })
            }
            _ => Err(bad()),
        }
    }
}

pub fn granularity_timesteps(gs: &GranularitySpec, t: Timestep, t_o: Timestep) -> Vec<Timestep> {
    gs.timesteps(t, t_o)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentSpec {
    pub granularity: GranularitySpec,
    pub kernel: KernelSpec,
}

impl ComponentSpec {
    pub fn new(granularity: GranularitySpec, kernel: KernelSpec) -> Self {
        ComponentSpec {
            granularity,
            kernel,
        }
    }

    pub fn union_uniform() -> Self {
        Self::new(GranularitySpec::Union, KernelSpec::uniform())
    }

    fn weight(&self, t_i: Timestep, t: Timestep, t_o: Timestep) -> Option<f64> {
        if self.granularity.contains(t_i, t, t_o) {
            Some(self.kernel.weight_unchecked(t_i, t, t_o))
        } else {
            None
        }
    }
}

impl fmt::Display for ComponentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.granularity, self.kernel)
    }
}

/// Granularity and weighting for each relational component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentationConfig {
    pub links: ComponentSpec,
    pub attributes: ComponentSpec,
    pub nodes: ComponentSpec,
}

impl RepresentationConfig {
    pub fn uniform(granularity: GranularitySpec) -> Self {
        let c = ComponentSpec::new(granularity, KernelSpec::uniform());
        RepresentationConfig {
            links: c,
            attributes: c,
            nodes: c,
        }
    }

    pub fn validate(&self, g: &TemporalGraph) -> Result<()> {
        for (name, c) in [
            ("links", &self.links),
            ("attributes", &self.attributes),
            ("nodes", &self.nodes),
        ] {
            c.kernel
                .validate()
                .map_err(|e| Error::Config(format!("{name}.theta: {e}")))?;
            c.granularity
                .validate(g.t_min(), g.t_max())
                .map_err(|e| Error::Config(format!("{name}.granularity: {e}")))?;
        }
        Ok(())
    }

    /// Copy with the links and attributes kernels replaced.
    pub fn with_kernel(mut self, kernel: KernelSpec) -> Self {
        self.links.kernel = kernel;
        self.attributes.kernel = kernel;
        self
    }

    pub fn with_orientation(mut self, o: Orientation) -> Self {
        self.links.kernel.orientation = o;
        self.attributes.kernel.orientation = o;
        self.nodes.kernel.orientation = o;
        self
    }
}

impl fmt::Display for RepresentationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "links={} attributes={} nodes={}",
            self.links, self.attributes, self.nodes
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedModel {
    Tvrc,
    Tenc,
    Union,
    Window(u32),
}

impl FromStr for NamedModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        match upper.as_str() {
            "TVRC" => Ok(NamedModel::Tvrc),
            "TENC" => Ok(NamedModel::Tenc),
            "UNION" => Ok(NamedModel::Union),
            "WINDOW" => Ok(NamedModel::Window(1)),
            _ => {
                if let Some(k) = upper
                    .strip_prefix("WINDOW(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|k| k.parse::<u32>().ok())
                    .filter(|&k| k >= 1)
                {
                    Ok(NamedModel::Window(k))
                } else {
                    Err(Error::Config(format!(
                        "unknown model `{s}` (expected TVRC, TENC, UNION or WINDOW(k))"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for NamedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedModel::Tvrc => write!(f, "TVRC"),
            NamedModel::Tenc => write!(f, "TENC"),
            NamedModel::Union => write!(f, "UNION"),
            NamedModel::Window(k) => write!(f, "WINDOW({k})"),
        }
    }
}

pub fn named_model_config(
    name: NamedModel,
    theta_links: f64,
    theta_attrs: f64,
) -> Result<RepresentationConfig> {
    let uu = ComponentSpec::union_uniform();
    Ok(match name {
        NamedModel::Tvrc => RepresentationConfig {
            links: ComponentSpec::new(
                GranularitySpec::Union,
                KernelSpec::exponential(theta_links)?,
            ),
            attributes: uu,
            nodes: uu,
        },
        NamedModel::Tenc => RepresentationConfig {
            links: ComponentSpec::new(
                GranularitySpec::Union,
                KernelSpec::exponential(theta_links)?,
            ),
            attributes: ComponentSpec::new(
                GranularitySpec::Union,
                KernelSpec::exponential(theta_attrs)?,
            ),
            nodes: uu,
        },
        NamedModel::Union => RepresentationConfig::uniform(GranularitySpec::Union),
        NamedModel::Window(k) => RepresentationConfig::uniform(GranularitySpec::previous(k)),
    })
}

/// One weighted attribute value observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occurrence {
    pub value: AttrValue,
    pub t: Timestep,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryAttr {
    pub name: String,
    pub kind: AttrKind,
    /// Size of the categorical domain (0 for numeric attributes).
    pub domain: usize,
    /// Category names indexed by `AttrValue::Cat`.
    pub categories: Vec<String>,
    pub is_label: bool,
}

/// The weighted view of a temporal graph at prediction time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryData {
    pub t: Timestep,
    pub task: TaskKind,
    edge_weight: BTreeMap<(NodeId, NodeId), f64>,
    adjacency: Vec<Vec<(NodeId, f64)>>,
    attrs: Vec<SummaryAttr>,
    occurrences: Vec<Vec<Vec<Occurrence>>>,
    node_weight: Vec<f64>,
    directed: bool,
}

impl SummaryData {
    pub fn node_count(&self) -> usize {
        self.node_weight.len()
    }

    /// Summed kernel weight over the occurrences of the pair (order-free for
    /// undirected graphs); 0 if absent.
    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> f64 {
        let key = if self.directed { (u, v) } else { (u.min(v), u.max(v)) };
        self.edge_weight.get(&key).copied().unwrap_or(0.0)
    }

    pub fn edge_weights(&self) -> &BTreeMap<(NodeId, NodeId), f64> {
        &self.edge_weight
    }

    /// `(neighbor, edge weight)` pairs with positive weight, ordered by
    /// neighbor id.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[v.index()]
    }

    pub fn attrs(&self) -> &[SummaryAttr] {
        &self.attrs
    }

    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a.name == name)
    }

    pub fn label_attr(&self) -> Option<usize> {
        self.attrs.iter().position(|a| a.is_label)
    }

    pub fn occurrences(&self, attr: usize, v: NodeId) -> &[Occurrence] {
        &self.occurrences[attr][v.index()]
    }

    pub fn node_weight(&self, v: NodeId) -> f64 {
        self.node_weight[v.index()]
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.node_weight
    }

    /// Multiplies every attribute occurrence weight by `factor`.
    pub fn scale_attr_weights(&mut self, factor: f64) {
        for per_attr in &mut self.occurrences {
            for per_node in per_attr {
                for o in per_node {
                    o.weight *= factor;
                }
            }
        }
    }
}

/// Materializes the weighted summary of `g` at prediction time `t`.
///
/// Edge occurrences accumulate into per-pair weights by summation.
/// Attribute values keep one weight per `(value, timestep)` occurrence.
/// A node's weight is the largest node-kernel value over its active
/// timesteps in the node granularity. Previously observed labels, i.e.
/// those strictly before `t`, appear as the [`LABEL_ATTR`] pseudo-attribute.
pub fn build_summary(
    g: &TemporalGraph,
    cfg: &RepresentationConfig,
    t: Timestep,
) -> Result<SummaryData> {
    g.check_range(t)?;
    cfg.validate(g)?;
    let t_o = g.t_min();
    let n = g.node_count();

    let mut edge_weight: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    for ts in cfg.links.granularity.timesteps(t, t_o) {
        let w = cfg.links.kernel.weight_unchecked(ts, t, t_o);
        if w <= 0.0 {
            continue;
        }
        for e in &g.edges()[g.edges_at(ts)] {
            let key = if g.is_directed() {
                (e.src, e.dst)
            } else {
                (e.src.min(e.dst), e.src.max(e.dst))
            };
            *edge_weight.entry(key).or_insert(0.0) += w;
        }
    }
    let mut adjacency: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n];
    for (&(u, v), &w) in &edge_weight {
        adjacency[u.index()].push((v, w));
        if !g.is_directed() && u != v {
            adjacency[v.index()].push((u, w));
        }
    }
    for adj in &mut adjacency {
        adj.sort_by_key(|&(v, _)| v);
    }

    let mut attrs = Vec::new();
    let mut occurrences = Vec::new();
    for attr in g.attributes() {
        let mut per_node: Vec<Vec<Occurrence>> = vec![Vec::new(); n];
        for (&(v, ti), &value) in &attr.values {
            if let Some(w) = cfg.attributes.weight(ti, t, t_o) {
                if w > 0.0 {
                    per_node[v.index()].push(Occurrence {
                        value,
                        t: ti,
                        weight: w,
                    });
                }
            }
        }
        attrs.push(SummaryAttr {
            name: attr.name.clone(),
            kind: attr.kind,
            domain: attr.categories.len(),
            categories: attr.categories.clone(),
            is_label: false,
        });
        occurrences.push(per_node);
    }

    if !g.classes().is_empty() {
        let mut per_node: Vec<Vec<Occurrence>> = vec![Vec::new(); n];
        match g.labels() {
            crate::graph::Labels::Temporal(m) => {
                for (&(v, ti), &c) in m {
                    if ti >= t {
                        continue;
                    }
                    if let Some(w) = cfg.attributes.weight(ti, t, t_o) {
                        if w > 0.0 {
                            per_node[v.index()].push(Occurrence {
                                value: AttrValue::Cat(c as u32),
                                t: ti,
                                weight: w,
                            });
                        }
                    }
                }
            }
            crate::graph::Labels::Static(m) => {
                for (&v, &c) in m {
                    if let Some(seen) = g.first_seen(v).filter(|&s| s < t) {
                        per_node[v.index()].push(Occurrence {
                            value: AttrValue::Cat(c as u32),
                            t: seen,
                            weight: 1.0,
                        });
                    }
                }
            }
        }
        attrs.push(SummaryAttr {
            name: LABEL_ATTR.to_string(),
            kind: AttrKind::Categorical,
            domain: g.classes().len(),
            categories: g.classes().to_vec(),
            is_label: true,
        });
        occurrences.push(per_node);
    }

    let node_timesteps = cfg.nodes.granularity.timesteps(t, t_o);
    let node_weight = g
        .nodes()
        .map(|v| {
            let active = g.active_timesteps(v);
            node_timesteps
                .iter()
                .filter(|ts| active.contains(ts))
                .map(|&ts| cfg.nodes.kernel.weight_unchecked(ts, t, t_o))
                .fold(0.0, f64::max)
        })
        .collect();

    Ok(SummaryData {
        t,
        task: g.task(),
        edge_weight,
        adjacency,
        attrs,
        occurrences,
        node_weight,
        directed: g.is_directed(),
    })
}
