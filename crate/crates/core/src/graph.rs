//! Immutable store for temporal attributed graphs.
//!
//! A [`TemporalGraph`] holds a fixed node set, timestamped edge occurrences,
//! time-varying node attributes, optional creation times and class labels
//! (either one label per node, or one label per node and timestep). Graphs
//! are built once through [`GraphBuilder`] and never mutated; the ensemble
//! transforms produce new graphs over the same node index space.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use crate::error::{Error, Result};

/// Discrete time unit. Datasets cover a contiguous range `[t_min, t_max]`.
pub type Timestep = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index into [`TemporalGraph::classes`].
pub type ClassId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrKind {
    Categorical,
    Numeric,
}

/// A typed attribute value. Categorical values index into the attribute's
/// sorted category list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttrValue {
    Cat(u32),
    Num(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttrKind,
    pub categories: Vec<String>,
    pub values: BTreeMap<(NodeId, Timestep), AttrValue>,
}

impl Attribute {
    pub fn category_index(&self, value: &str) -> Option<u32> {
        self.categories
            .binary_search_by(|c| c.as_str().cmp(value))
            .ok()
            .map(|i| i as u32)
    }

    pub fn render(&self, value: AttrValue) -> String {
        match value {
            AttrValue::Cat(c) => self.categories[c as usize].clone(),
            AttrValue::Num(x) => format!("{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub t: Timestep,
    pub attrs: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    /// One label per node, constant over time.
    Static,
    /// One label per node and timestep.
    Temporal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Static(BTreeMap<NodeId, ClassId>),
    Temporal(BTreeMap<(NodeId, Timestep), ClassId>),
}

impl Labels {
    pub fn task(&self) -> TaskKind {
        match self {
            Labels::Static(_) => TaskKind::Static,
            Labels::Temporal(_) => TaskKind::Temporal,
        }
    }
}

/// Edges, attribute values and active nodes at a single timestep.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: Timestep,
    /// Indices into [`TemporalGraph::edges`].
    pub active_edges: Vec<usize>,
    pub active_nodes: BTreeSet<NodeId>,
    /// `(attribute index, node, value)` triples observed at `t`.
    pub attrs_at_t: Vec<(usize, NodeId, AttrValue)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    node_names: Vec<String>,
    node_index: HashMap<String, NodeId>,
    creation: Vec<Option<Timestep>>,
    edges: Vec<Edge>,
    attrs: Vec<Attribute>,
    classes: Vec<String>,
    labels: Labels,
    t_min: Timestep,
    t_max: Timestep,
    directed: bool,
    // derived
    edge_ranges: BTreeMap<Timestep, Range<usize>>,
    incident: Vec<Vec<usize>>,
    activity: Vec<BTreeSet<Timestep>>,
}

impl TemporalGraph {
    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_names.len() as u32).map(NodeId)
    }

    pub fn node_name(&self, v: NodeId) -> &str {
        &self.node_names[v.index()]
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn node(&self, name: &str) -> Result<NodeId> {
        self.node_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode {
                location: String::new(),
                node: name.to_string(),
            })
    }

    pub fn creation_time(&self, v: NodeId) -> Option<Timestep> {
        self.creation[v.index()]
    }

    pub fn has_creation_times(&self) -> bool {
        self.creation.iter().any(Option::is_some)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attrs
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attrs.iter().find(|a| a.name == name)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, label: &str) -> Option<ClassId> {
        self.classes.iter().position(|c| c == label)
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn task(&self) -> TaskKind {
        self.labels.task()
    }

    /// Label of `v` at `t`; static labels ignore `t`.
    pub fn label_at(&self, v: NodeId, t: Timestep) -> Option<ClassId> {
        match &self.labels {
            Labels::Static(m) => m.get(&v).copied(),
            Labels::Temporal(m) => m.get(&(v, t)).copied(),
        }
    }

    pub fn t_min(&self) -> Timestep {
        self.t_min
    }

    pub fn t_max(&self) -> Timestep {
        self.t_max
    }

    pub fn timesteps(&self) -> std::ops::RangeInclusive<Timestep> {
        self.t_min..=self.t_max
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn check_range(&self, t: Timestep) -> Result<()> {
        if t < self.t_min || t > self.t_max {
            return Err(Error::Range {
                t,
                lo: self.t_min,
                hi: self.t_max,
            });
        }
        Ok(())
    }

    /// Edge indices whose occurrence timestep is `t`.
    pub fn edges_at(&self, t: Timestep) -> Range<usize> {
        self.edge_ranges.get(&t).cloned().unwrap_or(0..0)
    }

    /// Timesteps at which `v` has an edge or an attribute value.
    pub fn active_timesteps(&self, v: NodeId) -> &BTreeSet<Timestep> {
        &self.activity[v.index()]
    }

    /// Creation time if known, otherwise the first timestep of activity.
    pub fn first_seen(&self, v: NodeId) -> Option<Timestep> {
        self.creation[v.index()].or_else(|| self.activity[v.index()].first().copied())
    }

    /// Edge indices incident to `v`. For directed graphs only out-edges
    /// count as incident.
    pub fn incident_edges(&self, v: NodeId) -> &[usize] {
        &self.incident[v.index()]
    }

    /// The endpoint of edge `e` opposite to `v`.
    pub fn other_endpoint(&self, e: &Edge, v: NodeId) -> NodeId {
        if e.src == v {
            e.dst
        } else {
            e.src
        }
    }

    pub fn snapshot(&self, t: Timestep) -> Result<Snapshot> {
        self.check_range(t)?;
        let active_edges: Vec<usize> = self.edges_at(t).collect();
        let mut active_nodes = BTreeSet::new();
        for &e in &active_edges {
            active_nodes.insert(self.edges[e].src);
            active_nodes.insert(self.edges[e].dst);
        }
        let mut attrs_at_t = Vec::new();
        for (ai, attr) in self.attrs.iter().enumerate() {
            for (&(v, ti), &val) in &attr.values {
                if ti == t {
                    attrs_at_t.push((ai, v, val));
                    active_nodes.insert(v);
                }
            }
        }
        Ok(Snapshot {
            t,
            active_edges,
            active_nodes,
            attrs_at_t,
        })
    }

    /// One `(neighbor, timestep)` entry per incident edge occurrence whose
    /// timestep is in `timesteps`. Repeated edges yield repeated entries.
    pub fn neighbors(
        &self,
        v: NodeId,
        timesteps: &BTreeSet<Timestep>,
    ) -> Result<Vec<(NodeId, Timestep)>> {
        if v.index() >= self.node_names.len() {
            return Err(Error::UnknownNode {
                location: String::new(),
                node: format!("#{}", v.0),
            });
        }
        Ok(self.incident[v.index()]
            .iter()
            .map(|&e| &self.edges[e])
            .filter(|e| timesteps.contains(&e.t))
            .map(|e| (self.other_endpoint(e, v), e.t))
            .collect())
    }

    pub fn neighbors_by_name(
        &self,
        name: &str,
        timesteps: &BTreeSet<Timestep>,
    ) -> Result<Vec<(NodeId, Timestep)>> {
        self.neighbors(self.node(name)?, timesteps)
    }

    /// Replaces the class labels with the values of a categorical node
    /// attribute, which is removed from the attribute set.
    pub fn with_target_attribute(&self, name: &str) -> Result<TemporalGraph> {
        let i = self
            .attribute_index(name)
            .ok_or_else(|| Error::Config(format!("task.target: unknown attribute `{name}`")))?;
        let mut parts = self.parts();
        let attr = parts.attrs.remove(i);
        if attr.kind != AttrKind::Categorical {
            return Err(Error::Config(format!(
                "task.target: attribute `{name}` is numeric, a categorical target is required"
            )));
        }
        let labels = attr
            .values
            .iter()
            .map(|(&k, v)| match v {
                AttrValue::Cat(c) => (k, *c as ClassId),
                AttrValue::Num(_) => unreachable!("categorical attribute"),
            })
            .collect();
        parts.classes = attr.categories;
        parts.labels = Labels::Temporal(labels);
        Ok(parts.into_graph())
    }

    /// Deconstructs the graph for transforms that rebuild it over the same
    /// node index space.
    pub(crate) fn parts(&self) -> GraphParts {
        GraphParts {
            node_names: self.node_names.clone(),
            creation: self.creation.clone(),
            edges: self.edges.clone(),
            attrs: self.attrs.clone(),
            classes: self.classes.clone(),
            labels: self.labels.clone(),
            t_min: self.t_min,
            t_max: self.t_max,
            directed: self.directed,
        }
    }
}

/// Raw components of a graph. Rebuilding keeps the declared time range,
/// node ids, attribute schemas and class list unchanged.
#[derive(Debug, Clone)]
pub(crate) struct GraphParts {
    pub node_names: Vec<String>,
    pub creation: Vec<Option<Timestep>>,
    pub edges: Vec<Edge>,
    pub attrs: Vec<Attribute>,
    pub classes: Vec<String>,
    pub labels: Labels,
    pub t_min: Timestep,
    pub t_max: Timestep,
    pub directed: bool,
}

impl GraphParts {
    pub fn into_graph(self) -> TemporalGraph {
        let GraphParts {
            node_names,
            creation,
            mut edges,
            attrs,
            classes,
            labels,
            t_min,
            t_max,
            directed,
        } = self;
        edges.sort_by(|a, b| {
            (a.t, a.src, a.dst)
                .cmp(&(b.t, b.src, b.dst))
                .then_with(|| a.attrs.cmp(&b.attrs))
        });
        let n = node_names.len();
        let node_index = node_names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), NodeId(i as u32)))
            .collect();
        let mut edge_ranges: BTreeMap<Timestep, Range<usize>> = BTreeMap::new();
        let mut incident = vec![Vec::new(); n];
        let mut activity = vec![BTreeSet::new(); n];
        for (i, e) in edges.iter().enumerate() {
            edge_ranges
                .entry(e.t)
                .and_modify(|r| r.end = i + 1)
                .or_insert(i..i + 1);
            incident[e.src.index()].push(i);
            if !directed && e.dst != e.src {
                incident[e.dst.index()].push(i);
            }
            activity[e.src.index()].insert(e.t);
            activity[e.dst.index()].insert(e.t);
        }
        for attr in &attrs {
            for &(v, t) in attr.values.keys() {
                activity[v.index()].insert(t);
            }
        }
        TemporalGraph {
            node_names,
            node_index,
            creation,
            edges,
            attrs,
            classes,
            labels,
            t_min,
            t_max,
            directed,
            edge_ranges,
            incident,
            activity,
        }
    }
}

#[derive(Debug, Clone)]
enum RawLabels {
    None,
    Static(BTreeMap<String, String>),
    Temporal(BTreeMap<(String, Timestep), String>),
}

/// Accumulates nodes, edges, attributes and labels, then validates them
/// into a [`TemporalGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    nodes: BTreeSet<String>,
    creation: BTreeMap<String, Timestep>,
    edges: Vec<(String, String, Timestep, Vec<(String, String)>, String)>,
    attrs: BTreeMap<String, BTreeMap<(String, Timestep), String>>,
    labels: RawLabels,
    directed: bool,
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl GraphBuilder {
    pub fn new() -> Self {
        GraphBuilder {
            nodes: BTreeSet::new(),
            creation: BTreeMap::new(),
            edges: Vec::new(),
            attrs: BTreeMap::new(),
            labels: RawLabels::None,
            directed: false,
        }
    }

    pub fn directed(mut self, directed: bool) -> Self {
        self.directed = directed;
        self
    }

    pub fn set_directed(&mut self, directed: bool) {
        self.directed = directed;
    }

    pub fn add_node(&mut self, name: &str) -> &mut Self {
        self.nodes.insert(name.to_string());
        self
    }

    pub fn has_node(&self, name: &str) -> bool {
        self.nodes.contains(name)
    }

    pub fn set_creation(&mut self, name: &str, t: Timestep) -> &mut Self {
        self.add_node(name);
        self.creation.insert(name.to_string(), t);
        self
    }

    pub fn add_edge(&mut self, src: &str, dst: &str, t: Timestep) -> &mut Self {
        self.add_edge_with_attrs(src, dst, t, Vec::new())
    }

    pub fn add_edge_with_attrs(
        &mut self,
        src: &str,
        dst: &str,
        t: Timestep,
        attrs: Vec<(String, String)>,
    ) -> &mut Self {
        self.add_edge_at(src, dst, t, attrs, String::new())
    }

    /// Adds an edge whose validation errors will carry `location`
    /// (e.g. `"edges.csv:4: "`).
    pub(crate) fn add_edge_at(
        &mut self,
        src: &str,
        dst: &str,
        t: Timestep,
        mut attrs: Vec<(String, String)>,
        location: String,
    ) -> &mut Self {
        attrs.sort();
        self.edges
            .push((src.to_string(), dst.to_string(), t, attrs, location));
        self
    }

    pub fn set_attr(&mut self, name: &str, t: Timestep, attr: &str, value: &str) -> &mut Self {
        self.add_node(name);
        self.attrs
            .entry(attr.to_string())
            .or_default()
            .insert((name.to_string(), t), value.to_string());
        self
    }

    pub fn set_static_label(&mut self, name: &str, label: &str) -> Result<&mut Self> {
        match &mut self.labels {
            RawLabels::None => {
                self.labels = RawLabels::Static(BTreeMap::new());
            }
            RawLabels::Static(_) => {}
            RawLabels::Temporal(_) => {
                return Err(Error::Config(
                    "cannot mix static and temporal labels".into(),
                ))
            }
        }
        if let RawLabels::Static(m) = &mut self.labels {
            m.insert(name.to_string(), label.to_string());
        }
        Ok(self)
    }

    pub fn set_label(&mut self, name: &str, t: Timestep, label: &str) -> Result<&mut Self> {
        match &mut self.labels {
            RawLabels::None => {
                self.labels = RawLabels::Temporal(BTreeMap::new());
            }
            RawLabels::Temporal(_) => {}
            RawLabels::Static(_) => {
                return Err(Error::Config(
                    "cannot mix static and temporal labels".into(),
                ))
            }
        }
        if let RawLabels::Temporal(m) = &mut self.labels {
            m.insert((name.to_string(), t), label.to_string());
        }
        Ok(self)
    }

    pub fn build(self) -> Result<TemporalGraph> {
        let node_names: Vec<String> = self.nodes.iter().cloned().collect();
        let index: HashMap<&str, NodeId> = node_names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), NodeId(i as u32)))
            .collect();
        let lookup = |name: &str, location: &str| -> Result<NodeId> {
            index.get(name).copied().ok_or_else(|| Error::UnknownNode {
                location: location.to_string(),
                node: name.to_string(),
            })
        };

        let mut observed: BTreeSet<Timestep> = BTreeSet::new();
        let mut creation = vec![None; node_names.len()];
        for (name, &t) in &self.creation {
            creation[lookup(name, "")?.index()] = Some(t);
            observed.insert(t);
        }

        let mut edges = Vec::with_capacity(self.edges.len());
        for (src, dst, t, attrs, location) in self.edges {
            let lookup_end = |name: &str| index.get(name).copied();
            let (Some(s_id), Some(d_id)) = (lookup_end(&src), lookup_end(&dst)) else {
                let missing = if lookup_end(&src).is_none() { src.clone() } else { dst.clone() };
                return Err(Error::DanglingEndpoint {
                    location,
                    src,
                    dst,
                    t,
                    missing,
                });
            };
            let ends = [s_id, d_id];
            for (i, &v) in ends.iter().enumerate() {
                if let Some(created) = creation[v.index()] {
                    if t < created {
                        let node = if i == 0 { src.clone() } else { dst.clone() };
                        return Err(Error::EdgeBeforeCreation {
                            src,
                            dst,
                            t,
                            node,
                            created,
                        });
                    }
                }
            }
            observed.insert(t);
            edges.push(Edge {
                src: ends[0],
                dst: ends[1],
                t,
                attrs,
            });
        }
        validate_edge_attr_types(&edges)?;

        let mut attrs = Vec::with_capacity(self.attrs.len());
        for (name, raw) in self.attrs {
            let numeric: Vec<Option<f64>> = raw.values().map(|s| parse_numeric(s)).collect();
            let all_num = numeric.iter().all(Option::is_some);
            let any_num = numeric.iter().any(Option::is_some);
            if any_num && !all_num {
                return Err(Error::MixedAttributeType(name));
            }
            let kind = if all_num && !raw.is_empty() {
                AttrKind::Numeric
            } else {
                AttrKind::Categorical
            };
            let categories: Vec<String> = if kind == AttrKind::Categorical {
                raw.values()
                    .cloned()
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            } else {
                Vec::new()
            };
            let mut values = BTreeMap::new();
            for ((node, t), s) in &raw {
                let v = lookup(node, "")?;
                observed.insert(*t);
                let val = match kind {
                    AttrKind::Numeric => AttrValue::Num(parse_numeric(s).unwrap_or_default()),
                    AttrKind::Categorical => {
                        AttrValue::Cat(categories.binary_search(s).unwrap_or_default() as u32)
                    }
                };
                values.insert((v, *t), val);
            }
            attrs.push(Attribute {
                name,
                kind,
                categories,
                values,
            });
        }

        let (classes, labels) = match self.labels {
            RawLabels::None => (Vec::new(), Labels::Static(BTreeMap::new())),
            RawLabels::Static(m) => {
                let classes: Vec<String> = m
                    .values()
                    .cloned()
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                let mut out = BTreeMap::new();
                for (node, label) in &m {
                    let c = classes.binary_search(label).unwrap_or_default();
                    out.insert(lookup(node, "labels: ")?, c);
                }
                (classes, Labels::Static(out))
            }
            RawLabels::Temporal(m) => {
                let classes: Vec<String> = m
                    .values()
                    .cloned()
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                let mut out = BTreeMap::new();
                for ((node, t), label) in &m {
                    let c = classes.binary_search(label).unwrap_or_default();
                    observed.insert(*t);
                    out.insert((lookup(node, "labels: ")?, *t), c);
                }
                (classes, Labels::Temporal(out))
            }
        };

        let (Some(&t_min), Some(&t_max)) = (observed.first(), observed.last()) else {
            return Err(Error::Config(
                "dataset contains no timestamped observations".into(),
            ));
        };

        Ok(GraphParts {
            node_names,
            creation,
            edges,
            attrs,
            classes,
            labels,
            t_min,
            t_max,
            directed: self.directed,
        }
        .into_graph())
    }
}

pub(crate) fn parse_numeric(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

fn validate_edge_attr_types(edges: &[Edge]) -> Result<()> {
    let mut kinds: BTreeMap<&str, bool> = BTreeMap::new();
    for e in edges {
        for (k, v) in &e.attrs {
            let num = parse_numeric(v).is_some();
            match kinds.get(k.as_str()) {
                Some(&prev) if prev != num => {
                    return Err(Error::MixedAttributeType(k.clone()));
                }
                _ => {
                    kinds.insert(k, num);
                }
            }
        }
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::fixtures::toy;
    use super::*;

    #[test]
    fn target_attribute_becomes_label() {
        let g = toy();
        let h = g.with_target_attribute("topic").unwrap();
        assert_eq!(h.classes(), g.attribute("topic").unwrap().categories.as_slice());
        assert!(h.attribute("topic").is_none());
        assert_eq!(h.task(), TaskKind::Temporal);
        let a = h.node("a").unwrap();
        assert!(h.label_at(a, 1).is_some());
        assert!(g.with_target_attribute("missing").is_err());
    }

    fn ts(r: std::ops::RangeInclusive<Timestep>) -> BTreeSet<Timestep> {
        r.collect()
    }

    fn names(g: &TemporalGraph, v: &[(NodeId, Timestep)]) -> Vec<(String, Timestep)> {
        v.iter()
            .map(|&(n, t)| (g.node_name(n).to_string(), t))
            .collect()
    }

    #[test]
    fn toy_counts() {
        let g = toy();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edges().len(), 4);
        assert_eq!((g.t_min(), g.t_max()), (1, 3));
        assert_eq!(g.classes(), ["+", "-"]);
    }

    #[test]
    fn snapshot_edges() {
        let g = toy();
        let s3 = g.snapshot(3).unwrap();
        let pairs: Vec<_> = s3
            .active_edges
            .iter()
            .map(|&e| {
                let e = &g.edges()[e];
                (g.node_name(e.src), g.node_name(e.dst))
            })
            .collect();
        assert_eq!(pairs, [("a", "b"), ("c", "d")]);
        let s1 = g.snapshot(1).unwrap();
        assert_eq!(s1.active_edges.len(), 1);
        assert!(!s1.active_nodes.contains(&g.node("d").unwrap()));
        assert!(matches!(g.snapshot(4), Err(Error::Range { t: 4, .. })));
    }

    #[test]
    fn neighbor_multisets() {
        let g = toy();
        let a = g.neighbors_by_name("a", &ts(1..=3)).unwrap();
        assert_eq!(
            names(&g, &a),
            [("b".to_string(), 1), ("c".to_string(), 2), ("b".to_string(), 3)]
        );
        assert!(g.neighbors_by_name("d", &ts(1..=1)).unwrap().is_empty());
        assert_eq!(
            names(&g, &g.neighbors_by_name("a", &ts(3..=3)).unwrap()),
            [("b".to_string(), 3)]
        );
        assert!(matches!(
            g.neighbors_by_name("z", &ts(1..=3)),
            Err(Error::UnknownNode { .. })
        ));
    }

    #[test]
    fn snapshots_partition_edges() {
        let g = toy();
        let mut all: Vec<usize> = g
            .timesteps()
            .flat_map(|t| g.snapshot(t).unwrap().active_edges)
            .collect();
        all.sort();
        assert_eq!(all, (0..g.edges().len()).collect::<Vec<_>>());
        for v in g.nodes() {
            let n = g.neighbors(v, &ts(1..=3)).unwrap().len();
            assert_eq!(n, g.incident_edges(v).len());
        }
    }

    #[test]
    fn directed_neighbors_follow_out_edges() {
        let mut b = GraphBuilder::new().directed(true);
        b.add_node("p").add_node("q");
        b.add_edge("p", "q", 1);
        let g = b.build().unwrap();
        let all = ts(1..=1);
        assert_eq!(g.neighbors_by_name("p", &all).unwrap().len(), 1);
        assert!(g.neighbors_by_name("q", &all).unwrap().is_empty());
    }

    #[test]
    fn rejects_invalid_input() {
        let mut b = GraphBuilder::new();
        b.add_node("a");
        b.add_edge("a", "z", 1);
        assert!(matches!(
            b.build(),
            Err(Error::DanglingEndpoint { ref missing, .. }) if missing == "z"
        ));

        let mut b = GraphBuilder::new();
        b.set_attr("a", 1, "x", "3.5").set_attr("a", 2, "x", "high");
        assert!(matches!(b.build(), Err(Error::MixedAttributeType(ref a)) if a == "x"));

        let mut b = GraphBuilder::new();
        b.set_creation("a", 2).add_node("b");
        b.add_edge("a", "b", 1);
        assert!(matches!(b.build(), Err(Error::EdgeBeforeCreation { .. })));
    }

    #[test]
    fn degenerate_graph_has_single_timestep() {
        let mut b = GraphBuilder::new();
        b.set_attr("solo", 5, "x", "1");
        let g = b.build().unwrap();
        assert_eq!(g.edges().len(), 0);
        assert_eq!(g.t_min(), g.t_max());
        assert_eq!(g.attribute("x").unwrap().kind, AttrKind::Numeric);
    }
}
