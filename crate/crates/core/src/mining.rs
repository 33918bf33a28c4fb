//! Granularity sweeps and temporal link statistics.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::classifier::ModelSpec;
use crate::error::{Error, Result};
use crate::evaluation::evaluate_at;
use crate::format::fmt_num;
use crate::graph::{Edge, TemporalGraph, Timestep};
use crate::representation::{GranularitySpec, RepresentationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    /// Starts from the oldest timestep and extends toward the present.
    PastToPresent,
    /// Starts from the most recent timestep and extends into the past.
    PresentToPast,
    /// One timestep at a time, oldest first.
    TemporalPoint,
}

impl fmt::Display for SweepDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepDirection::PastToPresent => "past_to_present",
            SweepDirection::PresentToPast => "present_to_past",
            SweepDirection::TemporalPoint => "temporal_point",
        })
    }
}

impl FromStr for SweepDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "past_to_present" => Ok(SweepDirection::PastToPresent),
            "present_to_past" => Ok(SweepDirection::PresentToPast),
            "temporal_point" => Ok(SweepDirection::TemporalPoint),
            _ => Err(Error::Config(format!(
                "unknown sweep direction `{s}` (expected past_to_present, present_to_past or temporal_point)"
            ))),
        }
    }
}

/// One sweep window: the training-time timesteps `start..=end` and the
/// relative granularity that selects them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepWindow {
    pub start: Timestep,
    pub end: Timestep,
    pub granularity: GranularitySpec,
}

impl fmt::Display for SweepWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub direction: SweepDirection,
    pub t: Timestep,
    /// `None` marks a window whose AUC is undefined.
    pub points: Vec<(SweepWindow, Option<f64>)>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("window,auc\n");
        for (w, a) in &self.points {
            let a = a.map(fmt_num).unwrap_or_default();
            out += &format!("{w},{a}\n");
        }
        out
    }
}

/// Windows of a sweep for prediction time `t` (training time `t - 1`).
/// Each window is expressed as lags from the summary time so the training
/// and prediction summaries see windows of the same shape.
pub fn sweep_windows(direction: SweepDirection, t_o: Timestep, t: Timestep) -> Vec<SweepWindow> {
    let s = t - 1;
    let span = s - t_o;
    match direction {
        SweepDirection::PastToPresent => (0..=span)
            .rev()
            .map(|l| SweepWindow {
                start: t_o,
                end: s - l,
                granularity: GranularitySpec::Lag {
                    min_lag: l,
                    max_lag: None,
                },
            })
            .collect(),
        SweepDirection::PresentToPast => (0..=span)
            .map(|k| SweepWindow {
                start: s - k,
                end: s,
                granularity: GranularitySpec::Lag {
                    min_lag: 0,
                    max_lag: Some(k),
                },
            })
            .collect(),
        SweepDirection::TemporalPoint => (t_o..=s)
            .map(|k| SweepWindow {
                start: k,
                end: k,
                granularity: GranularitySpec::Lag {
                    min_lag: s - k,
                    max_lag: Some(s - k),
                },
            })
            .collect(),
    }
}

/// Scores the base classifier at `t` with each window of the sweep applied
/// uniformly to links, attributes and nodes.
pub fn granularity_sweep(
    g: &TemporalGraph,
    base: &ModelSpec,
    direction: SweepDirection,
    t: Timestep,
) -> Result<SweepResult> {
    g.check_range(t)?;
    if t < g.t_min() + 3 {
        return Err(Error::Config(format!(
            "sweep.t: a sweep needs at least 3 timesteps before t={t}"
        )));
    }
    let windows = sweep_windows(direction, g.t_min(), t);
    let points = windows
        .par_iter()
        .map(|w| {
            let mut spec = base.clone();
            spec.representation = RepresentationConfig::uniform(w.granularity);
            evaluate_at(g, &spec, t).map(|a| (*w, a))
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult { direction, t, points })
}

fn edges_with_lag(g: &TemporalGraph, t: Timestep) -> Result<Vec<(&Edge, Timestep)>> {
    if !g.has_creation_times() {
        return Err(Error::Config(
            "link statistics need a creation time for every node".into(),
        ));
    }
    g.check_range(t)?;
    let edges = &g.edges()[g.edges_at(t)];
    if edges.is_empty() {
        return Err(Error::Undefined(format!("no edges at t={t}")));
    }
    Ok(edges
        .iter()
        .map(|e| (e, t - g.creation_time(e.dst).expect("checked above")))
        .collect())
}

/// Fraction of links formed at `t` whose target was created at `t` or `t - 1`.
pub fn global_link_recency(g: &TemporalGraph, t: Timestep) -> Result<f64> {
    let edges = edges_with_lag(g, t)?;
    let recent = edges.iter().filter(|(_, lag)| *lag <= 1).count();
    Ok(recent as f64 / edges.len() as f64)
}

/// Distribution of `t - creation(target)` over links formed at `t`.
pub fn temporal_link_probability(g: &TemporalGraph, t: Timestep) -> Result<BTreeMap<u32, f64>> {
    let edges = edges_with_lag(g, t)?;
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for (_, lag) in &edges {
        *counts.entry(*lag).or_insert(0) += 1;
    }
    let n = edges.len() as f64;
    Ok(counts.into_iter().map(|(l, c)| (l, c as f64 / n)).collect())
}

/// Pearson correlation of the ±1-encoded labels of link endpoints, over
/// links whose target was created `lag` steps before the link. The source
/// label is read at link time, the target label at its creation time.
/// The first class in sorted order encodes as +1.
pub fn temporal_autocorrelation(g: &TemporalGraph, lag: u32) -> Result<f64> {
    if !g.has_creation_times() {
        return Err(Error::Config(
            "link statistics need a creation time for every node".into(),
        ));
    }
    let encode = |c: usize| if c == 0 { 1.0 } else { -1.0 };
    let pairs: Vec<(f64, f64)> = g
        .edges()
        .iter()
        .filter_map(|e| {
            let created = g.creation_time(e.dst)?;
            if e.t.checked_sub(created)? != lag {
                return None;
            }
            let a = g.label_at(e.src, e.t)?;
            let b = g.label_at(e.dst, created)?;
            Some((encode(a), encode(b)))
        })
        .collect();
    if pairs.len() < 2 {
        return Err(Error::Undefined(format!(
            "fewer than two labeled links at lag {lag}"
        )));
    }
    pearson(&pairs).ok_or_else(|| Error::Undefined(format!("degenerate label variance at lag {lag}")))
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    let (mx, my) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 1e-12 || syy <= 1e-12 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// `t,recency` for every timestep with links.
pub fn recency_csv(g: &TemporalGraph) -> Result<String> {
    let mut out = String::from("t,recency\n");
    for t in g.timesteps() {
        match global_link_recency(g, t) {
            Ok(r) => out += &format!("{t},{}\n", fmt_num(r)),
            Err(Error::Undefined(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `lag,prob` at time `t`.
pub fn link_probability_csv(g: &TemporalGraph, t: Timestep) -> Result<String> {
    let mut out = String::from("lag,prob\n");
    for (l, p) in temporal_link_probability(g, t)? {
        out += &format!("{l},{}\n", fmt_num(p));
    }
    Ok(out)
}

/// `lag,autocorr` for lags `0 ..= t_max - t_min`, skipping undefined lags.
pub fn autocorrelation_csv(g: &TemporalGraph) -> Result<String> {
    let mut out = String::from("lag,autocorr\n");
    for lag in 0..=g.t_max() - g.t_min() {
        match temporal_autocorrelation(g, lag) {
            Ok(r) => out += &format!("{lag},{}\n", fmt_num(r)),
            Err(Error::Undefined(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ClassifierSpec;
    use crate::graph::fixtures::toy;
    use crate::graph::GraphBuilder;
    use crate::synth::generate_synthetic;

    #[test]
    fn toy_link_statistics() {
        let g = toy();
        assert_eq!(global_link_recency(&g, 3).unwrap(), 0.5);
        assert_eq!(global_link_recency(&g, 1).unwrap(), 1.0);
        let p = temporal_link_probability(&g, 3).unwrap();
        assert_eq!(p, BTreeMap::from([(1, 0.5), (2, 0.5)]));
        for t in g.timesteps() {
            let p = temporal_link_probability(&g, t).unwrap();
            let near: f64 = p.range(0..=1).map(|(_, v)| v).sum();
            assert_eq!(near, global_link_recency(&g, t).unwrap());
        }
        assert!(recency_csv(&g).unwrap().contains("\n3,0.5\n"));
    }

    fn pair_graph(same: bool) -> TemporalGraph {
        let mut b = GraphBuilder::new();
        for (i, n) in ["a", "b", "c", "d"].iter().enumerate() {
            b.set_creation(n, 1);
            let l = if i < 2 { "x" } else { "y" };
            b.set_label(n, 1, l).unwrap();
        }
        if same {
            b.add_edge("a", "b", 1).add_edge("c", "d", 1);
        } else {
            b.add_edge("a", "c", 1).add_edge("d", "b", 1);
        }
        b.build().unwrap()
    }

    #[test]
    fn autocorrelation_extremes() {
        assert_eq!(temporal_autocorrelation(&pair_graph(true), 0).unwrap(), 1.0);
        assert_eq!(temporal_autocorrelation(&pair_graph(false), 0).unwrap(), -1.0);
        assert!(temporal_autocorrelation(&pair_graph(true), 1).is_err());
    }

    #[test]
    fn missing_creation_is_config_error() {
        let mut b = GraphBuilder::new();
        b.add_node("a").add_node("b").add_edge("a", "b", 1);
        let g = b.build().unwrap();
        assert!(matches!(global_link_recency(&g, 1), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_windows_enumerate() {
        let w = sweep_windows(SweepDirection::PastToPresent, 1, 5);
        let spans: Vec<(u32, u32)> = w.iter().map(|w| (w.start, w.end)).collect();
        assert_eq!(spans, [(1, 1), (1, 2), (1, 3), (1, 4)]);
        let w = sweep_windows(SweepDirection::PresentToPast, 1, 5);
        let spans: Vec<(u32, u32)> = w.iter().map(|w| (w.start, w.end)).collect();
        assert_eq!(spans, [(4, 4), (3, 4), (2, 4), (1, 4)]);
        let w = sweep_windows(SweepDirection::TemporalPoint, 1, 5);
        assert_eq!(w.iter().map(|w| w.start).collect::<Vec<_>>(), [1, 2, 3, 4]);
        // every window selects exactly its timesteps on both summaries
        for d in [
            SweepDirection::PastToPresent,
            SweepDirection::PresentToPast,
            SweepDirection::TemporalPoint,
        ] {
            for w in sweep_windows(d, 1, 5) {
                assert_eq!(w.granularity.timesteps(4, 1), (w.start..=w.end).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn sweep_shares_representations() {
        let g = generate_synthetic(40, 5, 0.5, 0.8, 3).unwrap();
        let base = ModelSpec::new(RepresentationConfig::uniform(GranularitySpec::Union), ClassifierSpec::rbc());
        let p2p = granularity_sweep(&g, &base, SweepDirection::PastToPresent, 5).unwrap();
        assert_eq!(p2p.points.len(), 4);
        let union = evaluate_at(&g, &base, 5).unwrap();
        assert_eq!(p2p.points.last().unwrap().1, union);
        let p2past = granularity_sweep(&g, &base, SweepDirection::PresentToPast, 5).unwrap();
        let point = granularity_sweep(&g, &base, SweepDirection::TemporalPoint, 5).unwrap();
        assert_eq!(point.points.last().unwrap().1, p2past.points[0].1);
        assert!(p2p.to_csv().starts_with("window,auc\n1..1,"));
        assert!(granularity_sweep(&g, &base, SweepDirection::PastToPresent, 3).is_err());
    }
}
