//! Subcommand planning and execution. Every command computes its outputs
//! in memory; nothing touches the output directory until it succeeds.

use std::path::PathBuf;

use clap::ValueEnum;
use trc_core::classifier::{ClassifierSpec, ModelSpec};
use trc_core::evaluation::{cross_validate, randomization_significance, temporal_evaluate, CvSelected, TemporalMethod};
use trc_core::format::fmt_num;
use trc_core::graph::{TemporalGraph, Timestep};
use trc_core::io::serialize_dataset;
use trc_core::mining::{autocorrelation_csv, granularity_sweep, link_probability_csv, recency_csv, SweepDirection};
use trc_core::representation::{ComponentSpec, KernelKind, Orientation};
use trc_core::synth::generate_synthetic;
use trc_core::{Error, Result};

use crate::config::{Diagnostic, RawConfig, Reader};
use crate::experiment::{read_directions, CvSection, DataSection, EnsembleSection, ModelSection, SynthSection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Evaluate,
    Cv,
    Ensemble,
    Significance,
    Sweep,
    Stats,
    Synth,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evaluate => "evaluate",
            Command::Cv => "cv",
            Command::Ensemble => "ensemble",
            Command::Significance => "significance",
            Command::Sweep => "sweep",
            Command::Stats => "stats",
            Command::Synth => "synth",
        }
    }
}

/// A validated configuration for one command.
#[derive(Debug, Clone)]
pub struct Plan {
    pub command: Command,
    pub seed: u64,
    pub output: Option<PathBuf>,
    data: Option<DataSection>,
    model: Option<ModelSection>,
    cv: Option<CvSection>,
    ensemble: Option<EnsembleSection>,
    synth: Option<SynthSection>,
    attrs: Option<Vec<String>>,
    repeats: usize,
    directions: Vec<SweepDirection>,
    t: Option<Timestep>,
}

impl Plan {
    /// Reads everything `command` needs and reports all problems at once.
    /// `seed_override` is the raw `TRC_SEED` value, if set.
    pub fn read(command: Command, raw: &RawConfig, seed_override: Option<&str>) -> std::result::Result<Plan, Vec<Diagnostic>> {
        let mut r = Reader::new(raw);
        let mut seed = r.parse_or("seed", 0u64);
        if let Some(s) = seed_override {
            match s.trim().parse() {
                Ok(s) => seed = s,
                Err(_) => r.report("TRC_SEED", format!("invalid value `{s}`: expected an unsigned integer")),
            }
        }
        let output = r.path("output.dir");
        let needs_data = command != Command::Synth;
        let data = if needs_data { DataSection::read(&mut r) } else { None };
        let model = match command {
            Command::Stats | Command::Synth => None,
            Command::Sweep => ModelSection::read(&mut r, false),
            _ => ModelSection::read(&mut r, true),
        };
        let cv = match command {
            Command::Evaluate => CvSection::read(&mut r, model.as_ref(), false),
            Command::Cv => CvSection::read(&mut r, model.as_ref(), true),
            _ => None,
        };
        let ensemble = match command {
            Command::Ensemble => EnsembleSection::read(&mut r),
            _ => None,
        };
        let synth = (command == Command::Synth).then(|| SynthSection::read(&mut r));
        let t_key = match command {
            Command::Significance => Some("significance.t"),
            Command::Sweep => Some("sweep.t"),
            Command::Stats => Some("stats.t"),
            _ => None,
        };
        let t = t_key.and_then(|k| r.parse::<Timestep>(k));
        let attrs = r.list("significance.attrs");
        let repeats = r.parse_or("significance.repeats", 1usize);
        if repeats == 0 {
            r.report("significance.repeats", "0 is outside the valid interval [1, inf)");
        }
        let directions = read_directions(&mut r);
        if !r.diags.is_empty() {
            return Err(r.diags);
        }
        Ok(Plan {
            command,
            seed,
            output,
            data,
            model,
            cv,
            ensemble,
            synth,
            attrs,
            repeats,
            directions,
            t,
        })
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        self.data.as_ref().map(DataSection::inputs).unwrap_or_default()
    }
}

/// Named output files in write order.
pub type Artifacts = Vec<(String, String)>;

fn base_spec(plan: &Plan, g: &TemporalGraph) -> Result<ModelSpec> {
    let spec = plan.model.as_ref().expect("planned").spec(None)?;
    spec.validate(g)?;
    Ok(spec)
}

fn cv_candidates(model: &ModelSection, cv: &CvSection, g: &TemporalGraph) -> Result<Vec<ModelSpec>> {
    cv.thetas
        .iter()
        .map(|&th| {
            let s = model.spec(Some(th))?;
            s.validate(g)?;
            Ok(s)
        })
        .collect()
}

pub fn execute(plan: &Plan) -> Result<Artifacts> {
    if plan.command == Command::Synth {
        let s = plan.synth.expect("planned");
        let g = generate_synthetic(s.nodes, s.timesteps, s.theta, s.strength, plan.seed)?;
        let (edges, nodes, labels) = serialize_dataset(&g);
        return Ok(vec![
            ("edges.csv".into(), edges),
            ("nodes.csv".into(), nodes),
            ("labels.csv".into(), labels),
        ]);
    }
    let g = plan.data.as_ref().expect("planned").load()?;
    let t_or_last = |t: Option<Timestep>| -> Result<Timestep> {
        let t = t.unwrap_or(g.t_max());
        g.check_range(t)?;
        Ok(t)
    };
    match plan.command {
        Command::Evaluate => {
            let spec = base_spec(plan, &g)?;
            let method: Box<dyn TemporalMethod> = match &plan.cv {
                Some(cv) => Box::new(CvSelected {
                    candidates: cv_candidates(plan.model.as_ref().unwrap(), cv, &g)?,
                    k: cv.folds,
                    seed: plan.seed,
                }),
                None => Box::new(spec),
            };
            let report = temporal_evaluate(&g, method.as_ref())?;
            Ok(vec![
                ("report.csv".into(), report.to_csv()),
                ("summary.txt".into(), report.summary()),
            ])
        }
        Command::Cv => {
            let model = plan.model.as_ref().unwrap();
            let cv = plan.cv.as_ref().expect("planned");
            base_spec(plan, &g)?;
            let t = t_or_last(cv.t)?;
            let candidates = cv_candidates(model, cv, &g)?;
            let res = cross_validate(&g, &candidates, cv.folds, t, plan.seed)?;
            let mut scores = String::from("theta,cv_auc\n");
            for (th, s) in cv.thetas.iter().zip(&res.scores) {
                scores += &format!("{},{}\n", fmt_num(*th), s.map(fmt_num).unwrap_or_default());
            }
            let best = &candidates[res.best];
            let best_conf = format!(
                "# selected by {}-fold cross-validation at t={t} among {} candidates\n{}",
                cv.folds,
                candidates.len(),
                spec_to_config(best)
            );
            Ok(vec![("scores.csv".into(), scores), ("best.conf".into(), best_conf)])
        }
        Command::Ensemble => {
            let base = base_spec(plan, &g)?;
            let spec = plan.ensemble.as_ref().expect("planned").spec(&g, base.clone(), plan.seed);
            spec.validate(&g)?;
            let report = temporal_evaluate(&g, &spec)?;
            let base_report = temporal_evaluate(&g, &base)?;
            let summary = format!(
                "{}\nbase model\n{}",
                report.summary(),
                base_report.summary()
            );
            Ok(vec![
                ("report.csv".into(), report.to_csv()),
                ("base_report.csv".into(), base_report.to_csv()),
                ("summary.txt".into(), summary),
            ])
        }
        Command::Significance => {
            let spec = base_spec(plan, &g)?;
            let attrs = plan
                .attrs
                .clone()
                .unwrap_or_else(|| g.attributes().iter().map(|a| a.name.clone()).collect());
            let t = t_or_last(plan.t)?;
            let rep = randomization_significance(&g, &spec, &attrs, t, plan.seed, plan.repeats)?;
            let summary = format!("baseline auc at t={t}: {}\n", fmt_num(rep.baseline_auc));
            Ok(vec![
                ("significance.csv".into(), rep.to_csv()),
                ("ranking.csv".into(), rep.ranking_csv()),
                ("summary.txt".into(), summary),
            ])
        }
        Command::Sweep => {
            let spec = base_spec(plan, &g)?;
            let t = t_or_last(plan.t)?;
            plan.directions
                .iter()
                .map(|&d| {
                    let r = granularity_sweep(&g, &spec, d, t)?;
                    Ok((format!("sweep_{d}.csv"), r.to_csv()))
                })
                .collect()
        }
        Command::Stats => {
            let t = t_or_last(plan.t)?;
            Ok(vec![
                ("recency.csv".into(), recency_csv(&g)?),
                ("link_probability.csv".into(), link_probability_csv(&g, t)?),
                ("autocorrelation.csv".into(), autocorrelation_csv(&g)?),
            ])
        }
        Command::Synth => unreachable!("handled above"),
    }
}

fn component_lines(name: &str, c: &ComponentSpec) -> String {
    let kind = match c.kernel.kind {
        KernelKind::Exponential => "exponential",
        KernelKind::Linear => "linear",
        KernelKind::InverseLinear => "inverse_linear",
        KernelKind::Uniform => "uniform",
    };
    let mut out = format!("{name}.granularity = {}\n{name}.kernel = {kind}\n", c.granularity);
    if c.kernel.kind != KernelKind::Uniform {
        out += &format!("{name}.theta = {}\n", fmt_num(c.kernel.theta));
    }
    out
}

/// Configuration lines reproducing `spec` with explicit components.
pub fn spec_to_config(spec: &ModelSpec) -> String {
    let r = &spec.representation;
    let mut out = component_lines("links", &r.links);
    out += &component_lines("attributes", &r.attributes);
    out += &component_lines("nodes", &r.nodes);
    let orientation = match r.links.kernel.orientation {
        Orientation::RecencyCorrected => "recency_corrected",
        Orientation::AsPrinted => "as_printed",
    };
    out += &format!("kernel.orientation = {orientation}\n");
    out += &format!("classifier = {}\n", spec.classifier.name());
    match &spec.classifier {
        ClassifierSpec::Rbc(p) => {
            out += &format!(
                "rbc.alpha = {}\nrbc.bins = {}\nrbc.weighting = {}\n",
                fmt_num(p.alpha),
                p.bins,
                p.weighting
            );
        }
        ClassifierSpec::Rpt {
            params,
            features,
            kernel_grid,
        } => {
            out += &format!(
                "rpt.max_depth = {}\nrpt.min_leaf_weight = {}\nrpt.alpha = {}\n",
                params.max_depth,
                fmt_num(params.min_leaf_weight),
                fmt_num(params.alpha)
            );
            if let Some(f) = features {
                let f: Vec<String> = f.iter().map(ToString::to_string).collect();
                out += &format!("rpt.features = {}\n", f.join(","));
            }
            if !kernel_grid.is_empty() {
                let k: Vec<String> = kernel_grid.iter().map(ToString::to_string).collect();
                out += &format!("rpt.kernel_grid = {}\n", k.join(","));
            }
        }
    }
    let side = |v: &Option<Vec<String>>| match v {
        None => "all".to_string(),
        Some(v) if v.is_empty() => "none".to_string(),
        Some(v) => v.join(","),
    };
    out += &format!(
        "features.intrinsic = {}\nfeatures.relational = {}\nfeatures.labels = {}\n",
        side(&spec.selection.intrinsic),
        side(&spec.selection.relational),
        spec.selection.use_labels
    );
    out
}

/// Exit status for a failed run: 2 for configuration problems, 3 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 3,
    }
}
