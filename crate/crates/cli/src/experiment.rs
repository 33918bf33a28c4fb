//! Typed experiment sections built from a raw configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use trc_core::classifier::{ClassifierSpec, ModelSpec};
use trc_core::ensembles::{
    EnsembleMethod, EnsembleSpec, FeatureTransform, MemberWeighting, NoiseTarget, SamplingProbs,
};
use trc_core::graph::{TaskKind, TemporalGraph, Timestep};
use trc_core::io::{ingest_dataset, IngestOptions};
use trc_core::mining::SweepDirection;
use trc_core::model::FeatureSelection;
use trc_core::rbc::{RbcParams, RelationalWeighting};
use trc_core::representation::{
    named_model_config, ComponentSpec, GranularitySpec, KernelKind, KernelSpec, NamedModel,
    Orientation, RepresentationConfig,
};
use trc_core::rpt::{FeatureSpec, RptParams};
use trc_core::{Error, Result};

use crate::config::{strip_prefix, Reader};

const COMPONENTS: [&str; 3] = ["links", "attributes", "nodes"];

#[derive(Debug, Clone)]
pub struct DataSection {
    pub edges: PathBuf,
    pub nodes: PathBuf,
    pub labels: PathBuf,
    pub directed: bool,
    pub task: Option<TaskKind>,
    pub target: Option<String>,
}

impl DataSection {
    pub fn read(r: &mut Reader) -> Option<DataSection> {
        let dir = r.path("data.dir");
        let mut file = |key: &str, name: &str| {
            let p = r.path(key).or_else(|| dir.as_ref().map(|d| d.join(name)));
            match p {
                None => {
                    r.report(key, "required (or set data.dir)");
                    None
                }
                Some(p) if !p.is_file() => {
                    r.report(key, format!("file `{}` does not exist", p.display()));
                    None
                }
                Some(p) => Some(p),
            }
        };
        let edges = file("data.edges", "edges.csv");
        let nodes = file("data.nodes", "nodes.csv");
        let labels = file("data.labels", "labels.csv");
        let directed = r.bool_or("data.directed", false);
        let task = match r.str("task.kind") {
            None => None,
            Some("static") => Some(TaskKind::Static),
            Some("temporal") => Some(TaskKind::Temporal),
            Some(v) => {
                r.report("task.kind", format!("invalid value `{v}`: expected static or temporal"));
                None
            }
        };
        let target = r.str("task.target").map(str::to_string);
        Some(DataSection {
            edges: edges?,
            nodes: nodes?,
            labels: labels?,
            directed,
            task,
            target,
        })
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        vec![self.edges.clone(), self.nodes.clone(), self.labels.clone()]
    }

    pub fn load(&self) -> Result<TemporalGraph> {
        let mut g = ingest_dataset(
            &self.edges,
            &self.nodes,
            &self.labels,
            IngestOptions {
                directed: self.directed,
            },
        )?;
        if let Some(attr) = &self.target {
            g = g.with_target_attribute(attr)?;
        }
        if let Some(kind) = self.task {
            if g.task() != kind {
                return Err(Error::Config(format!(
                    "task.kind: declared {kind:?} but the labels are {:?}",
                    g.task()
                )));
            }
        }
        Ok(g)
    }
}

#[derive(Debug, Clone)]
pub enum Representation {
    Named {
        name: NamedModel,
        theta: f64,
        theta_attrs: f64,
    },
    Explicit(RepresentationConfig),
}

#[derive(Debug, Clone)]
pub struct ModelSection {
    pub representation: Representation,
    pub orientation: Orientation,
    pub classifier: ClassifierSpec,
    pub selection: FeatureSelection,
}

fn read_component(r: &mut Reader, c: &str) -> ComponentSpec {
    let gran_key = format!("{c}.granularity");
    let kernel_key = format!("{c}.kernel");
    let theta_key = format!("{c}.theta");
    let granularity = r.parse_or(&gran_key, GranularitySpec::Union);
    let kind = r.parse_or(&kernel_key, KernelKind::Uniform);
    let kernel = if kind == KernelKind::Uniform {
        KernelSpec::uniform()
    } else {
        if r.str(&theta_key).is_none() {
            r.report(&theta_key, format!("required by {kernel_key}"));
        }
        let theta = r.theta(&theta_key, 0.5);
        KernelSpec::new(kind, theta).expect("theta validated")
    };
    ComponentSpec::new(granularity, kernel)
}

fn read_selection(r: &mut Reader) -> FeatureSelection {
    let mut side = |key: &str| match r.list(key) {
        None => None,
        Some(v) if v == ["all"] => None,
        Some(v) if v == ["none"] => Some(Vec::new()),
        Some(v) => Some(v),
    };
    let intrinsic = side("features.intrinsic");
    let relational = side("features.relational");
    FeatureSelection {
        intrinsic,
        relational,
        use_labels: r.bool_or("features.labels", true),
    }
}

fn read_classifier(r: &mut Reader, name: &str) -> Option<ClassifierSpec> {
    let check = |r: &mut Reader, key: &str, res: Result<()>| {
        if let Err(e) = res {
            r.report(key, strip_prefix(&e.to_string()).to_string());
        }
    };
    match name {
        "rbc" => {
            let d = RbcParams::default();
            let p = RbcParams {
                alpha: r.parse_or("rbc.alpha", d.alpha),
                bins: r.parse_or("rbc.bins", d.bins),
                weighting: r.parse_or::<RelationalWeighting>("rbc.weighting", d.weighting),
            };
            check(r, "rbc", p.validate());
            Some(ClassifierSpec::Rbc(p))
        }
        "rpt" => {
            let d = RptParams::default();
            let p = RptParams {
                max_depth: r.parse_or("rpt.max_depth", d.max_depth),
                min_leaf_weight: r.parse_or("rpt.min_leaf_weight", d.min_leaf_weight),
                alpha: r.parse_or("rpt.alpha", d.alpha),
            };
            check(r, "rpt", p.validate());
            Some(ClassifierSpec::Rpt {
                params: p,
                features: r.parse_list::<FeatureSpec>("rpt.features"),
                kernel_grid: r.parse_list::<KernelSpec>("rpt.kernel_grid").unwrap_or_default(),
            })
        }
        other => {
            r.report("classifier", format!("invalid value `{other}`: expected rbc or rpt"));
            None
        }
    }
}

impl ModelSection {
    /// `require_representation: false` allows neither a model name nor
    /// explicit components (the representation is then UNION).
    pub fn read(r: &mut Reader, require_representation: bool) -> Option<ModelSection> {
        let explicit: Vec<String> = COMPONENTS
            .iter()
            .flat_map(|c| r.raw.has_prefix(&format!("{c}.")))
            .map(str::to_string)
            .collect();
        let representation = match (r.str("model.name"), explicit.is_empty()) {
            (Some(_), false) => {
                r.report(
                    "model.name",
                    format!(
                        "model.name and explicit representation keys ({}) are mutually exclusive",
                        explicit.join(", ")
                    ),
                );
                // still check both halves so every problem is reported
                r.parse::<NamedModel>("model.name");
                for c in COMPONENTS {
                    read_component(r, c);
                }
                None
            }
            (Some(_), true) => {
                let name = r.parse::<NamedModel>("model.name");
                let theta = r.theta("model.theta", 0.5);
                let theta_attrs = r.theta("model.theta_attrs", theta);
                name.map(|name| Representation::Named {
                    name,
                    theta,
                    theta_attrs,
                })
            }
            (None, false) => {
                let [links, attributes, nodes] = COMPONENTS.map(|c| read_component(r, c));
                Some(Representation::Explicit(RepresentationConfig {
                    links,
                    attributes,
                    nodes,
                }))
            }
            (None, true) => {
                if require_representation {
                    r.report(
                        "model.name",
                        "either model.name or explicit links.*/attributes.*/nodes.* keys are required",
                    );
                }
                Some(Representation::Explicit(RepresentationConfig::uniform(GranularitySpec::Union)))
            }
        };
        let orientation = r.parse_or("kernel.orientation", Orientation::RecencyCorrected);
        let name = r.str("classifier").unwrap_or("rbc").to_string();
        let classifier = read_classifier(r, &name);
        let selection = read_selection(r);
        Some(ModelSection {
            representation: representation?,
            orientation,
            classifier: classifier?,
            selection,
        })
    }

    pub fn has_kernel_parameter(&self) -> bool {
        match &self.representation {
            Representation::Named { name, .. } => matches!(name, NamedModel::Tvrc | NamedModel::Tenc),
            Representation::Explicit(c) => [c.links, c.attributes, c.nodes]
                .iter()
                .any(|c| c.kernel.kind != KernelKind::Uniform),
        }
    }

    /// Model spec, with every kernel parameter replaced by `theta` if given.
    pub fn spec(&self, theta: Option<f64>) -> Result<ModelSpec> {
        let rep = match &self.representation {
            Representation::Named {
                name,
                theta: tl,
                theta_attrs: ta,
            } => named_model_config(*name, theta.unwrap_or(*tl), theta.unwrap_or(*ta))?,
            Representation::Explicit(c) => {
                let mut c = *c;
                if let Some(th) = theta {
                    for comp in [&mut c.links, &mut c.attributes, &mut c.nodes] {
                        if comp.kernel.kind != KernelKind::Uniform {
                            comp.kernel = KernelSpec::new(comp.kernel.kind, th)?;
                        }
                    }
                }
                c
            }
        };
        Ok(ModelSpec::new(rep.with_orientation(self.orientation), self.classifier.clone())
            .with_selection(self.selection.clone()))
    }
}

#[derive(Debug, Clone)]
pub struct CvSection {
    pub thetas: Vec<f64>,
    pub folds: usize,
    pub t: Option<Timestep>,
}

impl CvSection {
    pub fn read(r: &mut Reader, model: Option<&ModelSection>, required: bool) -> Option<CvSection> {
        let thetas = match r.parse_list::<f64>("cv.thetas") {
            Some(t) => t,
            None => {
                if required && r.str("cv.thetas").is_none() {
                    r.report("cv.thetas", "required");
                }
                return None;
            }
        };
        if thetas.is_empty() {
            r.report("cv.thetas", "needs at least one value");
        }
        for th in &thetas {
            if !(*th > 0.0 && *th <= 1.0) {
                r.report("cv.thetas", format!("{th} is outside the valid interval (0, 1]"));
            }
        }
        if let Some(m) = model {
            if !m.has_kernel_parameter() {
                r.report("cv.thetas", "the representation has no kernel parameter to select");
            }
        }
        let folds = r.parse_or("cv.folds", 4usize);
        if folds < 2 {
            r.report("cv.folds", format!("{folds} is outside the valid interval [2, inf)"));
        }
        Some(CvSection {
            thetas,
            folds,
            t: r.parse("cv.t"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleSection {
    pub size: usize,
    pub weighting: MemberWeighting,
    method: MethodChoice,
}

#[derive(Debug, Clone)]
enum MethodChoice {
    Ready(EnsembleMethod),
    /// Localized randomization over timesteps resolved against the graph.
    Randomize { attrs: Option<Vec<String>>, timesteps: Option<Vec<Timestep>> },
}

impl EnsembleSection {
    pub fn read(r: &mut Reader) -> Option<EnsembleSection> {
        let method = r.require("ensemble.method")?.to_string();
        let size = r.parse_or("ensemble.size", 10usize);
        if size == 0 {
            r.report("ensemble.size", "0 is outside the valid interval [1, inf)");
        }
        let weighting = match r.str("ensemble.weighting").unwrap_or("uniform") {
            "uniform" => MemberWeighting::Uniform,
            "cv" => MemberWeighting::CrossValidated,
            v => {
                r.report("ensemble.weighting", format!("invalid value `{v}`: expected uniform or cv"));
                MemberWeighting::Uniform
            }
        };
        let fraction = |r: &mut Reader, key: &str| r.real_in(key, 0.1, 0.0, 1.0, (true, true));
        let method = match method.as_str() {
            "replicate" => MethodChoice::Ready(EnsembleMethod::Replicate),
            "structure_sampling" => {
                let probs = match r.str("ensemble.probs") {
                    Some(_) => {
                        let items = r.list("ensemble.probs").unwrap_or_default();
                        let mut m = BTreeMap::new();
                        for item in items {
                            let parsed = item
                                .split_once(':')
                                .and_then(|(t, p)| Some((t.trim().parse::<Timestep>().ok()?, p.trim().parse::<f64>().ok()?)));
                            match parsed {
                                Some((t, p)) if (0.0..=1.0).contains(&p) => {
                                    m.insert(t, p);
                                }
                                _ => r.report("ensemble.probs", format!("invalid item `{item}`: expected t:p with p in [0, 1]")),
                            }
                        }
                        SamplingProbs::Fixed(m)
                    }
                    None => SamplingProbs::Recency {
                        theta: r.real_in("ensemble.theta", 0.5, 0.0, 1.0, (true, false)),
                    },
                };
                MethodChoice::Ready(EnsembleMethod::StructureSampling { probs })
            }
            "feature_transform" => match r.str("ensemble.transform").unwrap_or("kernel") {
                "kernel" => {
                    let grid = r.parse_list::<KernelSpec>("ensemble.kernel_grid");
                    if grid.as_ref().map_or(true, Vec::is_empty) && r.str("ensemble.kernel_grid").is_none() {
                        r.report("ensemble.kernel_grid", "required by ensemble.transform = kernel");
                    }
                    MethodChoice::Ready(EnsembleMethod::FeatureTransform(FeatureTransform::KernelResample {
                        grid: grid.unwrap_or_default(),
                    }))
                }
                "randomize" => MethodChoice::Randomize {
                    attrs: r.list("ensemble.randomize_attrs"),
                    timesteps: r.parse_list("ensemble.randomize_timesteps"),
                },
                v => {
                    r.report("ensemble.transform", format!("invalid value `{v}`: expected kernel or randomize"));
                    return None;
                }
            },
            "temporal_noise" => MethodChoice::Ready(EnsembleMethod::TemporalNoise {
                fraction: fraction(r, "ensemble.noise_fraction"),
                target: r.parse_or("ensemble.noise_target", NoiseTarget::AttrsAcrossTime),
            }),
            "label_permutation" => MethodChoice::Ready(EnsembleMethod::LabelPermutation {
                fraction: fraction(r, "ensemble.label_fraction"),
            }),
            "algorithm_mix" => {
                let names = r.list("ensemble.pool").unwrap_or_else(|| vec!["rbc".into(), "rpt".into()]);
                let pool: Option<Vec<ClassifierSpec>> =
                    names.iter().map(|n| read_classifier(r, n)).collect();
                MethodChoice::Ready(EnsembleMethod::AlgorithmMix { pool: pool? })
            }
            other => {
                r.report(
                    "ensemble.method",
                    format!(
                        "invalid value `{other}`: expected replicate, structure_sampling, feature_transform, temporal_noise, label_permutation or algorithm_mix"
                    ),
                );
                return None;
            }
        };
        Some(EnsembleSection {
            size,
            weighting,
            method,
        })
    }

    pub fn spec(&self, g: &TemporalGraph, base: ModelSpec, seed: u64) -> EnsembleSpec {
        let method = match &self.method {
            MethodChoice::Ready(m) => m.clone(),
            MethodChoice::Randomize { attrs, timesteps } => {
                EnsembleMethod::FeatureTransform(FeatureTransform::LocalizedRandomization {
                    timesteps: timesteps.clone().unwrap_or_else(|| g.timesteps().collect()),
                    attrs: attrs.clone(),
                })
            }
        };
        let mut spec = EnsembleSpec::new(self.size, method, base, seed);
        spec.weighting = self.weighting;
        spec
    }
}

pub fn read_directions(r: &mut Reader) -> Vec<SweepDirection> {
    r.parse_list::<SweepDirection>("sweep.directions").unwrap_or_else(|| {
        vec![
            SweepDirection::PastToPresent,
            SweepDirection::PresentToPast,
            SweepDirection::TemporalPoint,
        ]
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SynthSection {
    pub nodes: usize,
    pub timesteps: Timestep,
    pub theta: f64,
    pub strength: f64,
}

impl SynthSection {
    pub fn read(r: &mut Reader) -> SynthSection {
        let nodes = r.parse_or("synth.nodes", 300usize);
        if nodes < 10 {
            r.report("synth.nodes", format!("{nodes} is outside the valid interval [10, inf)"));
        }
        let timesteps = r.parse_or("synth.timesteps", 8);
        if timesteps < 3 {
            r.report("synth.timesteps", format!("{timesteps} is outside the valid interval [3, inf)"));
        }
        SynthSection {
            nodes,
            timesteps,
            theta: r.real_in("synth.theta", 0.7, 0.0, 1.0, (false, false)),
            strength: r.real_in("synth.strength", 0.8, 0.0, 1.0, (true, true)),
        }
    }
}
