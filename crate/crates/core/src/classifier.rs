//! A representation paired with a base learner, and the fitted result.

use std::fmt;

use crate::error::Result;
use crate::graph::{NodeId, TemporalGraph, Timestep};
use crate::model::{FeatureSelection, Posterior, TrainingSet};
use crate::rbc::{RbcModel, RbcParams};
use crate::representation::{build_summary, KernelSpec, RepresentationConfig};
use crate::rpt::{
    default_feature_specs, rpt_expand_selective, FeatureContext, FeatureSpec, RptModel, RptParams,
};

/// Largest categorical domain expanded into per-value PROPORTION features
/// by the default RPT feature set.
pub const DEFAULT_MAX_VALUES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierSpec {
    Rbc(RbcParams),
    Rpt {
        params: RptParams,
        /// Explicit features; `None` derives a default set from the summary.
        features: Option<Vec<FeatureSpec>>,
        /// Kernels for selective temporal learning; empty disables it.
        kernel_grid: Vec<KernelSpec>,
    },
}

impl ClassifierSpec {
    pub fn rbc() -> Self {
        ClassifierSpec::Rbc(RbcParams::default())
    }

    pub fn rpt() -> Self {
        ClassifierSpec::Rpt {
            params: RptParams::default(),
            features: None,
            kernel_grid: Vec::new(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Rbc(_) => "rbc",
            ClassifierSpec::Rpt { .. } => "rpt",
        }
    }
}

/// Everything needed to fit one classifier at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub representation: RepresentationConfig,
    pub classifier: ClassifierSpec,
    pub selection: FeatureSelection,
}

impl ModelSpec {
    pub fn new(representation: RepresentationConfig, classifier: ClassifierSpec) -> Self {
        ModelSpec {
            representation,
            classifier,
            selection: FeatureSelection::default(),
        }
    }

    pub fn with_selection(mut self, selection: FeatureSelection) -> Self {
        self.selection = selection;
        self
    }

    pub fn validate(&self, g: &TemporalGraph) -> Result<()> {
        self.representation.validate(g)?;
        match &self.classifier {
            ClassifierSpec::Rbc(p) => p.validate(),
            ClassifierSpec::Rpt {
                params, kernel_grid, ..
            } => {
                params.validate()?;
                kernel_grid.iter().try_for_each(|k| k.validate())
            }
        }
    }

    fn rpt_specs(&self, ctx: &FeatureContext) -> Result<Vec<FeatureSpec>> {
        let ClassifierSpec::Rpt {
            features,
            kernel_grid,
            ..
        } = &self.classifier
        else {
            return Ok(Vec::new());
        };
        let base = match features {
            Some(f) => f.clone(),
            None => default_feature_specs(ctx.base(), &self.selection, DEFAULT_MAX_VALUES)?,
        };
        if kernel_grid.is_empty() {
            Ok(base)
        } else {
            rpt_expand_selective(&base, kernel_grid)
        }
    }

    /// Summaries this model reads at time `t`.
    pub fn context(&self, g: &TemporalGraph, t: Timestep) -> Result<FeatureContext> {
        let mut ctx = FeatureContext::from_summary(build_summary(g, &self.representation, t)?);
        if matches!(self.classifier, ClassifierSpec::Rpt { .. }) {
            let specs = self.rpt_specs(&ctx)?;
            ctx.add_variants(g, &self.representation, &specs)?;
        }
        Ok(ctx)
    }

    pub fn fit(&self, ctx: &FeatureContext, train: &TrainingSet) -> Result<FittedModel> {
        match &self.classifier {
            ClassifierSpec::Rbc(p) => Ok(FittedModel::Rbc(RbcModel::fit(
                ctx.base(),
                train,
                &self.selection,
                p,
            )?)),
            ClassifierSpec::Rpt { params, .. } => {
                train.check_trainable().or_else(|e| match e {
                    // a single class still yields a valid one-leaf tree
                    crate::Error::DegenerateModel(_) => Ok(()),
                    e => Err(e),
                })?;
                let specs = self.rpt_specs(ctx)?;
                Ok(FittedModel::Rpt(RptModel::fit(ctx, train, &specs, params)?))
            }
        }
    }

    /// Builds the context at `t`, then fits on every positively weighted
    /// node labeled at `t`.
    pub fn fit_at(&self, g: &TemporalGraph, t: Timestep) -> Result<FittedModel> {
        let ctx = self.context(g, t)?;
        let train = TrainingSet::at(g, ctx.base());
        self.fit(&ctx, &train)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.classifier.name(), self.representation)?;
        if let ClassifierSpec::Rpt { kernel_grid, .. } = &self.classifier {
            if !kernel_grid.is_empty() {
                let g: Vec<String> = kernel_grid.iter().map(|k| k.to_string()).collect();
                write!(f, " selective=[{}]", g.join(","))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Rbc(RbcModel),
    Rpt(RptModel),
}

impl FittedModel {
    pub fn classes(&self) -> &[String] {
        match self {
            FittedModel::Rbc(m) => &m.classes,
            FittedModel::Rpt(m) => &m.classes,
        }
    }

    pub fn prior(&self) -> Posterior {
        match self {
            FittedModel::Rbc(m) => Posterior::from_probs(&m.prior),
            FittedModel::Rpt(m) => Posterior::from_probs(&m.prior),
        }
    }

    /// Posterior for `v`; nodes without weight in the context get the prior.
    pub fn predict(&self, ctx: &FeatureContext, v: NodeId) -> Result<Posterior> {
        if ctx.base().node_weight(v) <= 0.0 {
            return Ok(self.prior());
        }
        match self {
            FittedModel::Rbc(m) => m.predict(ctx.base(), v),
            FittedModel::Rpt(m) => m.predict_node(ctx, v),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            FittedModel::Rbc(m) => m.to_text(),
            FittedModel::Rpt(m) => m.to_text(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::toy;
    use crate::representation::GranularitySpec;

    #[test]
    fn both_learners_fit_the_toy_graph() {
        let g = toy();
        for c in [ClassifierSpec::rbc(), ClassifierSpec::rpt()] {
            let spec = ModelSpec::new(RepresentationConfig::uniform(GranularitySpec::Union), c);
            spec.validate(&g).unwrap();
            let m = spec.fit_at(&g, 2).unwrap();
            let ctx = spec.context(&g, 3).unwrap();
            for v in g.nodes() {
                let p = m.predict(&ctx, v).unwrap();
                assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            assert_eq!(m.classes(), g.classes());
        }
    }

    #[test]
    fn selective_rpt_prepares_variants() {
        let g = toy();
        let spec = ModelSpec::new(
            RepresentationConfig::uniform(GranularitySpec::Union),
            ClassifierSpec::Rpt {
                params: RptParams::default(),
                features: None,
                kernel_grid: vec![KernelSpec::exponential(0.5).unwrap(), KernelSpec::uniform()],
            },
        );
        let m = spec.fit_at(&g, 3).unwrap();
        let FittedModel::Rpt(tree) = &m else { panic!() };
        assert!(tree.specs.iter().all(|f| f.kernel_variant.is_some()));
        assert!(spec.to_string().contains("selective=[exponential(0.5),uniform]"));
    }
}
