//! Flat `key = value` configuration files.
//!
//! Keys are dotted (`links.theta`), values are raw strings, `#` starts a
//! comment. Parsing never stops at the first problem: every malformed line,
//! duplicate or unknown key becomes a [`Diagnostic`], and typed lookups
//! append theirs to the same list.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "base seed for every randomized step (default 0; TRC_SEED overrides)"),
    ("output.dir", "directory receiving all outputs and the manifest"),
    ("data.dir", "directory holding edges.csv, nodes.csv and labels.csv"),
    ("data.edges", "edge file, overrides data.dir/edges.csv"),
    ("data.nodes", "node attribute file, overrides data.dir/nodes.csv"),
    ("data.labels", "label file, overrides data.dir/labels.csv"),
    ("data.directed", "true to treat edges as directed (default false)"),
    ("task.kind", "static or temporal; checked against the label file"),
    ("task.target", "categorical node attribute used as the label instead of the label file"),
    ("model.name", "TVRC, TENC, UNION or WINDOW(k); exclusive with links.*/attributes.*/nodes.*"),
    ("model.theta", "link kernel parameter of TVRC and TENC, in (0, 1] (default 0.5)"),
    ("model.theta_attrs", "attribute kernel parameter of TENC, in (0, 1] (default model.theta)"),
    ("links.granularity", "union, timestep:K, window:I..J or lag:A..[B] (default union)"),
    ("links.kernel", "exponential, linear, inverse_linear or uniform (default uniform)"),
    ("links.theta", "link kernel parameter in (0, 1]"),
    ("attributes.granularity", "as links.granularity"),
    ("attributes.kernel", "as links.kernel"),
    ("attributes.theta", "as links.theta"),
    ("nodes.granularity", "as links.granularity"),
    ("nodes.kernel", "as links.kernel"),
    ("nodes.theta", "as links.theta"),
    ("kernel.orientation", "recency_corrected or as_printed (default recency_corrected)"),
    ("classifier", "rbc or rpt (default rbc)"),
    ("features.intrinsic", "all, none or a comma list of attributes (default all)"),
    ("features.relational", "all, none or a comma list of attributes (default all)"),
    ("features.labels", "true to use previously observed labels as features (default true)"),
    ("rbc.alpha", "Laplace smoothing, > 0 (default 1)"),
    ("rbc.bins", "equal-frequency bins for numeric attributes (default 4)"),
    ("rbc.weighting", "per-occurrence or normalized (default per-occurrence)"),
    ("rpt.max_depth", "maximum tree depth (default 8)"),
    ("rpt.min_leaf_weight", "minimum training weight per leaf (default 2)"),
    ("rpt.alpha", "leaf smoothing, > 0 (default 1)"),
    ("rpt.features", "comma list of source:attr:AGGREGATE[@kernel] (default derived)"),
    ("rpt.kernel_grid", "comma list of kernels for selective temporal features"),
    ("cv.thetas", "comma list of kernel parameters to select from"),
    ("cv.folds", "number of folds, >= 2 (default 4)"),
    ("cv.t", "timestep for the cv subcommand (default last timestep)"),
    ("ensemble.method", "replicate, structure_sampling, feature_transform, temporal_noise, label_permutation or algorithm_mix"),
    ("ensemble.size", "number of members (default 10)"),
    ("ensemble.weighting", "uniform or cv (default uniform)"),
    ("ensemble.theta", "structure_sampling retention decay in [0, 1) (default 0.5)"),
    ("ensemble.probs", "structure_sampling fixed retention t:p,... instead of ensemble.theta"),
    ("ensemble.noise_fraction", "temporal_noise fraction in [0, 1] (default 0.1)"),
    ("ensemble.noise_target", "attrs_across_time or links_across_time (default attrs_across_time)"),
    ("ensemble.label_fraction", "label_permutation fraction in [0, 1] (default 0.1)"),
    ("ensemble.transform", "feature_transform mode: kernel or randomize (default kernel)"),
    ("ensemble.kernel_grid", "kernels drawn by feature_transform = kernel"),
    ("ensemble.randomize_attrs", "attributes eligible for feature_transform = randomize (default all)"),
    ("ensemble.randomize_timesteps", "timesteps eligible for feature_transform = randomize (default all)"),
    ("ensemble.pool", "classifiers for algorithm_mix, e.g. rbc,rpt"),
    ("significance.attrs", "attributes to randomize (default all node attributes)"),
    ("significance.t", "prediction timestep (default last timestep)"),
    ("significance.repeats", "permutations averaged per slice (default 1)"),
    ("sweep.directions", "comma list of past_to_present, present_to_past, temporal_point (default all)"),
    ("sweep.t", "prediction timestep (default last timestep)"),
    ("stats.t", "timestep of the lag distribution (default last timestep)"),
    ("synth.nodes", "generated node count, >= 10 (default 300)"),
    ("synth.timesteps", "generated timestep count, >= 3 (default 8)"),
    ("synth.theta", "label drift rate in (0, 1) (default 0.7)"),
    ("synth.strength", "same-label linking probability in [0, 1] (default 0.8)"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub key: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(key: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
    /// Relative paths resolve against this directory.
    pub base_dir: PathBuf,
}

impl RawConfig {
    pub fn parse(text: &str, base_dir: &Path) -> (RawConfig, Vec<Diagnostic>) {
        let mut cfg = RawConfig {
            entries: BTreeMap::new(),
            base_dir: base_dir.to_path_buf(),
        };
        let mut diags = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                diags.push(Diagnostic::new(&format!("line {}", i + 1), "expected `key = value`"));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.iter().any(|(k, _)| *k == key) {
                diags.push(Diagnostic::new(key, "unknown key"));
            } else if cfg.entries.contains_key(key) {
                diags.push(Diagnostic::new(key, format!("duplicate key on line {}", i + 1)));
            } else {
                cfg.entries.insert(key.to_string(), value.to_string());
            }
        }
        (cfg, diags)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn has_prefix(&self, prefix: &str) -> Vec<&str> {
        self.entries
            .keys()
            .filter(|k| k.starts_with(prefix))
            .map(String::as_str)
            .collect()
    }
}

/// Typed lookups that record problems instead of failing.
pub struct Reader<'a> {
    pub raw: &'a RawConfig,
    pub diags: Vec<Diagnostic>,
}

impl<'a> Reader<'a> {
    pub fn new(raw: &'a RawConfig) -> Self {
        Reader {
            raw,
            diags: Vec::new(),
        }
    }

    pub fn report(&mut self, key: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic::new(key, message));
    }

    pub fn str(&self, key: &str) -> Option<&'a str> {
        self.raw.get(key)
    }

    pub fn require(&mut self, key: &str) -> Option<&'a str> {
        let v = self.str(key);
        if v.is_none() {
            self.report(key, "required");
        }
        v
    }

    pub fn parse<T>(&mut self, key: &str) -> Option<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let v = self.str(key)?;
        match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(e) => {
                self.report(key, format!("invalid value `{v}`: {}", strip_prefix(&e.to_string())));
                None
            }
        }
    }

    pub fn parse_or<T>(&mut self, key: &str, default: T) -> T
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.parse(key).unwrap_or(default)
    }

    pub fn bool_or(&mut self, key: &str, default: bool) -> bool {
        match self.str(key) {
            None => default,
            Some("true") => true,
            Some("false") => false,
            Some(v) => {
                self.report(key, format!("invalid value `{v}`: expected true or false"));
                default
            }
        }
    }

    /// A real in an interval written as e.g. `(0, 1]`; out-of-range values
    /// are reported with the interval and replaced by `default`.
    pub fn real_in(&mut self, key: &str, default: f64, lo: f64, hi: f64, closed: (bool, bool)) -> f64 {
        let Some(x) = self.parse::<f64>(key) else {
            return default;
        };
        let above = if closed.0 { x >= lo } else { x > lo };
        let below = if closed.1 { x <= hi } else { x < hi };
        if above && below {
            x
        } else {
            let interval = format!(
                "{}{lo}, {hi}{}",
                if closed.0 { '[' } else { '(' },
                if closed.1 { ']' } else { ')' }
            );
            self.report(key, format!("{x} is outside the valid interval {interval}"));
            default
        }
    }

    pub fn theta(&mut self, key: &str, default: f64) -> f64 {
        self.real_in(key, default, 0.0, 1.0, (false, true))
    }

    pub fn list(&mut self, key: &str) -> Option<Vec<String>> {
        let v = self.str(key)?;
        Some(
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect(),
        )
    }

    pub fn parse_list<T>(&mut self, key: &str) -> Option<Vec<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let items = self.list(key)?;
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item.parse::<T>() {
                Ok(x) => out.push(x),
                Err(e) => {
                    self.report(key, format!("invalid item `{item}`: {}", strip_prefix(&e.to_string())));
                    return None;
                }
            }
        }
        Some(out)
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.str(key).map(|p| self.raw.base_dir.join(p))
    }
}

/// Drops the `config error: ` prefix core errors carry.
pub fn strip_prefix(message: &str) -> &str {
    message.strip_prefix("config error: ").unwrap_or(message)
}

/// Markdown table of [`KEYS`].
pub fn key_table() -> String {
    let mut out = String::from("| key | meaning |\n|---|---|\n");
    for (k, d) in KEYS {
        out += &format!("| `{k}` | {d} |\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_collects_every_problem() {
        let text = "# comment\nseed = 3\nlinks.theta = 1.5 # trailing\nbogus = 1\nnot a pair\nseed = 4\n";
        let (raw, diags) = RawConfig::parse(text, Path::new("/tmp"));
        assert_eq!(raw.get("seed"), Some("3"));
        let keys: Vec<&str> = diags.iter().map(|d| d.key.as_str()).collect();
        assert_eq!(keys, ["bogus", "line 5", "seed"]);
        let mut r = Reader::new(&raw);
        assert_eq!(r.theta("links.theta", 0.5), 0.5);
        assert_eq!(
            r.diags[0].to_string(),
            "links.theta: 1.5 is outside the valid interval (0, 1]"
        );
    }

    #[test]
    fn typed_lists_and_paths() {
        let (raw, _) = RawConfig::parse("cv.thetas = 0.1, 0.5,\ndata.dir = d\n", Path::new("/base"));
        let mut r = Reader::new(&raw);
        assert_eq!(r.parse_list::<f64>("cv.thetas"), Some(vec![0.1, 0.5]));
        assert_eq!(r.path("data.dir"), Some(PathBuf::from("/base/d")));
        assert!(r.diags.is_empty());
    }
}
