//! JSON experiment configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use ttno::dimtree::DimensionTree;
use ttno::DEFAULT_DENSE_CAP;

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Closed,
    Open,
    Synthetic,
    CompareTrees,
    Verify,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [Self::Closed, Self::Open, Self::Synthetic, Self::CompareTrees, Self::Verify];

    pub fn name(self) -> &'static str {
        match self {
            Self::Closed => "closed",
            Self::Open => "open",
            Self::Synthetic => "synthetic",
            Self::CompareTrees => "compare-trees",
            Self::Verify => "verify",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| BenchError::Usage(format!("unknown experiment {s:?}; expected closed, open, synthetic, compare-trees or verify")))
    }
}

/// Tree shape of a sweep point. Custom trees fix `d` to their leaf count.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TreeKind {
    #[default]
    Balanced,
    Degenerate,
    Custom(DimensionTree),
}

impl TreeKind {
    pub fn build(&self, d: usize) -> ttno::Result<DimensionTree> {
        match self {
            Self::Balanced => DimensionTree::balanced_binary(d),
            Self::Degenerate => DimensionTree::degenerate(d),
            Self::Custom(t) if t.leaf_count() == d => Ok(t.clone()),
            Self::Custom(t) => Err(ttno::Error::InvalidTree(format!("custom tree has {} leaves, not {d}", t.leaf_count()))),
        }
    }
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Balanced => f.write_str("balanced"),
            Self::Degenerate => f.write_str("degenerate"),
            Self::Custom(t) => write!(f, "custom:{t}"),
        }
    }
}

impl FromStr for TreeKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "balanced" => Ok(Self::Balanced),
            "degenerate" => Ok(Self::Degenerate),
            _ => match s.strip_prefix("custom:") {
                Some(text) => text
                    .parse()
                    .map(Self::Custom)
                    .map_err(|e| BenchError::Usage(format!("tree {text:?}: {e}"))),
                None => Err(BenchError::Usage(format!("unknown tree {s:?}; expected balanced, degenerate or custom:<nested list>"))),
            },
        }
    }
}

impl TryFrom<String> for TreeKind {
    type Error = BenchError;

    fn try_from(s: String) -> Result<Self, BenchError> {
        s.parse()
    }
}

impl From<TreeKind> for String {
    fn from(t: TreeKind) -> String {
        t.to_string()
    }
}

/// When to compare against the dense unstructured reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    /// Whenever the dense operator fits under the cap; silently skipped otherwise.
    #[default]
    Auto,
    /// At every point; points over the cap get an error entry.
    Always,
    Never,
}

/// Decay exponents are numbers or the string `"inf"`.
mod alpha_list {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Alpha {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        values
            .iter()
            .map(|&a| if a.is_infinite() { Alpha::Text("inf".into()) } else { Alpha::Number(a) })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Alpha>::deserialize(d)?
            .into_iter()
            .map(|a| match a {
                Alpha::Number(x) => Ok(x),
                Alpha::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
                Alpha::Text(t) => Err(D::Error::custom(format!("invalid decay exponent {t:?}"))),
            })
            .collect()
    }
}

fn default_alpha() -> Vec<f64> {
    vec![1.0]
}

fn default_epsilon() -> Vec<f64> {
    vec![1e-12]
}

fn default_omega() -> f64 {
    3.0
}

fn default_delta() -> f64 {
    -2.0
}

fn default_nu() -> f64 {
    2.0
}

fn default_cap() -> usize {
    DEFAULT_DENSE_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub d: Vec<usize>,
    #[serde(with = "alpha_list", default = "default_alpha")]
    pub alpha: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: Vec<f64>,
    /// Ignored by `compare-trees`, which always runs both standard shapes.
    #[serde(default)]
    pub tree: TreeKind,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_cap")]
    pub dense_cap: usize,
    /// Seeds the random instances of `verify`; the builders are deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub oracle: OracleMode,
    /// Fill `wall_time_ms`. Off by default so reruns give identical CSV.
    #[serde(default)]
    pub timing: bool,
    /// Per-node `k_τ` and `r_τ` CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_table: Option<PathBuf>,
    /// One HSS diagnostics CSV per sweep point and family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics_dir: Option<PathBuf>,
    /// One JSON operator file per sweep point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub save_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults of the closed-system figures: `α = 1`, `ε = 1e-12`,
    /// `Ω = 3`, `Δ = −2`, `ν = 2`, balanced tree.
    pub fn new(experiment: ExperimentKind) -> Self {
        let d = match experiment {
            ExperimentKind::Verify => vec![6],
            ExperimentKind::Open => vec![3],
            ExperimentKind::Synthetic => vec![16],
            ExperimentKind::Closed | ExperimentKind::CompareTrees => vec![8],
        };
        Self {
            experiment,
            d,
            alpha: default_alpha(),
            epsilon: default_epsilon(),
            tree: TreeKind::Balanced,
            omega: default_omega(),
            delta: default_delta(),
            nu: default_nu(),
            gamma: 0.0,
            output: None,
            dense_cap: default_cap(),
            seed: 0,
            oracle: OracleMode::Auto,
            timing: false,
            rank_table: None,
            diagnostics_dir: None,
            save_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    /// Site dimension of the configured model.
    pub fn site_dim(&self) -> usize {
        match self.experiment {
            ExperimentKind::Open => 4,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let usage = |msg: String| Err(BenchError::Usage(msg));
        if self.d.is_empty() || self.alpha.is_empty() || self.epsilon.is_empty() {
            return usage("sweep lists d, alpha and epsilon must be nonempty".into());
        }
        if let Some(&d) = self.d.iter().find(|&&d| d < 2) {
            return usage(format!("d = {d}: pairwise Hamiltonians need at least two sites"));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a >= 0.0)) {
            return usage(format!("alpha = {a}: decay exponents must be nonnegative"));
        }
        if let Some(e) = self.epsilon.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return usage(format!("epsilon = {e}: tolerances must be finite and nonnegative"));
        }
        if ![self.omega, self.delta, self.nu, self.gamma].iter().all(|x| x.is_finite()) {
            return usage("model parameters must be finite".into());
        }
        if self.dense_cap == 0 {
            return usage("dense cap must be positive".into());
        }
        if let TreeKind::Custom(t) = &self.tree {
            if self.experiment != ExperimentKind::CompareTrees {
                if let Some(&d) = self.d.iter().find(|&&d| d != t.leaf_count()) {
                    return usage(format!("custom tree {t} has {} leaves but the sweep contains d = {d}", t.leaf_count()));
                }
            }
        }
        if self.experiment == ExperimentKind::Verify {
            for &d in &self.d {
                let entries = dense_entries(self.site_dim(), d);
                if entries.is_none_or(|n| n > self.dense_cap) {
                    return usage(format!("verify at d = {d} needs a dense operator beyond the cap of {} entries", self.dense_cap));
                }
            }
        }
        Ok(())
    }
}

/// Entries of the dense `n^d × n^d` operator, `None` on overflow.
pub fn dense_entries(site_dim: usize, d: usize) -> Option<usize> {
    u32::try_from(2 * d).ok().and_then(|e| site_dim.checked_pow(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment":"closed","d":[4,6,8]}"#).unwrap();
        assert_eq!(cfg.alpha, vec![1.0]);
        assert_eq!(cfg.epsilon, vec![1e-12]);
        assert_eq!(cfg.tree, TreeKind::Balanced);
        assert_eq!((cfg.omega, cfg.delta, cfg.nu, cfg.gamma), (3.0, -2.0, 2.0, 0.0));
        assert_eq!(cfg.dense_cap, DEFAULT_DENSE_CAP);
        cfg.validate().unwrap();
    }

    #[test]
    fn infinite_alpha_round_trips() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment":"closed","d":[8],"alpha":[0, 1.5, "inf"]}"#).unwrap();
        assert_eq!(cfg.alpha, vec![0.0, 1.5, f64::INFINITY]);
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn tree_kinds_parse() {
        assert_eq!("degenerate".parse::<TreeKind>().unwrap(), TreeKind::Degenerate);
        let custom: TreeKind = "custom:((1,2),(3,4),(5,6))".parse().unwrap();
        assert_eq!(custom.to_string(), "custom:((1,2),(3,4),(5,6))");
        assert_eq!(custom.build(6).unwrap().node(0).children().len(), 3);
        assert!(custom.build(5).is_err());
        assert!("custom:((1,3),2)".parse::<TreeKind>().is_err());
        assert!("bushy".parse::<TreeKind>().is_err());
    }

    #[test]
    fn invalid_configs_are_usage_errors() {
        let bad = [
            r#"{"experiment":"closed","d":[]}"#,
            r#"{"experiment":"closed","d":[1]}"#,
            r#"{"experiment":"closed","d":[4],"epsilon":[-1]}"#,
            r#"{"experiment":"closed","d":[4],"alpha":[-1]}"#,
            r#"{"experiment":"closed","d":[4],"alpha":["fast"]}"#,
            r#"{"experiment":"verify","d":[16]}"#,
            r#"{"experiment":"closed","d":[4,5],"tree":"custom:((1,2),(3,4))"}"#,
            r#"{"experiment":"closed","d":[4],"unknown":1}"#,
            r#"{"experiment":"sideways","d":[4]}"#,
        ];
        for text in bad {
            let result = ExperimentConfig::from_json(text).and_then(|c| c.validate());
            assert!(matches!(result, Err(BenchError::Usage(_))), "{text}");
        }
    }

    #[test]
    fn dense_entry_count() {
        assert_eq!(dense_entries(2, 12), Some(1 << 24));
        assert_eq!(dense_entries(4, 4), Some(1 << 16));
        assert_eq!(dense_entries(2, 200), None);
    }
}
