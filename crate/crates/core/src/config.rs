//! Run configuration, graph specifications, sweep ranges and the
//! config header embedded in output artifacts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::CouplingDistribution;
use crate::hypergraph::{self, Hypergraph, HypergraphError};

pub const HEADER_PREFIX: &str = "# qsg-config: ";
pub const MAX_RANGE_LEN: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid range {input:?}: {msg}")]
    Range { input: String, msg: String },
    #[error("missing config header")]
    MissingHeader,
    #[error("malformed config: {0}")]
    Json(String),
    #[error("graph kind {0:?} needs parameter {1}")]
    MissingParameter(String, &'static str),
    #[error("unknown graph kind {0:?}")]
    UnknownGraph(String),
    #[error(transparent)]
    Graph(#[from] HypergraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSpec {
    Chain { n: u32 },
    Complete { n: u32 },
    Star { n: u32 },
    PUniform { n: u32, p: u32 },
    Circulant { n: u32, offsets: Vec<u32> },
    /// Loaded from a file; the canonical edges are kept so a run replays
    /// without the file.
    Explicit {
        n: u32,
        edges: Vec<Vec<u32>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<String>,
    },
}

impl GraphSpec {
    /// Build from a kind name as used on the command line.
    pub fn from_parts(kind: &str, n: Option<u32>, p: Option<u32>, offsets: &[u32]) -> Result<Self, ConfigError> {
        let need_n = || n.ok_or_else(|| ConfigError::MissingParameter(kind.to_string(), "n"));
        Ok(match kind {
            "chain" => GraphSpec::Chain { n: need_n()? },
            "complete" => GraphSpec::Complete { n: need_n()? },
            "star" => GraphSpec::Star { n: need_n()? },
            "p-uniform" => GraphSpec::PUniform {
                n: need_n()?,
                p: p.ok_or_else(|| ConfigError::MissingParameter(kind.to_string(), "p"))?,
            },
            "circulant" => {
                if offsets.is_empty() {
                    return Err(ConfigError::MissingParameter(kind.to_string(), "offsets"));
                }
                GraphSpec::Circulant { n: need_n()?, offsets: offsets.to_vec() }
            }
            other => return Err(ConfigError::UnknownGraph(other.to_string())),
        })
    }

    pub fn from_hypergraph(g: &Hypergraph, source: Option<String>) -> Self {
        GraphSpec::Explicit { n: g.n_vertices(), edges: g.edges().to_vec(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GraphSpec::Chain { .. } => "chain",
            GraphSpec::Complete { .. } => "complete",
            GraphSpec::Star { .. } => "star",
            GraphSpec::PUniform { .. } => "p-uniform",
            GraphSpec::Circulant { .. } => "circulant",
            GraphSpec::Explicit { .. } => "explicit",
        }
    }

    pub fn n(&self) -> u32 {
        match self {
            GraphSpec::Chain { n }
            | GraphSpec::Complete { n }
            | GraphSpec::Star { n }
            | GraphSpec::PUniform { n, .. }
            | GraphSpec::Circulant { n, .. }
            | GraphSpec::Explicit { n, .. } => *n,
        }
    }

    /// Same family at another size.
    pub fn with_n(&self, n: u32) -> Self {
        let mut s = self.clone();
        match &mut s {
            GraphSpec::Chain { n: m }
            | GraphSpec::Complete { n: m }
            | GraphSpec::Star { n: m }
            | GraphSpec::PUniform { n: m, .. }
            | GraphSpec::Circulant { n: m, .. }
            | GraphSpec::Explicit { n: m, .. } => *m = n,
        }
        s
    }

    pub fn build(&self) -> Result<Hypergraph, ConfigError> {
        Ok(match self {
            GraphSpec::Chain { n } => hypergraph::cycle_chain(*n)?,
            GraphSpec::Complete { n } => hypergraph::complete_graph(*n)?,
            GraphSpec::Star { n } => hypergraph::star_graph(*n)?,
            GraphSpec::PUniform { n, p } => hypergraph::complete_p_uniform(*n, *p)?,
            GraphSpec::Circulant { n, offsets } => hypergraph::circulant(*n, offsets)?,
            GraphSpec::Explicit { n, edges, .. } => Hypergraph::new(*n, edges.clone())?,
        })
    }
}

/// Inclusive integer range `a:b:step`; `a` and `a:b` are accepted too.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeSpec {
    pub start: u32,
    pub end: u32,
    pub step: u32,
}

impl RangeSpec {
    pub fn values(&self) -> Vec<u32> {
        (self.start..=self.end).step_by(self.step as usize).collect()
    }
}

impl FromStr for RangeSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |msg: &str| ConfigError::Range { input: s.to_string(), msg: msg.to_string() };
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() > 3 {
            return Err(err("expected a:b:step"));
        }
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<u32>().map_err(|e| err(&e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let (start, end, step) = match nums.as_slice() {
            [a] => (*a, *a, 1),
            [a, b] => (*a, *b, 1),
            [a, b, c] => (*a, *b, *c),
            _ => return Err(err("empty range")),
        };
        if step == 0 {
            return Err(err("step must be positive"));
        }
        if start > end {
            return Err(err("start exceeds end"));
        }
        if ((end - start) / step) as usize >= MAX_RANGE_LEN {
            return Err(err("too many values"));
        }
        Ok(Self { start, end, step })
    }
}

impl fmt::Display for RangeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything needed to reproduce one CLI run. The output path is not part
/// of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_range: Option<RangeSpec>,
    pub dist: CouplingDistribution,
    pub samples: u64,
    pub seed: u64,
    pub k_max: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<String>,
    #[serde(default)]
    pub options: serde_json::Map<String, serde_json::Value>,
    pub format: OutputFormat,
    pub version: String,
}

impl RunConfig {
    pub fn header_line(&self) -> String {
        format!("{HEADER_PREFIX}{}", serde_json::to_string(self).expect("config serializes"))
    }
}

/// Config of an artifact: the first-line header of a CSV, or the `config`
/// member of a JSON document.
pub fn parse_artifact_config(text: &str) -> Result<RunConfig, ConfigError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(trimmed).map_err(|e| ConfigError::Json(e.to_string()))?;
        let c = v.get("config").ok_or(ConfigError::MissingHeader)?;
        return serde_json::from_value(c.clone()).map_err(|e| ConfigError::Json(e.to_string()));
    }
    let first = text.lines().next().ok_or(ConfigError::MissingHeader)?;
    let body = first.strip_prefix(HEADER_PREFIX).ok_or(ConfigError::MissingHeader)?;
    serde_json::from_str(body).map_err(|e| ConfigError::Json(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_config() -> RunConfig {
        RunConfig {
            command: "spectrum".into(),
            graph: Some(GraphSpec::Circulant { n: 8, offsets: vec![1, 2] }),
            n_range: None,
            dist: CouplingDistribution::ShiftedExponential,
            samples: 3,
            seed: 42,
            k_max: 8,
            bins: Some(50),
            lambda: None,
            law: Some("gaussian".into()),
            options: serde_json::Map::new(),
            format: OutputFormat::Csv,
            version: "0.1.0".into(),
        }
    }

    #[test]
    fn ranges() {
        assert_eq!("6:14:2".parse::<RangeSpec>().unwrap().values(), vec![6, 8, 10, 12, 14]);
        assert_eq!("5".parse::<RangeSpec>().unwrap().values(), vec![5]);
        assert_eq!("3:5".parse::<RangeSpec>().unwrap().values(), vec![3, 4, 5]);
        assert_eq!("6:13:4".parse::<RangeSpec>().unwrap().values(), vec![6, 10]);
        for bad in ["", "1:2:0", "5:3", "a:b", "1:2:3:4", "0:4000000000:1"] {
            assert!(bad.parse::<RangeSpec>().is_err(), "{bad}");
        }
        let r: RangeSpec = "2:8:3".parse().unwrap();
        assert_eq!(r.to_string().parse::<RangeSpec>().unwrap(), r);
    }

    #[test]
    fn header_round_trip() {
        let c = sample_config();
        let text = format!("{}\nbin_left,bin_right,count,density_estimate\n", c.header_line());
        assert_eq!(parse_artifact_config(&text).unwrap(), c);
        let json = serde_json::json!({ "config": c, "rows": [] }).to_string();
        assert_eq!(parse_artifact_config(&json).unwrap(), c);
        assert_eq!(parse_artifact_config("k,mean\n"), Err(ConfigError::MissingHeader));
        assert!(matches!(parse_artifact_config("# qsg-config: {"), Err(ConfigError::Json(_))));
    }

    #[test]
    fn graph_specs() {
        let s = GraphSpec::from_parts("p-uniform", Some(6), Some(3), &[]).unwrap();
        assert_eq!(s.build().unwrap().edge_count(), 20);
        assert!(GraphSpec::from_parts("p-uniform", Some(6), None, &[]).is_err());
        assert!(GraphSpec::from_parts("circulant", Some(6), None, &[]).is_err());
        assert!(GraphSpec::from_parts("torus", Some(6), None, &[]).is_err());
        assert_eq!(GraphSpec::Chain { n: 5 }.with_n(7), GraphSpec::Chain { n: 7 });
        let g = hypergraph::star_graph(4).unwrap();
        let e = GraphSpec::from_hypergraph(&g, None);
        assert_eq!(e.build().unwrap(), g);
        assert!(GraphSpec::Chain { n: 2 }.build().is_err());
    }
}
