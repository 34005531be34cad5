//! JSON system configurations: parsing, validation, and emission.
//!
//! A configuration names its kind (`cplifs` or `gdifs`) and carries either
//! piecewise-linear maps (breakpoints, slopes, anchor translation) or a
//! vertex count plus edge similarities with 1-based `from`/`to`. Every
//! number may be a plain JSON number or a rational string like `"1/3"`; a
//! piecewise-linear config whose numbers are all rational strings can
//! drive the exact separation scanner. Emitting a parsed config and
//! parsing the output reproduces it exactly, number forms included.

use std::fmt;

use cplifs::gdifs::{validate_gdifs, Edge, Gdifs};
use cplifs::generated::exact_piece_maps;
use cplifs::pwl::{Cplifs, PiecewiseLinearMap};
use cplifs::rational::Rational;
use serde::{Deserialize, Serialize};

/// A located configuration failure: field path plus message.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    /// Dotted path of the offending field (`maps[0].slopes[1]`), or `$`
    /// when the document itself does not parse.
    pub path: String,
    /// What went wrong there.
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

/// One numeric entry: a float, or a rational string kept exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigNumber {
    /// Plain JSON number.
    Float(f64),
    /// Rational string: `"p/q"` or a finite decimal such as `"0.25"`.
    Exact(String),
}

impl ConfigNumber {
    /// The float value; exact entries are parsed and rounded.
    pub fn value(&self, path: &str) -> Result<f64, ConfigError> {
        match self {
            ConfigNumber::Float(x) if x.is_finite() => Ok(*x),
            ConfigNumber::Float(x) => Err(ConfigError::new(path, format!("{x} is not finite"))),
            ConfigNumber::Exact(s) => Ok(Rational::parse(s)
                .map_err(|e| ConfigError::new(path, e))?
                .to_f64()),
        }
    }

    /// The exact value when this entry is a rational string, `None` for a
    /// float.
    pub fn rational(&self, path: &str) -> Result<Option<Rational>, ConfigError> {
        match self {
            ConfigNumber::Float(_) => Ok(None),
            ConfigNumber::Exact(s) => Rational::parse(s)
                .map(Some)
                .map_err(|e| ConfigError::new(path, e)),
        }
    }
}

/// Optional knobs a config may carry for any subcommand.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct Settings {
    /// Seed for randomized routines.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Enumeration budget (the `IFLAB_BUDGET` environment variable wins).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Numeric tolerance where a subcommand takes one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl Settings {
    /// True when every knob is unset; such blocks are not emitted.
    pub fn is_default(&self) -> bool {
        *self == Settings::default()
    }
}

/// One piecewise-linear map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapConfig {
    /// Strictly increasing breakpoints; empty (or omitted) for an affine
    /// map.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breakpoints: Vec<ConfigNumber>,
    /// One slope per piece: breakpoint count plus one.
    pub slopes: Vec<ConfigNumber>,
    /// Translation of the piece containing zero.
    pub tau: ConfigNumber,
}

/// One edge similarity of a graph-directed system, endpoints 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeConfig {
    /// Source vertex, 1-based.
    pub from: usize,
    /// Target vertex, 1-based.
    pub to: usize,
    /// Contraction ratio, nonzero with modulus below one.
    pub r: ConfigNumber,
    /// Translation.
    pub t: ConfigNumber,
}

/// A parsed system description of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SystemConfig {
    /// Piecewise-linear system.
    Cplifs {
        /// The maps.
        maps: Vec<MapConfig>,
        /// Optional knobs.
        #[serde(default, skip_serializing_if = "Settings::is_default")]
        settings: Settings,
    },
    /// Graph-directed system.
    Gdifs {
        /// Number of vertices.
        #[serde(rename = "vertexCount")]
        vertex_count: usize,
        /// Edge similarities.
        edges: Vec<EdgeConfig>,
        /// Optional knobs.
        #[serde(default, skip_serializing_if = "Settings::is_default")]
        settings: Settings,
    },
}

impl SystemConfig {
    /// Parses a JSON document and validates it structurally: the described
    /// system must actually build.
    pub fn parse(text: &str) -> Result<SystemConfig, ConfigError> {
        let cfg: SystemConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::new("$", e))?;
        match &cfg {
            SystemConfig::Cplifs { .. } => {
                cfg.to_cplifs()?;
            }
            SystemConfig::Gdifs { .. } => {
                cfg.to_gdifs()?;
            }
        }
        Ok(cfg)
    }

    /// The kind tag as text.
    pub fn kind(&self) -> &'static str {
        match self {
            SystemConfig::Cplifs { .. } => "cplifs",
            SystemConfig::Gdifs { .. } => "gdifs",
        }
    }

    /// The settings block (default when the document omitted it).
    pub fn settings(&self) -> &Settings {
        match self {
            SystemConfig::Cplifs { settings, .. } => settings,
            SystemConfig::Gdifs { settings, .. } => settings,
        }
    }

    /// Builds the piecewise-linear system.
    ///
    /// Errors with a located message when the kind is `gdifs` or any field
    /// is invalid.
    pub fn to_cplifs(&self) -> Result<Cplifs, ConfigError> {
        let SystemConfig::Cplifs { maps, .. } = self else {
            return Err(ConfigError::new(
                "kind",
                "this operation needs a piecewise-linear (kind \"cplifs\") config",
            ));
        };
        if maps.is_empty() {
            return Err(ConfigError::new("maps", "a system needs at least one map"));
        }
        let mut built = Vec::with_capacity(maps.len());
        for (k, m) in maps.iter().enumerate() {
            let bps = numbers(&m.breakpoints, &format!("maps[{k}].breakpoints"))?;
            let slopes = numbers(&m.slopes, &format!("maps[{k}].slopes"))?;
            let tau = m.tau.value(&format!("maps[{k}].tau"))?;
            built.push(
                PiecewiseLinearMap::new(bps, slopes, tau)
                    .map_err(|e| ConfigError::new(format!("maps[{k}]"), e))?,
            );
        }
        Cplifs::new(built).map_err(|e| ConfigError::new("maps", e))
    }

    /// Exact similarity pieces of the generated system, in block order,
    /// when every map number is a rational string; `None` as soon as any
    /// number is a float.
    pub fn exact_similarities(&self) -> Result<Option<Vec<(Rational, Rational)>>, ConfigError> {
        let SystemConfig::Cplifs { maps, .. } = self else {
            return Err(ConfigError::new(
                "kind",
                "exact pieces need a piecewise-linear (kind \"cplifs\") config",
            ));
        };
        let mut tv = Vec::with_capacity(maps.len());
        let mut bps = Vec::new();
        let mut taus = Vec::new();
        let mut slopes = Vec::new();
        for (k, m) in maps.iter().enumerate() {
            tv.push(m.breakpoints.len());
            for (j, b) in m.breakpoints.iter().enumerate() {
                match b.rational(&format!("maps[{k}].breakpoints[{j}]"))? {
                    Some(x) => bps.push(x),
                    None => return Ok(None),
                }
            }
            for (j, s) in m.slopes.iter().enumerate() {
                match s.rational(&format!("maps[{k}].slopes[{j}]"))? {
                    Some(x) => slopes.push(x),
                    None => return Ok(None),
                }
            }
            match m.tau.rational(&format!("maps[{k}].tau"))? {
                Some(x) => taus.push(x),
                None => return Ok(None),
            }
        }
        exact_piece_maps(&tv, &bps, &taus, &slopes)
            .map(Some)
            .map_err(|e| ConfigError::new("maps", e))
    }

    /// Builds the graph-directed system, converting 1-based endpoints and
    /// checking strong connectivity.
    pub fn to_gdifs(&self) -> Result<Gdifs, ConfigError> {
        let SystemConfig::Gdifs {
            vertex_count,
            edges,
            ..
        } = self
        else {
            return Err(ConfigError::new(
                "kind",
                "this operation needs a graph-directed (kind \"gdifs\") config",
            ));
        };
        if *vertex_count == 0 {
            return Err(ConfigError::new(
                "vertexCount",
                "a graph needs at least one vertex",
            ));
        }
        let mut built = Vec::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            for (field, v) in [("from", e.from), ("to", e.to)] {
                if v == 0 || v > *vertex_count {
                    return Err(ConfigError::new(
                        format!("edges[{i}].{field}"),
                        format!("vertex {v} outside 1..={vertex_count}"),
                    ));
                }
            }
            built.push(Edge {
                source: e.from - 1,
                target: e.to - 1,
                r: e.r.value(&format!("edges[{i}].r"))?,
                t: e.t.value(&format!("edges[{i}].t"))?,
            });
        }
        let g = Gdifs::new(*vertex_count, built).map_err(|e| ConfigError::new("edges", e))?;
        validate_gdifs(&g).map_err(|e| ConfigError::new("edges", e))?;
        Ok(g)
    }

    /// Serializes back to pretty JSON, newline terminated; parsing the
    /// output reproduces this config exactly.
    pub fn emit(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

/// Resolves a list of config numbers with indexed error paths.
fn numbers(list: &[ConfigNumber], path: &str) -> Result<Vec<f64>, ConfigError> {
    list.iter()
        .enumerate()
        .map(|(j, n)| n.value(&format!("{path}[{j}]")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const THIRDS: &str = r#"{
        "kind": "cplifs",
        "maps": [
            {"slopes": [0.3333333333333333], "tau": 0.0},
            {"slopes": [0.3333333333333333], "tau": 0.6666666666666666}
        ]
    }"#;

    #[test]
    fn affine_pair_parses_and_builds() {
        let cfg = SystemConfig::parse(THIRDS).unwrap();
        assert_eq!(cfg.kind(), "cplifs");
        let sys = cfg.to_cplifs().unwrap();
        assert_eq!(sys.len(), 2);
        assert!(cfg.exact_similarities().unwrap().is_none());
    }

    #[test]
    fn rational_strings_activate_the_exact_form() {
        let text = r#"{
            "kind": "cplifs",
            "maps": [
                {"slopes": ["1/3"], "tau": "0"},
                {"slopes": ["1/3"], "tau": "2/3"}
            ]
        }"#;
        let cfg = SystemConfig::parse(text).unwrap();
        let pieces = cfg.exact_similarities().unwrap().unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].0, Rational::new(1, 3).unwrap());
        assert_eq!(pieces[1].1, Rational::new(2, 3).unwrap());
        // One float anywhere demotes the whole config to float mode.
        let mixed = text.replace("\"2/3\"", "0.6666666666666666");
        let cfg = SystemConfig::parse(&mixed).unwrap();
        assert!(cfg.exact_similarities().unwrap().is_none());
    }

    #[test]
    fn adjacent_equal_slopes_report_the_offending_map() {
        let text = r#"{
            "kind": "cplifs",
            "maps": [{"breakpoints": [0.5], "slopes": [0.3, 0.3], "tau": 0.1}]
        }"#;
        let err = SystemConfig::parse(text).unwrap_err();
        assert_eq!(err.path, "maps[0]");
        assert!(err.message.contains("adjacent"), "{}", err.message);
    }

    #[test]
    fn unparseable_rational_strings_are_located() {
        let text = r#"{
            "kind": "cplifs",
            "maps": [{"slopes": ["1/3", "third"], "tau": 0.0},
                     {"slopes": [0.25], "tau": 0.5}]
        }"#;
        let err = SystemConfig::parse(text).unwrap_err();
        assert_eq!(err.path, "maps[0].slopes[1]");
    }

    #[test]
    fn graph_configs_convert_their_one_based_endpoints() {
        let text = r#"{
            "kind": "gdifs",
            "vertexCount": 2,
            "edges": [
                {"from": 1, "to": 1, "r": 0.5, "t": 0.0},
                {"from": 1, "to": 2, "r": 0.25, "t": 0.5},
                {"from": 2, "to": 1, "r": 0.3333333333333333, "t": 0.25}
            ]
        }"#;
        let cfg = SystemConfig::parse(text).unwrap();
        let g = cfg.to_gdifs().unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges()[1].source, 0);
        assert_eq!(g.edges()[1].target, 1);
    }

    #[test]
    fn disconnected_graphs_are_rejected() {
        let text = r#"{
            "kind": "gdifs",
            "vertexCount": 2,
            "edges": [
                {"from": 1, "to": 1, "r": 0.5, "t": 0.0},
                {"from": 1, "to": 2, "r": 0.25, "t": 0.5}
            ]
        }"#;
        let err = SystemConfig::parse(text).unwrap_err();
        assert_eq!(err.path, "edges");
        assert!(err.message.contains("strongly connected"), "{}", err.message);
    }

    #[test]
    fn out_of_range_endpoints_are_located() {
        let text = r#"{
            "kind": "gdifs",
            "vertexCount": 2,
            "edges": [{"from": 1, "to": 3, "r": 0.5, "t": 0.0}]
        }"#;
        let err = SystemConfig::parse(text).unwrap_err();
        assert_eq!(err.path, "edges[0].to");
    }

    #[test]
    fn emit_then_parse_is_identity() {
        for text in [
            THIRDS,
            r#"{"kind": "cplifs",
                "maps": [{"breakpoints": ["1/2"], "slopes": ["3/10", "-3/10"], "tau": "1/10"},
                         {"slopes": ["3/10"], "tau": "13/20"}],
                "settings": {"seed": 11, "budget": 50000}}"#,
            r#"{"kind": "gdifs", "vertexCount": 2,
                "edges": [{"from": 1, "to": 2, "r": 0.5, "t": 0.0},
                          {"from": 2, "to": 1, "r": -0.25, "t": "1/4"}]}"#,
        ] {
            let cfg = SystemConfig::parse(text).unwrap();
            let emitted = cfg.emit();
            let back = SystemConfig::parse(&emitted).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.emit(), emitted);
        }
    }

    #[test]
    fn wrong_kind_conversions_fail_on_the_kind_field() {
        let cfg = SystemConfig::parse(THIRDS).unwrap();
        assert_eq!(cfg.to_gdifs().unwrap_err().path, "kind");
        let graph = r#"{"kind": "gdifs", "vertexCount": 1,
                        "edges": [{"from": 1, "to": 1, "r": 0.5, "t": 0.0},
                                  {"from": 1, "to": 1, "r": 0.25, "t": 0.5}]}"#;
        let cfg = SystemConfig::parse(graph).unwrap();
        assert_eq!(cfg.to_cplifs().unwrap_err().path, "kind");
    }
}
