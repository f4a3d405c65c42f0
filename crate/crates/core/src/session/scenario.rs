use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SessionError;
use crate::consensus::ConvergenceConfig;
use crate::graph::{fixtures, DirectedGraph, GraphJson, TransitionMatrix};
use crate::mesh::{AsyncConfig, HandshakeConfig, LinkModel, LinkModelJson, MeshConfig};
use crate::swarm::{read_timeseries_csv, Axis, Layout, MotionLimits, TimeSample};

/// Environment variable naming an extra directory of scenario JSON files.
pub const SCENARIO_DIR_ENV: &str = "MISAKA_SCENARIO_DIR";

pub const BUILT_IN: [&str; 6] = ["case1", "case2", "case2-repaired", "dispatch3", "dispatch3-metropolis", "wind"];

const WIND_CSV: &str = include_str!("../../../../data/fixtures/wind_generation.csv");

/// How weights are derived from the adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    RowStochastic,
    ColumnStochastic,
    Metropolis,
}

impl WeightMode {
    pub fn matrix(self, g: &DirectedGraph) -> Result<TransitionMatrix, SessionError> {
        Ok(match self {
            WeightMode::RowStochastic => TransitionMatrix::row_stochastic(g),
            WeightMode::ColumnStochastic => TransitionMatrix::column_stochastic(g),
            WeightMode::Metropolis => TransitionMatrix::metropolis(g)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Direct matrix iteration.
    #[default]
    Matrix,
    /// Message-passing agents updating in synchronous rounds.
    #[serde(alias = "lockstep")]
    MeshLockstep,
    /// Free-running message-passing agents, sampled at a fixed cadence.
    #[serde(alias = "async")]
    MeshAsync,
}

/// Everything needed to start a session or a headless run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    /// `n = 0` describes an empty table.
    pub graph: GraphJson,
    pub initial_values: Vec<f64>,
    #[serde(default)]
    pub mode: WeightMode,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub layout: Layout,
    #[serde(default = "default_links")]
    pub links: LinkModelJson,
    #[serde(default)]
    pub handshake: HandshakeConfig,
    #[serde(default, rename = "async")]
    pub async_config: AsyncConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    /// Put one messenger robot on every off-diagonal weight.
    #[serde(default)]
    pub messengers: bool,
    /// Data series shown by the time-series layout.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<TimeSample>,
    #[serde(default = "default_data_robots")]
    pub data_robots: usize,
}

fn default_links() -> LinkModelJson {
    LinkModel::ideal().to_json()
}

fn default_data_robots() -> usize {
    12
}

impl ScenarioConfig {
    fn base(name: &str, graph: &DirectedGraph, initial_values: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            graph: graph.to_json(),
            initial_values,
            mode: WeightMode::RowStochastic,
            engine: Engine::Matrix,
            layout: Layout::default(),
            links: default_links(),
            handshake: HandshakeConfig::default(),
            async_config: AsyncConfig::default(),
            seed: 0,
            convergence: ConvergenceConfig::default(),
            messengers: false,
            series: Vec::new(),
            data_robots: default_data_robots(),
        }
    }

    /// A table with no robots, waiting for nodes to be added.
    pub fn empty() -> Self {
        Self {
            name: "empty".to_string(),
            graph: GraphJson { n: 0, edges: Vec::new() },
            ..Self::base("empty", &fixtures::case1(), Vec::new())
        }
    }

    pub fn built_in(name: &str) -> Option<Self> {
        let cfg = match name {
            "case1" => Self::base(name, &fixtures::case1(), vec![1.0, 2.0, 3.0, 4.0]),
            "case2" => Self::base(name, &fixtures::case2(), (1..=10).map(f64::from).collect()),
            "case2-repaired" => Self::base(name, &fixtures::case2_repaired(), (1..=10).map(f64::from).collect()),
            "dispatch3" => Self {
                mode: WeightMode::ColumnStochastic,
                messengers: true,
                ..Self::base(name, &fixtures::dispatch3(), vec![5.0, 2.0, 1.0])
            },
            "dispatch3-metropolis" => Self {
                mode: WeightMode::Metropolis,
                ..Self::base(name, &fixtures::dispatch3().symmetrized(), vec![5.0, 2.0, 1.0])
            },
            "wind" => Self {
                layout: Layout::TimeSeries {
                    x: Axis::new([2005.0, 2019.0], [50.0, 950.0]),
                    y: Axis::new([0.0, 700.0], [100.0, 650.0]),
                },
                series: read_timeseries_csv(WIND_CSV).expect("bundled series parses"),
                ..Self::empty()
            },
            _ => return None,
        };
        Some(Self {
            name: name.to_string(),
            ..cfg
        })
    }

    pub fn from_json(text: &str) -> Result<Self, SessionError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| SessionError::Scenario(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    /// Built-in name, path to a JSON file, or `<name>.json` inside
    /// `$MISAKA_SCENARIO_DIR`.
    pub fn resolve(name_or_path: &str) -> Result<Self, SessionError> {
        if let Some(cfg) = Self::built_in(name_or_path) {
            return Ok(cfg);
        }
        let mut candidates = vec![PathBuf::from(name_or_path)];
        if let Some(dir) = std::env::var_os(SCENARIO_DIR_ENV) {
            let dir = Path::new(&dir);
            candidates.push(dir.join(name_or_path));
            candidates.push(dir.join(format!("{name_or_path}.json")));
        }
        for path in candidates {
            if path.is_file() {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| SessionError::Scenario(format!("{}: {e}", path.display())))?;
                return Self::from_json(&text);
            }
        }
        Err(SessionError::UnknownScenario(name_or_path.to_string()))
    }

    /// `None` for an empty table.
    pub fn graph(&self) -> Result<Option<DirectedGraph>, SessionError> {
        if self.graph.n == 0 {
            if !self.graph.edges.is_empty() {
                return Err(SessionError::Scenario("edges given for an empty graph".into()));
            }
            return Ok(None);
        }
        Ok(Some(DirectedGraph::from_json(&self.graph)?))
    }

    pub fn mesh_config(&self) -> Result<MeshConfig, SessionError> {
        self.handshake.validate()?;
        Ok(MeshConfig {
            links: LinkModel::from_json(&self.links)?,
            handshake: self.handshake,
            seed: self.seed,
        })
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        let graph = self.graph()?;
        let n = graph.as_ref().map_or(0, DirectedGraph::n);
        if self.initial_values.len() != n {
            return Err(SessionError::Scenario(format!(
                "{} initial values for {n} nodes",
                self.initial_values.len()
            )));
        }
        if let Some(node) = self.initial_values.iter().position(|v| !v.is_finite()) {
            return Err(SessionError::Scenario(format!("initial value of node {} is not finite", node + 1)));
        }
        if let Some(g) = &graph {
            self.mode.matrix(g)?;
        }
        self.layout.validate()?;
        let capacity = self.layout.column_capacity(&MotionLimits::default());
        if matches!(self.layout, Layout::IterationChart { .. }) && n > capacity {
            return Err(crate::swarm::SwarmError::ColumnCapacity { n, capacity }.into());
        }
        self.convergence.validate()?;
        self.mesh_config()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_ins_validate() {
        for name in BUILT_IN {
            let cfg = ScenarioConfig::built_in(name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.name, name);
        }
    }

    #[test]
    fn json_round_trip() {
        for name in BUILT_IN {
            let cfg = ScenarioConfig::built_in(name).unwrap();
            assert_eq!(ScenarioConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
    }

    #[test]
    fn minimal_json_takes_defaults() {
        let cfg = ScenarioConfig::from_json(
            r#"{"name": "pair", "graph": {"n": 2, "edges": [[1,1],[1,2],[2,1],[2,2]]}, "initial_values": [0, 4]}"#,
        )
        .unwrap();
        assert_eq!(cfg.engine, Engine::Matrix);
        assert_eq!(cfg.mode, WeightMode::RowStochastic);
        assert_eq!(cfg.convergence, ConvergenceConfig::default());
    }

    #[test]
    fn engine_aliases() {
        let e: Engine = serde_json::from_str("\"lockstep\"").unwrap();
        assert_eq!(e, Engine::MeshLockstep);
        let e: Engine = serde_json::from_str("\"mesh_async\"").unwrap();
        assert_eq!(e, Engine::MeshAsync);
    }

    #[test]
    fn rejects_wrong_value_count() {
        let mut cfg = ScenarioConfig::built_in("case1").unwrap();
        cfg.initial_values.pop();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(matches!(
            ScenarioConfig::resolve("no-such-scenario"),
            Err(SessionError::UnknownScenario(_))
        ));
    }

    #[test]
    fn wind_series_is_sorted() {
        let cfg = ScenarioConfig::built_in("wind").unwrap();
        assert_eq!(cfg.series.len(), 15);
        assert!(cfg.series.windows(2).all(|w| w[0].t < w[1].t));
    }
}
