//! Live sessions: a graph, an engine run and a table of robots, mutated by
//! user commands and observed through frames.
//!
//! Every change to the topology or to a node value restarts the run from
//! the current values with the iteration counter back at 0. Commands apply
//! atomically: a failing command leaves the session untouched.

mod bundle;
mod command;
mod frame;
mod runner;
mod scenario;

use thiserror::Error;

pub use bundle::RunBundle;
pub use command::Command;
pub use frame::{EventFrame, RobotFrame};
pub use runner::{run_scenario, RunLength, Runner};
pub use scenario::{Engine, ScenarioConfig, WeightMode, BUILT_IN, SCENARIO_DIR_ENV};

use crate::consensus::{ConsensusError, StateVector};
use crate::graph::{DirectedGraph, GraphError};
use crate::mesh::MeshError;
use crate::swarm::{
    place_timeseries, pose_to_value, timeseries_window, value_to_pose, Layout, LayoutKind, MessengerTask,
    MotionLimits, RobotId, RobotPose, RobotRole, Rgb, Scene, Surface, SwarmError, TickReport, TimeWindow, PALETTE,
};
use crate::trajectory_csv::CsvError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Consensus(#[from] ConsensusError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Swarm(#[from] SwarmError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("unknown scenario `{0}` (built-ins: {builtins})", builtins = BUILT_IN.join(", "))]
    UnknownScenario(String),
    #[error("node {label} does not exist ({n} nodes)")]
    UnknownNode { label: usize, n: usize },
    #[error("the session has no nodes")]
    Empty,
    #[error("nothing to export: no iteration has run since the last restart")]
    NoData,
    #[error("{0}")]
    Unsupported(String),
    #[error("invalid command: {0}")]
    InvalidCommand(String),
}

/// Messengers wait beside their edge, this far off the line between the nodes.
const MESSENGER_OFFSET_MM: f64 = 60.0;

/// Default pause between iterations of a running session.
pub const DEFAULT_INTERVAL_MS: f64 = 1000.0;

pub struct Session {
    scenario: ScenarioConfig,
    state: State,
    interval_ms: f64,
    seq: u64,
}

#[derive(Debug, Clone)]
struct State {
    /// Working copy: graph, initial values and layout track the current run.
    cfg: ScenarioConfig,
    graph: Option<DirectedGraph>,
    runner: Option<Runner>,
    scene: Scene,
    running: bool,
    t_ms: f64,
    since_step_ms: f64,
    round: u64,
    window: Option<TimeWindow>,
}

impl Session {
    pub fn new(scenario: ScenarioConfig) -> Result<Self, SessionError> {
        let state = State::build(scenario.clone())?;
        Ok(Self {
            scenario,
            state,
            interval_ms: DEFAULT_INTERVAL_MS,
            seq: 0,
        })
    }

    pub fn empty() -> Self {
        Self::new(ScenarioConfig::empty()).expect("the empty scenario is valid")
    }

    /// Milliseconds of simulated time between iterations while running;
    /// 0 steps on every tick.
    pub fn set_interval_ms(&mut self, ms: f64) -> Result<(), SessionError> {
        if !(ms.is_finite() && ms >= 0.0) {
            return Err(SessionError::InvalidCommand(format!("interval {ms} ms must be nonnegative")));
        }
        self.interval_ms = ms;
        Ok(())
    }

    pub fn scenario(&self) -> &ScenarioConfig {
        &self.scenario
    }

    /// The scenario as currently configured, with the current run's start
    /// vector and topology.
    pub fn current_config(&self) -> &ScenarioConfig {
        &self.state.cfg
    }

    pub fn graph(&self) -> Option<&DirectedGraph> {
        self.state.graph.as_ref()
    }

    pub fn scene(&self) -> &Scene {
        &self.state.scene
    }

    pub fn runner(&self) -> Option<&Runner> {
        self.state.runner.as_ref()
    }

    pub fn values(&self) -> &[f64] {
        self.state.runner.as_ref().map_or(&[], Runner::values)
    }

    pub fn iteration(&self) -> usize {
        self.state.runner.as_ref().map_or(0, Runner::iteration)
    }

    pub fn converged(&self) -> bool {
        self.state.converged()
    }

    pub fn running(&self) -> bool {
        self.state.running
    }

    pub fn time_window(&self) -> Option<TimeWindow> {
        self.state.window
    }

    pub fn node_robot(&self, node: usize) -> Option<RobotId> {
        self.state.scene.node_robot(node).map(|r| r.id)
    }

    /// Applies `cmd`, or leaves the session unchanged and reports why not.
    pub fn apply(&mut self, cmd: Command) -> Result<(), SessionError> {
        if cmd == Command::Reset {
            self.state = State::build(self.scenario.clone())?;
            return Ok(());
        }
        let mut next = self.state.clone();
        next.apply(cmd)?;
        self.state = next;
        Ok(())
    }

    /// Runs one iteration now. Returns false when there is nothing to do:
    /// no nodes, converged, or at the iteration cap.
    pub fn step_iteration(&mut self) -> Result<bool, SessionError> {
        self.state.step_iteration()
    }

    /// Advances the table by `dt_s` seconds; a running session iterates once
    /// its interval has elapsed.
    pub fn tick(&mut self, dt_s: f64) -> Result<TickReport, SessionError> {
        let report = self.state.scene.tick(dt_s)?;
        let st = &mut self.state;
        st.t_ms += dt_s * 1000.0;
        if st.running {
            st.since_step_ms += dt_s * 1000.0;
            if st.since_step_ms >= self.interval_ms {
                st.since_step_ms = 0.0;
                st.step_iteration()?;
            }
        }
        Ok(report)
    }

    /// The current state as a frame numbered `seq`.
    pub fn frame(&self, seq: u64) -> EventFrame {
        let st = &self.state;
        EventFrame {
            frame: seq,
            t_ms: st.t_ms,
            iteration: self.iteration(),
            converged: self.converged(),
            running: st.running,
            robots: st.scene.robots().iter().map(Into::into).collect(),
            values: self.values().to_vec(),
        }
    }

    /// Frame with the next sequence number.
    pub fn snapshot(&mut self) -> EventFrame {
        self.seq += 1;
        self.frame(self.seq)
    }

    pub fn export_run(&self) -> Result<RunBundle, SessionError> {
        let runner = self.state.runner.as_ref().ok_or(SessionError::NoData)?;
        if runner.iteration() == 0 {
            return Err(SessionError::NoData);
        }
        Ok(RunBundle::new(self.state.cfg.clone(), runner.trajectory()))
    }
}

impl State {
    fn build(cfg: ScenarioConfig) -> Result<Self, SessionError> {
        cfg.validate()?;
        let graph = cfg.graph()?;
        let mut st = Self {
            scene: Scene::new(Surface::default(), MotionLimits::default())?,
            runner: None,
            graph: None,
            cfg,
            running: false,
            t_ms: 0.0,
            since_step_ms: 0.0,
            round: 0,
            window: None,
        };
        let values = st.cfg.initial_values.clone();
        st.restart(graph, values, true)?;
        st.populate()?;
        Ok(st)
    }

    fn n(&self) -> usize {
        self.graph.as_ref().map_or(0, DirectedGraph::n)
    }

    fn values(&self) -> Vec<f64> {
        self.runner.as_ref().map_or_else(Vec::new, |r| r.values().to_vec())
    }

    fn converged(&self) -> bool {
        self.runner
            .as_ref()
            .is_some_and(|r| r.spread() < self.cfg.convergence.tolerance)
    }

    fn finished(&self) -> bool {
        match &self.runner {
            None => true,
            Some(r) => self.converged() || r.iteration() >= self.cfg.convergence.max_iterations,
        }
    }

    fn label(&self, label: usize) -> Result<usize, SessionError> {
        let n = self.n();
        if label == 0 || label > n {
            return Err(SessionError::UnknownNode { label, n });
        }
        Ok(label - 1)
    }

    fn graph_or_empty(&self) -> Result<&DirectedGraph, SessionError> {
        self.graph.as_ref().ok_or(SessionError::Empty)
    }

    /// New run from `values`, iteration 0.
    fn restart(&mut self, graph: Option<DirectedGraph>, values: Vec<f64>, topology_changed: bool) -> Result<(), SessionError> {
        let n = graph.as_ref().map_or(0, DirectedGraph::n);
        if values.len() != n {
            return Err(SessionError::Scenario(format!("{} values for {n} nodes", values.len())));
        }
        self.runner = match &graph {
            None => None,
            Some(g) => {
                let q = self.cfg.mode.matrix(g)?;
                Some(Runner::new(&self.cfg, &q, StateVector::new(values.clone())?)?)
            }
        };
        self.cfg.graph = match &graph {
            Some(g) => g.to_json(),
            None => ScenarioConfig::empty().graph,
        };
        self.cfg.initial_values = values;
        self.graph = graph;
        self.since_step_ms = 0.0;
        if self.cfg.layout.kind() == LayoutKind::IterationChart {
            self.retarget_nodes()?;
            if topology_changed {
                self.rebuild_messengers()?;
            }
        }
        Ok(())
    }

    fn step_iteration(&mut self) -> Result<bool, SessionError> {
        if self.finished() {
            return Ok(false);
        }
        self.runner.as_mut().expect("not finished implies a runner").step()?;
        if self.cfg.layout.kind() == LayoutKind::IterationChart {
            self.retarget_nodes()?;
            self.scene.dispatch_messengers(self.round);
        }
        self.round += 1;
        Ok(true)
    }

    /// Clears the table and sets out the robots the layout calls for.
    fn populate(&mut self) -> Result<(), SessionError> {
        self.scene.clear();
        self.window = None;
        match self.cfg.layout.kind() {
            LayoutKind::IterationChart => {
                let n = self.n();
                let values = self.values();
                for (node, &v) in values.iter().enumerate() {
                    let at = value_to_pose(&self.cfg.layout, &self.scene.limits, node, n, v)?.pose;
                    let id = self.scene.add_robot(at, RobotRole::NodeDisplay { node });
                    self.scene.robot_mut(id).expect("just added").led = PALETTE[node % PALETTE.len()];
                }
                self.scene.set_node_values(&values);
                self.rebuild_messengers()?;
            }
            LayoutKind::TimeSeries => self.populate_timeseries()?,
            kind => {
                return Err(SessionError::Unsupported(format!(
                    "{kind:?} layouts need a dataset and are not available in sessions"
                )))
            }
        }
        Ok(())
    }

    fn populate_timeseries(&mut self) -> Result<(), SessionError> {
        if self.cfg.series.is_empty() {
            return Err(SessionError::Unsupported("the time-series layout needs a data series".into()));
        }
        let Layout::TimeSeries { x, y } = self.cfg.layout else {
            unreachable!("checked by caller")
        };
        let widget_y = (y.mm[0] - self.scene.limits.body_diameter()).max(self.scene.limits.body_radius);
        for (slot, &xm) in x.mm.iter().enumerate() {
            let id = self.scene.add_robot(RobotPose::at(xm, widget_y), RobotRole::Widget { slot });
            self.scene.robot_mut(id).expect("just added").led = Rgb::WHITE;
        }
        let parking_y = self.scene.surface.height_mm;
        for k in 0..self.cfg.data_robots {
            let xm = x.mm[0] + k as f64 * self.scene.limits.body_diameter();
            self.scene.add_robot(RobotPose::at(xm, parking_y), RobotRole::DataPoint { sample: None });
        }
        let window = TimeWindow {
            t_min: x.value[0],
            t_max: x.value[1],
        };
        self.show_window(window, true)
    }

    fn widget_ids(&self) -> Vec<RobotId> {
        self.scene
            .robots()
            .iter()
            .filter(|r| matches!(r.role, RobotRole::Widget { .. }))
            .map(|r| r.id)
            .collect()
    }

    /// Points the data robots at the samples inside `window`; with
    /// `teleport` they are placed there directly.
    fn show_window(&mut self, window: TimeWindow, teleport: bool) -> Result<(), SessionError> {
        let data: Vec<RobotId> = self
            .scene
            .robots()
            .iter()
            .filter(|r| matches!(r.role, RobotRole::DataPoint { .. }))
            .map(|r| r.id)
            .collect();
        let placement = place_timeseries(&self.cfg.series, window, &self.cfg.layout, data.len())?;
        let parking_y = self.scene.surface.height_mm;
        for (k, &id) in data.iter().enumerate() {
            let (sample, pose) = match placement.poses.get(k) {
                Some(&(i, pose)) => (Some(i), pose),
                None => {
                    let x = self.scene.limits.body_radius + k as f64 * self.scene.limits.body_diameter();
                    (None, RobotPose::at(x, parking_y))
                }
            };
            if teleport {
                self.scene.place(id, pose)?;
            } else {
                self.scene.set_target(id, pose)?;
            }
            let r = self.scene.robot_mut(id).expect("listed above");
            r.role = RobotRole::DataPoint { sample };
            match sample {
                Some(i) => {
                    r.screen_text = format!("{}", self.cfg.series[i].value);
                    r.led = PALETTE[0];
                }
                None => {
                    r.screen_text.clear();
                    r.led = Rgb::OFF;
                }
            }
        }
        self.window = Some(window);
        Ok(())
    }

    /// Node robots head for the pose that shows their current value.
    fn retarget_nodes(&mut self) -> Result<(), SessionError> {
        let n = self.n();
        let values = self.values();
        for node in 0..n {
            let Some(id) = self.scene.node_robot(node).map(|r| r.id) else { continue };
            let at = value_to_pose(&self.cfg.layout, &self.scene.limits, node, n, values[node])?.pose;
            self.scene.set_target(id, at)?;
        }
        self.scene.set_node_values(&values);
        Ok(())
    }

    fn rebuild_messengers(&mut self) -> Result<(), SessionError> {
        let stale: Vec<RobotId> = self.scene.messengers().map(|(r, _)| r.id).collect();
        for id in stale {
            self.scene.remove_robot(id)?;
        }
        if !self.cfg.messengers {
            return Ok(());
        }
        let Some(g) = &self.graph else { return Ok(()) };
        let q = self.cfg.mode.matrix(g)?;
        let n = g.n();
        let values = self.values();
        let column = |node: usize| -> Result<RobotPose, SessionError> {
            Ok(value_to_pose(&self.cfg.layout, &self.scene.limits, node, n, values[node])?.pose)
        };
        let mut homes = Vec::new();
        for (receiver, sender) in q.off_diagonal_support() {
            let (a, b) = (column(sender)?, column(receiver)?);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len = dx.hypot(dy).max(f64::EPSILON);
            let home = (
                0.5 * (a.x + b.x) - dy / len * MESSENGER_OFFSET_MM,
                0.5 * (a.y + b.y) + dx / len * MESSENGER_OFFSET_MM,
            );
            homes.push((sender, receiver, q.get(receiver, sender), home));
        }
        for (sender, receiver, weight, home) in homes {
            let id = self.scene.add_robot(
                RobotPose::at(home.0, home.1),
                RobotRole::Messenger {
                    task: MessengerTask::new(sender, receiver, weight),
                    home,
                },
            );
            self.scene.robot_mut(id).expect("just added").led = PALETTE[sender % PALETTE.len()];
        }
        Ok(())
    }

    fn require_layout(&self, kind: LayoutKind) -> Result<(), SessionError> {
        if self.cfg.layout.kind() == kind {
            Ok(())
        } else {
            Err(SwarmError::WrongLayout {
                expected: kind,
                actual: self.cfg.layout.kind(),
            }
            .into())
        }
    }

    fn checked_pose(&self, x_mm: f64, y_mm: f64) -> Result<RobotPose, SessionError> {
        self.scene.surface.check(x_mm, y_mm)?;
        Ok(RobotPose::at(x_mm, y_mm))
    }

    fn apply(&mut self, cmd: Command) -> Result<(), SessionError> {
        match cmd {
            Command::MoveRobot { id, x_mm, y_mm } => {
                let pose = self.checked_pose(x_mm, y_mm)?;
                let role = self.scene.robot(id).ok_or(SwarmError::UnknownRobot(id))?.role.clone();
                let pose = RobotPose::new(pose.x, pose.y, self.scene.robot(id).expect("checked").pose.heading);
                self.scene.place(id, pose)?;
                match role {
                    RobotRole::NodeDisplay { node } => {
                        let dropped = self.scene.robot(id).expect("checked").pose;
                        let value = pose_to_value(&self.cfg.layout, &self.scene.surface, &dropped)?;
                        let mut values = self.values();
                        values[node] = value;
                        let graph = self.graph.clone();
                        self.restart(graph, values, false)?;
                    }
                    RobotRole::Widget { .. } if self.cfg.layout.kind() == LayoutKind::TimeSeries => {
                        let ids = self.widget_ids();
                        let [a, b] = [ids[0], ids[1]].map(|w| self.scene.robot(w).expect("listed").pose);
                        let window = timeseries_window(&a, &b, &self.cfg.layout, &self.scene.limits)?;
                        self.show_window(window, false)?;
                    }
                    _ => {}
                }
            }
            Command::AddNode {
                x_mm,
                y_mm,
                reads,
                read_by,
            } => {
                self.require_layout(LayoutKind::IterationChart)?;
                let pose = self.checked_pose(x_mm, y_mm)?;
                let value = pose_to_value(&self.cfg.layout, &self.scene.surface, &pose)?;
                let n = self.n();
                let capacity = self.cfg.layout.column_capacity(&self.scene.limits);
                if n + 1 > capacity {
                    return Err(SwarmError::ColumnCapacity { n: n + 1, capacity }.into());
                }
                let reads = reads.iter().map(|&l| self.label(l)).collect::<Result<Vec<_>, _>>()?;
                let read_by = read_by.iter().map(|&l| self.label(l)).collect::<Result<Vec<_>, _>>()?;
                let graph = match &self.graph {
                    None => DirectedGraph::new(1, &[(0, 0)])?,
                    Some(g) => g.with_added_node(&reads, &read_by)?,
                };
                let id = self.scene.add_robot(pose, RobotRole::NodeDisplay { node: n });
                self.scene.robot_mut(id).expect("just added").led = PALETTE[n % PALETTE.len()];
                let mut values = self.values();
                values.push(value);
                self.restart(Some(graph), values, true)?;
            }
            Command::RemoveNode { node } => {
                let k = self.label(node)?;
                let graph = match self.n() {
                    1 => None,
                    _ => Some(self.graph_or_empty()?.without_node(k)?),
                };
                if let Some(id) = self.scene.node_robot(k).map(|r| r.id) {
                    self.scene.remove_robot(id)?;
                }
                let ids: Vec<RobotId> = self.scene.robots().iter().map(|r| r.id).collect();
                for id in ids {
                    let r = self.scene.robot_mut(id).expect("listed");
                    if let RobotRole::NodeDisplay { node } = &mut r.role {
                        if *node > k {
                            *node -= 1;
                            r.led = PALETTE[*node % PALETTE.len()];
                        }
                    }
                }
                let mut values = self.values();
                values.remove(k);
                self.restart(graph, values, true)?;
            }
            Command::SetEdge { from, to, present } => {
                let (i, j) = (self.label(from)?, self.label(to)?);
                let graph = self.graph_or_empty()?.with_edge(i, j, present)?;
                let values = self.values();
                self.restart(Some(graph), values, true)?;
            }
            Command::Start => self.running = true,
            Command::Pause => self.running = false,
            Command::Reset => unreachable!("handled by the session"),
            Command::SetLayout { layout } => {
                layout.validate()?;
                if layout.kind() == LayoutKind::IterationChart {
                    let capacity = layout.column_capacity(&self.scene.limits);
                    if self.n() > capacity {
                        return Err(SwarmError::ColumnCapacity { n: self.n(), capacity }.into());
                    }
                } else {
                    self.running = false;
                }
                self.cfg.layout = layout;
                self.populate()?;
            }
            Command::SetTimeWindow { t_min, t_max } => {
                self.require_layout(LayoutKind::TimeSeries)?;
                if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
                    return Err(SessionError::InvalidCommand(format!(
                        "time window [{t_min}, {t_max}] must be finite with t_min < t_max"
                    )));
                }
                let Layout::TimeSeries { x, .. } = self.cfg.layout else { unreachable!() };
                let ids = self.widget_ids();
                let mut ends = Vec::new();
                for (&id, t) in ids.iter().zip([t_min, t_max]) {
                    let y = self.scene.robot(id).expect("listed").pose.y;
                    let (xm, _) = x.to_mm(t);
                    let pose = RobotPose::at(xm, y);
                    self.scene.set_target(id, pose)?;
                    ends.push(pose);
                }
                let window = timeseries_window(&ends[0], &ends[1], &self.cfg.layout, &self.scene.limits)?;
                self.show_window(window, false)?;
            }
        }
        Ok(())
    }
}
