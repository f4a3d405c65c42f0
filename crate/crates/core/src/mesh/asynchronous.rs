use rand::Rng;

use super::agent::{NodeAgent, Phase};
use super::network::{Event, Network, Signal};
use super::queue::SimTime;
use super::{MeshConfig, MeshError};
use crate::consensus::{ConvergenceConfig, StateVector, Trajectory};
use crate::graph::TransitionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AsyncConfig {
    /// Pause between a node's update and its next poll.
    pub cycle_interval_ms: f64,
    /// Trajectory sampling cadence.
    pub sample_every_ms: f64,
    /// First polls start uniformly in `[0, start_jitter_ms)`.
    pub start_jitter_ms: f64,
}

impl Default for AsyncConfig {
    fn default() -> Self {
        Self {
            cycle_interval_ms: 100.0,
            sample_every_ms: 100.0,
            start_jitter_ms: 100.0,
        }
    }
}

impl AsyncConfig {
    fn validate(&self) -> Result<(), MeshError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.sample_every_ms) || !(self.cycle_interval_ms.is_finite() && self.cycle_interval_ms >= 0.0) {
            return Err(MeshError::InvalidHandshake(
                "sampling cadence must be positive and cycle interval nonnegative".into(),
            ));
        }
        if !(self.start_jitter_ms.is_finite() && self.start_jitter_ms >= 0.0) {
            return Err(MeshError::InvalidHandshake("start jitter must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Free-running nodes: each polls its neighbours, updates as soon as its
/// handshakes resolve, rests, and repeats. Replies carry the peer's value
/// at reply time, so updates interleave freely.
#[derive(Debug, Clone)]
pub struct AsyncSimulation {
    agents: Vec<NodeAgent>,
    net: Network,
    config: AsyncConfig,
    pending: Vec<Vec<(usize, usize)>>,
    cycles: Vec<u64>,
    samples: Trajectory,
    sample_times: Vec<SimTime>,
}

impl AsyncSimulation {
    pub fn new(
        q: &TransitionMatrix,
        s0: StateVector,
        mesh: &MeshConfig,
        config: AsyncConfig,
    ) -> Result<Self, MeshError> {
        config.validate()?;
        if q.n() != s0.len() {
            return Err(MeshError::DimensionMismatch {
                matrix: q.n(),
                state: s0.len(),
            });
        }
        let n = s0.len();
        let agents = s0
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| NodeAgent::new(i, q, v))
            .collect();
        let mut net = Network::new(s0.values().to_vec(), mesh)?;
        for i in 0..n {
            let offset = if config.start_jitter_ms > 0.0 {
                net.rng.gen_range(0.0..config.start_jitter_ms)
            } else {
                0.0
            };
            net.schedule(SimTime::from_ms(offset), Event::CycleStart(i));
        }
        net.schedule(SimTime::from_ms(config.sample_every_ms), Event::Sample);
        Ok(Self {
            agents,
            net,
            config,
            pending: vec![Vec::new(); n],
            cycles: vec![0; n],
            samples: Trajectory::start(s0),
            sample_times: vec![SimTime::ZERO],
        })
    }

    pub fn now(&self) -> SimTime {
        self.net.now()
    }

    pub fn values(&self) -> &[f64] {
        self.net.values()
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.samples
    }

    pub fn sample_times(&self) -> &[SimTime] {
        &self.sample_times
    }

    /// Completed update cycles per node.
    pub fn cycles(&self) -> &[u64] {
        &self.cycles
    }

    /// Processes every event up to and including `end`.
    pub fn run_until(&mut self, end: SimTime) {
        while let Some(signal) = self.net.poll_until(Some(end)) {
            match signal {
                Signal::CycleStart(i) => self.start_cycle(i),
                Signal::Resolved { exchange } => {
                    let reader = self.net.exchange_reader(exchange);
                    if self.pending[reader]
                        .iter()
                        .all(|&(_, id)| self.net.outcome(id).is_some())
                    {
                        self.finish_cycle(reader);
                    }
                }
                Signal::Sample => {
                    let state = StateVector::new(self.net.values().to_vec()).expect("values stay finite");
                    self.samples.push(state);
                    self.sample_times.push(self.net.now());
                    let next = self.net.now().after(SimTime::from_ms(self.config.sample_every_ms));
                    self.net.schedule(next, Event::Sample);
                }
            }
        }
        self.net.advance_clock(end);
    }

    fn start_cycle(&mut self, i: usize) {
        let agent = &mut self.agents[i];
        agent.advance(Phase::Polling);
        let round = self.cycles[i];
        self.pending[i] = agent
            .neighbors_read
            .iter()
            .map(|&peer| (peer, self.net.begin_exchange(i, peer, round)))
            .collect();
        agent.advance(Phase::Collecting);
        if self.pending[i].is_empty() {
            self.finish_cycle(i);
        }
    }

    fn finish_cycle(&mut self, i: usize) {
        let n = self.agents.len();
        let mut heard = vec![None; n];
        for &(peer, id) in &self.pending[i] {
            debug_assert_eq!(self.net.exchange_peer(id), peer);
            heard[peer] = self.net.outcome(id).and_then(|o| o.value());
        }
        self.pending[i].clear();
        let agent = &mut self.agents[i];
        agent.advance(Phase::Updating);
        agent.current_value = self.net.values[i];
        let v = agent.update(&heard);
        agent.current_value = v;
        self.net.values[i] = v;
        agent.advance(Phase::Idle);
        self.cycles[i] += 1;
        let next = self.net.now().after(SimTime::from_ms(self.config.cycle_interval_ms));
        self.net.schedule(next, Event::CycleStart(i));
    }
}

/// Runs free-running nodes for `duration_ms` of simulated time and returns
/// the trajectory sampled every `config.sample_every_ms`.
pub fn run_async(
    q: &TransitionMatrix,
    s0: StateVector,
    mesh: &MeshConfig,
    config: AsyncConfig,
    duration_ms: f64,
) -> Result<Trajectory, MeshError> {
    if !(duration_ms.is_finite() && duration_ms >= 0.0) {
        return Err(MeshError::InvalidHandshake(format!("duration {duration_ms} ms must be nonnegative")));
    }
    let mut sim = AsyncSimulation::new(q, s0, mesh, config)?;
    sim.run_until(SimTime::from_ms(duration_ms));
    let mut t = sim.samples;
    t.settle(ConvergenceConfig::default().tolerance);
    Ok(t)
}
