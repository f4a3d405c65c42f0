use super::agent::{NodeAgent, Phase};
use super::network::Network;
use super::queue::SimTime;
use super::{MeshConfig, MeshError};
use crate::consensus::{StateVector, Trajectory};
use crate::graph::TransitionMatrix;

/// Who fed into each node's update in one lockstep round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub round: u64,
    /// Per node, the nodes whose values entered its update (itself included
    /// when it carries self weight), ascending.
    pub respondents: Vec<Vec<usize>>,
    /// `(reader, peer)` handshakes that failed this round.
    pub failed: Vec<(usize, usize)>,
    pub started: SimTime,
    pub finished: SimTime,
}

/// Synchronous rounds: every node polls all of its neighbours, waits until
/// each handshake has resolved, and all updates commit together.
#[derive(Debug, Clone)]
pub struct LockstepSimulation {
    agents: Vec<NodeAgent>,
    net: Network,
    round: u64,
    trajectory: Trajectory,
    logs: Vec<RoundLog>,
}

impl LockstepSimulation {
    pub fn new(q: &TransitionMatrix, s0: StateVector, config: &MeshConfig) -> Result<Self, MeshError> {
        if q.n() != s0.len() {
            return Err(MeshError::DimensionMismatch {
                matrix: q.n(),
                state: s0.len(),
            });
        }
        let agents = s0
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| NodeAgent::new(i, q, v))
            .collect();
        let net = Network::new(s0.values().to_vec(), config)?;
        Ok(Self {
            agents,
            net,
            round: 0,
            trajectory: Trajectory::start(s0),
            logs: Vec::new(),
        })
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.trajectory
    }

    pub fn logs(&self) -> &[RoundLog] {
        &self.logs
    }

    pub fn agents(&self) -> &[NodeAgent] {
        &self.agents
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn step_round(&mut self) -> &RoundLog {
        let n = self.agents.len();
        let started = self.net.now();
        let round = self.round;
        self.net.values = self.agents.iter().map(|a| a.current_value).collect();

        let mut exchanges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for agent in &mut self.agents {
            agent.advance(Phase::Polling);
            for &peer in &agent.neighbors_read {
                let id = self.net.begin_exchange(agent.id, peer, round);
                exchanges[agent.id].push((peer, id));
            }
            agent.advance(Phase::Collecting);
        }
        while self.net.poll().is_some() {}

        let mut respondents = Vec::with_capacity(n);
        let mut failed = Vec::new();
        let mut next = Vec::with_capacity(n);
        for agent in &mut self.agents {
            agent.advance(Phase::Updating);
            let mut heard = vec![None; n];
            for &(peer, id) in &exchanges[agent.id] {
                match self.net.outcome(id).and_then(|o| o.value()) {
                    Some(v) => heard[peer] = Some(v),
                    None => failed.push((agent.id, peer)),
                }
            }
            next.push(agent.update(&heard));
            let mut used: Vec<usize> = (0..n).filter(|&j| heard[j].is_some()).collect();
            if agent.self_weight() > 0.0 {
                used.push(agent.id);
                used.sort_unstable();
            }
            respondents.push(used);
        }
        for (agent, v) in self.agents.iter_mut().zip(&next) {
            agent.current_value = *v;
            agent.advance(Phase::Idle);
        }
        self.trajectory.push(StateVector::new(next).expect("convex updates of finite values stay finite"));
        self.round += 1;
        self.logs.push(RoundLog {
            round,
            respondents,
            failed,
            started,
            finished: self.net.now(),
        });
        self.logs.last().expect("just pushed")
    }
}

/// Runs `rounds` lockstep rounds and returns the recorded trajectory.
pub fn run_lockstep(
    q: &TransitionMatrix,
    s0: StateVector,
    config: &MeshConfig,
    rounds: usize,
) -> Result<Trajectory, MeshError> {
    let mut sim = LockstepSimulation::new(q, s0, config)?;
    for _ in 0..rounds {
        sim.step_round();
    }
    let mut t = sim.into_trajectory();
    t.settle(crate::consensus::ConvergenceConfig::default().tolerance);
    Ok(t)
}
