use super::scenario::{Engine, ScenarioConfig};
use super::SessionError;
use crate::consensus::{self, StateVector, Trajectory};
use crate::graph::TransitionMatrix;
use crate::mesh::{AsyncSimulation, LockstepSimulation, SimTime};

/// How long a headless run goes on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunLength {
    Iterations(usize),
    /// Until the spread drops below tolerance or the iteration cap is hit.
    UntilConverged,
}

/// One of the three engines, advanced one iteration at a time.
///
/// For the asynchronous engine an iteration is one sampling period.
#[derive(Debug, Clone)]
pub enum Runner {
    Matrix { q: TransitionMatrix, trajectory: Trajectory },
    Lockstep(Box<LockstepSimulation>),
    Async { sim: Box<AsyncSimulation>, period: SimTime },
}

impl Runner {
    pub fn new(cfg: &ScenarioConfig, q: &TransitionMatrix, s0: StateVector) -> Result<Self, SessionError> {
        if q.n() != s0.len() {
            return Err(SessionError::Scenario(format!("{} values for {} nodes", s0.len(), q.n())));
        }
        Ok(match cfg.engine {
            Engine::Matrix => Runner::Matrix {
                q: q.clone(),
                trajectory: Trajectory::start(s0),
            },
            Engine::MeshLockstep => Runner::Lockstep(Box::new(LockstepSimulation::new(q, s0, &cfg.mesh_config()?)?)),
            Engine::MeshAsync => Runner::Async {
                sim: Box::new(AsyncSimulation::new(q, s0, &cfg.mesh_config()?, cfg.async_config)?),
                period: SimTime::from_ms(cfg.async_config.sample_every_ms),
            },
        })
    }

    pub fn step(&mut self) -> Result<(), SessionError> {
        match self {
            Runner::Matrix { q, trajectory } => {
                let next = consensus::step(q, trajectory.last())?;
                if let Some(node) = next.values().iter().position(|v| !v.is_finite()) {
                    return Err(consensus::ConsensusError::NonFinite {
                        iteration: trajectory.iterations_run() + 1,
                        node: node + 1,
                    }
                    .into());
                }
                trajectory.push(next);
            }
            Runner::Lockstep(sim) => {
                sim.step_round();
            }
            Runner::Async { sim, period } => {
                let last = *sim.sample_times().last().expect("the start is always sampled");
                sim.run_until(last.after(*period));
            }
        }
        Ok(())
    }

    pub fn trajectory(&self) -> &Trajectory {
        match self {
            Runner::Matrix { trajectory, .. } => trajectory,
            Runner::Lockstep(sim) => sim.trajectory(),
            Runner::Async { sim, .. } => sim.trajectory(),
        }
    }

    pub fn iteration(&self) -> usize {
        self.trajectory().iterations_run()
    }

    pub fn values(&self) -> &[f64] {
        self.trajectory().last().values()
    }

    pub fn spread(&self) -> f64 {
        self.trajectory().final_spread()
    }
}

/// Runs a scenario headless from its initial values.
pub fn run_scenario(cfg: &ScenarioConfig, length: RunLength) -> Result<Trajectory, SessionError> {
    cfg.validate()?;
    let graph = cfg.graph()?.ok_or(SessionError::Empty)?;
    let q = cfg.mode.matrix(&graph)?;
    let s0 = StateVector::new(cfg.initial_values.clone())?;
    let mut runner = Runner::new(cfg, &q, s0)?;
    let tol = cfg.convergence.tolerance;
    match length {
        RunLength::Iterations(k) => {
            for _ in 0..k {
                runner.step()?;
            }
        }
        RunLength::UntilConverged => {
            while runner.spread() >= tol && runner.iteration() < cfg.convergence.max_iterations {
                runner.step()?;
            }
        }
    }
    let mut trajectory = runner.trajectory().clone();
    trajectory.settle(tol);
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{run_async, run_lockstep};

    #[test]
    fn matrix_runner_matches_engine() {
        let cfg = ScenarioConfig::built_in("case1").unwrap();
        let t = run_scenario(&cfg, RunLength::Iterations(10)).unwrap();
        let q = cfg.mode.matrix(&cfg.graph().unwrap().unwrap()).unwrap();
        let direct = consensus::run_iterations(&q, StateVector::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap(), 10, 1e-6).unwrap();
        assert_eq!(t, direct);
    }

    #[test]
    fn until_converged_stops_below_tolerance() {
        let cfg = ScenarioConfig::built_in("case2").unwrap();
        let t = run_scenario(&cfg, RunLength::UntilConverged).unwrap();
        assert!(t.converged);
        assert!(t.final_spread() < 1e-6);
    }

    #[test]
    fn stepped_mesh_runs_match_one_shot_runs() {
        let mut cfg = ScenarioConfig::built_in("case1").unwrap();
        cfg.links.drop = 0.3;
        cfg.seed = 11;
        let q = cfg.mode.matrix(&cfg.graph().unwrap().unwrap()).unwrap();
        let s0 = StateVector::new(cfg.initial_values.clone()).unwrap();
        let mesh = cfg.mesh_config().unwrap();

        cfg.engine = Engine::MeshLockstep;
        let stepped = run_scenario(&cfg, RunLength::Iterations(15)).unwrap();
        assert_eq!(stepped, run_lockstep(&q, s0.clone(), &mesh, 15).unwrap());

        cfg.engine = Engine::MeshAsync;
        let stepped = run_scenario(&cfg, RunLength::Iterations(15)).unwrap();
        let period = cfg.async_config.sample_every_ms;
        let one_shot = run_async(&q, s0, &mesh, cfg.async_config, 15.0 * period).unwrap();
        assert_eq!(stepped, one_shot);
    }

    #[test]
    fn empty_scenario_cannot_run() {
        assert!(matches!(
            run_scenario(&ScenarioConfig::empty(), RunLength::Iterations(1)),
            Err(SessionError::Empty)
        ));
    }
}
