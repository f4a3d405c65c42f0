//! Synchronous consensus iteration `s(k+1) = Q s(k)`.
//!
//! Matrix–vector products accumulate left to right in index order, so a
//! given `(Q, s0)` always yields the same bits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::scc_analyze_lists;
use crate::graph::{MatrixMode, TransitionMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConsensusError {
    #[error("dimension mismatch: matrix is {matrix}x{matrix}, state has {state} entries")]
    DimensionMismatch { matrix: usize, state: usize },
    #[error("non-finite value at node {node} after iteration {iteration}")]
    NonFinite { iteration: usize, node: usize },
    #[error("state vector must not be empty")]
    EmptyState,
    #[error("invalid convergence config: {0}")]
    InvalidConfig(&'static str),
    #[error(
        "weight support is not strongly connected ({components} components); \
         inspect the SCC report for closed components"
    )]
    NotStronglyConnected { components: usize },
    #[error("weight support has no self-loop; the fixed direction may not be attracting")]
    NoSelfLoop,
    #[error("power iteration did not settle within {0} iterations")]
    NoFixedPoint(usize),
}

/// Node values at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ConsensusError> {
        if values.is_empty() {
            return Err(ConsensusError::EmptyState);
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(ConsensusError::NonFinite { iteration: 0, node: node + 1 });
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl From<StateVector> for Vec<f64> {
    fn from(s: StateVector) -> Self {
        s.0
    }
}

/// `max(s) - min(s)`.
pub fn spread(s: &StateVector) -> f64 {
    s.max() - s.min()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    /// Spread below which the run counts as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 1000,
        }
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<(), ConsensusError> {
        if !(self.tolerance > 0.0) {
            return Err(ConsensusError::InvalidConfig("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(ConsensusError::InvalidConfig("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

/// States `s(0)..s(K)` of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<StateVector>,
    pub converged: bool,
    pub spread_history: Vec<f64>,
}

impl Trajectory {
    pub fn start(s0: StateVector) -> Self {
        let first = spread(&s0);
        Self {
            states: vec![s0],
            converged: false,
            spread_history: vec![first],
        }
    }

    pub fn push(&mut self, s: StateVector) {
        self.spread_history.push(spread(&s));
        self.states.push(s);
    }

    /// `K`, the number of steps taken.
    pub fn iterations_run(&self) -> usize {
        self.states.len() - 1
    }

    pub fn last(&self) -> &StateVector {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_spread(&self) -> f64 {
        *self.spread_history.last().expect("trajectory is never empty")
    }

    /// Sets `converged` from the final spread.
    pub fn settle(&mut self, tolerance: f64) {
        self.converged = self.final_spread() < tolerance;
    }

    pub fn node_count(&self) -> usize {
        self.states[0].len()
    }
}

fn check_dims(q: &TransitionMatrix, s: &StateVector) -> Result<(), ConsensusError> {
    if q.n() != s.len() {
        return Err(ConsensusError::DimensionMismatch {
            matrix: q.n(),
            state: s.len(),
        });
    }
    Ok(())
}

/// Fixed-order `Q s`. Rows of a row-stochastic matrix are convex
/// combinations, so their results are clamped to the hull of the values
/// they read; rounding could otherwise step an ulp outside it.
fn mat_vec(q: &TransitionMatrix, s: &[f64]) -> Vec<f64> {
    let convex = matches!(q.mode(), MatrixMode::RowStochastic | MatrixMode::DoublyStochastic);
    (0..q.n())
        .map(|i| {
            let mut acc = 0.0;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (w, v) in q.row(i).iter().zip(s) {
                acc += w * v;
                if *w > 0.0 {
                    lo = lo.min(*v);
                    hi = hi.max(*v);
                }
            }
            if convex && lo <= hi {
                acc.clamp(lo, hi)
            } else {
                acc
            }
        })
        .collect()
}

/// One synchronous update `Q s`.
pub fn step(q: &TransitionMatrix, s: &StateVector) -> Result<StateVector, ConsensusError> {
    check_dims(q, s)?;
    Ok(StateVector(mat_vec(q, &s.0)))
}

fn advance(q: &TransitionMatrix, s: &StateVector, iteration: usize) -> Result<StateVector, ConsensusError> {
    let next = mat_vec(q, &s.0);
    if let Some(node) = next.iter().position(|v| !v.is_finite()) {
        return Err(ConsensusError::NonFinite { iteration, node: node + 1 });
    }
    Ok(StateVector(next))
}

/// Iterates until the spread drops below `cfg.tolerance` or
/// `cfg.max_iterations` steps have been taken.
pub fn run(q: &TransitionMatrix, s0: StateVector, cfg: &ConvergenceConfig) -> Result<Trajectory, ConsensusError> {
    cfg.validate()?;
    check_dims(q, &s0)?;
    let mut traj = Trajectory::start(s0);
    while traj.final_spread() >= cfg.tolerance && traj.iterations_run() < cfg.max_iterations {
        let next = advance(q, traj.last(), traj.iterations_run() + 1)?;
        traj.push(next);
    }
    traj.settle(cfg.tolerance);
    Ok(traj)
}

/// Takes exactly `iterations` steps regardless of convergence; the verdict
/// is taken from the final spread.
pub fn run_iterations(
    q: &TransitionMatrix,
    s0: StateVector,
    iterations: usize,
    tolerance: f64,
) -> Result<Trajectory, ConsensusError> {
    check_dims(q, &s0)?;
    let mut traj = Trajectory::start(s0);
    for k in 1..=iterations {
        let next = advance(q, traj.last(), k)?;
        traj.push(next);
    }
    traj.settle(tolerance);
    Ok(traj)
}

/// Limit predicted from the eigenvector of `Q` for eigenvalue 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointPrediction {
    /// Nonnegative, sums to 1.
    pub weights: Vec<f64>,
    pub mode: MatrixMode,
}

impl FixedPointPrediction {
    /// Row mode: every node ends at `weights · s0`. Column mode: node `i`
    /// ends at `weights[i] · Σ s0`. Doubly stochastic matrices satisfy both.
    pub fn predicted_limit(&self, s0: &StateVector) -> Vec<f64> {
        match self.mode {
            MatrixMode::RowStochastic | MatrixMode::DoublyStochastic => {
                let mut dot = 0.0;
                for (w, v) in self.weights.iter().zip(s0.values()) {
                    dot += w * v;
                }
                vec![dot; self.weights.len()]
            }
            MatrixMode::ColumnStochastic => {
                let total = s0.sum();
                self.weights.iter().map(|w| w * total).collect()
            }
        }
    }
}

const POWER_TOL: f64 = 1e-12;
const POWER_CAP: usize = 100_000;

/// Normalised eigenvector for eigenvalue 1 by power iteration from the
/// uniform vector: left eigenvector for row-stochastic `Q`, right
/// eigenvector for column-stochastic `Q`.
pub fn predict_fixed_point(q: &TransitionMatrix) -> Result<FixedPointPrediction, ConsensusError> {
    let support = q.support();
    let report = scc_analyze_lists(&support);
    if !report.is_strongly_connected {
        return Err(ConsensusError::NotStronglyConnected {
            components: report.component_count(),
        });
    }
    if !(0..q.n()).any(|i| q.get(i, i) > 0.0) {
        return Err(ConsensusError::NoSelfLoop);
    }

    let operator = match q.mode() {
        MatrixMode::RowStochastic | MatrixMode::DoublyStochastic => q.transpose(),
        MatrixMode::ColumnStochastic => q.clone(),
    };
    let n = q.n();
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..POWER_CAP {
        let mut next = mat_vec(&operator, &v);
        let total: f64 = next.iter().sum();
        for x in &mut next {
            *x /= total;
        }
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < POWER_TOL {
            return Ok(FixedPointPrediction { weights: v, mode: q.mode() });
        }
    }
    Err(ConsensusError::NoFixedPoint(POWER_CAP))
}
