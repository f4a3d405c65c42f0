use crate::graph::{MatrixMode, TransitionMatrix};

/// Protocol phase of one node within a round or cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Idle,
    Polling,
    Collecting,
    Updating,
}

impl Phase {
    fn next(self) -> Phase {
        match self {
            Phase::Idle => Phase::Polling,
            Phase::Polling => Phase::Collecting,
            Phase::Collecting => Phase::Updating,
            Phase::Updating => Phase::Idle,
        }
    }
}

/// Per-node protocol state: the row of weights it applies and where it is
/// in the poll/update cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeAgent {
    pub id: usize,
    pub current_value: f64,
    /// Nodes this node reads, excluding itself, ascending.
    pub neighbors_read: Vec<usize>,
    /// Nonzero `(j, q_ij)` in column order, including `j == id` when present.
    weights: Vec<(usize, f64)>,
    row_total: f64,
    convex: bool,
    phase: Phase,
}

impl NodeAgent {
    pub fn new(id: usize, q: &TransitionMatrix, value: f64) -> Self {
        let weights: Vec<(usize, f64)> = q
            .row(id)
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(j, &w)| (j, w))
            .collect();
        let neighbors_read = weights.iter().map(|&(j, _)| j).filter(|&j| j != id).collect();
        Self {
            id,
            current_value: value,
            neighbors_read,
            row_total: q.row(id).iter().sum(),
            convex: q.mode() != MatrixMode::ColumnStochastic,
            weights,
            phase: Phase::Idle,
        }
    }

    /// `q_ii`.
    pub fn self_weight(&self) -> f64 {
        self.weights
            .iter()
            .find(|&&(j, _)| j == self.id)
            .map_or(0.0, |&(_, w)| w)
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Moves to the next phase of Idle → Polling → Collecting → Updating → Idle.
    pub fn advance(&mut self, to: Phase) {
        assert_eq!(
            self.phase.next(),
            to,
            "node {} cannot go from {:?} to {:?}",
            self.id,
            self.phase,
            to
        );
        self.phase = to;
    }

    /// Weighted update over the nodes that answered.
    ///
    /// `values[j]` is `Some` for every respondent; the node's own slot is
    /// ignored and its current value used instead. When everyone answered
    /// this is exactly row `id` of `Q s`. Otherwise the respondents' weights
    /// are rescaled to the full row total, which for stochastic rows keeps
    /// the update a convex combination of respondents.
    pub fn update(&self, values: &[Option<f64>]) -> f64 {
        let mut acc = 0.0;
        let mut answered = 0.0;
        let mut all = true;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(j, w) in &self.weights {
            let v = if j == self.id { Some(self.current_value) } else { values[j] };
            match v {
                Some(v) => {
                    acc += w * v;
                    answered += w;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                None => all = false,
            }
        }
        if answered == 0.0 {
            // No self weight and nobody answered: hold the value.
            return self.current_value;
        }
        let value = if all { acc } else { acc / answered * self.row_total };
        if self.convex {
            // Rounding can push a convex combination an ulp past its inputs.
            value.clamp(lo, hi)
        } else {
            value
        }
    }
}
