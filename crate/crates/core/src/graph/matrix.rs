use serde::{Deserialize, Serialize};

use super::{DirectedGraph, GraphError};

const STOCHASTIC_TOL: f64 = 1e-12;

/// Which sums of a [`TransitionMatrix`] are pinned to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixMode {
    /// Rows sum to 1: every update is a weighted average, the limit is a
    /// weighted average of the initial values.
    RowStochastic,
    /// Columns sum to 1: senders split their value, the total is conserved.
    ColumnStochastic,
    /// Both: consensus on the plain average.
    DoublyStochastic,
}

/// Nonnegative `n × n` weights, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    weights: Vec<f64>,
    mode: MatrixMode,
}

impl TransitionMatrix {
    /// `q_ij = a_ij / Σ_k a_ik`: node `i` averages the nodes it reads.
    pub fn row_stochastic(g: &DirectedGraph) -> Self {
        let n = g.n();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            let degree = g.out_degree(i) as f64;
            for j in g.row(i) {
                weights[i * n + j] = 1.0 / degree;
            }
        }
        Self {
            n,
            weights,
            mode: MatrixMode::RowStochastic,
        }
    }

    /// `q_ij = a_ji / Σ_k a_jk`: node `j` splits its value equally over the
    /// nodes listed in row `j`.
    pub fn column_stochastic(g: &DirectedGraph) -> Self {
        let n = g.n();
        let mut weights = vec![0.0; n * n];
        for j in 0..n {
            let degree = g.out_degree(j) as f64;
            for i in g.row(j) {
                weights[i * n + j] = 1.0 / degree;
            }
        }
        Self {
            n,
            weights,
            mode: MatrixMode::ColumnStochastic,
        }
    }

    /// Metropolis–Hastings weights on a symmetric graph with self-loops.
    ///
    /// Off-diagonal neighbours get `1 / (1 + max(deg_i, deg_j))` where the
    /// degree excludes the self-loop; the diagonal takes what is left of the row.
    pub fn metropolis(g: &DirectedGraph) -> Result<Self, GraphError> {
        if let Some((i, j)) = g.first_asymmetry() {
            return Err(GraphError::Asymmetric { i: i + 1, j: j + 1 });
        }
        let n = g.n();
        if let Some(node) = (0..n).find(|&i| !g.has_self_loop(i)) {
            return Err(GraphError::MissingSelfLoop { node: node + 1 });
        }
        let degree: Vec<usize> = (0..n).map(|i| g.out_degree(i) - 1).collect();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            let mut off_diagonal = 0.0;
            for j in g.row(i).filter(|&j| j != i) {
                let w = 1.0 / (1 + degree[i].max(degree[j])) as f64;
                weights[i * n + j] = w;
                off_diagonal += w;
            }
            weights[i * n + i] = 1.0 - off_diagonal;
        }
        Ok(Self {
            n,
            weights,
            mode: MatrixMode::DoublyStochastic,
        })
    }

    /// Wraps explicit row-major weights, checking the invariants of `mode`.
    pub fn from_weights(n: usize, weights: Vec<f64>, mode: MatrixMode) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if weights.len() != n * n {
            return Err(GraphError::WeightShape {
                len: weights.len(),
                expected: n * n,
            });
        }
        for (k, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(GraphError::InvalidWeight {
                    row: k / n + 1,
                    col: k % n + 1,
                    value: w,
                });
            }
        }
        let q = Self { n, weights, mode };
        let check_rows = matches!(mode, MatrixMode::RowStochastic | MatrixMode::DoublyStochastic);
        let check_cols = matches!(mode, MatrixMode::ColumnStochastic | MatrixMode::DoublyStochastic);
        if check_rows {
            if let Some((i, sum)) = q.row_sums().into_iter().enumerate().find(|(_, s)| (s - 1.0).abs() > STOCHASTIC_TOL) {
                return Err(GraphError::NotStochastic { axis: "row", index: i + 1, sum });
            }
        }
        if check_cols {
            if let Some((j, sum)) = q.column_sums().into_iter().enumerate().find(|(_, s)| (s - 1.0).abs() > STOCHASTIC_TOL) {
                return Err(GraphError::NotStochastic { axis: "column", index: j + 1, sum });
            }
        }
        Ok(q)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> MatrixMode {
        self.mode
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Nodes each node draws weight from (`q_ij > 0`), as adjacency lists.
    pub fn support(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| (0..self.n).filter(|&j| self.get(i, j) > 0.0).collect())
            .collect()
    }

    /// Nonzero off-diagonal entries `(i, j)`: one packet from `j` to `i` per round.
    pub fn off_diagonal_support(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.get(i, j) > 0.0)
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                weights[j * n + i] = self.get(i, j);
            }
        }
        let mode = match self.mode {
            MatrixMode::RowStochastic => MatrixMode::ColumnStochastic,
            MatrixMode::ColumnStochastic => MatrixMode::RowStochastic,
            MatrixMode::DoublyStochastic => MatrixMode::DoublyStochastic,
        };
        Self { n, weights, mode }
    }
}
