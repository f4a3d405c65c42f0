//! Communication topologies and the weight matrices built from them.
//!
//! Row `i` of the adjacency matrix lists the nodes whose values node `i`
//! reads. An edge `(from, to)` therefore sets `a[from][to] = 1`: `from`
//! reads `to`. This is the orientation under which the row-stochastic
//! iteration reproduces the reference Case 1 trajectory.

mod matrix;
pub(crate) mod scc;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use matrix::{MatrixMode, TransitionMatrix};
pub use scc::{scc_analyze, scc_analyze_lists, suggest_repair, SccReport};

/// Errors raised while building or transforming graphs and matrices.
///
/// Node references in messages are 1-based labels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge ({from}, {to}) has an endpoint outside 1..={n}")]
    EndpointOutOfRange { from: usize, to: usize, n: usize },
    #[error("node {node} reads from no node (all-zero adjacency row)")]
    ZeroRow { node: usize },
    #[error("adjacency is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("adjacency entry ({row}, {col}) is {value}, expected 0 or 1")]
    InvalidEntry { row: usize, col: usize, value: String },
    #[error("adjacency is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("node {node} has no self-loop")]
    MissingSelfLoop { node: usize },
    #[error("node {node} does not exist (graph has {n} nodes)")]
    UnknownNode { node: usize, n: usize },
    #[error("weight matrix has {len} entries, expected {expected}")]
    WeightShape { len: usize, expected: usize },
    #[error("weight ({row}, {col}) = {value} is negative or not finite")]
    InvalidWeight { row: usize, col: usize, value: f64 },
    #[error("{axis} {index} sums to {sum}, expected 1")]
    NotStochastic { axis: &'static str, index: usize, sum: f64 },
    #[error("malformed adjacency CSV: {0}")]
    Csv(String),
}

/// Directed communication graph with a 0/1 adjacency matrix.
///
/// Construction rejects all-zero rows so that every row-normalisation is
/// well defined.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DirectedGraph {
    n: usize,
    adjacency: Vec<bool>,
}

impl DirectedGraph {
    /// Builds a graph from 0-based `(from, to)` pairs. Duplicates collapse.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![false; n * n];
        for &(from, to) in edges {
            if from >= n || to >= n {
                return Err(GraphError::EndpointOutOfRange {
                    from: from + 1,
                    to: to + 1,
                    n,
                });
            }
            adjacency[from * n + to] = true;
        }
        let graph = Self { n, adjacency };
        graph.check_rows()?;
        Ok(graph)
    }

    /// Builds a graph from 1-based label pairs, as used by every external format.
    pub fn from_labels(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut zero_based = Vec::with_capacity(edges.len());
        for &(from, to) in edges {
            if from == 0 || to == 0 || from > n || to > n {
                return Err(GraphError::EndpointOutOfRange { from, to, n });
            }
            zero_based.push((from - 1, to - 1));
        }
        Self::new(n, &zero_based)
    }

    /// Builds a graph from explicit adjacency rows.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, GraphError> {
        let n = rows.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GraphError::NotSquare {
                    row: i + 1,
                    len: row.len(),
                    n,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => adjacency.push(false),
                    1 => adjacency.push(true),
                    other => {
                        return Err(GraphError::InvalidEntry {
                            row: i + 1,
                            col: j + 1,
                            value: other.to_string(),
                        })
                    }
                }
            }
        }
        let graph = Self { n, adjacency };
        graph.check_rows()?;
        Ok(graph)
    }

    fn check_rows(&self) -> Result<(), GraphError> {
        match (0..self.n).find(|&i| self.out_degree(i) == 0) {
            Some(i) => Err(GraphError::ZeroRow { node: i + 1 }),
            None => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `a[i][j]`: whether node `i` reads node `j`.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    /// Number of ones in row `i`.
    pub fn out_degree(&self, i: usize) -> usize {
        self.row(i).count()
    }

    /// Column indices set in row `i`, ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        self.adjacency[i * n..(i + 1) * n]
            .iter()
            .enumerate()
            .filter_map(|(j, &a)| a.then_some(j))
    }

    /// All edges as 0-based pairs in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |j| (i, j)))
            .collect()
    }

    /// Number of ones in the adjacency matrix.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&a| a).count()
    }

    pub fn has_self_loop(&self, i: usize) -> bool {
        self.has_edge(i, i)
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    fn first_asymmetry(&self) -> Option<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .find(|&(i, j)| self.has_edge(i, j) != self.has_edge(j, i))
    }

    /// Adjacency as `Vec<Vec<u8>>`, row-major.
    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.adjacency
            .chunks(self.n)
            .map(|r| r.iter().map(|&a| u8::from(a)).collect())
            .collect()
    }

    /// Adjacency lists (row `i` → nodes `i` reads), the form the SCC code walks.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|i| self.row(i).collect()).collect()
    }

    /// `a ∨ aᵀ`, the undirected closure. Always valid since rows only gain ones.
    pub fn symmetrized(&self) -> Self {
        let n = self.n;
        let mut adjacency = self.adjacency.clone();
        for i in 0..n {
            for j in 0..n {
                if self.has_edge(j, i) {
                    adjacency[i * n + j] = true;
                }
            }
        }
        Self { n, adjacency }
    }

    /// Returns a copy with edge `(from, to)` set or cleared.
    pub fn with_edge(&self, from: usize, to: usize, present: bool) -> Result<Self, GraphError> {
        if from >= self.n || to >= self.n {
            return Err(GraphError::EndpointOutOfRange {
                from: from + 1,
                to: to + 1,
                n: self.n,
            });
        }
        let mut next = self.clone();
        next.adjacency[from * self.n + to] = present;
        next.check_rows()?;
        Ok(next)
    }

    /// Adds the given 0-based edges.
    pub fn with_edges(&self, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut all = self.edges();
        all.extend_from_slice(edges);
        Self::new(self.n, &all)
    }

    /// Appends a node reading from itself plus `reads`, and read by `read_by`.
    pub fn with_added_node(&self, reads: &[usize], read_by: &[usize]) -> Result<Self, GraphError> {
        let new = self.n;
        let mut edges = self.edges();
        edges.push((new, new));
        edges.extend(reads.iter().map(|&j| (new, j)));
        edges.extend(read_by.iter().map(|&i| (i, new)));
        Self::new(self.n + 1, &edges)
    }

    /// Deletes node `k` and its edges; later nodes shift down by one.
    pub fn without_node(&self, k: usize) -> Result<Self, GraphError> {
        if k >= self.n {
            return Err(GraphError::UnknownNode {
                node: k + 1,
                n: self.n,
            });
        }
        let shift = |x: usize| if x > k { x - 1 } else { x };
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .filter(|&(i, j)| i != k && j != k)
            .map(|(i, j)| (shift(i), shift(j)))
            .collect();
        Self::new(self.n - 1, &edges)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges().into_iter().map(|(i, j)| [i + 1, j + 1]).collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self, GraphError> {
        let edges: Vec<_> = json.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::from_labels(json.n, &edges)
    }

    /// `n` lines of comma-separated 0/1.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, GraphError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| GraphError::Csv(e.to_string()))?;
            let row = record
                .iter()
                .enumerate()
                .map(|(j, cell)| {
                    cell.parse::<u8>().map_err(|_| GraphError::InvalidEntry {
                        row: i + 1,
                        col: j + 1,
                        value: cell.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }
}

impl fmt::Debug for DirectedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DirectedGraph(n={})", self.n)?;
        for row in self.rows() {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

/// `{ "n": int, "edges": [[from, to], ...] }` with 1-based labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

/// The topologies used throughout the tests and built-in scenarios.
pub mod fixtures {
    use super::DirectedGraph;

    pub const CASE1_ADJACENCY: [[u8; 4]; 4] = [[1, 1, 0, 0], [0, 1, 1, 0], [1, 0, 1, 1], [0, 1, 0, 1]];

    pub const CASE2_ADJACENCY: [[u8; 10]; 10] = [
        [1, 1, 0, 0, 1, 1, 0, 1, 0, 0],
        [0, 1, 1, 0, 0, 0, 1, 0, 1, 0],
        [1, 0, 1, 1, 0, 0, 1, 1, 0, 1],
        [0, 1, 0, 1, 0, 1, 0, 0, 1, 0],
        [0, 0, 0, 0, 1, 0, 0, 0, 0, 1],
        [0, 0, 0, 0, 0, 1, 0, 1, 0, 0],
        [0, 0, 0, 0, 0, 0, 1, 0, 0, 1],
        [0, 1, 0, 0, 1, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, 1, 0, 1, 0, 1, 1],
    ];

    /// Out-neighbour sets of the three-unit dispatch example.
    pub const DISPATCH3_ADJACENCY: [[u8; 3]; 3] = [[1, 1, 0], [0, 1, 1], [1, 1, 1]];

    fn from_array<const N: usize>(a: &[[u8; N]; N]) -> DirectedGraph {
        let rows: Vec<Vec<u8>> = a.iter().map(|r| r.to_vec()).collect();
        DirectedGraph::from_rows(&rows).expect("fixture adjacency is valid")
    }

    pub fn case1() -> DirectedGraph {
        from_array(&CASE1_ADJACENCY)
    }

    pub fn case2() -> DirectedGraph {
        from_array(&CASE2_ADJACENCY)
    }

    /// Case 2 with node 9 reading node 1 (edge 9→1, 1-based).
    pub fn case2_repaired() -> DirectedGraph {
        case2().with_edge(8, 0, true).expect("valid edge")
    }

    pub fn dispatch3() -> DirectedGraph {
        from_array(&DISPATCH3_ADJACENCY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case1_from_edge_list_matches_matrix() {
        let edges = [(1, 1), (1, 2), (2, 2), (2, 3), (3, 1), (3, 3), (3, 4), (4, 2), (4, 4)];
        let g = DirectedGraph::from_labels(4, &edges).unwrap();
        assert_eq!(g, fixtures::case1());
    }

    #[test]
    fn case2_edge_count() {
        let g = fixtures::case2();
        let off_diagonal = g.edges().iter().filter(|(i, j)| i != j).count();
        assert_eq!(off_diagonal, 24);
        assert!(!g.has_self_loop(7));
        assert_eq!(g.row(8).collect::<Vec<_>>(), vec![8]);
    }

    #[test]
    fn single_self_loop() {
        let g = DirectedGraph::new(1, &[(0, 0)]).unwrap();
        assert_eq!(g.rows(), vec![vec![1]]);
    }

    #[test]
    fn duplicates_collapse() {
        let g = DirectedGraph::new(2, &[(0, 1), (0, 1), (1, 1)]).unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn rejects_out_of_range_and_zero_rows() {
        assert_eq!(
            DirectedGraph::new(2, &[(0, 2)]),
            Err(GraphError::EndpointOutOfRange { from: 1, to: 3, n: 2 })
        );
        assert_eq!(
            DirectedGraph::new(2, &[(0, 0)]),
            Err(GraphError::ZeroRow { node: 2 })
        );
        assert_eq!(DirectedGraph::new(0, &[]), Err(GraphError::Empty));
        assert!(DirectedGraph::from_labels(2, &[(0, 1)]).is_err());
    }

    #[test]
    fn rejects_non_binary_rows() {
        let err = DirectedGraph::from_rows(&[vec![1, 2], vec![0, 1]]).unwrap_err();
        assert!(matches!(err, GraphError::InvalidEntry { row: 1, col: 2, .. }));
        let err = DirectedGraph::from_rows(&[vec![1, 0], vec![1]]).unwrap_err();
        assert!(matches!(err, GraphError::NotSquare { row: 2, .. }));
    }

    #[test]
    fn json_and_csv_round_trip() {
        let g = fixtures::case2();
        let json = serde_json::to_string(&g.to_json()).unwrap();
        let back: GraphJson = serde_json::from_str(&json).unwrap();
        assert_eq!(DirectedGraph::from_json(&back).unwrap(), g);
        assert_eq!(DirectedGraph::from_csv(&g.to_csv()).unwrap(), g);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(DirectedGraph::from_csv("1,x\n0,1\n").is_err());
        assert!(DirectedGraph::from_csv("").is_err());
    }

    #[test]
    fn remove_node_shifts_labels() {
        let g = fixtures::case1();
        let h = g.without_node(0).unwrap();
        assert_eq!(h.n(), 3);
        // Old rows 2..4 become rows 1..3 without column 1.
        assert_eq!(h.rows(), vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        // Node 1 of case 1 reads only node 2 besides itself; removing node 2 is fine
        // only because of its self-loop.
        assert!(g.without_node(1).is_ok());
        let fragile = DirectedGraph::new(2, &[(0, 1), (1, 1)]).unwrap();
        assert_eq!(fragile.without_node(1), Err(GraphError::ZeroRow { node: 1 }));
    }

    #[test]
    fn add_node_and_symmetrize() {
        let g = fixtures::dispatch3();
        let h = g.with_added_node(&[0], &[2]).unwrap();
        assert_eq!(h.n(), 4);
        assert!(h.has_edge(3, 3) && h.has_edge(3, 0) && h.has_edge(2, 3));
        let s = g.symmetrized();
        assert!(s.is_symmetric());
        assert!(!g.is_symmetric());
        assert!(s.has_edge(1, 0) && s.has_edge(0, 2));
    }
}
