#![allow(dead_code)]

use misaka_core::graph::DirectedGraph;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Random adjacency with edge probability `p`; rows may be empty.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<Vec<bool>> {
    (0..n).map(|_| (0..n).map(|_| rng.gen_bool(p)).collect()).collect()
}

/// Random valid graph: every row gets at least one entry.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> DirectedGraph {
    let mut a = random_matrix(rng, n, p);
    for row in &mut a {
        if !row.contains(&true) {
            row[rng.gen_range(0..n)] = true;
        }
    }
    from_bools(&a)
}

/// Self-loops everywhere, a random Hamiltonian cycle, and extra edges with
/// probability `p`: strongly connected and aperiodic.
pub fn random_strongly_connected(rng: &mut ChaCha8Rng, n: usize, p: f64) -> DirectedGraph {
    let mut a = random_matrix(rng, n, p);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for k in 0..n {
        a[k][k] = true;
        a[order[k]][order[(k + 1) % n]] = true;
    }
    from_bools(&a)
}

pub fn from_bools(a: &[Vec<bool>]) -> DirectedGraph {
    let rows: Vec<Vec<u8>> = a.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect();
    DirectedGraph::from_rows(&rows).expect("rows are nonzero")
}

pub fn to_bools(g: &DirectedGraph) -> Vec<Vec<bool>> {
    (0..g.n()).map(|i| (0..g.n()).map(|j| g.has_edge(i, j)).collect()).collect()
}

pub fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect()
}

/// Reflexive-transitive closure by repeated boolean matrix products:
/// `R_0 = I ∨ A`, `R_{k+1} = R_k · R_0`, stopped after `n` products.
pub fn reachability(a: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let base: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || a[i][j]).collect()).collect();
    let mut r = base.clone();
    for _ in 0..n {
        let next: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).any(|k| r[i][k] && base[k][j])).collect())
            .collect();
        if next == r {
            break;
        }
        r = next;
    }
    r
}

/// Component label per node (lowest member), from mutual reachability.
pub fn oracle_components(r: &[Vec<bool>]) -> Vec<usize> {
    let n = r.len();
    (0..n)
        .map(|i| (0..n).find(|&j| r[i][j] && r[j][i]).expect("i reaches itself"))
        .collect()
}

/// Minimum number of edges making the graph strongly connected: 0 if it
/// already is, else max(#source components, #sink components) counting an
/// isolated component as both.
pub fn oracle_min_repair(a: &[Vec<bool>]) -> usize {
    let n = a.len();
    let r = reachability(a);
    let label = oracle_components(&r);
    let mut reps: Vec<usize> = label.clone();
    reps.sort_unstable();
    reps.dedup();
    if reps.len() == 1 {
        return 0;
    }
    let has_out = |c: usize| (0..n).any(|i| label[i] == c && (0..n).any(|j| a[i][j] && label[j] != c));
    let has_in = |c: usize| (0..n).any(|j| label[j] == c && (0..n).any(|i| a[i][j] && label[i] != c));
    let sinks = reps.iter().filter(|&&c| !has_out(c)).count();
    let sources = reps.iter().filter(|&&c| !has_in(c)).count();
    sinks.max(sources)
}

pub fn strongly_connected(a: &[Vec<bool>]) -> bool {
    reachability(a).iter().all(|row| row.iter().all(|&x| x))
}
