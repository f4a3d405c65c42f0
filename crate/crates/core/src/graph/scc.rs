//! Strongly connected components and strong-connectivity augmentation.
//!
//! Edges are taken in the "reads" direction: `i → j` when `a[i][j] = 1`.
//! A closed component is then a sink of the condensation: its nodes only
//! ever average values held inside the component, so in a graph that is not
//! strongly connected the closed components dictate the limit.

use super::DirectedGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccReport {
    /// Components with sorted members, ordered by their smallest member.
    pub components: Vec<Vec<usize>>,
    /// `component_of[v]` indexes into `components`.
    pub component_of: Vec<usize>,
    /// Condensation DAG: sorted, deduplicated successor lists per component.
    pub condensation: Vec<Vec<usize>>,
    /// Indices of components with no outgoing condensation edge.
    pub closed_components: Vec<usize>,
    pub is_strongly_connected: bool,
    /// Nodes in closed components of a graph that is not strongly connected:
    /// they never incorporate information from the rest of the network.
    pub isolated_sources: Vec<usize>,
}

impl SccReport {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Members of each closed component.
    pub fn closed_members(&self) -> Vec<&[usize]> {
        self.closed_components
            .iter()
            .map(|&c| self.components[c].as_slice())
            .collect()
    }
}

/// Tarjan's algorithm without recursion. Returns components in the order
/// they are completed (reverse topological order of the condensation).
pub(crate) fn tarjan(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = adjacency.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next_index = 0;
    // (vertex, position of the next successor to look at)
    let mut call_stack: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call_stack.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call_stack.last_mut() {
            if let Some(&w) = adjacency[v].get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call_stack.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call_stack.pop();
            if let Some(&(parent, _)) = call_stack.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                components.push(component);
            }
        }
    }
    components
}

/// Partitions `g` into strongly connected components and finds the closed ones.
pub fn scc_analyze(g: &DirectedGraph) -> SccReport {
    scc_analyze_lists(&g.adjacency_lists())
}

/// [`scc_analyze`] on raw successor lists. Nodes may have no successors.
pub fn scc_analyze_lists(adjacency: &[Vec<usize>]) -> SccReport {
    let n = adjacency.len();
    let mut components = tarjan(adjacency);
    for c in &mut components {
        c.sort_unstable();
    }
    components.sort_unstable_by_key(|c| c[0]);

    let mut component_of = vec![0; n];
    for (ci, c) in components.iter().enumerate() {
        for &v in c {
            component_of[v] = ci;
        }
    }

    let mut condensation = vec![Vec::new(); components.len()];
    for (v, succ) in adjacency.iter().enumerate() {
        for &w in succ {
            let (cv, cw) = (component_of[v], component_of[w]);
            if cv != cw {
                condensation[cv].push(cw);
            }
        }
    }
    for out in &mut condensation {
        out.sort_unstable();
        out.dedup();
    }

    let closed_components: Vec<usize> = (0..components.len())
        .filter(|&c| condensation[c].is_empty())
        .collect();
    let is_strongly_connected = components.len() == 1;
    let isolated_sources = if is_strongly_connected {
        Vec::new()
    } else {
        let mut nodes: Vec<usize> = closed_components
            .iter()
            .flat_map(|&c| components[c].iter().copied())
            .collect();
        nodes.sort_unstable();
        nodes
    };

    SccReport {
        components,
        component_of,
        condensation,
        closed_components,
        is_strongly_connected,
        isolated_sources,
    }
}

/// A minimum set of 0-based `(from, to)` edges whose addition makes `g`
/// strongly connected.
///
/// Eswaran–Tarjan augmentation on the condensation: closed (sink) components
/// are chained into source components, with isolated components threaded
/// into the same cycle. The result has `max(sources, sinks)` edges (isolated
/// components count as both), which is the lower bound. Each component is
/// represented by its lowest node, and all choices follow ascending labels.
pub fn suggest_repair(g: &DirectedGraph, report: &SccReport) -> Vec<(usize, usize)> {
    debug_assert_eq!(report.component_of.len(), g.n());
    let dag = &report.condensation;
    let k = dag.len();
    if k <= 1 {
        return Vec::new();
    }

    let mut indegree = vec![0usize; k];
    for succ in dag {
        for &c in succ {
            indegree[c] += 1;
        }
    }
    let sources = (0..k).filter(|&c| indegree[c] == 0 && !dag[c].is_empty()).count();
    let sinks = (0..k).filter(|&c| indegree[c] > 0 && dag[c].is_empty()).count();

    let component_edges = if sources <= sinks {
        augment(dag)
    } else {
        let mut reversed = vec![Vec::new(); k];
        for (c, succ) in dag.iter().enumerate() {
            for &d in succ {
                reversed[d].push(c);
            }
        }
        for r in &mut reversed {
            r.sort_unstable();
        }
        augment(&reversed).into_iter().map(|(a, b)| (b, a)).collect()
    };

    component_edges
        .into_iter()
        .map(|(a, b)| (report.components[a][0], report.components[b][0]))
        .collect()
}

/// Augmentation for a DAG with at least as many sinks as sources.
/// Returns edges between component indices.
fn augment(dag: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let k = dag.len();
    let mut indegree = vec![0usize; k];
    for succ in dag {
        for &c in succ {
            indegree[c] += 1;
        }
    }
    let is_sink = |c: usize| dag[c].is_empty() && indegree[c] > 0;
    let sources: Vec<usize> = (0..k).filter(|&c| indegree[c] == 0 && !dag[c].is_empty()).collect();
    let isolated: Vec<usize> = (0..k).filter(|&c| indegree[c] == 0 && dag[c].is_empty()).collect();

    // Greedy source→sink pairing; vertices stay marked across searches so
    // paired sources reach disjoint parts of the DAG.
    let mut marked = vec![false; k];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for &v in &sources {
        if marked[v] {
            continue;
        }
        // Marking happens on visit, not on push: a vertex that was only
        // queued must stay available to later searches.
        let mut stack = vec![v];
        let mut found = None;
        while let Some(x) = stack.pop() {
            if marked[x] {
                continue;
            }
            marked[x] = true;
            if is_sink(x) {
                found = Some(x);
                break;
            }
            stack.extend(dag[x].iter().rev().filter(|&&y| !marked[y]));
        }
        if let Some(w) = found {
            pairs.push((v, w));
        }
    }

    let paired_sources: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let paired_sinks: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let mut v_list = paired_sources.clone();
    v_list.extend(sources.iter().filter(|c| !paired_sources.contains(c)));
    let mut w_list = paired_sinks.clone();
    w_list.extend((0..k).filter(|&c| is_sink(c) && !paired_sinks.contains(&c)));

    let p = pairs.len();
    let s = v_list.len();
    let t = w_list.len();
    let mut edges = Vec::with_capacity(t + isolated.len());

    if p == 0 {
        // Only isolated components: close them into one cycle.
        for i in 0..isolated.len() {
            edges.push((isolated[i], isolated[(i + 1) % isolated.len()]));
        }
        return edges;
    }

    for i in 0..p - 1 {
        edges.push((w_list[i], v_list[i + 1]));
    }
    for i in p..s {
        edges.push((w_list[i], v_list[i]));
    }
    let mut last = w_list[p - 1];
    for &w in &w_list[s..t] {
        edges.push((last, w));
        last = w;
    }
    for &x in &isolated {
        edges.push((last, x));
        last = x;
    }
    edges.push((last, v_list[0]));
    edges
}
