//! Communication graphs for limited-information greedy.
//!
//! Agents plan in a fixed order; agent i sees the choices of in-neighbors
//! N_i ⊆ {1..i−1}, so the graph is a DAG respecting the planning order. The
//! limited-information bound is governed by the fractional clique cover
//! number k*(G) of the undirected closure, computed exactly as a covering
//! LP over the maximal cliques. Weights on non-maximal cliques can always be
//! shifted to a maximal superset without raising the objective, so maximal
//! cliques suffice for the optimum.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{simplex_min_ge, LpSolution};
use crate::setfn::Mask;

/// Agent budget for clique enumeration and the cover LP.
pub const MAX_AGENTS: usize = 20;

/// In-neighbor structure over agents 1..=n (stored 0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    n: usize,
    /// in_neighbors[i] ⊆ {0..i−1}, ascending.
    in_neighbors: Vec<Vec<usize>>,
}

impl CommGraph {
    /// `in_neighbors[i]` lists the 0-based agents visible to agent i; each
    /// entry must be < i and unique.
    pub fn new(in_neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = in_neighbors.len();
        if n == 0 {
            return Err(Error::Domain("communication graph needs at least one agent".into()));
        }
        if n > MAX_AGENTS {
            return Err(Error::Capacity(format!("at most {MAX_AGENTS} agents, got {n}")));
        }
        let mut cleaned = Vec::with_capacity(n);
        for (i, mut nbrs) in in_neighbors.into_iter().enumerate() {
            nbrs.sort_unstable();
            for w in nbrs.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::Domain(format!(
                        "agent {} lists in-neighbor {} twice",
                        i + 1,
                        w[0] + 1
                    )));
                }
            }
            if let Some(&j) = nbrs.iter().find(|&&j| j >= i) {
                return Err(Error::Domain(format!(
                    "agent {} lists in-neighbor {}; in-neighbors must precede the agent",
                    i + 1,
                    j + 1
                )));
            }
            cleaned.push(nbrs);
        }
        Ok(Self { n, in_neighbors: cleaned })
    }

    /// Complete graph: N_i = {1..i−1}.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (0..i).collect()).collect())
    }

    /// Empty graph: N_i = ∅.
    pub fn empty(n: usize) -> Result<Self> {
        Self::new(vec![Vec::new(); n])
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    pub fn in_neighbors(&self, agent0: usize) -> &[usize] {
        &self.in_neighbors[agent0]
    }

    /// Adjacency of the undirected closure, one mask per agent.
    pub fn undirected_adjacency(&self) -> Vec<u32> {
        let mut adj = vec![0u32; self.n];
        for (i, nbrs) in self.in_neighbors.iter().enumerate() {
            for &j in nbrs {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
        adj
    }

    /// Drops one undirected edge (i, j); used by the monotonicity tests.
    pub fn without_edge(&self, i: usize, j: usize) -> Result<Self> {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let mut nbrs = self.in_neighbors.clone();
        nbrs[hi].retain(|&v| v != lo);
        Self::new(nbrs)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CommGraphFile = serde_json::from_str(text)?;
        file.into_graph()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CommGraphFile::from_graph(self))?)
    }
}

/// File schema: `{"n": 4, "in_neighbors": {"2": [1], "3": [1,2], "4": []}}`,
/// all indices 1-based; agents without an entry default to no in-neighbors.
#[derive(Debug, Serialize, Deserialize)]
struct CommGraphFile {
    n: usize,
    #[serde(default)]
    in_neighbors: BTreeMap<String, Vec<usize>>,
}

impl CommGraphFile {
    fn into_graph(self) -> Result<CommGraph> {
        let mut nbrs = vec![Vec::new(); self.n];
        for (key, list) in self.in_neighbors {
            let agent: usize = key
                .parse()
                .map_err(|_| Error::Domain(format!("bad agent key {key:?}")))?;
            if agent == 0 || agent > self.n {
                return Err(Error::Domain(format!("agent key {agent} outside 1..={}", self.n)));
            }
            let mut converted = Vec::with_capacity(list.len());
            for j in list {
                if j == 0 || j > self.n {
                    return Err(Error::Domain(format!("in-neighbor {j} outside 1..={}", self.n)));
                }
                converted.push(j - 1);
            }
            nbrs[agent - 1] = converted;
        }
        CommGraph::new(nbrs)
    }

    fn from_graph(g: &CommGraph) -> Self {
        let mut map = BTreeMap::new();
        for i in 0..g.n {
            if !g.in_neighbors[i].is_empty() {
                map.insert(
                    (i + 1).to_string(),
                    g.in_neighbors[i].iter().map(|&j| j + 1).collect(),
                );
            }
        }
        Self { n: g.n, in_neighbors: map }
    }
}

/// All maximal cliques of the undirected closure, each an ascending list of
/// 0-based agents, sorted canonically (size, then lexicographic).
///
/// Bron–Kerbosch with pivoting on bitset vertex sets.
pub fn enumerate_cliques(g: &CommGraph) -> Result<Vec<Vec<usize>>> {
    let n = g.n_agents();
    if n > MAX_AGENTS {
        return Err(Error::Capacity(format!("clique enumeration limited to {MAX_AGENTS} agents")));
    }
    let adj = g.undirected_adjacency();
    let mut out: Vec<u32> = Vec::new();
    let all = if n == 32 { !0u32 } else { (1u32 << n) - 1 };
    bron_kerbosch(&adj, 0, all, 0, &mut out);
    let mut cliques: Vec<Vec<usize>> = out
        .into_iter()
        .map(|m| (0..n).filter(|&i| m & (1 << i) != 0).collect())
        .collect();
    cliques.sort_by(|x, y| (x.len(), x.as_slice()).cmp(&(y.len(), y.as_slice())));
    Ok(cliques)
}

fn bron_kerbosch(adj: &[u32], r: u32, p: u32, x: u32, out: &mut Vec<u32>) {
    if p == 0 && x == 0 {
        out.push(r);
        return;
    }
    // pivot: vertex of P ∪ X with the most neighbors in P
    let mut pivot = None;
    let mut best = -1i32;
    let mut px = p | x;
    while px != 0 {
        let u = px.trailing_zeros() as usize;
        px &= px - 1;
        let deg = (p & adj[u]).count_ones() as i32;
        if deg > best {
            best = deg;
            pivot = Some(u);
        }
    }
    let mut candidates = p & !adj[pivot.unwrap()];
    let mut p = p;
    let mut x = x;
    while candidates != 0 {
        let v = candidates.trailing_zeros() as usize;
        let vbit = 1u32 << v;
        candidates &= candidates - 1;
        bron_kerbosch(adj, r | vbit, p & adj[v], x & adj[v], out);
        p &= !vbit;
        x |= vbit;
    }
}

/// Optimal fractional clique cover: weights y_c ≥ 0 over the maximal
/// cliques with Σ_{c ∋ i} y_c ≥ 1 for every agent, minimizing Σ y_c. The
/// objective is the fractional clique cover number k*(G).
#[derive(Debug, Clone, Serialize)]
pub struct CliqueCoverSolution {
    /// Maximal cliques, agents 1-based for presentation.
    pub cliques: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    pub objective: f64,
}

pub fn fractional_clique_cover(g: &CommGraph) -> Result<CliqueCoverSolution> {
    let n = g.n_agents();
    let cliques = enumerate_cliques(g)?;
    let mut a = vec![vec![0.0; cliques.len()]; n];
    for (j, clique) in cliques.iter().enumerate() {
        for &i in clique {
            a[i][j] = 1.0;
        }
    }
    let b = vec![1.0; n];
    let c = vec![1.0; cliques.len()];
    let LpSolution { objective, x } = simplex_min_ge(&a, &b, &c)?;

    // feasibility of the returned weights, belt and braces
    for (i, row) in a.iter().enumerate() {
        let cover: f64 = row.iter().zip(&x).map(|(aij, yj)| aij * yj).sum();
        if cover < 1.0 - 1e-9 {
            return Err(Error::Validation(format!(
                "cover LP returned weights leaving agent {} covered only {cover}",
                i + 1
            )));
        }
    }
    Ok(CliqueCoverSolution {
        cliques: cliques.iter().map(|c| c.iter().map(|&i| i + 1).collect()).collect(),
        weights: x,
        objective,
    })
}

/// The plan subset visible to `agent0`: {x_j : j ∈ N_i} as a mask over
/// ground elements. `assignments` holds the chosen element index of every
/// preceding agent, in agent order.
pub fn neighbor_context(g: &CommGraph, agent0: usize, assignments: &[usize]) -> Result<Mask> {
    if agent0 >= g.n_agents() {
        return Err(Error::Domain(format!("agent {} out of range", agent0 + 1)));
    }
    if assignments.len() < agent0 {
        return Err(Error::Domain(format!(
            "agent {} needs assignments for all {} predecessors, got {}",
            agent0 + 1,
            agent0,
            assignments.len()
        )));
    }
    let mut mask = 0u64;
    for &j in g.in_neighbors(agent0) {
        mask |= 1u64 << assignments[j];
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_cycle() -> CommGraph {
        // undirected C5 as a DAG: 2←1, 3←2, 4←3, 5←4, 5←1
        CommGraph::new(vec![vec![], vec![0], vec![1], vec![2], vec![3, 0]]).unwrap()
    }

    #[test]
    fn construction_validates() {
        assert!(CommGraph::new(vec![vec![], vec![1]]).is_err()); // self/forward edge
        assert!(CommGraph::new(vec![vec![0]]).is_err());
        assert!(CommGraph::new(vec![vec![], vec![0, 0]]).is_err());
        assert!(CommGraph::new(vec![]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{ "n": 4, "in_neighbors": {"2": [1], "3": [1,2], "4": []} }"#;
        let g = CommGraph::from_json(text).unwrap();
        assert_eq!(g.in_neighbors(1), &[0]);
        assert_eq!(g.in_neighbors(2), &[0, 1]);
        assert_eq!(g.in_neighbors(3), &[] as &[usize]);
        let back = CommGraph::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn cliques_complete_graph() {
        let g = CommGraph::complete(4).unwrap();
        let cliques = enumerate_cliques(&g).unwrap();
        assert_eq!(cliques, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn cliques_empty_graph() {
        let g = CommGraph::empty(3).unwrap();
        let cliques = enumerate_cliques(&g).unwrap();
        assert_eq!(cliques, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn cliques_five_cycle_are_edges() {
        let cliques = enumerate_cliques(&five_cycle()).unwrap();
        assert_eq!(cliques.len(), 5);
        assert!(cliques.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn cover_number_extremes() {
        for n in 1..=6 {
            let complete = fractional_clique_cover(&CommGraph::complete(n).unwrap()).unwrap();
            assert!((complete.objective - 1.0).abs() < 1e-9);
            let empty = fractional_clique_cover(&CommGraph::empty(n).unwrap()).unwrap();
            assert!((empty.objective - n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn cover_number_five_cycle() {
        let sol = fractional_clique_cover(&five_cycle()).unwrap();
        assert!((sol.objective - 2.5).abs() < 1e-9);
        // symmetric optimum puts 1/2 on each edge
        assert!(sol.weights.iter().all(|&w| w >= -1e-12));
    }

    #[test]
    fn neighbor_context_cases() {
        let g = CommGraph::new(vec![vec![], vec![0], vec![0]]).unwrap();
        // x = (element 3, element 7, _)
        assert_eq!(neighbor_context(&g, 2, &[3, 7]).unwrap(), 1 << 3);
        assert_eq!(neighbor_context(&g, 0, &[]).unwrap(), 0);
        let complete = CommGraph::complete(3).unwrap();
        assert_eq!(neighbor_context(&complete, 2, &[3, 7]).unwrap(), (1 << 3) | (1 << 7));
        let empty = CommGraph::empty(3).unwrap();
        assert_eq!(neighbor_context(&empty, 2, &[3, 7]).unwrap(), 0);
        assert!(neighbor_context(&g, 2, &[3]).is_err());
    }
}
