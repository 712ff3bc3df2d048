//! Undirected dependency graphs with bounded degree.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Simple undirected graph on vertices 0..n. Adjacency is stored per vertex
/// in sorted order, so neighbor enumeration is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    n: usize,
    adjacency: Vec<BTreeSet<usize>>,
}

impl DependencyGraph {
    /// Graph with no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adjacency: vec![BTreeSet::new(); n],
        }
    }

    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::InvalidEdge {
                u,
                v,
                reason: format!("vertex out of range for n = {}", self.n),
            });
        }
        if u == v {
            return Err(Error::InvalidEdge {
                u,
                v,
                reason: "self-loop".to_string(),
            });
        }
        self.adjacency[u].insert(v);
        self.adjacency[v].insert(u);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighbors of `i` in ascending order.
    pub fn neighbors(&self, i: usize) -> Result<Vec<usize>> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(self.adjacency[i].iter().copied().collect())
    }

    pub fn degree(&self, i: usize) -> Result<usize> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(self.adjacency[i].len())
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adjacency[u].contains(&v)
    }

    /// True iff every pair of distinct vertices in `vars` is an edge.
    /// Singletons and the empty set are cliques.
    pub fn is_clique(&self, vars: &[usize]) -> bool {
        for (a, &u) in vars.iter().enumerate() {
            for &v in &vars[a + 1..] {
                if u != v && !self.has_edge(u, v) {
                    return false;
                }
            }
        }
        true
    }

    /// Edge list with u < v, sorted; the canonical serialized form.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for &v in nbrs {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// All triangles (u < v < w pairwise adjacent).
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            let nbrs: Vec<usize> = nbrs.iter().copied().filter(|&v| v > u).collect();
            for (a, &v) in nbrs.iter().enumerate() {
                for &w in &nbrs[a + 1..] {
                    if self.has_edge(v, w) {
                        out.push([u, v, w]);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_symmetry() {
        let g = DependencyGraph::new(4, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(g.neighbors(1).unwrap(), vec![0, 2]);
        assert!(g.has_edge(2, 1) && g.has_edge(1, 2));
        assert_eq!(g.max_degree(), 2);
        assert_eq!(g.degree(3).unwrap(), 0);
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn rejects_self_loops_and_bad_vertices() {
        assert!(DependencyGraph::new(3, &[(1, 1)]).is_err());
        assert!(DependencyGraph::new(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn clique_checks() {
        let g = DependencyGraph::new(4, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(g.is_clique(&[0, 1, 2]));
        assert!(g.is_clique(&[1]));
        assert!(g.is_clique(&[]));
        assert!(!g.is_clique(&[0, 3]));
        assert_eq!(g.triangles(), vec![[0, 1, 2]]);
    }

    #[test]
    fn duplicate_edges_are_idempotent() {
        let g = DependencyGraph::new(3, &[(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.degree(0).unwrap(), 1);
    }
}
