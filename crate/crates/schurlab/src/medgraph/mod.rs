//! Finite graphs with cached distances, tree balls, products, the Cayley
//! graph of ℤ₃∗ℤ₃∗ℤ₃ with its Serre tree, and median complexes with the
//! polytope machinery used by the cube-complex witnesses.

mod cayley;
mod complex;
pub mod corpus;
mod tree;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cayley::{cayley_ball, serre_embedding, serre_shift, CayleyBall, Letter, SerreCheck, SerreShift, SerreTree, SerreVertex};
pub use complex::{
    cardinality_constant, BSet, MedianComplex, MedianValidation, MizutaVectors, Polytope, PolytopeReport,
    SageevReport,
};
pub use corpus::{cube, grid, staircase, three_squares, TreeProduct};
pub use tree::{base_geodesic, geodesic_meet, tree_ball, tree_ball_with_ray, GeodesicMeet, TreeBall};

/// Largest vertex count any builder accepts (the distance table is n² u16).
pub const VERTEX_BUDGET: usize = 6000;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGraph {
    pub labels: Vec<String>,
    adj: Vec<Vec<usize>>,
    dist: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_ray: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
}

pub(crate) fn check_budget(n: usize) -> Result<()> {
    if n > VERTEX_BUDGET {
        Err(Error::SizeLimit { requested: n, limit: VERTEX_BUDGET })
    } else {
        Ok(())
    }
}

impl FiniteGraph {
    /// Builds the graph and its all-pairs BFS distances; rejects loops,
    /// out-of-range endpoints, and disconnected inputs.
    pub fn new(labels: Vec<String>, edges: &[[usize; 2]]) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidInput("graph needs a vertex".into()));
        }
        check_budget(n)?;
        let mut adj = vec![Vec::new(); n];
        for &[a, b] in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidInput(format!("bad edge [{a}, {b}]")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        let mut dist = vec![u16::MAX; n * n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            row[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let du = row[u];
                for &v in &adj[u] {
                    if row[v] == u16::MAX {
                        row[v] = du + 1;
                        queue.push_back(v);
                    }
                }
            }
            if row.contains(&u16::MAX) {
                return Err(Error::InvalidInput("graph is not connected".into()));
            }
        }
        Ok(FiniteGraph { labels, adj, dist })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn d(&self, a: usize, b: usize) -> usize {
        self.dist[a * self.len() + b] as usize
    }

    /// Distances from `a` to every vertex.
    pub fn row(&self, a: usize) -> &[u16] {
        let n = self.len();
        &self.dist[a * n..(a + 1) * n]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut out = Vec::new();
        for (a, row) in self.adj.iter().enumerate() {
            for &b in row {
                if a < b {
                    out.push([a, b]);
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn diameter(&self) -> usize {
        self.dist.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// I(a, b) as a membership test.
    #[inline]
    pub fn in_interval(&self, a: usize, b: usize, v: usize) -> bool {
        self.d(a, v) + self.d(v, b) == self.d(a, b)
    }

    pub fn interval(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.in_interval(a, b, v)).collect()
    }

    /// 2-colouring from vertex 0, `None` when an odd cycle exists.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let side: Vec<bool> = (0..self.len()).map(|v| self.d(0, v) % 2 == 1).collect();
        self.edges().iter().all(|&[a, b]| side[a] != side[b]).then_some(side)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson { vertices: self.labels.clone(), edges: self.edges(), base_ray: None, dimension: None }
    }

    pub fn from_json(g: &GraphJson) -> Result<Self> {
        FiniteGraph::new(g.vertices.clone(), &g.edges)
    }
}

/// A product graph with its factors, indexed in mixed radix (first factor
/// most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGraph {
    pub graph: FiniteGraph,
    pub factor_sizes: Vec<usize>,
}

impl ProductGraph {
    pub fn coords(&self, mut v: usize) -> Vec<usize> {
        let mut c = vec![0; self.factor_sizes.len()];
        for i in (0..self.factor_sizes.len()).rev() {
            c[i] = v % self.factor_sizes[i];
            v /= self.factor_sizes[i];
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.factor_sizes).fold(0, |acc, (&c, &s)| acc * s + c)
    }
}

pub fn product_graph(factors: &[&FiniteGraph]) -> Result<ProductGraph> {
    if factors.is_empty() {
        return Err(Error::InvalidInput("product needs at least one factor".into()));
    }
    let sizes: Vec<usize> = factors.iter().map(|f| f.len()).collect();
    let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s)).unwrap_or(usize::MAX);
    check_budget(total)?;
    let shell = ProductGraph { graph: FiniteGraph { labels: Vec::new(), adj: Vec::new(), dist: Vec::new() }, factor_sizes: sizes.clone() };
    let mut labels = Vec::with_capacity(total);
    let mut edges = Vec::new();
    for v in 0..total {
        let c = shell.coords(v);
        if factors.len() == 1 {
            labels.push(factors[0].labels[c[0]].clone());
        } else {
            let parts: Vec<&str> = c.iter().zip(factors).map(|(&ci, f)| f.labels[ci].as_str()).collect();
            labels.push(format!("({})", parts.join(",")));
        }
        for (i, f) in factors.iter().enumerate() {
            for &nb in f.neighbors(c[i]) {
                if nb > c[i] {
                    let mut c2 = c.clone();
                    c2[i] = nb;
                    edges.push([v, shell.index(&c2)]);
                }
            }
        }
    }
    Ok(ProductGraph { graph: FiniteGraph::new(labels, &edges)?, factor_sizes: sizes })
}

/// P(x) = (-1)^{d(x, x0)}, checked against P(x)P(y) = (-1)^{d(x,y)} on all pairs.
pub fn parity_witness(graph: &FiniteGraph, x0: usize) -> Result<Vec<i8>> {
    if graph.bipartition().is_none() {
        return Err(Error::NotBipartite);
    }
    let p: Vec<i8> = (0..graph.len()).map(|v| if graph.d(x0, v) % 2 == 0 { 1 } else { -1 }).collect();
    for x in 0..graph.len() {
        for y in 0..graph.len() {
            let expect = if graph.d(x, y) % 2 == 0 { 1 } else { -1 };
            if p[x] * p[y] != expect {
                return Err(Error::NotBipartite);
            }
        }
    }
    Ok(p)
}

/// Path graph on `n` vertices.
pub fn path_graph(n: usize) -> Result<FiniteGraph> {
    let labels = (0..n).map(|i| i.to_string()).collect();
    let edges: Vec<[usize; 2]> = (1..n).map(|i| [i - 1, i]).collect();
    FiniteGraph::new(labels, &edges)
}
