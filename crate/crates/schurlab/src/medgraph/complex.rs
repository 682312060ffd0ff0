use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::binomial;

use super::{FiniteGraph, GraphJson};

/// Triple checks switch from exhaustive to sampled above this vertex count.
const EXHAUSTIVE_TRIPLES_UP_TO: usize = 150;
const SAMPLED_TRIPLES: usize = 100_000;
const TRIPLE_SEED: u64 = 0x6d65_6469_616e;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MedianValidation {
    pub triples_checked: usize,
    pub exhaustive: bool,
    pub hyperplanes: usize,
    pub dimension: usize,
    /// Number of distinct cubes per dimension, starting at dimension 0.
    pub cube_counts: Vec<usize>,
}

/// An l-polytope: the vertices at distance `distance` from `corner` inside
/// an (l+1)-cube. Level 0 polytopes are single vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polytope {
    pub level: usize,
    pub vertices: Vec<usize>,
    pub cube: Vec<usize>,
    pub corner: usize,
    pub distance: usize,
}

/// Finite median graph with a base ray, hyperplanes, cubes, and the
/// polytope universe.
///
/// The finite ray stands for an infinite ray glued at its last vertex z;
/// since z is then a gate, m(x₁, x₂) = μ(x₁, x₂, z) and A(x, k) is the
/// k-sphere of x inside I(x, z). Both are compared with the same
/// construction at the previous ray vertex, and disagreement is reported
/// as RAY_TOO_SHORT.
#[derive(Debug, Clone)]
pub struct MedianComplex {
    pub label: String,
    pub graph: FiniteGraph,
    pub base_ray: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
    edge_index: HashMap<(usize, usize), usize>,
    pub hyperplane_of: Vec<usize>,
    /// One edge per hyperplane.
    pub hyperplane_rep: Vec<[usize; 2]>,
    pub dimension: usize,
    /// Polytopes of level ≥ 1; their global id is `n + index`.
    higher: Vec<Polytope>,
    incidence: Vec<Vec<usize>>,
    pub validation: MedianValidation,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn common_neighbors(g: &FiniteGraph, a: usize, b: usize) -> Vec<usize> {
    let (na, nb) = (g.neighbors(a), g.neighbors(b));
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < na.len() && j < nb.len() {
        match na[i].cmp(&nb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(na[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Vertex maps (indexed by subsets of `dirs`) of every cube with corner `w`.
fn cubes_at(g: &FiniteGraph, w: usize, visit: &mut dyn FnMut(&[usize], &[usize])) {
    fn grow(g: &FiniteGraph, w: usize, dirs: &mut Vec<usize>, map: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize], &[usize])) {
        visit(dirs, map);
        let nbrs = g.neighbors(w).to_vec();
        let start = dirs.last().map(|&l| nbrs.iter().position(|&v| v == l).unwrap() + 1).unwrap_or(0);
        for &c in &nbrs[start..] {
            let old = map.len();
            let cbit = old;
            let mut ext = map.clone();
            ext.resize(2 * old, usize::MAX);
            let mut ok = true;
            for t_mask in 0..old {
                let m = t_mask | cbit;
                let v = if t_mask == 0 {
                    c
                } else {
                    let t = t_mask & t_mask.wrapping_neg();
                    let a = ext[m ^ t];
                    let b = ext[t_mask];
                    let low = ext[t_mask ^ t];
                    let pc = m.count_ones() as usize;
                    match common_neighbors(g, a, b).into_iter().find(|&v| v != low && g.d(w, v) == pc) {
                        Some(v) => v,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                };
                let mut bits = m;
                while bits != 0 {
                    let b = bits & bits.wrapping_neg();
                    if !g.adjacent(v, ext[m ^ b]) {
                        ok = false;
                    }
                    bits ^= b;
                }
                if !ok {
                    break;
                }
                ext[m] = v;
            }
            if ok {
                dirs.push(c);
                grow(g, w, dirs, &mut ext, visit);
                dirs.pop();
            }
        }
    }
    let mut dirs = Vec::new();
    let mut map = vec![w];
    grow(g, w, &mut dirs, &mut map, visit);
}

impl MedianComplex {
    pub fn new(graph: FiniteGraph, base_ray: Vec<usize>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if graph.bipartition().is_none() {
            return Err(Error::NotBipartite);
        }
        if base_ray.is_empty() || base_ray.iter().enumerate().any(|(t, &v)| v >= graph.len() || graph.d(base_ray[0], v) != t) {
            return Err(Error::InvalidInput("base ray must be a geodesic".into()));
        }
        let n = graph.len();

        // median property on triples
        let (triples_checked, exhaustive) = if n <= EXHAUSTIVE_TRIPLES_UP_TO {
            let mut count = 0;
            for x in 0..n {
                for y in x..n {
                    for z in y..n {
                        check_triple(&graph, x, y, z)?;
                        count += 1;
                    }
                }
            }
            (count, true)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(TRIPLE_SEED);
            for _ in 0..SAMPLED_TRIPLES {
                let (x, y, z) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
                check_triple(&graph, x, y, z)?;
            }
            (SAMPLED_TRIPLES, false)
        };

        // hyperplanes from the square relation
        let edges = graph.edges();
        let edge_index: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &[a, b])| ((a, b), i)).collect();
        let eid = |a: usize, b: usize| edge_index[&(a.min(b), a.max(b))];
        let mut uf = UnionFind((0..edges.len()).collect());
        for u in 0..n {
            let nb = graph.neighbors(u);
            for (i, &v) in nb.iter().enumerate() {
                for &w in &nb[i + 1..] {
                    for x in common_neighbors(&graph, v, w) {
                        if x != u {
                            uf.union(eid(u, v), eid(w, x));
                            uf.union(eid(u, w), eid(v, x));
                        }
                    }
                }
            }
        }
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut hyperplane_rep = Vec::new();
        let hyperplane_of: Vec<usize> = (0..edges.len())
            .map(|e| {
                let r = uf.find(e);
                *ids.entry(r).or_insert_with(|| {
                    hyperplane_rep.push(edges[e]);
                    hyperplane_rep.len() - 1
                })
            })
            .collect();

        // cubes and polytopes
        let mut cube_sets: Vec<HashSet<Vec<usize>>> = vec![HashSet::new()];
        let mut higher: Vec<Polytope> = Vec::new();
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for w in 0..n {
            cubes_at(&graph, w, &mut |dirs, map| {
                let dim = dirs.len();
                if cube_sets.len() <= dim {
                    cube_sets.resize(dim + 1, HashSet::new());
                }
                let mut cube: Vec<usize> = map.to_vec();
                cube.sort_unstable();
                cube_sets[dim].insert(cube.clone());
                for j in 1..dim {
                    let mut verts: Vec<usize> =
                        (0..map.len()).filter(|m: &usize| m.count_ones() as usize == j).map(|m| map[m]).collect();
                    verts.sort_unstable();
                    if !seen.contains_key(&verts) {
                        seen.insert(verts.clone(), higher.len());
                        higher.push(Polytope { level: dim - 1, vertices: verts, cube: cube.clone(), corner: w, distance: j });
                    }
                }
            });
        }
        let cube_counts: Vec<usize> = cube_sets.iter().map(HashSet::len).collect();
        let dimension = cube_counts.len() - 1;
        let mut incidence = vec![Vec::new(); n];
        for (i, p) in higher.iter().enumerate() {
            for &v in &p.vertices {
                incidence[v].push(i);
            }
        }
        let validation = MedianValidation {
            triples_checked,
            exhaustive,
            hyperplanes: hyperplane_rep.len(),
            dimension,
            cube_counts,
        };
        Ok(MedianComplex {
            label,
            graph,
            base_ray,
            edges,
            edge_index,
            hyperplane_of,
            hyperplane_rep,
            dimension,
            higher,
            incidence,
            validation,
        })
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    /// μ(x, y, z) by walking from x towards both y and z.
    pub fn median(&self, x: usize, y: usize, z: usize) -> usize {
        let g = &self.graph;
        let mut u = x;
        loop {
            match g.neighbors(u).iter().find(|&&v| g.d(v, y) < g.d(u, y) && g.d(v, z) < g.d(u, z)) {
                Some(&v) => u = v,
                None => return u,
            }
        }
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn hyperplane_count(&self) -> usize {
        self.hyperplane_rep.len()
    }

    /// Edges of each hyperplane.
    pub fn hyperplanes(&self) -> Vec<Vec<[usize; 2]>> {
        let mut out = vec![Vec::new(); self.hyperplane_count()];
        for (e, &h) in self.hyperplane_of.iter().enumerate() {
            out[h].push(self.edges[e]);
        }
        out
    }

    fn separates(&self, h: usize, x: usize, y: usize) -> bool {
        let [a, b] = self.hyperplane_rep[h];
        let g = &self.graph;
        (g.d(x, a) < g.d(x, b)) != (g.d(y, a) < g.d(y, b))
    }

    /// A geodesic from x to y chosen greedily.
    pub fn geodesic(&self, x: usize, y: usize) -> Vec<usize> {
        let g = &self.graph;
        let mut path = vec![x];
        let mut u = x;
        while u != y {
            u = *g.neighbors(u).iter().find(|&&v| g.d(v, y) < g.d(u, y)).unwrap();
            path.push(u);
        }
        path
    }

    /// Every sampled geodesic crosses exactly the hyperplanes separating
    /// its endpoints, each once.
    pub fn sageev_check(&self, samples: usize, seed: u64) -> SageevReport {
        let n = self.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures = 0;
        for _ in 0..samples {
            let (x, y) = (rng.random_range(0..n), rng.random_range(0..n));
            let path = self.geodesic(x, y);
            let mut crossed: Vec<usize> = path.windows(2).map(|w| self.hyperplane_of[self.edge_id(w[0], w[1]).unwrap()]).collect();
            crossed.sort_unstable();
            let distinct = crossed.windows(2).all(|w| w[0] != w[1]);
            let separating: Vec<usize> = (0..self.hyperplane_count()).filter(|&h| self.separates(h, x, y)).collect();
            if !distinct || crossed != separating {
                failures += 1;
            }
        }
        SageevReport { pairs: samples, failures }
    }

    fn ray_end(&self, back: usize) -> Option<usize> {
        self.base_ray.len().checked_sub(1 + back).map(|i| self.base_ray[i])
    }

    /// m(x₁, x₂).
    pub fn stable_median(&self, x1: usize, x2: usize) -> Result<usize> {
        let (z, z_prev) = match (self.ray_end(0), self.ray_end(1)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::RayTooShort("base ray needs two vertices".into())),
        };
        let m = self.median(x1, x2, z);
        if self.median(x1, x2, z_prev) != m {
            return Err(Error::RayTooShort(format!(
                "median of {} and {} has not settled along the ray",
                self.graph.labels[x1], self.graph.labels[x2]
            )));
        }
        Ok(m)
    }

    fn sphere_in_interval(&self, x: usize, k: usize, z: usize) -> Vec<usize> {
        let g = &self.graph;
        let rx = g.row(x);
        let rz = g.row(z);
        let dxz = g.d(x, z);
        (0..self.len()).filter(|&y| rx[y] as usize == k && rx[y] as usize + rz[y] as usize == dxz).collect()
    }

    /// A(x, k), sorted.
    pub fn ray_set(&self, x: usize, k: usize) -> Result<Vec<usize>> {
        let (z, z_prev) = match (self.ray_end(0), self.ray_end(1)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::RayTooShort("base ray needs two vertices".into())),
        };
        let a = self.sphere_in_interval(x, k, z);
        if a.is_empty() || a != self.sphere_in_interval(x, k, z_prev) {
            return Err(Error::RayTooShort(format!("A({}, {k}) reaches the end of the ray", self.graph.labels[x])));
        }
        let bound = binomial((self.dimension.max(1) - 1 + k) as u64, (self.dimension.max(1) - 1) as u64)?;
        if a.len() as u128 > bound {
            return Err(Error::StructureViolation(format!("|A(x,{k})| = {} exceeds {bound}", a.len())));
        }
        Ok(a)
    }

    pub fn polytope_count(&self) -> usize {
        self.len() + self.higher.len()
    }

    pub fn polytope(&self, id: usize) -> Polytope {
        if id < self.len() {
            Polytope { level: 0, vertices: vec![id], cube: vec![id], corner: id, distance: 0 }
        } else {
            self.higher[id - self.len()].clone()
        }
    }

    pub fn polytope_level(&self, id: usize) -> usize {
        if id < self.len() {
            0
        } else {
            self.higher[id - self.len()].level
        }
    }

    /// Global ids of all polytopes contained in `set` (sorted vertex list).
    pub fn polytopes_within(&self, set: &[usize]) -> Vec<usize> {
        let n = self.len();
        let mut out: Vec<usize> = set.to_vec();
        for &v in set {
            for &p in &self.incidence[v] {
                let verts = &self.higher[p].vertices;
                // visit each polytope once, from its smallest vertex
                if verts[0] == v && verts.iter().all(|u| set.binary_search(u).is_ok()) {
                    out.push(n + p);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// B_i(x, y) = {w ∈ A(x, k-i) : y ∈ A(w, i)}.
    pub fn b_set(&self, x: usize, k: usize, y: usize, i: usize) -> Result<Vec<usize>> {
        if i > k {
            return Err(Error::InvalidInput("B_i needs i ≤ k".into()));
        }
        let mut out = Vec::new();
        for w in self.ray_set(x, k - i)? {
            if self.ray_set(w, i)?.binary_search(&y).is_ok() {
                out.push(w);
            }
        }
        Ok(out)
    }

    /// 𝒜(x, k) split by level, the sets B_i, and the cardinality bounds.
    pub fn polytopes(&self, x: usize, k: usize) -> Result<PolytopeReport> {
        let n_dim = self.dimension.max(1);
        let a_set = self.ray_set(x, k)?;
        let ids = self.polytopes_within(&a_set);
        let mut by_level = vec![Vec::new(); n_dim];
        for &id in &ids {
            by_level[self.polytope_level(id)].push(id);
        }
        let a_bound = binomial((n_dim - 1 + k) as u64, (n_dim - 1) as u64)? as usize;
        let m_const = cardinality_constant(n_dim)?;
        let mut b_sets = Vec::new();
        let mut b_ok = true;
        let mut per_vertex_ok = true;
        for &y in &a_set {
            for i in 0..=k.min(n_dim - 1) {
                let members = self.b_set(x, k, y, i)?;
                b_ok &= members.len() <= n_dim.pow(i as u32);
                b_sets.push(BSet { y, i, members });
            }
            let containing = ids.iter().filter(|&&p| self.polytope_vertices_contain(p, y)).count();
            per_vertex_ok &= containing as f64 <= m_const;
        }
        let total_ok = ids.len() as f64 <= m_const * a_bound as f64;
        Ok(PolytopeReport {
            x,
            k,
            a_set: a_set.clone(),
            by_level,
            b_sets,
            a_bound,
            m_constant: m_const,
            bounds_hold: a_set.len() <= a_bound && b_ok && per_vertex_ok && total_ok,
        })
    }

    fn polytope_vertices_contain(&self, id: usize, y: usize) -> bool {
        if id < self.len() {
            id == y
        } else {
            self.higher[id - self.len()].vertices.binary_search(&y).is_ok()
        }
    }

    /// P_k(x) and Q_k(x) over the polytope universe.
    pub fn mizuta_vectors(&self, x: usize, k: usize) -> Result<MizutaVectors> {
        let ids = self.polytopes_within(&self.ray_set(x, k)?);
        let q = ids.iter().map(|&p| (p, if self.polytope_level(p) % 2 == 0 { 1 } else { -1 })).collect();
        Ok(MizutaVectors { p: ids.iter().map(|&p| (p, 1)).collect(), q })
    }

    pub fn to_json(&self) -> GraphJson {
        let mut j = self.graph.to_json();
        j.base_ray = Some(self.base_ray.clone());
        j.dimension = Some(self.dimension);
        j
    }

    pub fn from_json(j: &GraphJson) -> Result<Self> {
        let g = FiniteGraph::from_json(j)?;
        let ray = j.base_ray.clone().ok_or_else(|| Error::InvalidInput("complex JSON needs base_ray".into()))?;
        let c = MedianComplex::new(g, ray, "json")?;
        if let Some(d) = j.dimension {
            if d != c.dimension {
                return Err(Error::StructureViolation(format!("declared dimension {d}, found {}", c.dimension)));
            }
        }
        Ok(c)
    }
}

fn check_triple(g: &FiniteGraph, x: usize, y: usize, z: usize) -> Result<()> {
    let (rx, ry, rz) = (g.row(x), g.row(y), g.row(z));
    let (dxy, dyz, dzx) = (rx[y], ry[z], rz[x]);
    let count = (0..g.len()).filter(|&v| rx[v] + ry[v] == dxy && ry[v] + rz[v] == dyz && rz[v] + rx[v] == dzx).count();
    if count != 1 {
        return Err(Error::NotMedian(x, y, z));
    }
    Ok(())
}

/// M = 2^{Σ_{i<N} N^i binom(N-1+i, N-1)}.
pub fn cardinality_constant(n: usize) -> Result<f64> {
    let mut e = 0u128;
    for i in 0..n {
        e += (n as u128).pow(i as u32) * binomial((n - 1 + i) as u64, (n - 1) as u64)?;
    }
    Ok((e as f64).exp2())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SageevReport {
    pub pairs: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BSet {
    pub y: usize,
    pub i: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeReport {
    pub x: usize,
    pub k: usize,
    pub a_set: Vec<usize>,
    /// Global polytope ids of 𝒜(x, k)^(l) for l = 0..N-1.
    pub by_level: Vec<Vec<usize>>,
    pub b_sets: Vec<BSet>,
    pub a_bound: usize,
    pub m_constant: f64,
    pub bounds_hold: bool,
}

/// Sparse ±1 coordinates sorted by polytope id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MizutaVectors {
    pub p: Vec<(usize, i8)>,
    pub q: Vec<(usize, i8)>,
}

impl MizutaVectors {
    pub fn inner(a: &[(usize, i8)], b: &[(usize, i8)]) -> i64 {
        let (mut i, mut j, mut acc) = (0, 0, 0i64);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 as i64 * b[j].1 as i64;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}
