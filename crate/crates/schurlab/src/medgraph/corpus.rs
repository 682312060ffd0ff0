//! Built-in complexes: tree products with a staircase base ray, grids and
//! cubes, one non-product 2-dimensional complex, and a non-median example.

use crate::error::{Error, Result};

use super::{path_graph, product_graph, tree_ball_with_ray, FiniteGraph, MedianComplex, ProductGraph, TreeBall};

/// Product of tree balls whose base rays are extended past the ball, with
/// the staircase ray (advance factor 1, then 2, …, cyclically).
#[derive(Debug, Clone)]
pub struct TreeProduct {
    pub factors: Vec<TreeBall>,
    pub product: ProductGraph,
    pub base_ray: Vec<usize>,
}

impl TreeProduct {
    pub fn new(factors: Vec<TreeBall>) -> Result<Self> {
        let graphs: Vec<&FiniteGraph> = factors.iter().map(|f| &f.graph).collect();
        let product = product_graph(&graphs)?;
        let mut pos = vec![0usize; factors.len()];
        let coords = |pos: &[usize]| -> Vec<usize> { pos.iter().zip(&factors).map(|(&p, f)| f.base_ray[p]).collect() };
        let mut base_ray = vec![product.index(&coords(&pos))];
        'outer: loop {
            for i in 0..factors.len() {
                if pos[i] + 1 >= factors[i].base_ray.len() {
                    break 'outer;
                }
                pos[i] += 1;
                base_ray.push(product.index(&coords(&pos)));
            }
        }
        Ok(TreeProduct { factors, product, base_ray })
    }

    /// `count` copies of the (q+1)-regular radius-R ball, rays extended by `extension`.
    pub fn uniform(q: usize, radius: usize, count: usize, extension: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidInput("need at least one factor".into()));
        }
        let f = tree_ball_with_ray(q, radius, extension)?;
        Self::new(vec![f; count])
    }

    pub fn dimension(&self) -> usize {
        self.factors.len()
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.product.graph
    }

    /// Vertices with every coordinate inside its factor's ball.
    pub fn ball_vertices(&self) -> Vec<usize> {
        (0..self.product.graph.len())
            .filter(|&v| self.product.coords(v).iter().zip(&self.factors).all(|(&c, f)| c < f.ball_size))
            .collect()
    }

    /// Factor distances (d(x₁,y₁), …, d(x_N,y_N)).
    pub fn distance_vector(&self, x: usize, y: usize) -> Vec<usize> {
        let (cx, cy) = (self.product.coords(x), self.product.coords(y));
        (0..self.factors.len()).map(|i| self.factors[i].graph.d(cx[i], cy[i])).collect()
    }

    pub fn complex(&self) -> Result<MedianComplex> {
        let label = format!(
            "product of {} tree balls (q={}, R={})",
            self.factors.len(),
            self.factors[0].q,
            self.factors[0].radius
        );
        MedianComplex::new(self.product.graph.clone(), self.base_ray.clone(), label)
    }
}

/// The a × b grid with base ray along the first row.
pub fn grid(a: usize, b: usize) -> Result<MedianComplex> {
    let (pa, pb) = (path_graph(a)?, path_graph(b)?);
    let p = product_graph(&[&pa, &pb])?;
    let ray: Vec<usize> = (0..a).map(|i| p.index(&[i, 0])).collect();
    MedianComplex::new(p.graph, ray, format!("{a}x{b} grid"))
}

/// The n-cube with a one-edge base ray.
pub fn cube(n: usize) -> Result<MedianComplex> {
    let e = path_graph(2)?;
    let factors: Vec<&FiniteGraph> = vec![&e; n];
    let p = product_graph(&factors)?;
    let mut far = vec![0; n];
    far[0] = 1;
    let ray = vec![0, p.index(&far)];
    MedianComplex::new(p.graph, ray, format!("{n}-cube"))
}

/// A staircase of three squares, [0,1]², [1,2]×[0,1], [0,1]×[1,2], on a
/// path (a, 0), a ≤ `ray_len`, with a two-vertex pendant chain at (2, 1).
/// The base ray runs along (t, 0). It is 2-dimensional and not a product.
pub fn staircase(ray_len: usize) -> Result<MedianComplex> {
    if ray_len < 2 {
        return Err(Error::InvalidInput("staircase needs ray length ≥ 2".into()));
    }
    let mut pts: Vec<(usize, usize)> = (0..=ray_len).map(|a| (a, 0)).collect();
    pts.extend([(0, 1), (1, 1), (2, 1), (0, 2), (1, 2)]);
    let mut labels: Vec<String> = pts.iter().map(|(a, b)| format!("({a},{b})")).collect();
    let mut edges = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        for (j, q) in pts.iter().enumerate() {
            if i < j && p.0.abs_diff(q.0) + p.1.abs_diff(q.1) == 1 {
                edges.push([i, j]);
            }
        }
    }
    let attach = pts.iter().position(|&p| p == (2, 1)).unwrap();
    labels.push("p1".into());
    labels.push("p2".into());
    let n = labels.len();
    edges.push([attach, n - 2]);
    edges.push([n - 2, n - 1]);
    let g = FiniteGraph::new(labels, &edges)?;
    MedianComplex::new(g, (0..=ray_len).collect(), "staircase of three squares")
}

/// Three squares around a vertex, pairwise sharing an edge: the 3-cube
/// without its far corner. Bipartite but not median.
pub fn three_squares() -> FiniteGraph {
    let labels = ["o", "a", "b", "c", "ab", "bc", "ca"].map(String::from).to_vec();
    let edges = [[0, 1], [0, 2], [0, 3], [1, 4], [2, 4], [2, 5], [3, 5], [3, 6], [1, 6]];
    FiniteGraph::new(labels, &edges).expect("connected")
}


#[cfg(test)]
mod indicator_tests {
    use super::*;
    use crate::medgraph::MizutaVectors;

    fn check_indicator(c: &MedianComplex, region: &[usize], kmax: usize) {
        let vecs: Vec<Vec<_>> =
            region.iter().map(|&x| (0..=kmax).map(|k| c.mizuta_vectors(x, k).unwrap()).collect()).collect();
        for (ix, &x1) in region.iter().enumerate() {
            for (iy, &x2) in region.iter().enumerate() {
                let m = c.stable_median(x1, x2).unwrap();
                let (l1, l2) = (c.graph.d(x1, m), c.graph.d(x2, m));
                for k1 in 0..=kmax {
                    for k2 in 0..=kmax {
                        let expect = (k1 >= l1 && k2 >= l2 && k1 - l1 == k2 - l2) as i64;
                        let got = MizutaVectors::inner(&vecs[ix][k1].p, &vecs[iy][k2].q);
                        assert_eq!(got, expect, "x1={} x2={} k=({k1},{k2})", c.graph.labels[x1], c.graph.labels[x2]);
                    }
                }
            }
        }
    }

    #[test]
    fn indicator_on_small_products() {
        let p = TreeProduct::uniform(2, 1, 2, 5).unwrap();
        check_indicator(&p.complex().unwrap(), &p.ball_vertices(), 3);
        let p3 = TreeProduct::uniform(2, 1, 3, 4).unwrap();
        check_indicator(&p3.complex().unwrap(), &p3.ball_vertices(), 3);
    }

    #[test]
    fn indicator_on_staircase() {
        let s = staircase(9).unwrap();
        let region: Vec<usize> = (0..s.len()).filter(|&v| s.graph.d(0, v) <= 4).collect();
        check_indicator(&s, &region, 3);
    }
}
