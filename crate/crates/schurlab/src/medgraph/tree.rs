use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{check_budget, FiniteGraph};

/// Ball of radius R in the (q+1)-regular tree, optionally with its base
/// ray continued past the boundary by a plain chain.
///
/// Vertices are numbered in BFS order from the root (index 0); the ball
/// occupies indices `0..ball_size`, chain vertices follow. Labels are
/// child-index paths ("o", "0", "0.2", ...) and "r1", "r2", ... on the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeBall {
    pub graph: FiniteGraph,
    pub q: usize,
    pub radius: usize,
    pub root: usize,
    /// ω₀: root, "0", "0.0", ... then the chain.
    pub base_ray: Vec<usize>,
    pub ball_size: usize,
}

pub fn ball_vertex_count(q: usize, radius: usize) -> usize {
    if q == 1 {
        1 + 2 * radius
    } else {
        1 + (q + 1) * (q.pow(radius as u32) - 1) / (q - 1)
    }
}

pub fn tree_ball(q: usize, radius: usize) -> Result<TreeBall> {
    tree_ball_with_ray(q, radius, 0)
}

pub fn tree_ball_with_ray(q: usize, radius: usize, extension: usize) -> Result<TreeBall> {
    if q == 0 || radius == 0 {
        return Err(Error::InvalidInput("tree ball needs q ≥ 1 and R ≥ 1".into()));
    }
    let ball_size = q
        .checked_pow(radius as u32)
        .map(|_| ball_vertex_count(q, radius))
        .unwrap_or(usize::MAX);
    check_budget(ball_size.saturating_add(extension))?;
    let mut labels = vec!["o".to_string()];
    let mut depth = vec![0usize];
    let mut edges = Vec::new();
    let mut head = 0;
    while head < labels.len() {
        if depth[head] < radius {
            let kids = if head == 0 { q + 1 } else { q };
            for c in 0..kids {
                let label = if head == 0 { c.to_string() } else { format!("{}.{c}", labels[head]) };
                edges.push([head, labels.len()]);
                labels.push(label);
                depth.push(depth[head] + 1);
            }
        }
        head += 1;
    }
    debug_assert_eq!(labels.len(), ball_size);
    // ω₀ follows child 0 at every level; in BFS order that child is the
    // first vertex of the next level below the current one.
    let mut base_ray = vec![0usize];
    let mut cur = 0usize;
    for _ in 0..radius {
        let next = edges.iter().find(|e| e[0] == cur).map(|e| e[1]).expect("child exists");
        base_ray.push(next);
        cur = next;
    }
    for t in 1..=extension {
        let v = labels.len();
        labels.push(format!("r{t}"));
        edges.push([cur, v]);
        base_ray.push(v);
        cur = v;
    }
    Ok(TreeBall { graph: FiniteGraph::new(labels, &edges)?, q, radius, root: 0, base_ray, ball_size })
}

/// ω_x: the geodesic from x to the end of the base ray.
pub fn base_geodesic(ball: &TreeBall, x: usize) -> Vec<usize> {
    let g = &ball.graph;
    let z = *ball.base_ray.last().unwrap();
    let mut path = vec![x];
    let mut u = x;
    while u != z {
        u = *g.neighbors(u).iter().find(|&&v| g.d(v, z) + 1 == g.d(u, z)).unwrap();
        path.push(u);
    }
    path
}

/// Meeting point of ω_x and ω_y, reached after k₀ steps on ω_x and m₀ on ω_y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeodesicMeet {
    pub meet: usize,
    pub k0: usize,
    pub m0: usize,
}

pub fn geodesic_meet(ball: &TreeBall, x: usize, y: usize) -> GeodesicMeet {
    let g = &ball.graph;
    let z = *ball.base_ray.last().unwrap();
    let wx = base_geodesic(ball, x);
    let k0 = wx.iter().position(|&v| g.in_interval(y, z, v)).unwrap();
    let meet = wx[k0];
    GeodesicMeet { meet, k0, m0: g.d(y, meet) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_counts() {
        assert_eq!(tree_ball(2, 1).unwrap().graph.len(), 4);
        assert_eq!(tree_ball(2, 2).unwrap().graph.len(), 10);
        assert_eq!(tree_ball(3, 2).unwrap().graph.len(), 17);
        assert_eq!(tree_ball(1, 3).unwrap().graph.len(), 7);
        for (q, r) in [(2, 4), (3, 3), (4, 2)] {
            assert_eq!(tree_ball(q, r).unwrap().graph.len(), ball_vertex_count(q, r));
        }
    }

    #[test]
    fn degrees_and_ray() {
        let b = tree_ball_with_ray(2, 3, 4).unwrap();
        let g = &b.graph;
        assert_eq!(g.edge_count(), g.len() - 1);
        for v in 0..b.ball_size {
            let depth = g.d(0, v);
            if depth < 3 {
                assert_eq!(g.neighbors(v).len(), 3, "vertex {}", g.labels[v]);
            }
        }
        assert_eq!(b.base_ray.len(), 8);
        for (t, &v) in b.base_ray.iter().enumerate() {
            assert_eq!(g.d(0, v), t);
        }
        assert_eq!(g.labels[b.base_ray[3]], "0.0.0");
    }

    #[test]
    fn geodesic_examples() {
        let b = tree_ball(2, 3).unwrap();
        let g = &b.graph;
        let on_ray = b.base_ray[1];
        assert_eq!(base_geodesic(&b, on_ray), b.base_ray[1..].to_vec());
        assert_eq!(geodesic_meet(&b, 0, on_ray), GeodesicMeet { meet: on_ray, k0: 1, m0: 0 });
        let (s1, s2) = (g.index_of("1").unwrap(), g.index_of("2").unwrap());
        let m = geodesic_meet(&b, s1, s2);
        assert_eq!(m.k0 + m.m0, 2);
        assert_eq!(m.meet, 0);
        assert_eq!(geodesic_meet(&b, s1, s1), GeodesicMeet { meet: s1, k0: 0, m0: 0 });
        for x in 0..g.len() {
            for y in 0..g.len() {
                let m = geodesic_meet(&b, x, y);
                assert_eq!(m.k0 + m.m0, g.d(x, y));
            }
        }
    }

    #[test]
    fn size_limit() {
        assert!(matches!(tree_ball(3, 12), Err(Error::SizeLimit { .. })));
    }
}
