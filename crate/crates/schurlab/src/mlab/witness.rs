//! Factorization witnesses φ(x, y) = ⟨P(x), Q(y)⟩ and their constructions
//! on tree products (telescoping over base geodesics) and median complexes
//! (Mizuta polytope vectors).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{build_hankel, build_multiradial_box, lattice::box_points, HankelSpec, MultiSymbol, WeightScheme};
use crate::linalg::CMat;
use crate::medgraph::{base_geodesic, cardinality_constant, parity_witness, MedianComplex, TreeProduct};
use crate::scalar::{binomial, C64};
use crate::symbolkit::{derivative_sequence, limits_report, DerivativeSpec, RadialSymbol};

use super::{par_chunks, polar_factor, zero, KernelMatrix};

/// One term coeff · δ_coord ⊗ atom of a coordinate map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry {
    pub coord: usize,
    pub atom: usize,
    pub coeff: C64,
}

/// P(x) = Σ coeff·δ_c ⊗ left[:, atom] and Q(y) = Σ coeff·δ_c ⊗ right[:, atom]
/// in ℓ₂(coords) ⊗ ℂ^r. Entry lists are sorted by coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMaps {
    pub coords: usize,
    pub left: CMat,
    pub right: CMat,
    pub p: Vec<Vec<SparseEntry>>,
    pub q: Vec<Vec<SparseEntry>>,
    cross: CMat,
    gram_left: CMat,
    gram_right: CMat,
}

impl TensorMaps {
    pub fn new(coords: usize, left: CMat, right: CMat, mut p: Vec<Vec<SparseEntry>>, mut q: Vec<Vec<SparseEntry>>) -> Result<Self> {
        if left.nrows() != right.nrows() {
            return Err(Error::InvalidInput("left and right atoms live in different spaces".into()));
        }
        for list in p.iter_mut().chain(q.iter_mut()) {
            list.sort_by_key(|e| e.coord);
        }
        let bad_left = p.iter().flatten().any(|e| e.coord >= coords || e.atom >= left.ncols());
        let bad_right = q.iter().flatten().any(|e| e.coord >= coords || e.atom >= right.ncols());
        if bad_left || bad_right {
            return Err(Error::InvalidInput("witness entry out of range".into()));
        }
        Ok(TensorMaps {
            coords,
            cross: left.adjoint() * &right,
            gram_left: left.adjoint() * &left,
            gram_right: right.adjoint() * &right,
            left,
            right,
            p,
            q,
        })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.coords * self.left.nrows()
    }

    /// ⟨P(x), Q(y)⟩, conjugate-linear in P.
    pub fn inner(&self, x: usize, y: usize) -> C64 {
        let (a, b) = (&self.p[x], &self.q[y]);
        let (mut i, mut j) = (0, 0);
        let mut acc = zero();
        while i < a.len() && j < b.len() {
            let (ca, cb) = (a[i].coord, b[j].coord);
            if ca < cb {
                i += 1;
            } else if cb < ca {
                j += 1;
            } else {
                let i_end = i + a[i..].iter().take_while(|e| e.coord == ca).count();
                let j_end = j + b[j..].iter().take_while(|e| e.coord == ca).count();
                for ea in &a[i..i_end] {
                    for eb in &b[j..j_end] {
                        acc += ea.coeff.conj() * eb.coeff * self.cross[(ea.atom, eb.atom)];
                    }
                }
                i = i_end;
                j = j_end;
            }
        }
        acc
    }

    fn norm_sq(list: &[SparseEntry], gram: &CMat) -> f64 {
        let mut total = 0.0;
        let mut i = 0;
        while i < list.len() {
            let end = i + list[i..].iter().take_while(|e| e.coord == list[i].coord).count();
            for a in &list[i..end] {
                for b in &list[i..end] {
                    total += (a.coeff.conj() * b.coeff * gram[(a.atom, b.atom)]).re;
                }
            }
            i = end;
        }
        total.max(0.0)
    }

    pub fn norm_p(&self, x: usize) -> f64 {
        Self::norm_sq(&self.p[x], &self.gram_left).sqrt()
    }

    pub fn norm_q(&self, y: usize) -> f64 {
        Self::norm_sq(&self.q[y], &self.gram_right).sqrt()
    }

    /// Dense coordinates of P(x) in ℓ₂(coords) ⊗ ℂ^r, as (index, value) with
    /// index = coord·r + row.
    pub fn dense_p(&self, x: usize) -> Vec<(usize, C64)> {
        Self::expand(&self.p[x], &self.left)
    }

    pub fn dense_q(&self, y: usize) -> Vec<(usize, C64)> {
        Self::expand(&self.q[y], &self.right)
    }

    fn expand(list: &[SparseEntry], atoms: &CMat) -> Vec<(usize, C64)> {
        let r = atoms.nrows();
        let mut acc: HashMap<usize, C64> = HashMap::new();
        for e in list {
            for row in 0..r {
                let v = e.coeff * atoms[(row, e.atom)];
                if v != zero() {
                    *acc.entry(e.coord * r + row).or_insert(zero()) += v;
                }
            }
        }
        let mut out: Vec<(usize, C64)> = acc.into_iter().collect();
        out.sort_by_key(|&(i, _)| i);
        out
    }

    /// Adds coordinates so that ⟨P(x),Q(y)⟩ gains c₊ + c₋·ε(x)ε(y).
    pub fn with_parity(self, c_plus: C64, c_minus: C64, signs: &[i8]) -> Result<Self> {
        if signs.len() != self.len() {
            return Err(Error::InvalidInput("parity signs must cover every vertex".into()));
        }
        let r = self.left.nrows();
        let (na, nb) = (self.left.ncols(), self.right.ncols());
        let mut left = self.left.clone().resize(r + 2, na + 2, zero());
        let mut right = self.right.clone().resize(r + 2, nb + 2, zero());
        let split = |c: C64| -> (C64, C64) {
            let m = c.norm().sqrt();
            if m == 0.0 {
                (zero(), zero())
            } else {
                (C64::new(m, 0.0), c / m)
            }
        };
        let (lp, rp) = split(c_plus);
        let (lm, rm) = split(c_minus);
        left[(r, na)] = lp;
        right[(r, nb)] = rp;
        left[(r + 1, na + 1)] = lm;
        right[(r + 1, nb + 1)] = rm;
        let c0 = self.coords;
        let one = C64::new(1.0, 0.0);
        let mut p = self.p;
        let mut q = self.q;
        for (x, &s) in signs.iter().enumerate() {
            let s = C64::new(s as f64, 0.0);
            p[x].push(SparseEntry { coord: c0, atom: na, coeff: one });
            p[x].push(SparseEntry { coord: c0, atom: na + 1, coeff: s });
            q[x].push(SparseEntry { coord: c0, atom: nb, coeff: one });
            q[x].push(SparseEntry { coord: c0, atom: nb + 1, coeff: s });
        }
        TensorMaps::new(c0 + 1, left, right, p, q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCoordinates {
    pub p: Vec<Vec<(usize, f64, f64)>>,
    pub q: Vec<Vec<(usize, f64, f64)>>,
}

/// Certified upper bound sup‖P‖·sup‖Q‖ for the kernel on `vertices`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationWitness {
    pub vertices: Vec<usize>,
    pub dimension: usize,
    pub sup_p: f64,
    pub sup_q: f64,
    pub certified_bound: f64,
    /// max over checked pairs of |⟨P(x),Q(y)⟩ − φ(x,y)|.
    pub reproduction_error: f64,
    /// Largest computed truncation tail over the checked pairs (0 when exact).
    pub tail_bound: f64,
    /// Floating-point allowance included in `tail_bound`: (dim + 2)·ε·sup_P·sup_Q.
    #[serde(default)]
    pub rounding: f64,
    pub pairs_checked: usize,
    /// Per-vertex ‖P(x)‖² ≤ M·Σ_k binom(N-1+k, N-1)‖B̃e_k‖², when applicable.
    pub norm_control: Option<bool>,
    pub c_plus: C64,
    pub c_minus: C64,
    pub provenance: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coordinates: Option<WitnessCoordinates>,
    #[serde(skip)]
    pub maps: Option<TensorMaps>,
}

impl FactorizationWitness {
    /// Computes sup norms from `maps` and the reproduction error against `kernel`
    /// (maps index i ↔ kernel row i).
    pub fn from_maps(maps: TensorMaps, kernel: &KernelMatrix, provenance: impl Into<String>) -> Result<Self> {
        if maps.len() != kernel.len() || maps.q.len() != kernel.len() {
            return Err(Error::InvalidInput("witness and kernel sizes differ".into()));
        }
        let n = maps.len();
        let sup_p = (0..n).map(|x| maps.norm_p(x)).fold(0.0, f64::max);
        let sup_q = (0..n).map(|y| maps.norm_q(y)).fold(0.0, f64::max);
        let rows = par_chunks(n, |range| {
            range
                .map(|x| (0..n).map(|y| (maps.inner(x, y) - kernel.entries[(x, y)]).norm()).fold(0.0, f64::max))
                .fold(0.0, f64::max)
        });
        let err = rows.into_iter().fold(0.0, f64::max);
        Ok(FactorizationWitness {
            vertices: kernel.vertices.clone(),
            dimension: maps.dimension(),
            sup_p,
            sup_q,
            certified_bound: sup_p * sup_q,
            reproduction_error: err,
            tail_bound: 0.0,
            rounding: (maps.dimension() + 2) as f64 * f64::EPSILON * sup_p * sup_q,
            pairs_checked: n * n,
            norm_control: None,
            c_plus: zero(),
            c_minus: zero(),
            provenance: provenance.into(),
            coordinates: None,
            maps: Some(maps),
        })
    }

    /// Fills `coordinates` from the maps (for the --emit-witness output).
    pub fn materialize(&mut self) {
        if let Some(m) = &self.maps {
            let conv = |v: Vec<(usize, C64)>| v.into_iter().map(|(i, z)| (i, z.re, z.im)).collect::<Vec<_>>();
            self.coordinates = Some(WitnessCoordinates {
                p: (0..m.len()).map(|x| conv(m.dense_p(x))).collect(),
                q: (0..m.len()).map(|y| conv(m.dense_q(y))).collect(),
            });
        }
    }

    pub fn to_json(&self, emit_coordinates: bool) -> Result<String> {
        let mut w = self.clone();
        if emit_coordinates {
            if w.coordinates.is_none() {
                w.materialize();
            }
        } else {
            w.coordinates = None;
        }
        Ok(serde_json::to_string_pretty(&w)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Σ_{j ≥ 0} |a(start + step·j)| from a sampled table, with a geometric
/// estimate of what lies beyond the table. `None` when the terms do not decay.
fn sampled_tail(a: &[f64], start: usize, step: usize) -> Option<f64> {
    if start >= a.len() {
        return None;
    }
    let terms: Vec<f64> = a[start..].iter().step_by(step).copied().collect();
    let sum: f64 = terms.iter().rev().sum();
    let last = *terms.last().unwrap();
    if last == 0.0 {
        return Some(sum);
    }
    if terms.len() < 2 {
        return None;
    }
    let prev = terms[terms.len() - 2];
    let rho = if prev > 0.0 { last / prev } else { 1.0 };
    (rho < 1.0).then(|| sum + last * rho / (1.0 - rho))
}

/// Witness for φ̃(d⃗(x,y)) on a tree product from the box section T of the
/// multiradial matrix (side `k`): P(x) = Σ_k δ_{ω_{x₁}(k₁)}⊗⋯⊗A e_k and
/// Q(y) = Σ_k δ_{ω_{y₁}(k₁)}⊗⋯⊗B e_k with T = A*B. The caller removes the
/// parity part of φ̃ beforehand. Pairs are checked on `region` (product
/// vertex indices); refuses when the largest truncation tail exceeds `tol`.
pub fn tree_product_witness(
    product: &TreeProduct,
    phi: &MultiSymbol,
    k: usize,
    region: &[usize],
    tol: f64,
) -> Result<FactorizationWitness> {
    let dim = product.dimension();
    if k == 0 {
        return Err(Error::InvalidInput("truncation side K must be ≥ 1".into()));
    }
    let t = build_multiradial_box(phi, dim, k, 2)?;
    let (a, b) = polar_factor(&t)?;
    let points = box_points(dim, k);

    // first K base-geodesic vertices of every coordinate
    let mut omega: Vec<Vec<Vec<usize>>> = Vec::with_capacity(region.len());
    for &x in region {
        let coords = product.product.coords(x);
        let mut per = Vec::with_capacity(dim);
        for (i, f) in product.factors.iter().enumerate() {
            let g = base_geodesic(f, coords[i]);
            if g.len() < k {
                return Err(Error::RayTooShort(format!(
                    "geodesic of {} in factor {i} has {} vertices, K = {k}",
                    f.graph.labels[coords[i]],
                    g.len()
                )));
            }
            per.push(g[..k].to_vec());
        }
        omega.push(per);
    }
    let support: Vec<Vec<SparseEntry>> = omega
        .iter()
        .map(|per| {
            points
                .iter()
                .enumerate()
                .map(|(atom, kv)| {
                    let c: Vec<usize> = (0..dim).map(|i| per[i][kv[i]]).collect();
                    SparseEntry { coord: product.product.index(&c), atom, coeff: C64::new(1.0, 0.0) }
                })
                .collect()
        })
        .collect();
    let maps = TensorMaps::new(product.graph().len(), a, b, support.clone(), support)?;
    let kernel = super::multiradial_kernel(product, region, phi)?;
    let mut w = FactorizationWitness::from_maps(maps, &kernel, format!("tree-product K={k} {}", t.provenance))?;

    // truncation tails: per coordinate the matched indices are (k⁰+j, m⁰+j)
    // for j < K − max(k⁰, m⁰); everything else is Σ |t(n + 2j)| outside that box
    let extra = if dim <= 2 { 4 * k + 32 } else { k + 8 };
    let reach: usize = 2 * (k + extra) + 4 * product.factors.iter().map(|f| f.radius).max().unwrap_or(0) + 4;
    let t_table = alternating_table(phi, dim, reach)?;
    let mut memo: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
    let mut worst = 0.0f64;
    for &x in region {
        for &y in region {
            let mut n = Vec::with_capacity(dim);
            let mut cut = Vec::with_capacity(dim);
            for i in 0..dim {
                let (cx, cy) = (product.product.coords(x)[i], product.product.coords(y)[i]);
                let d = product.factors[i].graph.d(cx, cy);
                let meet = crate::medgraph::geodesic_meet(&product.factors[i], cx, cy);
                debug_assert_eq!(meet.k0 + meet.m0, d);
                n.push(d);
                cut.push(k.saturating_sub(meet.k0.max(meet.m0)));
            }
            let key = (n, cut);
            let tail = match memo.get(&key) {
                Some(&v) => v,
                None => {
                    let v = box_tail(&t_table, reach, &key.0, &key.1, extra)
                        .ok_or(Error::TailBoundExceeded { bound: f64::INFINITY, tol })?;
                    memo.insert(key, v);
                    v
                }
            };
            worst = worst.max(tail);
        }
    }
    w.tail_bound = worst + w.rounding;
    if worst > tol {
        return Err(Error::TailBoundExceeded { bound: worst, tol });
    }
    Ok(w)
}

/// |Σ_I (−1)^{|I|} φ̃(v + 2χ^I)| for v ∈ [0, reach)^dim, row-major.
fn alternating_table(phi: &MultiSymbol, dim: usize, reach: usize) -> Result<Vec<f64>> {
    let size = (reach + 2).pow(dim as u32);
    let mut raw = vec![zero(); size];
    for (flat, p) in box_points(dim, reach + 2).iter().enumerate() {
        raw[flat] = phi.eval(p)?;
    }
    let flat_of = |p: &[usize], side: usize| p.iter().fold(0, |acc, &c| acc * side + c);
    let mut out = vec![0.0; reach.pow(dim as u32)];
    let mut shifted = vec![0; dim];
    for (flat, p) in box_points(dim, reach).iter().enumerate() {
        let mut acc = zero();
        for mask in 0..(1usize << dim) {
            for i in 0..dim {
                shifted[i] = p[i] + if mask >> i & 1 == 1 { 2 } else { 0 };
            }
            let v = raw[flat_of(&shifted, reach + 2)];
            if mask.count_ones() % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        out[flat] = acc.norm();
    }
    Ok(out)
}

/// Σ over j ∈ ℕ^dim outside Π[0, cut_i) of |t(n + 2j)|, summed over
/// j ∈ [0, cut + extra)^dim plus a geometric estimate of the last shell.
fn box_tail(table: &[f64], reach: usize, n: &[usize], cut: &[usize], extra: usize) -> Option<f64> {
    let dim = n.len();
    let outer: Vec<usize> = cut.iter().map(|&c| c + extra).collect();
    if n.iter().zip(&outer).any(|(&ni, &o)| ni + 2 * o > reach) {
        return None;
    }
    let total: usize = outer.iter().product();
    let mut shells = vec![0.0; extra + 1];
    let mut sum = 0.0;
    let mut j = vec![0usize; dim];
    for mut flat in 0..total {
        for i in (0..dim).rev() {
            j[i] = flat % outer[i];
            flat /= outer[i];
        }
        let inside = (0..dim).all(|i| j[i] < cut[i]);
        if inside {
            continue;
        }
        let idx = (0..dim).fold(0, |acc, i| acc * reach + n[i] + 2 * j[i]);
        let v = table[idx];
        sum += v;
        // shell = how far past the cut the farthest coordinate is
        let s = (0..dim).map(|i| j[i].saturating_sub(cut[i])).max().unwrap();
        shells[s] += v;
    }
    let last = shells[extra - 1];
    if last == 0.0 {
        return Some(sum);
    }
    let prev = shells[extra - 2];
    let rho = if prev > 0.0 { last / prev } else { 1.0 };
    (rho < 1.0).then(|| sum + last * rho / (1.0 - rho))
}

/// Witness for φ̇(d(x,y)) on a median complex: the parity part c₊ + c₋(−1)^d
/// is split off, the rest is factored through H̃ = (𝔡₂φ̇(i+j))_{i,j<K} and
/// the Mizuta vectors P_k, Q_k, and the parity part is added back as two
/// extra coordinates. Pairs are checked on `region`.
pub fn median_witness(
    complex: &MedianComplex,
    symbol: &RadialSymbol,
    k: usize,
    region: &[usize],
    tol: f64,
) -> Result<FactorizationWitness> {
    if k == 0 {
        return Err(Error::InvalidInput("truncation K must be ≥ 1".into()));
    }
    let limits = limits_report(symbol, 256, 1e-10)?;
    if !limits.both_determined() {
        return Err(Error::InvalidInput(format!("limits of {} are not determined", symbol.label())));
    }
    let spec = HankelSpec::raw(symbol.clone(), DerivativeSpec::new(2, 1)?, WeightScheme::PowerSum { s: 0.0 });
    let h = build_hankel(&spec, k)?;
    let (a, b) = polar_factor(&h)?;
    let level_dim = complex.dimension.max(1);

    let mut p = Vec::with_capacity(region.len());
    let mut q = Vec::with_capacity(region.len());
    for &x in region {
        let (mut px, mut qx) = (Vec::new(), Vec::new());
        for kk in 0..k {
            let mv = complex.mizuta_vectors(x, kk)?;
            px.extend(mv.p.iter().map(|&(c, s)| SparseEntry { coord: c, atom: kk, coeff: C64::new(s as f64, 0.0) }));
            qx.extend(mv.q.iter().map(|&(c, s)| SparseEntry { coord: c, atom: kk, coeff: C64::new(s as f64, 0.0) }));
        }
        p.push(px);
        q.push(qx);
    }
    let mut maps = TensorMaps::new(complex.polytope_count(), a, b, p, q)?;

    // ‖P(x)‖² = Σ_k |𝒜(x,k)|·‖Ae_k‖² against M·binom(N-1+k, N-1)·‖Ae_k‖²
    let m_const = cardinality_constant(level_dim)?;
    let mut control = true;
    for x in 0..maps.len() {
        let mut budget = 0.0;
        for kk in 0..k {
            let col = maps.left.column(kk).norm_squared();
            budget += m_const * binomial((level_dim - 1 + kk) as u64, (level_dim - 1) as u64)? as f64 * col;
        }
        control &= maps.norm_p(x).powi(2) <= budget * (1.0 + 1e-12) + 1e-300;
    }

    let (cp, cm) = (limits.c_plus, limits.c_minus);
    if cp != zero() || cm != zero() {
        let all_signs = parity_witness(&complex.graph, 0)?;
        let signs: Vec<i8> = region.iter().map(|&v| all_signs[v]).collect();
        maps = maps.with_parity(cp, cm, &signs)?;
    }
    let kernel = super::radial_kernel_on(&complex.graph, region, symbol)?;
    let mut w = FactorizationWitness::from_maps(maps, &kernel, format!("median K={k} {}", h.provenance))?;
    w.norm_control = Some(control);
    w.c_plus = cp;
    w.c_minus = cm;

    // tails: matched (k, k') = (l₁ + j, l₂ + j), kept while both < K
    let diameter = complex.graph.diameter();
    let len = 2 * diameter + 16 * k + 256;
    let d2: Vec<f64> = derivative_sequence(symbol, DerivativeSpec::new(2, 1)?, len)?.iter().map(|z| z.norm()).collect();
    let mut memo: HashMap<(usize, usize), f64> = HashMap::new();
    let mut worst = 0.0f64;
    for &x in region {
        for &y in region {
            let m = complex.stable_median(x, y)?;
            let (l1, l2) = (complex.graph.d(x, m), complex.graph.d(y, m));
            let kept = k.saturating_sub(l1.max(l2));
            let start = l1 + l2 + 2 * kept;
            let tail = match memo.get(&(start, 0)) {
                Some(&v) => v,
                None => {
                    let v = sampled_tail(&d2, start, 2).ok_or(Error::TailBoundExceeded { bound: f64::INFINITY, tol })?;
                    memo.insert((start, 0), v);
                    v
                }
            };
            worst = worst.max(tail);
        }
    }
    w.tail_bound = worst + w.rounding;
    if worst > tol {
        return Err(Error::TailBoundExceeded { bound: worst, tol });
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medgraph::{grid, staircase};
    use crate::mlab::multiradial_kernel;

    fn ball_region(p: &TreeProduct) -> Vec<usize> {
        p.ball_vertices()
    }

    #[test]
    fn tree_witness_geom_single_tree() {
        let p = TreeProduct::uniform(2, 3, 1, 17).unwrap();
        let region = ball_region(&p);
        let phi = MultiSymbol::Radial(RadialSymbol::geom(0.5));
        let w = tree_product_witness(&p, &phi, 18, &region, 1e-6).unwrap();
        assert!(w.reproduction_error <= w.tail_bound + 1e-14, "{} > {}", w.reproduction_error, w.tail_bound);
        // worst pair: |k⁰ − m⁰| = 2R, so the error is r^{2K − 2R}
        assert!((w.reproduction_error - 0.5f64.powi(30)).abs() < 1e-15);
        let want = 1.0 - 0.25f64.powi(18);
        assert!((w.certified_bound - want).abs() < 1e-10, "{}", w.certified_bound);
    }

    #[test]
    fn tree_witness_finite_support_is_exact() {
        let p = TreeProduct::uniform(2, 1, 2, 8).unwrap();
        let region = ball_region(&p);
        let mut table = std::collections::HashMap::new();
        table.insert(vec![0, 0], C64::new(1.0, 0.0));
        table.insert(vec![1, 0], C64::new(0.5, 0.0));
        table.insert(vec![0, 1], C64::new(-0.25, 0.0));
        table.insert(vec![2, 1], C64::new(0.125, 0.0));
        let phi = MultiSymbol::Table(table);
        let w = tree_product_witness(&p, &phi, 6, &region, 1e-9).unwrap();
        assert_eq!(w.tail_bound, w.rounding);
        assert!(w.rounding < 1e-12);
        assert!(w.reproduction_error < 1e-12, "{}", w.reproduction_error);
    }

    #[test]
    fn tree_witness_geom_product() {
        let p = TreeProduct::uniform(2, 1, 2, 10).unwrap();
        let region = ball_region(&p);
        let phi = MultiSymbol::Product(vec![RadialSymbol::geom(0.5), RadialSymbol::geom(0.3)]);
        let w = tree_product_witness(&p, &phi, 8, &region, 1e-3).unwrap();
        assert!(w.reproduction_error <= w.tail_bound + 1e-14);
        let k = multiradial_kernel(&p, &region, &phi).unwrap();
        assert_eq!(k.len(), region.len());
    }

    #[test]
    fn median_witness_matches_tree_witness() {
        let p = TreeProduct::uniform(2, 2, 1, 14).unwrap();
        let region = ball_region(&p);
        let c = p.complex().unwrap();
        let sym = RadialSymbol::geom(0.5);
        let wm = median_witness(&c, &sym, 12, &region, 1e-4).unwrap();
        let wt = tree_product_witness(&p, &MultiSymbol::Radial(sym), 12, &region, 1e-4).unwrap();
        assert!((wm.certified_bound - wt.certified_bound).abs() < 1e-10);
        assert!(wm.reproduction_error <= wm.tail_bound + 1e-14);
        assert_eq!(wm.norm_control, Some(true));
    }

    #[test]
    fn median_witness_finite_second_difference_is_exact() {
        // 𝔡₂φ̇ is supported on {0, 1, 2}
        let sym = RadialSymbol::real_table(&[1.0, 0.5, 0.25], crate::symbolkit::TailPolicy::Zero);
        let c = grid(20, 3).unwrap();
        let region: Vec<usize> = (0..c.len()).filter(|&v| c.graph.d(0, v) <= 3).collect();
        let w = median_witness(&c, &sym, 8, &region, 1e-12).unwrap();
        assert_eq!(w.tail_bound, w.rounding);
        assert!(w.rounding < 1e-12);
        assert!(w.reproduction_error < 1e-12, "{}", w.reproduction_error);
    }

    #[test]
    fn median_witness_recombines_parity() {
        let sym = RadialSymbol::parity();
        let c = staircase(9).unwrap();
        let region: Vec<usize> = (0..c.len()).filter(|&v| c.graph.d(0, v) <= 3).collect();
        let w = median_witness(&c, &sym, 6, &region, 1e-9).unwrap();
        assert!(w.reproduction_error < 1e-12);
        assert!((w.certified_bound - 1.0).abs() < 1e-12);
        assert_eq!(w.c_minus, C64::new(1.0, 0.0));
    }

    #[test]
    fn parity_extension_adds_limits() {
        let p = TreeProduct::uniform(2, 1, 1, 6).unwrap();
        let region = ball_region(&p);
        let phi = MultiSymbol::Radial(RadialSymbol::geom(0.5));
        let w = tree_product_witness(&p, &phi, 6, &region, 1e-2).unwrap();
        let maps = w.maps.clone().unwrap();
        let signs = parity_witness(p.graph(), 0).unwrap();
        let ext = maps.clone().with_parity(C64::new(0.3, 0.0), C64::new(-0.2, 0.1), &region.iter().map(|&v| signs[v]).collect::<Vec<_>>()).unwrap();
        for a in 0..region.len() {
            for b in 0..region.len() {
                let e = (signs[region[a]] * signs[region[b]]) as f64;
                let want = maps.inner(a, b) + C64::new(0.3, 0.0) + C64::new(-0.2, 0.1) * e;
                assert!((ext.inner(a, b) - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn witness_json_round_trip() {
        let p = TreeProduct::uniform(2, 1, 1, 4).unwrap();
        let region = ball_region(&p);
        let w = tree_product_witness(&p, &MultiSymbol::Radial(RadialSymbol::geom(0.5)), 5, &region, 1e-2).unwrap();
        let text = w.to_json(true).unwrap();
        let back = FactorizationWitness::from_json(&text).unwrap();
        assert_eq!(back.certified_bound, w.certified_bound);
        let coords = back.coordinates.unwrap();
        assert_eq!(coords.p.len(), region.len());
        assert!(!w.to_json(false).unwrap().contains("coordinates"));
    }
}
