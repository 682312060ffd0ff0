//! Lattice-indexed operators on ℓ₂(ℕ^N): the multiradial matrix, the
//! shell-averaging fold onto a binomially weighted Hankel matrix, and
//! even subsampling.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{shell_size, C64};
use crate::symbolkit::RadialSymbol;

use super::{IndexKind, TruncatedMatrix};

/// A function φ̃ on ℕ^N.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiSymbol {
    /// φ̃(n) = φ̇(|n|)
    Radial(RadialSymbol),
    /// φ̃(n) = φ̇(|n|/2) when every coordinate is even, 0 otherwise.
    EvenLift(RadialSymbol),
    /// φ̃(n) = Π_i φ̇_i(n_i)
    Product(Vec<RadialSymbol>),
    /// φ̃(n) = Σ_i φ̇_i(n_i)
    Separable(Vec<RadialSymbol>),
    /// Finitely supported table, zero elsewhere.
    Table(HashMap<Vec<usize>, C64>),
}

impl MultiSymbol {
    pub fn eval(&self, n: &[usize]) -> Result<C64> {
        let total: usize = n.iter().sum();
        match self {
            MultiSymbol::Radial(s) => s.eval(total),
            MultiSymbol::EvenLift(s) => {
                if n.iter().all(|c| c % 2 == 0) {
                    s.eval(total / 2)
                } else {
                    Ok(C64::new(0.0, 0.0))
                }
            }
            MultiSymbol::Product(fs) => {
                check_dim(fs.len(), n)?;
                fs.iter().zip(n).try_fold(C64::new(1.0, 0.0), |acc, (f, &c)| Ok(acc * f.eval(c)?))
            }
            MultiSymbol::Separable(fs) => {
                check_dim(fs.len(), n)?;
                fs.iter().zip(n).try_fold(C64::new(0.0, 0.0), |acc, (f, &c)| Ok(acc + f.eval(c)?))
            }
            MultiSymbol::Table(t) => Ok(t.get(n).copied().unwrap_or(C64::new(0.0, 0.0))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            MultiSymbol::Radial(s) => format!("radial[{}]", s.label()),
            MultiSymbol::EvenLift(s) => format!("even-lift[{}]", s.label()),
            MultiSymbol::Product(fs) => {
                format!("product[{}]", fs.iter().map(|f| f.label()).collect::<Vec<_>>().join(","))
            }
            MultiSymbol::Separable(fs) => {
                format!("sum[{}]", fs.iter().map(|f| f.label()).collect::<Vec<_>>().join(","))
            }
            MultiSymbol::Table(t) => format!("table[{} points]", t.len()),
        }
    }

    /// Evaluator that caches radial samples up to `max_sum` (coordinate sum).
    fn cached(&self, dim: usize, max_sum: usize) -> Result<Cached<'_>> {
        Ok(match self {
            MultiSymbol::Radial(s) => Cached::Radial(s.sample(max_sum + 1)?),
            MultiSymbol::EvenLift(s) => Cached::Even(s.sample(max_sum / 2 + 1)?),
            MultiSymbol::Product(fs) | MultiSymbol::Separable(fs) => {
                if fs.len() != dim {
                    return Err(Error::InvalidInput(format!(
                        "multi-symbol has {} factors, lattice dimension {dim}",
                        fs.len()
                    )));
                }
                let tables = fs.iter().map(|f| f.sample(max_sum + 1)).collect::<Result<Vec<_>>>()?;
                if matches!(self, MultiSymbol::Product(_)) {
                    Cached::Product(tables)
                } else {
                    Cached::Sum(tables)
                }
            }
            MultiSymbol::Table(_) => Cached::Direct(self),
        })
    }
}

fn check_dim(expected: usize, n: &[usize]) -> Result<()> {
    if expected != n.len() {
        return Err(Error::InvalidInput(format!("point of dimension {} for {expected} factors", n.len())));
    }
    Ok(())
}

enum Cached<'a> {
    Radial(Vec<C64>),
    Even(Vec<C64>),
    Product(Vec<Vec<C64>>),
    Sum(Vec<Vec<C64>>),
    Direct(&'a MultiSymbol),
}

impl Cached<'_> {
    fn eval(&self, n: &[usize]) -> Result<C64> {
        Ok(match self {
            Cached::Radial(v) => v[n.iter().sum::<usize>()],
            Cached::Even(v) => {
                if n.iter().all(|c| c % 2 == 0) {
                    v[n.iter().sum::<usize>() / 2]
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Cached::Product(t) => t.iter().zip(n).map(|(f, &c)| f[c]).product(),
            Cached::Sum(t) => t.iter().zip(n).map(|(f, &c)| f[c]).sum(),
            Cached::Direct(s) => s.eval(n)?,
        })
    }
}

/// Points m ∈ ℕ^dim with |m| ≤ cutoff, graded by |m| and lexicographic
/// (decreasing first coordinate) within a shell.
pub fn lattice_points(dim: usize, cutoff: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=cutoff {
        shell(dim, total, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

fn shell(dim: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() + 1 == dim {
        prefix.push(remaining);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    if dim == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for first in (0..=remaining).rev() {
        prefix.push(first);
        shell(dim, remaining - first, prefix, out);
        prefix.pop();
    }
}

fn alternating_entry(phi: &Cached<'_>, m: &[usize], n: &[usize], step: usize, scratch: &mut [usize]) -> Result<C64> {
    let dim = m.len();
    let mut acc = C64::new(0.0, 0.0);
    for subset in 0..(1usize << dim) {
        for i in 0..dim {
            scratch[i] = m[i] + n[i] + if subset >> i & 1 == 1 { step } else { 0 };
        }
        let v = phi.eval(scratch)?;
        if subset.count_ones() % 2 == 0 {
            acc += v;
        } else {
            acc -= v;
        }
    }
    Ok(acc)
}

fn build_on(points: &[Vec<usize>], phi: &MultiSymbol, dim: usize, step: usize) -> Result<CMat> {
    if step != 1 && step != 2 {
        return Err(Error::InvalidInput(format!("lattice step must be 1 or 2, got {step}")));
    }
    let max_coord_sum = points.iter().map(|p| p.iter().sum::<usize>()).max().unwrap_or(0);
    let cache = phi.cached(dim, 2 * max_coord_sum + step * dim)?;
    let size = points.len();
    let mut m = CMat::zeros(size, size);
    let mut scratch = vec![0usize; dim];
    for a in 0..size {
        for b in a..size {
            let v = alternating_entry(&cache, &points[a], &points[b], step, &mut scratch)?;
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    Ok(m)
}

/// entry(m, n) = Σ_{I ⊂ [N]} (-1)^{|I|} φ̃(m + n + j·χ^I) on the points |m| ≤ cutoff.
pub fn build_multiradial_t(phi: &MultiSymbol, dim: usize, cutoff: usize, step: usize) -> Result<TruncatedMatrix> {
    let points = lattice_points(dim, cutoff);
    let entries = build_on(&points, phi, dim, step)?;
    Ok(TruncatedMatrix {
        entries,
        index: IndexKind::Lattice { dim, cutoff, points },
        provenance: format!("multiradial step={step} N={dim} cutoff={cutoff} phi={}", phi.label()),
    })
}

/// Same operator on the box [0, side)^dim in row-major order.
pub fn build_multiradial_box(phi: &MultiSymbol, dim: usize, side: usize, step: usize) -> Result<TruncatedMatrix> {
    let points = box_points(dim, side);
    let entries = build_on(&points, phi, dim, step)?;
    Ok(TruncatedMatrix {
        entries,
        index: IndexKind::Box { dim, side },
        provenance: format!("multiradial step={step} N={dim} box={side} phi={}", phi.label()),
    })
}

/// Row-major enumeration of [0, side)^dim (first coordinate slowest).
pub fn box_points(dim: usize, side: usize) -> Vec<Vec<usize>> {
    let total = side.pow(dim as u32);
    (0..total)
        .map(|mut flat| {
            let mut p = vec![0; dim];
            for i in (0..dim).rev() {
                p[i] = flat % side;
                flat /= side;
            }
            p
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldDirection {
    /// Lattice T ↦ V*TV.
    Fold,
    /// Hankel H ↦ VHV*.
    Unfold,
}

/// The isometry V δ_i = binom(N+i-1,N-1)^{-1/2} Σ_{|m|=i} δ_m, applied on either side.
pub fn fold_unfold(direction: FoldDirection, matrix: &TruncatedMatrix, dim: usize) -> Result<TruncatedMatrix> {
    match direction {
        FoldDirection::Fold => fold(matrix, dim),
        FoldDirection::Unfold => unfold(matrix, dim),
    }
}

fn fold(matrix: &TruncatedMatrix, dim: usize) -> Result<TruncatedMatrix> {
    let (cutoff, points) = match &matrix.index {
        IndexKind::Lattice { dim: d, cutoff, points } if *d == dim => (*cutoff, points),
        _ => return Err(Error::StructureViolation("fold needs a graded lattice section of matching dimension".into())),
    };
    let k = cutoff + 1;
    let shells: Vec<usize> = points.iter().map(|p| p.iter().sum()).collect();
    let mut sums = CMat::zeros(k, k);
    let mut reference: Vec<Option<C64>> = vec![None; k * k];
    for a in 0..points.len() {
        for b in 0..points.len() {
            let (i, j) = (shells[a], shells[b]);
            let v = matrix.entries[(a, b)];
            match reference[i * k + j] {
                None => reference[i * k + j] = Some(v),
                Some(r) => {
                    if (r - v).norm() > 1e-12 * (1.0 + r.norm()) {
                        return Err(Error::StructureViolation(format!(
                            "entries in shell block ({i}, {j}) are not constant"
                        )));
                    }
                }
            }
            sums[(i, j)] += v;
        }
    }
    let c: Vec<f64> = (0..k).map(|i| shell_size(dim, i).map(|s| (s as f64).sqrt().recip())).collect::<Result<_>>()?;
    let folded = CMat::from_fn(k, k, |i, j| sums[(i, j)] * (c[i] * c[j]));
    Ok(TruncatedMatrix::linear(folded, format!("fold N={dim} of [{}]", matrix.provenance)))
}

fn unfold(matrix: &TruncatedMatrix, dim: usize) -> Result<TruncatedMatrix> {
    if matrix.index != IndexKind::Linear {
        return Err(Error::StructureViolation("unfold needs a Hankel-type section".into()));
    }
    let cutoff = matrix.size().saturating_sub(1);
    let points = lattice_points(dim, cutoff);
    let shells: Vec<usize> = points.iter().map(|p| p.iter().sum()).collect();
    let c: Vec<f64> =
        (0..=cutoff).map(|i| shell_size(dim, i).map(|s| (s as f64).sqrt().recip())).collect::<Result<_>>()?;
    let n = points.len();
    let entries = CMat::from_fn(n, n, |a, b| {
        let (i, j) = (shells[a], shells[b]);
        matrix.entries[(i, j)] * (c[i] * c[j])
    });
    Ok(TruncatedMatrix {
        entries,
        index: IndexKind::Lattice { dim, cutoff, points },
        provenance: format!("unfold N={dim} of [{}]", matrix.provenance),
    })
}

/// entry(m, n) = T(2m, 2n) on the points |m| ≤ ⌊cutoff/2⌋.
pub fn even_subsample(t: &TruncatedMatrix, dim: usize) -> Result<TruncatedMatrix> {
    let (cutoff, points) = match &t.index {
        IndexKind::Lattice { dim: d, cutoff, points } if *d == dim => (*cutoff, points),
        _ => return Err(Error::StructureViolation("even subsampling needs a graded lattice section".into())),
    };
    let lookup: HashMap<&[usize], usize> = points.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let out_cutoff = cutoff / 2;
    let out_points = lattice_points(dim, out_cutoff);
    let idx: Vec<usize> = out_points
        .iter()
        .map(|p| {
            let doubled: Vec<usize> = p.iter().map(|c| 2 * c).collect();
            lookup.get(doubled.as_slice()).copied().ok_or(Error::TailUndefined { index: 2 * p.iter().sum::<usize>(), len: cutoff + 1 })
        })
        .collect::<Result<_>>()?;
    let n = out_points.len();
    let entries = CMat::from_fn(n, n, |a, b| t.entries[(idx[a], idx[b])]);
    Ok(TruncatedMatrix {
        entries,
        index: IndexKind::Lattice { dim, cutoff: out_cutoff, points: out_points },
        provenance: format!("even-subsample of [{}]", t.provenance),
    })
}
