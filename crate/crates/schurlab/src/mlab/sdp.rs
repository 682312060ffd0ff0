//! ‖φ‖_cb of a finite kernel B as
//! min { max_i Z_ii : Z ⪰ 0, Z = [[·, B], [B*, ·]] },
//! solved by ADMM on the PSD cone. Every reported upper bound comes from a
//! Gram factorization of a PSD iterate (plus an exact correction for the
//! residual), every lower bound from ‖D_a B D_b‖_{S₁} with unit a, b.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_real, trace_norm, CMat};
use crate::scalar::C64;

use super::witness::{FactorizationWitness, SparseEntry, TensorMaps};
use super::{zero, KernelMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    /// Stop once upper − lower ≤ tol.
    pub tol: f64,
    pub max_iter: usize,
    /// Bracket refresh period, in ADMM iterations.
    pub check_every: usize,
    /// Initial ADMM penalty (adapted by residual balancing).
    pub rho: f64,
    /// Try an exact answer for ±PSD kernels before iterating.
    pub psd_fast_path: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { tol: 1e-6, max_iter: 20_000, check_every: 10, rho: 1.0, psd_fast_path: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub lower: f64,
    pub upper: f64,
    /// ‖X − Y‖_F of the ADMM splitting.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbNormResult {
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub iterations: usize,
    pub method: String,
    pub trace: Vec<TracePoint>,
    /// Certificate of `upper`.
    pub witness: FactorizationWitness,
}

pub fn cb_norm_sdp(kernel: &KernelMatrix, tol: f64, max_iter: usize) -> Result<CbNormResult> {
    cb_norm_sdp_with(kernel, &SdpOptions { tol, max_iter, ..SdpOptions::default() })
}

pub fn cb_norm_sdp_with(kernel: &KernelMatrix, opts: &SdpOptions) -> Result<CbNormResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("SDP tolerance must be positive".into()));
    }
    let b = &kernel.entries;
    if b.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite(0));
    }
    let scale = kernel.max_modulus();
    if kernel.is_empty() || scale == 0.0 {
        let maps = gram_maps(&CMat::zeros(0, b.nrows()), &CMat::zeros(0, b.ncols()), b)?;
        let witness = FactorizationWitness::from_maps(maps, kernel, "zero kernel")?;
        return Ok(CbNormResult { lower: 0.0, upper: 0.0, gap: 0.0, iterations: 0, method: "zero".into(), trace: vec![], witness });
    }
    if opts.psd_fast_path {
        if let Some(r) = semidefinite_path(kernel, opts.tol)? {
            return Ok(r);
        }
    }
    let run = if is_real(b) {
        let rb = b.map(|z| z.re);
        admm(&rb, opts, scale).map(|r| r.into_complex())
    } else {
        admm(b, opts, scale)
    };
    let mut r = run?;
    let (g_p, g_q) = (r.gram.columns(0, b.nrows()).into_owned(), r.gram.columns(b.nrows(), b.ncols()).into_owned());
    let maps = gram_maps(&g_p, &g_q, b)?;
    let witness = FactorizationWitness::from_maps(maps, kernel, "ADMM Gram factorization")?;
    let lower = r.lower.max(scale);
    let upper = witness.certified_bound;
    r.trace.push(TracePoint { iteration: r.iterations, lower, upper, residual: r.residual });
    if upper - lower > opts.tol {
        return Err(Error::MaxIterExceeded { lower, upper, iterations: r.iterations });
    }
    Ok(CbNormResult { lower, upper, gap: upper - lower, iterations: r.iterations, method: "admm".into(), trace: r.trace, witness })
}

/// Exact answer max_x |B_xx| when ±B is positive semidefinite.
fn semidefinite_path(kernel: &KernelMatrix, tol: f64) -> Result<Option<CbNormResult>> {
    let b = &kernel.entries;
    let scale = kernel.max_modulus();
    let skew = (b - b.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if skew > 1e-14 * scale {
        return Ok(None);
    }
    for sign in [1.0, -1.0] {
        let m = b.map(|z| z * sign);
        let (values, vectors) = if is_real(&m) {
            let e = SymmetricEigen::new(m.map(|z| z.re));
            (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors.map(|v| C64::new(v, 0.0)))
        } else {
            let e = SymmetricEigen::new(m.clone());
            (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors)
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min >= -1e-10 * scale) {
            continue;
        }
        let g = gram_from_eigen(&values, &vectors);
        let q = if sign > 0.0 { g.clone() } else { -g.clone() };
        let maps = gram_maps(&g, &q, b)?;
        let witness = FactorizationWitness::from_maps(maps, kernel, if sign > 0.0 { "PSD Gram" } else { "NSD Gram" })?;
        let upper = witness.certified_bound;
        if upper - scale <= tol {
            let method = if sign > 0.0 { "psd" } else { "nsd" };
            let trace = vec![TracePoint { iteration: 0, lower: scale, upper, residual: 0.0 }];
            return Ok(Some(CbNormResult { lower: scale, upper, gap: upper - scale, iterations: 0, method: method.into(), trace, witness }));
        }
    }
    Ok(None)
}

/// Rows √λ_i v_i* for the positive eigenpairs.
fn gram_from_eigen(values: &[f64], vectors: &CMat) -> CMat {
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > 0.0).collect();
    let n = vectors.nrows();
    CMat::from_fn(keep.len(), n, |row, col| vectors[(col, keep[row])].conj() * values[keep[row]].sqrt())
}

/// Witness with P(x) = δ₀⊗p_x + s·δ_{1+x}⊗u and Q(y) = δ₀⊗q_y + Σ_x E_xy/s·δ_{1+x}⊗u,
/// where E = B − PᵀQ is the Gram residual and u is an extra unit direction.
fn gram_maps(g_p: &CMat, g_q: &CMat, b: &CMat) -> Result<TensorMaps> {
    let (n, m, r) = (b.nrows(), b.ncols(), g_p.nrows());
    let e = b - g_p.adjoint() * g_q;
    let col_norm = |mat: &CMat, j: usize| mat.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let p_max = (0..n).map(|x| col_norm(g_p, x)).fold(0.0, f64::max);
    let q_max = (0..m).map(|y| col_norm(g_q, y)).fold(0.0, f64::max);
    let e_max = (0..m).map(|y| col_norm(&e, y)).fold(0.0, f64::max);
    let mut left = g_p.clone().resize(r + 1, n + 1, zero());
    let mut right = g_q.clone().resize(r + 1, m + 1, zero());
    left[(r, n)] = C64::new(1.0, 0.0);
    right[(r, m)] = C64::new(1.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut p: Vec<Vec<SparseEntry>> = (0..n).map(|x| vec![SparseEntry { coord: 0, atom: x, coeff: one }]).collect();
    let mut q: Vec<Vec<SparseEntry>> = (0..m).map(|y| vec![SparseEntry { coord: 0, atom: y, coeff: one }]).collect();
    if e_max > 0.0 {
        // s² = e·p/q minimizes (p² + s²)(q² + e²/s²) = (pq + e)²
        let s = if p_max > 0.0 && q_max > 0.0 { (e_max * p_max / q_max).sqrt() } else { e_max.sqrt() };
        for x in 0..n {
            p[x].push(SparseEntry { coord: 1 + x, atom: n, coeff: C64::new(s, 0.0) });
        }
        for y in 0..m {
            for x in 0..n {
                if e[(x, y)] != zero() {
                    q[y].push(SparseEntry { coord: 1 + x, atom: m, coeff: e[(x, y)] / s });
                }
            }
        }
    }
    TensorMaps::new(1 + n, left, right, p, q)
}

struct AdmmRun<T: ComplexField> {
    gram: DMatrix<T>,
    lower: f64,
    iterations: usize,
    residual: f64,
    trace: Vec<TracePoint>,
}

impl AdmmRun<f64> {
    fn into_complex(self) -> AdmmRun<C64> {
        AdmmRun {
            gram: self.gram.map(|v| C64::new(v, 0.0)),
            lower: self.lower,
            iterations: self.iterations,
            residual: self.residual,
            trace: self.trace,
        }
    }
}

fn to_complex<T: ComplexField<RealField = f64> + Copy>(m: &DMatrix<T>) -> CMat {
    m.map(|v| C64::new(v.real(), v.imaginary()))
}

/// Projection onto the PSD cone, plus the Gram rows of the projection.
fn psd_project<T: ComplexField<RealField = f64> + Copy>(m: &DMatrix<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let sym = (m + m.adjoint()).scale(0.5);
    let e = SymmetricEigen::new(sym);
    if e.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::StructureViolation("eigen-solver returned non-finite values".into()));
    }
    let keep: Vec<usize> = (0..e.eigenvalues.len()).filter(|&i| e.eigenvalues[i] > 0.0).collect();
    let n = m.nrows();
    let gram = DMatrix::from_fn(keep.len(), n, |row, col| {
        e.eigenvectors[(col, keep[row])].conjugate().scale(e.eigenvalues[keep[row]].sqrt())
    });
    let x = gram.adjoint() * &gram;
    Ok((x, gram))
}

/// t with Σ_i max(v_i − t, 0) = budget.
fn water_level(values: &[f64], budget: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    for k in 0..v.len() {
        acc += v[k];
        let t = (acc - budget) / (k + 1) as f64;
        if k + 1 == v.len() || t >= v[k + 1] {
            return t;
        }
    }
    unreachable!("non-empty input")
}

fn lower_bound<T: ComplexField<RealField = f64> + Copy>(b: &DMatrix<T>, wa: &[f64], wb: &[f64]) -> f64 {
    let na = wa.iter().map(|w| w.max(0.0)).sum::<f64>();
    let nb = wb.iter().map(|w| w.max(0.0)).sum::<f64>();
    if !(na > 0.0 && nb > 0.0) {
        return 0.0;
    }
    let a: Vec<f64> = wa.iter().map(|w| (w.max(0.0) / na).sqrt()).collect();
    let bb: Vec<f64> = wb.iter().map(|w| (w.max(0.0) / nb).sqrt()).collect();
    let m = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)].scale(a[i] * bb[j]));
    trace_norm(&to_complex(&m))
}

fn admm<T: ComplexField<RealField = f64> + Copy>(b_raw: &DMatrix<T>, opts: &SdpOptions, scale: f64) -> Result<AdmmRun<T>> {
    let (n, m) = (b_raw.nrows(), b_raw.ncols());
    let size = n + m;
    let b = b_raw.unscale(scale);
    let op = b.clone().singular_values().iter().copied().fold(0.0, f64::max);

    // feasible start [[‖B‖ I, B], [B*, ‖B‖ I]]
    let mut y = DMatrix::<T>::zeros(size, size);
    for i in 0..size {
        y[(i, i)] = T::from_real(op);
    }
    y.view_mut((0, n), (n, m)).copy_from(&b);
    y.view_mut((n, 0), (m, n)).copy_from(&b.adjoint());
    let mut u = DMatrix::<T>::zeros(size, size);
    let mut rho = opts.rho;

    let mut best_upper = f64::INFINITY;
    let mut best_lower = 1.0f64;
    let mut best_gram = psd_project(&y)?.1;
    let mut trace = Vec::new();
    let mut residual = 0.0;
    let mut iterations = 0;

    for it in 1..=opts.max_iter {
        iterations = it;
        let (x, gram) = psd_project(&(&y - &u))?;
        let v = &x + &u;
        let mut y_new = v.clone();
        y_new.view_mut((0, n), (n, m)).copy_from(&b);
        y_new.view_mut((n, 0), (m, n)).copy_from(&b.adjoint());
        let diag: Vec<f64> = (0..size).map(|i| v[(i, i)].real()).collect();
        let t = water_level(&diag, 1.0 / rho);
        for (i, &d) in diag.iter().enumerate() {
            y_new[(i, i)] = T::from_real(d.min(t));
        }
        let primal = (&x - &y_new).norm();
        let dual = rho * (&y_new - &y).norm();
        u += &x - &y_new;
        y = y_new;
        residual = primal;
        if primal > 10.0 * dual {
            rho *= 2.0;
            u = u.unscale(2.0);
        } else if dual > 10.0 * primal {
            rho /= 2.0;
            u = u.scale(2.0);
        }

        if it % opts.check_every == 0 || it == opts.max_iter {
            let g_p = gram.columns(0, n).into_owned();
            let g_q = gram.columns(n, m).into_owned();
            let e = &b - g_p.adjoint() * &g_q;
            let col = |mat: &DMatrix<T>, j: usize| mat.column(j).norm();
            let p = (0..n).map(|j| col(&g_p, j)).fold(0.0, f64::max);
            let q = (0..m).map(|j| col(&g_q, j)).fold(0.0, f64::max);
            let err = (0..m).map(|j| col(&e, j)).fold(0.0, f64::max);
            let upper = p * q + err;
            if upper < best_upper {
                best_upper = upper;
                best_gram = gram.clone();
            }
            // dual weights: the diagonal of ρU, split into the two blocks
            let mut w: Vec<f64> = (0..size).map(|i| u[(i, i)].real()).collect();
            if w.iter().sum::<f64>() < 0.0 {
                w.iter_mut().for_each(|v| *v = -*v);
            }
            best_lower = best_lower.max(lower_bound(&b, &w[..n], &w[n..]));
            trace.push(TracePoint { iteration: it, lower: best_lower * scale, upper: best_upper * scale, residual });
            if best_upper - best_lower <= opts.tol / scale {
                break;
            }
        }
    }
    let gram = best_gram.scale(scale.sqrt());
    Ok(AdmmRun { gram, lower: best_lower * scale, iterations, residual, trace })
}
