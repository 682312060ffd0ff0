//! Dense spectral routines over nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::scalar::C64;

pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

pub fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn is_symmetric(m: &CMat) -> bool {
    m.is_square() && (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = if is_real(m) {
        let r = real_part(m);
        let eig: Option<Vec<f64>> = is_symmetric(m).then(|| {
            // |eigenvalues| of a real symmetric matrix are its singular values
            SymmetricEigen::new(r.clone()).eigenvalues.iter().map(|v| v.abs()).collect()
        });
        match eig {
            // the symmetric solver can return NaN on sections with a huge dynamic range
            Some(e) if e.iter().all(|v| v.is_finite()) => e,
            _ => r.singular_values().iter().copied().collect(),
        }
    } else {
        m.clone().singular_values().iter().copied().collect()
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Σ singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    // summing from the smallest keeps the rounding of the tail small
    singular_values(m).iter().rev().sum()
}

/// Upper-left `k × k` block.
pub fn principal(m: &CMat, k: usize) -> CMat {
    m.view((0, 0), (k, k)).into_owned()
}

/// Factors `m = A* B` with `A = Σ^{1/2} U*`, `B = Σ^{1/2} V*` from `m = U Σ V*`.
/// Singular values below `rel_cut · σ_max` are dropped, so the factors have
/// as many rows as the numerical rank.
pub fn polar_factors(m: &CMat, rel_cut: f64) -> (CMat, CMat) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v requested");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > rel_cut * smax && s[i] > 0.0).collect();
    let mut a = CMat::zeros(keep.len(), m.nrows());
    let mut b = CMat::zeros(keep.len(), m.ncols());
    for (row, &i) in keep.iter().enumerate() {
        let root = s[i].sqrt();
        for c in 0..m.nrows() {
            a[(row, c)] = u[(c, i)].conj() * root;
        }
        for c in 0..m.ncols() {
            b[(row, c)] = v_t[(i, c)] * root;
        }
    }
    (a, b)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues unsorted.
pub fn hermitian_eigen(m: &CMat) -> (DVector<f64>, CMat) {
    let e = SymmetricEigen::new(m.clone());
    (e.eigenvalues, e.eigenvectors)
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue(m: &RMat) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Frobenius norm.
pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
