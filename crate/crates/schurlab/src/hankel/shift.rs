//! Shift operators on ℓ₂(ℕ^N) restricted to the box [0, side)^N, the
//! smoothed products S(m, n), and the τ-transform
//! T' = Π_i (1 - 1/q_i)^{-1} (I - τ_i/q_i) T with τ_i(T) = S_i T S_i*.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::C64;

use super::lattice::box_points;
use super::{IndexKind, TruncatedMatrix};

/// Section of S^m (S*)^n on ℓ₂(ℕ): δ_b ↦ δ_{b-n+m} for b ≥ n.
fn shift_1d(m: usize, n: usize, side: usize) -> CMat {
    CMat::from_fn(side, side, |a, b| {
        if b >= n && a + n == b + m {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// (1 - 1/q)^{-1}(S^m S*^n - S^{m-1} S*^{n-1}/q) when m, n ≥ 1, else S^m S*^n.
fn smoothed_1d(m: usize, n: usize, q: usize, side: usize) -> CMat {
    let plain = shift_1d(m, n, side);
    if m == 0 || n == 0 {
        return plain;
    }
    let qf = q as f64;
    (plain - shift_1d(m - 1, n - 1, side) * C64::new(1.0 / qf, 0.0)) * C64::new(qf / (qf - 1.0), 0.0)
}

fn tensor(factors: Vec<CMat>) -> CMat {
    let mut acc = CMat::from_element(1, 1, C64::new(1.0, 0.0));
    for f in factors {
        acc = acc.kronecker(&f);
    }
    acc
}

fn check_points(m: &[usize], n: &[usize], side: usize) -> Result<()> {
    if m.len() != n.len() || m.is_empty() {
        return Err(Error::InvalidInput("lattice points must share a positive dimension".into()));
    }
    if m.iter().chain(n).any(|&c| c + 1 > side) {
        return Err(Error::InvalidInput(format!("box side {side} does not contain the points")));
    }
    Ok(())
}

/// Section of S^m (S*)^n = Π_i S_i^{m_i} (S_i*)^{n_i}.
pub fn shift_power(m: &[usize], n: &[usize], side: usize) -> Result<TruncatedMatrix> {
    check_points(m, n, side)?;
    let entries = tensor(m.iter().zip(n).map(|(&a, &b)| shift_1d(a, b, side)).collect());
    Ok(TruncatedMatrix {
        entries,
        index: IndexKind::Box { dim: m.len(), side },
        provenance: format!("S^{m:?} S*^{n:?}"),
    })
}

/// Section of the smoothed product S(m, n).
pub fn smoothed_shift(m: &[usize], n: &[usize], q: &[usize], side: usize) -> Result<TruncatedMatrix> {
    check_points(m, n, side)?;
    check_q(q, m.len())?;
    let entries = tensor((0..m.len()).map(|i| smoothed_1d(m[i], n[i], q[i], side)).collect());
    Ok(TruncatedMatrix {
        entries,
        index: IndexKind::Box { dim: m.len(), side },
        provenance: format!("S({m:?}, {n:?}) q={q:?}"),
    })
}

fn check_q(q: &[usize], dim: usize) -> Result<()> {
    if q.len() != dim || q.iter().any(|&x| x < 2) {
        return Err(Error::InvalidInput("need one q_i ≥ 2 per coordinate".into()));
    }
    Ok(())
}

/// τ-transform of a box section. The output lives on the box of side
/// `side + 1`, which holds T' exactly when T is supported in the input box.
pub fn tau_transform(t: &TruncatedMatrix, q: &[usize]) -> Result<TruncatedMatrix> {
    let (dim, side) = match t.index {
        IndexKind::Box { dim, side } => (dim, side),
        _ => return Err(Error::StructureViolation("τ-transform needs a box section".into())),
    };
    check_q(q, dim)?;
    let out_side = side + 1;
    let in_points = box_points(dim, side);
    let flat = |p: &[usize]| p.iter().fold(0usize, |acc, &c| acc * out_side + c);
    let size = out_side.pow(dim as u32);
    let mut cur = CMat::zeros(size, size);
    for (a, pa) in in_points.iter().enumerate() {
        for (b, pb) in in_points.iter().enumerate() {
            cur[(flat(pa), flat(pb))] = t.entries[(a, b)];
        }
    }
    let out_points = box_points(dim, out_side);
    for i in 0..dim {
        let qf = q[i] as f64;
        let mut next = cur.clone();
        for (a, pa) in out_points.iter().enumerate() {
            if pa[i] == 0 {
                continue;
            }
            let mut sa = pa.clone();
            sa[i] -= 1;
            let fa = flat(&sa);
            for (b, pb) in out_points.iter().enumerate() {
                if pb[i] == 0 {
                    continue;
                }
                let mut sb = pb.clone();
                sb[i] -= 1;
                // (S_i T S_i*)(a, b) = T(a - e_i, b - e_i)
                next[(a, b)] -= cur[(fa, flat(&sb))] / qf;
            }
        }
        cur = next * C64::new(qf / (qf - 1.0), 0.0);
    }
    Ok(TruncatedMatrix {
        entries: cur,
        index: IndexKind::Box { dim, side: out_side },
        provenance: format!("tau q={q:?} of [{}]", t.provenance),
    })
}

/// Tr(A·B).
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_zero_case_is_forward_shift() {
        let s = smoothed_shift(&[1], &[0], &[3], 4).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let expect = if a == b + 1 { 1.0 } else { 0.0 };
                assert_eq!(s.entries[(a, b)].re, expect);
            }
        }
    }

    #[test]
    fn smoothed_diagonal_example() {
        let s = smoothed_shift(&[1], &[1], &[2], 4).unwrap();
        assert!((s.entries[(0, 0)].re + 1.0).abs() < 1e-15);
        for k in 1..4 {
            assert!((s.entries[(k, k)].re - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_dimensional_factor_with_identity() {
        let s = smoothed_shift(&[1, 0], &[0, 0], &[2, 2], 3).unwrap();
        let expect = shift_1d(1, 0, 3).kronecker(&CMat::identity(3, 3));
        assert_eq!(s.entries, expect);
    }

    #[test]
    fn tau_of_corner_projection() {
        let mut e = CMat::zeros(1, 1);
        e[(0, 0)] = C64::new(1.0, 0.0);
        let t = TruncatedMatrix { entries: e, index: IndexKind::Box { dim: 1, side: 1 }, provenance: String::new() };
        let tp = tau_transform(&t, &[2]).unwrap();
        assert!((tp.entries[(0, 0)].re - 2.0).abs() < 1e-15);
        assert!((tp.entries[(1, 1)].re + 1.0).abs() < 1e-15);
        assert_eq!(tp.entries[(0, 1)].re, 0.0);
    }

    #[test]
    fn tau_of_zero() {
        let t = TruncatedMatrix { entries: CMat::zeros(9, 9), index: IndexKind::Box { dim: 2, side: 3 }, provenance: String::new() };
        assert!(tau_transform(&t, &[2, 3]).unwrap().entries.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn q_must_be_at_least_two() {
        assert!(smoothed_shift(&[1], &[1], &[1], 3).is_err());
    }
}
