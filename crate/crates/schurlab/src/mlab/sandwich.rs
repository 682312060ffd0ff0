//! cb norms of radial kernels on products of tree balls, compared with the
//! class-A trace norm plus the parity limits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{s1_estimate, ClassTag, HankelSpec, S1Estimate, S1Policy};
use crate::medgraph::{product_graph, tree_ball, FiniteGraph};
use crate::scalar::C64;
use crate::symbolkit::{limits_report, RadialSymbol};

use super::sdp::{cb_norm_sdp_with, SdpOptions};
use super::radial_kernel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub radius: usize,
    pub vertices: usize,
    pub cb_lower: f64,
    pub cb_upper: f64,
    pub method: String,
    /// ‖H‖_{S₁,trunc} + |c₊| + |c₋|.
    pub upper_expression: f64,
    /// Π((d_i − 2)/d_i)·‖H‖ + |c₊| + |c₋|, reported only.
    pub lower_expression: f64,
    pub upper_holds: bool,
    pub gap_to_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub symbol: String,
    pub degrees: Vec<usize>,
    pub h_estimate: S1Estimate,
    pub c_plus: C64,
    pub c_minus: C64,
    pub rows: Vec<SandwichRow>,
    /// cb values nondecreasing in R (within tol).
    pub monotone: bool,
    pub passed: bool,
}

/// Runs the SDP on the product of (d_i)-regular radius-R tree balls for each
/// R in `radii` and checks the upper half of the sandwich.
pub fn sandwich_check(
    symbol: &RadialSymbol,
    degrees: &[usize],
    radii: &[usize],
    sizes: &[usize],
    tol: f64,
) -> Result<SandwichReport> {
    if degrees.is_empty() || degrees.iter().any(|&d| d < 3) {
        return Err(Error::InvalidInput("tree degrees must all be ≥ 3".into()));
    }
    let level = degrees.len();
    let spec = HankelSpec::binomial_class(symbol.clone(), level, ClassTag::A)?;
    let h_estimate = s1_estimate(&spec, sizes, &S1Policy::default())?;
    let h = *h_estimate.values.last().unwrap();
    let limits = limits_report(symbol, 256, 1e-10)?;
    if !limits.both_determined() {
        return Err(Error::InvalidInput(format!("limits of {} are not determined", symbol.label())));
    }
    let parity = limits.c_plus.norm() + limits.c_minus.norm();
    let factor: f64 = degrees.iter().map(|&d| (d as f64 - 2.0) / d as f64).product();

    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        let balls = degrees.iter().map(|&d| tree_ball(d - 1, radius)).collect::<Result<Vec<_>>>()?;
        let graphs: Vec<&FiniteGraph> = balls.iter().map(|b| &b.graph).collect();
        let product = product_graph(&graphs)?;
        let kernel = radial_kernel(&product.graph, symbol)?;
        let r = cb_norm_sdp_with(&kernel, &SdpOptions { tol: tol * 0.1, ..SdpOptions::default() })?;
        let upper_expression = h + parity;
        let lower_expression = factor * h + parity;
        rows.push(SandwichRow {
            radius,
            vertices: kernel.len(),
            cb_lower: r.lower,
            cb_upper: r.upper,
            method: r.method,
            upper_expression,
            lower_expression,
            upper_holds: r.lower <= upper_expression + tol,
            gap_to_lower: r.upper - lower_expression,
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].cb_upper >= w[0].cb_lower - tol);
    let passed = monotone && rows.iter().all(|r| r.upper_holds);
    Ok(SandwichReport {
        symbol: symbol.label(),
        degrees: degrees.to_vec(),
        h_estimate,
        c_plus: limits.c_plus,
        c_minus: limits.c_minus,
        rows,
        monotone,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_symbol_sandwich() {
        let r = sandwich_check(&RadialSymbol::constant(1.0), &[3], &[1, 2], &[16, 32], 1e-4).unwrap();
        assert!(r.passed);
        for row in &r.rows {
            assert!((row.cb_upper - 1.0).abs() < 1e-6);
            assert!((row.upper_expression - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_sandwich_has_zero_matrix_part() {
        let r = sandwich_check(&RadialSymbol::parity(), &[3], &[1, 2], &[16, 32], 1e-4).unwrap();
        assert!(r.passed);
        assert_eq!(*r.h_estimate.values.last().unwrap(), 0.0);
        assert!((r.rows[1].cb_upper - 1.0).abs() < 1e-6);
    }

    #[test]
    fn geom_sandwich_single_tree() {
        let r = sandwich_check(&RadialSymbol::geom(0.5), &[3], &[1, 2, 3, 4], &[32, 64], 1e-4).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
