//! Dyadic Besov norms of analytic series on the torus, fractional
//! integration, the symbol-to-series maps, and the comparison with the
//! Hankel trace-class verdicts.

use std::io::Write;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{class_membership, BesovCheck, ClassTag, S1Policy};
use crate::scalar::{binomial, Scalar, C64};
use crate::symbolkit::RadialSymbol;
use crate::verdict::{TailPolicy, Verdict};

/// Coefficients φ̂(0), …, φ̂(L-1) of an analytic function on the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSeries {
    pub coefficients: Vec<C64>,
    pub provenance: String,
}

impl AnalyticSeries {
    pub fn new(coefficients: Vec<C64>, provenance: impl Into<String>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidInput("a series needs at least one coefficient".into()));
        }
        if let Some(i) = coefficients.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(AnalyticSeries { coefficients, provenance: provenance.into() })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// JSON array of `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coefficients.iter().map(|z| serde_json::json!([z.re, z.im])).collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::InvalidInput("series must be a JSON array".into()))?;
        let coeffs = arr
            .iter()
            .map(|p| match p {
                serde_json::Value::Array(pair) if pair.len() == 2 => {
                    match (pair[0].as_f64(), pair[1].as_f64()) {
                        (Some(re), Some(im)) => Ok(C64::new(re, im)),
                        _ => Err(Error::InvalidInput("series entries must be numbers".into())),
                    }
                }
                serde_json::Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
                _ => Err(Error::InvalidInput("series entries must be [re, im]".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs, "json")
    }
}

/// The tent Ŵ_n, stored on its support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicBlock {
    pub n: usize,
    /// Inclusive support range.
    pub start: usize,
    pub end: usize,
    /// Ŵ_n(start), …, Ŵ_n(end).
    pub weights: Vec<f64>,
}

impl DyadicBlock {
    pub fn weight(&self, k: usize) -> f64 {
        if k < self.start || k > self.end {
            0.0
        } else {
            self.weights[k - self.start]
        }
    }
}

fn tent(n: usize, k: usize) -> f64 {
    if n == 0 {
        return if k <= 1 { 1.0 } else { 0.0 };
    }
    let mid = 1usize << n;
    let lo = mid / 2;
    let hi = 2 * mid;
    if k < lo || k > hi {
        0.0
    } else if k <= mid {
        (k - lo) as f64 / lo as f64
    } else {
        (hi - k) as f64 / mid as f64
    }
}

pub fn dyadic_block(n: usize) -> DyadicBlock {
    let (start, end) = if n == 0 { (0, 1) } else { (1usize << (n - 1), 1usize << (n + 1)) };
    DyadicBlock { n, start, end, weights: (start..=end).map(|k| tent(n, k)).collect() }
}

/// Last index at which Ŵ_n is nonzero, plus one.
fn block_reach(n: usize) -> usize {
    if n == 0 {
        2
    } else {
        1usize << (n + 1)
    }
}

/// Coefficientwise product k ↦ Ŵ_n(k)·φ̂(k).
pub fn block_project(series: &AnalyticSeries, n: usize) -> Result<AnalyticSeries> {
    let reach = block_reach(n);
    if series.len() < reach {
        return Err(Error::TailUndefined { index: reach - 1, len: series.len() });
    }
    let coefficients = series.coefficients.iter().enumerate().map(|(k, z)| z * tent(n, k)).collect();
    Ok(AnalyticSeries { coefficients, provenance: format!("W_{n} * [{}]", series.provenance) })
}

/// (1/G)·Σ_t |Σ_k a_k ω^{kt}| over the G-th roots of unity ω.
///
/// Leading and trailing zero coefficients are dropped first (they do not
/// change the modulus on the circle). When `grid` is smaller than four
/// times the remaining length, the next power of two above that is used.
pub fn l1_circle_norm(series: &AnalyticSeries, grid: usize) -> f64 {
    let c = &series.coefficients;
    let first = match c.iter().position(|z| z.norm() != 0.0) {
        Some(i) => i,
        None => return 0.0,
    };
    let last = c.iter().rposition(|z| z.norm() != 0.0).unwrap();
    let body = &c[first..=last];
    let g = if grid >= 4 * body.len() { grid } else { (4 * body.len()).next_power_of_two() };
    let mut buf = vec![C64::new(0.0, 0.0); g];
    buf[..body.len()].copy_from_slice(body);
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(g).process(&mut buf);
    // Sum small moduli first for a reproducible, accurate total.
    let mut mods: Vec<f64> = buf.iter().map(|z| z.norm()).collect();
    mods.sort_by(f64::total_cmp);
    mods.iter().sum::<f64>() / g as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockValue {
    pub n: usize,
    /// 2^{ns}.
    pub scale: f64,
    /// ‖W_n ∗ φ‖_{L₁}.
    pub block_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub s: f64,
    pub partial: f64,
    pub block_values: Vec<BlockValue>,
    pub tail_flag: Verdict,
}

impl BesovNorm {
    /// CSV with columns `n,scale,block_norm`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "scale", "block_norm"])?;
        for b in &self.block_values {
            w.write_record(&[b.n.to_string(), format!("{:e}", b.scale), format!("{:e}", b.block_norm)])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn besov_norm(series: &AnalyticSeries, s: f64, n_max: usize, grid: usize) -> Result<BesovNorm> {
    besov_norm_with(series, s, n_max, grid, &TailPolicy::default())
}

/// Σ_{n ≤ n_max} 2^{ns}‖W_n ∗ φ‖_{L₁} with a tail verdict on the summands.
pub fn besov_norm_with(
    series: &AnalyticSeries,
    s: f64,
    n_max: usize,
    grid: usize,
    tail: &TailPolicy,
) -> Result<BesovNorm> {
    let reach = block_reach(n_max);
    if series.len() < reach {
        return Err(Error::TailUndefined { index: reach - 1, len: series.len() });
    }
    let block_values: Vec<BlockValue> = (0..=n_max)
        .map(|n| {
            let b = block_project(series, n)?;
            Ok(BlockValue { n, scale: (n as f64 * s).exp2(), block_norm: l1_circle_norm(&b, grid) })
        })
        .collect::<Result<_>>()?;
    let summands: Vec<f64> = block_values.iter().map(|b| b.scale * b.block_norm).collect();
    Ok(BesovNorm {
        s,
        partial: summands.iter().sum(),
        tail_flag: tail.classify(&summands),
        block_values,
    })
}

/// k ↦ (1+k)^{-α} φ̂(k).
pub fn fractional_integration(series: &AnalyticSeries, alpha: f64) -> AnalyticSeries {
    let coefficients =
        series.coefficients.iter().enumerate().map(|(k, z)| z * (k as f64 + 1.0).powf(-alpha)).collect();
    AnalyticSeries { coefficients, provenance: format!("I_{alpha} [{}]", series.provenance) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftDirection {
    Forward,
    Backward,
}

/// FORWARD prepends a zero (length grows by one); BACKWARD drops φ̂(0).
pub fn shift_series(series: &AnalyticSeries, direction: ShiftDirection) -> AnalyticSeries {
    let c = &series.coefficients;
    let coefficients = match direction {
        ShiftDirection::Forward => std::iter::once(C64::new(0.0, 0.0)).chain(c.iter().copied()).collect(),
        ShiftDirection::Backward if c.len() <= 1 => vec![C64::new(0.0, 0.0)],
        ShiftDirection::Backward => c[1..].to_vec(),
    };
    AnalyticSeries { coefficients, provenance: format!("{direction:?} [{}]", series.provenance) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    /// (z² - 1)^N
    A,
    /// (z - 1)^N
    B,
    /// (z² - 1)
    C,
}

impl Flavor {
    pub fn from_class(class: ClassTag) -> Result<Self> {
        match class {
            ClassTag::A => Ok(Flavor::A),
            ClassTag::B => Ok(Flavor::B),
            ClassTag::C => Ok(Flavor::C),
            ClassTag::Raw => Err(Error::InvalidInput("RAW has no series flavor".into())),
        }
    }

    /// Integer coefficients of the multiplying polynomial.
    pub fn polynomial(self, level: usize) -> Result<Vec<i128>> {
        let (step, power) = match self {
            Flavor::A => (2, level),
            Flavor::B => (1, level),
            Flavor::C => (2, 1),
        };
        let mut p = vec![0i128; step * power + 1];
        for k in 0..=power {
            let b = binomial(power as u64, k as u64)? as i128;
            let sign = if (power - k) % 2 == 0 { 1 } else { -1 };
            p[step * k] = sign * b;
        }
        Ok(p)
    }
}

/// First `a.len()` coefficients of p(z)·Σ a_n z^n; these involve only
/// the given a_n, so they are exact whenever the scalar type is.
pub fn multiply_truncated<T: Scalar>(poly: &[i128], a: &[T]) -> Vec<T> {
    (0..a.len())
        .map(|k| {
            let mut acc = T::zero();
            for (d, &c) in poly.iter().enumerate() {
                if c != 0 && d <= k {
                    acc = acc + T::from_int(c) * a[k - d].clone();
                }
            }
            acc
        })
        .collect()
}

pub fn symbol_series(symbol: &RadialSymbol, level: usize, flavor: Flavor, len: usize) -> Result<AnalyticSeries> {
    let a = symbol.sample(len)?;
    let poly = flavor.polynomial(level)?;
    AnalyticSeries::new(multiply_truncated(&poly, &a), format!("{flavor:?}{level} {}", symbol.label()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceRow {
    pub symbol: String,
    pub class: ClassTag,
    pub s1: Verdict,
    pub besov: Verdict,
    /// `None` when either verdict is UNDECIDED.
    pub agree: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceReport {
    pub level: usize,
    pub rows: Vec<ConcordanceRow>,
    pub agreements: usize,
    pub undecided: usize,
    pub contradictions: usize,
}

/// Compares the S₁ verdict of every class matrix with the Besov verdict
/// of the matching series at s = N.
pub fn peller_concordance(
    family: &[RadialSymbol],
    level: usize,
    sizes: &[usize],
    n_max: usize,
    grid: usize,
    policy: &S1Policy,
) -> Result<ConcordanceReport> {
    let mut rows = Vec::new();
    for symbol in family {
        for class in [ClassTag::A, ClassTag::B, ClassTag::C] {
            let m = class_membership(symbol, level, class, sizes, policy, Some(BesovCheck { n_max, grid }))?;
            let s1 = m.estimate.verdict;
            let besov = m.besov_crosscheck.unwrap_or(Verdict::Undecided);
            let agree = (s1.is_decided() && besov.is_decided()).then_some(s1 == besov);
            rows.push(ConcordanceRow { symbol: symbol.label(), class, s1, besov, agree });
        }
    }
    Ok(ConcordanceReport {
        level,
        agreements: rows.iter().filter(|r| r.agree == Some(true)).count(),
        undecided: rows.iter().filter(|r| r.agree.is_none()).count(),
        contradictions: rows.iter().filter(|r| r.agree == Some(false)).count(),
        rows,
    })
}

/// The symbol family used by the concordance runs at level N.
pub fn catalog_family(level: usize) -> Vec<RadialSymbol> {
    let a = level as f64 + 0.5;
    vec![
        RadialSymbol::geom(0.5),
        RadialSymbol::parity(),
        RadialSymbol::alt_power(a),
        RadialSymbol::i_power(a),
        RadialSymbol::power(0.5),
        RadialSymbol::partial_sum(level as u32),
        RadialSymbol::sphere(3),
        RadialSymbol::constant(1.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c64, Q};
    use crate::symbolkit::hoderiv;

    fn series(c: Vec<f64>) -> AnalyticSeries {
        AnalyticSeries::new(c.into_iter().map(c64).collect(), "test").unwrap()
    }

    fn monomial(m: usize, len: usize) -> AnalyticSeries {
        let mut c = vec![0.0; len];
        c[m] = 1.0;
        series(c)
    }

    #[test]
    fn block_definitions() {
        let b0 = dyadic_block(0);
        assert_eq!((b0.weight(0), b0.weight(1), b0.weight(2)), (1.0, 1.0, 0.0));
        let b1 = dyadic_block(1);
        assert_eq!([b1.weight(1), b1.weight(2), b1.weight(3), b1.weight(4)], [0.0, 1.0, 0.5, 0.0]);
        let b2 = dyadic_block(2);
        assert_eq!([b2.weight(4), b2.weight(3), b2.weight(6)], [1.0, 0.5, 0.5]);
        assert_eq!((b2.weight(2), b2.weight(8)), (0.0, 0.0));
    }

    #[test]
    fn partition_of_unity() {
        for k in 1..=1024usize {
            let total: f64 = (0..=11).map(|n| tent(n, k)).sum();
            assert!((total - 1.0).abs() < 1e-15, "k={k} total={total}");
        }
    }

    #[test]
    fn projection_of_monomials() {
        for n in 1..6 {
            let len = (1 << (n + 1)) + 1;
            let p = block_project(&monomial(1 << n, len), n).unwrap();
            assert_eq!(p.coefficients, monomial(1 << n, len).coefficients);
            let p = block_project(&monomial(1 << (n + 1), len), n).unwrap();
            assert!(p.coefficients.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn projection_of_geometric_slice() {
        let g = series((0..20).map(|k| 0.5f64.powi(k)).collect());
        let p = block_project(&g, 3).unwrap();
        assert_eq!(p.coefficients[4], c64(0.0));
        assert_eq!(p.coefficients[6], c64(0.5 * 0.5f64.powi(6)));
        assert_eq!(p.coefficients[8], c64(0.5f64.powi(8)));
        assert_eq!(p.coefficients[12], c64(0.5 * 0.5f64.powi(12)));
        assert_eq!(p.coefficients[16], c64(0.0));
    }

    #[test]
    fn projection_needs_coverage() {
        assert!(matches!(block_project(&monomial(0, 10), 3), Err(Error::TailUndefined { .. })));
    }

    #[test]
    fn circle_norms() {
        assert!((l1_circle_norm(&series(vec![1.0]), 64) - 1.0).abs() < 1e-15);
        assert!((l1_circle_norm(&monomial(37, 40), 256) - 1.0).abs() < 1e-14);
        let v = l1_circle_norm(&series(vec![1.0, 1.0]), 1 << 16);
        assert!((v - 4.0 / std::f64::consts::PI).abs() < 1e-6, "{v}");
        assert_eq!(l1_circle_norm(&series(vec![0.0, 0.0]), 16), 0.0);
    }

    #[test]
    fn circle_norm_matches_direct_sum() {
        let s = series(vec![0.3, -1.0, 0.25, 2.0, 0.0, -0.5]);
        let g = 64;
        let mut total = 0.0;
        for t in 0..g {
            let th = 2.0 * std::f64::consts::PI * t as f64 / g as f64;
            let z: C64 = s.coefficients.iter().enumerate().map(|(k, a)| a * C64::from_polar(1.0, th * k as f64)).sum();
            total += z.norm();
        }
        assert!((l1_circle_norm(&s, g) - total / g as f64).abs() < 1e-12);
    }

    #[test]
    fn zero_series_norm() {
        let r = besov_norm(&series(vec![0.0; 64]), 1.0, 5, 1024).unwrap();
        assert_eq!(r.partial, 0.0);
        assert_eq!(r.tail_flag, Verdict::Convergent);
    }

    #[test]
    fn alternating_power_besov_separation() {
        for level in 1..=2usize {
            let sym = RadialSymbol::alt_power(level as f64 + 0.5);
            let s = symbol_series(&sym, level, Flavor::B, 1025).unwrap();
            assert_eq!(besov_norm(&s, level as f64, 9, 1 << 14).unwrap().tail_flag, Verdict::Convergent);
            assert_eq!(besov_norm(&s, level as f64 + 2.0, 9, 1 << 14).unwrap().tail_flag, Verdict::Divergent);
        }
    }

    #[test]
    fn fractional_integration_examples() {
        let s = series(vec![1.0, 2.0, -3.0, 4.0]);
        assert_eq!(fractional_integration(&s, 0.0).coefficients, s.coefficients);
        let d = fractional_integration(&monomial(3, 5), 1.0);
        assert_eq!(d.coefficients[3], c64(0.25));
        let back = fractional_integration(&fractional_integration(&s, 0.7), -0.7);
        for (a, b) in back.coefficients.iter().zip(&s.coefficients) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn shifts() {
        let s = series(vec![1.0, 2.0, 3.0]);
        let round = shift_series(&shift_series(&s, ShiftDirection::Forward), ShiftDirection::Backward);
        assert_eq!(round.coefficients, s.coefficients);
        let z = shift_series(&series(vec![1.0]), ShiftDirection::Backward);
        assert!(z.coefficients.iter().all(|c| c.norm() == 0.0));
        let r = 0.5f64;
        let g = series((0..10).map(|k| r.powi(k)).collect());
        let b = shift_series(&g, ShiftDirection::Backward);
        for (n, c) in b.coefficients.iter().enumerate() {
            assert_eq!(*c, c64(r.powi(n as i32 + 1)));
        }
    }

    #[test]
    fn series_examples() {
        let p = symbol_series(&RadialSymbol::parity(), 3, Flavor::C, 40).unwrap();
        assert_eq!((p.coefficients[0], p.coefficients[1]), (c64(-1.0), c64(1.0)));
        assert!(p.coefficients[2..].iter().all(|z| z.norm() == 0.0));
        let one = symbol_series(&RadialSymbol::constant(1.0), 1, Flavor::B, 30).unwrap();
        assert_eq!(one.coefficients[0], c64(-1.0));
        assert!(one.coefficients[1..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn flavor_a_matches_derivative_in_rationals() {
        let a: Vec<Q> = (0..30i128).map(|n| Q::new((n * n * 7 + 3) % 23 - 11, 1 + n % 5)).collect();
        let poly = Flavor::A.polynomial(2).unwrap();
        let c = multiply_truncated(&poly, &a);
        for n in 4..30 {
            assert_eq!(c[n], hoderiv(&a, 2, 2, n - 4).unwrap());
        }
    }

    #[test]
    fn json_round_trip() {
        let s = AnalyticSeries::new(vec![C64::new(1.0, -2.0), C64::new(0.5, 0.0)], "x").unwrap();
        let back = AnalyticSeries::from_json(&s.to_json()).unwrap();
        assert_eq!(back.coefficients, s.coefficients);
    }

    #[test]
    fn block_csv() {
        let s = symbol_series(&RadialSymbol::geom(0.5), 1, Flavor::B, 64).unwrap();
        let r = besov_norm(&s, 1.0, 4, 256).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,scale,block_norm\n0,"));
        assert_eq!(text.lines().count(), 6);
    }
}
