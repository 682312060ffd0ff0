//! Radial symbols φ̇ : ℕ → ℂ, their discrete derivatives, limit
//! extraction at the two parities, and the small calculus identities
//! the criteria rely on.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::scalar::{binomial, c64, Scalar, C64};

/// Behaviour of a tabulated symbol past its last entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TailPolicy {
    Zero,
    Constant,
    #[default]
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolKind {
    /// r^n
    Geom { r: f64 },
    /// (-1)^n
    Parity,
    /// (-1)^n / (n+1)^{α+1}
    AltPower { alpha: f64 },
    /// i^n / (n+1)^{α+1}
    IPower { alpha: f64 },
    /// (n+1)^{-α}
    Power { alpha: f64 },
    /// Parity-split partial sums whose second-step derivative is (n+1)^{-N-1/2}.
    PartialSum { n: u32 },
    /// Indicator of n = radius.
    Sphere { n: usize },
    Table { values: Vec<C64>, tail: TailPolicy },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialSymbol {
    pub kind: SymbolKind,
    pub bound: Option<f64>,
}

impl RadialSymbol {
    pub fn new(kind: SymbolKind) -> Self {
        let bound = default_bound(&kind);
        RadialSymbol { kind, bound }
    }

    pub fn geom(r: f64) -> Self {
        Self::new(SymbolKind::Geom { r })
    }
    pub fn parity() -> Self {
        Self::new(SymbolKind::Parity)
    }
    pub fn alt_power(alpha: f64) -> Self {
        Self::new(SymbolKind::AltPower { alpha })
    }
    pub fn i_power(alpha: f64) -> Self {
        Self::new(SymbolKind::IPower { alpha })
    }
    pub fn power(alpha: f64) -> Self {
        Self::new(SymbolKind::Power { alpha })
    }
    pub fn partial_sum(n: u32) -> Self {
        Self::new(SymbolKind::PartialSum { n })
    }
    pub fn sphere(n: usize) -> Self {
        Self::new(SymbolKind::Sphere { n })
    }
    pub fn table(values: Vec<C64>, tail: TailPolicy) -> Self {
        // a table with a defined tail is fully known, so its sup is exact
        let bound = match tail {
            TailPolicy::Error => None,
            TailPolicy::Zero | TailPolicy::Constant => Some(values.iter().map(|z| z.norm()).fold(0.0, f64::max)),
        };
        RadialSymbol { kind: SymbolKind::Table { values, tail }, bound }
    }
    pub fn real_table(values: &[f64], tail: TailPolicy) -> Self {
        Self::table(values.iter().map(|&v| c64(v)).collect(), tail)
    }
    /// The constant symbol 1, expressed as a table with constant tail.
    pub fn constant(value: f64) -> Self {
        Self::real_table(&[value], TailPolicy::Constant)
    }

    pub fn with_bound(mut self, bound: Option<f64>) -> Self {
        self.bound = bound;
        self
    }

    /// Catalog identifier, e.g. `GEOM`.
    pub fn kind_id(&self) -> &'static str {
        match self.kind {
            SymbolKind::Geom { .. } => "GEOM",
            SymbolKind::Parity => "PARITY",
            SymbolKind::AltPower { .. } => "ALT_POWER",
            SymbolKind::IPower { .. } => "I_POWER",
            SymbolKind::Power { .. } => "POWER",
            SymbolKind::PartialSum { .. } => "PARTIAL_SUM",
            SymbolKind::Sphere { .. } => "SPHERE",
            SymbolKind::Table { .. } => "TABLE",
        }
    }

    /// Human-readable label with parameters.
    pub fn label(&self) -> String {
        match &self.kind {
            SymbolKind::Geom { r } => format!("GEOM(r={r})"),
            SymbolKind::Parity => "PARITY".into(),
            SymbolKind::AltPower { alpha } => format!("ALT_POWER(alpha={alpha})"),
            SymbolKind::IPower { alpha } => format!("I_POWER(alpha={alpha})"),
            SymbolKind::Power { alpha } => format!("POWER(alpha={alpha})"),
            SymbolKind::PartialSum { n } => format!("PARTIAL_SUM(N={n})"),
            SymbolKind::Sphere { n } => format!("SPHERE(n={n})"),
            SymbolKind::Table { values, tail } => {
                format!("TABLE(len={},tail={:?})", values.len(), tail)
            }
        }
    }

    /// True when every value is real, so monotonicity tests make sense.
    pub fn is_real(&self) -> bool {
        match &self.kind {
            SymbolKind::IPower { .. } => false,
            SymbolKind::Table { values, .. } => values.iter().all(|v| v.im == 0.0),
            _ => true,
        }
    }

    /// Number of values available, `None` when defined on all of ℕ.
    pub fn available(&self) -> Option<usize> {
        match &self.kind {
            SymbolKind::Table { values, tail: TailPolicy::Error } => Some(values.len()),
            _ => None,
        }
    }

    /// φ̇(n).
    pub fn eval(&self, n: usize) -> Result<C64> {
        let v = self.eval_raw(n)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite(n));
        }
        if let Some(b) = self.bound {
            if v.norm() > b * (1.0 + 1e-12) {
                return Err(Error::BoundViolated { index: n, bound: b });
            }
        }
        Ok(v)
    }

    fn eval_raw(&self, n: usize) -> Result<C64> {
        let nf = n as f64;
        Ok(match &self.kind {
            SymbolKind::Geom { r } => c64(r.powi(n as i32)),
            SymbolKind::Parity => c64(sign(n)),
            SymbolKind::AltPower { alpha } => c64(sign(n) * (nf + 1.0).powf(-alpha - 1.0)),
            SymbolKind::IPower { alpha } => i_pow(n) * (nf + 1.0).powf(-alpha - 1.0),
            SymbolKind::Power { alpha } => c64((nf + 1.0).powf(-alpha)),
            SymbolKind::PartialSum { n: big_n } => {
                let s = *big_n as f64 + 0.5;
                let k = n / 2;
                let total: f64 = if n % 2 == 0 {
                    (0..k).map(|j| (2 * j + 1) as f64).map(|b| b.powf(-s)).sum()
                } else {
                    (1..=k).map(|j| (2 * j) as f64).map(|b| b.powf(-s)).sum()
                };
                c64(-total)
            }
            SymbolKind::Sphere { n: radius } => c64(if n == *radius { 1.0 } else { 0.0 }),
            SymbolKind::Table { values, tail } => match values.get(n) {
                Some(v) => *v,
                None => match tail {
                    TailPolicy::Zero => C64::new(0.0, 0.0),
                    TailPolicy::Constant => match values.last() {
                        Some(v) => *v,
                        None => return Err(Error::TailUndefined { index: n, len: 0 }),
                    },
                    TailPolicy::Error => {
                        return Err(Error::TailUndefined { index: n, len: values.len() })
                    }
                },
            },
        })
    }

    /// φ̇(0), …, φ̇(len-1).
    pub fn sample(&self, len: usize) -> Result<Vec<C64>> {
        match self.kind {
            SymbolKind::PartialSum { n: big_n } => {
                // cumulative form of the parity-split sums
                let s = big_n as f64 + 0.5;
                let mut out = Vec::with_capacity(len);
                let (mut even, mut odd) = (0.0f64, 0.0f64);
                for n in 0..len {
                    if n % 2 == 0 {
                        if n >= 2 {
                            even += ((n - 1) as f64).powf(-s);
                        }
                        out.push(c64(-even));
                    } else {
                        if n >= 3 {
                            odd += ((n - 1) as f64).powf(-s);
                        }
                        out.push(c64(-odd));
                    }
                }
                Ok(out)
            }
            _ => (0..len).map(|n| self.eval(n)).collect(),
        }
    }
}

fn sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn i_pow(n: usize) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

fn default_bound(kind: &SymbolKind) -> Option<f64> {
    match kind {
        SymbolKind::Geom { r } if r.abs() <= 1.0 => Some(1.0),
        SymbolKind::Geom { .. } => None,
        SymbolKind::Parity | SymbolKind::Sphere { .. } => Some(1.0),
        SymbolKind::AltPower { alpha } | SymbolKind::IPower { alpha } if *alpha >= -1.0 => {
            Some(1.0)
        }
        SymbolKind::Power { alpha } if *alpha >= 0.0 => Some(1.0),
        // |φ̇| ≤ Σ_{j≥1} j^{-3/2} < 2.62 for N ≥ 1
        SymbolKind::PartialSum { n } if *n >= 1 => Some(2.62),
        _ => None,
    }
}

#[derive(Serialize, Deserialize)]
struct SymbolJson {
    kind: String,
    #[serde(default)]
    params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bound: Option<f64>,
}

fn param_f64(params: &Map<String, Value>, names: &[&str]) -> Result<f64> {
    for name in names {
        if let Some(v) = params.get(*name) {
            return v
                .as_f64()
                .ok_or_else(|| Error::InvalidInput(format!("parameter {name} must be a number")));
        }
    }
    Err(Error::InvalidInput(format!("missing parameter {}", names[0])))
}

fn parse_complex(v: &Value) -> Result<C64> {
    if let Some(x) = v.as_f64() {
        return Ok(c64(x));
    }
    if let Some(arr) = v.as_array() {
        if arr.len() == 2 {
            if let (Some(re), Some(im)) = (arr[0].as_f64(), arr[1].as_f64()) {
                return Ok(C64::new(re, im));
            }
        }
    }
    Err(Error::InvalidInput(format!("table value {v} is neither a number nor [re, im]")))
}

impl RadialSymbol {
    /// Builds a catalog symbol from an id and named numeric parameters.
    pub fn from_id(kind: &str, params: &Map<String, Value>) -> Result<Self> {
        let k = match kind.to_ascii_uppercase().as_str() {
            "GEOM" => SymbolKind::Geom { r: param_f64(params, &["r"])? },
            "PARITY" => SymbolKind::Parity,
            "ALT_POWER" => SymbolKind::AltPower { alpha: param_f64(params, &["alpha", "α"])? },
            "I_POWER" => SymbolKind::IPower { alpha: param_f64(params, &["alpha", "α"])? },
            "POWER" => SymbolKind::Power { alpha: param_f64(params, &["alpha", "α"])? },
            "PARTIAL_SUM" => {
                let n = param_f64(params, &["N", "n"])?;
                if n < 0.0 || n.fract() != 0.0 {
                    return Err(Error::InvalidInput("PARTIAL_SUM needs a natural N".into()));
                }
                SymbolKind::PartialSum { n: n as u32 }
            }
            "SPHERE" => {
                let n = param_f64(params, &["n", "N"])?;
                if n < 0.0 || n.fract() != 0.0 {
                    return Err(Error::InvalidInput("SPHERE needs a natural n".into()));
                }
                SymbolKind::Sphere { n: n as usize }
            }
            "TABLE" => {
                let values = params
                    .get("values")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::InvalidInput("TABLE needs `values`".into()))?
                    .iter()
                    .map(parse_complex)
                    .collect::<Result<Vec<_>>>()?;
                let tail = match params.get("tail") {
                    None => TailPolicy::Error,
                    Some(v) => serde_json::from_value(v.clone())?,
                };
                SymbolKind::Table { values, tail }
            }
            other => return Err(Error::InvalidInput(format!("unknown symbol kind `{other}`"))),
        };
        Ok(RadialSymbol::new(k))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SymbolJson = serde_json::from_str(text)?;
        let mut s = Self::from_id(&raw.kind, &raw.params)?;
        if raw.bound.is_some() {
            s.bound = raw.bound;
        }
        Ok(s)
    }

    pub fn to_json_value(&self) -> Value {
        let mut params = Map::new();
        match &self.kind {
            SymbolKind::Geom { r } => {
                params.insert("r".into(), (*r).into());
            }
            SymbolKind::Parity => {}
            SymbolKind::AltPower { alpha }
            | SymbolKind::IPower { alpha }
            | SymbolKind::Power { alpha } => {
                params.insert("alpha".into(), (*alpha).into());
            }
            SymbolKind::PartialSum { n } => {
                params.insert("N".into(), (*n).into());
            }
            SymbolKind::Sphere { n } => {
                params.insert("n".into(), (*n).into());
            }
            SymbolKind::Table { values, tail } => {
                let vals: Vec<Value> =
                    values.iter().map(|v| Value::from(vec![v.re, v.im])).collect();
                params.insert("values".into(), vals.into());
                params.insert("tail".into(), serde_json::to_value(tail).unwrap());
            }
        }
        let raw = SymbolJson { kind: self.kind_id().into(), params, bound: self.bound };
        serde_json::to_value(raw).unwrap()
    }
}

/// Step j ∈ {1, 2} and order m of a discrete derivative 𝔡_j^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeSpec {
    pub step: usize,
    pub order: usize,
}

impl DerivativeSpec {
    pub fn new(step: usize, order: usize) -> Result<Self> {
        if step != 1 && step != 2 {
            return Err(Error::InvalidInput(format!("derivative step must be 1 or 2, got {step}")));
        }
        Ok(DerivativeSpec { step, order })
    }

    /// How far past n the derivative reads: j·m.
    pub fn reach(&self) -> usize {
        self.step * self.order
    }
}

/// Closed form Σ_{k=0}^{m} binom(m,k)(-1)^k a(n + j k).
pub fn hoderiv<T: Scalar>(a: &[T], step: usize, order: usize, n: usize) -> Result<T> {
    let need = n + step * order;
    if need >= a.len() {
        return Err(Error::TailUndefined { index: need, len: a.len() });
    }
    let mut acc = T::zero();
    for k in 0..=order {
        let b = binomial(order as u64, k as u64)? as i128;
        let term = T::from_int(b) * a[n + step * k].clone();
        acc = if k % 2 == 0 { acc + term } else { acc - term };
    }
    Ok(acc)
}

/// 𝔡_j^m a by m passes of the order-one difference; the output is
/// shorter than the input by j·m.
pub fn iterated_derivative<T: Scalar>(a: &[T], step: usize, order: usize) -> Vec<T> {
    let mut cur = a.to_vec();
    for _ in 0..order {
        if cur.len() <= step {
            return Vec::new();
        }
        cur = (0..cur.len() - step).map(|n| cur[n].clone() - cur[n + step].clone()).collect();
    }
    cur
}

/// 𝔡_j^m φ̇(n) via the binomial closed form.
pub fn discrete_derivative(symbol: &RadialSymbol, spec: DerivativeSpec, n: usize) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..=spec.order {
        let b = binomial(spec.order as u64, k as u64)? as f64;
        let v = symbol.eval(n + spec.step * k)?;
        if k % 2 == 0 {
            acc += v * b;
        } else {
            acc -= v * b;
        }
    }
    Ok(acc)
}

/// The sequence 𝔡_j^m φ̇(n) for n < len.
pub fn derivative_sequence(symbol: &RadialSymbol, spec: DerivativeSpec, len: usize) -> Result<Vec<C64>> {
    let raw = symbol.sample(len + spec.reach())?;
    Ok(iterated_derivative(&raw, spec.step, spec.order))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub even_limit: Option<C64>,
    pub odd_limit: Option<C64>,
    pub c_plus: C64,
    pub c_minus: C64,
    /// Number of samples inspected per parity subsequence.
    pub window: usize,
    pub tolerance: f64,
    pub converged: (bool, bool),
}

impl LimitReport {
    pub fn both_determined(&self) -> bool {
        self.converged.0 && self.converged.1
    }
}

/// Cauchy-tail detection of lim φ̇(2n) and lim φ̇(2n+1).
///
/// Each parity subsequence is sampled at `window` points; it is declared
/// convergent when its last ⌈window/4⌉ successive differences are below
/// `tol`, and the final sample is reported as the limit.
pub fn limits_report(symbol: &RadialSymbol, window: usize, tol: f64) -> Result<LimitReport> {
    if window < 8 {
        return Err(Error::InvalidInput(format!("limit window must be at least 8, got {window}")));
    }
    let values = symbol.sample(2 * window)?;
    let even: Vec<C64> = values.iter().step_by(2).copied().collect();
    let odd: Vec<C64> = values.iter().skip(1).step_by(2).copied().collect();
    let tail = window.div_ceil(4);
    let settled = |seq: &[C64]| {
        seq.windows(2).rev().take(tail).all(|w| (w[1] - w[0]).norm() < tol)
    };
    let (ce, co) = (settled(&even), settled(&odd));
    let (le, lo) = (*even.last().unwrap(), *odd.last().unwrap());
    Ok(LimitReport {
        even_limit: ce.then_some(le),
        odd_limit: co.then_some(lo),
        c_plus: (le + lo) * 0.5,
        c_minus: (le - lo) * 0.5,
        window,
        tolerance: tol,
        converged: (ce, co),
    })
}

/// Checks the weighted Leibniz identity
/// (n+1)𝔡₁^m a(n) = Σ_k binom(m,k)(-1)^k (n+k+1) a(n+k) + m 𝔡₁^{m-1} a(n+1).
pub fn weighted_leibniz_check<T: Scalar>(a: &[T], n: usize, m: usize) -> Result<bool> {
    if n + m + 1 > a.len() {
        return Err(Error::TailUndefined { index: n + m, len: a.len() });
    }
    let lhs = T::from_int(n as i128 + 1) * hoderiv(a, 1, m, n)?;
    let mut weighted = T::zero();
    for k in 0..=m {
        let b = binomial(m as u64, k as u64)? as i128;
        let term = T::from_int(b * (n + k + 1) as i128) * a[n + k].clone();
        weighted = if k % 2 == 0 { weighted + term } else { weighted - term };
    }
    let rhs = if m == 0 {
        weighted
    } else {
        let needed = n + 1 + (m - 1);
        if needed >= a.len() {
            return Err(Error::TailUndefined { index: needed, len: a.len() });
        }
        weighted + T::from_int(m as i128) * hoderiv(a, 1, m - 1, n + 1)?
    };
    Ok(lhs.close_to(&rhs, 1e-12))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRatio {
    pub c1: f64,
    pub c2: f64,
    pub verdict: bool,
}

/// Default bound on sup/inf accepted by [`asymptotic_ratio_check`].
pub const DEFAULT_RATIO_LIMIT: f64 = 4.0;

/// inf and sup over `window` of |𝔡₁^m a(n)|·(n+1)^α.
pub fn asymptotic_ratio_check(a: &[C64], alpha: f64, m: usize, window: Range<usize>) -> Result<AsymptoticRatio> {
    asymptotic_ratio_check_with(a, alpha, m, window, DEFAULT_RATIO_LIMIT)
}

pub fn asymptotic_ratio_check_with(
    a: &[C64],
    alpha: f64,
    m: usize,
    window: Range<usize>,
    ratio_limit: f64,
) -> Result<AsymptoticRatio> {
    if window.is_empty() {
        return Err(Error::InvalidInput("empty window".into()));
    }
    if window.end + m > a.len() {
        return Err(Error::TailUndefined { index: window.end + m - 1, len: a.len() });
    }
    let d = iterated_derivative(a, 1, m);
    let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
    for n in window {
        let v = d[n].norm() * (n as f64 + 1.0).powf(alpha);
        c1 = c1.min(v);
        c2 = c2.max(v);
    }
    let verdict = c1 > 0.0 && c2.is_finite() && c2 / c1 <= ratio_limit;
    Ok(AsymptoticRatio { c1, c2, verdict })
}

/// Smooth functions with closed-form derivatives of every order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothFunction {
    /// f(t) = (t+1)^{-β}
    ShiftedPower { beta: f64 },
}

impl SmoothFunction {
    pub fn from_id(id: &str, beta: f64) -> Result<Self> {
        match id.to_ascii_uppercase().as_str() {
            "SHIFTED_POWER" | "POWER" => Ok(SmoothFunction::ShiftedPower { beta }),
            other => Err(Error::UnsupportedFunction(other.into())),
        }
    }

    /// The smooth interpolant of a catalog symbol, when one exists.
    pub fn from_symbol(symbol: &RadialSymbol) -> Result<Self> {
        match symbol.kind {
            SymbolKind::Power { alpha } => Ok(SmoothFunction::ShiftedPower { beta: alpha }),
            _ => Err(Error::UnsupportedFunction(symbol.label())),
        }
    }

    /// f^{(m)}(t).
    pub fn derivative(&self, m: usize, t: f64) -> f64 {
        match *self {
            SmoothFunction::ShiftedPower { beta } => {
                let coef: f64 = (0..m).map(|i| -beta - i as f64).product();
                coef * (t + 1.0).powf(-beta - m as f64)
            }
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; points];
    let mut weights = vec![0.0; points];
    let n = points as f64;
    for i in 0..points.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut pp = 1.0;
        for _ in 0..100 {
            // three-term recurrence for P_n(z) and P_{n-1}(z)
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=points {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / pp;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[points - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[points - 1 - i] = w;
    }
    (nodes, weights)
}

/// (-1)^m ∫_{[0,2]^m} f^{(m)}(n + t₁ + ⋯ + t_m) dt by tensor Gauss–Legendre.
pub fn integral_derivative_oracle(f: SmoothFunction, m: usize, n: usize, quad_points: usize) -> Result<C64> {
    if m == 0 {
        return Ok(c64(f.derivative(0, n as f64)));
    }
    if quad_points == 0 {
        return Err(Error::InvalidInput("quadrature needs at least one point".into()));
    }
    let (x, w) = gauss_legendre(quad_points);
    // map [-1, 1] to [0, 2]: t = x + 1, dt = dx
    let total = (quad_points as u64)
        .checked_pow(m as u32)
        .filter(|&c| c <= 50_000_000)
        .ok_or_else(|| Error::InvalidInput("quadrature grid too large".into()))?;
    let mut idx = vec![0usize; m];
    let mut acc = 0.0;
    for _ in 0..total {
        let mut t = n as f64;
        let mut weight = 1.0;
        for &i in &idx {
            t += x[i] + 1.0;
            weight *= w[i];
        }
        acc += weight * f.derivative(m, t);
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < quad_points {
                break;
            }
            *slot = 0;
        }
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    Ok(c64(sign * acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    #[test]
    fn catalog_values() {
        assert_eq!(RadialSymbol::geom(0.5).eval(3).unwrap(), c64(0.125));
        assert_eq!(RadialSymbol::parity().eval(7).unwrap(), c64(-1.0));
        assert_eq!(RadialSymbol::alt_power(1.0).eval(1).unwrap(), c64(-0.25));
        assert_eq!(RadialSymbol::i_power(0.0).eval(1).unwrap(), C64::new(0.0, 0.5));
        assert_eq!(RadialSymbol::sphere(2).eval(2).unwrap(), c64(1.0));
        assert_eq!(RadialSymbol::sphere(2).eval(3).unwrap(), c64(0.0));
    }

    #[test]
    fn table_tail_policies() {
        let t = RadialSymbol::real_table(&[1.0, 2.0], TailPolicy::Error);
        assert_eq!(t.eval(5), Err(Error::TailUndefined { index: 5, len: 2 }));
        let t = RadialSymbol::real_table(&[1.0, 2.0], TailPolicy::Zero);
        assert_eq!(t.eval(5).unwrap(), c64(0.0));
        let t = RadialSymbol::real_table(&[1.0, 2.0], TailPolicy::Constant);
        assert_eq!(t.eval(5).unwrap(), c64(2.0));
    }

    #[test]
    fn partial_sum_sample_matches_eval() {
        let s = RadialSymbol::partial_sum(2);
        let fast = s.sample(40).unwrap();
        for (n, v) in fast.iter().enumerate() {
            assert!((v - s.eval(n).unwrap()).norm() < 1e-14);
        }
        // second-step derivative is (n+1)^{-N-1/2}
        let d = derivative_sequence(&s, DerivativeSpec::new(2, 1).unwrap(), 30).unwrap();
        for (n, v) in d.iter().enumerate() {
            assert!((v.re - (n as f64 + 1.0).powf(-2.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_examples() {
        let geom = RadialSymbol::geom(0.5);
        let v = discrete_derivative(&geom, DerivativeSpec::new(1, 2).unwrap(), 0).unwrap();
        assert!((v.re - 0.25).abs() < 1e-15);
        let par = RadialSymbol::parity();
        for n in 0..10 {
            let v = discrete_derivative(&par, DerivativeSpec::new(2, 1).unwrap(), n).unwrap();
            assert_eq!(v, c64(0.0));
        }
        let delta = RadialSymbol::real_table(&[1.0, 0.0, 0.0, 0.0], TailPolicy::Error);
        let v = discrete_derivative(&delta, DerivativeSpec::new(1, 2).unwrap(), 0).unwrap();
        assert_eq!(v, c64(1.0));
    }

    #[test]
    fn derivative_needs_covering_table() {
        let t = RadialSymbol::real_table(&[1.0, 2.0, 3.0], TailPolicy::Error);
        let spec = DerivativeSpec::new(2, 1).unwrap();
        assert!(discrete_derivative(&t, spec, 0).is_ok());
        assert!(matches!(discrete_derivative(&t, spec, 1), Err(Error::TailUndefined { .. })));
    }

    #[test]
    fn invalid_step_rejected() {
        assert!(DerivativeSpec::new(3, 1).is_err());
    }

    #[test]
    fn parity_limits() {
        let r = limits_report(&RadialSymbol::parity(), 16, 1e-9).unwrap();
        assert_eq!(r.even_limit, Some(c64(1.0)));
        assert_eq!(r.odd_limit, Some(c64(-1.0)));
        assert_eq!(r.c_plus, c64(0.0));
        assert_eq!(r.c_minus, c64(1.0));
    }

    #[test]
    fn geom_limits_vanish() {
        let r = limits_report(&RadialSymbol::geom(0.5), 64, 1e-9).unwrap();
        assert!(r.both_determined());
        assert!(r.c_plus.norm() < 1e-12 && r.c_minus.norm() < 1e-12);
    }

    #[test]
    fn slowly_varying_limit_is_undetermined() {
        // (n+1)^{-0.1} still moves by more than 1e-6 per step at n ~ 100
        let r = limits_report(&RadialSymbol::power(0.1), 50, 1e-6).unwrap();
        assert_eq!(r.converged, (false, false));
        assert!(r.even_limit.is_none());
    }

    #[test]
    fn leibniz_examples() {
        let ones = vec![Q::from_integer(1); 10];
        for m in 1..5 {
            assert!(weighted_leibniz_check(&ones, 2, m).unwrap());
        }
        let lin: Vec<Q> = (0..5).map(Q::from_integer).collect();
        assert!(weighted_leibniz_check(&lin, 0, 1).unwrap());
    }

    #[test]
    fn ratio_examples() {
        let a: Vec<C64> = (0..300).map(|n| c64(sign(n) / (n as f64 + 1.0))).collect();
        let r = asymptotic_ratio_check(&a, 1.0, 0, 0..100).unwrap();
        assert!((r.c1 - 1.0).abs() < 1e-12 && (r.c2 - 1.0).abs() < 1e-12 && r.verdict);

        let a: Vec<C64> = (0..300).map(|n| c64(sign(n) / (n as f64 + 1.0).powi(2))).collect();
        assert!(asymptotic_ratio_check(&a, 2.0, 1, 10..200).unwrap().verdict);

        let a: Vec<C64> = (0..300).map(|n| c64(1.0 / (n as f64 + 1.0))).collect();
        assert!(!asymptotic_ratio_check(&a, 1.0, 1, 10..200).unwrap().verdict);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let sum_w: f64 = w.iter().sum();
        assert!((sum_w - 2.0).abs() < 1e-14);
        let x8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((x8 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn integral_oracle_examples() {
        let f = SmoothFunction::ShiftedPower { beta: 1.0 };
        let v = integral_derivative_oracle(f, 1, 0, 20).unwrap();
        assert!((v.re - 2.0 / 3.0).abs() < 1e-12);
        let v0 = integral_derivative_oracle(f, 0, 4, 20).unwrap();
        assert!((v0.re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn unsupported_function() {
        assert!(matches!(
            SmoothFunction::from_id("GEOM", 1.0),
            Err(Error::UnsupportedFunction(_))
        ));
        assert!(SmoothFunction::from_symbol(&RadialSymbol::parity()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"kind":"ALT_POWER","params":{"alpha":2.5}}"#;
        let s = RadialSymbol::from_json(text).unwrap();
        assert_eq!(s, RadialSymbol::alt_power(2.5));
        let back = RadialSymbol::from_json(&s.to_json_value().to_string()).unwrap();
        assert_eq!(back, s);
        let t = r#"{"kind":"TABLE","params":{"values":[1,[0,2]],"tail":"ZERO"}}"#;
        let s = RadialSymbol::from_json(t).unwrap();
        assert_eq!(s.eval(1).unwrap(), C64::new(0.0, 2.0));
        assert_eq!(s.eval(9).unwrap(), c64(0.0));
    }
}
