//! Generalized Hankel and lattice-indexed matrices with truncated trace
//! norms and a convergence verdict. Matrix transforms (folding, even
//! subsampling, τ-transform) and Bonsall tests live in submodules.

pub mod bonsall;
pub mod export;
pub mod lattice;
pub mod shift;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{principal, singular_values, trace_norm, CMat};
use crate::scalar::{binomial, shell_size, C64};
use crate::symbolkit::{derivative_sequence, DerivativeSpec, RadialSymbol};
use crate::verdict::{dyadic_sums, TailPolicy, Verdict};

pub use bonsall::{bonsall_test, BonsallMode, BonsallReport};
pub use lattice::{
    build_multiradial_box, build_multiradial_t, even_subsample, fold_unfold, lattice_points,
    FoldDirection, MultiSymbol,
};
pub use shift::{shift_power, smoothed_shift, tau_transform, trace_product};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WeightScheme {
    /// binom(N+i-1, N-1)^{1/2} binom(N+j-1, N-1)^{1/2}
    BinomHalf { n: usize },
    /// (1+i)^α (1+j)^β
    PowerSplit { alpha: f64, beta: f64 },
    /// (1+i+j)^s
    PowerSum { s: f64 },
}

impl WeightScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightScheme::BinomHalf { n } if n == 0 => {
                Err(Error::InvalidInput("BINOM_HALF needs N ≥ 1".into()))
            }
            WeightScheme::PowerSplit { alpha, beta } if alpha <= -0.5 || beta <= -0.5 => {
                Err(Error::InvalidInput("POWER_SPLIT needs α, β > -1/2".into()))
            }
            _ => Ok(()),
        }
    }

    /// Weight matrix entries w(i, j) for i, j < size.
    pub fn table(&self, size: usize) -> Result<CMat> {
        self.validate()?;
        Ok(match *self {
            WeightScheme::BinomHalf { n } => {
                let w = binom_half_weights(n, size)?;
                CMat::from_fn(size, size, |i, j| C64::new(w[i] * w[j], 0.0))
            }
            WeightScheme::PowerSplit { alpha, beta } => CMat::from_fn(size, size, |i, j| {
                C64::new((1.0 + i as f64).powf(alpha) * (1.0 + j as f64).powf(beta), 0.0)
            }),
            WeightScheme::PowerSum { s } => {
                CMat::from_fn(size, size, |i, j| C64::new((1.0 + (i + j) as f64).powf(s), 0.0))
            }
        })
    }

    /// Diagonal weight w(i, i).
    pub fn diagonal(&self, i: usize) -> Result<f64> {
        Ok(match *self {
            WeightScheme::BinomHalf { n } => shell_size(n, i)? as f64,
            WeightScheme::PowerSplit { alpha, beta } => (1.0 + i as f64).powf(alpha + beta),
            WeightScheme::PowerSum { s } => (1.0 + 2.0 * i as f64).powf(s),
        })
    }
}

/// binom(N+i-1, N-1)^{1/2} for i < size, from exact integers.
pub fn binom_half_weights(n: usize, size: usize) -> Result<Vec<f64>> {
    (0..size).map(|i| shell_size(n, i).map(|b| (b as f64).sqrt())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    A,
    B,
    C,
    Raw,
}

impl ClassTag {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(ClassTag::A),
            "B" => Ok(ClassTag::B),
            "C" => Ok(ClassTag::C),
            "RAW" => Ok(ClassTag::Raw),
            other => Err(Error::InvalidInput(format!("unknown class `{other}`"))),
        }
    }

    /// The derivative a class matrix at level N is built from.
    pub fn derivative(self, level: usize) -> Result<DerivativeSpec> {
        match self {
            ClassTag::A => DerivativeSpec::new(2, level),
            ClassTag::B => DerivativeSpec::new(1, level),
            ClassTag::C => DerivativeSpec::new(2, 1),
            ClassTag::Raw => DerivativeSpec::new(1, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HankelSpec {
    pub symbol: RadialSymbol,
    pub derivative: DerivativeSpec,
    pub weight: WeightScheme,
    pub class_tag: ClassTag,
}

impl HankelSpec {
    /// Class matrix at level N with the POWER_SUM(N-1) weights.
    pub fn class(symbol: RadialSymbol, level: usize, tag: ClassTag) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidInput("class level N must be ≥ 1".into()));
        }
        Ok(HankelSpec {
            symbol,
            derivative: tag.derivative(level)?,
            weight: WeightScheme::PowerSum { s: level as f64 - 1.0 },
            class_tag: tag,
        })
    }

    /// Class matrix at level N with the binomial weights used by the norm sandwiches.
    pub fn binomial_class(symbol: RadialSymbol, level: usize, tag: ClassTag) -> Result<Self> {
        let mut spec = Self::class(symbol, level, tag)?;
        spec.weight = WeightScheme::BinomHalf { n: level };
        Ok(spec)
    }

    pub fn raw(symbol: RadialSymbol, derivative: DerivativeSpec, weight: WeightScheme) -> Self {
        HankelSpec { symbol, derivative, weight, class_tag: ClassTag::Raw }
    }

    pub fn provenance(&self) -> String {
        format!(
            "hankel class={:?} symbol={} d{}^{} weight={:?}",
            self.class_tag,
            self.symbol.label(),
            self.derivative.step,
            self.derivative.order,
            self.weight
        )
    }

    /// Largest diagonal length computable from the symbol, capped at `cap`.
    fn diagonal_capacity(&self, cap: usize) -> usize {
        match self.symbol.available() {
            None => cap,
            Some(len) => {
                let usable = len.saturating_sub(self.derivative.reach());
                (usable.div_ceil(2)).min(cap)
            }
        }
    }

    /// |w(i,i)·a(2i)| for i < len, the diagonal moduli of the infinite matrix.
    pub fn diagonal_moduli(&self, len: usize) -> Result<Vec<f64>> {
        if len == 0 {
            return Ok(Vec::new());
        }
        let a = derivative_sequence(&self.symbol, self.derivative, 2 * len - 1)?;
        (0..len).map(|i| Ok(self.weight.diagonal(i)? * a[2 * i].norm())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IndexKind {
    /// Indices 0..K.
    Linear,
    /// Points of ℕ^dim with |m| ≤ cutoff in graded lexicographic order.
    Lattice { dim: usize, cutoff: usize, points: Vec<Vec<usize>> },
    /// The box [0, side)^dim in row-major order.
    Box { dim: usize, side: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMatrix {
    pub entries: CMat,
    pub index: IndexKind,
    pub provenance: String,
}

impl TruncatedMatrix {
    pub fn linear(entries: CMat, provenance: impl Into<String>) -> Self {
        TruncatedMatrix { entries, index: IndexKind::Linear, provenance: provenance.into() }
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn lattice_dim(&self) -> usize {
        match &self.index {
            IndexKind::Linear => 1,
            IndexKind::Lattice { dim, .. } | IndexKind::Box { dim, .. } => *dim,
        }
    }

    pub fn trace_norm(&self) -> f64 {
        trace_norm(&self.entries)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.entries)
    }
}

/// K×K section with entry(i, j) = w(i, j)·(𝔡_j^m φ̇)(i + j).
pub fn build_hankel(spec: &HankelSpec, k: usize) -> Result<TruncatedMatrix> {
    if k == 0 {
        return Ok(TruncatedMatrix::linear(CMat::zeros(0, 0), spec.provenance()));
    }
    let a = derivative_sequence(&spec.symbol, spec.derivative, 2 * k - 1)?;
    let w = spec.weight.table(k)?;
    let m = CMat::from_fn(k, k, |i, j| w[(i, j)] * a[i + j]);
    Ok(TruncatedMatrix::linear(m, spec.provenance()))
}

/// Numerical policy turning trace norms of nested sections into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S1Policy {
    /// Cauchy tolerance on the last increment.
    pub tol: f64,
    /// DIVERGENT when the last value exceeds this multiple of the first with growing increments.
    pub growth_factor: f64,
    /// Ratio thresholds applied to successive increments.
    pub tail: TailPolicy,
    /// Length of the cheap diagonal scan; 0 disables the diagonal certificate.
    pub diagonal_len: usize,
    /// Slack allowed when asserting monotonicity of nested sections.
    pub monotone_slack: f64,
}

impl Default for S1Policy {
    fn default() -> Self {
        S1Policy {
            tol: 1e-6,
            growth_factor: 10.0,
            tail: TailPolicy::default(),
            diagonal_len: 1 << 14,
            monotone_slack: 1e-9,
        }
    }
}

impl S1Policy {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S1Estimate {
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
    pub increments: Vec<f64>,
    pub cauchy_gap: f64,
    pub verdict: Verdict,
    pub extrapolated: Option<f64>,
    /// Which rule produced the verdict.
    pub reason: String,
    /// Verdict of the diagonal scan, when it ran.
    pub diagonal: Option<Verdict>,
    /// Whether values were nondecreasing within the policy slack.
    pub monotone: bool,
    pub provenance: String,
}

/// Dense trace norms of nested sections plus the verdict protocol.
pub fn s1_estimate(spec: &HankelSpec, sizes: &[usize], policy: &S1Policy) -> Result<S1Estimate> {
    validate_sizes(sizes)?;
    let largest = build_hankel(spec, *sizes.last().unwrap())?;
    let diag_len = spec.diagonal_capacity(policy.diagonal_len);
    let diagonal = if policy.diagonal_len > 0 && diag_len >= 8 {
        Some(spec.diagonal_moduli(diag_len)?)
    } else {
        None
    };
    let values: Vec<f64> =
        sizes.iter().map(|&k| trace_norm(&principal(&largest.entries, k))).collect();
    Ok(assess(sizes, values, diagonal.as_deref(), policy, spec.provenance()))
}

/// Same protocol for an arbitrary builder of nested sections.
pub fn s1_estimate_with<F>(builder: F, sizes: &[usize], policy: &S1Policy, provenance: &str) -> Result<S1Estimate>
where
    F: Fn(usize) -> Result<CMat>,
{
    validate_sizes(sizes)?;
    let values = sizes.iter().map(|&k| builder(k).map(|m| trace_norm(&m))).collect::<Result<Vec<_>>>()?;
    Ok(assess(sizes, values, None, policy, provenance.to_string()))
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(Error::InvalidInput("sizes must be strictly increasing, positive, ≥ 2 entries".into()));
    }
    Ok(())
}

/// Applies the verdict rules to the section norms.
pub fn assess(sizes: &[usize], values: Vec<f64>, diagonal: Option<&[f64]>, policy: &S1Policy, provenance: String) -> S1Estimate {
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = increments.iter().all(|&d| d >= -policy.monotone_slack * (1.0 + values[0].abs()));
    let abs_inc: Vec<f64> = increments.iter().map(|d| d.abs()).collect();
    let cauchy_gap = *abs_inc.last().unwrap();
    let diagonal_verdict = diagonal.map(|d| policy.tail.classify(&dyadic_sums(d)));

    let nonincreasing_tail = abs_inc.len() < 2
        || abs_inc[abs_inc.len() - 1] <= abs_inc[abs_inc.len() - 2] + policy.tol * 1e-3;
    let increasing = abs_inc.windows(2).all(|w| w[1] >= w[0]);
    let tail = policy.tail.classify(&abs_inc);
    let (first, last) = (values[0], *values.last().unwrap());

    let (verdict, reason, extrapolated) = if diagonal_verdict == Some(Verdict::Divergent) {
        (Verdict::Divergent, "diagonal moduli not summable".to_string(), None)
    } else if cauchy_gap < policy.tol && nonincreasing_tail {
        (Verdict::Convergent, "last increment below tolerance".to_string(), Some(last))
    } else if tail == Verdict::Convergent {
        let rho = TailPolicy::last_ratio(&abs_inc).unwrap_or(0.0);
        let extra = last + cauchy_gap * rho / (1.0 - rho);
        (Verdict::Convergent, format!("increments decay geometrically (ratio {rho:.3})"), Some(extra))
    } else if last > policy.growth_factor * first.abs().max(f64::MIN_POSITIVE) && increasing {
        (Verdict::Divergent, "growth beyond bound with increasing increments".to_string(), None)
    } else if tail == Verdict::Divergent {
        (Verdict::Divergent, "increments do not decay".to_string(), None)
    } else {
        (Verdict::Undecided, "no rule applies".to_string(), None)
    };
    S1Estimate {
        sizes: sizes.to_vec(),
        values,
        increments,
        cauchy_gap,
        verdict,
        extrapolated,
        reason,
        diagonal: diagonal_verdict,
        monotone,
        provenance,
    }
}

/// Besov cross-check parameters for [`class_membership`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovCheck {
    pub n_max: usize,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMembership {
    pub estimate: S1Estimate,
    pub besov_crosscheck: Option<Verdict>,
}

/// S₁ verdict for the class matrix of `symbol` at level N, optionally
/// compared with the Besov verdict of the matching series.
pub fn class_membership(
    symbol: &RadialSymbol,
    level: usize,
    class: ClassTag,
    sizes: &[usize],
    policy: &S1Policy,
    besov: Option<BesovCheck>,
) -> Result<ClassMembership> {
    if symbol.bound.is_none() && symbol.available().is_none() {
        return Err(Error::InvalidInput(format!("{} has no declared bound", symbol.label())));
    }
    let spec = HankelSpec::class(symbol.clone(), level, class)?;
    let estimate = s1_estimate(&spec, sizes, policy)?;
    let besov_crosscheck = match besov {
        Some(b) => {
            let flavor = crate::besov::Flavor::from_class(class)?;
            let len = (1usize << (b.n_max + 1)) + 1;
            let series = crate::besov::symbol_series(symbol, level, flavor, len)?;
            let tail = TailPolicy::default().with_negligible(policy.tol * 1e-3);
            Some(crate::besov::besov_norm_with(&series, level as f64, b.n_max, b.grid, &tail)?.tail_flag)
        }
        None => None,
    };
    Ok(ClassMembership { estimate, besov_crosscheck })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneGeom {
    pub matrix: TruncatedMatrix,
    pub closed_form_norm: f64,
    pub truncated_norm: f64,
    /// closed form minus truncated norm, computed by summing the tail.
    pub tail_bound: f64,
}

/// (1-r)^N f⊙f with f(i) = binom(N-1+i, N-1)^{1/2} r^i, and its closed-form norm.
pub fn rank_one_geom(level: usize, r: f64, k: usize) -> Result<RankOneGeom> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidInput(format!("r must lie in (0,1), got {r}")));
    }
    let spec = HankelSpec::binomial_class(RadialSymbol::geom(r), level, ClassTag::B)?;
    let matrix = build_hankel(&spec, k)?;
    let truncated_norm = matrix.trace_norm();
    let closed_form_norm = (1.0 + r).powi(-(level as i32));
    let mut tail = 0.0;
    let mut i = k;
    loop {
        let term = shell_size(level, i)? as f64 * r.powi(2 * i as i32);
        tail += term;
        i += 1;
        if term < 1e-300 || i > k + 100_000 {
            break;
        }
    }
    Ok(RankOneGeom {
        matrix,
        closed_form_norm,
        truncated_norm,
        tail_bound: (1.0 - r).powi(level as i32) * tail,
    })
}

/// The (l+1)×(l+1) matrix with ones on the anti-diagonal i + j = l.
pub fn anti_diagonal(l: usize) -> CMat {
    CMat::from_fn(l + 1, l + 1, |i, j| if i + j == l { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereBound {
    pub norm: f64,
    pub bound: f64,
    /// (l, ‖D^{(l)}‖_{S₁}) for the anti-diagonals in the decomposition.
    pub d_norms: Vec<(usize, f64)>,
    /// Triangle-inequality bound from the anti-diagonal decomposition.
    pub decomposition_bound: f64,
}

/// H_n = ((1+i+j)^{N-1} 𝔡₁^N φ̇_n(i+j)) for the indicator of the sphere of radius n.
pub fn sphere_indicator_matrix(level: usize, n: usize) -> Result<TruncatedMatrix> {
    let spec = HankelSpec::class(RadialSymbol::sphere(n), level, ClassTag::B)?;
    build_hankel(&spec, n + 1)
}

pub fn sphere_indicator_bound(level: usize, n: usize) -> Result<SphereBound> {
    if n < level {
        return Err(Error::InvalidInput(format!("need n ≥ N, got n={n}, N={level}")));
    }
    let h = sphere_indicator_matrix(level, n)?;
    let norm = h.trace_norm();
    let bound = 2f64.powi(level as i32) * (1.0 + n as f64).powi(level as i32);
    let mut d_norms = Vec::new();
    let mut decomposition_bound = 0.0;
    for l in n - level..=n {
        let dl = trace_norm(&anti_diagonal(l));
        d_norms.push((l, dl));
        let coef = (1.0 + l as f64).powi(level as i32 - 1) * binomial(level as u64, (n - l) as u64)? as f64;
        decomposition_bound += coef * dl;
    }
    Ok(SphereBound { norm, bound, d_norms, decomposition_bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEquivalence {
    pub ratio_window: (f64, f64),
    pub verdicts: Vec<(String, Verdict)>,
    pub consistent: bool,
}

/// Compares POWER_SPLIT(α,β), POWER_SUM(α+β) and, for integral α+β,
/// BINOM_HALF(α+β+1) sections of the same derivative sequence.
pub fn weight_equivalence(
    symbol: &RadialSymbol,
    derivative: DerivativeSpec,
    alpha: f64,
    beta: f64,
    sizes: &[usize],
    policy: &S1Policy,
) -> Result<WeightEquivalence> {
    let mut schemes = vec![
        ("POWER_SPLIT".to_string(), WeightScheme::PowerSplit { alpha, beta }),
        ("POWER_SUM".to_string(), WeightScheme::PowerSum { s: alpha + beta }),
    ];
    let total = alpha + beta;
    if total >= 0.0 && (total - total.round()).abs() < 1e-12 {
        schemes.push(("BINOM_HALF".into(), WeightScheme::BinomHalf { n: total.round() as usize + 1 }));
    }
    let mut estimates = Vec::new();
    for (name, w) in &schemes {
        let spec = HankelSpec::raw(symbol.clone(), derivative, *w);
        estimates.push((name.clone(), s1_estimate(&spec, sizes, policy)?));
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for a in 0..estimates.len() {
        for b in 0..estimates.len() {
            if a == b {
                continue;
            }
            for idx in 0..sizes.len() {
                let (x, y) = (estimates[a].1.values[idx], estimates[b].1.values[idx]);
                if y > 0.0 {
                    lo = lo.min(x / y);
                    hi = hi.max(x / y);
                }
            }
        }
    }
    if !lo.is_finite() {
        lo = 1.0;
        hi = 1.0;
    }
    let verdicts: Vec<(String, Verdict)> = estimates.iter().map(|(n, e)| (n.clone(), e.verdict)).collect();
    let decided: Vec<Verdict> = verdicts.iter().map(|v| v.1).filter(|v| v.is_decided()).collect();
    let consistent = decided.windows(2).all(|w| w[0] == w[1]);
    Ok(WeightEquivalence { ratio_window: (lo, hi), verdicts, consistent })
}
