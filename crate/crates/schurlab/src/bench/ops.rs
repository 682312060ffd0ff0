//! Operations a manifest row can invoke. Each returns one or more rows of
//! named values and verdicts; assertion-class operations also report
//! whether their check passed.

use serde_json::{Map, Value};

use crate::besov::{besov_norm_with, catalog_family, peller_concordance, symbol_series, Flavor};
use crate::error::{Error, Result};
use crate::hankel::{class_membership, rank_one_geom, BesovCheck, ClassTag, S1Policy};
use crate::medgraph::{cayley_ball, serre_embedding, serre_shift};
use crate::mlab::{cb_norm_sdp_with, radial_kernel, sandwich_check, SdpOptions};
use crate::scalar::C64;
use crate::verdict::TailPolicy;

use super::spec::{symbol_from_value, GraphSpec};
use super::RunDefaults;

#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Real(f64),
    Complex(C64),
    Int(i64),
    Text(String),
}

/// One output row before the runner attaches ids and timing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RowData {
    /// Extra parameters identifying a sub-row (e.g. the symbol of a catalog sweep).
    pub params: Vec<(String, String)>,
    pub size: Option<usize>,
    pub values: Vec<(String, CellValue)>,
    pub verdicts: Vec<(String, String)>,
    pub provenance: String,
    /// `Some(false)` marks an assertion failure.
    pub assertion: Option<bool>,
}

pub const OPERATIONS: &[&str] = &["classes", "geom-norm", "besov", "inclusions", "concordance", "sdp", "sandwich", "serre"];

fn usize_param(p: &Map<String, Value>, key: &str, default: Option<usize>) -> Result<usize> {
    match p.get(key) {
        Some(v) => v
            .as_f64()
            .filter(|x| *x >= 0.0 && x.fract() == 0.0)
            .map(|x| x as usize)
            .ok_or_else(|| Error::InvalidInput(format!("`{key}` must be a natural number"))),
        None => default.ok_or_else(|| Error::InvalidInput(format!("missing parameter `{key}`"))),
    }
}

fn f64_param(p: &Map<String, Value>, key: &str, default: Option<f64>) -> Result<f64> {
    match p.get(key) {
        Some(v) => v.as_f64().ok_or_else(|| Error::InvalidInput(format!("`{key}` must be a number"))),
        None => default.ok_or_else(|| Error::InvalidInput(format!("missing parameter `{key}`"))),
    }
}

fn str_param<'a>(p: &'a Map<String, Value>, key: &str) -> Result<&'a str> {
    p.get(key).and_then(Value::as_str).ok_or_else(|| Error::InvalidInput(format!("missing string parameter `{key}`")))
}

fn policy(tol: f64) -> S1Policy {
    S1Policy::default().with_tol(tol)
}

pub fn run_operation(op: &str, p: &Map<String, Value>, d: &RunDefaults) -> Result<Vec<RowData>> {
    match op {
        "classes" => {
            let symbol = symbol_from_value(p.get("symbol").ok_or_else(|| Error::InvalidInput("missing `symbol`".into()))?)?;
            let level = usize_param(p, "N", None)?;
            let class = ClassTag::parse(str_param(p, "class")?)?;
            let besov = p.get("besov").and_then(Value::as_bool).unwrap_or(false);
            let check = besov.then_some(BesovCheck { n_max: usize_param(p, "n_max", Some(9))?, grid: d.grid });
            let m = class_membership(&symbol, level, class, &d.sizes, &policy(d.tol), check)?;
            let e = &m.estimate;
            let mut row = RowData {
                size: e.sizes.last().copied(),
                values: vec![
                    ("s1_last".into(), CellValue::Real(*e.values.last().unwrap())),
                    ("cauchy_gap".into(), CellValue::Real(e.cauchy_gap)),
                    ("extrapolated".into(), CellValue::Real(e.extrapolated.unwrap_or(f64::NAN))),
                ],
                verdicts: vec![("s1".into(), e.verdict.to_string())],
                provenance: e.provenance.clone(),
                ..RowData::default()
            };
            if let Some(b) = m.besov_crosscheck {
                row.verdicts.push(("besov".into(), b.to_string()));
            }
            Ok(vec![row])
        }
        "geom-norm" => {
            let level = usize_param(p, "N", None)?;
            let r = f64_param(p, "r", None)?;
            let k = usize_param(p, "K", Some(400))?;
            let g = rank_one_geom(level, r, k)?;
            let diff = (g.truncated_norm - g.closed_form_norm).abs();
            Ok(vec![RowData {
                size: Some(k),
                values: vec![
                    ("truncated".into(), CellValue::Real(g.truncated_norm)),
                    ("closed_form".into(), CellValue::Real(g.closed_form_norm)),
                    ("abs_diff".into(), CellValue::Real(diff)),
                ],
                provenance: g.matrix.provenance.clone(),
                assertion: Some(diff <= d.tol),
                ..RowData::default()
            }])
        }
        "besov" => {
            let symbol = symbol_from_value(p.get("symbol").ok_or_else(|| Error::InvalidInput("missing `symbol`".into()))?)?;
            let level = usize_param(p, "N", None)?;
            let flavor = Flavor::from_class(ClassTag::parse(p.get("flavor").and_then(Value::as_str).unwrap_or("A"))?)?;
            let n_max = usize_param(p, "n_max", Some(9))?;
            let len = (1usize << (n_max + 1)) + 1;
            let series = symbol_series(&symbol, level, flavor, len)?;
            let tail = TailPolicy::default().with_negligible(d.tol * 1e-3);
            let b = besov_norm_with(&series, level as f64, n_max, d.grid, &tail)?;
            Ok(vec![RowData {
                size: Some(len),
                values: vec![("partial".into(), CellValue::Real(b.partial))],
                verdicts: vec![("besov".into(), b.tail_flag.to_string())],
                provenance: series.provenance.clone(),
                ..RowData::default()
            }])
        }
        "inclusions" => {
            let level = usize_param(p, "N", None)?;
            let mut rows = Vec::new();
            for symbol in catalog_family(level) {
                for class in [ClassTag::A, ClassTag::B, ClassTag::C] {
                    let m = class_membership(&symbol, level, class, &d.sizes, &policy(d.tol), None)?;
                    rows.push(RowData {
                        params: vec![("symbol".into(), symbol.label()), ("class".into(), format!("{class:?}"))],
                        size: m.estimate.sizes.last().copied(),
                        values: vec![("s1_last".into(), CellValue::Real(*m.estimate.values.last().unwrap()))],
                        verdicts: vec![("s1".into(), m.estimate.verdict.to_string())],
                        provenance: m.estimate.provenance.clone(),
                        ..RowData::default()
                    });
                }
            }
            Ok(rows)
        }
        "concordance" => {
            let level = usize_param(p, "N", None)?;
            let n_max = usize_param(p, "n_max", Some(9))?;
            let rep = peller_concordance(&catalog_family(level), level, &d.sizes, n_max, d.grid, &policy(d.tol))?;
            Ok(vec![RowData {
                size: d.sizes.last().copied(),
                values: vec![
                    ("agreements".into(), CellValue::Int(rep.agreements as i64)),
                    ("undecided".into(), CellValue::Int(rep.undecided as i64)),
                    ("contradictions".into(), CellValue::Int(rep.contradictions as i64)),
                ],
                provenance: format!("peller concordance N={level} n_max={n_max}"),
                assertion: Some(rep.contradictions == 0),
                ..RowData::default()
            }])
        }
        "sdp" => {
            let symbol = symbol_from_value(p.get("symbol").ok_or_else(|| Error::InvalidInput("missing `symbol`".into()))?)?;
            let graph = GraphSpec::parse(str_param(p, "graph")?)?.build()?;
            let kernel = radial_kernel(&graph, &symbol)?;
            let r = cb_norm_sdp_with(&kernel, &SdpOptions { tol: d.tol, ..SdpOptions::default() })?;
            Ok(vec![RowData {
                size: Some(kernel.len()),
                values: vec![
                    ("lower".into(), CellValue::Real(r.lower)),
                    ("upper".into(), CellValue::Real(r.upper)),
                    ("gap".into(), CellValue::Real(r.gap)),
                    ("iterations".into(), CellValue::Int(r.iterations as i64)),
                ],
                verdicts: vec![("method".into(), r.method.clone())],
                provenance: format!("cb_norm_sdp {}", symbol.label()),
                ..RowData::default()
            }])
        }
        "sandwich" => {
            let symbol = symbol_from_value(p.get("symbol").ok_or_else(|| Error::InvalidInput("missing `symbol`".into()))?)?;
            let degrees: Vec<usize> = match p.get("degrees") {
                Some(Value::Array(a)) => a
                    .iter()
                    .map(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| Error::InvalidInput("bad degree".into())))
                    .collect::<Result<_>>()?,
                _ => vec![3],
            };
            let radius = usize_param(p, "R", Some(d.radius))?;
            let radii: Vec<usize> = (1..=radius).collect();
            let rep = sandwich_check(&symbol, &degrees, &radii, &d.sizes, d.tol.max(1e-4))?;
            Ok(rep
                .rows
                .iter()
                .map(|row| RowData {
                    params: vec![("radius".into(), row.radius.to_string())],
                    size: Some(row.vertices),
                    values: vec![
                        ("cb_upper".into(), CellValue::Real(row.cb_upper)),
                        ("upper_expression".into(), CellValue::Real(row.upper_expression)),
                        ("lower_expression".into(), CellValue::Real(row.lower_expression)),
                    ],
                    provenance: format!("sandwich {} degrees={:?}", rep.symbol, rep.degrees),
                    assertion: Some(row.upper_holds && rep.monotone),
                    ..RowData::default()
                })
                .collect())
        }
        "serre" => {
            let radius = usize_param(p, "R", Some(4))?;
            let ball = cayley_ball(radius)?;
            let (tree, check) = serre_embedding(&ball, 2 * radius + 1)?;
            let shift = serre_shift(&tree);
            Ok(vec![RowData {
                size: Some(ball.graph.len()),
                values: vec![
                    ("pairs".into(), CellValue::Int(check.pairs_checked as i64)),
                    ("tree_vertices".into(), CellValue::Int(tree.graph.len() as i64)),
                    ("overlap".into(), CellValue::Int(shift.overlap as i64)),
                ],
                verdicts: vec![
                    ("distance_doubling".into(), check.distance_doubling.to_string()),
                    ("partition".into(), shift.partition.to_string()),
                ],
                provenance: format!("serre embedding R={radius}"),
                assertion: Some(check.passed() && shift.passed()),
                ..RowData::default()
            }])
        }
        other => Err(Error::InvalidInput(format!("unknown operation `{other}`"))),
    }
}
