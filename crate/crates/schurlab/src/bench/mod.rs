//! Experiment manifests, the grid runner, and CSV/JSON reports.

pub mod ops;
pub mod spec;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub use ops::{run_operation, CellValue, RowData, OPERATIONS};
pub use spec::{parse_params, parse_symbol, symbol_from_value, GraphSpec};

pub const DEFAULT_SIZES: [usize; 4] = [64, 128, 256, 512];
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_GRID: usize = 1 << 14;
pub const DEFAULT_K: usize = 16;
pub const DEFAULT_R: usize = 3;

fn default_sizes() -> Vec<usize> {
    DEFAULT_SIZES.to_vec()
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_grid() -> usize {
    DEFAULT_GRID
}
fn default_k() -> usize {
    DEFAULT_K
}
fn default_r() -> usize {
    DEFAULT_R
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub id: String,
    pub operation: String,
    /// Parameter name → list of values; rows are the cartesian product in
    /// key order, last key varying fastest.
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<Value>>,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_grid", rename = "fft_grid")]
    pub fft_grid: usize,
    #[serde(default = "default_k", rename = "K")]
    pub k: usize,
    #[serde(default = "default_r", rename = "R")]
    pub radius: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Settings shared by every row of a run, recorded in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDefaults {
    pub sizes: Vec<usize>,
    pub tol: f64,
    pub grid: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "R")]
    pub radius: usize,
    pub seed: u64,
}

impl Default for RunDefaults {
    fn default() -> Self {
        RunDefaults {
            sizes: default_sizes(),
            tol: DEFAULT_TOL,
            grid: DEFAULT_GRID,
            k: DEFAULT_K,
            radius: DEFAULT_R,
            seed: 0,
        }
    }
}

impl ExperimentManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !OPERATIONS.contains(&self.operation.as_str()) {
            return Err(Error::InvalidInput(format!("unknown operation `{}`", self.operation)));
        }
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) || self.sizes[0] == 0 {
            return Err(Error::InvalidInput("sizes must be positive and strictly increasing".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        for v in self.grid.get("symbol").into_iter().flatten() {
            symbol_from_value(v)?;
        }
        Ok(())
    }

    pub fn defaults(&self) -> RunDefaults {
        RunDefaults {
            sizes: self.sizes.clone(),
            tol: self.tol,
            grid: self.fft_grid,
            k: self.k,
            radius: self.radius,
            seed: self.seed,
        }
    }

    /// Cartesian product of the grid.
    pub fn points(&self) -> Vec<Map<String, Value>> {
        let mut out = vec![Map::new()];
        for (key, values) in &self.grid {
            let mut next = Vec::with_capacity(out.len() * values.len());
            for base in &out {
                for v in values {
                    let mut m = base.clone();
                    m.insert(key.clone(), v.clone());
                    next.push(m);
                }
            }
            out = next;
        }
        // an explicitly empty value list yields no rows
        if self.grid.values().any(|v| v.is_empty()) {
            out.clear();
        }
        out
    }

    /// Built-in manifests by name.
    pub fn builtin(name: &str) -> Option<Self> {
        let mut m = ExperimentManifest {
            id: name.to_string(),
            operation: String::new(),
            grid: BTreeMap::new(),
            sizes: default_sizes(),
            tol: DEFAULT_TOL,
            fft_grid: DEFAULT_GRID,
            k: DEFAULT_K,
            radius: DEFAULT_R,
            seed: 0,
            outputs: Outputs::default(),
        };
        match name {
            "inclusions" => {
                m.operation = "inclusions".into();
                m.grid.insert("N".into(), vec![1.into(), 2.into()]);
            }
            "geom-norms" => {
                m.operation = "geom-norm".into();
                m.grid.insert("N".into(), vec![1.into(), 2.into(), 3.into()]);
                m.grid.insert("r".into(), vec![0.1.into(), 0.5.into(), 0.9.into()]);
                m.grid.insert("K".into(), vec![400.into()]);
            }
            _ => return None,
        }
        Some(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RowStatus {
    Ok,
    AssertionFailed,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub row: usize,
    pub operation: String,
    pub params: BTreeMap<String, String>,
    pub size: Option<usize>,
    pub values: BTreeMap<String, Value>,
    pub verdicts: BTreeMap<String, String>,
    pub provenance: String,
    pub status: RowStatus,
    pub message: String,
    pub wall_ms: f64,
    #[serde(skip)]
    ordered_values: Vec<(String, CellValue)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub operation: String,
    pub defaults: RunDefaults,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn assertion_failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status == RowStatus::AssertionFailed).count()
    }

    pub fn errors(&self) -> usize {
        self.rows.iter().filter(|r| r.status == RowStatus::Error).count()
    }

    /// Process exit code: 1 iff an assertion-class row failed.
    pub fn exit_code(&self) -> i32 {
        if self.assertion_failures() > 0 {
            1
        } else {
            0
        }
    }

    /// CSV with a fixed column order; complex values become `_re`/`_im`
    /// column pairs. Wall time is left out so reruns are byte-identical.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut value_cols: Vec<(String, bool)> = Vec::new();
        let mut verdict_cols: Vec<String> = Vec::new();
        let mut param_cols: Vec<String> = Vec::new();
        for r in &self.rows {
            for (name, v) in &r.ordered_values {
                if !value_cols.iter().any(|(n, _)| n == name) {
                    value_cols.push((name.clone(), matches!(v, CellValue::Complex(_))));
                }
            }
            for k in r.verdicts.keys() {
                if !verdict_cols.contains(k) {
                    verdict_cols.push(k.clone());
                }
            }
            for k in r.params.keys() {
                if !param_cols.contains(k) {
                    param_cols.push(k.clone());
                }
            }
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = vec!["experiment".into(), "row".into(), "operation".into()];
        header.extend(param_cols.iter().cloned());
        header.push("size".into());
        for (name, complex) in &value_cols {
            if *complex {
                header.push(format!("{name}_re"));
                header.push(format!("{name}_im"));
            } else {
                header.push(name.clone());
            }
        }
        header.extend(verdict_cols.iter().cloned());
        header.extend(["status".to_string(), "provenance".into(), "message".into()]);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = vec![r.experiment.clone(), r.row.to_string(), r.operation.clone()];
            rec.extend(param_cols.iter().map(|k| r.params.get(k).cloned().unwrap_or_default()));
            rec.push(r.size.map(|s| s.to_string()).unwrap_or_default());
            for (name, complex) in &value_cols {
                let cell = r.ordered_values.iter().find(|(n, _)| n == name).map(|(_, v)| v);
                match (cell, complex) {
                    (Some(CellValue::Complex(z)), true) => {
                        rec.push(format_f64(z.re));
                        rec.push(format_f64(z.im));
                    }
                    (Some(CellValue::Real(x)), true) => {
                        rec.push(format_f64(*x));
                        rec.push(format_f64(0.0));
                    }
                    (Some(v), true) => {
                        rec.push(format_cell(v));
                        rec.push(String::new());
                    }
                    (None, true) => {
                        rec.push(String::new());
                        rec.push(String::new());
                    }
                    (Some(v), false) => rec.push(format_cell(v)),
                    (None, false) => rec.push(String::new()),
                }
            }
            rec.extend(verdict_cols.iter().map(|k| r.verdicts.get(k).cloned().unwrap_or_default()));
            rec.push(serde_json::to_value(r.status)?.as_str().unwrap_or_default().to_string());
            rec.push(r.provenance.clone());
            rec.push(r.message.clone());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn format_f64(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:e}")
    }
}

fn format_cell(v: &CellValue) -> String {
    match v {
        CellValue::Real(x) => format_f64(*x),
        CellValue::Complex(z) => format!("{}+{}i", format_f64(z.re), format_f64(z.im)),
        CellValue::Int(i) => i.to_string(),
        CellValue::Text(s) => s.clone(),
    }
}

fn cell_json(v: &CellValue) -> Value {
    match v {
        CellValue::Real(x) if x.is_finite() => Value::from(*x),
        CellValue::Real(_) => Value::Null,
        CellValue::Complex(z) => Value::from(vec![z.re, z.im]),
        CellValue::Int(i) => Value::from(*i),
        CellValue::Text(s) => Value::from(s.clone()),
    }
}

fn param_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Object(_) => symbol_from_value(v).map(|s| s.label()).unwrap_or_else(|_| v.to_string()),
        other => other.to_string(),
    }
}

/// Worker count from an explicit value, else WORKBENCH_JOBS, else 1.
pub fn job_count(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var("WORKBENCH_JOBS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1)
}

/// Runs every grid point (concurrently up to `jobs`); failures become
/// `ERROR` rows and the run continues. Row order follows the grid.
pub fn run(manifest: &ExperimentManifest, jobs: usize) -> Result<Report> {
    manifest.validate()?;
    let defaults = manifest.defaults();
    let points = manifest.points();
    let results: Vec<(Result<Vec<RowData>>, f64)> = run_points(&manifest.operation, &points, &defaults, jobs.max(1));

    let mut rows = Vec::new();
    for (point, (res, ms)) in points.iter().zip(results) {
        let base: BTreeMap<String, String> = point.iter().map(|(k, v)| (k.clone(), param_text(v))).collect();
        match res {
            Ok(datas) => {
                for d in datas {
                    let mut params = base.clone();
                    params.extend(d.params.iter().cloned());
                    let status = match d.assertion {
                        Some(false) => RowStatus::AssertionFailed,
                        _ => RowStatus::Ok,
                    };
                    rows.push(ReportRow {
                        experiment: manifest.id.clone(),
                        row: rows.len(),
                        operation: manifest.operation.clone(),
                        params,
                        size: d.size,
                        values: d.values.iter().map(|(k, v)| (k.clone(), cell_json(v))).collect(),
                        verdicts: d.verdicts.iter().cloned().collect(),
                        provenance: d.provenance,
                        status,
                        message: String::new(),
                        wall_ms: ms,
                        ordered_values: d.values,
                    });
                }
            }
            Err(e) => rows.push(ReportRow {
                experiment: manifest.id.clone(),
                row: rows.len(),
                operation: manifest.operation.clone(),
                params: base,
                size: None,
                values: BTreeMap::new(),
                verdicts: BTreeMap::new(),
                provenance: String::new(),
                status: RowStatus::Error,
                message: e.to_string(),
                wall_ms: ms,
                ordered_values: Vec::new(),
            }),
        }
    }
    Ok(Report { experiment: manifest.id.clone(), operation: manifest.operation.clone(), defaults, rows })
}

fn run_points(op: &str, points: &[Map<String, Value>], d: &RunDefaults, jobs: usize) -> Vec<(Result<Vec<RowData>>, f64)> {
    let timed = |p: &Map<String, Value>| {
        let t = Instant::now();
        let r = run_operation(op, p, d);
        (r, t.elapsed().as_secs_f64() * 1e3)
    };
    if jobs <= 1 || points.len() <= 1 {
        return points.iter().map(timed).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<(Result<Vec<RowData>>, f64)>>> =
        points.iter().map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.min(points.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= points.len() {
                    break;
                }
                let r = timed(&points[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every point ran")).collect()
}

/// Writes the report files named in the manifest.
pub fn write_outputs(report: &Report, outputs: &Outputs) -> Result<()> {
    if let Some(path) = &outputs.csv {
        report.write_csv(std::fs::File::create(path)?)?;
    }
    if let Some(path) = &outputs.json {
        std::fs::write(path, report.to_json()?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_of(r: &Report) -> String {
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn geom_norms_builtin_passes() {
        let m = ExperimentManifest::builtin("geom-norms").unwrap();
        let r = run(&m, 2).unwrap();
        assert_eq!(r.rows.len(), 9);
        assert_eq!(r.exit_code(), 0, "{}", csv_of(&r));
    }

    #[test]
    fn empty_grid_gives_empty_report() {
        let mut m = ExperimentManifest::builtin("geom-norms").unwrap();
        m.grid.insert("r".into(), vec![]);
        let r = run(&m, 1).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.exit_code(), 0);
        assert_eq!(csv_of(&r).lines().count(), 1);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let text = r#"{"id":"t","operation":"classes","sizes":[16,32,64],
            "grid":{"symbol":[{"kind":"GEOM","params":{"r":0.5}},{"kind":"PARITY","params":{}}],"N":[1],"class":["A","C"]}}"#;
        let m = ExperimentManifest::from_json(text).unwrap();
        let a = csv_of(&run(&m, 1).unwrap());
        let b = csv_of(&run(&m, 3).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 5);
    }

    #[test]
    fn failures_become_rows() {
        let text = r#"{"id":"t","operation":"classes","sizes":[8,16],
            "grid":{"symbol":[{"kind":"TABLE","params":{"values":[[1,0]]}}],"N":[1],"class":["A"]}}"#;
        let m = ExperimentManifest::from_json(text).unwrap();
        let r = run(&m, 1).unwrap();
        assert_eq!(r.rows[0].status, RowStatus::Error);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn manifest_validation() {
        assert!(ExperimentManifest::from_json(r#"{"id":"x","operation":"nope"}"#).is_err());
        assert!(ExperimentManifest::from_json(r#"{"id":"x","operation":"classes","sizes":[4,4]}"#).is_err());
        assert!(ExperimentManifest::from_json(
            r#"{"id":"x","operation":"classes","grid":{"symbol":[{"kind":"WAT","params":{}}]}}"#
        )
        .is_err());
    }

    #[test]
    fn jobs_from_environment_default() {
        assert_eq!(job_count(Some(4)), 4);
        assert!(job_count(None) >= 1);
    }
}
