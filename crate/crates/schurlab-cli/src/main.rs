use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use schurlab::bench::{self, parse_params, parse_symbol, ExperimentManifest, GraphSpec, Outputs, Report};
use schurlab::hankel::MultiSymbol;
use schurlab::medgraph::MedianComplex;
use schurlab::mlab::{cb_norm_sdp_with, median_witness, radial_kernel, tree_product_witness, SdpOptions};
use schurlab::{Error, RadialSymbol};

#[derive(Parser)]
#[command(name = "schurlab", version, about = "Radial Schur multiplier workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct Common {
    /// Catalog id (GEOM, ALT_POWER, ...) or a JSON symbol object.
    #[arg(long, default_value = "GEOM")]
    symbol: String,
    /// Symbol parameters, e.g. `r=0.5` or `α=2.5`.
    #[arg(long, default_value = "")]
    params: String,
    #[arg(long = "N", default_value_t = 1)]
    level: usize,
    #[arg(long, default_value = "A")]
    class: String,
    /// Comma-separated truncation sizes.
    #[arg(long, value_delimiter = ',', default_values_t = bench::DEFAULT_SIZES.to_vec())]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = bench::DEFAULT_TOL)]
    tol: f64,
    #[arg(long = "radius", visible_alias = "R", default_value_t = bench::DEFAULT_R)]
    radius: usize,
    #[arg(long = "K", default_value_t = bench::DEFAULT_K)]
    k: usize,
    /// FFT grid for circle norms.
    #[arg(long, default_value_t = bench::DEFAULT_GRID)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    emit_witness: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum GraphCheck {
    Serre,
    Medians,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum WitnessMethod {
    Tree,
    Median,
}

#[derive(Subcommand)]
enum Command {
    /// S₁ verdict for one class matrix.
    Classes {
        #[command(flatten)]
        c: Common,
        /// Also run the Besov cross-check.
        #[arg(long)]
        besov: bool,
    },
    /// Rank-one geometric norm against its closed form.
    Norms {
        #[command(flatten)]
        c: Common,
    },
    /// Factorization witness on a tree product or median complex.
    Witness {
        #[command(flatten)]
        c: Common,
        #[arg(long, default_value = "product(T3ball(3),T3ball(3))")]
        graph: String,
        #[arg(long, value_enum, default_value = "median")]
        method: WitnessMethod,
    },
    /// Graph checks: Serre embedding or median-complex validation.
    Graphs {
        #[command(flatten)]
        c: Common,
        #[arg(long, value_enum)]
        check: GraphCheck,
        #[arg(long, default_value = "grid(4,4)")]
        graph: String,
    },
    /// Truncated Besov norm of a class series.
    Besov {
        #[command(flatten)]
        c: Common,
        #[arg(long, default_value_t = 9)]
        n_max: usize,
    },
    /// Verdict grid over the three classes and the catalog family.
    Inclusions {
        #[command(flatten)]
        c: Common,
    },
    /// cb norm of a radial kernel by semidefinite programming.
    Sdp {
        #[command(flatten)]
        c: Common,
        #[arg(long, default_value = "T3ball(2)")]
        graph: String,
    },
    /// Run a manifest file or a built-in manifest (`inclusions`, `geom-norms`).
    Run {
        manifest: String,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

/// Usage-class failures exit 2.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn symbol_of(c: &Common) -> Result<RadialSymbol, Failure> {
    Ok(parse_symbol(&c.symbol, &c.params)?)
}

fn manifest(id: &str, op: &str, c: &Common, grid: Vec<(&str, Value)>) -> ExperimentManifest {
    ExperimentManifest {
        id: id.to_string(),
        operation: op.to_string(),
        grid: grid.into_iter().map(|(k, v)| (k.to_string(), vec![v])).collect::<BTreeMap<_, _>>(),
        sizes: c.sizes.clone(),
        tol: c.tol,
        fft_grid: c.grid,
        k: c.k,
        radius: c.radius,
        seed: c.seed,
        outputs: Outputs::default(),
    }
}

fn emit_text(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| Failure(e.to_string()))
        }
    }
}

fn emit_report(report: &Report, format: Format, out: &Option<PathBuf>) -> Result<u8, Failure> {
    let text = match format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            String::from_utf8(buf).map_err(|e| Failure(e.to_string()))?
        }
    };
    emit_text(&text, out)?;
    for row in report.rows.iter().filter(|r| r.status == bench::RowStatus::Error) {
        eprintln!("row {} failed: {}", row.row, row.message);
    }
    if report.errors() > 0 && report.rows.len() == report.errors() {
        return Err(Failure("every row failed".into()));
    }
    Ok(report.exit_code() as u8)
}

fn run_single(m: &ExperimentManifest, c: &Common) -> Result<u8, Failure> {
    let report = bench::run(m, 1)?;
    emit_report(&report, c.format, &c.out)
}

fn dispatch(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Classes { c, besov } => {
            let s = symbol_of(&c)?;
            let m = manifest(
                "classes",
                "classes",
                &c,
                vec![
                    ("symbol", s.to_json_value()),
                    ("N", c.level.into()),
                    ("class", c.class.clone().into()),
                    ("besov", besov.into()),
                ],
            );
            run_single(&m, &c)
        }
        Command::Norms { c } => {
            let p = parse_params(&c.params)?;
            let r = p.get("r").cloned().unwrap_or(Value::from(0.5));
            let k = if c.k == bench::DEFAULT_K { 400 } else { c.k };
            let m = manifest("norms", "geom-norm", &c, vec![("N", c.level.into()), ("r", r), ("K", k.into())]);
            run_single(&m, &c)
        }
        Command::Besov { c, n_max } => {
            let s = symbol_of(&c)?;
            let m = manifest(
                "besov",
                "besov",
                &c,
                vec![
                    ("symbol", s.to_json_value()),
                    ("N", c.level.into()),
                    ("flavor", c.class.clone().into()),
                    ("n_max", n_max.into()),
                ],
            );
            run_single(&m, &c)
        }
        Command::Inclusions { c } => {
            let m = manifest("inclusions", "inclusions", &c, vec![("N", c.level.into())]);
            run_single(&m, &c)
        }
        Command::Sdp { c, graph } => {
            let s = symbol_of(&c)?;
            if c.format == Format::Csv {
                let m = manifest("sdp", "sdp", &c, vec![("symbol", s.to_json_value()), ("graph", graph.into())]);
                return run_single(&m, &c);
            }
            let g = GraphSpec::parse(&graph)?.build()?;
            let kernel = radial_kernel(&g, &s)?;
            let mut r = cb_norm_sdp_with(&kernel, &SdpOptions { tol: c.tol, ..SdpOptions::default() })?;
            if c.emit_witness {
                r.witness.materialize();
            }
            let text = serde_json::to_string_pretty(&r).map_err(|e| Failure(e.to_string()))?;
            emit_text(&(text + "\n"), &c.out)?;
            Ok(0)
        }
        Command::Witness { c, graph, method } => witness(&c, &graph, method),
        Command::Graphs { c, check, graph } => match check {
            GraphCheck::Serre => {
                let m = manifest("graphs", "serre", &c, vec![("R", c.radius.into())]);
                run_single(&m, &c)
            }
            GraphCheck::Medians => median_checks(&c, &graph),
        },
        Command::Run { manifest, jobs, out, format } => {
            let mut m = match ExperimentManifest::builtin(&manifest) {
                Some(m) => m,
                None => {
                    let text = std::fs::read_to_string(&manifest).map_err(|e| Failure(format!("{manifest}: {e}")))?;
                    ExperimentManifest::from_json(&text)?
                }
            };
            let report = bench::run(&m, bench::job_count(jobs))?;
            bench::write_outputs(&report, &std::mem::take(&mut m.outputs))?;
            emit_report(&report, format, &out)
        }
    }
}

/// Extends tree-ball factors that carry no ray so the witness has room for K.
fn with_ray(spec: GraphSpec, k: usize) -> GraphSpec {
    match spec {
        GraphSpec::TreeBall { degree, radius, extension: 0 } => GraphSpec::TreeBall { degree, radius, extension: k + 1 },
        GraphSpec::Product(parts) => GraphSpec::Product(parts.into_iter().map(|p| with_ray(p, k)).collect()),
        other => other,
    }
}

fn witness(c: &Common, graph: &str, method: WitnessMethod) -> Result<u8, Failure> {
    let s = symbol_of(c)?;
    let spec = with_ray(GraphSpec::parse(graph)?, c.k);
    let w = match (method, spec.tree_product()) {
        (WitnessMethod::Tree, Some(p)) => {
            let p = p?;
            let region = p.ball_vertices();
            tree_product_witness(&p, &MultiSymbol::Radial(s), c.k, &region, c.tol)?
        }
        (WitnessMethod::Tree, None) => return Err(Failure("--method tree needs a product of tree balls".into())),
        (WitnessMethod::Median, tp) => {
            let (complex, region): (MedianComplex, Vec<usize>) = match tp {
                Some(p) => {
                    let p = p?;
                    let region = p.ball_vertices();
                    (p.complex()?, region)
                }
                None => {
                    let cx = spec.complex()?;
                    let o = cx.base_ray[0];
                    let region = (0..cx.len()).filter(|&v| cx.graph.d(o, v) <= c.radius).collect();
                    (cx, region)
                }
            };
            median_witness(&complex, &s, c.k, &region, c.tol)?
        }
    };
    emit_text(&(w.to_json(c.emit_witness)? + "\n"), &c.out)?;
    Ok(if w.reproduction_error <= c.tol { 0 } else { 1 })
}

fn median_checks(c: &Common, graph: &str) -> Result<u8, Failure> {
    let cx = GraphSpec::parse(graph)?.complex()?;
    let sageev = cx.sageev_check(1000, c.seed);
    let kmax = 4;
    let mut bound_failures = 0usize;
    let mut checked = 0usize;
    for x in 0..cx.len() {
        for k in 0..=kmax {
            match cx.polytopes(x, k) {
                Ok(rep) => {
                    checked += 1;
                    if !rep.bounds_hold {
                        bound_failures += 1;
                    }
                }
                Err(Error::RayTooShort(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    let passed = sageev.failures == 0 && bound_failures == 0;
    let out = json!({
        "graph": cx.label,
        "vertices": cx.len(),
        "validation": cx.validation,
        "sageev": { "pairs": sageev.pairs, "failures": sageev.failures },
        "polytope_reports": checked,
        "polytope_bound_failures": bound_failures,
        "passed": passed,
    });
    emit_text(&(serde_json::to_string_pretty(&out).map_err(|e| Failure(e.to_string()))? + "\n"), &c.out)?;
    Ok(if passed { 0 } else { 1 })
}
