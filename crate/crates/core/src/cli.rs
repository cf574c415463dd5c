//! `ortho-traj` command line: `verify`, `trace`, `intersect`, `classify` and
//! `plot`.
//!
//! Every subcommand reads its parameters from flags, from the matching
//! section of a `--config` JSON document, or both (flags win). With
//! `--json-out` a report `{command, inputs, results, pass}` is written.
//! Exit codes: 0 success, 1 verification failure, 2 usage or config error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::geometry::{classify, intersections, ConicVerdict, SlopeProduct};
use crate::model::{Point, TrajectoryCurve};
use crate::plot::{render_figure, PlotSpec};
use crate::tracer::{sample_residual, trace_orthogonal, TraceConfig};
use crate::validation::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ortho-traj",
    version,
    about = "Orthogonal trajectories of the lines y = mx - 2m - m^3"
)]
struct Cli {
    /// JSON document with per-command parameter sections.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write a JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    json_out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run verification suites and print a pass/fail table.
    Verify {
        /// Suite name or `all`.
        #[arg(long)]
        suite: Option<String>,
    },
    /// Trace an orthogonal trajectory from the implicit slope equation.
    #[command(allow_negative_numbers = true)]
    Trace {
        /// Start point x.
        #[arg(long)]
        x0: Option<f64>,
        /// Start point y.
        #[arg(long)]
        y0: Option<f64>,
        /// Slope hint picking the branch at the start [default: lowest slope].
        #[arg(long)]
        p0: Option<f64>,
        /// Local error tolerance per step [default: 1e-8].
        #[arg(long)]
        tol: Option<f64>,
        /// Initial arc-length step; steps never exceed twice this [default: 0.01].
        #[arg(long)]
        step: Option<f64>,
        /// Arc length per direction [default: 50].
        #[arg(long)]
        max_arc: Option<f64>,
    },
    /// Intersect line m of the family with trajectory C.
    #[command(allow_negative_numbers = true)]
    Intersect {
        /// Line slope.
        #[arg(short = 'm')]
        m: Option<f64>,
        /// Trajectory constant.
        #[arg(short = 'C')]
        c: Option<f64>,
        /// Parameter window start [default: -10].
        #[arg(long)]
        t_min: Option<f64>,
        /// Parameter window end [default: 10].
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Conic test and cusp report for trajectory C.
    #[command(allow_negative_numbers = true)]
    Classify {
        /// Trajectory constant.
        #[arg(short = 'C')]
        c: Option<f64>,
    },
    /// Render an SVG figure.
    Plot {
        /// Built-in figure: fig1a or fig1b.
        #[arg(long, conflicts_with = "spec")]
        preset: Option<String>,
        /// JSON plot spec.
        #[arg(long, value_name = "PATH")]
        spec: Option<PathBuf>,
        /// Output file [default: stdout].
        #[arg(short = 'o', value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub verify: Option<VerifyConfig>,
    pub trace: Option<TraceArgs>,
    pub intersect: Option<IntersectArgs>,
    pub classify: Option<ClassifyArgs>,
    pub plot: Option<PlotArgs>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: Option<String>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceArgs {
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub p0: Option<f64>,
    pub tol: Option<f64>,
    pub step: Option<f64>,
    pub max_arc: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectArgs {
    pub m: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyArgs {
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotArgs {
    pub preset: Option<String>,
    pub spec: Option<PlotSpec>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&read(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub pass: bool,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn required(name: &str, v: Option<f64>) -> Result<f64, CliError> {
    let v = v.ok_or_else(|| CliError::Usage(format!("missing required value `{name}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "`{name}` must be finite, got {v}"
        )))
    }
}

fn optional(name: &str, v: Option<f64>) -> Result<Option<f64>, CliError> {
    v.map(|v| required(name, Some(v))).transpose()
}

fn fmt_product(p: SlopeProduct) -> String {
    match p {
        SlopeProduct::Finite(v) => format!("{v:.12}"),
        SlopeProduct::Infinite => "inf (vertical tangent)".into(),
        SlopeProduct::Singular => "undefined (cusp)".into(),
    }
}

fn cmd_verify(suite: &str, out: &mut dyn Write) -> Result<Report, CliError> {
    let reports = run_suite(suite).map_err(|e| CliError::Usage(e.to_string()))?;
    let _ = writeln!(
        out,
        "{:<16} {:<48} {:>12} {:>12}  result",
        "suite", "check", "observed", "bound"
    );
    for r in &reports {
        for c in &r.checks {
            let _ = writeln!(
                out,
                "{:<16} {:<48} {:>12.3e} {:>12.3e}  {}",
                r.suite,
                c.name,
                c.observed,
                c.threshold,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
    }
    let pass = reports.iter().all(|r| r.pass());
    let _ = writeln!(out, "overall: {}", if pass { "PASS" } else { "FAIL" });
    Ok(Report {
        command: "verify".into(),
        inputs: json!({ "suite": suite }),
        results: serde_json::to_value(&reports).expect("serializable"),
        pass,
    })
}

fn cmd_trace(a: TraceArgs, out: &mut dyn Write) -> Result<Report, CliError> {
    let x0 = required("x0", a.x0)?;
    let y0 = required("y0", a.y0)?;
    let mut cfg = TraceConfig::new(Point::new(x0, y0));
    cfg.initial_slope_hint = optional("p0", a.p0)?;
    if let Some(t) = optional("tol", a.tol)? {
        cfg.tol = t;
    }
    if let Some(s) = optional("step", a.step)? {
        cfg.step = s;
    }
    if let Some(m) = optional("max_arc", a.max_arc)? {
        cfg.max_arc = m;
    }
    let res = trace_orthogonal(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    let residual = res.samples.iter().map(sample_residual).fold(0.0, f64::max);
    let pass = res.potential_drift <= 10.0 * cfg.tol && residual <= 1e-6;
    let first = res.samples.first().map(|s| s.point);
    let last = res.samples.last().map(|s| s.point);
    let _ = writeln!(out, "samples:          {}", res.samples.len());
    let _ = writeln!(out, "arc length:       {:.6}", res.arc_length);
    let _ = writeln!(out, "level C:          {:.12}", res.initial_level);
    let _ = writeln!(out, "potential drift:  {:.3e}", res.potential_drift);
    let _ = writeln!(out, "max residual:     {:.3e}", residual);
    let _ = writeln!(
        out,
        "forward end:      {:?} at {:?}",
        res.terminated_by, last
    );
    if let Some(b) = res.terminated_backward {
        let _ = writeln!(out, "backward end:     {:?} at {:?}", b, first);
    }
    Ok(Report {
        command: "trace".into(),
        inputs: json!({
            "x0": x0, "y0": y0, "p0": cfg.initial_slope_hint, "tol": cfg.tol,
            "step": cfg.step, "max_arc": cfg.max_arc,
        }),
        results: json!({
            "level": res.initial_level,
            "potential_drift": res.potential_drift,
            "max_residual": residual,
            "terminated_by": res.terminated_by,
            "terminated_backward": res.terminated_backward,
            "arc_length": res.arc_length,
            "samples": res.samples,
        }),
        pass,
    })
}

fn cmd_intersect(a: IntersectArgs, out: &mut dyn Write) -> Result<Report, CliError> {
    let m = required("m", a.m)?;
    let c = required("C", a.c)?;
    let t_min = optional("t_min", a.t_min)?.unwrap_or(-10.0);
    let t_max = optional("t_max", a.t_max)?.unwrap_or(10.0);
    let curve = TrajectoryCurve::new(c).map_err(|e| CliError::Config(e.to_string()))?;
    let recs =
        intersections(m, curve, t_min, t_max).map_err(|e| CliError::Config(e.to_string()))?;
    let orthogonal = recs.iter().filter(|r| r.orthogonal).count();
    let _ = writeln!(
        out,
        "line m = {m} vs curve C = {c}, t in [{t_min}, {t_max}]: {} crossing(s)",
        recs.len()
    );
    for r in &recs {
        let _ = writeln!(
            out,
            "  t = {:+.12}  point = ({:.12}, {:.12})  slope product = {}  {}",
            r.t,
            r.point.x,
            r.point.y,
            fmt_product(r.slope_product),
            if r.orthogonal {
                "orthogonal"
            } else {
                "oblique"
            }
        );
    }
    Ok(Report {
        command: "intersect".into(),
        inputs: json!({ "m": m, "C": c, "t_min": t_min, "t_max": t_max }),
        results: json!({ "intersections": recs, "orthogonal_count": orthogonal }),
        pass: orthogonal <= 1,
    })
}

fn cmd_classify(a: ClassifyArgs, out: &mut dyn Write) -> Result<Report, CliError> {
    let c = required("C", a.c)?;
    let curve = TrajectoryCurve::new(c).map_err(|e| CliError::Config(e.to_string()))?;
    let cl = classify(curve).map_err(|e| CliError::Config(e.to_string()))?;
    let _ = writeln!(out, "curve C = {c}");
    let _ = writeln!(out, "  conic residual (rms):  {:.3e}", cl.fit.residual_rms);
    let _ = writeln!(
        out,
        "  discriminant b^2-4ac:  {:.3e}",
        cl.fit.discriminant()
    );
    let _ = writeln!(out, "  cusps at t:            {:?}", cl.cusps);
    let _ = writeln!(out, "  verdict:               {:?}", cl.verdict);
    Ok(Report {
        command: "classify".into(),
        inputs: json!({ "C": c }),
        results: serde_json::to_value(&cl).expect("serializable"),
        pass: cl.verdict != ConicVerdict::Inconclusive,
    })
}

fn cmd_plot(
    a: PlotArgs,
    spec_path: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<Report, CliError> {
    let (label, spec) = match (spec_path, a.preset, a.spec) {
        (Some(path), _, _) => {
            let text = read(&path)?;
            let spec: PlotSpec =
                serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
            (path.display().to_string(), spec)
        }
        (None, Some(preset), _) => (
            preset.clone(),
            PlotSpec::preset(&preset).map_err(|e| CliError::Usage(e.to_string()))?,
        ),
        (None, None, Some(spec)) => ("config".to_string(), spec),
        (None, None, None) => {
            return Err(CliError::Usage("plot needs --preset or --spec".into()));
        }
    };
    let svg = render_figure(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    match &a.output {
        Some(path) => {
            write(path, &svg)?;
            let _ = writeln!(
                out,
                "wrote {} ({} curves, {} lines)",
                path.display(),
                spec.curves.len(),
                spec.lines.len()
            );
        }
        None => {
            let _ = out.write_all(svg.as_bytes());
        }
    }
    Ok(Report {
        command: "plot".into(),
        inputs: json!({ "source": label, "output": a.output, "spec": spec }),
        results: json!({
            "curve_paths": spec.curves.len(),
            "line_paths": spec.lines.len(),
            "bytes": svg.len(),
        }),
        pass: true,
    })
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<Report, CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Verify { suite } => {
            let suite = suite
                .or(cfg.verify.and_then(|v| v.suite))
                .unwrap_or_else(|| "all".into());
            cmd_verify(&suite, out)
        }
        Command::Trace {
            x0,
            y0,
            p0,
            tol,
            step,
            max_arc,
        } => {
            let base = cfg.trace.unwrap_or_default();
            cmd_trace(
                TraceArgs {
                    x0: x0.or(base.x0),
                    y0: y0.or(base.y0),
                    p0: p0.or(base.p0),
                    tol: tol.or(base.tol),
                    step: step.or(base.step),
                    max_arc: max_arc.or(base.max_arc),
                },
                out,
            )
        }
        Command::Intersect { m, c, t_min, t_max } => {
            let base = cfg.intersect.unwrap_or_default();
            cmd_intersect(
                IntersectArgs {
                    m: m.or(base.m),
                    c: c.or(base.c),
                    t_min: t_min.or(base.t_min),
                    t_max: t_max.or(base.t_max),
                },
                out,
            )
        }
        Command::Classify { c } => {
            let base = cfg.classify.unwrap_or_default();
            cmd_classify(ClassifyArgs { c: c.or(base.c) }, out)
        }
        Command::Plot {
            preset,
            spec,
            output,
        } => {
            let base = cfg.plot.unwrap_or_default();
            let preset = if spec.is_some() {
                None
            } else {
                preset.or(base.preset)
            };
            cmd_plot(
                PlotArgs {
                    preset,
                    spec: base.spec,
                    output: output.or(base.output),
                },
                spec,
                out,
            )
        }
    }
}

/// Runs the command line with explicit output streams and returns the exit
/// code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let json_out = cli.json_out.clone();
    match dispatch(cli, out) {
        Ok(report) => {
            if let Some(path) = json_out {
                let text = serde_json::to_string_pretty(&report).expect("serializable");
                if let Err(e) = write(&path, &text) {
                    let _ = writeln!(err, "error: {e}");
                    return e.exit_code();
                }
            }
            if report.pass {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
