//! `stokes`: command-line front end for the Stokes geometry engine.
//!
//! Exit codes: 0 success, 1 input error, 2 numerical failure. On a numerical
//! failure the output file is still written, with `"status"` set to
//! `"partial"` or `"failed"`.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use stokes_core::geometry::{all_critical_angles, all_turning_points};
use stokes_core::io::{parse_angle, parse_region, to_json_string, GeometryDocument, Status, SCHEMA_VERSION};
use stokes_core::noumi_yamada::{continue_f, ny_geometry, ScanOptions};
use stokes_core::tracer::trace_from;
use stokes_core::{
    build_geometry_with, render_svg, sweep_theta, t_path_scan, CharSymbol, Complex, GeometryConfig,
    NYProblem, Region, RenderStyle, RootSurface, StokesGeometry, SymbolProblem, Tolerances, WkbError,
};

#[derive(Parser)]
#[command(name = "stokes", version, about = "Stokes geometry of exact-WKB symbols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ordinary turning points (zeros of the discriminant).
    TurningPoints(Common),
    /// Virtual turning points generated from the ordinary ones.
    Virtual(Common),
    /// Trace the Stokes curves emanating from one turning point.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Index of the turning point in the (sorted) list of all points.
        #[arg(long)]
        tp: usize,
        /// Only this direction (default: all).
        #[arg(long)]
        direction: Option<usize>,
    },
    /// Full Stokes geometry at one value of arg eta.
    Geometry(Common),
    /// Sweep arg eta and report topology changes.
    SweepTheta {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, default_value_t = 25)]
        steps: usize,
    },
    /// Angles at which two turning points become connected.
    CriticalAngles(Common),
    /// Geometry of the Noumi-Yamada linear system at one t.
    NyGeometry {
        #[command(flatten)]
        common: Common,
        /// `re,im`; defaults to the problem's t (or the start of its path).
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
    },
    /// Scan the Noumi-Yamada geometry along the problem's t path.
    NyScan {
        #[command(flatten)]
        common: Common,
        /// Samples per path segment.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Bisection resolution in t.
        #[arg(long, default_value_t = 1e-5)]
        resolution: f64,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Problem file (JSON).
    #[arg(long)]
    problem: PathBuf,
    /// arg eta in radians; accepts expressions such as `pi/2` or `5pi/12`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    arg_eta: String,
    /// Region `x0,y0,x1,y1` (overrides the problem file).
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    /// Write JSON here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an SVG rendering here (sweeps write one file per sample).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Depth of the virtual-turning-point iteration.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    tol_root: Option<f64>,
    #[arg(long)]
    tol_tp: Option<f64>,
    #[arg(long)]
    tol_quad: Option<f64>,
    #[arg(long)]
    tol_clearance: Option<f64>,
    #[arg(long)]
    tol_level: Option<f64>,
    #[arg(long)]
    tol_hit: Option<f64>,
}

const DEFAULT_REGION: f64 = 2.0;
const SYMBOL_VTP_DEPTH: usize = 2;
const NY_VTP_DEPTH: usize = 1;

impl Common {
    fn tolerances(&self) -> anyhow::Result<Tolerances> {
        let mut t = Tolerances::default();
        for (slot, v, name) in [
            (&mut t.tol_root, self.tol_root, "tol-root"),
            (&mut t.tol_tp, self.tol_tp, "tol-tp"),
            (&mut t.tol_quad, self.tol_quad, "tol-quad"),
            (&mut t.tp_clearance, self.tol_clearance, "tol-clearance"),
        ] {
            if let Some(v) = v {
                *slot = positive(v, name)?;
            }
        }
        Ok(t)
    }

    fn config(&self, region: Region) -> anyhow::Result<GeometryConfig> {
        let mut c = GeometryConfig::new(parse_angle(&self.arg_eta)?, region);
        if let Some(v) = self.tol_level {
            c.tol_level = positive(v, "tol-level")?;
        }
        if let Some(v) = self.tol_hit {
            c.hit_level_tol = positive(v, "tol-hit")?;
        }
        c.validate()?;
        Ok(c)
    }

    fn region(&self, from_file: Option<Region>) -> anyhow::Result<Region> {
        Ok(match &self.region {
            Some(s) => parse_region(s)?,
            None => from_file.unwrap_or_else(|| Region::square(DEFAULT_REGION)),
        })
    }

    fn read_problem(&self) -> anyhow::Result<String> {
        std::fs::read_to_string(&self.problem)
            .map_err(|e| WkbError::Input(format!("cannot read {}: {e}", self.problem.display())))
            .map_err(Into::into)
    }

    fn symbol_problem(&self) -> anyhow::Result<(CharSymbol, Region)> {
        let p = SymbolProblem::from_json(&self.read_problem()?)
            .with_context(|| format!("in {}", self.problem.display()))?;
        let region = self.region(p.region.map(|r| r.0))?;
        Ok((p.symbol, region))
    }

    fn surface(&self) -> anyhow::Result<RootSurface> {
        let (symbol, region) = self.symbol_problem()?;
        Ok(RootSurface::new(symbol, region, self.tolerances()?)?)
    }
}

fn positive(v: f64, name: &str) -> anyhow::Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(WkbError::Input(format!("--{name} must be a positive number, got {v}")).into())
    }
}

fn parse_complex(s: &str) -> anyhow::Result<Complex> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || WkbError::Input(format!("expected `re,im`, got {s:?}"));
    match parts.as_slice() {
        [re] => Ok(Complex::new(re.parse().map_err(|_| bad())?, 0.0)),
        [re, im] => Ok(Complex::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?)),
        _ => Err(bad().into()),
    }
}

/// `{"schema": 1, "status": ..., <fields of body>}`.
fn envelope(status: Status, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA_VERSION));
    m.insert("status".into(), serde_json::to_value(status).expect("status serializes"));
    if let Value::Object(fields) = body {
        m.extend(fields);
    }
    Value::Object(m)
}

fn emit(out: Option<&Path>, doc: &Value) -> anyhow::Result<()> {
    let text = to_json_string(doc);
    match out {
        Some(path) => {
            std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}").and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e).context("writing output"),
                _ => {}
            }
        }
    }
    Ok(())
}

fn write_svg(path: &Path, g: &StokesGeometry) -> anyhow::Result<()> {
    std::fs::write(path, render_svg(g, &RenderStyle::default()))
        .with_context(|| format!("writing {}", path.display()))
}

/// `dir/stem_<suffix>.svg` next to `path`.
fn numbered(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("geometry");
    path.with_file_name(format!("{stem}_{suffix}.svg"))
}

fn geometry_status(g: &StokesGeometry) -> Status {
    if g.failures.is_empty() {
        Status::Ok
    } else {
        Status::Partial
    }
}

/// Outcome of a subcommand: the document written and whether it is complete.
struct Outcome {
    doc: Value,
    status: Status,
}

fn run(command: &Command) -> anyhow::Result<Outcome> {
    match command {
        Command::TurningPoints(c) => {
            let s = c.surface()?;
            let doc = envelope(Status::Ok, json!({ "turning_points": s.turning_points() }));
            Ok(Outcome { doc, status: Status::Ok })
        }
        Command::Virtual(c) => {
            let s = c.surface()?;
            let depth = c.depth.unwrap_or(SYMBOL_VTP_DEPTH);
            let vtps = stokes_core::virtual_tp::virtual_turning_points(&s, depth)?;
            let doc = envelope(
                Status::Ok,
                json!({ "turning_points": s.turning_points(), "virtual_turning_points": vtps }),
            );
            Ok(Outcome { doc, status: Status::Ok })
        }
        Command::Trace { common: c, tp, direction } => {
            let s = c.surface()?;
            let config = c.config(*s.region())?;
            let tps = all_turning_points(&s, c.depth.unwrap_or(SYMBOL_VTP_DEPTH))?;
            if *tp >= tps.len() {
                bail!(WkbError::Input(format!("--tp {tp}: only {} turning points", tps.len())));
            }
            let mut curves = Vec::new();
            let mut failures = Vec::new();
            for (i, r) in trace_from(&s, *tp, &config, &tps).into_iter().enumerate() {
                if direction.is_some_and(|d| d != i) {
                    continue;
                }
                match r {
                    Ok(curve) => curves.push(curve),
                    Err(e) => failures.push(json!({ "direction": i, "message": e.error.to_string() })),
                }
            }
            let status = if failures.is_empty() { Status::Ok } else { Status::Partial };
            // reuse the document's curve layout
            let g = StokesGeometry {
                symbol: s.symbol().clone(),
                theta: config.theta,
                config,
                turning_points: tps,
                curves,
                crossings: Vec::new(),
                degeneracies: Vec::new(),
                failures: Vec::new(),
            };
            if let Some(path) = &c.svg {
                write_svg(path, &g)?;
            }
            let d = GeometryDocument::from_geometry(&g);
            let doc = envelope(
                status,
                json!({ "turning_points": d.turning_points, "curves": d.curves, "failures": failures }),
            );
            Ok(Outcome { doc, status })
        }
        Command::Geometry(c) => {
            let s = c.surface()?;
            let config = c.config(*s.region())?;
            let tps = all_turning_points(&s, c.depth.unwrap_or(SYMBOL_VTP_DEPTH))?;
            let g = build_geometry_with(&s, &tps, &config);
            if let Some(path) = &c.svg {
                write_svg(path, &g)?;
            }
            let status = geometry_status(&g);
            Ok(Outcome { doc: serde_json::to_value(GeometryDocument::from_geometry(&g))?, status })
        }
        Command::SweepTheta { common: c, from, to, steps } => {
            let s = c.surface()?;
            let config = c.config(*s.region())?;
            let (from, to) = (parse_angle(from)?, parse_angle(to)?);
            if *steps < 2 {
                bail!(WkbError::Input("--steps must be at least 2".into()));
            }
            let tps = all_turning_points(&s, c.depth.unwrap_or(SYMBOL_VTP_DEPTH))?;
            let result = sweep_theta(&s, &tps, from, to, *steps, &config)?;
            if let Some(path) = &c.svg {
                for (i, sample) in result.samples.iter().enumerate() {
                    let g = build_geometry_with(&s, &tps, &config.with_theta(sample.theta));
                    write_svg(&numbered(path, &format!("{i:03}")), &g)?;
                }
            }
            let status = if result.samples.iter().all(|x| x.error.is_none()) { Status::Ok } else { Status::Partial };
            Ok(Outcome { doc: envelope(status, serde_json::to_value(&result)?), status })
        }
        Command::CriticalAngles(c) => {
            let s = c.surface()?;
            let tps = all_turning_points(&s, c.depth.unwrap_or(SYMBOL_VTP_DEPTH))?;
            let angles = all_critical_angles(&s, &tps);
            let doc = envelope(Status::Ok, json!({ "turning_points": tps, "critical_angles": angles }));
            Ok(Outcome { doc, status: Status::Ok })
        }
        Command::NyGeometry { common: c, t } => {
            let p = NYProblem::from_json(&c.read_problem()?).with_context(|| format!("in {}", c.problem.display()))?;
            let params = p.params()?;
            let mut state = p.initial_state()?;
            if let Some(t) = t {
                let t = parse_complex(t)?;
                state = *continue_f(&params, &state, &[state.t, t])?.last().expect("two nodes");
            }
            let config = c.config(c.region(p.region.map(|r| r.0))?)?;
            let g = ny_geometry(&params, &state, &config, c.tolerances()?, c.depth.unwrap_or(NY_VTP_DEPTH))?;
            if let Some(path) = &c.svg {
                write_svg(path, &g)?;
            }
            let status = geometry_status(&g);
            let mut doc = serde_json::to_value(GeometryDocument::from_geometry(&g))?;
            doc["ny_state"] = serde_json::to_value(state)?;
            Ok(Outcome { doc, status })
        }
        Command::NyScan { common: c, samples, resolution } => {
            let p = NYProblem::from_json(&c.read_problem()?).with_context(|| format!("in {}", c.problem.display()))?;
            let Some(path) = p.t_path.clone().filter(|q| q.len() >= 2) else {
                bail!(WkbError::Input("ny-scan needs a \"t_path\" with at least two points".into()));
            };
            let params = p.params()?;
            let start = p.initial_state()?;
            let config = c.config(c.region(p.region.map(|r| r.0))?)?;
            let options = ScanOptions {
                tolerances: c.tolerances()?,
                vtp_depth: c.depth.unwrap_or(NY_VTP_DEPTH),
                samples_per_segment: (*samples).max(2),
                resolution: positive(*resolution, "resolution")?,
            };
            let scan = t_path_scan(&params, &start, &path, &config, &options)?;
            if let Some(svg) = &c.svg {
                let tol = options.tolerances;
                for (k, e) in scan.events.iter().enumerate() {
                    for (state, side) in [(&e.states.0, "before"), (&e.states.1, "after")] {
                        let g = ny_geometry(&params, state, &config, tol, options.vtp_depth)?;
                        write_svg(&numbered(svg, &format!("event{k}_{side}")), &g)?;
                    }
                }
            }
            let status = if scan.samples.iter().all(|x| x.error.is_none()) { Status::Ok } else { Status::Partial };
            Ok(Outcome { doc: envelope(status, serde_json::to_value(&scan)?), status })
        }
    }
}

fn common(command: &Command) -> &Common {
    match command {
        Command::TurningPoints(c) | Command::Virtual(c) | Command::Geometry(c) | Command::CriticalAngles(c) => c,
        Command::Trace { common, .. }
        | Command::SweepTheta { common, .. }
        | Command::NyGeometry { common, .. }
        | Command::NyScan { common, .. } => common,
    }
}

/// 1 for input errors, 2 for numerical failures.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(w) = cause.downcast_ref::<WkbError>() {
            return match w {
                WkbError::Input(_) | WkbError::InvalidSymbol(_) => 1,
                _ => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let out = common(&cli.command).out.clone();
    match run(&cli.command) {
        Ok(Outcome { doc, status }) => {
            if let Err(e) = emit(out.as_deref(), &doc) {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            if status == Status::Ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("warning: some parts failed; see \"status\" and \"failures\" in the output");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e:#}");
            if code == 2 {
                let doc = envelope(Status::Failed, json!({ "message": format!("{e:#}") }));
                if let Err(w) = emit(out.as_deref(), &doc) {
                    eprintln!("error: {w:#}");
                }
            }
            ExitCode::from(code)
        }
    }
}
