//! Command execution and report files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nlcurv_core::flow::{self, TrajectoryRow};
use nlcurv_core::functionals::{
    bending_energy, nonlocal_second_fundamental, fractional_mean_curvature, tangent_point_energy, willmore_energy,
};
use nlcurv_core::oracles::{self, OracleInputs, OracleQuantity, OracleValue};
use nlcurv_core::probes::{self, ChordArcOptions, ChordArcReport, PatchOptions, StabilityReport};
use nlcurv_core::seminorms::{self, DistanceMode, ScalarField, SeminormKind, SeminormReport};
use nlcurv_core::surface::make_primitive;
use nlcurv_core::{math, DiscreteHypersurface, EnergyReport, MeshDescriptor, Workers};
use serde::Serialize;
use thiserror::Error;

use crate::config::{Command, FieldKind, ProbeKind, RunConfig, UsageError};
use crate::io::{self, LoadError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Usage(#[from] UsageError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Compute(#[from] nlcurv_core::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Usage(_) => "UsageError",
            RunError::Load(e) => e.kind(),
            RunError::Compute(e) => e.kind(),
            RunError::Write { .. } => "IoError",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// Machine-readable record printed on failure.
    pub fn record(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind(),
            "message": self.to_string(),
        })
    }
}

/// Worker count from `NLCURV_WORKERS`, else the available parallelism.
pub fn workers_from_env() -> Result<Workers, UsageError> {
    match std::env::var("NLCURV_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Workers::new(n)),
            _ => Err(UsageError(format!("NLCURV_WORKERS must be an integer >= 1, got {v:?}"))),
        },
        Err(_) => Ok(Workers::new(std::thread::available_parallelism().map_or(1, |n| n.get()))),
    }
}

#[derive(Debug, Serialize)]
pub struct Report<'a, R> {
    pub schema_version: u32,
    pub command: Command,
    pub config: &'a RunConfig,
    pub result: R,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
}

pub struct Outcome {
    /// One line for the terminal.
    pub summary: String,
    pub report: serde_json::Value,
    pub files: Vec<PathBuf>,
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Write { path: path.to_path_buf(), source }
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(write_err(dir))?;
        Ok(Output { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(write_err(&path))?;
        self.files.push(path);
        Ok(())
    }

    fn mesh(&mut self, name: &str, mesh: &DiscreteHypersurface) -> Result<(), RunError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(write_err(parent))?;
        }
        io::save_off(mesh, &path).map_err(write_err(&path))?;
        self.files.push(path);
        Ok(())
    }
}

pub fn load(config: &RunConfig) -> Result<DiscreteHypersurface, RunError> {
    match (&config.mesh, &config.primitive) {
        (Some(path), _) => Ok(io::load_mesh(path)?),
        (None, Some(spec)) => Ok(make_primitive(&spec.to_primitive(config.seed))?),
        (None, None) => Err(UsageError("no mesh source".into()).into()),
    }
}

/// Execute one validated command and write its report into `config.out_dir`.
pub fn run(config: &RunConfig, workers: Workers) -> Result<Outcome, RunError> {
    let start = Instant::now();
    let mut out = Output::new(&config.out_dir)?;
    let mut warnings = Vec::new();
    let (summary, result) = match config.command {
        Command::Eval => eval(config, workers)?,
        Command::Probe => probe(config, workers, &mut out)?,
        Command::Sobolev => sobolev(config, workers)?,
        Command::Flow => flow(config, workers, &mut out, &mut warnings)?,
        Command::Oracle => oracle(config)?,
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: config.command,
        config,
        result,
        warnings,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let value = serde_json::to_value(&report).expect("reports serialize");
    let text = serde_json::to_string_pretty(&value).expect("reports serialize");
    out.write("report.json", text.as_bytes())?;
    Ok(Outcome { summary, report: value, files: out.files })
}

type Step = (String, serde_json::Value);

fn to_json(x: impl Serialize) -> serde_json::Value {
    serde_json::to_value(x).expect("results serialize")
}

#[derive(Serialize)]
struct VertexCurvature {
    vertex: usize,
    /// Absent for space curves, which carry no normal.
    h: Option<f64>,
    a: f64,
}

#[derive(Serialize)]
struct EvalResult {
    mesh: MeshDescriptor,
    subcritical: bool,
    willmore: EnergyReport,
    bending: EnergyReport,
    tangent_point: Option<EnergyReport>,
    pointwise: Option<Vec<VertexCurvature>>,
}

fn timed(f: impl FnOnce() -> nlcurv_core::Result<EnergyReport>) -> nlcurv_core::Result<EnergyReport> {
    let t = Instant::now();
    let mut r = f()?;
    r.wall_time_s = Some(t.elapsed().as_secs_f64());
    Ok(r)
}

fn eval(config: &RunConfig, workers: Workers) -> Result<Step, RunError> {
    let mesh = load(config)?;
    let prm = &config.energy;
    let q = config.scheme.options().build(&mesh);
    let willmore = timed(|| willmore_energy(&mesh, &q, prm, workers))?;
    let bending = timed(|| bending_energy(&mesh, &q, prm, workers))?;
    let tangent_point = if config.eval.tangent_point {
        Some(timed(|| tangent_point_energy(&mesh, &q, prm, workers))?)
    } else {
        None
    };
    let pointwise = if config.eval.pointwise {
        let rows = nlcurv_core::exec::try_map_indexed(mesh.num_vertices(), workers, |v| {
            let a = nonlocal_second_fundamental(&mesh, &q, v, prm)?;
            let h = match mesh.embedding().is_hypersurface() {
                true => Some(fractional_mean_curvature(&mesh, &q, v, prm)?),
                false => None,
            };
            Ok::<_, nlcurv_core::Error>(VertexCurvature { vertex: v, h, a })
        })?;
        Some(rows)
    } else {
        None
    };
    let summary = format!(
        "eval: W = {:.6e}, B = {:.6e} on V = {}, M = {}",
        willmore.energy,
        bending.energy,
        mesh.num_vertices(),
        mesh.num_elements()
    );
    let result = EvalResult {
        mesh: MeshDescriptor::of(&mesh),
        subcritical: prm.is_subcritical(mesh.dim()),
        willmore,
        bending,
        tangent_point,
        pointwise,
    };
    Ok((summary, to_json(result)))
}

#[derive(Serialize)]
struct AhlforsRow {
    r: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct AhlforsResult {
    vertex: usize,
    diameter: f64,
    rows: Vec<AhlforsRow>,
    min_ratio: f64,
}

#[derive(Serialize)]
struct PatchResult {
    vertex: usize,
    radius: f64,
    spacing: f64,
    grad_sup: f64,
    nodes: usize,
    rotation: [[f64; 3]; 3],
}

#[derive(Serialize)]
#[serde(untagged)]
enum ProbeResult {
    Ahlfors(AhlforsResult),
    ChordArc(ChordArcReport),
    Patch(PatchResult),
    Stability(StabilityReport),
}

#[derive(Serialize)]
struct PatchRadius {
    vertex: usize,
    radius: f64,
    grad_sup: f64,
}

fn probe(config: &RunConfig, workers: Workers, out: &mut Output) -> Result<Step, RunError> {
    let mesh = load(config)?;
    let p = &config.probe;
    let (summary, result) = match p.kind {
        ProbeKind::Ahlfors => {
            let diameter = mesh.diameter();
            let radii: Vec<f64> = p.radii.iter().map(|f| f * diameter).collect();
            let rows: Vec<AhlforsRow> = probes::ahlfors_ratio(&mesh, p.vertex, &radii)?
                .into_iter()
                .map(|(r, ratio)| AhlforsRow { r, ratio })
                .collect();
            let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
            (
                format!("ahlfors: min ratio {min_ratio:.6} over {} radii", rows.len()),
                ProbeResult::Ahlfors(AhlforsResult { vertex: p.vertex, diameter, rows, min_ratio }),
            )
        }
        ProbeKind::Chordarc => {
            let sources = if p.sources == 0 { usize::MAX } else { p.sources };
            let opts = ChordArcOptions { sources, seed: config.seed, steiner: p.steiner };
            let rep = probes::chord_arc_constant(&mesh, &opts, workers)?;
            (format!("chordarc: gamma = {:.6}", rep.gamma), ProbeResult::ChordArc(rep))
        }
        ProbeKind::Patch => {
            let opts = PatchOptions { grad_bound: p.grad_bound, ..Default::default() };
            let chart = probes::extract_patch(&mesh, p.vertex, &opts)?;
            if p.all_vertices {
                let rows = nlcurv_core::exec::try_map_indexed(mesh.num_vertices(), workers, |v| {
                    probes::extract_patch(&mesh, v, &opts).map(|c| PatchRadius { vertex: v, radius: c.radius, grad_sup: c.grad_sup })
                })?;
                let mut csv = csv::Writer::from_writer(Vec::new());
                for row in &rows {
                    csv.serialize(row).expect("in-memory csv");
                }
                out.write("patch_radii.csv", &csv.into_inner().expect("in-memory csv"))?;
            }
            (
                format!("patch: radius {:.6} at vertex {}", chart.radius, p.vertex),
                ProbeResult::Patch(PatchResult {
                    vertex: p.vertex,
                    radius: chart.radius,
                    spacing: chart.spacing,
                    grad_sup: chart.grad_sup,
                    nodes: chart.nodes.len(),
                    rotation: chart.rotation,
                }),
            )
        }
        ProbeKind::Stability => {
            let rep = probes::stability_probe(&mesh, p.alpha, p.q, workers)?;
            (
                format!("stability: R0 = {:.6}, hausdorff = {:.3e}, [u] = {:.3e}", rep.r0, rep.hausdorff, rep.u_seminorm),
                ProbeResult::Stability(rep),
            )
        }
    };
    Ok((summary, to_json(result)))
}

#[derive(Serialize)]
struct SobolevResult {
    field: FieldKind,
    seminorm: SeminormReport,
    lq: SeminormReport,
    /// `L^{q*}` with `q* = d q / (d - alpha q)`, present when `alpha q < d`.
    lq_star: Option<SeminormReport>,
}

fn field_fn(kind: FieldKind, center: math::Vec3) -> impl Fn(math::Vec3) -> f64 {
    move |x| match kind {
        FieldKind::X => x[0],
        FieldKind::Y => x[1],
        FieldKind::Z => x[2],
        FieldKind::Xy => x[0] * x[1],
        FieldKind::Zonal => 2.0 * x[2] * x[2] - x[0] * x[0] - x[1] * x[1],
        FieldKind::Radial => math::dist(x, center),
    }
}

fn lq_report(q: f64, value: f64, distance_mode: DistanceMode) -> SeminormReport {
    SeminormReport { kind: SeminormKind::Lq, alpha: None, q: Some(q), beta: None, s: None, p: None, value, distance_mode }
}

fn sobolev(config: &RunConfig, workers: Workers) -> Result<Step, RunError> {
    let mesh = load(config)?;
    let c = &config.sobolev;
    let field = ScalarField::from_fn(&mesh, field_fn(c.field, mesh.centroid()))?;
    let value = seminorms::sobolev_seminorm(&field, c.alpha, c.q, c.distance, workers)?;
    let seminorm = SeminormReport {
        kind: SeminormKind::Sobolev,
        alpha: Some(c.alpha),
        q: Some(c.q),
        beta: None,
        s: None,
        p: None,
        value,
        distance_mode: c.distance,
    };
    let lq = lq_report(c.q, seminorms::lq_norm(&field, c.q)?, c.distance);
    let d = mesh.dim() as f64;
    let lq_star = match c.alpha * c.q < d {
        true => {
            let qs = d * c.q / (d - c.alpha * c.q);
            Some(lq_report(qs, seminorms::lq_norm(&field, qs)?, c.distance))
        }
        false => None,
    };
    let summary = format!("sobolev: [f] = {value:.6e}, |f|_q = {:.6e}", lq.value);
    Ok((summary, to_json(SobolevResult { field: c.field, seminorm, lq, lq_star })))
}

#[derive(Serialize)]
struct FlowResult {
    iterations: usize,
    stop_reason: flow::StopReason,
    initial: TrajectoryRow,
    last: TrajectoryRow,
    step: f64,
}

fn flow(config: &RunConfig, workers: Workers, out: &mut Output, warnings: &mut Vec<String>) -> Result<Step, RunError> {
    let mesh = load(config)?;
    let opts = config.flow.options(config.scheme.options());
    let every = config.flow.snapshot_every;
    let mut snapshot_err = None;
    let state = flow::minimize(&mesh, &config.energy, &opts, workers, |row, m| {
        if every > 0 && row.iteration % every == 0 && snapshot_err.is_none() {
            if let Err(e) = out.mesh(&format!("snapshots/iter_{:05}.off", row.iteration), m) {
                snapshot_err = Some(e);
            }
        }
    })?;
    if let Some(e) = snapshot_err {
        return Err(e);
    }
    for w in &state.warnings {
        eprintln!("warning: {w}");
    }
    warnings.extend(state.warnings.iter().cloned());

    let mut csv = csv::Writer::from_writer(Vec::new());
    for row in &state.trajectory {
        csv.serialize(row).expect("in-memory csv");
    }
    out.write("trajectory.csv", &csv.into_inner().expect("in-memory csv"))?;
    out.mesh("final.off", &state.mesh)?;

    let initial = state.trajectory[0];
    let last = *state.trajectory.last().expect("trajectory starts with the input");
    let summary = format!(
        "flow: {} iterations ({:?}), energy {:.6e} -> {:.6e}, hausdorff {:.3e} -> {:.3e}",
        state.iteration, state.stop_reason, initial.energy, last.energy, initial.hausdorff, last.hausdorff
    );
    let result = FlowResult { iterations: state.iteration, stop_reason: state.stop_reason, initial, last, step: state.step };
    Ok((summary, to_json(result)))
}

fn oracle(config: &RunConfig) -> Result<Step, RunError> {
    let name = config.oracle.quantity.as_deref().unwrap_or_default();
    let quantity = OracleQuantity::parse(name).ok_or_else(|| UsageError(format!("unknown oracle quantity {name:?}")))?;
    let inputs = OracleInputs {
        r: config.oracle.r,
        s: config.energy.s,
        d: config.oracle.d,
        p: config.energy.p,
        q: config.energy.q,
    };
    let v: OracleValue = oracles::evaluate(quantity, inputs)?;
    let value = to_json(v);
    Ok((value.to_string(), value))
}
