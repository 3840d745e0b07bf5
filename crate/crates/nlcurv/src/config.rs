//! Run configuration: command-line flags merged over an optional TOML file.
//!
//! Every field has a documented default, so an empty file (or none) is a
//! valid starting point. A flag given on the command line always wins over
//! the file.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nlcurv_core::flow::MinimizeOptions;
use nlcurv_core::oracles::OracleQuantity;
use nlcurv_core::seminorms::DistanceMode;
use nlcurv_core::surface::Primitive;
use nlcurv_core::{
    CodimMode, DiagonalPolicy, EnergyParameters, NearField, Normalization, QuadratureOrder, SchemeOptions,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bad flags, bad values or an unreadable config file. Exit code 2.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    #[default]
    Eval,
    Probe,
    Sobolev,
    Flow,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PrimitiveKind {
    Circle,
    SpaceCircle,
    #[default]
    #[value(alias = "sphere_icosub")]
    #[serde(alias = "sphere_icosub")]
    Sphere,
    Ellipsoid,
    Torus,
    PerturbedSphere,
    Dumbbell,
}

/// Shape parameters; each kind reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrimitiveSpec {
    pub kind: PrimitiveKind,
    pub radius: f64,
    /// Icosphere subdivision level (sphere, ellipsoid, perturbed sphere).
    pub sub: usize,
    /// Polygon resolution for circles.
    pub segments: usize,
    pub amp: f64,
    pub axes: [f64; 3],
    pub major: f64,
    pub minor: f64,
    pub major_segments: usize,
    pub minor_segments: usize,
    pub neck: f64,
    pub rings: usize,
}

impl Default for PrimitiveSpec {
    fn default() -> Self {
        PrimitiveSpec {
            kind: PrimitiveKind::Sphere,
            radius: 1.0,
            sub: 2,
            segments: 256,
            amp: 0.05,
            axes: [1.0, 1.0, 2.0],
            major: 2.0,
            minor: 0.5,
            major_segments: 32,
            minor_segments: 16,
            neck: 0.1,
            rings: 32,
        }
    }
}

impl PrimitiveSpec {
    pub fn to_primitive(&self, seed: u64) -> Primitive {
        let p = self;
        match p.kind {
            PrimitiveKind::Circle => Primitive::Circle { radius: p.radius, segments: p.segments },
            PrimitiveKind::SpaceCircle => Primitive::SpaceCircle { radius: p.radius, segments: p.segments },
            PrimitiveKind::Sphere => Primitive::SphereIcosub { radius: p.radius, subdivisions: p.sub },
            PrimitiveKind::Ellipsoid => Primitive::Ellipsoid { axes: p.axes, subdivisions: p.sub },
            PrimitiveKind::Torus => Primitive::Torus {
                major: p.major,
                minor: p.minor,
                major_segments: p.major_segments,
                minor_segments: p.minor_segments,
            },
            PrimitiveKind::PerturbedSphere => Primitive::PerturbedSphere {
                radius: p.radius,
                subdivisions: p.sub,
                amplitude: p.amp,
                seed,
            },
            PrimitiveKind::Dumbbell => Primitive::Dumbbell { neck_radius: p.neck, rings: p.rings, segments: p.segments },
        }
    }

    fn validate(&self) -> Result<(), UsageError> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(usage(format!("{name} = {x} must be positive")))
            }
        };
        match self.kind {
            PrimitiveKind::Circle | PrimitiveKind::SpaceCircle => {
                positive("radius", self.radius)?;
                if self.segments < 8 {
                    return Err(usage(format!("segments = {} must be at least 8", self.segments)));
                }
            }
            PrimitiveKind::Sphere | PrimitiveKind::PerturbedSphere | PrimitiveKind::Ellipsoid => {
                if self.sub > 7 {
                    return Err(usage(format!("sub = {} is above the supported 7", self.sub)));
                }
                positive("radius", self.radius)?;
                for a in self.axes {
                    positive("axis", a)?;
                }
                if !(self.amp >= 0.0 && self.amp < 1.0) {
                    return Err(usage(format!("amp = {} must lie in [0, 1)", self.amp)));
                }
            }
            PrimitiveKind::Torus => {
                positive("major", self.major)?;
                positive("minor", self.minor)?;
                if self.minor >= self.major {
                    return Err(usage("torus needs minor < major"));
                }
                if self.major_segments < 3 || self.minor_segments < 3 {
                    return Err(usage("torus needs at least 3 segments each way"));
                }
            }
            PrimitiveKind::Dumbbell => {
                if !(self.neck > 0.0 && self.neck < 1.0) {
                    return Err(usage(format!("neck = {} must lie in (0, 1)", self.neck)));
                }
                if self.rings < 4 || self.segments < 3 {
                    return Err(usage("dumbbell needs rings >= 4 and segments >= 3"));
                }
            }
        }
        Ok(())
    }
}

/// Scheme fields left unset fall back to per-command defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub order: Option<QuadratureOrder>,
    pub diagonal_policy: Option<DiagonalPolicy>,
    pub near_field: Option<NearField>,
}

impl SchemeConfig {
    fn fill(&mut self, base: SchemeOptions) {
        self.order.get_or_insert(base.order);
        self.diagonal_policy.get_or_insert(base.diagonal_policy);
        self.near_field.get_or_insert(base.near_field);
    }

    pub fn options(&self) -> SchemeOptions {
        let base = SchemeOptions::default();
        SchemeOptions {
            order: self.order.unwrap_or(base.order),
            diagonal_policy: self.diagonal_policy.unwrap_or(base.diagonal_policy),
            near_field: self.near_field.unwrap_or(base.near_field),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub tangent_point: bool,
    /// Also report `H_s` and `|A|_s` at every vertex.
    pub pointwise: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ProbeKind {
    #[default]
    Ahlfors,
    #[value(alias = "chord_arc")]
    #[serde(alias = "chord_arc")]
    Chordarc,
    Patch,
    Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub kind: ProbeKind,
    pub vertex: usize,
    /// Ahlfors radii as fractions of the mesh diameter.
    pub radii: Vec<f64>,
    pub grad_bound: f64,
    /// Patch probe: also write the radius at every vertex to `patch_radii.csv`.
    pub all_vertices: bool,
    /// Chord-arc source count; 0 means every vertex.
    pub sources: usize,
    pub steiner: usize,
    /// Stability seminorm order `[u]_{W^{alpha,q}}`.
    pub alpha: f64,
    pub q: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            kind: ProbeKind::Ahlfors,
            vertex: 0,
            radii: vec![0.025, 0.05, 0.1, 0.2],
            grad_bound: 0.5,
            all_vertices: false,
            sources: 64,
            steiner: 1,
            alpha: 0.5,
            q: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FieldKind {
    #[default]
    X,
    Y,
    Z,
    /// Degree-two harmonic `x y`.
    Xy,
    /// Degree-two harmonic `2 z^2 - x^2 - y^2`.
    Zonal,
    /// Distance to the mesh centroid.
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SobolevConfig {
    pub field: FieldKind,
    pub alpha: f64,
    pub q: f64,
    pub distance: DistanceMode,
}

impl Default for SobolevConfig {
    fn default() -> Self {
        SobolevConfig { field: FieldKind::X, alpha: 0.5, q: 2.0, distance: DistanceMode::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub max_iter: usize,
    pub step0: f64,
    pub shrink: f64,
    pub grow: f64,
    pub grad_tol: f64,
    pub fd_step: f64,
    pub smoothing: bool,
    pub normal_motion: bool,
    pub precondition: f64,
    /// Write an OFF snapshot every this many iterations; 0 disables them.
    pub snapshot_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        let m = MinimizeOptions::default();
        FlowConfig {
            max_iter: m.max_iter,
            step0: m.step0,
            shrink: m.shrink,
            grow: m.grow,
            grad_tol: m.grad_tol,
            fd_step: m.fd_step,
            smoothing: m.smoothing,
            normal_motion: m.normal_motion,
            precondition: m.precondition,
            snapshot_every: 10,
        }
    }
}

impl FlowConfig {
    pub fn options(&self, scheme: SchemeOptions) -> MinimizeOptions {
        MinimizeOptions {
            max_iter: self.max_iter,
            step0: self.step0,
            shrink: self.shrink,
            grow: self.grow,
            grad_tol: self.grad_tol,
            fd_step: self.fd_step,
            smoothing: self.smoothing,
            normal_motion: self.normal_motion,
            precondition: self.precondition,
            scheme,
            ..MinimizeOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub quantity: Option<String>,
    #[serde(rename = "R")]
    pub r: f64,
    pub d: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { quantity: None, r: 1.0, d: 2.0 }
    }
}

/// `[energy]` as written in files: every key optional, typos rejected.
mod energy_table {
    use nlcurv_core::{CodimMode, EnergyParameters, Normalization};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    struct Table {
        s: f64,
        p: f64,
        q: f64,
        normalization: Normalization,
        codim_mode: CodimMode,
    }

    impl Default for Table {
        fn default() -> Self {
            let e = EnergyParameters::default();
            Table { s: e.s, p: e.p, q: e.q, normalization: e.normalization, codim_mode: e.codim_mode }
        }
    }

    pub fn serialize<S: Serializer>(e: &EnergyParameters, ser: S) -> Result<S::Ok, S::Error> {
        Table { s: e.s, p: e.p, q: e.q, normalization: e.normalization, codim_mode: e.codim_mode }.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<EnergyParameters, D::Error> {
        let t = Table::deserialize(de)?;
        Ok(EnergyParameters { s: t.s, p: t.p, q: t.q, normalization: t.normalization, codim_mode: t.codim_mode })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub mesh: Option<PathBuf>,
    pub primitive: Option<PrimitiveSpec>,
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(with = "energy_table")]
    pub energy: EnergyParameters,
    pub scheme: SchemeConfig,
    pub eval: EvalConfig,
    pub probe: ProbeConfig,
    pub sobolev: SobolevConfig,
    pub flow: FlowConfig,
    pub oracle: OracleConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Eval,
            mesh: None,
            primitive: None,
            seed: 0,
            out_dir: PathBuf::from("nlcurv-out"),
            energy: EnergyParameters::default(),
            scheme: SchemeConfig::default(),
            eval: EvalConfig::default(),
            probe: ProbeConfig::default(),
            sobolev: SobolevConfig::default(),
            flow: FlowConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, UsageError> {
        toml::from_str(text).map_err(|e| usage(format!("config file: {e}")))
    }

    /// Range checks, and per-command scheme defaults for unset fields.
    pub fn validate(mut self) -> Result<Self, UsageError> {
        self.energy.validate().map_err(|e| usage(e.to_string()))?;
        let base = match self.command {
            Command::Flow => MinimizeOptions::default().scheme,
            _ => SchemeOptions::default(),
        };
        self.scheme.fill(base);
        if self.command != Command::Oracle {
            match (&self.mesh, &self.primitive) {
                (Some(_), Some(_)) => return Err(usage("give either a mesh file or a primitive, not both")),
                (None, None) => return Err(usage("no mesh: pass --mesh <file> or --primitive <kind>")),
                (None, Some(p)) => p.validate()?,
                (Some(_), None) => {}
            }
        }
        match self.command {
            Command::Probe => {
                let p = &self.probe;
                if p.radii.is_empty() || p.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    return Err(usage("radii must be positive"));
                }
                if !(p.grad_bound > 0.0 && p.grad_bound.is_finite()) {
                    return Err(usage("grad-bound must be positive"));
                }
                if p.steiner == 0 {
                    return Err(usage("steiner must be at least 1"));
                }
                check_order(p.alpha, p.q)?;
            }
            Command::Sobolev => check_order(self.sobolev.alpha, self.sobolev.q)?,
            Command::Flow => {
                let f = &self.flow;
                if !(f.step0 > 0.0) || !(f.shrink > 0.0 && f.shrink < 1.0) || !(f.grow >= 1.0) {
                    return Err(usage("flow needs step0 > 0, shrink in (0, 1), grow >= 1"));
                }
                if !(f.grad_tol >= 0.0) || !(f.fd_step > 0.0) || !(f.precondition >= 0.0) {
                    return Err(usage("flow needs grad-tol >= 0, fd-step > 0, precondition >= 0"));
                }
            }
            Command::Oracle => {
                let name = self.oracle.quantity.as_deref().ok_or_else(|| usage("oracle needs a quantity"))?;
                if OracleQuantity::parse(name).is_none() {
                    return Err(usage(format!("unknown oracle quantity {name:?}")));
                }
                if !(self.oracle.r > 0.0 && self.oracle.r.is_finite()) {
                    return Err(usage("R must be positive"));
                }
                if !(self.oracle.d >= 1.0) {
                    return Err(usage("d must be at least 1"));
                }
            }
            Command::Eval => {}
        }
        Ok(self)
    }
}

fn check_order(alpha: f64, q: f64) -> Result<(), UsageError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(usage(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(usage(format!("q = {q} must be at least 1")));
    }
    Ok(())
}

#[derive(Debug, Parser)]
#[command(name = "nlcurv", version, about = "Nonlocal curvature functionals and probes on meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Fractional Willmore and bending energies (and optionally tangent-point).
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        tangent_point: bool,
        #[arg(long)]
        pointwise: bool,
    },
    /// Geometric probes: ahlfors, chordarc, patch or stability.
    Probe {
        kind: Option<ProbeKind>,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        args: ProbeArgs,
    },
    /// Fractional Sobolev seminorm of a test field.
    Sobolev {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, value_enum)]
        field: Option<FieldKind>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, value_enum)]
        distance: Option<DistanceArg>,
    },
    /// Area-constrained descent on the bending energy.
    Flow {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        args: FlowArgs,
    },
    /// Closed-form reference values.
    Oracle {
        quantity: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "R", alias = "r")]
        r: Option<f64>,
        #[arg(long)]
        d: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML file with defaults; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Tangent-point exponent.
    #[arg(long = "tp-q")]
    pub tp_q: Option<f64>,
    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,
    #[arg(long, value_enum)]
    pub codim: Option<CodimArg>,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    /// OFF or OBJ file.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub primitive: Option<PrimitiveKind>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub sub: Option<usize>,
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long)]
    pub amp: Option<f64>,
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub axes: Option<Vec<f64>>,
    #[arg(long)]
    pub major: Option<f64>,
    #[arg(long)]
    pub minor: Option<f64>,
    #[arg(long)]
    pub major_segments: Option<usize>,
    #[arg(long)]
    pub minor_segments: Option<usize>,
    #[arg(long)]
    pub neck: Option<f64>,
    #[arg(long)]
    pub rings: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    #[arg(long, value_enum)]
    pub order: Option<OrderArg>,
    #[arg(long, value_enum)]
    pub diagonal: Option<DiagonalArg>,
    #[arg(long, value_enum)]
    pub near_field: Option<NearFieldArg>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub vertex: Option<usize>,
    /// Comma-separated radii as fractions of the diameter.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long)]
    pub grad_bound: Option<f64>,
    #[arg(long)]
    pub all_vertices: bool,
    #[arg(long)]
    pub sources: Option<usize>,
    #[arg(long)]
    pub steiner: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub step0: Option<f64>,
    #[arg(long)]
    pub shrink: Option<f64>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub precondition: Option<f64>,
    #[arg(long)]
    pub smoothing: Option<bool>,
    #[arg(long)]
    pub snapshot_every: Option<usize>,
}

macro_rules! value_enum_mirror {
    ($name:ident => $target:ty { $($v:ident => $t:expr),* $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
        #[value(rename_all = "snake_case")]
        pub enum $name { $($v),* }
        impl From<$name> for $target {
            fn from(x: $name) -> $target {
                match x { $($name::$v => $t),* }
            }
        }
    };
}

value_enum_mirror!(OrderArg => QuadratureOrder {
    Centroid => QuadratureOrder::Centroid,
    Gauss3 => QuadratureOrder::Gauss3,
    Gauss7 => QuadratureOrder::Gauss7,
});
value_enum_mirror!(DiagonalArg => DiagonalPolicy {
    SkipSameElement => DiagonalPolicy::SkipSameElement,
    SkipVertexStar => DiagonalPolicy::SkipVertexStar,
});
value_enum_mirror!(NearFieldArg => NearField {
    Omit => NearField::Omit,
    Quadric => NearField::OsculatingQuadric,
});
value_enum_mirror!(NormalizationArg => Normalization {
    Raw => Normalization::Raw,
    LimitNormalized => Normalization::LimitNormalized,
});
value_enum_mirror!(CodimArg => CodimMode {
    Hypersurface => CodimMode::Hypersurface,
    Projection => CodimMode::Projection,
});
value_enum_mirror!(DistanceArg => DistanceMode {
    Extrinsic => DistanceMode::Extrinsic,
    Intrinsic => DistanceMode::Intrinsic,
});

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl CommonArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.out_dir, self.out.clone());
        set(&mut c.seed, self.seed);
        set(&mut c.energy.s, self.s);
        set(&mut c.energy.p, self.p);
        set(&mut c.energy.q, self.tp_q);
        set(&mut c.energy.normalization, self.normalization.map(Into::into));
        set(&mut c.energy.codim_mode, self.codim.map(Into::into));
    }
}

impl MeshArgs {
    fn apply(&self, c: &mut RunConfig) -> Result<(), UsageError> {
        if let Some(path) = &self.mesh {
            c.mesh = Some(path.clone());
            c.primitive = None;
        }
        if let Some(kind) = self.primitive {
            if self.mesh.is_some() {
                return Err(usage("give either --mesh or --primitive, not both"));
            }
            c.mesh = None;
            c.primitive.get_or_insert_with(Default::default).kind = kind;
        }
        let shape_flags = self.radius.is_some()
            || self.sub.is_some()
            || self.segments.is_some()
            || self.amp.is_some()
            || self.axes.is_some()
            || self.major.is_some()
            || self.minor.is_some()
            || self.major_segments.is_some()
            || self.minor_segments.is_some()
            || self.neck.is_some()
            || self.rings.is_some();
        let Some(p) = c.primitive.as_mut() else {
            if shape_flags {
                return Err(usage("shape flags need a primitive"));
            }
            return Ok(());
        };
        set(&mut p.radius, self.radius);
        set(&mut p.sub, self.sub);
        set(&mut p.segments, self.segments);
        set(&mut p.amp, self.amp);
        if let Some(a) = &self.axes {
            p.axes = [a[0], a[1], a[2]];
        }
        set(&mut p.major, self.major);
        set(&mut p.minor, self.minor);
        set(&mut p.major_segments, self.major_segments);
        set(&mut p.minor_segments, self.minor_segments);
        set(&mut p.neck, self.neck);
        set(&mut p.rings, self.rings);
        Ok(())
    }
}

impl SchemeArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(o) = self.order {
            c.scheme.order = Some(o.into());
        }
        if let Some(d) = self.diagonal {
            c.scheme.diagonal_policy = Some(d.into());
        }
        if let Some(n) = self.near_field {
            c.scheme.near_field = Some(n.into());
        }
    }
}

impl CliCommand {
    fn common(&self) -> &CommonArgs {
        match self {
            CliCommand::Eval { common, .. }
            | CliCommand::Probe { common, .. }
            | CliCommand::Sobolev { common, .. }
            | CliCommand::Flow { common, .. }
            | CliCommand::Oracle { common, .. } => common,
        }
    }
}

/// Merge parsed flags over the config file they name (if any) and validate.
pub fn resolve(cli: &Cli) -> Result<RunConfig, UsageError> {
    let common = cli.command.common();
    let mut c = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    common.apply(&mut c);
    match &cli.command {
        CliCommand::Eval { mesh, scheme, tangent_point, pointwise, .. } => {
            c.command = Command::Eval;
            mesh.apply(&mut c)?;
            scheme.apply(&mut c);
            c.eval.tangent_point |= *tangent_point;
            c.eval.pointwise |= *pointwise;
        }
        CliCommand::Probe { kind, mesh, args, .. } => {
            c.command = Command::Probe;
            mesh.apply(&mut c)?;
            set(&mut c.probe.kind, *kind);
            set(&mut c.probe.vertex, args.vertex);
            set(&mut c.probe.radii, args.radii.clone());
            set(&mut c.probe.grad_bound, args.grad_bound);
            c.probe.all_vertices |= args.all_vertices;
            set(&mut c.probe.sources, args.sources);
            set(&mut c.probe.steiner, args.steiner);
            set(&mut c.probe.alpha, args.alpha);
            set(&mut c.probe.q, args.q);
        }
        CliCommand::Sobolev { mesh, field, alpha, q, distance, .. } => {
            c.command = Command::Sobolev;
            mesh.apply(&mut c)?;
            set(&mut c.sobolev.field, *field);
            set(&mut c.sobolev.alpha, *alpha);
            set(&mut c.sobolev.q, *q);
            set(&mut c.sobolev.distance, distance.map(Into::into));
        }
        CliCommand::Flow { mesh, scheme, args, .. } => {
            c.command = Command::Flow;
            mesh.apply(&mut c)?;
            scheme.apply(&mut c);
            set(&mut c.flow.max_iter, args.max_iter);
            set(&mut c.flow.step0, args.step0);
            set(&mut c.flow.shrink, args.shrink);
            set(&mut c.flow.grad_tol, args.grad_tol);
            set(&mut c.flow.precondition, args.precondition);
            set(&mut c.flow.smoothing, args.smoothing);
            set(&mut c.flow.snapshot_every, args.snapshot_every);
        }
        CliCommand::Oracle { quantity, r, d, .. } => {
            c.command = Command::Oracle;
            if quantity.is_some() {
                c.oracle.quantity = quantity.clone();
            }
            set(&mut c.oracle.r, *r);
            set(&mut c.oracle.d, *d);
        }
    }
    c.validate()
}

/// Parse argv into a validated config.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, ParseFailure>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(ParseFailure::Clap)?;
    resolve(&cli).map_err(ParseFailure::Usage)
}

#[derive(Debug, Error)]
pub enum ParseFailure {
    /// Includes `--help` and `--version`, which clap reports as errors.
    #[error(transparent)]
    Clap(clap::Error),
    #[error(transparent)]
    Usage(UsageError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_documented_ones() {
        let c = parse_config(["nlcurv", "eval", "--primitive", "sphere"]).unwrap();
        assert_eq!((c.energy.s, c.energy.p), (0.5, 4.0));
        assert_eq!(c.energy.normalization, Normalization::Raw);
        assert_eq!(c.scheme.order, Some(QuadratureOrder::Gauss3));
        assert_eq!(c.scheme.diagonal_policy, Some(DiagonalPolicy::SkipVertexStar));
    }

    #[test]
    fn flow_gets_its_own_scheme_defaults() {
        let c = parse_config(["nlcurv", "flow", "--primitive", "perturbed_sphere"]).unwrap();
        assert_eq!(c.scheme.near_field, Some(NearField::Omit));
        let c = parse_config(["nlcurv", "flow", "--primitive", "perturbed_sphere", "--near-field", "quadric"]).unwrap();
        assert_eq!(c.scheme.near_field, Some(NearField::OsculatingQuadric));
    }

    #[test]
    fn file_round_trips() {
        let c = parse_config(["nlcurv", "probe", "chordarc", "--primitive", "torus", "--seed", "4"]).unwrap();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn bad_values_are_usage_errors() {
        for argv in [
            vec!["nlcurv", "eval", "--primitive", "sphere", "--s", "1.5"],
            vec!["nlcurv", "eval"],
            vec!["nlcurv", "eval", "--sub", "2"],
            vec!["nlcurv", "eval", "--primitive", "circle", "--segments", "4"],
            vec!["nlcurv", "oracle", "torus_fmc"],
            vec!["nlcurv", "sobolev", "--primitive", "sphere", "--alpha", "1"],
        ] {
            assert!(matches!(parse_config(argv.clone()), Err(ParseFailure::Usage(_))), "{argv:?}");
        }
        assert!(matches!(parse_config(["nlcurv", "eval", "--bogus"]), Err(ParseFailure::Clap(_))));
    }
}
