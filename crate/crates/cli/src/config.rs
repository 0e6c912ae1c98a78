//! Run configuration: a TOML file with `[grid] [warp] [init] [solver]
//! [analysis] [output]` sections, overridden field by field by flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use warpgraph::fiber::io::{read_binary, read_csv};
use warpgraph::{
    Error, FiberGrid, IntervalDomain, Method, Preset, Result, ScalarField, SolverConfig,
    WarpingFunction,
};

pub const OUT_ENV: &str = "WARPGRAPH_OUT";
pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ClassifyWarp,
    VerifyIdentities,
    VerifyCounterexamples,
    Solve,
    Flow,
    Hypotheses,
    AreaGrowth,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ClassifyWarp => "classify-warp",
            Command::VerifyIdentities => "verify-identities",
            Command::VerifyCounterexamples => "verify-counterexamples",
            Command::Solve => "solve",
            Command::Flow => "flow",
            Command::Hypotheses => "hypotheses",
            Command::AreaGrowth => "area-growth",
        }
    }

    pub fn needs_grid(self) -> bool {
        matches!(
            self,
            Command::Solve | Command::Flow | Command::Hypotheses | Command::AreaGrowth
        )
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub grid: Option<GridSection>,
    pub warp: Option<WarpSection>,
    pub init: Option<InitSection>,
    pub solver: Option<SolverConfig>,
    pub analysis: Option<AnalysisSection>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Shorthand such as `torus2:64` or `box1:33`.
    pub spec: Option<String>,
    pub topology: Option<Topo>,
    pub resolution: Option<Vec<usize>>,
    pub extents: Option<Vec<f64>>,
    pub origin: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpSection {
    pub preset: Option<String>,
    pub table: Option<PathBuf>,
    pub domain: Option<[f64; 2]>,
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub preset: Option<String>,
    pub file: Option<PathBuf>,
    pub modes: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub sign_tol: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub center: Option<[f64; 3]>,
    pub which: Option<Vec<String>>,
    pub counts: Option<Vec<usize>>,
    pub required_order: Option<f64>,
    pub solve_first: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub fields: Option<FieldFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topo {
    Torus,
    Box,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldFormat {
    Csv,
    Binary,
    None,
}

impl FieldFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(FieldFormat::Csv),
            "binary" | "bin" => Ok(FieldFormat::Binary),
            "none" => Ok(FieldFormat::None),
            _ => Err(Error::Config(format!("unknown field format `{s}`"))),
        }
    }
}

/// Values given on the command line; `None` leaves the file value alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<String>,
    pub preset: Option<String>,
    pub table: Option<PathBuf>,
    pub domain: Option<[f64; 2]>,
    pub init: Option<String>,
    pub init_file: Option<PathBuf>,
    pub method: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub snapshot_every: Option<usize>,
    pub sign_tol: Option<f64>,
    pub which: Option<Vec<String>>,
    pub counts: Option<Vec<usize>>,
    pub radii: Option<Vec<f64>>,
    pub center: Option<[f64; 3]>,
    pub solve_first: bool,
    pub out: Option<PathBuf>,
    pub fields: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub topology: Topo,
    pub resolution: Vec<usize>,
    pub extents: Vec<f64>,
    pub origin: Vec<f64>,
}

impl GridSpec {
    /// `torus<d>:<n>` or `box<d>:<n>` on the unit cube.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("grid `{s}` is not of the form torus2:64 or box1:33"));
        let (head, n) = s.split_once(':').ok_or_else(bad)?;
        let (topology, d) = if let Some(d) = head.strip_prefix("torus") {
            (Topo::Torus, d)
        } else if let Some(d) = head.strip_prefix("box") {
            (Topo::Box, d)
        } else {
            return Err(bad());
        };
        let d: usize = d.parse().map_err(|_| bad())?;
        let n: usize = n.parse().map_err(|_| bad())?;
        if !(1..=2).contains(&d) {
            return Err(Error::Config(format!("grid dimension {d} must be 1 or 2")));
        }
        Ok(Self {
            topology,
            resolution: vec![n; d],
            extents: vec![1.0; d],
            origin: vec![0.0; d],
        })
    }

    fn from_section(s: &GridSection) -> Result<Self> {
        let mut g = match &s.spec {
            Some(spec) => Self::parse(spec)?,
            None => {
                let resolution = s.resolution.clone().ok_or_else(|| {
                    Error::Config("[grid] needs `spec` or `resolution`".into())
                })?;
                let d = resolution.len();
                Self {
                    topology: s.topology.unwrap_or(Topo::Torus),
                    resolution,
                    extents: vec![1.0; d],
                    origin: vec![0.0; d],
                }
            }
        };
        if let Some(t) = s.topology {
            g.topology = t;
        }
        if let Some(r) = &s.resolution {
            g.resolution = r.clone();
        }
        if let Some(e) = &s.extents {
            g.extents = e.clone();
        }
        if let Some(o) = &s.origin {
            g.origin = o.clone();
        }
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.resolution.len();
        if !(1..=2).contains(&d) || self.extents.len() != d || self.origin.len() != d {
            return Err(Error::Config(format!(
                "grid needs 1 or 2 axes with matching resolution, extents and origin (got {}, {}, {})",
                d,
                self.extents.len(),
                self.origin.len()
            )));
        }
        if let Some(r) = self.resolution.iter().find(|r| **r < MIN_RESOLUTION) {
            return Err(Error::Config(format!(
                "resolution {r} is below the minimum of {MIN_RESOLUTION} nodes per axis"
            )));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<FiberGrid> {
        self.validate()?;
        match self.topology {
            Topo::Torus => FiberGrid::periodic(&self.extents, &self.resolution)?.with_origin(&self.origin),
            Topo::Box => FiberGrid::bounded(&self.origin, &self.extents, &self.resolution),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarpSpec {
    pub preset: Option<String>,
    pub table: Option<PathBuf>,
    pub domain: Option<[f64; 2]>,
    pub scale: f64,
}

impl WarpSpec {
    pub fn build(&self) -> Result<WarpingFunction> {
        let mut f = match (&self.preset, &self.table) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("[warp] takes either `preset` or `table`, not both".into()))
            }
            (_, Some(path)) => WarpingFunction::from_csv(path)?,
            (Some(name), None) => WarpingFunction::preset(Preset::parse(name).ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::Config(format!("unknown warp preset `{name}` (known: {})", names.join(", ")))
            })?),
            (None, None) => WarpingFunction::cosh(),
        };
        if let Some([a, b]) = self.domain {
            f = f.with_domain(IntervalDomain::new(a, b)?)?;
        }
        if self.scale != 1.0 {
            f = f.scaled(self.scale)?;
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitSpec {
    pub preset: String,
    pub file: Option<PathBuf>,
    pub modes: usize,
}

/// Built-in initial fields. Coordinates are relative to the grid origin
/// except for `tanh` and `scherk`, which use absolute coordinates.
pub const INIT_PRESETS: &str =
    "zero, constant:c, affine:a,b,c, sincos:A, tanh[:s], random:A, scherk:a";

impl InitSpec {
    pub fn build(&self, grid: &FiberGrid, seed: u64) -> Result<ScalarField> {
        if let Some(path) = &self.file {
            return match path.extension().and_then(|e| e.to_str()) {
                Some("bin") => read_binary(path, grid),
                _ => read_csv(path, grid),
            };
        }
        let spec = self.preset.as_str();
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Config(format!("init `{spec}` has a non-numeric argument")))?
        };
        let arity = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::Config(format!("init `{name}` takes {k} argument(s); known presets: {INIT_PRESETS}")))
            }
        };
        let o = grid.origin().to_vec();
        let ext = grid.extents().to_vec();
        let ly = if grid.dim() == 2 { ext[1] } else { 1.0 };
        let oy = if grid.dim() == 2 { o[1] } else { 0.0 };
        let tau = std::f64::consts::TAU;
        Ok(match name {
            "zero" => {
                arity(0)?;
                ScalarField::zeros(*grid)
            }
            "constant" => {
                arity(1)?;
                ScalarField::constant(*grid, nums[0])
            }
            "affine" => {
                arity(3)?;
                ScalarField::from_fn(*grid, |x, y| nums[0] + nums[1] * (x - o[0]) + nums[2] * (y - oy))
            }
            "sincos" => {
                arity(1)?;
                let a = nums[0];
                if grid.dim() == 1 {
                    ScalarField::from_fn(*grid, |x, _| a * (tau * (x - o[0]) / ext[0]).sin())
                } else {
                    ScalarField::from_fn(*grid, |x, y| {
                        a * (tau * (x - o[0]) / ext[0]).sin() * (tau * (y - oy) / ly).cos()
                    })
                }
            }
            "tanh" => {
                let s = match nums.len() {
                    0 => 1.0,
                    _ => {
                        arity(1)?;
                        nums[0]
                    }
                };
                ScalarField::from_fn(*grid, |x, _| (s * x).tanh())
            }
            "random" => {
                arity(1)?;
                ScalarField::random_smooth(*grid, nums[0], self.modes, seed)
            }
            "scherk" => {
                arity(1)?;
                let a = nums[0];
                if grid.dim() != 2 {
                    return Err(Error::Config("init `scherk` needs a 2-D grid".into()));
                }
                let limit = std::f64::consts::FRAC_PI_2 / a.abs();
                let inside = (0..2).all(|k| o[k] > -limit && o[k] + ext[k] < limit);
                if !(a != 0.0 && inside) {
                    return Err(Error::Config(format!(
                        "scherk:{a} is undefined on the grid; it needs |x|, |y| < π/(2|a|)"
                    )));
                }
                ScalarField::from_fn(*grid, |x, y| ((a * y).cos() / (a * x).cos()).ln() / a)
            }
            _ => {
                return Err(Error::Config(format!(
                    "unknown init preset `{name}`; known presets: {INIT_PRESETS}"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisSpec {
    pub sign_tol: f64,
    pub radii: Vec<f64>,
    pub center: Option<[f64; 3]>,
    pub which: Vec<String>,
    pub counts: Vec<usize>,
    pub required_order: f64,
    pub solve_first: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub fields: FieldFormat,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub grid: Option<GridSpec>,
    pub warp: WarpSpec,
    pub init: InitSpec,
    pub solver: SolverConfig,
    pub analysis: AnalysisSpec,
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn grid(&self) -> Result<FiberGrid> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::Config(format!("`{}` needs a [grid] section or --grid", self.command.name())))?
            .build()
    }
}

pub fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_file_config(&text)
}

pub fn parse_file_config(text: &str) -> Result<FileConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("warpgraph-out"))
}

/// Merge defaults, the file and the flags, in that order of precedence
/// from lowest to highest.
pub fn resolve(command: Command, file: FileConfig, ov: &Overrides) -> Result<RunConfig> {
    let gs = file.grid.unwrap_or_default();
    let grid = match &ov.grid {
        Some(spec) => {
            let mut g = GridSpec::parse(spec)?;
            // keep the file's geometry when the flag only changes shape
            if let Some(e) = gs.extents.as_ref().filter(|e| e.len() == g.resolution.len()) {
                g.extents = e.clone();
            }
            if let Some(o) = gs.origin.as_ref().filter(|o| o.len() == g.resolution.len()) {
                g.origin = o.clone();
            }
            Some(g)
        }
        None if gs.spec.is_some() || gs.resolution.is_some() => Some(GridSpec::from_section(&gs)?),
        None => None,
    };
    if let Some(g) = &grid {
        g.validate()?;
    } else if command.needs_grid() {
        return Err(Error::Config(format!(
            "missing required section [grid] for `{}` (or pass --grid)",
            command.name()
        )));
    }

    let ws = file.warp.unwrap_or_default();
    let (preset, table) = match (&ov.preset, &ov.table) {
        (Some(p), _) => (Some(p.clone()), None),
        (None, Some(t)) => (None, Some(t.clone())),
        (None, None) => (ws.preset, ws.table),
    };
    let warp = WarpSpec {
        preset,
        table,
        domain: ov.domain.or(ws.domain),
        scale: ws.scale.unwrap_or(1.0),
    };

    let is = file.init.unwrap_or_default();
    let (ipreset, ifile) = match (&ov.init, &ov.init_file) {
        (Some(p), _) => (Some(p.clone()), None),
        (None, Some(f)) => (None, Some(f.clone())),
        (None, None) => (is.preset, is.file),
    };
    let init = InitSpec {
        preset: ipreset.unwrap_or_else(|| "sincos:0.1".into()),
        file: ifile,
        modes: is.modes.unwrap_or(3),
    };
    if let Some(p) = &init.file {
        if !p.exists() {
            return Err(Error::Config(format!("init file {} does not exist", p.display())));
        }
    }
    if let Some(p) = &warp.table {
        if !p.exists() {
            return Err(Error::Config(format!("warp table {} does not exist", p.display())));
        }
    }

    let mut solver = file.solver.unwrap_or_default();
    if command == Command::Flow {
        solver.method = Method::FlowRelax;
    }
    if let Some(m) = &ov.method {
        solver.method = Method::parse(m)?;
    }
    if let Some(t) = ov.tol {
        solver.tol_residual = t;
    }
    if let Some(m) = ov.max_iter {
        solver.max_iter = m;
    }
    if let Some(s) = ov.seed {
        solver.seed = s;
    }
    if let Some(k) = ov.snapshot_every {
        solver.snapshot_every = k;
    }
    solver.validate()?;

    let a = file.analysis.unwrap_or_default();
    let analysis = AnalysisSpec {
        sign_tol: ov.sign_tol.or(a.sign_tol).unwrap_or(1e-12),
        radii: ov.radii.clone().or(a.radii).unwrap_or_else(|| vec![0.5, 1.0, 1.5]),
        center: ov.center.or(a.center),
        which: ov.which.clone().or(a.which).unwrap_or_default(),
        counts: ov.counts.clone().or(a.counts).unwrap_or_else(|| vec![32, 64, 128]),
        required_order: a.required_order.unwrap_or(1.9),
        solve_first: ov.solve_first || a.solve_first.unwrap_or(false),
    };
    if !(analysis.sign_tol >= 0.0) {
        return Err(Error::Config("sign_tol must be non-negative".into()));
    }
    if let Some(c) = analysis.counts.iter().find(|c| **c < MIN_RESOLUTION) {
        return Err(Error::Config(format!(
            "refinement count {c} is below the minimum of {MIN_RESOLUTION}"
        )));
    }

    let os = file.output.unwrap_or_default();
    let fields = match &ov.fields {
        Some(s) => FieldFormat::parse(s)?,
        None => os.fields.unwrap_or(FieldFormat::Csv),
    };
    let output = OutputSpec {
        dir: ov.out.clone().or(os.dir).unwrap_or_else(default_out_dir),
        fields,
    };
    Ok(RunConfig {
        command,
        grid,
        warp,
        init,
        solver,
        analysis,
        output,
    })
}
