//! Command-line front end: run configuration, CSV output and summary.
//!
//! Configuration comes from an optional `key = value` file (`#` starts a
//! comment, vectors are comma separated) overridden by flags. Keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `model` | `rolling_disk`, `heisenberg`, `oscillator`, `free_particle` |
//! | `scheme` | `plus` or `minus` |
//! | `h` | step size |
//! | `steps` | number of time intervals; the CSV has `steps + 1` rows |
//! | `q0` | initial configuration |
//! | `q1` / `v0` | second configuration or initial velocity (exactly one) |
//! | `param.<name>` | model parameter override (`--param name=value`) |
//! | `out` | CSV path |
//! | `diagnostics` | `true` / `false` |
//! | `tol`, `max_iters`, `jacobian` | solver settings (`jacobian` is `analytic` or `fd`) |

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use crate::integrator::{build_q1_from_velocity, run_from_pair, JacobianMode, SolverOptions, Trajectory};
use crate::mechanics::{ConfigPair, DiscreteSetup, Scheme};
use crate::models::{ModelId, ModelSpec};
use crate::{Error, Vector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

const DEFAULT_OUT: &str = "trajectory.csv";

/// Failure of a CLI run, mapped onto an exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[source] Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// How the second seed configuration is specified.
#[derive(Clone, Debug, PartialEq)]
pub enum SeedMode {
    Q1(Vector),
    V0(Vector),
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelId,
    pub scheme: Scheme,
    pub h: f64,
    pub n_steps: usize,
    pub q0: Vector,
    pub seed: SeedMode,
    /// Model parameters with defaults filled in.
    pub params: BTreeMap<String, f64>,
    pub out_path: PathBuf,
    pub diagnostics_on: bool,
    pub tol: f64,
    pub max_iters: usize,
    pub jacobian: JacobianMode,
}

#[derive(Parser, Debug, Default)]
#[command(name = "lagdirac", version, about = "Discrete Lagrange-Dirac integrator for nonholonomic systems")]
struct Args {
    /// Config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    steps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<String>,
    /// Model parameter override, `name=value`. Repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    params: Vec<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    diagnostics: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    #[arg(long)]
    jacobian: Option<String>,
    /// Write the effective configuration to this path (`-` for stdout).
    #[arg(long)]
    dump_config: Option<String>,
    /// Stop after parsing (and dumping) the configuration.
    #[arg(long)]
    dry_run: bool,
    /// Run several step sizes, e.g. `h=0.01,0.005`. Each writes its own file.
    #[arg(long)]
    sweep: Option<String>,
}

impl Args {
    fn flag_entries(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        };
        push("model", &self.model);
        push("scheme", &self.scheme);
        push("h", &self.h);
        push("steps", &self.steps);
        push("q0", &self.q0);
        push("q1", &self.q1);
        push("v0", &self.v0);
        push("out", &self.out);
        push("diagnostics", &self.diagnostics);
        push("tol", &self.tol);
        push("max_iters", &self.max_iters);
        push("jacobian", &self.jacobian);
        out
    }
}

const KEYS: &[&str] = &[
    "model",
    "scheme",
    "h",
    "steps",
    "q0",
    "q1",
    "v0",
    "out",
    "diagnostics",
    "tol",
    "max_iters",
    "jacobian",
];

/// Parse `key = value` lines. Later duplicates are an error.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("line {}: expected `key = value`, got '{raw}'", lineno + 1)))?;
        let k = k.trim().to_string();
        let v = v.trim().to_string();
        if !(KEYS.contains(&k.as_str()) || k.starts_with("param.")) {
            return Err(cfg_err(format!("line {}: unknown key '{k}'", lineno + 1)));
        }
        if map.insert(k.clone(), v).is_some() {
            return Err(cfg_err(format!("line {}: duplicate key '{k}'", lineno + 1)));
        }
    }
    Ok(map)
}

fn parse_f64(key: &str, s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| cfg_err(format!("malformed value for '{key}': '{s}' is not a finite number")))
}

fn parse_vector(key: &str, s: &str) -> Result<Vector, CliError> {
    let parts: Result<Vec<f64>, _> = s.split(',').map(|t| parse_f64(key, t)).collect();
    let parts = parts?;
    if parts.is_empty() {
        return Err(cfg_err(format!("'{key}' must not be empty")));
    }
    Ok(Vector::from_vec(parts))
}

fn parse_bool(key: &str, s: &str) -> Result<bool, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(cfg_err(format!("malformed value for '{key}': '{s}' is not a boolean"))),
    }
}

fn parse_jacobian(s: &str) -> Result<JacobianMode, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "analytic" => Ok(JacobianMode::Analytic),
        "fd" | "finite_difference" => Ok(JacobianMode::FiniteDifference),
        _ => Err(cfg_err(format!("malformed value for 'jacobian': '{s}'"))),
    }
}

fn jacobian_name(j: JacobianMode) -> &'static str {
    match j {
        JacobianMode::Analytic => "analytic",
        JacobianMode::FiniteDifference => "fd",
    }
}

/// Build a [`RunConfig`] from merged `key -> value` entries.
pub fn config_from_map(map: &BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let get = |k: &str| map.get(k).map(String::as_str);
    let need = |k: &str| get(k).ok_or_else(|| cfg_err(format!("missing required key '{k}'")));

    let model: ModelId = need("model")?.parse().map_err(|e: Error| cfg_err(e.to_string()))?;
    let scheme: Scheme = need("scheme")?.parse().map_err(|e: Error| cfg_err(e.to_string()))?;
    let h = parse_f64("h", need("h")?)?;
    if h <= 0.0 {
        return Err(cfg_err(format!("'h' must be positive, got {h}")));
    }
    let steps_s = need("steps")?;
    let n_steps: usize = steps_s
        .trim()
        .parse()
        .map_err(|_| cfg_err(format!("malformed value for 'steps': '{steps_s}'")))?;
    if n_steps == 0 {
        return Err(cfg_err("'steps' must be at least 1"));
    }
    let q0 = parse_vector("q0", need("q0")?)?;
    let seed = match (get("q1"), get("v0")) {
        (Some(_), Some(_)) => return Err(cfg_err("conflicting seed modes: give exactly one of 'q1' and 'v0'")),
        (Some(s), None) => SeedMode::Q1(parse_vector("q1", s)?),
        (None, Some(s)) => SeedMode::V0(parse_vector("v0", s)?),
        (None, None) => return Err(cfg_err("missing required key 'q1' (or 'v0')")),
    };
    let mut spec = ModelSpec::new(model);
    for (k, v) in map {
        if let Some(name) = k.strip_prefix("param.") {
            spec.params.insert(name.to_string(), parse_f64(k, v)?);
        }
    }
    let params = spec.resolved_params().map_err(|e| cfg_err(e.to_string()))?;
    let built = ModelSpec {
        id: model,
        params: params.clone(),
    }
    .build()
    .map_err(|e| cfg_err(e.to_string()))?;
    let n = built.dim();
    let seed_len = match &seed {
        SeedMode::Q1(v) | SeedMode::V0(v) => v.len(),
    };
    if q0.len() != n || seed_len != n {
        return Err(cfg_err(format!(
            "model {model} has {n} coordinates; got q0 of length {} and seed of length {seed_len}",
            q0.len()
        )));
    }
    let defaults = SolverOptions::default();
    let tol = match get("tol") {
        Some(s) => parse_f64("tol", s)?,
        None => defaults.tol,
    };
    if tol <= 0.0 {
        return Err(cfg_err("'tol' must be positive"));
    }
    let max_iters = match get("max_iters") {
        Some(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&x| x > 0)
            .ok_or_else(|| cfg_err(format!("malformed value for 'max_iters': '{s}'")))?,
        None => defaults.max_iters,
    };
    Ok(RunConfig {
        model,
        scheme,
        h,
        n_steps,
        q0,
        seed,
        params,
        out_path: PathBuf::from(get("out").unwrap_or(DEFAULT_OUT)),
        diagnostics_on: match get("diagnostics") {
            Some(s) => parse_bool("diagnostics", s)?,
            None => true,
        },
        tol,
        max_iters,
        jacobian: match get("jacobian") {
            Some(s) => parse_jacobian(s)?,
            None => defaults.jacobian_mode,
        },
    })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn merged_entries(args: &Args, file: Option<&str>) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = match file {
        Some(text) => parse_config_text(text)?,
        None => BTreeMap::new(),
    };
    let flags = args.flag_entries();
    // a seed given on the command line replaces any seed from the file
    if flags.iter().any(|(k, _)| k == "q1" || k == "v0") {
        map.remove("q1");
        map.remove("v0");
    }
    for (k, v) in flags {
        map.insert(k, v);
    }
    for p in &args.params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("--param expects NAME=VALUE, got '{p}'")))?;
        map.insert(format!("param.{}", k.trim()), v.trim().to_string());
    }
    Ok(map)
}

/// Parse command-line arguments (including the program name) and an
/// optional config file text. Flags override file values. When `file` is
/// `None` and `--config` is present, that file is read.
pub fn parse_config<I, T>(argv: I, file: Option<&str>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| cfg_err(e.to_string()))?;
    let text = match (file, &args.config) {
        (Some(t), _) => Some(t.to_string()),
        (None, Some(p)) => Some(read_file(p)?),
        (None, None) => None,
    };
    config_from_map(&merged_entries(&args, text.as_deref())?)
}

fn join(v: &Vector) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

/// The effective configuration as a config file. Parsing it back yields an
/// identical [`RunConfig`].
pub fn dump_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# effective lagdirac configuration");
    let _ = writeln!(s, "model = {}", cfg.model);
    let _ = writeln!(s, "scheme = {}", cfg.scheme);
    let _ = writeln!(s, "h = {}", cfg.h);
    let _ = writeln!(s, "steps = {}", cfg.n_steps);
    let _ = writeln!(s, "q0 = {}", join(&cfg.q0));
    match &cfg.seed {
        SeedMode::Q1(v) => {
            let _ = writeln!(s, "q1 = {}", join(v));
        }
        SeedMode::V0(v) => {
            let _ = writeln!(s, "v0 = {}", join(v));
        }
    }
    for (k, v) in &cfg.params {
        let _ = writeln!(s, "param.{k} = {v}");
    }
    let _ = writeln!(s, "out = {}", cfg.out_path.display());
    let _ = writeln!(s, "diagnostics = {}", cfg.diagnostics_on);
    let _ = writeln!(s, "tol = {}", cfg.tol);
    let _ = writeln!(s, "max_iters = {}", cfg.max_iters);
    let _ = writeln!(s, "jacobian = {}", jacobian_name(cfg.jacobian));
    s
}

impl RunConfig {
    pub fn setup(&self) -> Result<DiscreteSetup, CliError> {
        let model = ModelSpec {
            id: self.model,
            params: self.params.clone(),
        }
        .build()
        .map_err(|e| cfg_err(e.to_string()))?;
        DiscreteSetup::new(model, self.h, self.scheme).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iters: self.max_iters,
            jacobian_mode: self.jacobian,
            ..SolverOptions::default()
        }
    }
}

/// Integrate the configured system. `steps` intervals give `steps + 1` states.
pub fn simulate(cfg: &RunConfig) -> Result<(DiscreteSetup, Trajectory), CliError> {
    let setup = cfg.setup()?;
    let seed = match &cfg.seed {
        SeedMode::Q1(q1) => ConfigPair::new(cfg.q0.clone(), q1.clone()).map_err(|e| cfg_err(e.to_string()))?,
        SeedMode::V0(v0) => {
            build_q1_from_velocity(&setup, &cfg.q0, v0)
                .map_err(|e| cfg_err(e.to_string()))?
                .pair
        }
    };
    let traj = run_from_pair(&setup, seed, cfg.n_steps - 1, &cfg.solver_options(), cfg.diagnostics_on)
        .map_err(CliError::Solver)?;
    Ok((setup, traj))
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

/// Write the trajectory as CSV, one row per state.
///
/// `mu_*` is empty for the two end states, `energy` and `constraint_norm`
/// describe the pair starting at the row (empty on the last row), and
/// `dirac_residual` the window starting at the row (empty on the last two).
/// Multipliers use the reported sign convention: coefficient of
/// `+mu^T omega` for plus, of `-mu^T omega` for minus.
pub fn write_csv<W: Write>(setup: &DiscreteSetup, traj: &Trajectory, w: &mut W) -> io::Result<()> {
    let names = setup.model.names();
    let m = setup.model.n_constraints();
    let mut header = vec!["step".to_string(), "time".to_string()];
    header.extend(names.iter().map(|n| format!("q_{n}")));
    header.extend(names.iter().map(|n| format!("p_{n}")));
    header.extend((0..m).map(|r| format!("mu_{r}")));
    header.extend(["energy", "constraint_norm", "dirac_residual"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    let mut row = String::new();
    for k in 0..traj.len() {
        row.clear();
        let _ = write!(row, "{k},{}", traj.time(k));
        for x in traj.q[k].iter().chain(traj.momenta[k].iter()) {
            let _ = write!(row, ",{x}");
        }
        match traj.multiplier(k) {
            Some(mu) => {
                for x in mu.iter() {
                    let _ = write!(row, ",{x}");
                }
            }
            None => row.push_str(&",".repeat(m)),
        }
        let d = traj.diagnostics.get(k);
        let _ = write!(
            row,
            ",{},{},{}",
            opt_cell(d.map(|d| d.energy(traj.scheme))),
            opt_cell(d.map(|d| d.constraint_norm)),
            opt_cell(d.and_then(|d| d.dirac_residual))
        );
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// Figures reported on stdout after a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub states: usize,
    pub final_q: Vector,
    pub final_p: Vector,
    pub max_constraint: Option<f64>,
    pub energy_range: Option<(f64, f64)>,
    pub max_dirac_residual: Option<f64>,
    pub total_iters: usize,
    pub max_iters: usize,
    pub mean_iters: f64,
}

pub fn summarize(traj: &Trajectory) -> Summary {
    let diag = &traj.diagnostics;
    let fold = |f: &dyn Fn(&crate::diagnostics::DiagRecord) -> f64| {
        (!diag.is_empty()).then(|| diag.iter().map(f).fold(f64::NEG_INFINITY, f64::max))
    };
    let e_max = fold(&|d| d.energy(traj.scheme));
    let e_min = fold(&|d| -d.energy(traj.scheme)).map(|x| -x);
    let dirac = diag.iter().filter_map(|d| d.dirac_residual).fold(None, |acc: Option<f64>, x| {
        Some(acc.map_or(x, |a| a.max(x)))
    });
    let steps = traj.steps.len();
    Summary {
        states: traj.len(),
        final_q: traj.q.last().cloned().unwrap_or_else(|| Vector::zeros(0)),
        final_p: traj.momenta.last().cloned().unwrap_or_else(|| Vector::zeros(0)),
        max_constraint: fold(&|d| d.constraint_norm),
        energy_range: e_min.zip(e_max),
        max_dirac_residual: dirac,
        total_iters: traj.total_iterations(),
        max_iters: traj.steps.iter().map(|s| s.iters).max().unwrap_or(0),
        mean_iters: if steps == 0 {
            0.0
        } else {
            traj.total_iterations() as f64 / steps as f64
        },
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let opt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:e}"));
        writeln!(f, "states: {}", self.states)?;
        writeln!(f, "final q: [{}]", join(&self.final_q))?;
        writeln!(f, "final p: [{}]", join(&self.final_p))?;
        writeln!(f, "max constraint violation: {}", opt(self.max_constraint))?;
        match self.energy_range {
            Some((lo, hi)) => writeln!(f, "energy min/max: {lo} / {hi}")?,
            None => writeln!(f, "energy min/max: n/a")?,
        }
        writeln!(f, "max dirac residual: {}", opt(self.max_dirac_residual))?;
        write!(
            f,
            "newton iterations: total {}, max {}, mean {:.3}",
            self.total_iters, self.max_iters, self.mean_iters
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Run one configuration, write its CSV and return the summary.
pub fn execute(cfg: &RunConfig) -> Result<Summary, CliError> {
    let (setup, traj) = simulate(cfg)?;
    let file = fs::File::create(&cfg.out_path).map_err(io_err(&cfg.out_path))?;
    let mut w = BufWriter::new(file);
    write_csv(&setup, &traj, &mut w).map_err(io_err(&cfg.out_path))?;
    w.flush().map_err(io_err(&cfg.out_path))?;
    Ok(summarize(&traj))
}

/// Run one configuration, print the summary, and return the exit status.
pub fn run_and_emit(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(summary) => {
            println!("{} {} h={} -> {}", cfg.model, cfg.scheme, cfg.h, cfg.out_path.display());
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Output path for one member of an `h` sweep: `stem_h<value>.ext`.
pub fn sweep_path(base: &Path, h: f64) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_h{h}.{}", ext.to_string_lossy()),
        None => format!("{stem}_h{h}"),
    };
    base.with_file_name(name)
}

/// Parse `h=a,b,c`.
pub fn parse_sweep(s: &str) -> Result<Vec<f64>, CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| cfg_err(format!("--sweep expects h=a,b,c, got '{s}'")))?;
    if k.trim() != "h" {
        return Err(cfg_err(format!("only h can be swept, got '{}'", k.trim())));
    }
    let hs = parse_vector("sweep", v)?;
    if hs.iter().any(|&h| h <= 0.0) {
        return Err(cfg_err("sweep step sizes must be positive"));
    }
    Ok(hs.iter().copied().collect())
}

/// Run the configuration for each step size concurrently. Returns the
/// first nonzero exit status, or 0.
pub fn run_sweep(cfg: &RunConfig, hs: &[f64]) -> i32 {
    let configs: Vec<RunConfig> = hs
        .iter()
        .map(|&h| RunConfig {
            h,
            out_path: sweep_path(&cfg.out_path, h),
            ..cfg.clone()
        })
        .collect();
    let results: Vec<(RunConfig, Result<Summary, CliError>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .into_iter()
            .map(|c| scope.spawn(move || {
                let r = execute(&c);
                (c, r)
            }))
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut code = EXIT_OK;
    for (c, r) in results {
        match r {
            Ok(summary) => {
                println!("{} {} h={} -> {}", c.model, c.scheme, c.h, c.out_path.display());
                println!("{summary}");
            }
            Err(e) => {
                eprintln!("error (h={}): {e}", c.h);
                if code == EXIT_OK {
                    code = e.exit_code();
                }
            }
        }
    }
    code
}

/// Entry point used by the binary. Returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let file = match &args.config {
        Some(p) => match read_file(p) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: {e}");
                return e.exit_code();
            }
        },
        None => None,
    };
    let cfg = match merged_entries(&args, file.as_deref()).and_then(|m| config_from_map(&m)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Some(target) = &args.dump_config {
        let text = dump_config(&cfg);
        if target == "-" {
            print!("{text}");
        } else if let Err(source) = fs::write(target, text) {
            eprintln!("error: {}", CliError::Io { path: target.clone(), source });
            return EXIT_IO;
        }
    }
    if args.dry_run {
        return EXIT_OK;
    }
    match &args.sweep {
        Some(s) => match parse_sweep(s) {
            Ok(hs) => run_sweep(&cfg, &hs),
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        None => run_and_emit(&cfg),
    }
}
