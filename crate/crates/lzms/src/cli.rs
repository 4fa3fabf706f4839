//! Command-line frontend: flag and config-file parsing, dispatch into the
//! library, CSV emission with a byte-stable format.
//!
//! Flags are dimensionless in units of the ladder coupling Ω (`--kappa`
//! is κ/Ω², `--gamma2` is Γ₂/Ω, `--t0` is Ωt₀), so figure captions can be
//! typed verbatim. A flat `key = value` config file can hold the same
//! values; explicit flags take precedence over it.
//!
//! Exit codes: 0 success, 1 I/O or failed validation, 2 argument error,
//! 3 integration failure.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dynamics::{evolve, transfer_efficiency, IntegratorConfig, Trajectory};
use crate::model::{basis_state, DecayParams, ModelParams};
use crate::spectrum::{classify_crossing, eigenvalues_ideal, CrossingClass};
use crate::sweep::{
    figure_curves, run_sweep_with_workers, Axis, AxisParam, AxisScale, FigureId, SweepRecord,
    SweepResult, SweepSpec,
};
use crate::{CVector3, Error};

#[derive(Parser, Debug)]
#[command(
    name = "lzms",
    version,
    about = "Three-state avoided-crossing transfer: spectra, propagation, parameter sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` config file; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for sweeps (default: all CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the instantaneous eigenvalues and the crossing class.
    Spectrum {
        #[command(flatten)]
        params: PhysicsArgs,
        /// Time Ωt at which to evaluate the spectrum (default 0).
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
    },
    /// Propagate from −t₀ to t₀ and write the sampled populations as CSV.
    Evolve {
        #[command(flatten)]
        params: PhysicsArgs,
        /// Starting level 1..=3 (default 1).
        #[arg(long)]
        from: Option<u8>,
        /// Number of output samples (default 201).
        #[arg(long)]
        samples: Option<usize>,
        /// Output path (default: standard output).
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Print the final from→to transfer efficiency.
    Efficiency {
        #[command(flatten)]
        params: PhysicsArgs,
        /// Starting level 1..=3 (default 1).
        #[arg(long)]
        from: Option<u8>,
        /// Target level 1..=3 (default 3).
        #[arg(long)]
        to: Option<u8>,
    },
    /// Run a custom 1D or 2D parameter sweep and write CSV.
    Sweep {
        #[command(flatten)]
        params: PhysicsArgs,
        /// Outer axis as name:min:max:n, e.g. omega_over_Omega:0:2:101.
        #[arg(long, value_parser = parse_axis)]
        axis1: Axis,
        /// Optional inner axis, same syntax.
        #[arg(long, value_parser = parse_axis)]
        axis2: Option<Axis>,
        /// Starting level 1..=3 (default 1).
        #[arg(long)]
        from: Option<u8>,
        /// Target level 1..=3 (default 3).
        #[arg(long)]
        to: Option<u8>,
        /// Output path (default: standard output).
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Run a named preset scan (fig1a..fig5c) and write CSV.
    Figure {
        /// Preset id, e.g. fig1a.
        id: String,
        /// Output path; multi-curve presets get per-curve suffixes
        /// (default: standard output).
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Run the built-in property suite; nonzero exit on any failure.
    Validate,
}

/// Dimensionless physics and integrator overrides shared by the
/// computing subcommands. Every field falls back to the config file,
/// then to its documented default.
#[derive(Args, Debug, Clone, Copy, Default)]
struct PhysicsArgs {
    /// Ladder coupling Ω, the unit every other flag is measured in
    /// (default 1).
    #[arg(long = "Omega")]
    omega_unit: Option<f64>,
    /// Direct 1–3 coupling ω/Ω (default 0).
    #[arg(long)]
    omega: Option<f64>,
    /// Sweep rate κ/Ω² (default 1).
    #[arg(long)]
    kappa: Option<f64>,
    /// Ladder phase φ in radians (default 0).
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    /// Direct phase φ′ in radians (default 0).
    #[arg(long, allow_hyphen_values = true)]
    varphi: Option<f64>,
    /// Half sweep window Ωt₀ (default 500).
    #[arg(long)]
    t0: Option<f64>,
    /// Decay rate Γ₁/Ω (default 0).
    #[arg(long)]
    gamma1: Option<f64>,
    /// Decay rate Γ₂/Ω (default 0).
    #[arg(long)]
    gamma2: Option<f64>,
    /// Decay rate Γ₃/Ω (default 0).
    #[arg(long)]
    gamma3: Option<f64>,
    /// Level-2 detuning Δ/Ω (default 0).
    #[arg(long, allow_hyphen_values = true)]
    detuning: Option<f64>,
    /// Relative integration tolerance, at most 1e-6 (default 1e-10).
    #[arg(long = "rel_tol")]
    rel_tol: Option<f64>,
    /// Absolute integration tolerance (default 1e-12).
    #[arg(long = "abs_tol")]
    abs_tol: Option<f64>,
    /// Step ceiling in units of 1/Ω (default: window/100).
    #[arg(long = "max_step")]
    max_step: Option<f64>,
    /// First trial step in units of 1/Ω (default: window/10⁴).
    #[arg(long = "init_step")]
    init_step: Option<f64>,
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(format!("expected name:min:max:n, got `{s}`"));
    }
    let param = AxisParam::parse(parts[0]).map_err(|e| e.to_string())?;
    let min: f64 = parts[1].parse().map_err(|_| format!("bad axis min `{}`", parts[1]))?;
    let max: f64 = parts[2].parse().map_err(|_| format!("bad axis max `{}`", parts[2]))?;
    let n: usize = parts[3].parse().map_err(|_| format!("bad axis count `{}`", parts[3]))?;
    let scale = match param {
        AxisParam::Gamma1 | AxisParam::Gamma2 | AxisParam::Gamma3 => AxisScale::Log10,
        _ => AxisScale::Linear,
    };
    let axis = Axis { param, min, max, n, scale };
    axis.validate().map_err(|e| e.to_string())?;
    Ok(axis)
}

/// Everything that can go wrong after argument parsing, with the exit
/// code it maps to.
enum RunError {
    Lib(Error),
    Io { path: PathBuf, source: io::Error },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Lib(e) => write!(f, "{e}"),
            RunError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl RunError {
    fn code(&self) -> i32 {
        match self {
            RunError::Lib(Error::StepUnderflow { .. }) => 3,
            RunError::Lib(_) => 2,
            RunError::Io { .. } => 1,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Lib(e)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "Omega", "omega", "kappa", "phi", "varphi", "t0", "gamma1", "gamma2", "gamma3", "detuning",
    "rel_tol", "abs_tol", "max_step", "init_step", "samples", "workers", "from", "to",
];

/// Parsed config file: raw strings keyed by the flag they stand in for.
#[derive(Debug, Default)]
struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    fn parse(text: &str) -> Result<Self, Error> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::invalid(
                    "config",
                    format!("line {}: expected `key = value`, got `{raw}`", lineno + 1),
                ));
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::invalid("config", format!("unknown key `{key}`")));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::invalid("config", format!("duplicate key `{key}`")));
            }
        }
        Ok(ConfigFile { values })
    }

    fn num(&self, key: &str) -> Result<Option<f64>, Error> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    Error::invalid("config", format!("key `{key}`: not a number `{v}`"))
                })
            })
            .transpose()
    }

    fn int(&self, key: &str) -> Result<Option<usize>, Error> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    Error::invalid("config", format!("key `{key}`: not an integer `{v}`"))
                })
            })
            .transpose()
    }
}

/// Merge flags over config values and convert the dimensionless set into
/// raw model parameters.
fn resolve(
    a: &PhysicsArgs,
    file: &ConfigFile,
    sample_count: usize,
) -> Result<(ModelParams, DecayParams, IntegratorConfig), Error> {
    let omega_unit = a.omega_unit.or(file.num("Omega")?).unwrap_or(1.0);
    if !(omega_unit > 0.0 && omega_unit.is_finite()) {
        return Err(Error::invalid("Omega", format!("must be positive, got {omega_unit}")));
    }
    let omega = a.omega.or(file.num("omega")?).unwrap_or(0.0);
    let kappa = a.kappa.or(file.num("kappa")?).unwrap_or(1.0);
    let phi = a.phi.or(file.num("phi")?).unwrap_or(0.0);
    let varphi = a.varphi.or(file.num("varphi")?).unwrap_or(0.0);
    let t0 = a.t0.or(file.num("t0")?).unwrap_or(500.0);
    let gamma1 = a.gamma1.or(file.num("gamma1")?).unwrap_or(0.0);
    let gamma2 = a.gamma2.or(file.num("gamma2")?).unwrap_or(0.0);
    let gamma3 = a.gamma3.or(file.num("gamma3")?).unwrap_or(0.0);
    let detuning = a.detuning.or(file.num("detuning")?).unwrap_or(0.0);

    let model = ModelParams {
        sweep_rate: kappa * omega_unit * omega_unit,
        ladder_coupling: omega_unit,
        direct_coupling: omega * omega_unit,
        ladder_phase: phi,
        direct_phase: varphi,
        half_window: t0 / omega_unit,
    };
    let decay = DecayParams {
        gamma1: gamma1 * omega_unit,
        gamma2: gamma2 * omega_unit,
        gamma3: gamma3 * omega_unit,
        detuning: detuning * omega_unit,
        ground_offset: omega_unit,
    };
    let cfg = IntegratorConfig {
        rel_tol: a.rel_tol.or(file.num("rel_tol")?).unwrap_or(1e-10),
        abs_tol: a.abs_tol.or(file.num("abs_tol")?).unwrap_or(1e-12),
        max_step: match a.max_step.or(file.num("max_step")?) {
            Some(v) => Some(v / omega_unit),
            None => None,
        },
        init_step: match a.init_step.or(file.num("init_step")?) {
            Some(v) => Some(v / omega_unit),
            None => None,
        },
        sample_count,
    };
    Ok((model, decay, cfg))
}

fn scale_name(scale: AxisScale) -> &'static str {
    match scale {
        AxisScale::Linear => "linear",
        AxisScale::Log10 => "log10",
    }
}

/// Emit a sweep as CSV: a `#` metadata block echoing every parameter,
/// one header line, then one row per grid point with 12 significant
/// digits. The output is byte-stable for a given spec and version
/// (worker count deliberately does not appear).
pub fn write_sweep_csv<W: Write>(
    mut w: W,
    result: &SweepResult,
    extra_meta: &[(&str, String)],
) -> io::Result<()> {
    let spec = &result.spec;
    writeln!(w, "# lzms {}", env!("CARGO_PKG_VERSION"))?;
    for (k, v) in extra_meta {
        writeln!(w, "# {k} = {v}")?;
    }
    let axis_line = |a: &Axis| {
        format!("{} {} [{}, {}] n={}", a.param.name(), scale_name(a.scale), a.min, a.max, a.n)
    };
    writeln!(w, "# axis1 = {}", axis_line(&spec.axis1))?;
    if let Some(a2) = &spec.axis2 {
        writeln!(w, "# axis2 = {}", axis_line(a2))?;
    }
    let m = &spec.base_model;
    let om = m.ladder_coupling;
    writeln!(w, "# Omega = {om}")?;
    writeln!(w, "# omega_over_Omega = {}", m.direct_coupling / om)?;
    writeln!(w, "# kappa_over_Omega2 = {}", m.sweep_rate / (om * om))?;
    writeln!(w, "# phi = {}", m.ladder_phase)?;
    writeln!(w, "# varphi = {}", m.direct_phase)?;
    writeln!(w, "# Omega_t0 = {}", m.half_window * om)?;
    let d = &spec.base_decay;
    writeln!(w, "# gamma1_over_Omega = {}", d.gamma1 / om)?;
    writeln!(w, "# gamma2_over_Omega = {}", d.gamma2 / om)?;
    writeln!(w, "# gamma3_over_Omega = {}", d.gamma3 / om)?;
    writeln!(w, "# detuning_over_Omega = {}", d.detuning / om)?;
    writeln!(w, "# from = {}", spec.from)?;
    writeln!(w, "# to = {}", spec.to)?;
    writeln!(w, "# rel_tol = {:e}", spec.cfg.rel_tol)?;
    writeln!(w, "# abs_tol = {:e}", spec.cfg.abs_tol)?;
    match spec.cfg.max_step {
        Some(v) => writeln!(w, "# max_step = {v}")?,
        None => writeln!(w, "# max_step = auto")?,
    }
    match spec.cfg.init_step {
        Some(v) => writeln!(w, "# init_step = {v}")?,
        None => writeln!(w, "# init_step = auto")?,
    }

    if spec.axis2.is_some() {
        writeln!(w, "axis1,axis2,P1,P2,P3,leak")?;
    } else {
        writeln!(w, "axis1,P1,P2,P3,leak")?;
    }
    for r in &result.records {
        let [p1, p2, p3] = r.populations;
        match r.axis2 {
            Some(v2) => writeln!(
                w,
                "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
                r.axis1, v2, p1, p2, p3, r.leak
            )?,
            None => writeln!(
                w,
                "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
                r.axis1, p1, p2, p3, r.leak
            )?,
        }
    }
    Ok(())
}

/// Rebuild the grid records from emitted CSV text. Failed points are the
/// NaN rows. Metadata lines are ignored.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRecord>, Error> {
    let mut records = Vec::new();
    let mut two_d: Option<bool> = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with("axis1") {
            two_d = Some(line.starts_with("axis1,axis2"));
            continue;
        }
        let Some(two_d) = two_d else {
            return Err(Error::invalid("csv", "data row before header line"));
        };
        let fields = line
            .split(',')
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::invalid("csv", format!("not a number: `{f}`")))
            })
            .collect::<Result<Vec<f64>, Error>>()?;
        let expected = if two_d { 6 } else { 5 };
        if fields.len() != expected {
            return Err(Error::invalid(
                "csv",
                format!("expected {expected} columns, got {}", fields.len()),
            ));
        }
        let (axis2, off) = if two_d { (Some(fields[1]), 2) } else { (None, 1) };
        let populations = [fields[off], fields[off + 1], fields[off + 2]];
        records.push(SweepRecord {
            axis1: fields[0],
            axis2,
            populations,
            leak: fields[off + 3],
            failed: populations.iter().any(|p| p.is_nan()),
        });
    }
    Ok(records)
}

fn write_to(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), RunError> {
    match path {
        Some(p) => {
            let file = fs::File::create(p)
                .map_err(|source| RunError::Io { path: p.to_path_buf(), source })?;
            let mut buf = io::BufWriter::new(file);
            body(&mut buf).and_then(|_| buf.flush())
                .map_err(|source| RunError::Io { path: p.to_path_buf(), source })
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)
                .map_err(|source| RunError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

/// `out.csv` + `gamma2` → `out.gamma2.csv`, keeping the directory.
fn curve_path(base: &Path, label: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}.{label}.{ext}"))
}

fn failed_count(result: &SweepResult) -> usize {
    result.records.iter().filter(|r| r.failed).count()
}

fn write_trajectory_csv<W: Write>(
    mut w: W,
    m: &ModelParams,
    d: &DecayParams,
    from: u8,
    traj: &Trajectory<CVector3>,
) -> io::Result<()> {
    let om = m.ladder_coupling;
    writeln!(w, "# lzms {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# command = evolve")?;
    writeln!(w, "# Omega = {om}")?;
    writeln!(w, "# omega_over_Omega = {}", m.direct_coupling / om)?;
    writeln!(w, "# kappa_over_Omega2 = {}", m.sweep_rate / (om * om))?;
    writeln!(w, "# phi = {}", m.ladder_phase)?;
    writeln!(w, "# varphi = {}", m.direct_phase)?;
    writeln!(w, "# Omega_t0 = {}", m.half_window * om)?;
    writeln!(w, "# gamma1_over_Omega = {}", d.gamma1 / om)?;
    writeln!(w, "# gamma2_over_Omega = {}", d.gamma2 / om)?;
    writeln!(w, "# gamma3_over_Omega = {}", d.gamma3 / om)?;
    writeln!(w, "# detuning_over_Omega = {}", d.detuning / om)?;
    writeln!(w, "# from = {from}")?;
    writeln!(w, "t,P1,P2,P3,leak")?;
    for (t, p) in traj.times.iter().zip(traj.populations()) {
        let leak = 1.0 - p[0] - p[1] - p[2];
        writeln!(w, "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}", t, p[0], p[1], p[2], leak)?;
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, RunError> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|source| RunError::Io { path: p.to_path_buf(), source })?;
            Ok(ConfigFile::parse(&text)?)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, RunError> {
    let file = load_config(cli.config.as_deref())?;
    let workers = match cli.workers {
        Some(w) => Some(w),
        None => file.int("workers")?,
    };
    match cli.command {
        Command::Spectrum { params, t } => {
            let (m, _, _) = resolve(&params, &file, 2)?;
            m.validate()?;
            let t_raw = t.unwrap_or(0.0) / m.ladder_coupling;
            let [l1, l2, l3] = eigenvalues_ideal(&m, t_raw);
            println!("lambda1 = {l1:.11e}");
            println!("lambda2 = {l2:.11e}");
            println!("lambda3 = {l3:.11e}");
            match classify_crossing(&m, 1e-9) {
                CrossingClass::NoCrossing => println!("crossing = none"),
                CrossingClass::TopIsolated { crossing_time } => {
                    println!("crossing = top level isolated, degenerate at t = {crossing_time}")
                }
                CrossingClass::BottomIsolated { crossing_time } => {
                    println!("crossing = bottom level isolated, degenerate at t = {crossing_time}")
                }
            }
            Ok(0)
        }
        Command::Evolve { params, from, samples, output } => {
            let samples = match samples {
                Some(s) => s,
                None => file.int("samples")?.unwrap_or(201),
            };
            let (m, d, cfg) = resolve(&params, &file, samples)?;
            let from = from.or(file.int("from")?.map(|v| v as u8)).unwrap_or(1);
            let initial = basis_state(from)?;
            let traj = evolve(&m, Some(&d), &initial, &cfg)?;
            write_to(output.as_deref(), |w| write_trajectory_csv(w, &m, &d, from, &traj))?;
            eprintln!("evolved level {from} over Ωt ∈ [{}, {}], {} samples", -m.half_window, m.half_window, traj.times.len());
            Ok(0)
        }
        Command::Efficiency { params, from, to } => {
            let (m, d, cfg) = resolve(&params, &file, 2)?;
            let from = from.or(file.int("from")?.map(|v| v as u8)).unwrap_or(1);
            let to = to.or(file.int("to")?.map(|v| v as u8)).unwrap_or(3);
            let eff = transfer_efficiency(&m, Some(&d), from, to, &cfg)?;
            println!("{eff:.11e}");
            Ok(0)
        }
        Command::Sweep { params, axis1, axis2, from, to, output } => {
            let (m, d, cfg) = resolve(&params, &file, 2)?;
            let from = from.or(file.int("from")?.map(|v| v as u8)).unwrap_or(1);
            let to = to.or(file.int("to")?.map(|v| v as u8)).unwrap_or(3);
            let spec = SweepSpec {
                axis1,
                axis2,
                base_model: m,
                base_decay: d,
                from,
                to,
                cfg,
            };
            let result = run_sweep_with_workers(&spec, workers)?;
            write_to(output.as_deref(), |w| write_sweep_csv(w, &result, &[]))?;
            eprintln!(
                "swept {} points ({} failed)",
                result.records.len(),
                failed_count(&result)
            );
            Ok(0)
        }
        Command::Figure { id, output } => {
            let id: FigureId = id.parse()?;
            let curves = figure_curves(id);
            let multi = curves.len() > 1;
            for curve in curves {
                let result = run_sweep_with_workers(&curve.spec, workers)?;
                let meta =
                    [("figure", id.to_string()), ("curve", curve.label.to_string())];
                let dest = output
                    .as_deref()
                    .map(|p| if multi { curve_path(p, curve.label) } else { p.to_path_buf() });
                write_to(dest.as_deref(), |w| write_sweep_csv(w, &result, &meta))?;
                eprintln!(
                    "{id} curve {}: {} points ({} failed){}",
                    curve.label,
                    result.records.len(),
                    failed_count(&result),
                    dest.as_deref()
                        .map(|p| format!(" → {}", p.display()))
                        .unwrap_or_default()
                );
            }
            Ok(0)
        }
        Command::Validate => {
            let results = crate::validate::run_all();
            let mut failures = 0;
            for r in &results {
                println!("{} {}: {}", if r.passed { "ok  " } else { "FAIL" }, r.name, r.detail);
                if !r.passed {
                    failures += 1;
                }
            }
            eprintln!("{} checks, {failures} failed", results.len());
            Ok(if failures == 0 { 0 } else { 1 })
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
