//! Command-line front end. [`run`] parses an argument vector, executes one
//! subcommand and returns the process exit code.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use xcavity::design::{
    argmax, grid_scan, run_design, survey, survey_csv, DesignConfig, FabryPerotSpace, Landscape, ObjectiveKind,
    SurveySpec, TaskConfig,
};
use xcavity::modes::{find_poles_with, PoleRecord, PoleSearch};
use xcavity::spectra::{fano_extrema, fano_params, rocking_curve, spectrum, visibility};
use xcavity::{two_level_params, CavityStack, Error, Geometry, Isotope, MaterialDb};

/// Environment variable naming a directory with `materials.csv` and `isotopes.csv`.
pub const DB_ENV: &str = "XCAVITY_DB";

const SWEEP_HELP: &str = "Sweeps are written start:stop:count in the unit of the swept variable \
(mrad for angles, gamma0 for detunings); both ends are included.";

#[derive(Debug, Parser)]
#[command(name = "xcavity", version, about = "Thin-film x-ray cavity simulations and inverse design", after_help = SWEEP_HELP)]
struct Cli {
    /// Material database directory (overrides XCAVITY_DB; default: built-in tables).
    #[arg(long, global = true)]
    db: Option<PathBuf>,
    /// Write output here instead of standard output.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fano reflectance over detuning at one angle.
    Spectrum(SpectrumArgs),
    /// Electronic reflectivity over an angle sweep.
    Rocking(RockingArgs),
    /// Two-level parameters (cls, sr, fe) at one angle or over a sweep.
    Params(ParamsArgs),
    /// Poles of the cavity Green's function in an angle window.
    Poles(PolesArgs),
    /// Boundary trace from a design config with a trace task.
    Trace(DesignArgs),
    /// Scalar design run from a design config.
    Optimize(DesignArgs),
    /// Fabry-Perot comparison scan at normal incidence.
    Fp(FpArgs),
    /// Optimize a family of cavities over claddings, guides and isotopes.
    Survey(SurveyArgs),
}

#[derive(Debug, Args, Serialize)]
struct CavityArgs {
    /// Stack JSON file.
    #[arg(long)]
    stack: PathBuf,
    /// Resonant isotope (default: the resonant layer's material).
    #[arg(long)]
    isotope: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    cavity: CavityArgs,
    /// Angle of incidence, mrad.
    #[arg(long)]
    theta: f64,
    /// Detuning sweep, gamma0.
    #[arg(long, default_value = "-200:200:4001", allow_hyphen_values = true)]
    detuning: String,
}

#[derive(Debug, Args, Serialize)]
struct RockingArgs {
    #[arg(long)]
    stack: PathBuf,
    /// Photon energy, keV.
    #[arg(long, default_value_t = 14.4)]
    omega: f64,
    #[arg(long, default_value = "0.5:10:1901", allow_hyphen_values = true)]
    theta_sweep: String,
}

#[derive(Debug, Args, Serialize)]
struct ParamsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    cavity: CavityArgs,
    #[arg(long, conflicts_with = "theta_sweep")]
    theta: Option<f64>,
    #[arg(long)]
    theta_sweep: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct PolesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    cavity: CavityArgs,
    /// Angle window min:max, mrad.
    #[arg(long, default_value = "0.5:8")]
    window: String,
}

#[derive(Debug, Args, Serialize)]
struct DesignArgs {
    /// Design config JSON file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct FpArgs {
    /// Fabry-Perot space JSON (default: diamond mirrors at 700 nm).
    #[arg(long)]
    space: Option<PathBuf>,
    /// Grid points per variable, comma separated.
    #[arg(long, default_value = "41,76,41")]
    counts: String,
}

#[derive(Debug, Args, Serialize)]
struct SurveyArgs {
    /// Survey spec JSON (default: Pd/C with Fe-57, Sn-119, Sc-45).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
}

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateInterface
            | Error::ZeroBackground
            | Error::NoConvergence
            | Error::ContourDisagreement(_)
            | Error::AllInfeasible
            | Error::TargetUnreachable(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Run with the process's standard streams.
pub fn run(argv: &[String]) -> i32 {
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Run writing results to `stdout` (unless `--out` is given) and diagnostics to `stderr`.
pub fn run_with(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = if e.use_stderr() { e.render().to_string() } else { e.to_string() };
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    let result = load_db(cli.db.as_deref()).and_then(|db| execute(&db, &cli.command));
    match result {
        Ok(text) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, text.as_bytes()).map_err(|e| format!("cannot write {}: {e}", p.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => 0,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    1
                }
            }
        }
        Err(Failure::Config(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(stderr, "numerical failure: {msg}");
            2
        }
    }
}

fn load_db(flag: Option<&Path>) -> Outcome<MaterialDb> {
    let dir = flag.map(Path::to_path_buf).or_else(|| std::env::var_os(DB_ENV).map(PathBuf::from));
    match dir {
        Some(d) => MaterialDb::from_dir(&d).map_err(|e| config_err(format!("material database {}: {e}", d.display()))),
        None => Ok(MaterialDb::builtin()),
    }
}

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))
}

/// Parse `start:stop:count`.
pub fn parse_sweep(text: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || format!("sweep '{text}' is not start:stop:count");
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(start.is_finite() && stop.is_finite()) || count == 0 || (count > 1 && stop <= start) {
        return Err(format!("sweep '{text}' must have finite start < stop and count >= 1"));
    }
    Ok(xcavity::spectra::linspace(start, stop, count))
}

fn sweep(text: &str) -> Outcome<Vec<f64>> {
    parse_sweep(text).map_err(Failure::Config)
}

fn window(text: &str) -> Outcome<(f64, f64)> {
    let v: Vec<f64> = text.split(':').map(|s| s.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| config_err(format!("window '{text}' is not min:max")))?;
    match v[..] {
        [a, b] if a.is_finite() && b.is_finite() && a < b => Ok((a, b)),
        _ => Err(config_err(format!("window '{text}' is not min:max with min < max"))),
    }
}

fn load_cavity<'a>(db: &'a MaterialDb, args: &CavityArgs) -> Outcome<(CavityStack, &'a Isotope)> {
    let stack = CavityStack::from_json(&read(&args.stack)?)?;
    let name = args.isotope.clone().unwrap_or_else(|| stack.resonant_layer().material.clone());
    let iso = db
        .isotope(&name)
        .map_err(|_| config_err(format!("'{name}' is not an isotope; pass --isotope")))?;
    Ok((stack, iso))
}

/// `#`-prefixed pretty JSON.
fn header(value: &serde_json::Value) -> String {
    let mut out = String::new();
    for line in serde_json::to_string_pretty(value).expect("json value").lines() {
        let _ = writeln!(out, "# {line}");
    }
    out
}

fn e(x: f64) -> String {
    format!("{x:.16e}")
}

fn execute(db: &MaterialDb, cmd: &Command) -> Outcome<String> {
    match cmd {
        Command::Spectrum(a) => cmd_spectrum(db, a),
        Command::Rocking(a) => cmd_rocking(db, a),
        Command::Params(a) => cmd_params(db, a),
        Command::Poles(a) => cmd_poles(db, a),
        Command::Trace(a) => cmd_design(db, a, true),
        Command::Optimize(a) => cmd_design(db, a, false),
        Command::Fp(a) => cmd_fp(db, a),
        Command::Survey(a) => cmd_survey(db, a),
    }
}

fn cmd_spectrum(db: &MaterialDb, a: &SpectrumArgs) -> Outcome<String> {
    let (stack, iso) = load_cavity(db, &a.cavity)?;
    let grid = sweep(&a.detuning)?;
    let geom = Geometry::new(iso.omega_nuc, a.theta)?;
    let fp = fano_params(db, &stack, iso, &geom)?;
    let sp = spectrum(&fp, &grid)?;
    let cfg = json!({"command": "spectrum", "args": a, "isotope": iso.name, "omega_kev": iso.omega_nuc, "stack": stack});
    let mut out = sp.to_csv(&serde_json::to_string_pretty(&cfg).expect("json"));
    let _ = writeln!(out, "# visibility = {}", e(visibility(&fp)));
    let _ = writeln!(out, "# phi_rad = {}", e(fp.phi));
    let _ = writeln!(out, "# center_gamma0 = {}", e(fp.center));
    let _ = writeln!(out, "# hwhm_gamma0 = {}", e(fp.hwhm));
    if let Some((p, m)) = fano_extrema(&fp) {
        let _ = writeln!(out, "# extrema_gamma0 = {},{}", e(fp.center + p), e(fp.center + m));
    }
    Ok(out)
}

fn cmd_rocking(db: &MaterialDb, a: &RockingArgs) -> Outcome<String> {
    let stack = CavityStack::from_json(&read(&a.stack)?)?;
    let rc = rocking_curve(db, &stack, a.omega, &sweep(&a.theta_sweep)?)?;
    let cfg = json!({"command": "rocking", "args": a, "stack": stack});
    Ok(rc.to_csv(&serde_json::to_string_pretty(&cfg).expect("json")))
}

fn cmd_params(db: &MaterialDb, a: &ParamsArgs) -> Outcome<String> {
    let (stack, iso) = load_cavity(db, &a.cavity)?;
    let thetas = match (&a.theta, &a.theta_sweep) {
        (Some(t), None) => vec![*t],
        (None, Some(s)) => sweep(s)?,
        _ => return Err(config_err("give exactly one of --theta and --theta-sweep")),
    };
    let cfg = json!({"command": "params", "args": a, "isotope": iso.name, "omega_kev": iso.omega_nuc, "stack": stack});
    let mut out = header(&cfg);
    out.push_str("theta_mrad,cls,sr,fe\n");
    for t in thetas {
        let p = two_level_params(db, &stack, iso, &Geometry::new(iso.omega_nuc, t)?)?;
        let _ = writeln!(out, "{},{},{},{}", e(t), e(p.cls), e(p.sr), e(p.fe));
    }
    Ok(out)
}

fn cmd_poles(db: &MaterialDb, a: &PolesArgs) -> Outcome<String> {
    let (stack, iso) = load_cavity(db, &a.cavity)?;
    let (lo, hi) = window(&a.window)?;
    let search = PoleSearch::new(lo, hi);
    let set = find_poles_with(db, &stack, iso.omega_nuc, &search)?;
    let recs: Vec<PoleRecord> = set.poles.iter().map(PoleRecord::from).collect();
    let report = json!({
        "config": {"command": "poles", "args": a, "isotope": iso.name, "omega_kev": iso.omega_nuc, "stack": stack, "search": search},
        "dropped_seeds": set.dropped_seeds,
        "poles": recs,
    });
    Ok(serde_json::to_string_pretty(&report).expect("json") + "\n")
}

fn cmd_design(db: &MaterialDb, a: &DesignArgs, trace: bool) -> Outcome<String> {
    let mut cfg = DesignConfig::from_json(&read(&a.config)?)?;
    let is_trace = matches!(cfg.task, TaskConfig::TraceLinear { .. } | TaskConfig::TraceParabola { .. });
    if trace != is_trace {
        return Err(config_err(if trace {
            "trace needs a trace_linear or trace_parabola task; use optimize for the others"
        } else {
            "optimize cannot run a trace task; use trace"
        }));
    }
    if a.seed.is_some() {
        cfg.seed = a.seed;
    }
    if a.restarts.is_some() {
        cfg.restarts = a.restarts;
    }
    let resolved = cfg.resolved();
    let result = run_design(db, &cfg)?;
    let mut out = header(&json!({"command": if trace { "trace" } else { "optimize" }, "config": resolved}));
    match result.trace {
        Some(t) => out.push_str(&t.to_csv()),
        None => out.push_str(&result.to_json_lines()),
    }
    Ok(out)
}

fn cmd_fp(db: &MaterialDb, a: &FpArgs) -> Outcome<String> {
    let space = match &a.space {
        Some(p) => serde_json::from_str::<FabryPerotSpace>(&read(p)?)
            .map_err(|e| config_err(format!("{}: {e}", p.display())))?
            .bind(db)?,
        None => FabryPerotSpace::diamond(db)?,
    };
    let counts: Vec<usize> = a
        .counts
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| config_err(format!("counts '{}' are not comma separated integers", a.counts)))?;
    let names = space.names();
    if counts.len() != names.len() {
        return Err(config_err(format!("{} counts given for {} variables", counts.len(), names.len())));
    }
    let pts = grid_scan(&space, &counts)?;
    let mut out = header(&json!({"command": "fp", "args": a, "space": space}));
    for k in [ObjectiveKind::Sr, ObjectiveKind::Fe] {
        if let Some(i) = argmax(&pts, k) {
            let x: Vec<String> = pts[i].x.iter().map(|&v| e(v)).collect();
            let _ = writeln!(out, "# argmax_{} = {}", k.name(), x.join(","));
        }
    }
    let _ = writeln!(out, "{},feasible,cls,sr,fe", names.join(","));
    for p in &pts {
        let x: Vec<String> = p.x.iter().map(|&v| e(v)).collect();
        let o = &p.objectives;
        let _ = writeln!(out, "{},{},{},{},{}", x.join(","), p.feasible, e(o.cls), e(o.sr), e(o.fe));
    }
    Ok(out)
}

fn cmd_survey(db: &MaterialDb, a: &SurveyArgs) -> Outcome<String> {
    let mut spec = match &a.config {
        Some(p) => serde_json::from_str::<SurveySpec>(&read(p)?).map_err(|e| config_err(format!("{}: {e}", p.display())))?,
        None => SurveySpec::default(),
    };
    if let Some(s) = a.seed {
        spec.optimizer.seed = s;
    }
    if let Some(r) = a.restarts {
        spec.optimizer.restarts = r;
    }
    let rows = survey(db, &spec)?;
    Ok(header(&json!({"command": "survey", "spec": spec})) + &survey_csv(&rows))
}
