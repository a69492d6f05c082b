//! Command-line front end: single runs, table sweeps, scaling studies and the
//! corrector property suite.

use std::collections::HashMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cfvm::{run_manufactured, RunStatus, Scheme, SimConfig};
use crate::correctors::{property_suite, ScalingQuantity};
use crate::error::LayerError;
use crate::mms::{self, ExactSolution};
use crate::report::{self, ComparisonPolicy, ExperimentRow, OutputFormat, RowStatus};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "layerfv",
    version,
    about = "Finite-volume solvers for rotating Stokes flow with thin boundary layers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scheme on the manufactured problem and print the L2 errors.
    Run(RunArgs),
    /// Sweep grids, viscosities and both schemes.
    Table(TableArgs),
    /// Fit the viscosity power laws of the normal corrector.
    Scaling(ScalingArgs),
    /// Check the tangential corrector against its PDE, the erfc oracle and its wall trace.
    VerifyCorrectors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Cfvm,
    Nfvm,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Cfvm => Scheme::Cfvm,
            SchemeArg::Nfvm => Scheme::Nfvm,
        }
    }
}

/// Simulation flags. Unset flags fall back to the config file, then to the
/// defaults shown in `--help`.
#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    /// Time step [default: 0.01]
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Final time [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Weight of the third-difference pressure term in the face fluxes [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Rotation rate [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Relative residual tolerance of the linear solves [default: 1e-10]
    #[arg(long, allow_negative_numbers = true)]
    pub lin_tol: Option<f64>,
    /// File of key=value lines; explicit flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scheme [default: nfvm]
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Viscosity [default: 0.01]
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Cells per direction [default: 20]
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i64>,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Also write the result row to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format of --out
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// Grid sizes to sweep
    #[arg(long, value_delimiter = ',', default_values_t = report::TABLE_GRIDS.to_vec())]
    pub grids: Vec<usize>,
    /// Viscosities to sweep
    #[arg(long, value_delimiter = ',', default_values_t = report::TABLE_EPS.to_vec())]
    pub eps_list: Vec<f64>,
    /// Restrict the sweep to one scheme [default: both]
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
    /// Worker threads [default: number of hardware threads]
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    /// Viscosities of the fit
    #[arg(long, value_delimiter = ',', default_values_t = report::SCALING_EPS.to_vec())]
    pub eps_list: Vec<f64>,
    /// One quantity (dphi3_dt, z_eps_d2phi3, phi3_over_sqrt_eps) [default: all]
    #[arg(long)]
    pub quantity: Option<String>,
    /// Evaluation time
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Rotation rate
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// CSV output file [default: stdout summary only]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved settings of a `run` or `table` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub sim: SimConfig,
    pub n: usize,
}

/// Failure classes that map onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<LayerError> for CliError {
    fn from(e: LayerError) -> Self {
        match e {
            LayerError::InvalidParameter { name, reason } => {
                CliError::Usage(format!("invalid value for `--{}`: {reason}", name.replace('_', "-")))
            }
            LayerError::InvalidConfig(_) | LayerError::InvalidGrid(_) | LayerError::Io(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses a key=value file. Blank lines and `#` comments are skipped; keys may
/// use `-` or `_`.
pub fn read_config_file(path: &Path) -> CliResult<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read `--config` file {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected key=value, got `{line}`", path.display(), lineno + 1))
        })?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

const CONFIG_KEYS: [&str; 8] = ["scheme", "eps", "n", "dt", "t_end", "theta", "alpha", "lin_tol"];

fn file_value<T: std::str::FromStr>(file: &HashMap<String, String>, key: &str) -> CliResult<Option<T>> {
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`"))))
        .transpose()
}

/// Merges flags over the config file over the defaults and validates.
pub fn resolve(scheme: Option<SchemeArg>, eps: Option<f64>, n: Option<i64>, sim: &SimArgs) -> CliResult<CliConfig> {
    let file = match &sim.config {
        Some(p) => read_config_file(p)?,
        None => HashMap::new(),
    };
    if let Some(k) = file.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("unknown config key `{k}`")));
    }
    let d = SimConfig::default();
    let file_scheme = match file.get("scheme") {
        Some(s) => Some(
            Scheme::parse(s).ok_or_else(|| CliError::Usage(format!("config key `scheme`: unknown scheme `{s}`")))?,
        ),
        None => None,
    };
    let n = n.or(file_value(&file, "n")?).unwrap_or(20);
    if n < 3 {
        return Err(CliError::Usage(format!("invalid value for `--n`: need at least 3 cells, got {n}")));
    }
    let cfg = SimConfig {
        scheme: scheme.map(Scheme::from).or(file_scheme).unwrap_or(d.scheme),
        eps: eps.or(file_value(&file, "eps")?).unwrap_or(d.eps),
        dt: sim.dt.or(file_value(&file, "dt")?).unwrap_or(d.dt),
        t_end: sim.t_end.or(file_value(&file, "t_end")?).unwrap_or(d.t_end),
        theta: sim.theta.or(file_value(&file, "theta")?).unwrap_or(d.theta),
        alpha: sim.alpha.or(file_value(&file, "alpha")?).unwrap_or(d.alpha),
        lin_tol: sim.lin_tol.or(file_value(&file, "lin_tol")?).unwrap_or(d.lin_tol),
        ..d
    };
    cfg.validate()?;
    Ok(CliConfig { sim: cfg, n: n as usize })
}

fn write_or_print(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write `--out` {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_run(a: &RunArgs) -> CliResult<()> {
    let c = resolve(a.scheme, a.eps, a.n, &a.sim)?;
    let g = mms::grid(c.n)?;
    let start = std::time::Instant::now();
    let res = run_manufactured(&c.sim, &g)?;
    let wall = start.elapsed().as_secs_f64();
    if let RunStatus::BlowUp { step, time } = res.status {
        let last = res
            .last_finite()
            .map(|d| {
                format!(
                    "last finite step {} (t = {}): |u| = {:.6e}, velocity error = {:?}",
                    d.step, d.time, d.velocity_norm, d.velocity_error
                )
            })
            .unwrap_or_else(|| "no finite step".into());
        return Err(CliError::Numerical(format!("{} blew up at step {step} (t = {time}); {last}", c.sim.scheme)));
    }
    let es = ExactSolution::new(c.sim.eps, c.sim.alpha)?;
    let vel = res.final_velocity_error();
    let p = res.final_pressure_error();
    let p_raw = mms::pressure_l2_error_raw(&res.state.p_n, &es, res.state.time);
    println!(
        "scheme={} N={} eps={:e} t={} dt={} theta={} alpha={}",
        c.sim.scheme, c.n, c.sim.eps, res.state.time, c.sim.dt, c.sim.theta, c.sim.alpha
    );
    println!("velocity L2 error: {:.6e}", vel.unwrap_or(f64::NAN));
    println!("pressure L2 error: {:.6e} (mean-centred), {:.6e} (raw)", p.unwrap_or(f64::NAN), p_raw);
    if let Some(out) = &a.out {
        let row = ExperimentRow {
            n: c.n,
            t: c.sim.t_end,
            eps: c.sim.eps,
            scheme: c.sim.scheme,
            vel_l2: vel,
            p_l2: p,
            dt: c.sim.dt,
            theta: c.sim.theta,
            alpha: c.sim.alpha,
            status: RowStatus::Ok,
            wall_clock_s: wall,
        };
        write_or_print(&report::render(&[row], a.format)?, Some(out))?;
    }
    Ok(())
}

fn cmd_table(a: &TableArgs) -> CliResult<()> {
    let base = resolve(None, None, None, &a.sim)?.sim;
    if a.jobs == Some(0) {
        return Err(CliError::Usage("invalid value for `--jobs`: must be at least 1".into()));
    }
    if let Some(bad) = a.grids.iter().find(|&&n| n < 3) {
        return Err(CliError::Usage(format!("invalid value for `--grids`: need at least 3 cells, got {bad}")));
    }
    let schemes: Vec<Scheme> = match a.scheme {
        Some(s) => vec![s.into()],
        None => vec![Scheme::Cfvm, Scheme::Nfvm],
    };
    let rows = report::run_table(&a.grids, &a.eps_list, &schemes, &base, a.jobs)?;
    let cmp = report::compare(&rows, &ComparisonPolicy::default());
    if !cmp.is_empty() {
        let ok = cmp.iter().filter(|c| c.agrees).count();
        eprintln!("reference agreement: {ok}/{} cells", cmp.len());
    }
    write_or_print(&report::render(&rows, a.format)?, a.out.as_deref())
}

fn cmd_scaling(a: &ScalingArgs) -> CliResult<()> {
    let quantities: Vec<ScalingQuantity> = match &a.quantity {
        Some(q) => vec![ScalingQuantity::parse(q)
            .ok_or_else(|| CliError::Usage(format!("invalid value for `--quantity`: unknown quantity `{q}`")))?],
        None => ScalingQuantity::ALL.to_vec(),
    };
    if a.eps_list.is_empty() {
        return Err(CliError::Usage("invalid value for `--eps-list`: must be nonempty".into()));
    }
    let mut studies = Vec::new();
    for q in quantities {
        let s = report::run_scaling_study(&a.eps_list, q, a.t, a.alpha)?;
        println!("{:<20} slope {:.4} (expected {})", q.name(), s.slope, q.expected_exponent());
        studies.push(s);
    }
    if let Some(out) = &a.out {
        write_or_print(&report::render_scaling(&studies)?, Some(out))?;
    }
    Ok(())
}

fn cmd_verify() -> CliResult<()> {
    let checks = property_suite()?;
    for c in &checks {
        println!(
            "{} {}: worst {:.3e} (tolerance {:.0e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.worst,
            c.tolerance
        );
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(CliError::Numerical("corrector property suite failed".into()))
    }
}

/// Executes an already parsed command.
pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Table(a) => cmd_table(a),
        Command::Scaling(a) => cmd_scaling(a),
        Command::VerifyCorrectors => cmd_verify(),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            EXIT_NUMERICAL
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("layerfv").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults_match_frozen_configuration() {
        let c = resolve(None, None, None, &SimArgs::default()).unwrap();
        assert_eq!(c.sim, SimConfig::default());
        assert_eq!(c.n, 20);
    }

    #[test]
    fn negative_eps_is_a_usage_error_naming_the_flag() {
        let Command::Run(a) = parse(&["run", "--eps", "-1"]).command else { panic!() };
        match resolve(a.scheme, a.eps, a.n, &a.sim) {
            Err(CliError::Usage(m)) => assert!(m.contains("--eps"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn t_end_flag_name_is_reported_with_dashes() {
        let Command::Run(a) = parse(&["run", "--t-end", "0"]).command else { panic!() };
        match resolve(a.scheme, a.eps, a.n, &a.sim) {
            Err(CliError::Usage(m)) => assert!(m.contains("--t-end"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# sweep\neps = 1e-4\nt-end=0.5\nscheme = cfvm\nn=12\n").unwrap();
        let cfg = path.to_str().unwrap();
        let Command::Run(a) = parse(&["run", "--config", cfg, "--eps", "1e-3"]).command else { panic!() };
        let c = resolve(a.scheme, a.eps, a.n, &a.sim).unwrap();
        assert_eq!(c.sim.eps, 1e-3);
        assert_eq!(c.sim.t_end, 0.5);
        assert_eq!(c.sim.scheme, Scheme::Cfvm);
        assert_eq!(c.n, 12);
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, "viscosity = 1\n").unwrap();
        let sim = SimArgs { config: Some(path), ..SimArgs::default() };
        assert!(matches!(resolve(None, None, None, &sim), Err(CliError::Usage(_))));
    }

    #[test]
    fn table_defaults_cover_the_full_sweep() {
        let Command::Table(a) = parse(&["table"]).command else { panic!() };
        assert_eq!(a.grids, vec![10, 20, 30]);
        assert_eq!(a.eps_list.len(), 5);
        assert_eq!(a.format, OutputFormat::Csv);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["layerfv", "run", "--eps", "-1"]), EXIT_USAGE);
        assert_eq!(main_with_args(["layerfv", "bogus"]), EXIT_USAGE);
        assert_eq!(main_with_args(["layerfv", "run", "--n", "2"]), EXIT_USAGE);
        assert_eq!(main_with_args(["layerfv", "--help"]), EXIT_OK);
    }
}
