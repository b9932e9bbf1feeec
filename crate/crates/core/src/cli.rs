//! Command-line driver: `verify`, `run`, `converge` and `dispersion`.
//!
//! Settings come from flags, then from an optional `--config` file of
//! `key = value` lines (keys are the long flag names), then from defaults.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    convergence_sweep, k_grid, make_packet, make_triangular_packet, moments, triangular_moments, walk_dispersion,
    Branch, PacketSpec, SweepConfig, TriangularFrame,
};
use crate::dirac::DiracParams;
use crate::error::{Error, Result};
use crate::io::{
    fmt_f64, read_config, write_convergence_csv, write_convergence_json, write_dispersion_csv, write_field_csv,
    write_json, write_summary_csv, write_triangular_field_csv, SummaryRow,
};
use crate::lattice::{BravaisField, GridShape, TriangularField};
use crate::scalar::Complex;
use crate::spin::WalkParams;
use crate::verify::{run_identity_suite, Faults};
use crate::walk::{
    decode_bravais, decode_triangular, encode_bravais, encode_triangular, random_spinor, triangular_step, StepOperator,
    WalkKind,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Quantum walks on square, honeycomb and triangular lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the algebraic identities and solve for the τ family.
    Verify(VerifyArgs),
    /// Evolve a packet and write field snapshots and per-step statistics.
    Run(CommonArgs),
    /// Sweep ε and fit the order of convergence to the Dirac equation.
    Converge(CommonArgs),
    /// Tabulate the eigenphases of the walk against the Dirac cone.
    Dispersion(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Random starts for the τ solver.
    #[arg(long, default_value_t = 1000)]
    pub solver_starts: usize,
    /// Directory for `verify.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Negative control: corrupt one input of the suite.
    #[arg(long, hide = true, value_parser = ["flip-tau1"])]
    pub inject_fault: Option<String>,
}

/// Flags shared by the simulation commands, kept as text until merged
/// with the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// regular, honeycomb or triangular.
    #[arg(long)]
    pub walk: Option<String>,
    #[arg(long)]
    pub n1: Option<String>,
    #[arg(long)]
    pub n2: Option<String>,
    /// Step parameter; fractions such as `1/64` are accepted.
    #[arg(long)]
    pub eps: Option<String>,
    /// Comma-separated ε values for `converge`.
    #[arg(long)]
    pub eps_list: Option<String>,
    #[arg(long)]
    pub mass: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    /// Physical time for `converge`.
    #[arg(long)]
    pub time: Option<String>,
    /// Carrier wavevector `kx,ky`.
    #[arg(long, allow_hyphen_values = true)]
    pub k0: Option<String>,
    /// Packet width in lattice units.
    #[arg(long)]
    pub sigma: Option<String>,
    /// positive-energy or up-spinor.
    #[arg(long)]
    pub branch: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// `key = value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// packet or random initial data for `run`.
    #[arg(long)]
    pub init: Option<String>,
    /// Triangular length frame for `converge`: native or rescaled.
    #[arg(long)]
    pub frame: Option<String>,
    /// Half-width of the wavevector grid for `dispersion`.
    #[arg(long)]
    pub k_max: Option<String>,
    /// Points per axis of the wavevector grid for `dispersion`.
    #[arg(long)]
    pub k_count: Option<String>,
}

/// Keys accepted in a config file.
const KEYS: [&str; 17] = [
    "walk", "n1", "n2", "eps", "eps-list", "mass", "steps", "time", "k0", "sigma", "branch", "out", "seed", "init",
    "frame", "k-max", "k-count",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Packet,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Run,
    Converge,
    Dispersion,
}

/// Fully resolved and validated settings of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub walk: WalkKind,
    pub n1: usize,
    pub n2: usize,
    pub eps: f64,
    pub mass: f64,
    pub steps: usize,
    pub time: f64,
    pub eps_list: Vec<f64>,
    pub packet: PacketSpec,
    pub out_path: PathBuf,
    pub seed: u64,
    pub init: InitKind,
    pub frame: TriangularFrame,
    pub k_max: f64,
    pub k_count: usize,
}

/// Parses a real, allowing `a/b`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let (a, b) = (parse_plain(a)?, parse_plain(b)?);
            if b == 0.0 {
                return Err(Error::Config(format!("division by zero in '{s}'")));
            }
            a / b
        }
        None => parse_plain(s)?,
    };
    if !v.is_finite() {
        return Err(Error::Config(format!("'{s}' is not a finite number")));
    }
    Ok(v)
}

fn parse_plain(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Config(format!("'{s}' is not a number")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse_real).collect()
}

fn parse_count(key: &str, s: &str) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| Error::Config(format!("{key}: '{s}' is not a non-negative integer")))
}

struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    fn merge(args: &CommonArgs) -> Result<Self> {
        let mut values = match &args.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        if let Some(bad) = values.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown config key '{bad}'")));
        }
        let flags = [
            ("walk", &args.walk),
            ("n1", &args.n1),
            ("n2", &args.n2),
            ("eps", &args.eps),
            ("eps-list", &args.eps_list),
            ("mass", &args.mass),
            ("steps", &args.steps),
            ("time", &args.time),
            ("k0", &args.k0),
            ("sigma", &args.sigma),
            ("branch", &args.branch),
            ("out", &args.out),
            ("seed", &args.seed),
            ("init", &args.init),
            ("frame", &args.frame),
            ("k-max", &args.k_max),
            ("k-count", &args.k_count),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k.to_string(), v.clone());
            }
        }
        Ok(Self { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn real(&self, key: &str, default: f64) -> Result<f64> {
        self.get(key).map_or(Ok(default), |s| parse_real(s).map_err(|e| Error::Config(format!("{key}: {e}"))))
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        self.get(key).map_or(Ok(default), |s| parse_count(key, s))
    }
}

impl RunConfig {
    /// Merges flags, config file and defaults, and validates the result.
    pub fn resolve(args: &CommonArgs, mode: Mode) -> Result<Self> {
        let s = Settings::merge(args)?;
        let walk: WalkKind = s.get("walk").unwrap_or("honeycomb").trim().parse()?;
        let default_n = if mode == Mode::Converge { 256 } else { 64 };
        let n1 = s.count("n1", default_n)?;
        let n2 = s.count("n2", n1)?;
        let eps = s.real("eps", 0.05)?;
        let mass = s.real("mass", 0.0)?;
        let steps = s.count("steps", 20)?;
        let time = s.real("time", 1.0)?;
        let eps_list = match s.get("eps-list") {
            Some(v) => parse_list(v).map_err(|e| Error::Config(format!("eps-list: {e}")))?,
            None => vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0],
        };
        let k0 = match s.get("k0") {
            Some(v) => match parse_list(v)?.as_slice() {
                [x, y] => [*x, *y],
                _ => return Err(Error::Config(format!("k0: expected 'kx,ky', got '{v}'"))),
            },
            None => [2.0, 0.0],
        };
        let sigma = s.real("sigma", 8.0)?;
        let branch: Branch = s.get("branch").unwrap_or("positive-energy").trim().parse()?;
        let packet = PacketSpec::new(k0, sigma, branch).map_err(|e| Error::Config(e.to_string()))?;
        let out_path = PathBuf::from(s.get("out").unwrap_or("."));
        let seed = s.get("seed").map_or(Ok(0), |v| {
            v.trim().parse::<u64>().map_err(|_| Error::Config(format!("seed: '{v}' is not an unsigned integer")))
        })?;
        let init = match s.get("init").unwrap_or("packet").trim() {
            "packet" => InitKind::Packet,
            "random" => InitKind::Random,
            other => return Err(Error::Config(format!("init: unknown '{other}' (expected packet or random)"))),
        };
        let frame = match s.get("frame").unwrap_or("rescaled").trim() {
            "native" => TriangularFrame::Native,
            "rescaled" => TriangularFrame::Rescaled,
            other => return Err(Error::Config(format!("frame: unknown '{other}' (expected native or rescaled)"))),
        };
        let k_max = s.real("k-max", 5.0)?;
        let k_count = s.count("k-count", 11)?;

        GridShape::new(n1, n2).map_err(|e| Error::Config(e.to_string()))?;
        WalkParams::new(eps, mass).map_err(|e| Error::Config(e.to_string()))?;
        if mode == Mode::Run && steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        if !(time > 0.0) {
            return Err(Error::Config(format!("time must be positive, got {time}")));
        }
        if !(k_max >= 0.0) || k_count == 0 {
            return Err(Error::Config("k-max must be non-negative and k-count positive".into()));
        }
        let cfg = Self {
            walk,
            n1,
            n2,
            eps,
            mass,
            steps,
            time,
            eps_list,
            packet,
            out_path,
            seed,
            init,
            frame,
            k_max,
            k_count,
        };
        if mode == Mode::Converge {
            if n1 != n2 {
                return Err(Error::Config(format!("converge uses a square box; got n1={n1}, n2={n2}")));
            }
            cfg.sweep_config().validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            walk: self.walk,
            time: self.time,
            mass: self.mass,
            eps_list: self.eps_list.clone(),
            packet: self.packet,
            n_finest: self.n1,
            frame: self.frame,
        }
    }

    fn shape(&self) -> GridShape {
        GridShape { n1: self.n1, n2: self.n2 }
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", dir.display())))
}

fn summary_row(step: usize, time: f64, norm0: f64, m: crate::analysis::Moments) -> SummaryRow {
    let norm = m.norm_sqr.sqrt();
    SummaryRow { step, time, norm, norm_drift: norm - norm0, mean: m.mean, spread: m.spread }
}

fn normalise(data: &mut [crate::spin::Spinor<f64>]) {
    let n = data.iter().map(|s| s.norm_sqr()).sum::<f64>().sqrt();
    for s in data {
        *s = s.scale(Complex::new(1.0 / n, 0.0));
    }
}

/// Evolves the configured initial state and writes `field_initial.csv`,
/// `field_final.csv` and `summary.csv`. Returns the summary rows.
pub fn cmd_run(cfg: &RunConfig) -> Result<Vec<SummaryRow>> {
    prepare_out(&cfg.out_path)?;
    let params = WalkParams::new(cfg.eps, cfg.mass)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.steps + 1);
    match cfg.walk {
        WalkKind::Regular | WalkKind::Honeycomb => {
            let f0 = match cfg.init {
                InitKind::Packet => make_packet(
                    cfg.shape(),
                    cfg.eps,
                    cfg.walk.basis(),
                    &cfg.packet,
                    &DiracParams::unit_speed(cfg.mass),
                )?,
                InitKind::Random => {
                    let mut f =
                        BravaisField::from_fn(cfg.shape(), cfg.eps, cfg.walk.basis(), |_, _| random_spinor(&mut rng));
                    normalise(&mut f.data);
                    f
                }
            };
            let op = StepOperator::new(cfg.walk, params);
            let encoded = cfg.walk == WalkKind::Honeycomb;
            let mut f = if encoded { encode_bravais(&f0) } else { f0.clone() };
            let norm0 = f.norm();
            // Site-local unitaries leave |ψ|² unchanged, so moments of ψ̃ are those of ψ.
            rows.push(summary_row(0, 0.0, norm0, moments(&f)));
            for n in 1..=cfg.steps {
                f = op.step_bravais(&f)?;
                rows.push(summary_row(n, n as f64 * cfg.eps, norm0, moments(&f)));
            }
            let f = if encoded { decode_bravais(&f) } else { f };
            write_field_csv(&cfg.out_path.join("field_initial.csv"), &f0)?;
            write_field_csv(&cfg.out_path.join("field_final.csv"), &f)?;
        }
        WalkKind::Triangular => {
            let f0 = match cfg.init {
                InitKind::Packet => {
                    make_triangular_packet(cfg.shape(), cfg.eps, &cfg.packet, cfg.mass, TriangularFrame::Native)?
                }
                InitKind::Random => {
                    let mut f = TriangularField::from_fn(cfg.shape(), cfg.eps, |_, _, _| random_spinor(&mut rng));
                    let mut all: Vec<_> = f.edges.concat();
                    normalise(&mut all);
                    for (k, chunk) in all.chunks(cfg.shape().len()).enumerate() {
                        f.edges[k] = chunk.to_vec();
                    }
                    f
                }
            };
            let op = StepOperator::triangular(params);
            let mut f = encode_triangular(&f0);
            let norm0 = f.norm();
            rows.push(summary_row(0, 0.0, norm0, triangular_moments(&f)));
            for n in 1..=cfg.steps {
                f = triangular_step(&f, &op)?;
                rows.push(summary_row(n, n as f64 * cfg.eps, norm0, triangular_moments(&f)));
            }
            write_triangular_field_csv(&cfg.out_path.join("field_initial.csv"), &f0)?;
            write_triangular_field_csv(&cfg.out_path.join("field_final.csv"), &decode_triangular(&f))?;
        }
    }
    write_summary_csv(&cfg.out_path.join("summary.csv"), &rows)?;
    Ok(rows)
}

/// Runs the sweep and writes `convergence.csv` and `convergence.json`.
pub fn cmd_converge(cfg: &RunConfig) -> Result<crate::analysis::ConvergenceReport> {
    prepare_out(&cfg.out_path)?;
    let report = convergence_sweep(&cfg.sweep_config())?;
    write_convergence_csv(&cfg.out_path.join("convergence.csv"), &report)?;
    write_convergence_json(&cfg.out_path.join("convergence.json"), &report)?;
    Ok(report)
}

/// Writes `dispersion.csv` over a square wavevector grid.
pub fn cmd_dispersion(cfg: &RunConfig) -> Result<crate::analysis::DispersionTable> {
    prepare_out(&cfg.out_path)?;
    let table = walk_dispersion(cfg.walk, WalkParams::new(cfg.eps, cfg.mass)?, &k_grid(cfg.k_max, cfg.k_count));
    write_dispersion_csv(&cfg.out_path.join("dispersion.csv"), &table)?;
    Ok(table)
}

/// Runs the identity suite and prints a table; exit 0 iff every check passes.
pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let faults = Faults { flip_tau1: args.inject_fault.as_deref() == Some("flip-tau1") };
    let report = run_identity_suite(faults, args.solver_starts);
    writeln!(out, "{:<44} {:>24} {:>10}  result", "identity", "deviation", "tolerance")?;
    for c in &report.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{:<44} {:>24} {:>10.1e}  {verdict}", c.name, fmt_f64(c.deviation), c.tolerance)?;
    }
    for xi in &report.tau_solutions {
        writeln!(out, "tau solution: xi = {}", fmt_f64(*xi))?;
    }
    if let Some(dir) = &args.out {
        prepare_out(dir)?;
        write_json(&dir.join("verify.json"), &report)?;
    }
    if report.all_passed() {
        writeln!(out, "all identities hold")?;
        Ok(EXIT_OK)
    } else {
        for c in report.failures() {
            writeln!(out, "failed: {}", c.name)?;
        }
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Verify(args) => cmd_verify(&args, out),
        Command::Run(args) => {
            let cfg = RunConfig::resolve(&args, Mode::Run)?;
            let rows = cmd_run(&cfg)?;
            let last = rows.last().expect("at least the initial row");
            writeln!(
                out,
                "{} walk, {} steps: norm drift {}, mean ({}, {}), spread {}",
                cfg.walk,
                cfg.steps,
                fmt_f64(last.norm_drift),
                fmt_f64(last.mean[0]),
                fmt_f64(last.mean[1]),
                fmt_f64(last.spread)
            )?;
            Ok(EXIT_OK)
        }
        Command::Converge(args) => {
            let cfg = RunConfig::resolve(&args, Mode::Converge)?;
            let report = cmd_converge(&cfg)?;
            writeln!(out, "{:>24} {:>24} {:>6} {:>6}", "eps", "l2_error", "n", "steps")?;
            for r in &report.rows {
                writeln!(out, "{:>24} {:>24} {:>6} {:>6}", fmt_f64(r.eps), fmt_f64(r.l2_error), r.n, r.steps)?;
            }
            match (report.fitted_order, report.fit_residual) {
                (Some(p), Some(res)) => writeln!(out, "fitted order {} (residual {})", fmt_f64(p), fmt_f64(res))?,
                _ => writeln!(out, "fitted order undefined (zero error)")?,
            }
            Ok(EXIT_OK)
        }
        Command::Dispersion(args) => {
            let cfg = RunConfig::resolve(&args, Mode::Dispersion)?;
            let table = cmd_dispersion(&cfg)?;
            writeln!(out, "{} rows written to {}", table.rows.len(), cfg.out_path.join("dispersion.csv").display())?;
            Ok(EXIT_OK)
        }
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}
