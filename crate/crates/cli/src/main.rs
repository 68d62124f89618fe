use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use zipper_core::analysis::{self, CodePoint};
use zipper_core::channel::{self, ChannelSpec, DataMode, PointSpec, StopRule};
use zipper_core::interleaver::{MapFamily, ZipperMap};
use zipper_core::window::{Scheduling, WindowConfig};
use zipper_core::zipper::ZipperParams;
use zipper_core::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(
    name = "zipper",
    version,
    about = "Zipper code simulator and analysis tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER simulation over a binary symmetric channel.
    Simulate(SimulateArgs),
    /// Print parameters, memory, degree histogram and map checks.
    Audit(AuditArgs),
    /// Reproduce the published gap or miscorrection tables.
    Tables(TablesArgs),
}

#[derive(Args, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct SimulateArgs {
    /// Key-value (TOML) file with defaults for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<Family>,
    /// Target code rate; the real width is derived from it.
    #[arg(long, conflicts_with = "mbar")]
    rate: Option<f64>,
    /// Real buffer width n - m.
    #[arg(long)]
    mbar: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    /// Crossover probability; repeat for several points.
    #[arg(long = "p", num_args = 1.., conflicts_with = "p_range")]
    p: Option<Vec<f64>>,
    /// Linear sweep `start:stop:count`.
    #[arg(long = "p-range")]
    p_range: Option<String>,
    /// Window size in multiples of the real width.
    #[arg(long)]
    window_multiplier: Option<usize>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    scheduling: Option<SchedulingArg>,
    /// Miscorrection-free constituent decoding.
    #[arg(long)]
    genie: Option<bool>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_bits: Option<f64>,
    #[arg(long)]
    target_errors: Option<u64>,
    #[arg(long)]
    mode: Option<ModeArg>,
    /// Worker threads for the sweep (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// CSV destination (stdout if absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    family: Family,
    #[arg(long, conflicts_with = "mbar", required_unless_present = "mbar")]
    rate: Option<f64>,
    #[arg(long)]
    mbar: Option<usize>,
    #[arg(long, default_value_t = 2)]
    t: usize,
}

#[derive(Args)]
struct TablesArgs {
    which: Table,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Family {
    Staircase,
    Chevron,
    HalfChevron,
}

impl From<Family> for MapFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Staircase => MapFamily::Staircase,
            Family::Chevron => MapFamily::Chevron,
            Family::HalfChevron => MapFamily::HalfChevron,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SchedulingArg {
    Exhaustive,
    FreshOnly,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    ErrorDomain,
    RandomData,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Gaps,
    Misc,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Infeasible(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InfeasibleRate { .. }
            | Error::InvalidShortening { .. }
            | Error::InvalidMap(_) => Failure::Infeasible(e.to_string()),
            Error::Config(_) | Error::UnsupportedRadius(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Audit(args) => audit(args),
        Command::Tables(args) => tables(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible parameters: {msg}");
            ExitCode::from(EXIT_INFEASIBLE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn code_point(
    family: MapFamily,
    rate: Option<f64>,
    mbar: Option<usize>,
    t: usize,
) -> Result<CodePoint, Failure> {
    match (rate, mbar) {
        (_, Some(mbar)) => Ok(CodePoint::from_mbar(family, mbar, t)?),
        (Some(rate), None) => Ok(analysis::derive_params(family, rate, t)?),
        (None, None) => Err(Failure::Usage("one of --rate or --mbar is required".into())),
    }
}

fn parse_range(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--p-range expects start:stop:count, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    Ok(match count {
        0 => return Err(bad()),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    })
}

/// Flags win over the config file, which wins over built-in defaults.
fn merge(flags: SimulateArgs) -> Result<SimulateArgs, Failure> {
    let Some(path) = flags.config.clone() else {
        return Ok(flags);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let file: SimulateArgs =
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let (rate, mbar) = if flags.rate.is_some() || flags.mbar.is_some() {
        (flags.rate, flags.mbar)
    } else {
        (file.rate, file.mbar)
    };
    let (p, p_range) = if flags.p.is_some() || flags.p_range.is_some() {
        (flags.p, flags.p_range)
    } else {
        (file.p, file.p_range)
    };
    Ok(SimulateArgs {
        config: flags.config,
        family: flags.family.or(file.family),
        rate,
        mbar,
        t: flags.t.or(file.t),
        p,
        p_range,
        window_multiplier: flags.window_multiplier.or(file.window_multiplier),
        max_rounds: flags.max_rounds.or(file.max_rounds),
        scheduling: flags.scheduling.or(file.scheduling),
        genie: flags.genie.or(file.genie),
        seed: flags.seed.or(file.seed),
        max_bits: flags.max_bits.or(file.max_bits),
        target_errors: flags.target_errors.or(file.target_errors),
        mode: flags.mode.or(file.mode),
        workers: flags.workers.or(file.workers),
        output: flags.output.or(file.output),
    })
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let args = merge(args)?;
    let family: MapFamily = args
        .family
        .ok_or_else(|| Failure::Usage("--family is required".into()))?
        .into();
    let t = args.t.unwrap_or(2);
    let point = code_point(family, args.rate, args.mbar, t)?;
    let ps = match (&args.p, &args.p_range) {
        (Some(p), _) => p.clone(),
        (None, Some(range)) => parse_range(range)?,
        (None, None) => return Err(Failure::Usage("one of --p or --p-range is required".into())),
    };
    let multiplier = args.window_multiplier.unwrap_or(8);
    let scheduling = match args.scheduling.unwrap_or(SchedulingArg::FreshOnly) {
        SchedulingArg::Exhaustive => Scheduling::Exhaustive,
        SchedulingArg::FreshOnly => Scheduling::FreshOnly,
    };
    let mode = match args.mode.unwrap_or(ModeArg::ErrorDomain) {
        ModeArg::ErrorDomain => DataMode::ErrorDomain,
        ModeArg::RandomData => DataMode::RandomData,
    };
    let window = WindowConfig {
        max_rounds: args.max_rounds.unwrap_or(10),
        genie: args.genie.unwrap_or(false),
        scheduling,
        ..WindowConfig::with_multiplier(point.mbar, multiplier)
    };
    let max_bits = args.max_bits.unwrap_or(1e9);
    if max_bits.is_nan() || max_bits < 1.0 {
        return Err(Failure::Usage(format!(
            "--max-bits must be positive, got {max_bits}"
        )));
    }
    let stop = StopRule {
        max_bits: max_bits as u64,
        target_errors: args.target_errors.unwrap_or(100),
    };
    let seed = args.seed.unwrap_or(1);
    let workers = args.workers.unwrap_or(0);

    let points = ps
        .iter()
        .map(|&p| {
            Ok(PointSpec {
                family,
                mbar: point.mbar,
                t,
                channel: ChannelSpec::new(p, seed)?,
                window,
                stop,
                mode,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    // Fail fast on configuration problems before any point runs.
    channel::Simulation::new(points[0])?;

    let mut header = vec![
        format!(
            "config: family={family} target_rate={} rate={:e} mbar={} n={} m={} r={} t={t}",
            point.target_rate, point.rate, point.mbar, point.n, point.m, point.r
        ),
        format!(
            "config: window_multiplier={multiplier} window_rows={} stride={} max_rounds={} scheduling={} genie={}",
            window.window_rows,
            window.stride,
            window.max_rounds,
            window.scheduling.name(),
            window.genie
        ),
        format!(
            "config: seed={seed} max_bits={} target_errors={} mode={} workers={workers}",
            stop.max_bits,
            stop.target_errors,
            match mode {
                DataMode::ErrorDomain => "error-domain",
                DataMode::RandomData => "random-data",
            }
        ),
        format!(
            "config: p=[{}]",
            ps.iter().map(|p| format!("{p:e}")).collect::<Vec<_>>().join(" ")
        ),
    ];
    if point.adjusted {
        header.push(format!(
            "warning: target rate {} is not realizable by {family}; using mbar={} (rate {:e})",
            point.target_rate, point.mbar, point.rate
        ));
    }

    let report = channel::run_sweep(&points, workers);
    let mut out = open_output(args.output.as_deref())?;
    channel::write_csv(&mut out, &header, &report)?;
    out.flush()?;
    match report.results.iter().find_map(|r| r.as_ref().err()) {
        Some(e) => Err(Failure::Runtime(format!("sweep incomplete: {e}"))),
        None => Ok(()),
    }
}

fn audit(args: AuditArgs) -> Result<(), Failure> {
    let family: MapFamily = args.family.into();
    let point = code_point(family, args.rate, args.mbar, args.t)?;
    let map = ZipperMap::new(family, point.mbar)?;
    let params = ZipperParams::new(point.n, point.m, point.r)?;
    let descriptor = map.descriptor();
    let degrees = analysis::degree_audit(family, point.mbar)?;
    let verdict = analysis::verify_map(family, point.mbar)?;
    let (num, den) = params.rate_fraction();
    let pass = |ok: bool| if ok { "PASS" } else { "FAIL" };

    let mut out = io::stdout().lock();
    writeln!(out, "family: {family}")?;
    if point.adjusted {
        writeln!(
            out,
            "warning: target rate {} adjusted to mbar={}",
            point.target_rate, point.mbar
        )?;
    }
    writeln!(out, "mbar: {}", point.mbar)?;
    writeln!(out, "n: {}", point.n)?;
    writeln!(out, "m: {}", point.m)?;
    writeln!(out, "r: {}", point.r)?;
    writeln!(out, "t: {}", point.t)?;
    writeln!(out, "rate: {:e} ({num}/{den})", params.rate())?;
    writeln!(out, "period: {}", descriptor.period)?;
    writeln!(out, "memory: {}", descriptor.memory)?;
    let hist: Vec<String> = degrees.iter().map(|(d, f)| format!("{d}: {f}")).collect();
    writeln!(out, "degrees: {{{}}}", hist.join(", "))?;
    writeln!(out, "causality: {}", pass(verdict.causal))?;
    writeln!(
        out,
        "periodicity: {} (nu={})",
        pass(verdict.periodic),
        descriptor.period
    )?;
    writeln!(out, "inverse: {}", pass(verdict.inverse_consistent))?;
    if verdict.causal && verdict.periodic && verdict.inverse_consistent {
        Ok(())
    } else {
        Err(Failure::Runtime("map verification failed".into()))
    }
}

fn tables(args: TablesArgs) -> Result<(), Failure> {
    let mut out = open_output(args.output.as_deref())?;
    match args.which {
        Table::Gaps => analysis::write_gap_table(&mut out, &analysis::gap_table()?)?,
        Table::Misc => analysis::write_misc_table(&mut out, &analysis::misc_table())?,
    }
    out.flush()?;
    Ok(())
}
