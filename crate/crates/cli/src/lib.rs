//! `opnorm` command-line frontend.
//!
//! Every subcommand reads an optional `--config` file, overlays its flags,
//! validates the merged [`RunConfig`] and echoes it into the report it writes.

pub mod commands;
pub mod config;
pub mod error;
pub mod matrix_io;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use opnorm_core::kv::Entry;

pub use config::{load_config, RunConfig};
pub use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "opnorm", version, about = "Operator-norm concentration laboratory")]
struct Cli {
    /// Worker threads; results do not depend on this value
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample one n x n matrix and write it as text
    #[command(allow_negative_numbers = true)]
    Gen(GenArgs),
    /// Operator norm of a generated or stored matrix
    #[command(allow_negative_numbers = true)]
    Norm(NormArgs),
    /// Build a greedy eps-net on the unit sphere and audit it
    #[command(allow_negative_numbers = true)]
    Net(NetArgs),
    /// Exceedance probabilities P(|M| > A sqrt(n)) over an A grid
    #[command(allow_negative_numbers = true)]
    Tails(TailsArgs),
    /// Mean-norm growth exponent across sizes, with CSV
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Exceedance decay in n at fixed A, with CSV
    #[command(allow_negative_numbers = true)]
    Decay(SweepArgs),
    /// Sub-Gaussian diagnostics on drawn or stored samples
    #[command(allow_negative_numbers = true)]
    Diag(DiagArgs),
    /// Fraction of Gaussian edge values inside the n^(-1/6) window
    #[command(allow_negative_numbers = true)]
    Tw(TwArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Config file of `key = value` lines (a report's [config] section also works)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; mandatory for stochastic runs
    #[arg(long)]
    seed: Option<String>,
    /// Output file (report, matrix or net); stdout when absent
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
struct EnsembleFlags {
    /// iid | rows | ones
    #[arg(long)]
    ensemble: Option<String>,
    /// gaussian | rademacher | uniform | trunc_gaussian | student_t
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    half_width: Option<String>,
    #[arg(long)]
    cap: Option<String>,
    #[arg(long)]
    dof: Option<String>,
    /// identity | rotation | factor
    #[arg(long)]
    mixer: Option<String>,
    #[arg(long)]
    load: Option<String>,
    #[arg(long)]
    rotation_seed: Option<String>,
    /// Shorthand for `--ensemble ones`
    #[arg(long)]
    ones: bool,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    ens: EnsembleFlags,
    #[arg(long)]
    n: Option<String>,
}

#[derive(Args, Debug)]
struct NormArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    ens: EnsembleFlags,
    #[arg(long)]
    n: Option<String>,
    /// Matrix text file instead of a generated matrix
    #[arg(long)]
    input: Option<String>,
    /// spectral | one | inf
    #[arg(long)]
    kind: Option<String>,
    /// exact | power (spectral only)
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    rtol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
}

#[derive(Args, Debug)]
struct NetArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    /// Consecutive rejections that end construction
    #[arg(long)]
    saturation: Option<String>,
    /// Coverage audit probes
    #[arg(long)]
    probes: Option<String>,
}

#[derive(Args, Debug)]
struct TailsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    ens: EnsembleFlags,
    #[arg(long)]
    n: Option<String>,
    #[arg(long = "A")]
    a: Option<String>,
    /// Comma-separated A values
    #[arg(long = "A-grid")]
    a_grid: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Fixed vector instead of the operator norm: first_basis | uniform_diagonal | seeded_random
    #[arg(long)]
    u_mode: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    ens: EnsembleFlags,
    /// Comma-separated, strictly increasing sizes
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long = "A")]
    a: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// CSV path for the per-size rows
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Args, Debug)]
struct DiagArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    ens: EnsembleFlags,
    /// Whitespace-separated samples instead of drawing
    #[arg(long)]
    input: Option<String>,
    /// scalar | row_norm
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Row length for row_norm samples
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    p_max: Option<String>,
}

#[derive(Args, Debug)]
struct TwArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    width_c: Option<String>,
}

#[derive(Default)]
struct Flags(Vec<Entry>);

impl Flags {
    fn add(&mut self, key: &str, value: &Option<String>) -> &mut Self {
        if let Some(v) = value {
            self.0.push(Entry {
                key: key.into(),
                value: v.trim().into(),
                line: 0,
            });
        }
        self
    }

    fn common(&mut self, c: &Common) -> &mut Self {
        self.add("master_seed", &c.seed).add("output", &c.output)
    }

    fn ensemble(&mut self, e: &EnsembleFlags) -> &mut Self {
        self.add("ensemble", &e.ensemble)
            .add("dist", &e.dist)
            .add("sigma", &e.sigma)
            .add("half_width", &e.half_width)
            .add("cap", &e.cap)
            .add("dof", &e.dof)
            .add("mixer", &e.mixer)
            .add("load", &e.load)
            .add("rotation_seed", &e.rotation_seed);
        if e.ones {
            self.add("ensemble", &Some("ones".into()));
        }
        self
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Norm(_) => "norm",
            Command::Net(_) => "net",
            Command::Tails(_) => "tails",
            Command::Sweep(_) => "sweep",
            Command::Decay(_) => "decay",
            Command::Diag(_) => "diag",
            Command::Tw(_) => "tw",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Gen(a) => &a.common,
            Command::Norm(a) => &a.common,
            Command::Net(a) => &a.common,
            Command::Tails(a) => &a.common,
            Command::Sweep(a) | Command::Decay(a) => &a.common,
            Command::Diag(a) => &a.common,
            Command::Tw(a) => &a.common,
        }
    }

    fn flags(&self) -> Vec<Entry> {
        let mut f = Flags::default();
        f.common(self.common());
        match self {
            Command::Gen(a) => {
                f.ensemble(&a.ens).add("n", &a.n);
            }
            Command::Norm(a) => {
                f.ensemble(&a.ens)
                    .add("n", &a.n)
                    .add("input", &a.input)
                    .add("kind", &a.kind)
                    .add("method", &a.method)
                    .add("rtol", &a.rtol)
                    .add("max_iter", &a.max_iter);
            }
            Command::Net(a) => {
                f.add("dim", &a.dim)
                    .add("eps", &a.eps)
                    .add("saturation_T", &a.saturation)
                    .add("probes", &a.probes);
            }
            Command::Tails(a) => {
                f.ensemble(&a.ens)
                    .add("n", &a.n)
                    .add("A", &a.a)
                    .add("A_grid", &a.a_grid)
                    .add("trials", &a.trials)
                    .add("u_mode", &a.u_mode);
            }
            Command::Sweep(a) | Command::Decay(a) => {
                f.ensemble(&a.ens)
                    .add("n_grid", &a.n_grid)
                    .add("A", &a.a)
                    .add("trials", &a.trials)
                    .add("csv", &a.csv);
            }
            Command::Diag(a) => {
                f.ensemble(&a.ens)
                    .add("input", &a.input)
                    .add("source", &a.source)
                    .add("samples", &a.samples)
                    .add("n", &a.n)
                    .add("p_max", &a.p_max);
            }
            Command::Tw(a) => {
                f.add("n", &a.n).add("trials", &a.trials).add("width_c", &a.width_c);
            }
        }
        f.0
    }
}

/// Merges config file entries (if any) with flags, flags last.
fn resolve(cmd: &Command) -> Result<RunConfig, CliError> {
    let name = cmd.name();
    let mut entries = match &cmd.common().config {
        Some(path) => config::read_entries(path)?,
        None => Vec::new(),
    };
    if let Some(e) = entries.iter().find(|e| e.key == "subcommand") {
        if e.value != name {
            return Err(CliError::Usage(format!(
                "config is for subcommand `{}`, not `{name}`",
                e.value
            )));
        }
    }
    entries.push(Entry {
        key: "subcommand".into(),
        value: name.into(),
        line: 0,
    });
    entries.extend(cmd.flags());
    RunConfig::from_entries(&entries)
}

fn dispatch(cmd: &Command, cfg: &mut RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Gen(_) => commands::gen(cfg, out),
        Command::Norm(_) => commands::norm(cfg, out),
        Command::Net(_) => commands::net(cfg, out),
        Command::Tails(_) => commands::tails(cfg, out),
        Command::Sweep(_) => commands::sweep(cfg, out),
        Command::Decay(_) => commands::decay(cfg, out),
        Command::Diag(_) => commands::diag(cfg, out),
        Command::Tw(_) => commands::tw(cfg, out),
    }
}

/// Parses `args` (program name first) and runs the subcommand, writing
/// normal output to `out`.
pub fn execute<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            write!(out, "{e}").map_err(|e| CliError::Runtime(e.to_string()))?;
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(CliError::Usage(first.trim_start_matches("error: ").to_string()));
        }
    };
    let mut cfg = resolve(&cli.command)?;
    match cli.threads {
        None => dispatch(&cli.command, &mut cfg, out),
        Some(0) => Err(CliError::Usage("invalid `threads`: must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut buf = Vec::new();
            let result = pool.install(|| dispatch(&cli.command, &mut cfg, &mut buf));
            out.write_all(&buf).map_err(|e| CliError::Runtime(e.to_string()))?;
            result
        }
    }
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(args, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("{}", e.line());
            e.code()
        }
    }
}
