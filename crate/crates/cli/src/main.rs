//! `hillgap` command-line front end.

mod commands;
mod settings;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::settings::Settings;

const COMPLEX_HELP: &str = "Complex literals are written without spaces: 1.5-0.25i, -2i, 3.";

#[derive(Parser, Debug)]
#[command(name = "hillgap", version, about = "Spectral gaps of Hill and 1D Dirac operators", after_help = COMPLEX_HELP)]
struct Cli {
    /// Settings file with `key = value` lines and one `[section]` per
    /// subcommand; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<String>,

    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues near each unperturbed level, written as CSV.
    Spectrum(SpectrumArgs),
    /// Measured triangles against the closed-form predictions of a family.
    Verify(VerifyArgs),
    /// Isospectrality of two-exponential potentials, or shift invariance.
    Isospectral(IsoArgs),
}

#[derive(Args, Debug, Default)]
pub struct SpectrumArgs {
    /// Potential file or inline spec (`mathieu:a=1`, `hill:v-1=1,v1=4`,
    /// `dirac:p-1=1,q1=1`, `zero`, `two-exp:a=1,b=4`, ...).
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<String>,
    /// per+, per-, dir, neu or quasi:<t>.
    #[arg(long)]
    pub bc: Option<String>,
    /// Indices, e.g. `1..6` or `0,2,4`. For quasi:<t> the positions in the
    /// ordered spectrum, starting at 0.
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    /// galerkin, monodromy or both.
    #[arg(long)]
    pub backend: Option<String>,
    /// double or dd.
    #[arg(long)]
    pub precision: Option<String>,
    /// Output CSV path (default: standard output).
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct VerifyArgs {
    /// two-exp, gen-two-exp, s-exp, four-term, dirac-two-exp or smooth-jump.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long = "a", allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long = "b", allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long = "A", allow_hyphen_values = true)]
    pub big_a: Option<String>,
    #[arg(long = "B", allow_hyphen_values = true)]
    pub big_b: Option<String>,
    #[arg(long = "R")]
    pub big_r: Option<String>,
    #[arg(long = "S")]
    pub big_s: Option<String>,
    #[arg(long = "s")]
    pub s: Option<String>,
    #[arg(long = "m")]
    pub m: Option<String>,
    /// Jump of the m-th derivative across the period seam.
    #[arg(long, allow_hyphen_values = true)]
    pub jump: Option<String>,
    /// Fourier truncation of the smooth-jump potential (default 16).
    #[arg(long = "K")]
    pub big_k: Option<String>,
    /// Indices (default `1..8`).
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    #[arg(long = "out-json")]
    pub out_json: Option<String>,
    #[arg(long = "out-csv")]
    pub out_csv: Option<String>,
    /// Slack of the two-sided gap bound (default 0.3).
    #[arg(long)]
    pub eta: Option<String>,
    /// galerkin, monodromy or both (default both).
    #[arg(long)]
    pub backend: Option<String>,
    /// double, dd or auto (default auto).
    #[arg(long)]
    pub precision: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct IsoArgs {
    /// `a,b,c,d` with ab = cd.
    #[arg(long, allow_hyphen_values = true)]
    pub pair: Option<String>,
    /// Shift zeta applied to --potential.
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<String>,
    /// Quasi-momentum t of `y(pi) = e^{it} y(0)` (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Number of eigenvalues compared (default 12).
    #[arg(long)]
    pub count: Option<String>,
    /// double or dd.
    #[arg(long)]
    pub precision: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let section = match &cli.command {
        Command::Spectrum(_) => "spectrum",
        Command::Verify(_) => "verify",
        Command::Isospectral(_) => "isospectral",
    };
    let settings = match Settings::load(cli.config.as_deref(), section) {
        Ok(s) => s,
        Err(e) => return commands::fail(e),
    };
    if let Err(e) = configure_threads(&settings, cli.threads.as_deref()) {
        return commands::fail(e);
    }
    let code = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a, &settings),
        Command::Verify(a) => commands::verify(a, &settings),
        Command::Isospectral(a) => commands::isospectral(a, &settings),
    };
    match code {
        Ok(c) => c,
        Err(e) => commands::fail(e),
    }
}

fn configure_threads(settings: &Settings, flag: Option<&str>) -> Result<(), commands::Failure> {
    let Some(raw) = settings.pick(flag, "threads") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| commands::Failure::usage(format!("--threads expects a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| commands::Failure::usage(format!("cannot configure {n} threads: {e}")))
}
