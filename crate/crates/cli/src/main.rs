//! `eveguess`: key rates, Eve's maximal guessing probability and critical
//! error rates for qubit QKD protocols, as CSV or JSON.
//!
//! Exit codes: 0 success, 1 usage or malformed input, 2 infeasible rates or
//! no crossing, 3 optimizer restarts disagree (the result is still written).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eveguess::analysis::{
    critical_eps_entropy, critical_eps_guessing, scatter, table1_scan, write_scatter_csv, write_table_csv,
    CriticalOptions,
};
use eveguess::{maximize_guessing, secure_key_rate, standard_bb84, standard_sixstate, OptimizerOptions, ProtocolConfig};

use eveguess_cli::output::{self, CriticalRecord, Failure, PestarRecord, ScatterOutput, TableOutput};

#[derive(Debug, Parser)]
#[command(name = "eveguess", version, about = "Eavesdropper guessing probability and key rates for qubit QKD")]
struct Cli {
    /// Worker threads for restarts, samples and table columns (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Secure key rate and its entropic terms.
    Rate(RateArgs),
    /// Eve's maximal guessing probability.
    Pestar(PestarArgs),
    /// Error rates where P_B = P_E* and where the key rate vanishes.
    Critical(CriticalArgs),
    /// Critical rates of the z / (pi/2, phi1) four-state protocol.
    Table1(Table1Args),
    /// Random (P_B, P_E) samples.
    Scatter(ScatterArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output path, or `-` for standard output.
    #[arg(long, default_value = "-")]
    out: String,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct ProtocolArg {
    /// `bb84`, `sixstate`, or a path to a protocol JSON file.
    #[arg(long, default_value = "bb84")]
    protocol: String,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Optimizer restarts.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    starts: u64,
}

impl SearchArgs {
    fn optimizer(&self) -> OptimizerOptions {
        OptimizerOptions { starts: self.starts as usize, seed: self.seed, ..OptimizerOptions::default() }
    }
}

#[derive(Debug, Args)]
struct RateArgs {
    #[command(flatten)]
    protocol: ProtocolArg,

    /// One rate per basis, or a single value shared by all bases.
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    eps: Vec<f64>,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct PestarArgs {
    #[command(flatten)]
    protocol: ProtocolArg,

    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    eps: Vec<f64>,

    #[command(flatten)]
    search: SearchArgs,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CriticalArgs {
    #[command(flatten)]
    protocol: ProtocolArg,

    #[command(flatten)]
    search: SearchArgs,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct Table1Args {
    /// Azimuths of the second direction, radians unless `--deg`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, FRAC_PI_2])]
    phi1: Vec<f64>,

    #[arg(long)]
    deg: bool,

    #[command(flatten)]
    search: SearchArgs,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ScatterArgs {
    #[command(flatten)]
    protocol: ProtocolArg,

    #[arg(long, default_value_t = 4000)]
    samples: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[command(flatten)]
    output: OutputArgs,
}

fn load_protocol(arg: &ProtocolArg) -> Result<ProtocolConfig, Failure> {
    match arg.protocol.as_str() {
        "bb84" => Ok(standard_bb84()),
        "sixstate" => Ok(standard_sixstate()),
        path => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("malformed protocol file {path}: {e}")))
        }
    }
}

fn expand_eps(config: &ProtocolConfig, eps: &[f64]) -> Result<Vec<f64>, Failure> {
    match eps.len() {
        1 => Ok(vec![eps[0]; config.t()]),
        n if n == config.t() => Ok(eps.to_vec()),
        n => Err(Failure::Usage(format!("--eps takes 1 or {} values, got {n}", config.t()))),
    }
}

fn run_rate(args: &RateArgs) -> Result<ExitCode, Failure> {
    let config = load_protocol(&args.protocol)?;
    let eps = expand_eps(&config, &args.eps)?;
    let report = secure_key_rate(&config, &eps)?;
    output::emit_record(&report, &args.output.out, args.output.format == Format::Json)?;
    Ok(ExitCode::SUCCESS)
}

fn run_pestar(args: &PestarArgs) -> Result<ExitCode, Failure> {
    let config = load_protocol(&args.protocol)?;
    let eps = expand_eps(&config, &args.eps)?;
    let result = maximize_guessing(&config, &eps, &args.search.optimizer())?;
    let record = PestarRecord::new(&result, args.search.seed);
    output::emit_record(&record, &args.output.out, args.output.format == Format::Json)?;
    if result.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: optimizer restarts disagree by more than the agreement tolerance");
        Ok(ExitCode::from(3))
    }
}

fn run_critical(args: &CriticalArgs) -> Result<ExitCode, Failure> {
    let config = load_protocol(&args.protocol)?;
    let opts = CriticalOptions { optimizer: args.search.optimizer(), ..CriticalOptions::default() };
    let guess = critical_eps_guessing(&config, &opts)?;
    let entropy = critical_eps_entropy(&config)?;
    let record = CriticalRecord::new(&guess, &entropy);
    output::emit_record(&record, &args.output.out, args.output.format == Format::Json)?;
    Ok(ExitCode::SUCCESS)
}

fn run_table1(args: &Table1Args) -> Result<ExitCode, Failure> {
    let phi1: Vec<f64> = if args.deg { args.phi1.iter().map(|d| d.to_radians()).collect() } else { args.phi1.clone() };
    let opts = CriticalOptions { optimizer: args.search.optimizer(), ..CriticalOptions::default() };
    let rows = table1_scan(&phi1, &opts)?;
    let mut csv = Vec::new();
    write_table_csv(&rows, &mut csv)?;
    let bytes = match args.output.format {
        Format::Csv => csv,
        Format::Json => output::to_json(&TableOutput::from_csv(&csv, args.search.seed, args.search.starts)?)?,
    };
    output::write_atomic(&args.output.out, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn run_scatter(args: &ScatterArgs) -> Result<ExitCode, Failure> {
    let config = load_protocol(&args.protocol)?;
    let points = scatter(&config, args.samples, args.seed)?;
    let mut csv = Vec::new();
    write_scatter_csv(&points, &mut csv)?;
    let bytes = match args.output.format {
        Format::Csv => csv,
        Format::Json => output::to_json(&ScatterOutput::from_csv(&csv, args.seed)?)?,
    };
    output::write_atomic(&args.output.out, &bytes)?;
    eprintln!("scatter: {} samples, seed {}", points.len(), args.seed);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout and are not failures
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match &cli.command {
        Command::Rate(args) => run_rate(args),
        Command::Pestar(args) => run_pestar(args),
        Command::Critical(args) => run_critical(args),
        Command::Table1(args) => run_table1(args),
        Command::Scatter(args) => run_scatter(args),
    };
    match outcome {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
