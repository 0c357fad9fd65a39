use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nuqsim::compile::dump_circuit;
use nuqsim::scan::{
    csv_string, emit_csv, emit_plot, point_circuit, run_scan, ConfigFile, ConfigOverrides,
    EnergyGrid, Mixing, ScanConfig, Scenario, Synthesis,
};
use nuqsim::Error;

#[derive(Parser)]
#[command(
    name = "nuqsim",
    version,
    about = "Neutrino oscillations in matter on an emulated qubit device"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan oscillation probabilities over an energy grid.
    Scan(ScanArgs),
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    /// JSON configuration; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Energy grid in GeV as `min:max:points`.
    #[arg(long)]
    energies: Option<EnergyGrid>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fold phases with the virtual-Z pass before execution.
    #[arg(long)]
    compile: bool,
    #[arg(long, value_enum)]
    synthesis: Option<Synthesis>,
    #[arg(long, value_enum)]
    mixing: Option<Mixing>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Print the circuit of the first grid point to standard error.
    #[arg(long)]
    dump_circuit: bool,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DOMAIN: u8 = 3;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } | Error::InvalidArgument(_) | Error::Parse { .. } => EXIT_CONFIG,
        Error::Domain(_) => EXIT_DOMAIN,
        _ => EXIT_FAILURE,
    }
}

fn scan(args: ScanArgs) -> nuqsim::Result<()> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path).map_err(|e| match e {
            Error::Io { path, source } => {
                Error::config("config", format!("{}: {source}", path.display()))
            }
            other => other,
        })?,
        None => ConfigFile::default(),
    };
    let flags = ConfigOverrides {
        scenario: args.scenario,
        energies: args.energies,
        shots: args.shots,
        seed: args.seed,
        compile: args.compile.then_some(true),
        synthesis: args.synthesis,
        mixing: args.mixing,
        csv: args.csv,
        svg: args.svg,
    };
    let cfg = ScanConfig::resolve(file, flags)?;

    if args.dump_circuit {
        let energy = cfg.energies.values()[0];
        let pc = point_circuit(&cfg, 0, energy)?;
        let mut err = std::io::stderr().lock();
        let _ = writeln!(
            err,
            "# E = {energy:?} GeV, pulses = {}",
            pc.diagnostics.pulse_count
        );
        let _ = write!(err, "{}", dump_circuit(&pc.circuit));
    }

    let result = run_scan(&cfg)?;
    match &cfg.csv {
        Some(path) => emit_csv(&result, path)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(csv_string(&result).as_bytes())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    if let Some(path) = &cfg.svg {
        emit_plot(&result, path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Scan(args) => scan(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
