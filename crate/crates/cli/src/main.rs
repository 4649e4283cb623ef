mod commands;
mod config;
mod error;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

const AFTER_HELP: &str = "\
Files may name bundled data as bundled:NAME:
  hamiltonians  network, hrec, projector (1 - |0..0><0..0| on the input register)
  circuits      circuit-a, template-b, ring5
  parameters    circuit-a

CSV traces have one header row and floats with 17 significant digits.
  simulate   iteration,t,energy[,fidelity],p0..
  recompile  iteration,energy,bound,fidelity,ansatz_fidelity,stage,p0..
  eliminate  iteration,energy,bound,fidelity,ansatz_fidelity,stage,removed,p0..
             (parameters keep their original index; eliminated ones read 0,
             `removed` holds the index eliminated at that row)

Exit status: 0 success, 1 input error, 2 finished with diagnostics.";

#[derive(Debug, Parser)]
#[command(name = "qrecompile", version, about = "Variational circuit recompilation and spin-network dynamics")]
#[command(after_help = AFTER_HELP)]
struct Cli {
    /// Worker threads for the linear-system assembly.
    #[arg(long, global = true, env = "RECOMPILER_THREADS")]
    threads: Option<usize>,
    /// Config file with one [section] per subcommand; keys are flag names.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Real- or imaginary-time variational evolution of a circuit.
    Simulate(SimulateArgs),
    /// Recompile a circuit's output state into a template.
    Recompile(RecompileArgs),
    /// Remove near-identity gates from a recompiled template.
    Eliminate(EliminateArgs),
    /// Build a Trotter circuit and report its fidelity against exact evolution.
    Trotter(TrotterArgs),
    /// Fidelity of a circuit's output against exact evolution.
    Exact(ExactArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Real,
    Imag,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Derivative {
    Analytic,
    Fd4,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderingArg {
    Fixed,
    Alternating,
}

#[derive(Debug, Args)]
struct EvolutionArgs {
    /// Linear solver: tsvd[:TOL], tikhonov[:L1,L2,..] or lstsq. Plain tikhonov
    /// takes its candidates from the singular values.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long, value_enum, default_value = "analytic")]
    derivative: Derivative,
    /// Do not add the global-phase parameter.
    #[arg(long)]
    no_global_phase: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value = "bundled:network")]
    hamiltonian: String,
    #[arg(long, default_value = "bundled:circuit-a")]
    circuit: String,
    /// Starting parameters; every parameter starts at 1e-8 otherwise.
    #[arg(long)]
    params: Option<String>,
    /// Input basis state, qubit 0 first, from 0 1 + -.
    #[arg(long = "in", default_value = "1++++++")]
    input: String,
    #[arg(long, value_enum, default_value = "real")]
    mode: Mode,
    #[arg(long, default_value_t = 700)]
    steps: usize,
    /// Step size; 2.5e-3 in real time, 1e-2 in imaginary time.
    #[arg(long)]
    dt: Option<f64>,
    /// Convergence window in iterations (imaginary time).
    #[arg(long, default_value_t = 50)]
    window: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[command(flatten)]
    evolution: EvolutionArgs,
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    params_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct JobArgs {
    #[arg(long, default_value = "bundled:circuit-a")]
    source: String,
    #[arg(long, default_value = "bundled:circuit-a", conflicts_with = "random_source_params")]
    source_params: String,
    /// Draw the source angles uniformly from [-pi, pi) with this seed.
    #[arg(long)]
    random_source_params: Option<u64>,
    #[arg(long = "in", default_value = "1++++++")]
    input: String,
    /// Recompilation Hamiltonian; built from the input state if omitted.
    #[arg(long)]
    hrec: Option<String>,
    #[arg(long, default_value_t = 1e-2)]
    dtau: f64,
    #[arg(long, default_value_t = 5000)]
    max_iterations: usize,
    #[arg(long, default_value_t = 50)]
    window: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[command(flatten)]
    evolution: EvolutionArgs,
}

#[derive(Debug, Args)]
struct RecompileArgs {
    #[command(flatten)]
    job: JobArgs,
    #[arg(long, default_value = "bundled:template-b")]
    template: String,
    /// Lure schedule N:THRESHOLD, scaling the source angles by n/N.
    #[arg(long)]
    lure: Option<String>,
    /// Iteration budget of each lure stage before the last.
    #[arg(long, default_value_t = 2000)]
    stage_iterations: usize,
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    params_out: PathBuf,
}

#[derive(Debug, Args)]
struct EliminateArgs {
    #[command(flatten)]
    job: JobArgs,
    /// Template the parameters belong to.
    #[arg(long, default_value = "bundled:template-b")]
    recompiled: String,
    #[arg(long)]
    params: String,
    #[arg(long, default_value_t = 2.0)]
    defect_factor: f64,
    #[arg(long, default_value_t = 0.1)]
    max_dphi: f64,
    /// Defect to measure growth against; the defect of the input otherwise.
    #[arg(long)]
    baseline_defect: Option<f64>,
    /// Relaxation iterations after each elimination.
    #[arg(long, default_value_t = qrecompile::recompiler::DEFAULT_RELAX_ITERATIONS)]
    relax: usize,
    #[arg(long)]
    circuit_out: PathBuf,
    #[arg(long)]
    params_out: Option<PathBuf>,
    #[arg(long)]
    trace: PathBuf,
}

#[derive(Debug, Args)]
struct TrotterArgs {
    #[arg(long)]
    cycles: usize,
    #[arg(long)]
    time: f64,
    #[arg(long, value_enum, default_value = "fixed")]
    ordering: OrderingArg,
    #[arg(long, default_value = "bundled:network")]
    hamiltonian: String,
    #[arg(long = "in", default_value = "1++++++")]
    input: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    params_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExactArgs {
    #[arg(long)]
    time: f64,
    #[arg(long)]
    fidelity_against: String,
    #[arg(long)]
    params: Option<String>,
    #[arg(long, default_value = "bundled:network")]
    hamiltonian: String,
    #[arg(long = "in", default_value = "1++++++")]
    input: String,
}

/// Outcome of a command that ran to the end.
pub enum Status {
    Ok,
    Diagnostics(Vec<String>),
}

fn expand_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(path.as_ref(), e))?;
    let sections = config::parse(&text, &path)?;
    config::merge(args, &Cli::command(), &sections, &path)
}

fn run(cli: Cli) -> Result<Status, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::input("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::input(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Recompile(a) => commands::recompile(a),
        Command::Eliminate(a) => commands::eliminate(a),
        Command::Trotter(a) => commands::trotter(a),
        Command::Exact(a) => commands::exact(a),
    }
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Diagnostics(notes)) => {
            for n in notes {
                eprintln!("warning: {n}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
