//! The `qalloc` command line: compile OpenQASM programs onto a calibrated
//! device, benchmark allocators under simulated noise, and generate fixtures.
//!
//! Exit codes: 0 success, 1 bad input or usage, 2 no feasible allocation,
//! 3 a search or enumeration limit was hit.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qalloc::benchmark::{allocate, write_benchmark_csv, Strategy};
use qalloc::{
    generate_random_cnot_circuit, hybrid_allocate, load_calibration, parse_qasm_named, run_benchmark,
    total_fidelity, write_qasm, AnnealConfig, CompiledCircuit, DeviceModel, Error, NoiseOptions, SwapPathTable,
    SyntheticCalibration, Topology,
};
use serde::Serialize;

/// Environment variable naming the default calibration file.
pub const DEVICE_ENV: &str = "QALLOC_DEVICE";

#[derive(Parser)]
#[command(name = "qalloc", version, about = "Noise-aware qubit allocation for OpenQASM programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Allocate and route a program, writing device-level QASM and a JSON report.
    Compile(CompileArgs),
    /// Compile random CNOT circuits with several allocators and measure simulated error.
    Benchmark(BenchmarkArgs),
    /// Generate a random CNOT circuit or a synthetic device calibration.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
}

#[derive(Args, Clone)]
struct AnnealArgs {
    /// Local-search pops per annealing evaluation.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Initial annealing temperature.
    #[arg(long, default_value_t = 10.0)]
    t0: f64,
    /// Temperature decay constant: T = t0 * exp(-s / tau).
    #[arg(long, default_value_t = 25.0)]
    tau: f64,
    /// Annealing iterations per round.
    #[arg(long, default_value_t = 50)]
    iters: usize,
    /// Independent annealing restarts; the best result is kept.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Largest search frontier before giving up (exit code 3).
    #[arg(long, default_value_t = qalloc::search::DEFAULT_FRONTIER_CAP)]
    frontier_cap: usize,
}

impl AnnealArgs {
    fn config(&self, seed: u64) -> AnnealConfig {
        AnnealConfig {
            n: self.n,
            t0: self.t0,
            tau: self.tau,
            iters_per_round: self.iters,
            seed,
            restarts: self.restarts,
            frontier_cap: self.frontier_cap,
        }
    }
}

#[derive(Args)]
struct CompileArgs {
    /// OpenQASM 2.0 program.
    qasm: PathBuf,
    /// Calibration JSON.
    #[arg(env = DEVICE_ENV)]
    device: PathBuf,
    /// identity, random, local or hybrid.
    #[arg(long, default_value = "local")]
    allocator: String,
    #[command(flatten)]
    anneal: AnnealArgs,
    /// Seed for the random and hybrid allocators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the compiled QASM (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the JSON report. Defaults to standard output when --out is
    /// given and to standard error otherwise.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the hybrid allocator's annealing trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Worker threads for annealing restarts (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Calibration JSON.
    #[arg(env = DEVICE_ENV)]
    device: PathBuf,
    /// Number of random circuits.
    #[arg(long, default_value_t = 20)]
    circuits: usize,
    /// Logical qubits per circuit.
    #[arg(long, default_value_t = 10)]
    qubits: usize,
    /// CNOTs per circuit.
    #[arg(long, default_value_t = 30)]
    cnots: usize,
    /// Runs per measured qubit.
    #[arg(long, default_value_t = qalloc::noise::DEFAULT_SHOTS)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated allocators to compare.
    #[arg(long, value_delimiter = ',', default_value = "identity,random,local,hybrid")]
    allocators: Vec<String>,
    #[command(flatten)]
    anneal: AnnealArgs,
    /// Apply readout errors from the calibration.
    #[arg(long)]
    readout: bool,
    /// Worker threads (0 = all cores). The output does not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// CSV destination (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenKind {
    /// Random CNOT-only circuit.
    Circuit {
        #[arg(long, default_value_t = 10)]
        qubits: usize,
        #[arg(long, default_value_t = 30)]
        cnots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic calibration with fidelities drawn uniformly from the given ranges.
    Device {
        /// line, ring, ladder, grid or complete.
        #[arg(long, default_value = "ladder")]
        topology: String,
        #[arg(long, default_value_t = 16)]
        qubits: usize,
        /// Single-qubit fidelity range, `lo:hi` or a single value.
        #[arg(long, default_value = "0.999:0.9999")]
        f1: String,
        /// Two-qubit fidelity range, `lo:hi` or a single value.
        #[arg(long, default_value = "0.85:0.99")]
        f2: String,
        /// Readout fidelity range; omitted from the file when not given.
        #[arg(long)]
        readout: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct AnnealParams {
    n: usize,
    t0: f64,
    tau: f64,
    iters: usize,
    restarts: usize,
}

#[derive(Serialize)]
struct CompileReport {
    input: String,
    device: String,
    allocator: String,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    anneal: Option<AnnealParams>,
    initial_map: Vec<usize>,
    final_map: Vec<usize>,
    swap_count: usize,
    n1: usize,
    n2: usize,
    total_fidelity: f64,
    wall_time_seconds: f64,
}

/// Error plus the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_) => 2,
            Error::ResourceLimit { .. } => 3,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_failure(message: String) -> Failure {
    Failure { code: 1, message }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_failure(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| input_failure(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| input_failure(format!("cannot write to standard output: {e}"))),
    }
}

fn load_device(path: &Path) -> Result<DeviceModel, Failure> {
    Ok(load_calibration(&read(path)?)?)
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| input_failure(format!("cannot start worker threads: {e}")))
}

fn parse_range(text: &str, what: &str) -> Result<(f64, f64), Failure> {
    let bad = || input_failure(format!("{what} must be `lo:hi` or a single number, got {text:?}"));
    let mut parts = text.split(':');
    let lo: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let hi: f64 = match parts.next() {
        Some(h) => h.trim().parse().map_err(|_| bad())?,
        None => lo,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn compile(args: CompileArgs) -> Result<(), Failure> {
    let source = read(&args.qasm)?;
    let name = args
        .qasm
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let circuit = parse_qasm_named(&source, &name)?;
    let device = load_device(&args.device)?;
    let strategy: Strategy = args.allocator.parse()?;
    let config = args.anneal.config(args.seed);
    let table = SwapPathTable::build(&device);

    let start = Instant::now();
    let mut trace = None;
    let compiled: CompiledCircuit = match strategy {
        Strategy::LocalSearch => {
            qalloc::search::local_allocate_capped(&circuit, &device, &table, config.frontier_cap)?.0
        }
        Strategy::Hybrid(_) => {
            let result = thread_pool(args.jobs)?.install(|| hybrid_allocate(&circuit, &device, &table, &config))?;
            trace = Some(result.trace);
            result.compiled
        }
        other => allocate(&other, &circuit, &device, &table, args.seed)?,
    };
    let elapsed = start.elapsed().as_secs_f64();

    let (n1, n2) = compiled.gate_counts();
    let report = CompileReport {
        input: args.qasm.display().to_string(),
        device: device.name.clone(),
        allocator: strategy.name().to_string(),
        seed: args.seed,
        anneal: matches!(strategy, Strategy::Hybrid(_)).then(|| AnnealParams {
            n: config.n,
            t0: config.t0,
            tau: config.tau,
            iters: config.iters_per_round,
            restarts: config.restarts,
        }),
        initial_map: compiled.initial_map.to_physical().expect("compiled maps are full"),
        final_map: compiled.final_map.to_physical().expect("compiled maps are full"),
        swap_count: compiled.swap_count(),
        n1,
        n2,
        total_fidelity: total_fidelity(&compiled, &device),
        wall_time_seconds: elapsed,
    };
    let mut report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    report_json.push('\n');

    write_output(args.out.as_deref(), &qalloc::emit_qasm(&compiled, &device))?;
    match (&args.report, &args.out) {
        (Some(path), _) => write_output(Some(path), &report_json)?,
        (None, Some(_)) => write_output(None, &report_json)?,
        (None, None) => eprint!("{report_json}"),
    }
    if let (Some(path), Some(trace)) = (&args.trace, &trace) {
        write_output(Some(path), &trace.to_csv())?;
    }
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> Result<(), Failure> {
    let device = load_device(&args.device)?;
    let config = args.anneal.config(args.seed);
    config.validate()?;
    let strategies = args
        .allocators
        .iter()
        .map(|name| {
            name.parse::<Strategy>().map(|s| match s {
                Strategy::Hybrid(_) => Strategy::Hybrid(config),
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let circuits = (0..args.circuits)
        .map(|i| {
            let mut c = generate_random_cnot_circuit(args.qubits, args.cnots, args.seed.wrapping_add(i as u64))?;
            c.source_name = format!("{}_{i}", c.source_name);
            Ok(c)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let opts = NoiseOptions { readout: args.readout };
    let rows = thread_pool(args.jobs)?
        .install(|| run_benchmark(&circuits, &device, &strategies, args.shots, args.seed, &opts))?;
    let mut buf = Vec::new();
    write_benchmark_csv(&rows, &mut buf)?;
    write_output(args.out.as_deref(), &String::from_utf8(buf).expect("csv is utf-8"))
}

fn gen(kind: GenKind) -> Result<(), Failure> {
    match kind {
        GenKind::Circuit {
            qubits,
            cnots,
            seed,
            out,
        } => {
            let circuit = generate_random_cnot_circuit(qubits, cnots, seed)?;
            write_output(out.as_deref(), &write_qasm(&circuit))
        }
        GenKind::Device {
            topology,
            qubits,
            f1,
            f2,
            readout,
            seed,
            out,
        } => {
            let topology: Topology = topology.parse()?;
            let device = SyntheticCalibration {
                topology,
                num_qubits: qubits,
                fidelity1: parse_range(&f1, "--f1")?,
                fidelity2: parse_range(&f2, "--f2")?,
                readout: readout.map(|r| parse_range(&r, "--readout")).transpose()?,
                seed,
            }
            .generate()?;
            write_output(out.as_deref(), &device.to_json())
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Compile(args) => compile(args),
        Command::Benchmark(args) => benchmark(args),
        Command::Gen { kind } => gen(kind),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
