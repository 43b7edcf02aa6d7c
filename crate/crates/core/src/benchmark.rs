//! Compile a batch of circuits under several allocation strategies and measure
//! the simulated error of each result.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::allocation::{insert_swaps, total_fidelity, Allocation, CompiledCircuit};
use crate::anneal::{hybrid_allocate, AnnealConfig};
use crate::circuit::Circuit;
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::noise::{simulate_measured_error, ErrorReport, NoiseOptions};
use crate::search::{check_capacity, local_allocate};
use crate::swap_table::SwapPathTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Logical qubit `i` on physical qubit `i`.
    Identity,
    /// A uniformly random injective placement.
    Random,
    LocalSearch,
    Hybrid(AnnealConfig),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Identity => "identity",
            Strategy::Random => "random",
            Strategy::LocalSearch => "local",
            Strategy::Hybrid(_) => "hybrid",
        }
    }

    /// The four strategies of the standard comparison.
    pub fn standard(hybrid: AnnealConfig) -> Vec<Strategy> {
        vec![
            Strategy::Identity,
            Strategy::Random,
            Strategy::LocalSearch,
            Strategy::Hybrid(hybrid),
        ]
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// Parses a strategy name; `hybrid` gets the default annealing parameters.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Strategy::Identity),
            "random" => Ok(Strategy::Random),
            "local" | "local_search" => Ok(Strategy::LocalSearch),
            "hybrid" => Ok(Strategy::Hybrid(AnnealConfig::default())),
            other => Err(Error::InvalidArgument(format!(
                "unknown allocator {other:?} (expected identity, random, local or hybrid)"
            ))),
        }
    }
}

/// Uniformly random injective placement of `num_logical` qubits.
pub fn random_allocation<R: Rng + ?Sized>(num_logical: usize, num_physical: usize, rng: &mut R) -> Result<Allocation> {
    check_capacity(num_logical, num_physical)?;
    let mut slots: Vec<usize> = (0..num_physical).collect();
    slots.shuffle(rng);
    Allocation::from_physical(&slots[..num_logical])
}

/// Compiles `circuit` with `strategy`. `seed` feeds the random placement and the
/// annealer; the other strategies ignore it.
pub fn allocate(
    strategy: &Strategy,
    circuit: &Circuit,
    device: &DeviceModel,
    table: &SwapPathTable,
    seed: u64,
) -> Result<CompiledCircuit> {
    match strategy {
        Strategy::Identity => {
            check_capacity(circuit.num_qubits, device.num_qubits())?;
            insert_swaps(circuit, device, &Allocation::identity(circuit.num_qubits), table)
        }
        Strategy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_allocation(circuit.num_qubits, device.num_qubits(), &mut rng)?;
            insert_swaps(circuit, device, &a, table)
        }
        Strategy::LocalSearch => local_allocate(circuit, device, table).map(|(c, _)| c),
        Strategy::Hybrid(config) => {
            let config = AnnealConfig { seed, ..*config };
            hybrid_allocate(circuit, device, table, &config).map(|r| r.compiled)
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub circuit: String,
    pub allocator: String,
    pub total_fidelity: f64,
    pub swaps: usize,
    pub report: ErrorReport,
}

/// Runs every strategy on every circuit. Task `(i, j)` (circuit `i`, strategy
/// `j`) derives its seeds from stream `i * strategies.len() + j` of `seed`, so
/// the rows are the same however the tasks are scheduled.
pub fn run_benchmark(
    circuits: &[Circuit],
    device: &DeviceModel,
    strategies: &[Strategy],
    shots: u64,
    seed: u64,
    opts: &NoiseOptions,
) -> Result<Vec<BenchmarkRow>> {
    let table = SwapPathTable::build(device);
    let tasks: Vec<(usize, usize)> = (0..circuits.len())
        .flat_map(|i| (0..strategies.len()).map(move |j| (i, j)))
        .collect();
    tasks
        .par_iter()
        .map(|&(i, j)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((i * strategies.len() + j) as u64);
            let (alloc_seed, sim_seed) = (rng.random::<u64>(), rng.random::<u64>());
            let compiled = allocate(&strategies[j], &circuits[i], device, &table, alloc_seed)?;
            let report = simulate_measured_error(&compiled, device, shots, sim_seed, opts)?;
            Ok(BenchmarkRow {
                circuit: circuits[i].source_name.clone(),
                allocator: strategies[j].name().to_string(),
                total_fidelity: total_fidelity(&compiled, device),
                swaps: compiled.swap_count(),
                report,
            })
        })
        .collect()
}

/// `circuit,allocator,qubit,shots,errors,rate`: one row per measured qubit,
/// followed by a pooled row with qubit `all`.
pub fn write_benchmark_csv<W: std::io::Write>(rows: &[BenchmarkRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["circuit", "allocator", "qubit", "shots", "errors", "rate"])
        .map_err(io)?;
    for row in rows {
        let shots = row.report.shots_per_qubit;
        for (q, &e) in &row.report.errors {
            let rate = e as f64 / shots as f64;
            w.write_record([
                row.circuit.as_str(),
                row.allocator.as_str(),
                &q.to_string(),
                &shots.to_string(),
                &e.to_string(),
                &rate.to_string(),
            ])
            .map_err(io)?;
        }
        w.write_record([
            row.circuit.as_str(),
            row.allocator.as_str(),
            "all",
            &row.report.total_shots().to_string(),
            &row.report.total_errors().to_string(),
            &row.report.percent_error().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn benchmark_csv(rows: &[BenchmarkRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_benchmark_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Median pooled error rate of one allocator across circuits.
pub fn median_error(rows: &[BenchmarkRow], allocator: &str) -> Option<f64> {
    let mut v: Vec<f64> = rows
        .iter()
        .filter(|r| r.allocator == allocator)
        .map(|r| r.report.percent_error())
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}
