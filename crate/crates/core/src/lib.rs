//! Noise-aware qubit allocation.
//!
//! A [`Circuit`] of logical qubits is placed onto a calibrated [`DeviceModel`].
//! SWAPs are inserted only where a two-qubit gate's operands are not coupled,
//! and allocations are ranked by the product of the fidelities of every gate
//! executed. [`local_allocate`] finds the optimum with a best-first search
//! over partial allocations; [`hybrid_allocate`] trades optimality for speed by
//! annealing over partial allocations scored with a short search.
//!
//! ```
//! use qalloc::{local_allocate, parse_qasm, uniform_device, SwapPathTable, Topology};
//!
//! let circuit = parse_qasm("OPENQASM 2.0;\nqreg q[3];\ncx q[0],q[2];\n").unwrap();
//! let device = uniform_device(Topology::Line, 4, 1.0, 0.95).unwrap();
//! let table = SwapPathTable::build(&device);
//! let (compiled, fidelity) = local_allocate(&circuit, &device, &table).unwrap();
//! assert_eq!(compiled.swap_count(), 0);
//! assert!((fidelity.value - 0.95).abs() < 1e-12);
//! ```

pub mod allocation;
pub mod anneal;
pub mod benchmark;
pub mod circuit;
pub mod device;
pub mod error;
pub mod noise;
pub mod oracle;
pub mod qasm;
pub mod search;
pub mod swap_table;

pub use allocation::{
    edge_weight, fidelity_bound, insert_swaps, total_fidelity, Allocation, BoundEvaluator, CompiledCircuit,
    FidelityBound, PhysicalGate, FIDELITY_TOLERANCE,
};
pub use anneal::{hybrid_allocate, metropolis_accept, propose, temperature, AnnealConfig, AnnealTrace, HybridResult};
pub use benchmark::{allocate, benchmark_csv, median_error, run_benchmark, BenchmarkRow, Strategy};
pub use circuit::{generate_random_cnot_circuit, qubit_order, Circuit, Gate, LogicalQubit};
pub use device::{
    load_calibration, uniform_device, CouplingEdge, DeviceModel, PhysicalQubit, SyntheticCalibration, Topology,
};
pub use error::{Error, Result};
pub use noise::{expected_error, simulate_measured_error, ErrorReport, NoiseOptions};
pub use oracle::{count_worst_case_edges, exhaustive_allocate, OracleResult};
pub use qasm::{emit_qasm, parse_qasm, parse_qasm_named, write_qasm};
pub use search::{local_allocate, search_init, LocalSearch, SearchNode};
pub use swap_table::{Route, SwapPathTable};
