//! Python bindings for the qalloc qubit allocator.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use ::qalloc as core;
use core::benchmark::Strategy;
use core::{AnnealConfig, NoiseOptions, SwapPathTable, SyntheticCalibration};

create_exception!(qalloc, QallocError, PyException);
create_exception!(qalloc, InfeasibleError, QallocError);
create_exception!(qalloc, ResourceLimitError, QallocError);

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Infeasible(_) => InfeasibleError::new_err(e.to_string()),
        core::Error::ResourceLimit { .. } => ResourceLimitError::new_err(e.to_string()),
        _ if e.is_input_error() => PyValueError::new_err(e.to_string()),
        _ => QallocError::new_err(e.to_string()),
    }
}

/// A logical circuit.
#[pyclass(module = "qalloc", frozen)]
struct Circuit(core::Circuit);

#[pymethods]
impl Circuit {
    /// Parses OpenQASM 2.0 source.
    #[staticmethod]
    fn from_qasm(text: &str) -> PyResult<Self> {
        core::parse_qasm(text).map(Circuit).map_err(to_py)
    }

    /// Random circuit of `cnots` cx gates on distinct qubit pairs.
    #[staticmethod]
    #[pyo3(signature = (qubits, cnots, seed = 0))]
    fn random(qubits: usize, cnots: usize, seed: u64) -> PyResult<Self> {
        core::generate_random_cnot_circuit(qubits, cnots, seed)
            .map(Circuit)
            .map_err(to_py)
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.0.num_qubits
    }

    #[getter]
    fn two_qubit_count(&self) -> usize {
        self.0.two_qubit_count()
    }

    fn to_qasm(&self) -> String {
        core::write_qasm(&self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(num_qubits={}, gates={}, cx={})",
            self.0.num_qubits,
            self.0.gates.len(),
            self.0.two_qubit_count()
        )
    }
}

/// A calibrated device: qubits with gate fidelities and a coupling graph.
#[pyclass(module = "qalloc", frozen)]
struct Device {
    model: core::DeviceModel,
    table: SwapPathTable,
}

impl Device {
    fn wrap(model: core::DeviceModel) -> Self {
        let table = SwapPathTable::build(&model);
        Device { model, table }
    }
}

#[pymethods]
impl Device {
    /// Loads a calibration JSON document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        core::load_calibration(text).map(Device::wrap).map_err(to_py)
    }

    /// Synthetic device with fidelities drawn uniformly from the given ranges.
    #[staticmethod]
    #[pyo3(signature = (topology, qubits, f1 = (0.999, 0.9999), f2 = (0.85, 0.99), readout = None, seed = 0))]
    fn synthetic(
        topology: &str,
        qubits: usize,
        f1: (f64, f64),
        f2: (f64, f64),
        readout: Option<(f64, f64)>,
        seed: u64,
    ) -> PyResult<Self> {
        SyntheticCalibration {
            topology: topology.parse().map_err(to_py)?,
            num_qubits: qubits,
            fidelity1: f1,
            fidelity2: f2,
            readout,
            seed,
        }
        .generate()
        .map(Device::wrap)
        .map_err(to_py)
    }

    /// Device where every qubit and every edge shares one fidelity.
    #[staticmethod]
    fn uniform(topology: &str, qubits: usize, f1: f64, f2: f64) -> PyResult<Self> {
        let topology = topology.parse().map_err(to_py)?;
        core::uniform_device(topology, qubits, f1, f2)
            .map(Device::wrap)
            .map_err(to_py)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.model.name
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.model.num_qubits()
    }

    /// Edges as `(a, b, fidelity2)` tuples.
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.model.edges().iter().map(|e| (e.a, e.b, e.fidelity2)).collect()
    }

    fn coupling(&self, a: usize, b: usize) -> Option<f64> {
        self.model.coupling(a, b)
    }

    /// Best fidelity product of a SWAP chain moving a state from `a` to `b`.
    fn swap_fidelity(&self, a: usize, b: usize) -> f64 {
        self.table.swap_fidelity_product(a, b)
    }

    fn to_json(&self) -> String {
        self.model.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "Device(name={:?}, qubits={}, edges={})",
            self.model.name,
            self.model.num_qubits(),
            self.model.edges().len()
        )
    }
}

/// A circuit placed and routed on a device.
#[pyclass(module = "qalloc", frozen)]
struct Compiled {
    compiled: core::CompiledCircuit,
    device: core::DeviceModel,
}

#[pymethods]
impl Compiled {
    #[getter]
    fn initial_map(&self) -> Vec<usize> {
        self.compiled.initial_map.to_physical().unwrap_or_default()
    }

    #[getter]
    fn final_map(&self) -> Vec<usize> {
        self.compiled.final_map.to_physical().unwrap_or_default()
    }

    #[getter]
    fn swap_count(&self) -> usize {
        self.compiled.swap_count()
    }

    /// `(n1, n2)` counts with each SWAP expanded to three cx gates.
    #[getter]
    fn gate_counts(&self) -> (usize, usize) {
        self.compiled.gate_counts()
    }

    #[getter]
    fn fidelity(&self) -> f64 {
        core::total_fidelity(&self.compiled, &self.device)
    }

    fn to_qasm(&self) -> String {
        core::emit_qasm(&self.compiled, &self.device)
    }

    /// Sampled error rate of every measured physical qubit.
    #[pyo3(signature = (shots = 1024, seed = 0, readout = false))]
    fn simulate(&self, py: Python<'_>, shots: u64, seed: u64, readout: bool) -> PyResult<BTreeMap<usize, f64>> {
        let opts = NoiseOptions { readout };
        let report = py
            .detach(|| core::simulate_measured_error(&self.compiled, &self.device, shots, seed, &opts))
            .map_err(to_py)?;
        Ok(report.per_qubit())
    }

    /// Exact error probability of every measured physical qubit.
    #[pyo3(signature = (readout = false))]
    fn expected_error(&self, readout: bool) -> PyResult<BTreeMap<usize, f64>> {
        core::expected_error(&self.compiled, &self.device, &NoiseOptions { readout }).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Compiled(initial_map={:?}, swaps={}, fidelity={:.6})",
            self.initial_map(),
            self.swap_count(),
            self.fidelity()
        )
    }
}

/// Places `circuit` on `device` with the named allocator and routes it.
///
/// Allocators: `identity`, `random`, `local`, `hybrid`. The annealing
/// parameters apply to `hybrid` only.
#[pyfunction]
#[pyo3(signature = (circuit, device, allocator = "local", seed = 0, n = 10, t0 = 10.0, tau = 25.0, iters = 50, restarts = 1))]
#[allow(clippy::too_many_arguments)]
fn compile(
    py: Python<'_>,
    circuit: &Circuit,
    device: &Device,
    allocator: &str,
    seed: u64,
    n: usize,
    t0: f64,
    tau: f64,
    iters: usize,
    restarts: usize,
) -> PyResult<Compiled> {
    let strategy = match allocator.parse::<Strategy>().map_err(to_py)? {
        Strategy::Hybrid(_) => Strategy::Hybrid(AnnealConfig {
            n,
            t0,
            tau,
            iters_per_round: iters,
            restarts,
            seed,
            ..Default::default()
        }),
        other => other,
    };
    let compiled = py
        .detach(|| core::allocate(&strategy, &circuit.0, &device.model, &device.table, seed))
        .map_err(to_py)?;
    Ok(Compiled {
        compiled,
        device: device.model.clone(),
    })
}

/// Places `circuit` at the given physical qubits (index = logical qubit) and routes it.
#[pyfunction]
fn route(circuit: &Circuit, device: &Device, initial_map: Vec<usize>) -> PyResult<Compiled> {
    let allocation = core::Allocation::from_physical(&initial_map).map_err(to_py)?;
    let compiled = core::insert_swaps(&circuit.0, &device.model, &allocation, &device.table).map_err(to_py)?;
    Ok(Compiled {
        compiled,
        device: device.model.clone(),
    })
}

/// Optimum by enumerating every full allocation: `(fidelity, initial_map)`.
#[pyfunction]
fn exhaustive(py: Python<'_>, circuit: &Circuit, device: &Device) -> PyResult<(f64, Vec<usize>)> {
    let r = py
        .detach(|| core::exhaustive_allocate(&circuit.0, &device.model, &device.table))
        .map_err(to_py)?;
    Ok((r.best_fidelity, r.best_allocation.to_physical().unwrap_or_default()))
}

/// Number of edges of the allocation tree for `logical` qubits on `physical` slots.
#[pyfunction]
fn count_worst_case_edges(logical: u64, physical: u64) -> PyResult<num_bigint::BigUint> {
    core::count_worst_case_edges(logical, physical).map_err(to_py)
}

#[pymodule]
fn qalloc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Circuit>()?;
    m.add_class::<Device>()?;
    m.add_class::<Compiled>()?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(route, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive, m)?)?;
    m.add_function(wrap_pyfunction!(count_worst_case_edges, m)?)?;
    m.add("QallocError", m.py().get_type::<QallocError>())?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add("ResourceLimitError", m.py().get_type::<ResourceLimitError>())?;
    Ok(())
}
