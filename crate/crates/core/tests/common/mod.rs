#![allow(dead_code)]

use qalloc::{Circuit, CouplingEdge, DeviceModel, Gate, PhysicalQubit, Topology};
use rand::Rng;

/// Device on `topology` with every fidelity drawn from the given ranges.
pub fn random_device<R: Rng>(rng: &mut R, topology: Topology, n: usize, f1: (f64, f64), f2: (f64, f64)) -> DeviceModel {
    let qubits = (0..n)
        .map(|index| PhysicalQubit {
            index,
            fidelity1: rng.random_range(f1.0..=f1.1),
            readout_fidelity: None,
        })
        .collect();
    let edges = topology
        .edges(n)
        .unwrap()
        .into_iter()
        .map(|(a, b)| CouplingEdge::new(a, b, rng.random_range(f2.0..=f2.1)))
        .collect();
    DeviceModel::new("random", qubits, edges).unwrap()
}

/// Random CNOT circuit with occasional single-qubit gates.
pub fn random_circuit<R: Rng>(rng: &mut R, num_qubits: usize, num_gates: usize, one_qubit_share: f64) -> Circuit {
    let gates = (0..num_gates)
        .map(|_| {
            if num_qubits < 2 || rng.random::<f64>() < one_qubit_share {
                Gate::one(["h", "x", "t"][rng.random_range(0..3)], rng.random_range(0..num_qubits))
            } else {
                let c = rng.random_range(0..num_qubits);
                let mut t = rng.random_range(0..num_qubits - 1);
                if t >= c {
                    t += 1;
                }
                Gate::cx(c, t)
            }
        })
        .collect();
    Circuit::with_gates(num_qubits, gates, "random").unwrap()
}

/// Small devices used across the property tests.
pub fn small_topologies() -> Vec<(Topology, usize)> {
    let mut v = Vec::new();
    for n in 3..=6 {
        v.push((Topology::Line, n));
        v.push((Topology::Ring, n));
    }
    v.push((Topology::Ladder, 4));
    v.push((Topology::Ladder, 6));
    v
}

pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
