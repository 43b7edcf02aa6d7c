//! Gate-list IR over logical qubits and the analyses the allocator needs.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Position of a qubit in the program's flattened qubit register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LogicalQubit(pub usize);

impl LogicalQubit {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for LogicalQubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    OneQubit {
        name: String,
        params: Vec<f64>,
        target: LogicalQubit,
    },
    TwoQubit {
        name: String,
        control: LogicalQubit,
        target: LogicalQubit,
    },
    Measure {
        target: LogicalQubit,
        clbit: usize,
    },
}

impl Gate {
    pub fn cx(control: usize, target: usize) -> Self {
        Gate::TwoQubit {
            name: "cx".to_string(),
            control: LogicalQubit(control),
            target: LogicalQubit(target),
        }
    }

    pub fn one(name: &str, target: usize) -> Self {
        Gate::OneQubit {
            name: name.to_string(),
            params: Vec::new(),
            target: LogicalQubit(target),
        }
    }

    /// Qubits the gate acts on, control first for two-qubit gates.
    pub fn qubits(&self) -> impl Iterator<Item = LogicalQubit> {
        let (a, b) = match *self {
            Gate::OneQubit { target, .. } | Gate::Measure { target, .. } => (target, None),
            Gate::TwoQubit {
                control, target, ..
            } => (control, Some(target)),
        };
        std::iter::once(a).chain(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub gates: Vec<Gate>,
    pub source_name: String,
}

impl Circuit {
    pub fn new(num_qubits: usize, source_name: impl Into<String>) -> Self {
        Self {
            num_qubits,
            num_clbits: 0,
            gates: Vec::new(),
            source_name: source_name.into(),
        }
    }

    /// Builds a circuit and checks every gate against the register sizes.
    pub fn with_gates(
        num_qubits: usize,
        gates: Vec<Gate>,
        source_name: impl Into<String>,
    ) -> Result<Self> {
        let num_clbits = gates
            .iter()
            .filter_map(|g| match g {
                Gate::Measure { clbit, .. } => Some(clbit + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let circuit = Self {
            num_qubits,
            num_clbits,
            gates,
            source_name: source_name.into(),
        };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, gate) in self.gates.iter().enumerate() {
            for q in gate.qubits() {
                if q.0 >= self.num_qubits {
                    return Err(Error::InvalidArgument(format!(
                        "gate {i} references {q} but the circuit has {} qubits",
                        self.num_qubits
                    )));
                }
            }
            match gate {
                Gate::TwoQubit {
                    control, target, ..
                } if control == target => {
                    return Err(Error::InvalidArgument(format!(
                        "gate {i} uses {control} as both control and target"
                    )));
                }
                Gate::OneQubit { params, .. } if params.iter().any(|p| !p.is_finite()) => {
                    return Err(Error::InvalidArgument(format!(
                        "gate {i} has a non-finite parameter"
                    )));
                }
                Gate::Measure { clbit, .. } if *clbit >= self.num_clbits => {
                    return Err(Error::InvalidArgument(format!(
                        "gate {i} writes classical bit {clbit} outside the register"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::TwoQubit { .. }))
            .count()
    }

    /// Logical qubits referenced by at least one gate, ascending.
    pub fn used_qubits(&self) -> Vec<LogicalQubit> {
        let mut used = vec![false; self.num_qubits];
        for q in self.gates.iter().flat_map(Gate::qubits) {
            used[q.0] = true;
        }
        used.iter()
            .enumerate()
            .filter(|(_, &u)| u)
            .map(|(i, _)| LogicalQubit(i))
            .collect()
    }
}

/// Number of two-qubit gates in which each qubit is the control, indexed by qubit.
pub fn control_counts(circuit: &Circuit) -> Vec<usize> {
    let mut counts = vec![0; circuit.num_qubits];
    for gate in &circuit.gates {
        if let Gate::TwoQubit { control, .. } = gate {
            counts[control.0] += 1;
        }
    }
    counts
}

/// Allocation order: most constrained (most control uses) first, ties by index.
pub fn qubit_order(circuit: &Circuit) -> Vec<LogicalQubit> {
    let counts = control_counts(circuit);
    let mut order: Vec<usize> = (0..circuit.num_qubits).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    order.into_iter().map(LogicalQubit).collect()
}

/// A CNOT-only benchmark circuit; every gate picks an ordered pair of distinct
/// qubits uniformly at random.
pub fn generate_random_cnot_circuit(num_qubits: usize, num_cnots: usize, seed: u64) -> Result<Circuit> {
    if num_qubits < 2 {
        return Err(Error::InvalidArgument(format!(
            "random CNOT circuits need at least 2 qubits, got {num_qubits}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gates = (0..num_cnots)
        .map(|_| {
            let control = rng.random_range(0..num_qubits);
            // Draw from the remaining n-1 qubits so every ordered pair is equally likely.
            let mut target = rng.random_range(0..num_qubits - 1);
            if target >= control {
                target += 1;
            }
            Gate::cx(control, target)
        })
        .collect();
    Ok(Circuit {
        num_qubits,
        num_clbits: 0,
        gates,
        source_name: format!("q{num_qubits}c{num_cnots}"),
    })
}
