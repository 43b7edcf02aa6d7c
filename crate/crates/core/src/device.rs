//! Coupling graph of a calibrated device.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalQubit {
    pub index: usize,
    /// Single-qubit gate fidelity.
    pub fidelity1: f64,
    pub readout_fidelity: Option<f64>,
}

/// Undirected coupling, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingEdge {
    pub a: usize,
    pub b: usize,
    /// Two-qubit gate fidelity, `1 - error rate`.
    pub fidelity2: f64,
}

impl CouplingEdge {
    pub fn new(a: usize, b: usize, fidelity2: f64) -> Self {
        Self {
            a: a.min(b),
            b: a.max(b),
            fidelity2,
        }
    }
}

/// Fidelity of a SWAP on `edge`, decomposed into three CNOTs on the same coupling.
pub fn swap_fidelity(edge: &CouplingEdge) -> f64 {
    edge.fidelity2.powi(3)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceModel {
    pub name: String,
    qubits: Vec<PhysicalQubit>,
    edges: Vec<CouplingEdge>,
    // Dense n*n lookup of usable (nonzero fidelity) couplings.
    coupling: Vec<Option<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct QubitJson {
    id: usize,
    fidelity1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    readout: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeJson {
    a: usize,
    b: usize,
    fidelity2: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CalibrationJson {
    name: String,
    qubits: Vec<QubitJson>,
    edges: Vec<EdgeJson>,
}

fn check_fidelity(what: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Calibration(format!("{what} = {value} is outside [0, 1]")))
    }
}

impl DeviceModel {
    /// Validates and builds a device. Qubits must carry indices `0..n` in order.
    pub fn new(name: impl Into<String>, qubits: Vec<PhysicalQubit>, edges: Vec<CouplingEdge>) -> Result<Self> {
        let n = qubits.len();
        for (i, q) in qubits.iter().enumerate() {
            if q.index != i {
                return Err(Error::Calibration(format!("qubit at position {i} has index {}", q.index)));
            }
            check_fidelity(&format!("qubit {i} fidelity1"), q.fidelity1)?;
            if let Some(r) = q.readout_fidelity {
                check_fidelity(&format!("qubit {i} readout"), r)?;
            }
        }
        let mut coupling = vec![None; n * n];
        let mut seen = vec![false; n * n];
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            let e = CouplingEdge::new(e.a, e.b, e.fidelity2);
            if e.b >= n {
                return Err(Error::Calibration(format!(
                    "edge ({}, {}) references a qubit outside 0..{n}",
                    e.a, e.b
                )));
            }
            if e.a == e.b {
                return Err(Error::Calibration(format!("edge ({}, {}) is a self-loop", e.a, e.b)));
            }
            check_fidelity(&format!("edge ({}, {}) fidelity2", e.a, e.b), e.fidelity2)?;
            if std::mem::replace(&mut seen[e.a * n + e.b], true) {
                return Err(Error::Calibration(format!("duplicate edge ({}, {})", e.a, e.b)));
            }
            if e.fidelity2 > 0.0 {
                coupling[e.a * n + e.b] = Some(e.fidelity2);
                coupling[e.b * n + e.a] = Some(e.fidelity2);
            }
            normalized.push(e);
        }
        Ok(Self {
            name: name.into(),
            qubits,
            edges: normalized,
            coupling,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[PhysicalQubit] {
        &self.qubits
    }

    pub fn edges(&self) -> &[CouplingEdge] {
        &self.edges
    }

    pub fn fidelity1(&self, q: usize) -> f64 {
        self.qubits[q].fidelity1
    }

    /// Fidelity of the coupling between `a` and `b`, if they can host a two-qubit gate.
    /// Zero-fidelity edges count as absent.
    pub fn coupling(&self, a: usize, b: usize) -> Option<f64> {
        let n = self.num_qubits();
        if a >= n || b >= n {
            return None;
        }
        self.coupling[a * n + b]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.coupling(a, b).is_some()
    }

    /// Best single-qubit fidelity and best two-qubit fidelity anywhere on the device.
    /// The second entry is `None` on an edgeless device.
    pub fn best_gate_fidelities(&self) -> Result<(f64, Option<f64>)> {
        let best1 = self
            .qubits
            .iter()
            .map(|q| q.fidelity1)
            .fold(None, |acc: Option<f64>, f| Some(acc.map_or(f, |a| a.max(f))))
            .ok_or_else(|| Error::InvalidArgument("device has no qubits".into()))?;
        let best2 = self
            .edges
            .iter()
            .map(|e| e.fidelity2)
            .fold(None, |acc: Option<f64>, f| Some(acc.map_or(f, |a| a.max(f))));
        Ok((best1, best2))
    }

    /// Returns a copy with one edge's fidelity replaced.
    pub fn with_edge_fidelity(&self, a: usize, b: usize, fidelity2: f64) -> Result<Self> {
        let target = CouplingEdge::new(a, b, fidelity2);
        let edges = self
            .edges
            .iter()
            .map(|e| if (e.a, e.b) == (target.a, target.b) { target } else { *e })
            .collect();
        Self::new(self.name.clone(), self.qubits.clone(), edges)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CalibrationJson = serde_json::from_str(text)?;
        let mut qubits: Vec<PhysicalQubit> = doc
            .qubits
            .iter()
            .map(|q| PhysicalQubit {
                index: q.id,
                fidelity1: q.fidelity1,
                readout_fidelity: q.readout,
            })
            .collect();
        qubits.sort_by_key(|q| q.index);
        for w in qubits.windows(2) {
            if w[0].index == w[1].index {
                return Err(Error::Calibration(format!("duplicate qubit id {}", w[0].index)));
            }
        }
        if let Some(q) = qubits.iter().enumerate().find(|(i, q)| q.index != *i) {
            return Err(Error::Calibration(format!(
                "qubit ids must be 0..{}, found {}",
                qubits.len(),
                q.1.index
            )));
        }
        let edges = doc
            .edges
            .iter()
            .map(|e| CouplingEdge {
                a: e.a,
                b: e.b,
                fidelity2: e.fidelity2,
            })
            .collect();
        Self::new(doc.name, qubits, edges)
    }

    pub fn to_json(&self) -> String {
        let doc = CalibrationJson {
            name: self.name.clone(),
            qubits: self
                .qubits
                .iter()
                .map(|q| QubitJson {
                    id: q.index,
                    fidelity1: q.fidelity1,
                    readout: q.readout_fidelity,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    a: e.a,
                    b: e.b,
                    fidelity2: e.fidelity2,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("calibration serializes");
        s.push('\n');
        s
    }
}

/// Parses a calibration document (see [`DeviceModel::from_json`]).
pub fn load_calibration(text: &str) -> Result<DeviceModel> {
    DeviceModel::from_json(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Line,
    Ring,
    /// Two rows joined by rungs, numbered like the 16-qubit Rueschlikon chip:
    /// top row `1..=n/2`, bottom row `0, n-1, n-2, ...`.
    Ladder,
    /// Row-major grid with `ceil(sqrt(n))` columns.
    Grid,
    Complete,
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(Topology::Line),
            "ring" => Ok(Topology::Ring),
            "ladder" => Ok(Topology::Ladder),
            "grid" => Ok(Topology::Grid),
            "complete" => Ok(Topology::Complete),
            other => Err(Error::InvalidArgument(format!("unknown topology '{other}'"))),
        }
    }
}

impl Topology {
    pub fn edges(self, n: usize) -> Result<Vec<(usize, usize)>> {
        let mut edges = Vec::new();
        match self {
            Topology::Line => edges.extend((1..n).map(|i| (i - 1, i))),
            Topology::Ring => {
                if n < 3 {
                    return Err(Error::InvalidArgument("a ring needs at least 3 qubits".into()));
                }
                edges.extend((1..n).map(|i| (i - 1, i)));
                edges.push((0, n - 1));
            }
            Topology::Ladder => {
                if n < 4 || !n.is_multiple_of(2) {
                    return Err(Error::InvalidArgument(format!(
                        "a ladder needs an even number of qubits >= 4, got {n}"
                    )));
                }
                let m = n / 2;
                let top = |i: usize| i + 1;
                let bottom = |i: usize| if i == 0 { 0 } else { n - i };
                for i in 0..m {
                    if i + 1 < m {
                        edges.push((top(i), top(i + 1)));
                        edges.push((bottom(i), bottom(i + 1)));
                    }
                    edges.push((top(i), bottom(i)));
                }
            }
            Topology::Grid => {
                let cols = (n as f64).sqrt().ceil().max(1.0) as usize;
                for i in 0..n {
                    if (i + 1) % cols != 0 && i + 1 < n {
                        edges.push((i, i + 1));
                    }
                    if i + cols < n {
                        edges.push((i, i + cols));
                    }
                }
            }
            Topology::Complete => {
                for a in 0..n {
                    edges.extend((a + 1..n).map(|b| (a, b)));
                }
            }
        }
        Ok(edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect())
    }
}

/// Parameters for a synthetic calibration. Ranges are inclusive `(lo, hi)`.
#[derive(Debug, Clone)]
pub struct SyntheticCalibration {
    pub topology: Topology,
    pub num_qubits: usize,
    pub fidelity1: (f64, f64),
    pub fidelity2: (f64, f64),
    pub readout: Option<(f64, f64)>,
    pub seed: u64,
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    let v = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    // Six decimals keeps fixture files readable.
    (v * 1e6).round() / 1e6
}

impl SyntheticCalibration {
    pub fn generate(&self) -> Result<DeviceModel> {
        for (what, (lo, hi)) in [("fidelity1", self.fidelity1), ("fidelity2", self.fidelity2)]
            .into_iter()
            .chain(self.readout.map(|r| ("readout", r)))
        {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                return Err(Error::InvalidArgument(format!("{what} range {lo}:{hi} is not within [0, 1]")));
            }
        }
        if self.num_qubits == 0 {
            return Err(Error::InvalidArgument("device needs at least one qubit".into()));
        }
        let topo_edges = self.topology.edges(self.num_qubits)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let qubits = (0..self.num_qubits)
            .map(|index| PhysicalQubit {
                index,
                fidelity1: draw(&mut rng, self.fidelity1),
                readout_fidelity: self.readout.map(|r| draw(&mut rng, r)),
            })
            .collect();
        let edges = topo_edges
            .into_iter()
            .map(|(a, b)| CouplingEdge::new(a, b, draw(&mut rng, self.fidelity2)))
            .collect();
        let name = format!(
            "{:?}{}-synthetic-seed{}",
            self.topology, self.num_qubits, self.seed
        )
        .to_lowercase();
        DeviceModel::new(name, qubits, edges)
    }
}

/// Device with every qubit at `fidelity1` and every edge at `fidelity2`.
pub fn uniform_device(topology: Topology, n: usize, fidelity1: f64, fidelity2: f64) -> Result<DeviceModel> {
    let qubits = (0..n)
        .map(|index| PhysicalQubit {
            index,
            fidelity1,
            readout_fidelity: None,
        })
        .collect();
    let edges = topology
        .edges(n)?
        .into_iter()
        .map(|(a, b)| CouplingEdge::new(a, b, fidelity2))
        .collect();
    DeviceModel::new(format!("{topology:?}{n}-uniform").to_lowercase(), qubits, edges)
}
