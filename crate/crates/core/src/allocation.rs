//! Allocations, connectivity-only SWAP insertion, and fidelity evaluation.
//!
//! [`insert_swaps`] walks the program once with a running logical-to-physical
//! map. A two-qubit gate on non-adjacent qubits is preceded by a SWAP chain that
//! moves the control along the precomputed best route until it neighbours the
//! target; the swaps are permanent.
//!
//! [`fidelity_bound`] replays the same walk for a partial allocation and yields
//! an upper bound on the total fidelity of every full allocation that extends
//! it. Instead of one slot per logical qubit it tracks the set of slots the
//! qubit could occupy: a mapped qubit starts with its own slot, an unmapped one
//! with every free slot. Each gate is charged its best cost over all slot pairs
//! its operands could hold, and every qubit that one of those SWAP chains could
//! displace gains the slots it could be pushed to. The true positions always
//! lie inside the sets, so the bound is admissible; the sets only shrink as the
//! allocation grows, so the bound never increases under extension; and with a
//! full allocation every set is a singleton, which makes the bound exact.

use std::fmt;


use crate::circuit::{Circuit, Gate, LogicalQubit};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::swap_table::SwapPathTable;

/// Absolute tolerance for fidelity comparisons.
pub const FIDELITY_TOLERANCE: f64 = 1e-12;

/// Partial injective map from logical qubits to physical qubit indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    map: Vec<Option<usize>>,
}

impl Allocation {
    /// The empty allocation for a program with `num_logical` qubits.
    pub fn empty(num_logical: usize) -> Self {
        Self {
            map: vec![None; num_logical],
        }
    }

    /// Full allocation `logical i -> physical[i]`.
    pub fn from_physical(physical: &[usize]) -> Result<Self> {
        let mut a = Self::empty(physical.len());
        for (l, &p) in physical.iter().enumerate() {
            a = a.extend(LogicalQubit(l), p)?;
        }
        Ok(a)
    }

    pub fn identity(num_logical: usize) -> Self {
        Self {
            map: (0..num_logical).map(Some).collect(),
        }
    }

    pub fn num_logical(&self) -> usize {
        self.map.len()
    }

    /// Number of mapped logical qubits.
    pub fn len(&self) -> usize {
        self.map.iter().filter(|p| p.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.map.iter().all(Option::is_none)
    }

    pub fn is_full(&self) -> bool {
        self.map.iter().all(Option::is_some)
    }

    pub fn get(&self, l: LogicalQubit) -> Option<usize> {
        self.map.get(l.0).copied().flatten()
    }

    pub fn uses_physical(&self, p: usize) -> bool {
        self.map.contains(&Some(p))
    }

    pub fn iter(&self) -> impl Iterator<Item = (LogicalQubit, usize)> + '_ {
        self.map
            .iter()
            .enumerate()
            .filter_map(|(l, p)| p.map(|p| (LogicalQubit(l), p)))
    }

    /// Physical slot per logical qubit, `None` where unmapped.
    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.map
    }

    /// Physical slots of a full allocation.
    pub fn to_physical(&self) -> Option<Vec<usize>> {
        self.map.iter().copied().collect()
    }

    /// `self ⊑ other`: every mapping here also appears in `other`.
    pub fn is_sub_allocation_of(&self, other: &Allocation) -> bool {
        self.map.len() == other.map.len()
            && self
                .map
                .iter()
                .zip(&other.map)
                .all(|(a, b)| a.is_none() || a == b)
    }

    /// Adds the mapping `l -> p`.
    pub fn extend(&self, l: LogicalQubit, p: usize) -> Result<Self> {
        match self.map.get(l.0) {
            None => {
                return Err(Error::InvalidArgument(format!(
                    "{l} is outside an allocation over {} qubits",
                    self.map.len()
                )))
            }
            Some(Some(existing)) => {
                return Err(Error::InvalidArgument(format!("{l} is already mapped to {existing}")))
            }
            Some(None) => {}
        }
        if self.uses_physical(p) {
            return Err(Error::InvalidArgument(format!("physical qubit {p} is already in use")));
        }
        let mut map = self.map.clone();
        map[l.0] = Some(p);
        Ok(Self { map })
    }

    /// Removes any mapping for `l`.
    pub fn without(&self, l: LogicalQubit) -> Self {
        let mut map = self.map.clone();
        if let Some(slot) = map.get_mut(l.0) {
            *slot = None;
        }
        Self { map }
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (l, p)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}->{p}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhysicalGate {
    OneQubit {
        name: String,
        params: Vec<f64>,
        qubit: usize,
    },
    TwoQubit {
        name: String,
        control: usize,
        target: usize,
    },
    Swap {
        a: usize,
        b: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledCircuit {
    pub physical_gates: Vec<PhysicalGate>,
    pub initial_map: Allocation,
    pub final_map: Allocation,
    /// `(physical qubit, classical bit)`, in program order.
    pub measures: Vec<(usize, usize)>,
    pub num_clbits: usize,
    /// Logical qubits the source program touches.
    pub used_logical: Vec<LogicalQubit>,
}

impl CompiledCircuit {
    pub fn swap_count(&self) -> usize {
        self.physical_gates
            .iter()
            .filter(|g| matches!(g, PhysicalGate::Swap { .. }))
            .count()
    }

    /// Gate list with each SWAP replaced by `cx a,b; cx b,a; cx a,b`.
    pub fn expanded_gates(&self) -> Vec<PhysicalGate> {
        let mut out = Vec::with_capacity(self.physical_gates.len() + 2 * self.swap_count());
        for g in &self.physical_gates {
            match *g {
                PhysicalGate::Swap { a, b } => {
                    for (c, t) in [(a, b), (b, a), (a, b)] {
                        out.push(PhysicalGate::TwoQubit {
                            name: "cx".into(),
                            control: c,
                            target: t,
                        });
                    }
                }
                ref other => out.push(other.clone()),
            }
        }
        out
    }

    /// `(N1, N2)`: single- and two-qubit physical gate counts after SWAP expansion.
    pub fn gate_counts(&self) -> (usize, usize) {
        self.physical_gates.iter().fold((0, 0), |(n1, n2), g| match g {
            PhysicalGate::OneQubit { .. } => (n1 + 1, n2),
            PhysicalGate::TwoQubit { .. } => (n1, n2 + 1),
            PhysicalGate::Swap { .. } => (n1, n2 + 3),
        })
    }

    /// Physical qubits hosting the program's logical qubits at the end of the run.
    pub fn measured_qubits(&self) -> Vec<usize> {
        self.used_logical
            .iter()
            .filter_map(|&l| self.final_map.get(l))
            .collect()
    }
}

fn check_allocation(circuit: &Circuit, device: &DeviceModel, a: &Allocation) -> Result<()> {
    if a.num_logical() != circuit.num_qubits {
        return Err(Error::InvalidArgument(format!(
            "allocation covers {} logical qubits but the circuit has {}",
            a.num_logical(),
            circuit.num_qubits
        )));
    }
    if let Some((l, p)) = a.iter().find(|&(_, p)| p >= device.num_qubits()) {
        return Err(Error::InvalidArgument(format!(
            "{l} mapped to {p}, outside the {}-qubit device",
            device.num_qubits()
        )));
    }
    Ok(())
}

/// Compiles `circuit` under the full allocation `full`, inserting SWAPs only
/// where a two-qubit gate's operands are not adjacent.
pub fn insert_swaps(
    circuit: &Circuit,
    device: &DeviceModel,
    full: &Allocation,
    table: &SwapPathTable,
) -> Result<CompiledCircuit> {
    check_allocation(circuit, device, full)?;
    if !full.is_full() {
        return Err(Error::InvalidArgument(format!(
            "insert_swaps needs a full allocation, got {} of {} qubits",
            full.len(),
            full.num_logical()
        )));
    }
    let mut pos: Vec<usize> = full.to_physical().expect("full");
    let mut occupant: Vec<Option<usize>> = vec![None; device.num_qubits()];
    for (l, &p) in pos.iter().enumerate() {
        occupant[p] = Some(l);
    }

    let mut physical_gates = Vec::with_capacity(circuit.gates.len());
    let mut measured = Vec::new();
    for gate in &circuit.gates {
        match gate {
            Gate::OneQubit { name, params, target } => physical_gates.push(PhysicalGate::OneQubit {
                name: name.clone(),
                params: params.clone(),
                qubit: pos[target.0],
            }),
            Gate::Measure { target, clbit } => measured.push((*target, *clbit)),
            Gate::TwoQubit { name, control, target } => {
                let (pc, pt) = (pos[control.0], pos[target.0]);
                if !device.adjacent(pc, pt) {
                    let route = table.route(pc, pt).ok_or_else(|| {
                        Error::Infeasible(format!(
                            "physical qubits {pc} and {pt} ({control} and {target}) are not connected"
                        ))
                    })?;
                    for hop in route.path[..route.path.len() - 1].windows(2) {
                        let (a, b) = (hop[0], hop[1]);
                        physical_gates.push(PhysicalGate::Swap { a, b });
                        occupant.swap(a, b);
                        for slot in [a, b] {
                            if let Some(l) = occupant[slot] {
                                pos[l] = slot;
                            }
                        }
                    }
                }
                physical_gates.push(PhysicalGate::TwoQubit {
                    name: name.clone(),
                    control: pos[control.0],
                    target: pos[target.0],
                });
            }
        }
    }

    let final_map = Allocation {
        map: pos.iter().map(|&p| Some(p)).collect(),
    };
    // Measurements are emitted after every gate, so they read each qubit's final slot.
    let measures = measured
        .into_iter()
        .map(|(l, c)| (pos[l.0], c))
        .collect();
    Ok(CompiledCircuit {
        physical_gates,
        initial_map: full.clone(),
        final_map,
        measures,
        num_clbits: circuit.num_clbits,
        used_logical: circuit.used_qubits(),
    })
}

/// Product of the fidelities of every executed gate; a SWAP counts as three CNOTs
/// on its edge and measurements are excluded.
pub fn total_fidelity(compiled: &CompiledCircuit, device: &DeviceModel) -> f64 {
    compiled
        .physical_gates
        .iter()
        .map(|g| match *g {
            PhysicalGate::OneQubit { qubit, .. } => device.fidelity1(qubit),
            PhysicalGate::TwoQubit { control, target, .. } => device.coupling(control, target).unwrap_or(0.0),
            PhysicalGate::Swap { a, b } => device.coupling(a, b).unwrap_or(0.0).powi(3),
        })
        .product()
}

/// Upper bound on the total fidelity of any full allocation extending a partial one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityBound {
    pub value: f64,
    /// False when the mapped qubits already force a gate between disconnected qubits.
    pub feasible: bool,
}

impl FidelityBound {
    pub const INFEASIBLE: FidelityBound = FidelityBound {
        value: 0.0,
        feasible: false,
    };
}

/// Weight of the search-graph edge from `parent` to `child`: `F_parent - F_child`.
pub fn edge_weight(parent: FidelityBound, child: FidelityBound) -> Result<f64> {
    let w = parent.value - child.value;
    if w < -FIDELITY_TOLERANCE {
        return Err(Error::Invariant(format!(
            "child bound {} exceeds parent bound {}",
            child.value, parent.value
        )));
    }
    Ok(w.max(0.0))
}

/// Sets of physical slots, one per logical qubit, stored as packed bit words.
#[derive(Debug, Clone)]
struct SlotSets {
    words: usize,
    bits: Vec<u64>,
}

impl SlotSets {
    fn new(count: usize, num_slots: usize) -> Self {
        let words = num_slots.div_ceil(64).max(1);
        Self {
            words,
            bits: vec![0; count * words],
        }
    }

    fn get(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    fn get_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.bits[i * self.words..(i + 1) * self.words]
    }

    fn insert(&mut self, i: usize, slot: usize) {
        self.bits[i * self.words + slot / 64] |= 1 << (slot % 64);
    }

    fn clear(&mut self) {
        self.bits.iter_mut().for_each(|w| *w = 0);
    }
}

fn ones(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            (rest != 0).then(|| {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                w * 64 + b
            })
        })
    })
}

fn single(set: &[u64]) -> Option<usize> {
    let mut found = None;
    for (w, &word) in set.iter().enumerate() {
        if word == 0 {
            continue;
        }
        if found.is_some() || word.count_ones() != 1 {
            return None;
        }
        found = Some(w * 64 + word.trailing_zeros() as usize);
    }
    found
}

/// Precomputed inputs for evaluating many bounds over the same program and device.
#[derive(Debug, Clone)]
pub struct BoundEvaluator<'a> {
    circuit: &'a Circuit,
    device: &'a DeviceModel,
    table: &'a SwapPathTable,
    ln_fidelity1: Vec<f64>,
    /// `ln` of everything a two-qubit gate from `p` to `q` costs, SWAPs included;
    /// `-inf` when `p == q` or the pair is disconnected.
    routed_ln: Vec<f64>,
    /// Where the control ends up for each ordered pair.
    control_dest: Vec<usize>,
    /// `(from, to)` slot moves of the qubits a pair's SWAP chain displaces.
    shifts: Vec<Vec<(usize, usize)>>,
}

impl<'a> BoundEvaluator<'a> {
    pub fn new(circuit: &'a Circuit, device: &'a DeviceModel, table: &'a SwapPathTable) -> Result<Self> {
        let n = device.num_qubits();
        if table.num_qubits() != n {
            return Err(Error::InvalidArgument(format!(
                "swap table covers {} qubits but the device has {n}",
                table.num_qubits()
            )));
        }
        let mut routed_ln = vec![f64::NEG_INFINITY; n * n];
        let mut control_dest = vec![usize::MAX; n * n];
        let mut shifts = vec![Vec::new(); n * n];
        for p in 0..n {
            for q in (0..n).filter(|&q| q != p) {
                let i = p * n + q;
                if let Some(f) = device.coupling(p, q) {
                    routed_ln[i] = f.ln();
                    control_dest[i] = p;
                } else if let Some(route) = table.route(p, q) {
                    let path = &route.path;
                    routed_ln[i] = route.gate_log_fidelity - route.swap_log_cost;
                    control_dest[i] = path[path.len() - 2];
                    shifts[i] = (1..path.len() - 1).map(|k| (path[k], path[k - 1])).collect();
                }
            }
        }
        Ok(Self {
            circuit,
            device,
            table,
            ln_fidelity1: device.qubits().iter().map(|q| q.fidelity1.ln()).collect(),
            routed_ln,
            control_dest,
            shifts,
        })
    }

    pub fn circuit(&self) -> &'a Circuit {
        self.circuit
    }

    pub fn device(&self) -> &'a DeviceModel {
        self.device
    }

    pub fn table(&self) -> &'a SwapPathTable {
        self.table
    }

    pub fn bound(&self, a: &Allocation) -> FidelityBound {
        let n = self.device.num_qubits();
        let num_logical = a.num_logical();
        // Every slot each logical qubit could occupy at the current point of the program.
        let mut sets = SlotSets::new(num_logical, n);
        let mut free = vec![true; n];
        for (l, p) in a.iter() {
            sets.insert(l.0, p);
            free[p] = false;
        }
        for l in (0..num_logical).filter(|&l| a.map[l].is_none()) {
            for p in (0..n).filter(|&p| free[p]) {
                sets.insert(l, p);
            }
        }
        // `moves` row `a` holds every slot a qubit at `a` may be pushed to.
        let mut moves = SlotSets::new(n, n);
        let mut dest = SlotSets::new(1, n);
        let mut scratch = vec![0u64; sets.words];
        let mut log_total = 0.0;

        for gate in &self.circuit.gates {
            match gate {
                Gate::Measure { .. } => {}
                Gate::OneQubit { target, .. } => {
                    log_total += ones(sets.get(target.0))
                        .map(|p| self.ln_fidelity1[p])
                        .fold(f64::NEG_INFINITY, f64::max);
                }
                Gate::TwoQubit { control, target, .. } => {
                    let (c, t) = (control.0, target.0);
                    if let (Some(p), Some(q)) = (single(sets.get(c)), single(sets.get(t))) {
                        let i = p * n + q;
                        if self.routed_ln[i] == f64::NEG_INFINITY {
                            return FidelityBound::INFEASIBLE;
                        }
                        log_total += self.routed_ln[i];
                        if self.shifts[i].is_empty() {
                            continue;
                        }
                        for z in (0..num_logical).filter(|&z| z != c && z != t) {
                            scratch.copy_from_slice(sets.get(z));
                            for &(from, _) in &self.shifts[i] {
                                scratch[from / 64] &= !(1 << (from % 64));
                            }
                            let set = sets.get(z);
                            for &(from, to) in &self.shifts[i] {
                                if set[from / 64] >> (from % 64) & 1 == 1 {
                                    scratch[to / 64] |= 1 << (to % 64);
                                }
                            }
                            sets.get_mut(z).copy_from_slice(&scratch);
                        }
                        let dst = self.control_dest[i];
                        sets.get_mut(c).iter_mut().for_each(|w| *w = 0);
                        sets.insert(c, dst);
                        continue;
                    }

                    let mut best = f64::NEG_INFINITY;
                    let mut displaced = false;
                    moves.clear();
                    dest.clear();
                    for p in ones(sets.get(c)) {
                        for q in ones(sets.get(t)) {
                            let i = p * n + q;
                            if self.routed_ln[i] == f64::NEG_INFINITY {
                                continue;
                            }
                            best = best.max(self.routed_ln[i]);
                            dest.insert(0, self.control_dest[i]);
                            for &(from, to) in &self.shifts[i] {
                                moves.insert(from, to);
                                displaced = true;
                            }
                        }
                    }
                    if best == f64::NEG_INFINITY {
                        return FidelityBound::INFEASIBLE;
                    }
                    log_total += best;
                    if displaced {
                        for z in (0..num_logical).filter(|&z| z != c && z != t) {
                            scratch.copy_from_slice(sets.get(z));
                            for from in ones(sets.get(z)) {
                                for (s, m) in scratch.iter_mut().zip(moves.get(from)) {
                                    *s |= m;
                                }
                            }
                            sets.get_mut(z).copy_from_slice(&scratch);
                        }
                    }
                    sets.get_mut(c).copy_from_slice(dest.get(0));
                }
            }
        }
        FidelityBound {
            value: log_total.exp(),
            feasible: true,
        }
    }
}

/// Upper bound on the fidelity of any full allocation extending `a`; exact when `a` is full.
pub fn fidelity_bound(
    circuit: &Circuit,
    device: &DeviceModel,
    a: &Allocation,
    table: &SwapPathTable,
) -> Result<FidelityBound> {
    check_allocation(circuit, device, a)?;
    Ok(BoundEvaluator::new(circuit, device, table)?.bound(a))
}
