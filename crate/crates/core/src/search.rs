//! Best-first (Dijkstra) search over the tree of partial allocations.
//!
//! Vertices are allocations and each edge maps one more logical qubit, in a
//! fixed most-constrained-first order. An edge costs `F_parent - F_child`, so the
//! cost of reaching a vertex telescopes to `F_root - F_vertex` and popping the
//! smallest cost is the same as popping the largest fidelity bound. Bounds never
//! increase along an edge, so the first full allocation popped is optimal.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::allocation::{insert_swaps, Allocation, BoundEvaluator, CompiledCircuit, FidelityBound};
use crate::circuit::{qubit_order, LogicalQubit};
use crate::error::{Error, Result};

pub const DEFAULT_FRONTIER_CAP: usize = 1 << 20;

/// A vertex handed out by the search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pub allocation: Allocation,
    pub bound: FidelityBound,
    pub depth: usize,
}

// Frontier entry. `slots[i]` is the physical qubit given to `order[i]`.
#[derive(Debug)]
struct Entry {
    bound: f64,
    slots: Box<[u16]>,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Max-heap order: higher bound first, then deeper, then lexicographically
    // smaller physical assignment.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.slots.len().cmp(&other.slots.len()))
            .then_with(|| other.slots.cmp(&self.slots))
    }
}

pub struct LocalSearch<'a> {
    eval: &'a BoundEvaluator<'a>,
    root: Allocation,
    root_bound: FidelityBound,
    order: Vec<LogicalQubit>,
    frontier: BinaryHeap<Entry>,
    frontier_cap: usize,
    best_full: Option<(Allocation, FidelityBound)>,
    last_popped: Option<FidelityBound>,
    steps_taken: u64,
    children_generated: u64,
    leaves_popped: u64,
    complete: bool,
}

impl<'a> LocalSearch<'a> {
    /// Seeds a search at `root`; the remaining qubits are allocated in
    /// [`qubit_order`] with the root's qubits skipped.
    pub fn new(eval: &'a BoundEvaluator<'a>, root: Allocation) -> Result<Self> {
        let circuit = eval.circuit();
        if root.num_logical() != circuit.num_qubits {
            return Err(Error::InvalidArgument(format!(
                "root allocation covers {} qubits, circuit has {}",
                root.num_logical(),
                circuit.num_qubits
            )));
        }
        if root.iter().any(|(_, p)| p >= eval.device().num_qubits()) {
            return Err(Error::InvalidArgument("root maps outside the device".into()));
        }
        if eval.device().num_qubits() > u16::MAX as usize {
            return Err(Error::InvalidArgument("devices are limited to 65535 qubits".into()));
        }
        let order: Vec<LogicalQubit> = qubit_order(circuit)
            .into_iter()
            .filter(|&l| root.get(l).is_none())
            .collect();
        let root_bound = eval.bound(&root);
        let mut frontier = BinaryHeap::new();
        if root_bound.feasible {
            frontier.push(Entry {
                bound: root_bound.value,
                slots: Box::new([]),
            });
        }
        Ok(Self {
            eval,
            root,
            root_bound,
            order,
            frontier,
            frontier_cap: DEFAULT_FRONTIER_CAP,
            best_full: None,
            last_popped: None,
            steps_taken: 0,
            children_generated: 0,
            leaves_popped: 0,
            complete: false,
        })
    }

    pub fn with_frontier_cap(mut self, cap: usize) -> Self {
        self.frontier_cap = cap;
        self
    }

    fn allocation_of(&self, slots: &[u16]) -> Allocation {
        let mut a = self.root.clone();
        for (&l, &p) in self.order.iter().zip(slots) {
            a = a.extend(l, p as usize).expect("search keeps allocations injective");
        }
        a
    }

    fn pop_one(&mut self, stop_when_complete: bool) -> Result<bool> {
        if stop_when_complete && self.complete {
            return Ok(false);
        }
        let Some(entry) = self.frontier.pop() else {
            self.complete = true;
            return Ok(false);
        };
        self.steps_taken += 1;
        let bound = FidelityBound {
            value: entry.bound,
            feasible: true,
        };
        self.last_popped = Some(bound);
        let allocation = self.allocation_of(&entry.slots);

        if entry.slots.len() == self.order.len() {
            self.leaves_popped += 1;
            if self.best_full.as_ref().is_none_or(|(_, b)| bound.value > b.value) {
                self.best_full = Some((allocation, bound));
            }
            let best = self.best_full.as_ref().map_or(bound.value, |(_, b)| b.value);
            if self.frontier.peek().is_none_or(|top| top.bound <= best) {
                self.complete = true;
            }
        } else {
            let next = self.order[entry.slots.len()];
            for p in 0..self.eval.device().num_qubits() {
                if allocation.uses_physical(p) {
                    continue;
                }
                let child = allocation.extend(next, p)?;
                let child_bound = self.eval.bound(&child);
                self.children_generated += 1;
                if !child_bound.feasible {
                    continue;
                }
                let mut slots = Vec::with_capacity(entry.slots.len() + 1);
                slots.extend_from_slice(&entry.slots);
                slots.push(p as u16);
                self.frontier.push(Entry {
                    bound: child_bound.value,
                    slots: slots.into_boxed_slice(),
                });
            }
            if self.frontier.len() > self.frontier_cap {
                return Err(Error::ResourceLimit {
                    what: "search frontier",
                    limit: self.frontier_cap as u64,
                });
            }
        }
        if self.frontier.is_empty() {
            self.complete = true;
        }
        Ok(true)
    }

    /// Pops up to `budget` vertices, stopping early once the optimum is certified.
    pub fn step(&mut self, budget: usize) -> Result<()> {
        for _ in 0..budget {
            if !self.pop_one(true)? {
                break;
            }
        }
        Ok(())
    }

    pub fn run_to_completion(&mut self) -> Result<()> {
        while self.pop_one(true)? {}
        Ok(())
    }

    /// Keeps expanding past the optimum until the frontier is empty.
    pub fn run_to_exhaustion(&mut self) -> Result<()> {
        while self.pop_one(false)? {}
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn best_full(&self) -> Option<&(Allocation, FidelityBound)> {
        self.best_full.as_ref()
    }

    pub fn root(&self) -> &Allocation {
        &self.root
    }

    pub fn root_bound(&self) -> FidelityBound {
        self.root_bound
    }

    pub fn order(&self) -> &[LogicalQubit] {
        &self.order
    }

    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    /// The vertex the next pop would return.
    pub fn peek(&self) -> Option<SearchNode> {
        self.frontier.peek().map(|e| SearchNode {
            allocation: self.allocation_of(&e.slots),
            bound: FidelityBound {
                value: e.bound,
                feasible: true,
            },
            depth: self.root.len() + e.slots.len(),
        })
    }

    pub fn last_popped(&self) -> Option<FidelityBound> {
        self.last_popped
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub fn children_generated(&self) -> u64 {
        self.children_generated
    }

    pub fn leaves_popped(&self) -> u64 {
        self.leaves_popped
    }

    /// Tightest upper bound known so far on the best full allocation below the root:
    /// the larger of the best leaf found and the best unexpanded vertex.
    pub fn upper_bound(&self) -> FidelityBound {
        let leaf = self.best_full.as_ref().map(|(_, b)| b.value);
        let open = self.frontier.peek().map(|e| e.bound);
        match (leaf, open) {
            (None, None) => FidelityBound::INFEASIBLE,
            (a, b) => FidelityBound {
                value: a.unwrap_or(0.0).max(b.unwrap_or(0.0)),
                feasible: true,
            },
        }
    }
}

/// Creates the search state rooted at `root`.
pub fn search_init<'a>(eval: &'a BoundEvaluator<'a>, root: Allocation) -> Result<LocalSearch<'a>> {
    LocalSearch::new(eval, root)
}

pub(crate) fn check_capacity(num_logical: usize, num_physical: usize) -> Result<()> {
    if num_logical > num_physical {
        return Err(Error::Infeasible(format!(
            "{num_logical} logical qubits do not fit on {num_physical} physical qubits"
        )));
    }
    Ok(())
}

/// Optimal allocation under connectivity-only SWAP insertion.
pub fn local_allocate(
    circuit: &crate::circuit::Circuit,
    device: &crate::device::DeviceModel,
    table: &crate::swap_table::SwapPathTable,
) -> Result<(CompiledCircuit, FidelityBound)> {
    local_allocate_capped(circuit, device, table, DEFAULT_FRONTIER_CAP)
}

pub fn local_allocate_capped(
    circuit: &crate::circuit::Circuit,
    device: &crate::device::DeviceModel,
    table: &crate::swap_table::SwapPathTable,
    frontier_cap: usize,
) -> Result<(CompiledCircuit, FidelityBound)> {
    check_capacity(circuit.num_qubits, device.num_qubits())?;
    let eval = BoundEvaluator::new(circuit, device, table)?;
    let mut search = LocalSearch::new(&eval, Allocation::empty(circuit.num_qubits))?.with_frontier_cap(frontier_cap);
    search.run_to_completion()?;
    let (best, bound) = search
        .best_full()
        .cloned()
        .ok_or_else(|| Error::Infeasible("no full allocation connects every interacting pair".into()))?;
    Ok((insert_swaps(circuit, device, &best, table)?, bound))
}
