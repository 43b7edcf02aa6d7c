//! Brute-force reference allocator and the worst-case edge count.

use num_bigint::BigUint;

use crate::allocation::{insert_swaps, total_fidelity, Allocation};
use crate::circuit::Circuit;
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::swap_table::SwapPathTable;

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub best_allocation: Allocation,
    pub best_fidelity: f64,
    pub num_enumerated: u64,
}

/// `q_p! / (q_p - k)!`, the number of injective maps of `k` logical qubits.
fn falling_factorial(q_p: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::from(1u32), |acc, i| acc * BigUint::from(q_p - i))
}

/// Edges traversed by a breadth-first sweep of every allocation:
/// the sum over `n = 1..=q_l` of `q_p! / (q_p - n)!`.
pub fn count_worst_case_edges(q_l: u64, q_p: u64) -> Result<BigUint> {
    if q_l > q_p {
        return Err(Error::InvalidArgument(format!(
            "{q_l} logical qubits exceed {q_p} physical qubits"
        )));
    }
    Ok((1..=q_l).map(|n| falling_factorial(q_p, n)).sum())
}

/// Enumerates every injective full allocation in lexicographic order, compiles
/// each one, and keeps the first with the highest total fidelity.
pub fn exhaustive_allocate(circuit: &Circuit, device: &DeviceModel, table: &SwapPathTable) -> Result<OracleResult> {
    exhaustive_allocate_capped(circuit, device, table, DEFAULT_ENUMERATION_CAP)
}

pub fn exhaustive_allocate_capped(
    circuit: &Circuit,
    device: &DeviceModel,
    table: &SwapPathTable,
    cap: u64,
) -> Result<OracleResult> {
    let (l, n) = (circuit.num_qubits, device.num_qubits());
    if l > n {
        return Err(Error::Infeasible(format!("{l} logical qubits do not fit on {n} physical qubits")));
    }
    if falling_factorial(n as u64, l as u64) > BigUint::from(cap) {
        return Err(Error::ResourceLimit {
            what: "exhaustive enumeration",
            limit: cap,
        });
    }

    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut enumerated = 0u64;
    let mut slots = Vec::with_capacity(l);
    let mut used = vec![false; n];

    // Depth-first over slots in ascending order yields lexicographic order.
    fn recurse(
        slots: &mut Vec<usize>,
        used: &mut [bool],
        l: usize,
        visit: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        if slots.len() == l {
            return visit(slots);
        }
        for p in 0..used.len() {
            if used[p] {
                continue;
            }
            used[p] = true;
            slots.push(p);
            recurse(slots, used, l, visit)?;
            slots.pop();
            used[p] = false;
        }
        Ok(())
    }

    recurse(&mut slots, &mut used, l, &mut |slots| {
        enumerated += 1;
        let a = Allocation::from_physical(slots)?;
        let f = match insert_swaps(circuit, device, &a, table) {
            Ok(compiled) => total_fidelity(&compiled, device),
            Err(Error::Infeasible(_)) => return Ok(()),
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|(_, b)| f > *b) {
            best = Some((slots.to_vec(), f));
        }
        Ok(())
    })?;

    let (slots, best_fidelity) =
        best.ok_or_else(|| Error::Infeasible("no full allocation connects every interacting pair".into()))?;
    Ok(OracleResult {
        best_allocation: Allocation::from_physical(&slots)?,
        best_fidelity,
        num_enumerated: enumerated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::device::{uniform_device, Topology};

    #[test]
    fn worst_case_counts() {
        assert_eq!(count_worst_case_edges(1, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(count_worst_case_edges(3, 4).unwrap(), BigUint::from(40u32));
        assert_eq!(count_worst_case_edges(2, 3).unwrap(), BigUint::from(9u32));
        assert!(count_worst_case_edges(4, 3).is_err());
        // 20!/0! + ... stays exact well past u64.
        let big = count_worst_case_edges(30, 30).unwrap();
        assert!(big > BigUint::from(u64::MAX));
    }

    #[test]
    fn enumeration_counts() {
        let d = uniform_device(Topology::Line, 3, 1.0, 0.9).unwrap();
        let t = SwapPathTable::build(&d);
        let r = exhaustive_allocate(&Circuit::new(1, "idle"), &d, &t).unwrap();
        assert_eq!(r.num_enumerated, 3);
        assert_eq!(r.best_fidelity, 1.0);
        assert_eq!(r.best_allocation, Allocation::from_physical(&[0]).unwrap());

        let d = uniform_device(Topology::Line, 4, 1.0, 0.9).unwrap();
        let t = SwapPathTable::build(&d);
        let c = Circuit::with_gates(3, vec![Gate::cx(0, 2)], "t").unwrap();
        let r = exhaustive_allocate(&c, &d, &t).unwrap();
        assert_eq!(r.num_enumerated, 24);
        assert!((r.best_fidelity - 0.9).abs() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let d = uniform_device(Topology::Line, 6, 1.0, 0.9).unwrap();
        let t = SwapPathTable::build(&d);
        let c = Circuit::new(4, "idle");
        assert!(matches!(
            exhaustive_allocate_capped(&c, &d, &t, 359),
            Err(Error::ResourceLimit { .. })
        ));
        assert_eq!(exhaustive_allocate_capped(&c, &d, &t, 360).unwrap().num_enumerated, 360);
    }
}
