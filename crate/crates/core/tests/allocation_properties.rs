mod common;

use common::{approx_eq, random_circuit, random_device, small_topologies};
use proptest::prelude::*;
use qalloc::{
    edge_weight, exhaustive_allocate, insert_swaps, total_fidelity, Allocation, BoundEvaluator, Circuit,
    DeviceModel, Gate, LogicalQubit, PhysicalGate, SwapPathTable, Topology,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, max_logical: usize) -> (DeviceModel, Circuit) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topologies = small_topologies();
    let (topology, n) = topologies[rng.random_range(0..topologies.len())];
    let device = random_device(&mut rng, topology, n, (0.99, 1.0), (0.8, 0.99));
    let logical = rng.random_range(1..=max_logical.min(n));
    let gates = rng.random_range(0..10);
    (device, random_circuit(&mut rng, logical, gates, 0.2))
}

/// Every injective full allocation extending `partial`.
fn extensions(partial: &Allocation, num_physical: usize) -> Vec<Allocation> {
    let missing: Vec<LogicalQubit> = (0..partial.num_logical())
        .map(LogicalQubit)
        .filter(|&l| partial.get(l).is_none())
        .collect();
    let mut out = vec![partial.clone()];
    for l in missing {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..num_physical)
                    .filter(|&p| !a.uses_physical(p))
                    .map(|p| a.extend(l, p).unwrap())
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    out
}

fn random_full<R: Rng>(rng: &mut R, logical: usize, physical: usize) -> Allocation {
    qalloc::benchmark::random_allocation(logical, physical, rng).unwrap()
}

/// Fidelity of compiling under `full`, or `None` when routing is impossible.
fn compiled_fidelity(c: &Circuit, d: &DeviceModel, t: &SwapPathTable, full: &Allocation) -> Option<f64> {
    insert_swaps(c, d, full, t).ok().map(|cc| total_fidelity(&cc, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn compiled_circuits_respect_connectivity(seed in any::<u64>()) {
        let (d, c) = instance(seed, 6);
        let t = SwapPathTable::build(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let full = random_full(&mut rng, c.num_qubits, d.num_qubits());
        let cc = insert_swaps(&c, &d, &full, &t).unwrap();
        for g in &cc.physical_gates {
            match *g {
                PhysicalGate::TwoQubit { control, target, .. } => prop_assert!(d.adjacent(control, target)),
                PhysicalGate::Swap { a, b } => prop_assert!(d.adjacent(a, b)),
                PhysicalGate::OneQubit { .. } => {}
            }
        }
        let (n1, n2) = cc.gate_counts();
        prop_assert_eq!(n1, c.gates.iter().filter(|g| matches!(g, Gate::OneQubit { .. })).count());
        prop_assert_eq!(n2, c.two_qubit_count() + 3 * cc.swap_count());
    }

    #[test]
    fn swap_network_is_the_map_permutation(seed in any::<u64>()) {
        let (d, c) = instance(seed, 6);
        let t = SwapPathTable::build(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let full = random_full(&mut rng, c.num_qubits, d.num_qubits());
        let cc = insert_swaps(&c, &d, &full, &t).unwrap();

        let mut occupant: Vec<Option<usize>> = vec![None; d.num_qubits()];
        for (l, p) in full.iter() {
            occupant[p] = Some(l.0);
        }
        let mut logical_gates = c.gates.iter().filter(|g| !matches!(g, Gate::Measure { .. }));
        for g in &cc.physical_gates {
            match g {
                PhysicalGate::Swap { a, b } => occupant.swap(*a, *b),
                PhysicalGate::TwoQubit { control, target, .. } => match logical_gates.next() {
                    Some(Gate::TwoQubit { control: lc, target: lt, .. }) => {
                        prop_assert_eq!(occupant[*control], Some(lc.0));
                        prop_assert_eq!(occupant[*target], Some(lt.0));
                    }
                    other => prop_assert!(false, "unexpected logical gate {:?}", other),
                },
                PhysicalGate::OneQubit { qubit, .. } => match logical_gates.next() {
                    Some(Gate::OneQubit { target, .. }) => prop_assert_eq!(occupant[*qubit], Some(target.0)),
                    other => prop_assert!(false, "unexpected logical gate {:?}", other),
                },
            }
        }
        prop_assert!(logical_gates.next().is_none());
        for (l, p) in cc.final_map.iter() {
            prop_assert_eq!(occupant[p], Some(l.0));
        }
    }

    #[test]
    fn bound_is_exact_on_full_allocations(seed in any::<u64>()) {
        let (d, c) = instance(seed, 6);
        let t = SwapPathTable::build(&d);
        let eval = BoundEvaluator::new(&c, &d, &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let full = random_full(&mut rng, c.num_qubits, d.num_qubits());
        let b = eval.bound(&full);
        match compiled_fidelity(&c, &d, &t, &full) {
            Some(f) => {
                prop_assert!(b.feasible);
                prop_assert!(approx_eq(b.value, f, 1e-12), "bound {} vs fidelity {}", b.value, f);
            }
            None => prop_assert!(!b.feasible),
        }
    }

    #[test]
    fn bound_dominates_every_extension(seed in any::<u64>()) {
        let (d, c) = instance(seed, 4);
        let t = SwapPathTable::build(&d);
        let eval = BoundEvaluator::new(&c, &d, &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let full = random_full(&mut rng, c.num_qubits, d.num_qubits());
        let mut partial = full.clone();
        for l in 0..c.num_qubits {
            if rng.random::<bool>() {
                partial = partial.without(LogicalQubit(l));
            }
        }
        let b = eval.bound(&partial);
        for ext in extensions(&partial, d.num_qubits()) {
            if let Some(f) = compiled_fidelity(&c, &d, &t, &ext) {
                prop_assert!(b.feasible, "infeasible bound above feasible extension {}", ext);
                prop_assert!(b.value >= f * (1.0 - 1e-12), "bound {} below extension fidelity {}", b.value, f);
            }
        }
    }

    #[test]
    fn bound_never_increases_along_extensions(seed in any::<u64>()) {
        let (d, c) = instance(seed, 6);
        let t = SwapPathTable::build(&d);
        let eval = BoundEvaluator::new(&c, &d, &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        let full = random_full(&mut rng, c.num_qubits, d.num_qubits());
        let mut order: Vec<usize> = (0..c.num_qubits).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let mut a = Allocation::empty(c.num_qubits);
        let root = eval.bound(&a);
        let mut prev = root;
        let mut weights = 0.0;
        for l in order {
            a = a.extend(LogicalQubit(l), full.get(LogicalQubit(l)).unwrap()).unwrap();
            let b = eval.bound(&a);
            prop_assert!(prev.feasible || !b.feasible);
            if b.feasible {
                prop_assert!(b.value <= prev.value * (1.0 + 1e-12), "{} rose above {}", b.value, prev.value);
                weights += edge_weight(prev, b).unwrap();
            }
            prev = b;
        }
        if prev.feasible {
            // Edge weights telescope to the difference of the endpoint bounds.
            prop_assert!((weights - (root.value - prev.value)).abs() < 1e-12);
        }
    }

    #[test]
    fn optimum_matches_exhaustive_search(seed in any::<u64>()) {
        let (d, c) = instance(seed, 4);
        let t = SwapPathTable::build(&d);
        let oracle = exhaustive_allocate(&c, &d, &t);
        let local = qalloc::local_allocate(&c, &d, &t);
        match (oracle, local) {
            (Ok(o), Ok((cc, bound))) => {
                let f = total_fidelity(&cc, &d);
                prop_assert!((f - o.best_fidelity).abs() <= 1e-12, "local {} oracle {}", f, o.best_fidelity);
                prop_assert!((bound.value - f).abs() <= 1e-12);
            }
            (Err(_), Err(_)) => {}
            (o, l) => prop_assert!(false, "oracle {:?} vs local {:?}", o.map(|r| r.best_fidelity), l.map(|r| r.1)),
        }
    }
}

#[test]
fn exhaustive_oracle_agrees_with_direct_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let d = random_device(&mut rng, Topology::Ring, 5, (0.99, 1.0), (0.85, 0.99));
    let t = SwapPathTable::build(&d);
    let c = random_circuit(&mut rng, 3, 8, 0.25);
    let best = extensions(&Allocation::empty(3), 5)
        .iter()
        .filter_map(|a| compiled_fidelity(&c, &d, &t, a))
        .fold(0.0, f64::max);
    let o = exhaustive_allocate(&c, &d, &t).unwrap();
    assert_eq!(o.num_enumerated, 60);
    assert_eq!(o.best_fidelity, best);
}
