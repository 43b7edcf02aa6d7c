//! Acceptance checks. Each check prints one PASS/FAIL line; the process exits
//! non-zero when any check fails.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use qalloc::benchmark::{median_error, random_allocation, Strategy};
use qalloc::{
    count_worst_case_edges, edge_weight, exhaustive_allocate, expected_error, generate_random_cnot_circuit,
    hybrid_allocate, insert_swaps, load_calibration, local_allocate, metropolis_accept, parse_qasm, run_benchmark,
    simulate_measured_error, temperature, total_fidelity, uniform_device, Allocation, AnnealConfig, BoundEvaluator,
    Circuit, CompiledCircuit, CouplingEdge, DeviceModel, Error, Gate, LocalSearch, LogicalQubit, NoiseOptions,
    PhysicalGate, PhysicalQubit, SwapPathTable, Topology,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn device(rng: &mut ChaCha8Rng, topology: Topology, n: usize) -> DeviceModel {
    let qubits = (0..n)
        .map(|index| PhysicalQubit {
            index,
            fidelity1: rng.random_range(0.99..=1.0),
            readout_fidelity: None,
        })
        .collect();
    let edges = topology
        .edges(n)
        .unwrap()
        .into_iter()
        .map(|(a, b)| CouplingEdge::new(a, b, rng.random_range(0.8..=0.99)))
        .collect();
    DeviceModel::new(format!("{topology:?}{n}"), qubits, edges).unwrap()
}

fn circuit(rng: &mut ChaCha8Rng, num_qubits: usize) -> Circuit {
    let len = rng.random_range(1..=12);
    let gates = (0..len)
        .map(|_| {
            if rng.random::<f64>() < 0.25 {
                Gate::one("h", rng.random_range(0..num_qubits))
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
    Circuit::with_gates(num_qubits, gates, "sweep").unwrap()
}

/// The sweep of small instances: |Q_L| in 2..=4; line and ring on 3..=6
/// qubits and ladders on 4 and 6; 25 fidelity draws with 10 circuits each.
fn sweep() -> Vec<(DeviceModel, Vec<Circuit>)> {
    let mut devices = Vec::new();
    for n in 3..=6 {
        devices.push((Topology::Line, n));
        devices.push((Topology::Ring, n));
    }
    devices.push((Topology::Ladder, 4));
    devices.push((Topology::Ladder, 6));
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2019);
    for q_l in 2..=4 {
        for &(topology, n) in devices.iter().filter(|&&(_, n)| n >= q_l) {
            for _ in 0..25 {
                let d = device(&mut rng, topology, n);
                let circuits = (0..10).map(|_| circuit(&mut rng, q_l)).collect();
                out.push((d, circuits));
            }
        }
    }
    out
}

fn oracle_optimality() -> Outcome {
    let start = Instant::now();
    let (mut total, mut matched) = (0, 0);
    let mut worst: Option<String> = None;
    for (d, circuits) in sweep() {
        let t = SwapPathTable::build(&d);
        for c in &circuits {
            total += 1;
            let oracle = exhaustive_allocate(c, &d, &t).map_err(|e| e.to_string())?;
            let (compiled, _) = local_allocate(c, &d, &t).map_err(|e| e.to_string())?;
            let f = total_fidelity(&compiled, &d);
            if (f - oracle.best_fidelity).abs() <= 1e-12 {
                matched += 1;
            } else if worst.is_none() {
                worst = Some(format!("{}: local {f} vs oracle {}", d.name, oracle.best_fidelity));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("{matched}/{total} instances match the exhaustive optimum in {secs:.1} s");
    match worst {
        None if secs < 60.0 => Ok(detail),
        None => Err(format!("{detail}, over the 60 s budget")),
        Some(w) => Err(format!("{detail}; first mismatch {w}")),
    }
}

fn bound_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let topologies = [
        (Topology::Line, 5),
        (Topology::Ring, 6),
        (Topology::Ladder, 6),
        (Topology::Grid, 9),
        (Topology::Ladder, 8),
    ];
    let (mut extensions, mut leaves) = (0, 0);
    for _ in 0..1000 {
        let (topology, n) = topologies[rng.random_range(0..topologies.len())];
        let d = device(&mut rng, topology, n);
        let t = SwapPathTable::build(&d);
        let q_l = rng.random_range(2..=n.min(6));
        let c = circuit(&mut rng, q_l);
        let eval = BoundEvaluator::new(&c, &d, &t).map_err(|e| e.to_string())?;
        let full = random_allocation(q_l, n, &mut rng).map_err(|e| e.to_string())?;
        // A random partial allocation, extended one qubit at a time to `full`.
        let mut order: Vec<usize> = (0..q_l).collect();
        for i in (1..q_l).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let start = rng.random_range(0..q_l);
        let mut a = Allocation::empty(q_l);
        for &l in &order[..start] {
            a = a.extend(LogicalQubit(l), full.get(LogicalQubit(l)).unwrap()).unwrap();
        }
        let first = eval.bound(&a);
        let mut parent = first;
        let mut sum = 0.0;
        for &l in &order[start..] {
            a = a.extend(LogicalQubit(l), full.get(LogicalQubit(l)).unwrap()).unwrap();
            let child = eval.bound(&a);
            extensions += 1;
            if child.feasible && child.value > parent.value + 1e-12 {
                return Err(format!("bound rose from {} to {} on {}", parent.value, child.value, d.name));
            }
            if parent.feasible && child.feasible {
                let w = edge_weight(parent, child).map_err(|e| e.to_string())?;
                if w < 0.0 {
                    return Err(format!("negative edge weight {w}"));
                }
                sum += w;
            }
            if parent.feasible && !child.feasible {
                sum = f64::NAN;
            }
            if !parent.feasible && child.feasible {
                return Err("infeasible parent with a feasible child".into());
            }
            parent = child;
        }
        match insert_swaps(&c, &d, &full, &t) {
            Ok(compiled) => {
                let f = total_fidelity(&compiled, &d);
                if !parent.feasible || (parent.value - f).abs() > 1e-12 {
                    return Err(format!("bound {} differs from fidelity {f} on a full allocation", parent.value));
                }
                if (sum - (first.value - f)).abs() > 1e-12 {
                    return Err(format!("weights sum to {sum}, endpoints differ by {}", first.value - f));
                }
            }
            Err(Error::Infeasible(_)) if !parent.feasible => {}
            Err(e) => return Err(format!("full allocation failed to compile: {e}")),
        }
        leaves += 1;
    }
    Ok(format!(
        "{leaves} triples, {extensions} extensions: monotone, exact on full allocations, weights telescope"
    ))
}

fn worst_case_count() -> Outcome {
    let d = uniform_device(Topology::Complete, 4, 1.0, 0.9).map_err(|e| e.to_string())?;
    let t = SwapPathTable::build(&d);
    let c = Circuit::with_gates(3, vec![Gate::cx(0, 1), Gate::cx(1, 2), Gate::cx(2, 0)], "tri").unwrap();
    let eval = BoundEvaluator::new(&c, &d, &t).map_err(|e| e.to_string())?;
    let mut s = LocalSearch::new(&eval, Allocation::empty(3)).map_err(|e| e.to_string())?;
    s.run_to_exhaustion().map_err(|e| e.to_string())?;
    let generated = s.children_generated();
    let (c34, c23) = (
        count_worst_case_edges(3, 4).map_err(|e| e.to_string())?,
        count_worst_case_edges(2, 3).map_err(|e| e.to_string())?,
    );
    let detail = format!("children generated {generated}, count(3,4) = {c34}, count(2,3) = {c23}");
    if generated == 40 && c34.to_string() == "40" && c23.to_string() == "9" {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn is_legal(compiled: &CompiledCircuit, d: &DeviceModel, q_l: usize) -> bool {
    let Some(slots) = compiled.initial_map.to_physical() else {
        return false;
    };
    let mut sorted = slots.clone();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len() == q_l
        && compiled.physical_gates.iter().all(|g| match *g {
            PhysicalGate::TwoQubit { control, target, .. } => d.adjacent(control, target),
            PhysicalGate::Swap { a, b } => d.adjacent(a, b),
            PhysicalGate::OneQubit { .. } => true,
        })
}

fn hybrid_limits() -> Outcome {
    let mut instances = 0;
    for (d, circuits) in sweep() {
        let t = SwapPathTable::build(&d);
        for c in &circuits {
            let count = count_worst_case_edges(c.num_qubits as u64, d.num_qubits() as u64).unwrap();
            let n: usize = count.to_string().parse::<usize>().unwrap() + 1;
            let config = AnnealConfig { n, ..Default::default() };
            let hybrid = hybrid_allocate(c, &d, &t, &config).map_err(|e| e.to_string())?;
            let (local, _) = local_allocate(c, &d, &t).map_err(|e| e.to_string())?;
            if hybrid.compiled.initial_map != local.initial_map {
                return Err(format!(
                    "{}: hybrid chose {} but local search chose {}",
                    d.name, hybrid.compiled.initial_map, local.initial_map
                ));
            }
            instances += 1;
        }
    }
    let d = load_calibration(&std::fs::read_to_string(fixture("rueschlikon16.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let c = parse_qasm(&std::fs::read_to_string(fixture("q10c30.qasm")).unwrap()).map_err(|e| e.to_string())?;
    let t = SwapPathTable::build(&d);
    let mut legal = 0;
    for seed in 0..100 {
        let config = AnnealConfig { n: 0, seed, ..Default::default() };
        let r = hybrid_allocate(&c, &d, &t, &config).map_err(|e| e.to_string())?;
        if is_legal(&r.compiled, &d, c.num_qubits) {
            legal += 1;
        }
    }
    let detail = format!("large budget equals local search on {instances} instances; n = 0 legal on {legal}/100 runs");
    if legal == 100 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn annealing_mechanics() -> Outcome {
    let d = load_calibration(&std::fs::read_to_string(fixture("rueschlikon16.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let t = SwapPathTable::build(&d);
    let c = generate_random_cnot_circuit(6, 15, 3).map_err(|e| e.to_string())?;
    let config = AnnealConfig { n: 1, t0: 1.0, tau: 12.5, iters_per_round: 30, seed: 5, ..Default::default() };
    let r = hybrid_allocate(&c, &d, &t, &config).map_err(|e| e.to_string())?;
    if r.trace.records.is_empty() {
        return Err("the annealer recorded no iterations".into());
    }
    for rec in &r.trace.records {
        let expected = config.t0 * (-(rec.s as f64) / config.tau).exp();
        if (rec.temperature - expected).abs() > 1e-12 || (temperature(rec.s, config.t0, config.tau) - expected).abs() > 1e-12 {
            return Err(format!("temperature {} at s = {} differs from {expected}", rec.temperature, rec.s));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let draws = 10_000;
    let mut lines = Vec::new();
    for (delta, temp) in [(0.1f64, 0.1f64), (0.05, 0.2), (0.3, 0.1)] {
        let p: f64 = (-delta / temp).exp();
        let accepted = (0..draws)
            .filter(|_| metropolis_accept(0.6, 0.6 - delta, temp, rng.random::<f64>()))
            .count();
        let freq = accepted as f64 / draws as f64;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        if (freq - p).abs() > 3.0 * sigma {
            return Err(format!("acceptance {freq} vs exp(-{delta}/{temp}) = {p:.4} (3 sigma = {:.4})", 3.0 * sigma));
        }
        lines.push(format!("{freq:.4}~{p:.4}"));
    }
    Ok(format!(
        "{} temperatures exact; acceptance frequencies {}",
        r.trace.records.len(),
        lines.join(", ")
    ))
}

/// Excited-state probabilities by forward propagation of a sparse map of bit
/// states, branching four ways at every noisy cx.
fn enumerate_states(compiled: &CompiledCircuit, d: &DeviceModel) -> HashMap<usize, f64> {
    let mut states: HashMap<Vec<bool>, f64> = HashMap::from([(vec![false; d.num_qubits()], 1.0)]);
    for g in compiled.expanded_gates() {
        let PhysicalGate::TwoQubit { control, target, .. } = g else { continue };
        let eps = 1.0 - d.coupling(control, target).unwrap();
        let mut next: HashMap<Vec<bool>, f64> = HashMap::new();
        for (bits, p) in states {
            let mut ideal = bits.clone();
            ideal[target] ^= ideal[control];
            for (flip_c, flip_t) in [(false, false), (true, false), (false, true), (true, true)] {
                let mut b = ideal.clone();
                b[control] ^= flip_c;
                b[target] ^= flip_t;
                let w = if !flip_c && !flip_t { 1.0 - eps + eps / 4.0 } else { eps / 4.0 };
                *next.entry(b).or_insert(0.0) += p * w;
            }
        }
        states = next;
    }
    compiled
        .measured_qubits()
        .into_iter()
        .map(|q| (q, states.iter().filter(|(b, _)| b[q]).map(|(_, p)| p).sum()))
        .collect()
}

fn simulator_fidelity() -> Outcome {
    let d = uniform_device(Topology::Line, 2, 1.0, 0.98).map_err(|e| e.to_string())?;
    let t = SwapPathTable::build(&d);
    let c = Circuit::with_gates(2, vec![Gate::cx(0, 1)], "cx").unwrap();
    let compiled = insert_swaps(&c, &d, &Allocation::identity(2), &t).map_err(|e| e.to_string())?;
    let shots = 100_000u64;
    let report = simulate_measured_error(&compiled, &d, shots, 2024, &NoiseOptions::default()).map_err(|e| e.to_string())?;
    let rate = report.rate(1).unwrap();
    let sigma = (0.01f64 * 0.99 / shots as f64).sqrt();
    if (rate - 0.01).abs() > 3.0 * sigma {
        return Err(format!("single-cx target rate {rate} outside 0.01 +/- {:.5}", 3.0 * sigma));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    for _ in 0..200 {
        let n = rng.random_range(3..=10);
        let topology = if rng.random::<bool>() { Topology::Line } else { Topology::Ring };
        let d = device(&mut rng, topology, n);
        let t = SwapPathTable::build(&d);
        let q_l = rng.random_range(2..=n);
        let c = generate_random_cnot_circuit(q_l, rng.random_range(1..=6), rng.random()).unwrap();
        let full = random_allocation(q_l, n, &mut rng).unwrap();
        let compiled = insert_swaps(&c, &d, &full, &t).map_err(|e| e.to_string())?;
        let exact = expected_error(&compiled, &d, &NoiseOptions::default()).map_err(|e| e.to_string())?;
        for (q, p) in enumerate_states(&compiled, &d) {
            if (exact[&q] - p).abs() > 1e-12 {
                return Err(format!("qubit {q}: propagated {} vs enumerated {p}", exact[&q]));
            }
        }
        checked += 1;
    }
    Ok(format!(
        "single-cx rate {rate:.5} within 3 sigma of 0.01; exact rates match state enumeration on {checked} circuits"
    ))
}

fn benchmark_analogue() -> Outcome {
    let start = Instant::now();
    let d = load_calibration(&std::fs::read_to_string(fixture("rueschlikon16.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let circuits: Vec<Circuit> = (0..20u64)
        .map(|i| {
            let mut c = generate_random_cnot_circuit(10, 30, i).unwrap();
            c.source_name = format!("q10c30_{i}");
            c
        })
        .collect();
    let opts = NoiseOptions::default();
    let baselines = run_benchmark(&circuits, &d, &[Strategy::Identity, Strategy::Random], 1024, 0, &opts)
        .map_err(|e| e.to_string())?;
    let identity = median_error(&baselines, "identity").unwrap();
    let random = median_error(&baselines, "random").unwrap();
    let hybrid_rows = run_benchmark(&circuits, &d, &[Strategy::Hybrid(AnnealConfig::default())], 1024, 0, &opts)
        .map_err(|e| e.to_string())?;
    let hybrid = median_error(&hybrid_rows, "hybrid").unwrap();
    let context = format!("medians identity {identity:.4}, random {random:.4}, hybrid {hybrid:.4}");

    // Local search runs circuit by circuit so a failure is reported without waiting on the rest.
    let mut local_rows = Vec::new();
    for c in &circuits {
        match run_benchmark(std::slice::from_ref(c), &d, &[Strategy::LocalSearch], 1024, 0, &opts) {
            Ok(rows) => local_rows.extend(rows),
            Err(e) => {
                return Err(format!(
                    "local search did not finish on {} ({e}) after {:.0} s; {context}",
                    c.source_name,
                    start.elapsed().as_secs_f64()
                ))
            }
        }
    }
    let local = median_error(&local_rows, "local").unwrap();
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("local {local:.4}, {context}, {secs:.0} s");
    if local <= identity && local <= 0.5 * random && secs < 600.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let device = fixture("rueschlikon16.json");
    let run = |jobs: &str, name: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let code = qalloc_cli::run([
            "qalloc".as_ref(),
            "benchmark".as_ref(),
            device.as_os_str(),
            "--circuits".as_ref(),
            "3".as_ref(),
            "--qubits".as_ref(),
            "5".as_ref(),
            "--cnots".as_ref(),
            "10".as_ref(),
            "--shots".as_ref(),
            "256".as_ref(),
            "--seed".as_ref(),
            "11".as_ref(),
            "--jobs".as_ref(),
            jobs.as_ref(),
            "--out".as_ref(),
            out.as_os_str(),
        ] as [&std::ffi::OsStr; 17]);
        if code != 0 {
            return Err(format!("benchmark exited with {code}"));
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let a = run("1", "a.csv")?;
    let b = run("1", "b.csv")?;
    let c = run("3", "c.csv")?;
    if a == b && a == c {
        Ok(format!("three runs ({} bytes each, jobs 1, 1 and 3) are byte-identical", a.len()))
    } else {
        Err("benchmark CSVs differ between runs".into())
    }
}

fn main() {
    let checks: [Check; 8] = [
        ("oracle optimality", oracle_optimality),
        ("bound soundness", bound_soundness),
        ("worst-case count", worst_case_count),
        ("hybrid limits", hybrid_limits),
        ("annealing mechanics", annealing_mechanics),
        ("simulator fidelity", simulator_fidelity),
        ("benchmark analogue", benchmark_analogue),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
