//! Hybrid allocator: simulated annealing over progressively larger
//! sub-allocations, each scored by a budgeted local search.
//!
//! Round `r` anneals the placement of the first `r` qubits in allocation order.
//! Every proposal is scored by running [`LocalSearch`] from it for `n` pops and
//! reading the tightest upper bound the search has established. Full
//! allocations met along the way are collected, and the run stops at the end
//! of the first round that found any.
//!
//! Randomness comes from ChaCha8 seeded with `seed`; restart `k` uses stream `k`
//! of that seed, so restarts are independent and reproducible on any platform.

use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::allocation::{insert_swaps, Allocation, BoundEvaluator, CompiledCircuit, FidelityBound};
use crate::circuit::{qubit_order, Circuit, LogicalQubit};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::search::{check_capacity, LocalSearch, DEFAULT_FRONTIER_CAP};
use crate::swap_table::SwapPathTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealConfig {
    /// Local-search pops per evaluation.
    pub n: usize,
    pub t0: f64,
    pub tau: f64,
    pub iters_per_round: usize,
    pub seed: u64,
    pub restarts: usize,
    pub frontier_cap: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            n: 10,
            t0: 10.0,
            tau: 25.0,
            iters_per_round: 50,
            seed: 0,
            restarts: 1,
            frontier_cap: DEFAULT_FRONTIER_CAP,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidArgument(format!("t0 must be positive, got {}", self.t0)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {}", self.tau)));
        }
        if self.iters_per_round == 0 || self.restarts == 0 {
            return Err(Error::InvalidArgument(
                "iters_per_round and restarts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// `T = T0 * exp(-s / tau)`.
pub fn temperature(s: u64, t0: f64, tau: f64) -> f64 {
    t0 * (-(s as f64) / tau).exp()
}

/// Metropolis rule: always take an equal or better bound, otherwise accept with
/// probability `exp(-(f_current - f_proposed) / T)` using the uniform draw `u`.
pub fn metropolis_accept(f_current: f64, f_proposed: f64, t: f64, u: f64) -> bool {
    f_proposed >= f_current || u < (-(f_current - f_proposed) / t).exp()
}

/// Moves one uniformly chosen qubit of `round_qubits` to a uniformly chosen slot
/// not held by the others (possibly its own).
pub fn propose<R: Rng + ?Sized>(
    current: &Allocation,
    num_physical: usize,
    round_qubits: &[LogicalQubit],
    rng: &mut R,
) -> Result<Allocation> {
    if round_qubits.is_empty() {
        return Err(Error::InvalidArgument("no qubits to move".into()));
    }
    let moved = round_qubits[rng.random_range(0..round_qubits.len())];
    let rest = current.without(moved);
    let free: Vec<usize> = (0..num_physical).filter(|&p| !rest.uses_physical(p)).collect();
    if free.is_empty() {
        return Err(Error::Infeasible("no free physical qubit for the proposal".into()));
    }
    rest.extend(moved, free[rng.random_range(0..free.len())])
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub round: usize,
    pub s: u64,
    pub temperature: f64,
    pub bound: f64,
    pub accepted: bool,
    /// Full allocations met while scoring this proposal.
    pub full_found: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnealTrace {
    pub records: Vec<TraceRecord>,
}

impl AnnealTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,s,temperature,bound,accepted,full_found\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.round, r.s, r.temperature, r.bound, r.accepted, r.full_found
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct HybridResult {
    pub compiled: CompiledCircuit,
    pub bound: FidelityBound,
    pub trace: AnnealTrace,
    /// Index of the restart that produced the result.
    pub restart: usize,
}

struct Scored {
    score: f64,
    leaves: u64,
    best_full: Option<(Allocation, f64)>,
}

fn score(eval: &BoundEvaluator<'_>, a: &Allocation, n: usize, cap: usize) -> Result<Scored> {
    if a.is_full() {
        let b = eval.bound(a);
        return Ok(Scored {
            score: b.value,
            leaves: b.feasible as u64,
            best_full: b.feasible.then(|| (a.clone(), b.value)),
        });
    }
    let mut search = LocalSearch::new(eval, a.clone())?.with_frontier_cap(cap);
    search.step(n)?;
    Ok(Scored {
        score: search.upper_bound().value,
        leaves: search.leaves_popped(),
        best_full: search.best_full().map(|(a, b)| (a.clone(), b.value)),
    })
}

fn keep_best(slot: &mut Option<(Allocation, f64)>, found: Option<(Allocation, f64)>) {
    if let Some((a, f)) = found {
        if slot.as_ref().is_none_or(|(_, best)| f > *best) {
            *slot = Some((a, f));
        }
    }
}

fn run_once(
    eval: &BoundEvaluator<'_>,
    config: &AnnealConfig,
    restart: usize,
) -> Result<(Allocation, AnnealTrace)> {
    let circuit = eval.circuit();
    let num_physical = eval.device().num_qubits();
    let mut trace = AnnealTrace::default();

    if config.n > 0 {
        let mut search =
            LocalSearch::new(eval, Allocation::empty(circuit.num_qubits))?.with_frontier_cap(config.frontier_cap);
        search.step(config.n)?;
        if search.is_complete() {
            return match search.best_full() {
                Some((a, _)) => Ok((a.clone(), trace)),
                None => Err(Error::Infeasible("no full allocation connects every interacting pair".into())),
            };
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    let order = qubit_order(circuit);
    let mut current = Allocation::empty(circuit.num_qubits);

    for round in 1..=order.len() {
        let round_qubits = &order[..round];
        let newcomer = order[round - 1];
        let free: Vec<usize> = (0..num_physical).filter(|&p| !current.uses_physical(p)).collect();
        current = current.extend(newcomer, free[rng.random_range(0..free.len())])?;

        let mut found: Option<(Allocation, f64)> = None;
        let first = score(eval, &current, config.n, config.frontier_cap)?;
        let mut current_score = first.score;
        keep_best(&mut found, first.best_full);
        let mut round_best = (current.clone(), current_score);

        for s in 0..config.iters_per_round as u64 {
            let t = temperature(s, config.t0, config.tau);
            let proposal = propose(&current, num_physical, round_qubits, &mut rng)?;
            let scored = score(eval, &proposal, config.n, config.frontier_cap)?;
            keep_best(&mut found, scored.best_full);
            let u: f64 = rng.random();
            let accepted = metropolis_accept(current_score, scored.score, t, u);
            trace.records.push(TraceRecord {
                round,
                s,
                temperature: t,
                bound: scored.score,
                accepted,
                full_found: scored.leaves,
            });
            if scored.score > round_best.1 {
                round_best = (proposal.clone(), scored.score);
            }
            if accepted {
                current = proposal;
                current_score = scored.score;
            }
        }

        if let Some((best, _)) = found {
            return Ok((best, trace));
        }
        current = round_best.0;
    }
    Err(Error::Infeasible("annealing found no feasible full allocation".into()))
}

/// Runs the hybrid allocator; with several restarts the highest fidelity wins and
/// ties go to the lowest restart index.
pub fn hybrid_allocate(
    circuit: &Circuit,
    device: &DeviceModel,
    table: &SwapPathTable,
    config: &AnnealConfig,
) -> Result<HybridResult> {
    config.validate()?;
    check_capacity(circuit.num_qubits, device.num_qubits())?;
    let eval = BoundEvaluator::new(circuit, device, table)?;

    let runs: Vec<Result<(Allocation, AnnealTrace)>> = (0..config.restarts)
        .into_par_iter()
        .map(|k| run_once(&eval, config, k))
        .collect();

    let mut best: Option<HybridResult> = None;
    for (restart, run) in runs.into_iter().enumerate() {
        let (allocation, trace) = run?;
        let bound = eval.bound(&allocation);
        if best.as_ref().is_none_or(|b| bound.value > b.bound.value) {
            best = Some(HybridResult {
                compiled: insert_swaps(circuit, device, &allocation, table)?,
                bound,
                trace,
                restart,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}
