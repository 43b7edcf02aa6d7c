//! Classical bit-flip simulation of CNOT-only compiled circuits.
//!
//! Every physical qubit starts in 0. A `cx` on edge `e` applies the ideal
//! CNOT to the bits and then, with probability `1 - F_e`, flips each operand
//! independently with probability 1/2. Since the ideal result of a CNOT-only
//! circuit on `|0...0>` is all zeros, any 1 read out is an error.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::allocation::{CompiledCircuit, PhysicalGate};
use crate::device::DeviceModel;
use crate::error::{Error, Result};

/// Largest number of touched bits [`expected_error`] will track exactly.
pub const MAX_EXACT_BITS: usize = 20;

pub const DEFAULT_SHOTS: u64 = 1024;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NoiseOptions {
    /// Flip the measured bit with probability `1 - readout_fidelity` where the
    /// calibration provides one.
    pub readout: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorReport {
    pub shots_per_qubit: u64,
    /// Excited-state count per measured physical qubit.
    pub errors: BTreeMap<usize, u64>,
}

impl ErrorReport {
    pub fn rate(&self, qubit: usize) -> Option<f64> {
        self.errors.get(&qubit).map(|&e| e as f64 / self.shots_per_qubit as f64)
    }

    pub fn per_qubit(&self) -> BTreeMap<usize, f64> {
        self.errors
            .iter()
            .map(|(&q, &e)| (q, e as f64 / self.shots_per_qubit as f64))
            .collect()
    }

    pub fn total_shots(&self) -> u64 {
        self.shots_per_qubit * self.errors.len() as u64
    }

    pub fn total_errors(&self) -> u64 {
        self.errors.values().sum()
    }

    /// Fraction of incorrect measurements over all shots of all qubits.
    pub fn percent_error(&self) -> f64 {
        match self.total_shots() {
            0 => 0.0,
            n => self.total_errors() as f64 / n as f64,
        }
    }
}

/// A compiled circuit reduced to what the channel needs, over compact bit indices.
struct BitProgram {
    /// `(control bit, target bit, error probability)`.
    ops: Vec<(usize, usize, f64)>,
    /// `(physical qubit, bit, readout flip probability)` per measured qubit.
    measured: Vec<(usize, usize, f64)>,
    num_bits: usize,
}

impl BitProgram {
    fn new(compiled: &CompiledCircuit, device: &DeviceModel, opts: &NoiseOptions) -> Result<Self> {
        let mut bit_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut bit = |p: usize| {
            let next = bit_of.len();
            *bit_of.entry(p).or_insert(next)
        };
        let mut ops = Vec::new();
        for g in compiled.expanded_gates() {
            match g {
                PhysicalGate::TwoQubit { name, control, target } => {
                    if name != "cx" {
                        return Err(Error::UnsupportedGate(format!(
                            "the noise simulator only handles cx, found {name}"
                        )));
                    }
                    let f = device.coupling(control, target).ok_or_else(|| {
                        Error::Invariant(format!("cx on uncoupled pair ({control}, {target})"))
                    })?;
                    ops.push((bit(control), bit(target), 1.0 - f));
                }
                PhysicalGate::OneQubit { name, .. } if name == "id" => {}
                PhysicalGate::OneQubit { name, .. } => {
                    return Err(Error::UnsupportedGate(format!(
                        "the noise simulator only handles cx, found {name}"
                    )));
                }
                PhysicalGate::Swap { .. } => unreachable!("expanded"),
            }
        }
        let mut measured = Vec::new();
        for p in compiled.measured_qubits() {
            let flip = match device.qubits()[p].readout_fidelity {
                Some(r) if opts.readout => 1.0 - r,
                _ => 0.0,
            };
            measured.push((p, bit(p), flip));
        }
        measured.sort_unstable_by_key(|m| m.0);
        Ok(Self {
            ops,
            measured,
            num_bits: bit_of.len(),
        })
    }
}

/// Runs `shots` independent executions per measured qubit, reading one qubit
/// per execution. Qubit `p` draws from stream `p` of a ChaCha8 generator seeded
/// with `seed`, so the result does not depend on how work is scheduled.
pub fn simulate_measured_error(
    compiled: &CompiledCircuit,
    device: &DeviceModel,
    shots: u64,
    seed: u64,
    opts: &NoiseOptions,
) -> Result<ErrorReport> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let program = BitProgram::new(compiled, device, opts)?;
    let errors = program
        .measured
        .par_iter()
        .map(|&(p, bit, flip)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            let mut bits = vec![false; program.num_bits];
            let mut count = 0u64;
            for _ in 0..shots {
                bits.iter_mut().for_each(|b| *b = false);
                for &(c, t, eps) in &program.ops {
                    bits[t] ^= bits[c];
                    if eps > 0.0 && rng.random::<f64>() < eps {
                        bits[c] ^= rng.random::<bool>();
                        bits[t] ^= rng.random::<bool>();
                    }
                }
                let mut read = bits[bit];
                if flip > 0.0 && rng.random::<f64>() < flip {
                    read = !read;
                }
                count += read as u64;
            }
            (p, count)
        })
        .collect();
    Ok(ErrorReport {
        shots_per_qubit: shots,
        errors,
    })
}

/// Exact excited-state probability of every measured qubit, by propagating the
/// joint distribution over all touched bits.
pub fn expected_error(
    compiled: &CompiledCircuit,
    device: &DeviceModel,
    opts: &NoiseOptions,
) -> Result<BTreeMap<usize, f64>> {
    let program = BitProgram::new(compiled, device, opts)?;
    if program.num_bits > MAX_EXACT_BITS {
        return Err(Error::ResourceLimit {
            what: "touched bits for exact noise propagation",
            limit: MAX_EXACT_BITS as u64,
        });
    }
    let mut dist = vec![0.0f64; 1 << program.num_bits];
    dist[0] = 1.0;
    for &(c, t, eps) in &program.ops {
        let (cm, tm) = (1usize << c, 1usize << t);
        for s in 0..dist.len() {
            if s & cm != 0 && s & tm == 0 {
                dist.swap(s, s | tm);
            }
        }
        if eps == 0.0 {
            continue;
        }
        for s in 0..dist.len() {
            if s & (cm | tm) != 0 {
                continue;
            }
            let group = [s, s | cm, s | tm, s | cm | tm];
            let mixed = eps / 4.0 * group.iter().map(|&x| dist[x]).sum::<f64>();
            for x in group {
                dist[x] = (1.0 - eps) * dist[x] + mixed;
            }
        }
    }
    Ok(program
        .measured
        .iter()
        .map(|&(p, bit, flip)| {
            let one: f64 = dist
                .iter()
                .enumerate()
                .filter(|(s, _)| s & (1 << bit) != 0)
                .map(|(_, &w)| w)
                .sum();
            (p, one * (1.0 - flip) + (1.0 - one) * flip)
        })
        .collect())
}
