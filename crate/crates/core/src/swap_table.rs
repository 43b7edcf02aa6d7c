//! All-pairs best SWAP routes, computed once per device with Floyd-Warshall.
//!
//! Costs live in the log domain: an edge costs `-ln(F_e^3)`, so the shortest
//! path maximizes the product of SWAP fidelities. Zero-fidelity edges are not
//! part of the graph at all.

use crate::device::{swap_fidelity, DeviceModel};

/// Route used when a two-qubit gate's endpoints are not adjacent: the control
/// is swapped along `path[..len-1]` and the gate then runs on the final edge.
#[derive(Debug, Clone)]
pub struct Route {
    /// Vertex sequence from source to destination, inclusive.
    pub path: Vec<usize>,
    /// Sum of `-ln F_swap` over the swapped edges (all but the last).
    pub swap_log_cost: f64,
    /// `ln F_e` of the final edge, where the gate itself executes.
    pub gate_log_fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct SwapPathTable {
    n: usize,
    cost: Vec<f64>,
    routes: Vec<Option<Route>>,
}

impl SwapPathTable {
    pub fn build(device: &DeviceModel) -> Self {
        let n = device.num_qubits();
        let mut cost = vec![f64::INFINITY; n * n];
        let mut next = vec![usize::MAX; n * n];
        for u in 0..n {
            cost[u * n + u] = 0.0;
            next[u * n + u] = u;
        }
        for e in device.edges() {
            let f = swap_fidelity(e);
            if f <= 0.0 {
                continue;
            }
            let w = -f.ln();
            for (u, v) in [(e.a, e.b), (e.b, e.a)] {
                cost[u * n + v] = w;
                next[u * n + v] = v;
            }
        }
        for k in 0..n {
            for i in 0..n {
                let ik = cost[i * n + k];
                if ik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let through = ik + cost[k * n + j];
                    if through < cost[i * n + j] {
                        cost[i * n + j] = through;
                        next[i * n + j] = next[i * n + k];
                    }
                }
            }
        }

        let mut routes = Vec::with_capacity(n * n);
        for u in 0..n {
            for v in 0..n {
                if next[u * n + v] == usize::MAX {
                    routes.push(None);
                    continue;
                }
                let mut path = vec![u];
                let mut at = u;
                while at != v {
                    at = next[at * n + v];
                    path.push(at);
                }
                let mut swap_log_cost = 0.0;
                let mut gate_log_fidelity = 0.0;
                if path.len() >= 2 {
                    for w in path[..path.len() - 1].windows(2) {
                        swap_log_cost += -device.coupling(w[0], w[1]).expect("path edge").powi(3).ln();
                    }
                    let last = &path[path.len() - 2..];
                    gate_log_fidelity = device.coupling(last[0], last[1]).expect("path edge").ln();
                }
                routes.push(Some(Route {
                    path,
                    swap_log_cost,
                    gate_log_fidelity,
                }));
            }
        }
        Self {
            n,
            cost,
            routes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn reachable(&self, u: usize, v: usize) -> bool {
        self.routes[u * self.n + v].is_some()
    }

    /// Accumulated `-ln` SWAP cost of the best path; infinite when unreachable.
    pub fn log_cost(&self, u: usize, v: usize) -> f64 {
        self.cost[u * self.n + v]
    }

    /// Product of SWAP fidelities along the best path (0 when unreachable, 1 on the diagonal).
    pub fn swap_fidelity_product(&self, u: usize, v: usize) -> f64 {
        (-self.log_cost(u, v)).exp()
    }

    pub fn route(&self, u: usize, v: usize) -> Option<&Route> {
        self.routes[u * self.n + v].as_ref()
    }

    /// Vertex path from `u` to `v`, inclusive of both ends.
    pub fn path(&self, u: usize, v: usize) -> Option<&[usize]> {
        self.route(u, v).map(|r| r.path.as_slice())
    }
}
