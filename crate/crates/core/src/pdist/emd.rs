//! Exact balanced-transportation solver via successive shortest augmenting
//! paths with node potentials. Instances here are tiny (one node per
//! cluster), so a dense Dijkstra is plenty; the solver carries reusable
//! buffers because the pairwise-distance path solves millions of instances.

use crate::error::{Error, Result};

/// Tolerance for the supply/demand balance precondition.
pub const BALANCE_TOL: f64 = 1e-9;

const FLOW_EPS: f64 = 1e-13;

/// Reusable workspace for transportation solves up to `max_a x max_b`.
pub struct EmdSolver {
    rem_a: Vec<f64>,
    rem_b: Vec<f64>,
    flow: Vec<f64>,
    potential: Vec<f64>,
    dist: Vec<f64>,
    done: Vec<bool>,
    parent: Vec<usize>,
}

impl EmdSolver {
    pub fn new(max_a: usize, max_b: usize) -> Self {
        let nodes = max_a + max_b;
        Self {
            rem_a: vec![0.0; max_a],
            rem_b: vec![0.0; max_b],
            flow: vec![0.0; max_a * max_b],
            potential: vec![0.0; nodes],
            dist: vec![0.0; nodes],
            done: vec![false; nodes],
            parent: vec![0; nodes],
        }
    }

    /// Minimum transport cost between `weights_a` and `weights_b` under the
    /// row-major `ground` cost matrix (`a * cols + b`). Inputs are assumed
    /// validated (see [`transport_emd`]).
    pub fn solve(&mut self, weights_a: &[f64], weights_b: &[f64], ground: &[f64]) -> f64 {
        let a = weights_a.len();
        let b = weights_b.len();
        let nodes = a + b;
        debug_assert!(ground.len() == a * b);

        self.rem_a[..a].copy_from_slice(weights_a);
        self.rem_b[..b].copy_from_slice(weights_b);
        self.flow[..a * b].fill(0.0);
        self.potential[..nodes].fill(0.0);

        let total_a: f64 = weights_a.iter().sum();
        let total_b: f64 = weights_b.iter().sum();
        let mut to_push = total_a.min(total_b);

        while to_push > FLOW_EPS {
            // Dijkstra over supply nodes 0..a and demand nodes a..a+b with
            // reduced costs; sources are all supplies with remaining mass.
            let dist = &mut self.dist[..nodes];
            let done = &mut self.done[..nodes];
            let parent = &mut self.parent[..nodes];
            dist.fill(f64::INFINITY);
            done.fill(false);
            for i in 0..a {
                if self.rem_a[i] > FLOW_EPS {
                    dist[i] = 0.0;
                    parent[i] = usize::MAX;
                }
            }
            let mut reached: Option<usize> = None;
            loop {
                let mut u = usize::MAX;
                let mut best = f64::INFINITY;
                for v in 0..nodes {
                    if !done[v] && dist[v] < best {
                        best = dist[v];
                        u = v;
                    }
                }
                if u == usize::MAX {
                    break;
                }
                done[u] = true;
                if u >= a && self.rem_b[u - a] > FLOW_EPS {
                    reached = Some(u - a);
                    break;
                }
                if u < a {
                    // Forward edges u -> every demand node.
                    for j in 0..b {
                        let v = a + j;
                        if done[v] {
                            continue;
                        }
                        let rc = ground[u * b + j] + self.potential[u] - self.potential[v];
                        let nd = dist[u] + rc.max(0.0);
                        if nd < dist[v] {
                            dist[v] = nd;
                            parent[v] = u;
                        }
                    }
                } else {
                    // Residual edges (u - a) -> supplies carrying flow.
                    let j = u - a;
                    for i in 0..a {
                        if done[i] || self.flow[i * b + j] <= FLOW_EPS {
                            continue;
                        }
                        let rc = -ground[i * b + j] + self.potential[u] - self.potential[i];
                        let nd = dist[u] + rc.max(0.0);
                        if nd < dist[i] {
                            dist[i] = nd;
                            parent[i] = u;
                        }
                    }
                }
            }

            let Some(sink_j) = reached else {
                // Numerically exhausted; remaining mass is below tolerance.
                break;
            };

            // Bottleneck along the path.
            let sink = a + sink_j;
            let mut bottleneck = to_push.min(self.rem_b[sink_j]);
            let mut v = sink;
            while parent[v] != usize::MAX {
                let u = parent[v];
                if u < a && v >= a {
                    // forward edge: unlimited capacity
                } else {
                    // residual edge (demand -> supply): capped by its flow
                    bottleneck = bottleneck.min(self.flow[v * b + (u - a)]);
                }
                v = u;
            }
            let source = v;
            bottleneck = bottleneck.min(self.rem_a[source]);

            // Augment.
            let mut v = sink;
            while parent[v] != usize::MAX {
                let u = parent[v];
                if u < a && v >= a {
                    self.flow[u * b + (v - a)] += bottleneck;
                } else {
                    self.flow[v * b + (u - a)] -= bottleneck;
                }
                v = u;
            }
            self.rem_a[source] -= bottleneck;
            self.rem_b[sink_j] -= bottleneck;
            to_push -= bottleneck;

            // Update potentials, capping at the sink distance so reduced
            // costs stay nonnegative despite the early Dijkstra exit.
            let dt = dist[sink];
            for v in 0..nodes {
                let dv = if dist[v].is_finite() { dist[v].min(dt) } else { dt };
                self.potential[v] += dv;
            }
        }

        let mut cost = 0.0;
        for i in 0..a {
            for j in 0..b {
                let f = self.flow[i * b + j];
                if f > 0.0 {
                    cost += f * ground[i * b + j];
                }
            }
        }
        cost
    }
}

/// Exact optimum of the balanced transportation problem: minimize
/// `sum f[a][b] * ground[a][b]` subject to row sums `weights_a`, column sums
/// `weights_b`, `f >= 0`.
pub fn transport_emd(weights_a: &[f64], weights_b: &[f64], ground: &[Vec<f64>]) -> Result<f64> {
    if weights_a.is_empty() || weights_b.is_empty() {
        return Err(Error::EmptyInput("transport weights are empty".into()));
    }
    if ground.len() != weights_a.len() || ground.iter().any(|row| row.len() != weights_b.len()) {
        return Err(Error::Dimension {
            expected: weights_a.len() * weights_b.len(),
            got: ground.iter().map(|r| r.len()).sum(),
        });
    }
    for &w in weights_a.iter().chain(weights_b) {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::Input(format!("weights must be nonnegative, got {w}")));
        }
    }
    let mut flat = Vec::with_capacity(weights_a.len() * weights_b.len());
    for row in ground {
        for &c in row {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::Input(format!(
                    "ground costs must be nonnegative and finite, got {c}"
                )));
            }
            flat.push(c);
        }
    }
    let sum_a: f64 = weights_a.iter().sum();
    let sum_b: f64 = weights_b.iter().sum();
    if (sum_a - sum_b).abs() > BALANCE_TOL {
        return Err(Error::Balance(format!(
            "weight sums differ: {sum_a} vs {sum_b}"
        )));
    }
    let mut solver = EmdSolver::new(weights_a.len(), weights_b.len());
    Ok(solver.solve(weights_a, weights_b, &flat))
}
