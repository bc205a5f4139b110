//! Primal network simplex for the balanced transportation problem.
//!
//! Sources `0..m`, sinks `m..m+n`, and an artificial root joined to every
//! node by a high-cost arc. The spanning tree is kept strongly feasible
//! (leaving-arc rule of Cunningham), pricing uses block search, and after
//! each pivot only the re-hung subtree has its parent, depth and potential
//! recomputed.

use crate::error::{Error, Result};

/// Reduced costs above `-PRICING_TOL` count as optimal.
const PRICING_TOL: f64 = 1e-10;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct TransportSolution {
    /// `(source, sink, mass)` for every positive flow.
    pub flows: Vec<(usize, usize, f64)>,
    /// Largest violation of dual feasibility at termination.
    pub max_violation: f64,
}

struct Network<'a> {
    m: usize,
    n: usize,
    cost: &'a [f64],
    art_cost: f64,
    root: usize,
    flow: Vec<f64>,
    in_tree: Vec<bool>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    /// `true` when the tree arc of a node points from the node to its parent
    up: Vec<bool>,
    depth: Vec<usize>,
    pi: Vec<f64>,
    adj: Vec<Vec<(usize, usize)>>,
    next_arc: usize,
    block: usize,
}

impl<'a> Network<'a> {
    fn real_arcs(&self) -> usize {
        self.m * self.n
    }

    #[inline]
    fn src(&self, a: usize) -> usize {
        let r = self.real_arcs();
        if a < r {
            a / self.n
        } else {
            let u = a - r;
            if u < self.m {
                u
            } else {
                self.root
            }
        }
    }

    #[inline]
    fn tgt(&self, a: usize) -> usize {
        let r = self.real_arcs();
        if a < r {
            self.m + a % self.n
        } else {
            let u = a - r;
            if u < self.m {
                self.root
            } else {
                u
            }
        }
    }

    #[inline]
    fn arc_cost(&self, a: usize) -> f64 {
        if a < self.real_arcs() {
            self.cost[a]
        } else {
            self.art_cost
        }
    }

    #[inline]
    fn reduced_cost(&self, a: usize) -> f64 {
        self.arc_cost(a) + self.pi[self.src(a)] - self.pi[self.tgt(a)]
    }

    fn new(supply: &[f64], demand: &[f64], cost: &'a [f64]) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let nodes = m + n + 1;
        let root = m + n;
        let max_cost = cost.iter().copied().fold(0.0, f64::max);
        let art_cost = (max_cost + 1.0) * (m + n) as f64;
        let arcs = m * n + m + n;
        let mut net = Network {
            m,
            n,
            cost,
            art_cost,
            root,
            flow: vec![0.0; arcs],
            in_tree: vec![false; arcs],
            parent: vec![NONE; nodes],
            pred: vec![NONE; nodes],
            up: vec![false; nodes],
            depth: vec![0; nodes],
            pi: vec![0.0; nodes],
            adj: vec![Vec::new(); nodes],
            next_arc: 0,
            block: ((m * n) as f64).sqrt().ceil().max(10.0) as usize,
        };
        for u in 0..m + n {
            let a = m * n + u;
            net.in_tree[a] = true;
            net.parent[u] = root;
            net.pred[u] = a;
            net.depth[u] = 1;
            if u < m {
                net.flow[a] = supply[u];
                net.up[u] = true;
                net.pi[u] = -art_cost;
            } else {
                net.flow[a] = demand[u - m];
                net.up[u] = false;
                net.pi[u] = art_cost;
            }
            net.adj[u].push((root, a));
            net.adj[root].push((u, a));
        }
        net
    }

    /// Block search over the real arcs for the most negative reduced cost.
    fn find_entering(&mut self) -> Option<usize> {
        let total = self.real_arcs();
        let mut best = None;
        let mut best_rc = -PRICING_TOL;
        let mut count = self.block;
        let mut a = self.next_arc;
        for _ in 0..total {
            if !self.in_tree[a] {
                let i = a / self.n;
                let rc = self.cost[a] + self.pi[i] - self.pi[self.m + a % self.n];
                if rc < best_rc {
                    best_rc = rc;
                    best = Some(a);
                }
            }
            a += 1;
            if a == total {
                a = 0;
            }
            count -= 1;
            if count == 0 {
                if best.is_some() {
                    break;
                }
                count = self.block;
            }
        }
        self.next_arc = a;
        best
    }

    fn join(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            if self.depth[u] >= self.depth[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        u
    }

    fn pivot(&mut self, entering: usize) {
        let s = self.src(entering);
        let t = self.tgt(entering);
        let join = self.join(s, t);

        // Along s -> join the cycle runs against the tree arcs pointing up;
        // along t -> join against those pointing down. Strict comparison on
        // the first side, non-strict on the second keeps the tree strongly
        // feasible.
        let mut delta = f64::INFINITY;
        let mut out_node = NONE;
        let mut out_on_source_side = false;
        let mut u = s;
        while u != join {
            if self.up[u] {
                let d = self.flow[self.pred[u]];
                if d < delta {
                    delta = d;
                    out_node = u;
                    out_on_source_side = true;
                }
            }
            u = self.parent[u];
        }
        let mut u = t;
        while u != join {
            if !self.up[u] {
                let d = self.flow[self.pred[u]];
                if d <= delta {
                    delta = d;
                    out_node = u;
                    out_on_source_side = false;
                }
            }
            u = self.parent[u];
        }
        debug_assert!(out_node != NONE, "transportation cycles always block");
        let delta = delta.max(0.0);

        if delta > 0.0 {
            self.flow[entering] += delta;
            let mut u = s;
            while u != join {
                let a = self.pred[u];
                self.flow[a] = if self.up[u] {
                    (self.flow[a] - delta).max(0.0)
                } else {
                    self.flow[a] + delta
                };
                u = self.parent[u];
            }
            let mut u = t;
            while u != join {
                let a = self.pred[u];
                self.flow[a] = if self.up[u] {
                    self.flow[a] + delta
                } else {
                    (self.flow[a] - delta).max(0.0)
                };
                u = self.parent[u];
            }
        }
        let leaving = self.pred[out_node];
        self.flow[leaving] = 0.0;

        // swap arcs in the tree
        let p = self.parent[out_node];
        self.adj[out_node].retain(|&(_, a)| a != leaving);
        self.adj[p].retain(|&(_, a)| a != leaving);
        self.in_tree[leaving] = false;
        self.in_tree[entering] = true;
        self.adj[s].push((t, entering));
        self.adj[t].push((s, entering));

        // the detached subtree hangs from the entering arc now
        let (top, anchor) = if out_on_source_side { (s, t) } else { (t, s) };
        self.attach(top, anchor, entering);
        let mut stack = vec![top];
        while let Some(u) = stack.pop() {
            for k in 0..self.adj[u].len() {
                let (w, a) = self.adj[u][k];
                if w != self.parent[u] {
                    self.attach(w, u, a);
                    stack.push(w);
                }
            }
        }
    }

    fn attach(&mut self, node: usize, parent: usize, arc: usize) {
        self.parent[node] = parent;
        self.pred[node] = arc;
        self.depth[node] = self.depth[parent] + 1;
        let c = self.arc_cost(arc);
        if self.src(arc) == node {
            self.up[node] = true;
            self.pi[node] = self.pi[parent] - c;
        } else {
            self.up[node] = false;
            self.pi[node] = self.pi[parent] + c;
        }
    }
}

/// Minimizes `sum c_ij g_ij` over `g >= 0` with row sums `supply` and column
/// sums `demand`. `cost` is row-major `m x n`; the totals must agree.
pub(crate) fn solve_transport(
    supply: &[f64],
    demand: &[f64],
    cost: &[f64],
) -> Result<TransportSolution> {
    let (m, n) = (supply.len(), demand.len());
    debug_assert_eq!(cost.len(), m * n);
    let mut net = Network::new(supply, demand, cost);
    while let Some(a) = net.find_entering() {
        net.pivot(a);
    }

    let art_flow: f64 = (m * n..m * n + m + n).map(|a| net.flow[a]).sum();
    if art_flow > 1e-10 {
        return Err(Error::Solver(format!(
            "transport problem left {art_flow:.3e} mass on artificial arcs"
        )));
    }
    let max_violation = (0..m * n).map(|a| -net.reduced_cost(a)).fold(0.0, f64::max);
    let flows = (0..m * n)
        .filter(|&a| net.flow[a] > 0.0)
        .map(|a| (a / n, a % n, net.flow[a]))
        .collect();
    Ok(TransportSolution {
        flows,
        max_violation,
    })
}
