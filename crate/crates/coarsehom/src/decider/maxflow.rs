//! Dinic max-flow on real-valued capacities.
//!
//! Arcs are stored in insertion order and each arc's reverse is its xor-1
//! partner, so runs are deterministic for a fixed construction order.
//! Residuals below [`EPS_RESIDUAL`] count as saturated.

pub const EPS_RESIDUAL: f64 = 1e-12;

/// Hard cap on augmentations; hitting it means the instance is numerically
/// degenerate far beyond anything the desk-scale windows produce.
const MAX_AUGMENTATIONS: usize = 10_000_000;

pub struct FlowNetwork {
    graph: Vec<Vec<u32>>,
    to: Vec<u32>,
    res: Vec<f64>,
    init: Vec<f64>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            graph: vec![Vec::new(); nodes],
            to: Vec::new(),
            res: Vec::new(),
            init: Vec::new(),
            level: vec![-1; nodes],
            iter: vec![0; nodes],
        }
    }

    /// Adds the arc pair u->v / v->u with the given capacities. Returns the
    /// index of the forward arc; net flow can be read back from it.
    pub fn add_arc(&mut self, u: u32, v: u32, cap_uv: f64, cap_vu: f64) -> usize {
        let idx = self.to.len();
        self.graph[u as usize].push(idx as u32);
        self.to.push(v);
        self.res.push(cap_uv);
        self.init.push(cap_uv);
        self.graph[v as usize].push(idx as u32 + 1);
        self.to.push(u);
        self.res.push(cap_vu);
        self.init.push(cap_vu);
        idx
    }

    /// Net flow pushed through the forward arc of `add_arc`.
    pub fn net_flow(&self, arc: usize) -> f64 {
        self.init[arc] - self.res[arc]
    }

    fn bfs(&mut self, source: u32, target: u32) -> bool {
        self.level.fill(-1);
        self.level[source as usize] = 0;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.graph[u as usize] {
                let v = self.to[a as usize];
                if self.res[a as usize] > EPS_RESIDUAL && self.level[v as usize] < 0 {
                    self.level[v as usize] = self.level[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[target as usize] >= 0
    }

    fn dfs(&mut self, u: u32, target: u32, limit: f64) -> f64 {
        if u == target {
            return limit;
        }
        while self.iter[u as usize] < self.graph[u as usize].len() {
            let a = self.graph[u as usize][self.iter[u as usize]] as usize;
            let v = self.to[a];
            if self.res[a] > EPS_RESIDUAL && self.level[v as usize] == self.level[u as usize] + 1 {
                let pushed = self.dfs(v, target, limit.min(self.res[a]));
                if pushed > 0.0 {
                    self.res[a] -= pushed;
                    self.res[a ^ 1] += pushed;
                    return pushed;
                }
            }
            self.iter[u as usize] += 1;
        }
        0.0
    }

    /// Runs Dinic to completion and returns the max-flow value.
    pub fn max_flow(&mut self, source: u32, target: u32) -> f64 {
        let mut total = 0.0;
        let mut augmentations = 0;
        while self.bfs(source, target) {
            self.iter.fill(0);
            loop {
                let pushed = self.dfs(source, target, f64::INFINITY);
                if pushed <= 0.0 {
                    break;
                }
                total += pushed;
                augmentations += 1;
                if augmentations > MAX_AUGMENTATIONS {
                    return total;
                }
            }
        }
        total
    }

    /// Source side of the minimum cut: nodes reachable from `source` in the
    /// residual graph after `max_flow`.
    pub fn min_cut_side(&self, source: u32) -> Vec<bool> {
        let mut seen = vec![false; self.graph.len()];
        seen[source as usize] = true;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.graph[u as usize] {
                let v = self.to[a as usize] as usize;
                if self.res[a as usize] > EPS_RESIDUAL && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v as u32);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diamond_max_flow() {
        // s=0, a=1, b=2, t=3
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 3.0, 0.0);
        net.add_arc(0, 2, 2.0, 0.0);
        net.add_arc(1, 3, 2.0, 0.0);
        net.add_arc(2, 3, 3.0, 0.0);
        net.add_arc(1, 2, 1.0, 0.0);
        assert!((net.max_flow(0, 3) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bottleneck_cut() {
        // s -> a -> t with a thin middle arc
        let mut net = FlowNetwork::new(3);
        net.add_arc(0, 1, 10.0, 0.0);
        let thin = net.add_arc(1, 2, 0.5, 0.0);
        assert!((net.max_flow(0, 2) - 0.5).abs() < 1e-12);
        let side = net.min_cut_side(0);
        assert!(side[0] && side[1] && !side[2]);
        assert!((net.net_flow(thin) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn undirected_pipe_carries_net_flow_both_ways() {
        let mut net = FlowNetwork::new(3);
        net.add_arc(0, 1, 4.0, 0.0);
        let pipe = net.add_arc(2, 1, 1.5, 1.5); // pipe between 1 and 2, forward is 2->1
        assert!((net.max_flow(0, 2) - 1.5).abs() < 1e-12);
        // flow runs 1 -> 2, against the forward orientation
        assert!((net.net_flow(pipe) + 1.5).abs() < 1e-12);
    }
}
