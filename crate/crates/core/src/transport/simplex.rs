//! Primal network simplex for the uncapacitated transportation problem.
//!
//! Nodes `0..n` are sources with supply `a_i`, nodes `n..n+m` are sinks with
//! demand `b_j`, node `n + m` is an artificial root. Real arcs `i → n + j` are
//! numbered `i * m + j`; every node also owns an artificial arc to or from the
//! root, used only by the starting basis. The basis is kept strongly feasible
//! (every zero-flow tree arc points away from the root), which rules out
//! cycling under any entering rule.
//!
//! Node prices follow `rc(i → j) = c_ij + π_i − π_j`.

/// How the entering arc is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotRule {
    /// Lowest-index arc with negative reduced cost.
    Bland,
    /// Most negative reduced cost within cyclic blocks of `√arcs` arcs.
    #[default]
    BlockSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    /// Tree arc from the node to its parent.
    Up,
    /// Tree arc from the parent to the node.
    Down,
}

const NONE: usize = usize::MAX;

/// Flows this close to zero after an update are snapped to zero.
const FLOW_SNAP: f64 = 1e-15;

pub struct SimplexOutcome {
    /// Positive flows `(i, j, f)` on real arcs, sorted by `(i, j)`.
    pub flows: Vec<(usize, usize, f64)>,
    pub pi_source: Vec<f64>,
    pub pi_target: Vec<f64>,
    pub pivots: usize,
}

struct Simplex<'c, C: Fn(usize, usize) -> f64> {
    n: usize,
    m: usize,
    root: usize,
    cost: &'c C,
    art_cost: f64,
    parent: Vec<usize>,
    /// Arc id of the tree arc joining a node to its parent.
    pred: Vec<usize>,
    dir: Vec<Dir>,
    /// Flow on `pred[u]`.
    flow: Vec<f64>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
    pi: Vec<f64>,
    eps: f64,
}

impl<'c, C: Fn(usize, usize) -> f64> Simplex<'c, C> {
    fn real_arcs(&self) -> usize {
        self.n * self.m
    }

    fn endpoints(&self, arc: usize) -> (usize, usize) {
        let real = self.real_arcs();
        if arc < real {
            (arc / self.m, self.n + arc % self.m)
        } else {
            let u = arc - real;
            if u < self.n {
                (u, self.root)
            } else {
                (self.root, u)
            }
        }
    }

    fn arc_cost(&self, arc: usize) -> f64 {
        let real = self.real_arcs();
        if arc < real {
            (self.cost)(arc / self.m, arc % self.m)
        } else if arc - real < self.n {
            0.0
        } else {
            self.art_cost
        }
    }

    fn reduced_cost(&self, arc: usize) -> f64 {
        let (i, j) = (arc / self.m, arc % self.m);
        (self.cost)(i, j) + self.pi[i] - self.pi[self.n + j]
    }

    fn enter_bland(&self) -> Option<usize> {
        (0..self.real_arcs()).find(|&a| self.reduced_cost(a) < -self.eps)
    }

    fn enter_block(&self, next: &mut usize, block: usize) -> Option<usize> {
        let total = self.real_arcs();
        let mut best = -self.eps;
        let mut choice = None;
        let mut count = block;
        for k in 0..total {
            let a = (*next + k) % total;
            let rc = self.reduced_cost(a);
            if rc < best {
                best = rc;
                choice = Some(a);
            }
            count -= 1;
            if count == 0 {
                if choice.is_some() {
                    *next = a;
                    return choice;
                }
                count = block;
            }
        }
        choice
    }

    fn join(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            if self.depth[u] > self.depth[v] {
                u = self.parent[u];
            } else if self.depth[v] > self.depth[u] {
                v = self.parent[v];
            } else {
                u = self.parent[u];
                v = self.parent[v];
            }
        }
        u
    }

    fn remove_child(&mut self, parent: usize, child: usize) {
        let list = &mut self.children[parent];
        let k = list.iter().position(|&c| c == child).expect("child is listed under its parent");
        list.swap_remove(k);
    }

    fn refresh_subtree(&mut self, top: usize) {
        let mut stack = vec![top];
        while let Some(u) = stack.pop() {
            let p = self.parent[u];
            self.depth[u] = self.depth[p] + 1;
            let c = self.arc_cost(self.pred[u]);
            self.pi[u] = match self.dir[u] {
                Dir::Up => self.pi[p] - c,
                Dir::Down => self.pi[p] + c,
            };
            stack.extend(self.children[u].iter().copied());
        }
    }

    fn pivot(&mut self, arc: usize) {
        let (first, second) = self.endpoints(arc);
        let join = self.join(first, second);

        // Flow on the cycle runs join → … → first → second → … → join.
        let mut delta = f64::INFINITY;
        let mut out = NONE;
        let mut out_on_first = false;
        let mut u = first;
        while u != join {
            if self.dir[u] == Dir::Up && self.flow[u] < delta {
                delta = self.flow[u].max(0.0);
                out = u;
                out_on_first = true;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != join {
            if self.dir[u] == Dir::Down && self.flow[u] <= delta {
                delta = self.flow[u].max(0.0);
                out = u;
                out_on_first = false;
            }
            u = self.parent[u];
        }
        assert!(out != NONE, "transportation problem is bounded");

        if delta > 0.0 {
            let mut u = first;
            while u != join {
                self.flow[u] += if self.dir[u] == Dir::Up { -delta } else { delta };
                if self.flow[u].abs() < FLOW_SNAP {
                    self.flow[u] = 0.0;
                }
                u = self.parent[u];
            }
            let mut u = second;
            while u != join {
                self.flow[u] += if self.dir[u] == Dir::Up { delta } else { -delta };
                if self.flow[u].abs() < FLOW_SNAP {
                    self.flow[u] = 0.0;
                }
                u = self.parent[u];
            }
        }

        // Re-hang the subtree cut off below `out` from the entering arc.
        let (low, high) = if out_on_first { (first, second) } else { (second, first) };
        let mut path = vec![low];
        while *path.last().unwrap() != out {
            let p = self.parent[*path.last().unwrap()];
            path.push(p);
        }
        let old_parent_of_out = self.parent[out];
        self.remove_child(old_parent_of_out, out);
        for k in (1..path.len()).rev() {
            let (child, node) = (path[k - 1], path[k]);
            self.remove_child(node, child);
            self.parent[node] = child;
            self.pred[node] = self.pred[child];
            self.dir[node] = match self.dir[child] {
                Dir::Up => Dir::Down,
                Dir::Down => Dir::Up,
            };
            self.flow[node] = self.flow[child];
            self.children[child].push(node);
        }
        self.parent[low] = high;
        self.pred[low] = arc;
        self.dir[low] = if low == first { Dir::Up } else { Dir::Down };
        self.flow[low] = if delta.is_finite() { delta } else { 0.0 };
        self.children[high].push(low);
        self.refresh_subtree(low);
    }
}

/// Solves `min Σ c_ij f_ij` subject to row sums `supply`, column sums `demand`.
///
/// `max_cost` must bound every `c_ij` from above.
pub fn solve<C: Fn(usize, usize) -> f64>(
    supply: &[f64],
    demand: &[f64],
    cost: &C,
    max_cost: f64,
    rule: PivotRule,
) -> SimplexOutcome {
    let (n, m) = (supply.len(), demand.len());
    let nodes = n + m;
    let root = nodes;
    let art_cost = (max_cost.max(0.0) + 1.0) * (nodes as f64 + 1.0);
    let real = n * m;
    let mut s = Simplex {
        n,
        m,
        root,
        cost,
        art_cost,
        parent: vec![root; nodes + 1],
        pred: (0..=nodes).map(|u| real + u).collect(),
        dir: vec![Dir::Up; nodes + 1],
        flow: vec![0.0; nodes + 1],
        depth: vec![1; nodes + 1],
        children: vec![Vec::new(); nodes + 1],
        pi: vec![0.0; nodes + 1],
        eps: 1e-12 * (1.0 + max_cost.abs()),
    };
    s.parent[root] = NONE;
    s.depth[root] = 0;
    s.children[root] = (0..nodes).collect();
    s.flow[..n].copy_from_slice(supply);
    for (j, &d) in demand.iter().enumerate() {
        let u = n + j;
        s.dir[u] = Dir::Down;
        s.flow[u] = d;
        s.pi[u] = art_cost;
    }

    let block = ((real as f64).sqrt().ceil() as usize).max(10);
    let mut next = 0;
    let mut pivots = 0;
    loop {
        let entering = match rule {
            PivotRule::Bland => s.enter_bland(),
            PivotRule::BlockSearch => s.enter_block(&mut next, block),
        };
        let Some(arc) = entering else { break };
        s.pivot(arc);
        pivots += 1;
    }

    let mut flows: Vec<(usize, usize, f64)> = (0..nodes)
        .filter(|&u| s.pred[u] < real && s.flow[u] > 0.0)
        .map(|u| (s.pred[u] / m, s.pred[u] % m, s.flow[u]))
        .collect();
    flows.sort_by_key(|f| (f.0, f.1));
    SimplexOutcome { flows, pi_source: s.pi[..n].to_vec(), pi_target: s.pi[n..nodes].to_vec(), pivots }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(flows: &[(usize, usize, f64)], c: &impl Fn(usize, usize) -> f64) -> f64 {
        flows.iter().map(|&(i, j, f)| f * c(i, j)).sum()
    }

    #[test]
    fn two_by_two_line() {
        let xs = [0.0, 1.0];
        let ys = [2.0, 3.0];
        let c = |i: usize, j: usize| 0.5 * (xs[i] - ys[j]) * (xs[i] - ys[j]);
        for rule in [PivotRule::Bland, PivotRule::BlockSearch] {
            let out = solve(&[0.5, 0.5], &[0.5, 0.5], &c, 4.5, rule);
            assert_eq!(out.flows, vec![(0, 0, 0.5), (1, 1, 0.5)]);
            assert!((total(&out.flows, &c) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unbalanced_shapes_and_dual_feasibility() {
        // 3 sources, 4 sinks, hand-checkable costs.
        let cm = [[4.0, 1.0, 3.0, 2.0], [2.0, 5.0, 1.0, 4.0], [3.0, 2.0, 2.0, 1.0]];
        let c = |i: usize, j: usize| cm[i][j];
        let a = [0.3, 0.3, 0.4];
        let b = [0.25, 0.25, 0.25, 0.25];
        for rule in [PivotRule::Bland, PivotRule::BlockSearch] {
            let out = solve(&a, &b, &c, 5.0, rule);
            for (i, ai) in a.iter().enumerate() {
                let row: f64 = out.flows.iter().filter(|f| f.0 == i).map(|f| f.2).sum();
                assert!((row - ai).abs() < 1e-12);
            }
            for (j, bj) in b.iter().enumerate() {
                let col: f64 = out.flows.iter().filter(|f| f.1 == j).map(|f| f.2).sum();
                assert!((col - bj).abs() < 1e-12);
            }
            for i in 0..3 {
                for j in 0..4 {
                    assert!(c(i, j) + out.pi_source[i] - out.pi_target[j] >= -1e-9);
                }
            }
            let dual: f64 = (0..4).map(|j| out.pi_target[j] * b[j]).sum::<f64>()
                - (0..3).map(|i| out.pi_source[i] * a[i]).sum::<f64>();
            assert!((dual - total(&out.flows, &c)).abs() < 1e-9);
        }
    }
}
