//! Primal network simplex for the transportation problem, with a strongly
//! feasible spanning tree kept between solves so that repeated solves with
//! new costs and fixed masses start from the previous optimal basis.

const TREE: i8 = 0;
const LOWER: i8 = 1;
const UP: i8 = 1;
const DOWN: i8 = -1;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct TransportSimplex {
    n: usize,
    m: usize,
    node_num: usize,
    root: usize,
    search_arcs: usize,
    // arcs: 0..n*m real, then one artificial arc per node
    source: Vec<usize>,
    target: Vec<usize>,
    cost: Vec<f64>,
    flow: Vec<f64>,
    state: Vec<i8>,
    // spanning tree
    parent: Vec<usize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    pi: Vec<f64>,
    dirty_revs: Vec<usize>,
    block_size: usize,
    next_arc: usize,
    // pivot scratch
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: f64,
}

impl TransportSimplex {
    /// Builds the initial artificial basis for supplies `mu1` and demands `mu2`.
    pub fn new(mu1: &[f64], mu2: &[f64]) -> Self {
        let (n, m) = (mu1.len(), mu2.len());
        let node_num = n + m;
        let root = node_num;
        let search_arcs = n * m;
        let all_arcs = search_arcs + node_num;
        let mut s = TransportSimplex {
            n,
            m,
            node_num,
            root,
            search_arcs,
            source: Vec::with_capacity(all_arcs),
            target: Vec::with_capacity(all_arcs),
            cost: vec![0.0; all_arcs],
            flow: vec![0.0; all_arcs],
            state: vec![LOWER; all_arcs],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![0; node_num + 1],
            last_succ: vec![0; node_num + 1],
            pred_dir: vec![0; node_num + 1],
            pi: vec![0.0; node_num + 1],
            dirty_revs: Vec::new(),
            block_size: ((search_arcs as f64).sqrt().ceil() as usize).max(10),
            next_arc: 0,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0.0,
        };
        for i in 0..n {
            for j in 0..m {
                s.source.push(i);
                s.target.push(n + j);
            }
        }
        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = root - 1;
        s.parent[root] = NONE;
        s.pred[root] = NONE;
        for u in 0..node_num {
            let e = search_arcs + u;
            let supply = if u < n { mu1[u] } else { -mu2[u - n] };
            s.parent[u] = root;
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.succ_num[u] = 1;
            s.last_succ[u] = u;
            s.state[e] = TREE;
            if supply >= 0.0 {
                s.pred_dir[u] = UP;
                s.source.push(u);
                s.target.push(root);
                s.flow[e] = supply;
            } else {
                s.pred_dir[u] = DOWN;
                s.source.push(root);
                s.target.push(u);
                s.flow[e] = -supply;
            }
        }
        s
    }

    /// Solves `min <cost, x>` over the transport polytope; `cost` is n x m
    /// row-major. Returns the flow on the real arcs, row-major.
    pub fn solve(&mut self, cost: &[f64]) -> Vec<f64> {
        assert_eq!(cost.len(), self.search_arcs);
        let lo = cost.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cost.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
        for (c, &x) in self.cost.iter_mut().zip(cost) {
            *c = x - lo;
        }
        let span = hi - lo;
        let art = (span + 1.0) * (self.node_num as f64 + 1.0);
        for u in 0..self.node_num {
            let e = self.search_arcs + u;
            self.cost[e] = if self.source[e] == self.root { art } else { 0.0 };
        }
        self.recompute_potentials();
        let tol = 1e-12 * (span + 1.0);
        while self.find_entering_arc(tol) {
            self.find_join_node();
            let change = self.find_leaving_arc();
            self.change_flow(change);
            if change {
                self.update_tree_structure();
                self.update_potential();
            }
        }
        self.flow[..self.search_arcs].iter().map(|&f| f.max(0.0)).collect()
    }

    /// Potentials making every tree arc tight, walking the thread from the root.
    fn recompute_potentials(&mut self) {
        self.pi[self.root] = 0.0;
        let mut u = self.thread[self.root];
        while u != self.root {
            let p = self.parent[u];
            let e = self.pred[u];
            // reduced cost c + pi[s] - pi[t] = 0
            self.pi[u] = if self.pred_dir[u] == UP { self.pi[p] - self.cost[e] } else { self.pi[p] + self.cost[e] };
            u = self.thread[u];
        }
    }

    fn reduced(&self, e: usize) -> f64 {
        f64::from(self.state[e]) * (self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]])
    }

    /// Block search pivot rule.
    fn find_entering_arc(&mut self, tol: f64) -> bool {
        let total = self.search_arcs;
        if total == 0 {
            return false;
        }
        let mut min = -tol;
        let mut cnt = self.block_size;
        let mut found = NONE;
        let mut e = self.next_arc;
        for _ in 0..total {
            let m = self.m;
            let c = f64::from(self.state[e])
                * (self.cost[e] + self.pi[e / m] - self.pi[self.n + e % m]);
            if c < min {
                min = c;
                found = e;
            }
            cnt -= 1;
            e += 1;
            if e == total {
                e = 0;
            }
            if cnt == 0 {
                if found != NONE {
                    break;
                }
                cnt = self.block_size;
            }
        }
        if found == NONE {
            return false;
        }
        debug_assert!(self.reduced(found) < 0.0);
        self.in_arc = found;
        self.next_arc = e;
        true
    }

    fn find_join_node(&mut self) {
        let mut u = self.source[self.in_arc];
        let mut v = self.target[self.in_arc];
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        let (first, second) = if self.state[self.in_arc] == LOWER {
            (self.source[self.in_arc], self.target[self.in_arc])
        } else {
            (self.target[self.in_arc], self.source[self.in_arc])
        };
        self.delta = f64::INFINITY;
        let mut result = 0;
        let mut u = first;
        while u != self.join {
            let e = self.pred[u];
            if self.pred_dir[u] == UP {
                let d = self.flow[e];
                if d < self.delta {
                    self.delta = d;
                    self.u_out = u;
                    result = 1;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            let e = self.pred[u];
            if self.pred_dir[u] == DOWN {
                let d = self.flow[e];
                if d <= self.delta {
                    self.delta = d;
                    self.u_out = u;
                    result = 2;
                }
            }
            u = self.parent[u];
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0
    }

    fn change_flow(&mut self, change: bool) {
        let delta = self.delta.max(0.0);
        if delta > 0.0 {
            let val = f64::from(self.state[self.in_arc]) * delta;
            self.flow[self.in_arc] += val;
            let mut u = self.source[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= f64::from(self.pred_dir[u]) * val;
                u = self.parent[u];
            }
            let mut u = self.target[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += f64::from(self.pred_dir[u]) * val;
                u = self.parent[u];
            }
        }
        if change {
            self.state[self.in_arc] = TREE;
            let out = self.pred[self.u_out];
            self.flow[out] = 0.0;
            self.state[out] = LOWER;
        } else {
            self.state[self.in_arc] = -self.state[self.in_arc];
        }
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;
        let in_arc = self.in_arc;
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { UP } else { DOWN };
            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue =
                if old_rev_thread == v_in { self.thread[old_last_succ] } else { self.thread[v_in] };
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }
            for i in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[i];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc: isize = 0;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc += self.succ_num[u] as isize - self.succ_num[p] as isize;
                self.succ_num[u] = tmp_sc as usize;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { UP } else { DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let u_in = self.u_in;
        let sigma = self.pi[self.v_in]
            - self.pi[u_in]
            - f64::from(self.pred_dir[u_in]) * self.cost[self.pred[u_in]];
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    /// Largest violation of dual feasibility over the real arcs, for tests.
    #[cfg(test)]
    pub fn max_dual_violation(&self) -> f64 {
        (0..self.search_arcs)
            .map(|e| -(self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]]))
            .fold(0.0, f64::max)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn marginals(flow: &[f64], n: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
        let mut r = vec![0.0; n];
        let mut c = vec![0.0; m];
        for i in 0..n {
            for j in 0..m {
                r[i] += flow[i * m + j];
                c[j] += flow[i * m + j];
            }
        }
        (r, c)
    }

    #[test]
    fn two_by_two_prefers_diagonal() {
        let mut s = TransportSimplex::new(&[0.5, 0.5], &[0.5, 0.5]);
        let x = s.solve(&[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(x, vec![0.5, 0.0, 0.0, 0.5]);
        let x = s.solve(&[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(x, vec![0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn random_instances_are_primal_dual_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..9);
            let m = rng.gen_range(1..9);
            let mut mu1: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let mut mu2: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
            let s1: f64 = mu1.iter().sum();
            let s2: f64 = mu2.iter().sum();
            mu1.iter_mut().for_each(|x| *x /= s1);
            mu2.iter_mut().for_each(|x| *x /= s2);
            let mut simplex = TransportSimplex::new(&mu1, &mu2);
            for _ in 0..3 {
                let cost: Vec<f64> = (0..n * m).map(|_| rng.gen_range(-2.0..5.0)).collect();
                let x = simplex.solve(&cost);
                let (r, c) = marginals(&x, n, m);
                for (a, b) in r.iter().zip(&mu1) {
                    assert!((a - b).abs() < 1e-12);
                }
                for (a, b) in c.iter().zip(&mu2) {
                    assert!((a - b).abs() < 1e-12);
                }
                assert!(simplex.max_dual_violation() < 1e-9);
            }
        }
    }
}
