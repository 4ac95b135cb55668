//! Exact transportation simplex for discrete optimal transport.
//!
//! The basis is a spanning tree on the bipartite graph of sources and sinks.
//! Pricing scans the cost matrix in blocks; after each pivot only the subtree cut
//! off by the leaving arc is re-hung and has its potentials shifted.

use crate::error::{invalid, Result};
use crate::measure::EmpiricalMeasure;
use crate::scalar::LpScalar;

/// An optimal coupling between two discrete measures.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTransportPlan<S> {
    /// `(source, target, mass)` for every arc carrying positive mass.
    pub flows: Vec<(usize, usize, S)>,
    /// `Σ π_ij c_ij`.
    pub cost: S,
    pub pivots: usize,
}

impl<S: LpScalar> DiscreteTransportPlan<S> {
    /// Row sums of the plan.
    pub fn source_marginal(&self, m: usize) -> Vec<S> {
        let mut out = vec![S::zero(); m];
        for (i, _, f) in &self.flows {
            out[*i] = out[*i].clone() + f.clone();
        }
        out
    }

    /// Column sums of the plan.
    pub fn target_marginal(&self, n: usize) -> Vec<S> {
        let mut out = vec![S::zero(); n];
        for (_, j, f) in &self.flows {
            out[*j] = out[*j].clone() + f.clone();
        }
        out
    }
}

fn half_squared_distance<S: LpScalar>(x: &[S], y: &[S]) -> S {
    let mut acc = S::zero();
    for (a, b) in x.iter().zip(y) {
        let d = a.clone() - b.clone();
        acc = acc + d.clone() * d;
    }
    acc * S::half()
}

/// Optimal plan between two empirical measures for the cost `½|x − y|²`.
///
/// Only `cost_exponent == 2` is supported.
pub fn lp_oracle<S: LpScalar>(
    source: &EmpiricalMeasure<S>,
    target: &EmpiricalMeasure<S>,
    cost_exponent: u32,
) -> Result<DiscreteTransportPlan<S>> {
    if cost_exponent != 2 {
        return invalid(format!("cost exponent {cost_exponent} is not supported, use 2"));
    }
    if source.dim() != target.dim() {
        return invalid("source and target live in different dimensions");
    }
    let n = target.len();
    let costs: Vec<S> = source
        .points()
        .iter()
        .flat_map(|x| target.points().iter().map(move |y| half_squared_distance(x, y)))
        .collect();
    debug_assert_eq!(costs.len(), source.len() * n);
    transport_simplex(source.masses(), target.masses(), &costs)
}

struct Arc<S> {
    source: usize,
    sink: usize,
    flow: S,
}

struct Tree<S> {
    m: usize,
    arcs: Vec<Arc<S>>,
    /// Node adjacency as `(neighbor, arc id)`. Sinks are numbered `m + j`.
    adjacency: Vec<Vec<(usize, usize)>>,
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    potential: Vec<S>,
    mark: Vec<u64>,
    stamp: u64,
}

impl<S: LpScalar> Tree<S> {
    fn arc_cost(&self, costs: &[S], n: usize, arc: usize) -> S {
        let a = &self.arcs[arc];
        costs[a.source * n + a.sink].clone()
    }

    /// Re-hangs the component containing `root` below `parent_link` and recomputes
    /// depths; potentials are shifted separately.
    fn hang(&mut self, root: usize, parent_link: Option<(usize, usize)>, root_depth: usize) {
        self.parent[root] = parent_link;
        self.depth[root] = root_depth;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for idx in 0..self.adjacency[v].len() {
                let (w, arc) = self.adjacency[v][idx];
                if self.parent[v].is_some_and(|(p, _)| p == w) {
                    continue;
                }
                self.parent[w] = Some((v, arc));
                self.depth[w] = self.depth[v] + 1;
                stack.push(w);
            }
        }
    }

    fn compute_potentials(&mut self, costs: &[S], n: usize) {
        let m = self.m;
        self.potential[0] = S::zero();
        let mut stack = vec![0usize];
        let mut seen = vec![false; self.adjacency.len()];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for idx in 0..self.adjacency[v].len() {
                let (w, arc) = self.adjacency[v][idx];
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                let c = self.arc_cost(costs, n, arc);
                // u_i + v_j = c_ij on basic arcs.
                self.potential[w] = c - self.potential[v].clone();
                stack.push(w);
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "basis is not spanning (m = {m})");
    }

    /// Arcs on the tree path from `from` to `to`, in order.
    fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut head = Vec::new();
        let mut tail = Vec::new();
        let (mut a, mut b) = (from, to);
        while self.depth[a] > self.depth[b] {
            let (p, arc) = self.parent[a].expect("non-root node has a parent");
            head.push(arc);
            a = p;
        }
        while self.depth[b] > self.depth[a] {
            let (p, arc) = self.parent[b].expect("non-root node has a parent");
            tail.push(arc);
            b = p;
        }
        while a != b {
            let (pa, arc_a) = self.parent[a].expect("non-root node has a parent");
            let (pb, arc_b) = self.parent[b].expect("non-root node has a parent");
            head.push(arc_a);
            tail.push(arc_b);
            a = pa;
            b = pb;
        }
        head.extend(tail.into_iter().rev());
        head
    }

    /// Explores the components of `x` and `y` in lockstep and returns the nodes of
    /// whichever finishes first, together with the mark its nodes carry.
    fn smaller_component(&mut self, x: usize, y: usize) -> (Vec<usize>, u64) {
        self.stamp += 2;
        let marks = [self.stamp, self.stamp + 1];
        let mut stacks = [vec![x], vec![y]];
        let mut seen = [vec![x], vec![y]];
        self.mark[x] = marks[0];
        self.mark[y] = marks[1];
        loop {
            for side in 0..2 {
                let Some(v) = stacks[side].pop() else {
                    return (std::mem::take(&mut seen[side]), marks[side]);
                };
                for &(w, _) in &self.adjacency[v] {
                    if self.mark[w] != marks[side] {
                        self.mark[w] = marks[side];
                        stacks[side].push(w);
                        seen[side].push(w);
                    }
                }
            }
        }
    }

    fn remove_adjacency(&mut self, node: usize, arc: usize) {
        let list = &mut self.adjacency[node];
        let pos = list.iter().position(|&(_, a)| a == arc).expect("arc is in the tree");
        list.swap_remove(pos);
    }
}

/// Approximate column duals `v` from subgradient ascent on
/// `Σ_i a_i min_j (c_ij − v_j) + Σ_j b_j v_j`. Sorting cells by `c_ij − v_j` then gives
/// a starting basis close to optimal.
fn column_shifts<S: LpScalar>(supply: &[S], demand: &[S], costs: &[S]) -> Vec<f64> {
    const ROUNDS: usize = 300;
    let (m, n) = (supply.len(), demand.len());
    let mut v = vec![0.0; n];
    if n == 1 {
        return v;
    }
    let a: Vec<f64> = supply.iter().map(LpScalar::approx).collect();
    let b: Vec<f64> = demand.iter().map(LpScalar::approx).collect();
    let c: Vec<f64> = costs.iter().map(LpScalar::approx).collect();
    let total: f64 = a.iter().sum();
    let spread = c.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if !(total > 0.0 && spread > 0.0) {
        return v;
    }
    let mut load = vec![0.0; n];
    for t in 0..ROUNDS {
        load.iter_mut().for_each(|l| *l = 0.0);
        for i in 0..m {
            let row = &c[i * n..(i + 1) * n];
            let mut best = 0;
            for j in 1..n {
                if row[j] - v[j] < row[best] - v[best] {
                    best = j;
                }
            }
            load[best] += a[i];
        }
        let step = 0.2 * spread / total / (1.0 + t as f64).sqrt();
        for j in 0..n {
            v[j] += step * (b[j] - load[j]);
        }
    }
    v
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Minimum-cost transportation between `supply` and `demand` with the row-major
/// `costs` matrix (`supply.len() × demand.len()`).
pub fn transport_simplex<S: LpScalar>(
    supply: &[S],
    demand: &[S],
    costs: &[S],
) -> Result<DiscreteTransportPlan<S>> {
    let m = supply.len();
    let n = demand.len();
    if m == 0 || n == 0 {
        return invalid("transport problem needs at least one source and one target");
    }
    if costs.len() != m * n {
        return invalid("cost matrix has the wrong size");
    }
    if supply.iter().chain(demand).any(|v| *v < S::zero()) {
        return invalid("masses must be nonnegative");
    }
    let total_supply = supply.iter().fold(S::zero(), |a, b| a + b.clone());
    let total_demand = demand.iter().fold(S::zero(), |a, b| a + b.clone());
    let tol = S::balance_tolerance(&total_supply);
    if (total_supply.clone() - total_demand.clone()).abs() > tol {
        return invalid(format!(
            "total supply {total_supply:?} differs from total demand {total_demand:?}"
        ));
    }

    // Least-cost initial basis on column-shifted costs, completed to a spanning tree
    // with zero-flow arcs.
    let shift = column_shifts(supply, demand, costs);
    let key: Vec<f64> = (0..m * n).map(|c| costs[c].approx() - shift[c % n]).collect();
    let mut order: Vec<usize> = (0..m * n).collect();
    order.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
    let mut rs = supply.to_vec();
    let mut rd = demand.to_vec();
    let mut uf: Vec<usize> = (0..m + n).collect();
    let mut arcs = Vec::with_capacity(m + n - 1);
    for &cell in &order {
        let (i, j) = (cell / n, cell % n);
        if !(rs[i] > S::zero() && rd[j] > S::zero()) {
            continue;
        }
        let f = if rs[i] <= rd[j] {
            let f = rs[i].clone();
            rd[j] = rd[j].clone() - f.clone();
            rs[i] = S::zero();
            f
        } else {
            let f = rd[j].clone();
            rs[i] = rs[i].clone() - f.clone();
            rd[j] = S::zero();
            f
        };
        let (ri, rj) = (find(&mut uf, i), find(&mut uf, m + j));
        debug_assert_ne!(ri, rj, "least-cost allocation is acyclic");
        uf[ri] = rj;
        arcs.push(Arc { source: i, sink: j, flow: f });
    }
    for &cell in &order {
        if arcs.len() == m + n - 1 {
            break;
        }
        let (i, j) = (cell / n, cell % n);
        let (ri, rj) = (find(&mut uf, i), find(&mut uf, m + j));
        if ri != rj {
            uf[ri] = rj;
            arcs.push(Arc { source: i, sink: j, flow: S::zero() });
        }
    }

    let mut adjacency = vec![Vec::new(); m + n];
    for (id, a) in arcs.iter().enumerate() {
        adjacency[a.source].push((m + a.sink, id));
        adjacency[m + a.sink].push((a.source, id));
    }
    let mut tree = Tree {
        m,
        arcs,
        adjacency,
        parent: vec![None; m + n],
        depth: vec![0; m + n],
        potential: vec![S::zero(); m + n],
        mark: vec![0; m + n],
        stamp: 0,
    };
    tree.hang(0, None, 0);
    tree.compute_potentials(costs, n);

    let max_cost = costs.iter().fold(S::zero(), |acc, c| {
        let a = c.abs();
        if a > acc {
            a
        } else {
            acc
        }
    });
    let eps = S::pivot_tolerance(&max_cost);
    let total = m * n;
    let block = ((total as f64).sqrt().ceil() as usize).max(n).min(total);
    let mut cursor = 0usize;
    let mut pivots = 0usize;
    let mut degenerate_run = 0usize;
    let bland_after = 50 * (m + n);

    let reduced = |tree: &Tree<S>, cell: usize| -> S {
        let (i, j) = (cell / n, cell % n);
        costs[cell].clone() - tree.potential[i].clone() - tree.potential[m + j].clone()
    };

    loop {
        let bland = degenerate_run > bland_after;
        let threshold = -eps.clone();
        let mut entering: Option<(usize, S)> = None;
        if bland {
            for cell in 0..total {
                let r = reduced(&tree, cell);
                if r < threshold {
                    entering = Some((cell, r));
                    break;
                }
            }
        } else {
            let mut scanned = 0;
            while scanned < total {
                let end = (scanned + block).min(total);
                for off in scanned..end {
                    let cell = (cursor + off) % total;
                    let r = reduced(&tree, cell);
                    if r < threshold && entering.as_ref().is_none_or(|(_, best)| r < *best) {
                        entering = Some((cell, r));
                    }
                }
                scanned = end;
                if let Some((cell, _)) = &entering {
                    cursor = (cell + 1) % total;
                    break;
                }
            }
        }
        let Some((cell, r)) = entering else { break };
        let (p, j) = (cell / n, cell % n);
        let q = m + j;

        // Cycle: entering arc (+), then the tree path from the sink back to the source.
        let path = tree.path(q, p);
        let mut leaving: Option<usize> = None;
        for (k, &arc) in path.iter().enumerate() {
            if k % 2 != 0 {
                continue;
            }
            let better = match leaving {
                None => true,
                Some(cur) => {
                    let (f, g) = (&tree.arcs[arc].flow, &tree.arcs[cur].flow);
                    f < g || (bland && f == g && arc < cur)
                }
            };
            if better {
                leaving = Some(arc);
            }
        }
        let leaving = leaving.expect("cycle has a decreasing arc");
        let theta = tree.arcs[leaving].flow.clone();
        if theta.is_zero() {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
            for (k, &arc) in path.iter().enumerate() {
                let f = tree.arcs[arc].flow.clone();
                tree.arcs[arc].flow = if k % 2 == 0 {
                    f - theta.clone()
                } else {
                    f + theta.clone()
                };
            }
        }

        // Cut the leaving arc, then move the smaller of the two pieces.
        let la = &tree.arcs[leaving];
        let (a, b) = (la.source, m + la.sink);
        let child = if tree.parent[a].is_some_and(|(_, arc)| arc == leaving) {
            a
        } else {
            b
        };
        tree.remove_adjacency(a, leaving);
        tree.remove_adjacency(b, leaving);
        tree.parent[child] = None;
        let (moved, marker) = tree.smaller_component(a, b);
        let source_inside = tree.mark[p] == marker;
        let sigma = if source_inside { r } else { -r };
        for &v in &moved {
            let pot = tree.potential[v].clone();
            tree.potential[v] = if v < m {
                pot + sigma.clone()
            } else {
                pot - sigma.clone()
            };
        }

        tree.arcs[leaving] = Arc {
            source: p,
            sink: j,
            flow: if theta.is_zero() { S::zero() } else { theta.clone() },
        };
        tree.adjacency[p].push((q, leaving));
        tree.adjacency[q].push((p, leaving));
        let (inner, outer) = if source_inside { (p, q) } else { (q, p) };
        let d = tree.depth[outer] + 1;
        tree.hang(inner, Some((outer, leaving)), d);
        pivots += 1;
    }

    let mut cost = S::zero();
    let mut flows = Vec::new();
    for a in &tree.arcs {
        if a.flow > S::zero() {
            cost = cost + a.flow.clone() * costs[a.source * n + a.sink].clone();
            flows.push((a.source, a.sink, a.flow.clone()));
        }
    }
    flows.sort_by_key(|f| (f.0, f.1));
    Ok(DiscreteTransportPlan { flows, cost, pivots })
}
