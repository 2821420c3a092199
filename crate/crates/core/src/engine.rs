//! Integer max-flow core.
//!
//! Everything outside this module speaks rationals. Each solve scales its
//! bounds by the common denominator to integers, runs Edmonds-Karp (BFS
//! shortest augmenting paths, adjacency scanned in arc insertion order, so
//! results are deterministic), and unscales. Arithmetic runs in i128 when a
//! conservative magnitude bound allows, BigInt otherwise; both paths compute
//! identical flows.

use crate::rational::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

/// A directed arc with flow bounds. Lower bounds may be negative in
/// circulation problems; capacities must satisfy `lower <= upper`.
#[derive(Debug, Clone)]
pub(crate) struct ArcDef {
    pub from: usize,
    pub to: usize,
    pub lower: Rat,
    pub upper: Rat,
}

pub(crate) struct CircOutcome {
    pub feasible: bool,
    /// Per-arc flows; meaningful only when feasible.
    pub flows: Vec<Rat>,
    /// Unmet lower-bound mass; zero iff feasible.
    pub deficit: Rat,
    /// Real nodes on the source side of the transformed min cut; meaningful
    /// only when infeasible.
    pub cut: Vec<bool>,
}

pub(crate) struct FlowOutcome {
    pub value: Rat,
    pub flows: Vec<Rat>,
    /// Nodes reachable from the source in the final residual network.
    pub reach_src: Vec<bool>,
    /// Nodes with a residual path to the sink.
    pub reach_sink: Vec<bool>,
}

trait Flowable: Clone + Ord {
    fn nil() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn from_big(b: &BigInt) -> Self;
    fn to_big(&self) -> BigInt;
}

impl Flowable for i128 {
    fn nil() -> Self {
        0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn from_big(b: &BigInt) -> Self {
        b.to_i128().expect("magnitude guard admitted an oversized bound")
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Flowable for BigInt {
    fn nil() -> Self {
        BigInt::zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn from_big(b: &BigInt) -> Self {
        b.clone()
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

struct Graph<T> {
    head: Vec<u32>,
    res: Vec<T>,
    adj: Vec<Vec<u32>>,
}

impl<T: Flowable> Graph<T> {
    fn new(n: usize) -> Self {
        Graph { head: Vec::new(), res: Vec::new(), adj: vec![Vec::new(); n] }
    }

    /// Adds the arc pair for u->v with the given capacity; returns the forward id.
    fn add(&mut self, u: usize, v: usize, cap: T) -> usize {
        let id = self.res.len();
        self.res.push(cap);
        self.res.push(T::nil());
        self.head.push(v as u32);
        self.head.push(u as u32);
        self.adj[u].push(id as u32);
        self.adj[v].push(id as u32 + 1);
        id
    }

    fn augment(&mut self, s: usize, t: usize) -> Option<T> {
        let n = self.adj.len();
        let mut parent: Vec<u32> = vec![u32::MAX; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(s);
        'bfs: while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.head[a as usize] as usize;
                if !seen[v] && self.res[a as usize] > T::nil() {
                    seen[v] = true;
                    parent[v] = a;
                    if v == t {
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
        }
        if !seen[t] {
            return None;
        }
        let mut bottleneck: Option<T> = None;
        let mut v = t;
        while v != s {
            let a = parent[v] as usize;
            let r = self.res[a].clone();
            bottleneck = Some(match bottleneck {
                None => r,
                Some(b) => b.min(r),
            });
            v = self.head[a ^ 1] as usize;
        }
        let b = bottleneck.expect("augmenting path has at least one arc");
        let mut v = t;
        while v != s {
            let a = parent[v] as usize;
            self.res[a] = self.res[a].sub(&b);
            self.res[a ^ 1] = self.res[a ^ 1].add(&b);
            v = self.head[a ^ 1] as usize;
        }
        Some(b)
    }

    fn max_flow(&mut self, s: usize, t: usize) -> T {
        let mut total = T::nil();
        while let Some(b) = self.augment(s, t) {
            total = total.add(&b);
        }
        total
    }

    fn reach_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.head[a as usize] as usize;
                if !seen[v] && self.res[a as usize] > T::nil() {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    fn reach_to(&self, t: usize) -> Vec<bool> {
        // Reverse traversal: follow arcs with positive residual backwards.
        let n = self.adj.len();
        let mut radj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for a in 0..self.res.len() {
            if self.res[a] > T::nil() {
                radj[self.head[a] as usize].push(self.head[a ^ 1]);
            }
        }
        let mut seen = vec![false; n];
        seen[t] = true;
        let mut queue = std::collections::VecDeque::from([t]);
        while let Some(u) = queue.pop_front() {
            for &v in &radj[u] {
                let v = v as usize;
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

fn common_denominator<'a>(rats: impl Iterator<Item = &'a Rat>) -> BigInt {
    let mut lcm = BigInt::from(1u32);
    for r in rats {
        lcm = lcm.lcm(r.denom());
    }
    lcm
}

fn scaled(r: &Rat, lcm: &BigInt) -> BigInt {
    r.numer() * (lcm / r.denom())
}

/// Whether all scaled magnitudes fit i128 with room for every residual sum.
fn fits_i128(values: &[BigInt]) -> bool {
    let total: BigInt = values.iter().map(|v| v.abs()).sum();
    total < BigInt::from(i128::MAX >> 4)
}

fn unscale(v: &BigInt, lcm: &BigInt) -> Rat {
    Rat::new(v.clone(), lcm.clone())
}

/// Feasible circulation with lower bounds: every node conserves flow exactly.
///
/// Standard transformation: each arc contributes excess `lower` at its head and
/// `-lower` at its tail; a super source feeds positive excesses, a super sink
/// drains negative ones; the circulation is feasible iff the super flow
/// saturates all excess.
pub(crate) fn feasible_circulation(n: usize, arcs: &[ArcDef]) -> CircOutcome {
    for a in arcs {
        assert!(a.lower <= a.upper, "arc bounds crossed: {:?}", a);
    }
    let lcm = common_denominator(arcs.iter().flat_map(|a| [&a.lower, &a.upper]));
    let l: Vec<BigInt> = arcs.iter().map(|a| scaled(&a.lower, &lcm)).collect();
    let u: Vec<BigInt> = arcs.iter().map(|a| scaled(&a.upper, &lcm)).collect();
    let all: Vec<BigInt> = l.iter().chain(&u).cloned().collect();
    let (feasible, flows, deficit, cut) = if fits_i128(&all) {
        run_circulation::<i128>(n, arcs, &l, &u)
    } else {
        run_circulation::<BigInt>(n, arcs, &l, &u)
    };
    CircOutcome {
        feasible,
        flows: flows.iter().map(|f| unscale(f, &lcm)).collect(),
        deficit: unscale(&deficit, &lcm),
        cut,
    }
}

fn run_circulation<T: Flowable>(
    n: usize,
    arcs: &[ArcDef],
    l: &[BigInt],
    u: &[BigInt],
) -> (bool, Vec<BigInt>, BigInt, Vec<bool>) {
    let sp = n;
    let tp = n + 1;
    let mut g: Graph<T> = Graph::new(n + 2);
    let ids: Vec<usize> = arcs
        .iter()
        .enumerate()
        .map(|(k, a)| g.add(a.from, a.to, T::from_big(&(&u[k] - &l[k]))))
        .collect();
    let mut excess = vec![BigInt::zero(); n];
    for (k, a) in arcs.iter().enumerate() {
        excess[a.to] += &l[k];
        excess[a.from] -= &l[k];
    }
    let mut needed = BigInt::zero();
    for (w, ex) in excess.iter().enumerate() {
        if ex.is_positive() {
            needed += ex;
            g.add(sp, w, T::from_big(ex));
        } else if ex.is_negative() {
            g.add(w, tp, T::from_big(&-ex));
        }
    }
    let pushed = g.max_flow(sp, tp).to_big();
    let feasible = pushed == needed;
    let flows: Vec<BigInt> = ids
        .iter()
        .enumerate()
        .map(|(k, &id)| &u[k] - g.res[id].to_big())
        .collect();
    let cut: Vec<bool> = g.reach_from(sp)[..n].to_vec();
    (feasible, flows, needed - pushed, cut)
}

/// Plain max-flow: arcs are (from, to, capacity), all lower bounds zero.
pub(crate) fn max_flow_simple(
    n: usize,
    arcs: &[(usize, usize, Rat)],
    s: usize,
    t: usize,
) -> FlowOutcome {
    let lcm = common_denominator(arcs.iter().map(|(_, _, c)| c));
    let caps: Vec<BigInt> = arcs.iter().map(|(_, _, c)| scaled(c, &lcm)).collect();
    let (value, flows, reach_src, reach_sink) = if fits_i128(&caps) {
        run_max_flow::<i128>(n, arcs, &caps, s, t)
    } else {
        run_max_flow::<BigInt>(n, arcs, &caps, s, t)
    };
    FlowOutcome {
        value: unscale(&value, &lcm),
        flows: flows.iter().map(|f| unscale(f, &lcm)).collect(),
        reach_src,
        reach_sink,
    }
}

fn run_max_flow<T: Flowable>(
    n: usize,
    arcs: &[(usize, usize, Rat)],
    caps: &[BigInt],
    s: usize,
    t: usize,
) -> (BigInt, Vec<BigInt>, Vec<bool>, Vec<bool>) {
    let mut g: Graph<T> = Graph::new(n);
    let ids: Vec<usize> = arcs
        .iter()
        .enumerate()
        .map(|(k, &(u, v, _))| g.add(u, v, T::from_big(&caps[k])))
        .collect();
    let value = g.max_flow(s, t).to_big();
    let flows: Vec<BigInt> = ids.iter().enumerate().map(|(k, &id)| &caps[k] - g.res[id].to_big()).collect();
    (value, flows, g.reach_from(s), g.reach_to(t))
}

/// Max-flow subject to nonnegative lower bounds on arcs. Returns `None` when
/// the lower bounds admit no feasible flow at all.
pub(crate) fn max_flow_lower_bounded(
    n: usize,
    arcs: &[ArcDef],
    s: usize,
    t: usize,
) -> Option<FlowOutcome> {
    for a in arcs {
        assert!(!a.lower.is_negative() && a.lower <= a.upper);
    }
    let lcm = common_denominator(arcs.iter().flat_map(|a| [&a.lower, &a.upper]));
    let l: Vec<BigInt> = arcs.iter().map(|a| scaled(&a.lower, &lcm)).collect();
    let u: Vec<BigInt> = arcs.iter().map(|a| scaled(&a.upper, &lcm)).collect();
    let all: Vec<BigInt> = l.iter().chain(&u).cloned().collect();
    let out = if fits_i128(&all) {
        run_bounded_max::<i128>(n, arcs, &l, &u, s, t)
    } else {
        run_bounded_max::<BigInt>(n, arcs, &l, &u, s, t)
    };
    out.map(|(value, flows, reach_src, reach_sink)| FlowOutcome {
        value: unscale(&value, &lcm),
        flows: flows.iter().map(|f| unscale(f, &lcm)).collect(),
        reach_src,
        reach_sink,
    })
}

#[allow(clippy::type_complexity)]
fn run_bounded_max<T: Flowable>(
    n: usize,
    arcs: &[ArcDef],
    l: &[BigInt],
    u: &[BigInt],
    s: usize,
    t: usize,
) -> Option<(BigInt, Vec<BigInt>, Vec<bool>, Vec<bool>)> {
    let sp = n;
    let tp = n + 1;
    let mut g: Graph<T> = Graph::new(n + 2);
    let ids: Vec<usize> = arcs
        .iter()
        .enumerate()
        .map(|(k, a)| g.add(a.from, a.to, T::from_big(&(&u[k] - &l[k]))))
        .collect();
    let total_upper: BigInt = u.iter().sum();
    let return_id = g.add(t, s, T::from_big(&total_upper));
    let mut excess = vec![BigInt::zero(); n];
    for (k, a) in arcs.iter().enumerate() {
        excess[a.to] += &l[k];
        excess[a.from] -= &l[k];
    }
    let mut needed = BigInt::zero();
    for (w, ex) in excess.iter().enumerate() {
        if ex.is_positive() {
            needed += ex;
            g.add(sp, w, T::from_big(ex));
        } else if ex.is_negative() {
            g.add(w, tp, T::from_big(&-ex));
        }
    }
    if g.max_flow(sp, tp).to_big() != needed {
        return None;
    }
    // Lower bounds are met; cancel the return arc and push the rest s -> t.
    g.res[return_id] = T::nil();
    g.res[return_id ^ 1] = T::nil();
    g.max_flow(s, t);
    let flows: Vec<BigInt> = ids.iter().enumerate().map(|(k, &id)| &u[k] - g.res[id].to_big()).collect();
    let mut value = BigInt::zero();
    for (k, a) in arcs.iter().enumerate() {
        if a.to == t {
            value += &flows[k];
        }
        if a.from == t {
            value -= &flows[k];
        }
    }
    Some((value, flows, g.reach_from(s), g.reach_to(t)))
}
