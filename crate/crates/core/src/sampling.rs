//! Random sampling over the set of maximum flows.
//!
//! Edge-agent audits quantify over every maximum flow; sampling gives the
//! probabilistic side of that coin. Starting from the canonical maximum
//! flow, each draw pushes along a random residual cycle, which preserves
//! both feasibility and value. Fractional pushes reach interior points of
//! the optimal face, not just its vertices.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flownet::max_flow;
use crate::problem::{check_feasible, Flow, Problem};
use crate::rational::{rat, rint, Rat};

struct RArc {
    to: usize,
    /// Edge index and push direction; `None` on source and sink arcs, whose
    /// flow is implied by the incident edges.
    edge: Option<(usize, i8)>,
    head: Rat,
}

/// Draws `n` maximum flows, deterministically in `seed`. A problem with a
/// unique maximum flow yields `n` copies of it.
pub fn sample_max_flows(p: &Problem, n: usize, seed: u64) -> Vec<Flow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (base, _) = max_flow(p);
    let mut z = base.z;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        for _attempt in 0..12 {
            if random_cycle_push(p, &mut z, &mut rng) {
                break;
            }
        }
        let f = Flow { z: z.clone() };
        debug_assert!(check_feasible(p, &f).is_ok());
        out.push(f);
    }
    out
}

fn residual(p: &Problem, z: &[Rat]) -> Vec<Vec<RArc>> {
    let ns = p.n_sup();
    let nd = p.n_dem();
    let src = ns + nd;
    let snk = src + 1;
    let mut x = vec![Rat::zero(); ns];
    let mut y = vec![Rat::zero(); nd];
    for (e, ze) in z.iter().enumerate() {
        let (i, j) = p.ends(e);
        x[i] += ze;
        y[j] += ze;
    }
    let mut adj: Vec<Vec<RArc>> = (0..snk + 1).map(|_| Vec::new()).collect();
    let arc = |adj: &mut Vec<Vec<RArc>>, from: usize, to: usize, edge, head: Rat| {
        if head.is_positive() {
            adj[from].push(RArc { to, edge, head });
        }
    };
    for (i, xi) in x.iter().enumerate() {
        arc(&mut adj, src, i, None, p.sup_peak(i) - xi);
        arc(&mut adj, i, src, None, xi.clone());
    }
    for (e, ze) in z.iter().enumerate() {
        let (i, j) = p.ends(e);
        arc(&mut adj, i, ns + j, Some((e, 1)), p.cap_bound(e) - ze);
        arc(&mut adj, ns + j, i, Some((e, -1)), ze.clone());
    }
    for (j, yj) in y.iter().enumerate() {
        arc(&mut adj, ns + j, snk, None, p.dem_peak(j) - yj);
        arc(&mut adj, snk, ns + j, None, yj.clone());
    }
    adj
}

fn inverse(edge: &Option<(usize, i8)>) -> Option<(usize, i8)> {
    edge.map(|(e, d)| (e, -d))
}

/// One random walk over open residual arcs until a node repeats; pushing a
/// random fraction of the bottleneck around that cycle. Immediate arc
/// reversals are banned, and a cycle touching no edge arc is discarded as a
/// no-op. Returns whether a push happened.
fn random_cycle_push(p: &Problem, z: &mut [Rat], rng: &mut ChaCha8Rng) -> bool {
    let adj = residual(p, z);
    let n = adj.len();
    let starts: Vec<usize> = (0..n).filter(|&u| !adj[u].is_empty()).collect();
    if starts.is_empty() {
        return false;
    }
    let mut cur = starts[rng.random_range(0..starts.len())];
    let mut on_path = vec![usize::MAX; n];
    let mut path: Vec<(usize, usize)> = Vec::new();
    let mut prev: Option<(usize, Option<(usize, i8)>)> = None; // (came from, arc edge)
    let arc_total: usize = adj.iter().map(|a| a.len()).sum();
    for _ in 0..4 * (n + arc_total) {
        let opts: Vec<usize> = (0..adj[cur].len())
            .filter(|&k| {
                let a = &adj[cur][k];
                match &prev {
                    Some((from, edge)) => !(a.to == *from && a.edge == inverse(edge)),
                    None => true,
                }
            })
            .collect();
        if opts.is_empty() {
            return false;
        }
        let k = opts[rng.random_range(0..opts.len())];
        let to = adj[cur][k].to;
        on_path[cur] = path.len();
        path.push((cur, k));
        if on_path[to] != usize::MAX {
            let cycle = &path[on_path[to]..];
            if cycle.iter().all(|&(u, k)| adj[u][k].edge.is_none()) {
                return false;
            }
            let mut bottleneck = adj[cycle[0].0][cycle[0].1].head.clone();
            for &(u, k) in &cycle[1..] {
                if adj[u][k].head < bottleneck {
                    bottleneck = adj[u][k].head.clone();
                }
            }
            let frac = match rng.random_range(0..3u8) {
                0 => rint(1),
                1 => rat(1, 2),
                _ => rat(1, 3),
            };
            let delta = bottleneck * frac;
            for &(u, k) in cycle {
                if let Some((e, d)) = adj[u][k].edge {
                    if d > 0 {
                        z[e] += &delta;
                    } else {
                        z[e] -= &delta;
                    }
                }
            }
            return true;
        }
        prev = Some((cur, adj[cur][k].edge));
        cur = to;
    }
    false
}
