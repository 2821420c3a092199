//! The edge-fair mechanism: the lexicographically optimal maximum flow.
//!
//! Among all maximum flows, edge-fair picks the one whose sorted edge-value
//! vector is lexicographically largest (max-min, then recursively). It works
//! per connected component of the flexible part of the network: repeatedly
//! find the largest uniform bound lambda* every active edge can carry, pin the
//! edges that cannot exceed it, and continue with the rest.

use crate::egalitarian::NodeStep;
use crate::flownet::{decompose_solved, solve_base, Decomposition};
use crate::parametric::{exceeders, max_lambda, PArc};
use crate::problem::{check_feasible, Allocation, Flow, Problem};
use crate::rational::{serde_rat, Rat};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// An edge held at a known value before the per-component rounds start:
/// it crosses the canonical min cut, so every maximum flow agrees on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinnedEdge {
    pub from: String,
    pub to: String,
    #[serde(with = "serde_rat")]
    pub value: Rat,
}

/// A connected component of the flexible subnetwork, as a self-contained
/// bounded-flow problem. Node capacities are the peaks minus flow already
/// pinned outside the component; `total` is the component's share of the
/// maximum flow value, which is the same in every maximum flow.
///
/// Indices in `suppliers`, `demanders`, and `edges` refer to the original
/// problem, in declaration order. `edge_lower` carries the accumulated lower
/// bounds: edges outside the active set are held at exactly their entry.
#[derive(Debug, Clone)]
pub struct Component {
    pub suppliers: Vec<usize>,
    pub demanders: Vec<usize>,
    pub edges: Vec<usize>,
    pub sup_cap: Vec<Rat>,
    pub dem_cap: Vec<Rat>,
    pub sup_fixed: Vec<Rat>,
    pub dem_fixed: Vec<Rat>,
    pub edge_upper: Vec<Rat>,
    pub edge_lower: Vec<Rat>,
    pub total: Rat,
}

/// Cut-crossing pins plus the components of what remains.
pub struct Preprocessed {
    pub pins: Vec<(usize, Rat)>,
    pub components: Vec<Component>,
    pub(crate) decomposition: Decomposition,
}

/// Split a problem into pinned edges and flexible components.
///
/// An edge leaving the smallest min cut's source side is saturated in every
/// maximum flow; an edge entering it carries zero in every maximum flow. Both
/// kinds are pinned up front. The rest, grouped by connectivity, form
/// independent subproblems whose flow totals are invariants of the problem.
pub fn preprocess(p: &Problem) -> Preprocessed {
    let s = solve_base(p);
    let decomposition = decompose_solved(p, &s);
    let mut pin_value: Vec<Option<Rat>> = vec![None; p.n_edges()];
    for (e, pv) in pin_value.iter_mut().enumerate() {
        let (i, j) = p.ends(e);
        let from_in = s.reach_src[s.sup_node(i)];
        let to_in = s.reach_src[s.dem_node(j)];
        if from_in && !to_in {
            *pv = Some(p.cap_bound(e));
        } else if !from_in && to_in {
            *pv = Some(Rat::zero());
        }
    }

    // Union-find over nodes touched by unpinned edges.
    let n = p.n_sup() + p.n_dem();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (e, pv) in pin_value.iter().enumerate() {
        if pv.is_none() {
            let (i, j) = p.ends(e);
            let (a, b) = (find(&mut parent, i), find(&mut parent, p.n_sup() + j));
            parent[a] = b;
        }
    }

    let mut sup_pinned: Vec<Rat> = vec![Rat::zero(); p.n_sup()];
    let mut dem_pinned: Vec<Rat> = vec![Rat::zero(); p.n_dem()];
    let mut pins = Vec::new();
    for (e, pv) in pin_value.iter().enumerate() {
        if let Some(v) = pv {
            let (i, j) = p.ends(e);
            sup_pinned[i] += v;
            dem_pinned[j] += v;
            pins.push((e, v.clone()));
        }
    }

    // Components keyed by root, ordered by first edge.
    let mut roots: Vec<usize> = Vec::new();
    let mut components: Vec<Component> = Vec::new();
    for (e, pv) in pin_value.iter().enumerate() {
        if pv.is_some() {
            continue;
        }
        let (i, _) = p.ends(e);
        let root = find(&mut parent, i);
        let c = match roots.iter().position(|&r| r == root) {
            Some(k) => &mut components[k],
            None => {
                roots.push(root);
                components.push(Component {
                    suppliers: Vec::new(),
                    demanders: Vec::new(),
                    edges: Vec::new(),
                    sup_cap: Vec::new(),
                    dem_cap: Vec::new(),
                    sup_fixed: Vec::new(),
                    dem_fixed: Vec::new(),
                    edge_upper: Vec::new(),
                    edge_lower: Vec::new(),
                    total: Rat::zero(),
                });
                components.last_mut().unwrap()
            }
        };
        let (i, j) = p.ends(e);
        if !c.suppliers.contains(&i) {
            c.suppliers.push(i);
        }
        if !c.demanders.contains(&j) {
            c.demanders.push(j);
        }
        c.edges.push(e);
        c.edge_upper.push(p.cap_bound(e));
        c.edge_lower.push(Rat::zero());
        c.total += &s.flows[s.edge_arc(e)];
    }
    for c in &mut components {
        c.suppliers.sort_unstable();
        c.demanders.sort_unstable();
        c.sup_cap = c.suppliers.iter().map(|&i| p.sup_peak(i).clone() - &sup_pinned[i]).collect();
        c.dem_cap = c.demanders.iter().map(|&j| p.dem_peak(j).clone() - &dem_pinned[j]).collect();
        c.sup_fixed = c.suppliers.iter().map(|&i| sup_pinned[i].clone()).collect();
        c.dem_fixed = c.demanders.iter().map(|&j| dem_pinned[j].clone()).collect();
    }
    Preprocessed { pins, components, decomposition }
}

impl Component {
    fn local_edge(&self, e: usize) -> usize {
        self.edges.iter().position(|&x| x == e).expect("edge not in component")
    }

    pub(crate) fn local_sup(&self, i: usize) -> usize {
        self.suppliers.iter().position(|&x| x == i).expect("supplier not in component")
    }

    pub(crate) fn local_dem(&self, j: usize) -> usize {
        self.demanders.iter().position(|&x| x == j).expect("demander not in component")
    }

    /// Circulation form: suppliers, demanders, then a hub node pair. Arc
    /// layout: supplier feeds, demander drains, the component's edges in
    /// order, and a return arc forcing the invariant total.
    fn circulation(&self, p: &Problem, active: &[usize]) -> (usize, Vec<PArc>, usize) {
        let ns = self.suppliers.len();
        let nd = self.demanders.len();
        let src = ns + nd;
        let snk = ns + nd + 1;
        let mut arcs = Vec::with_capacity(ns + nd + self.edges.len() + 1);
        for (li, cap) in self.sup_cap.iter().enumerate() {
            arcs.push(PArc { from: src, to: li, base: Rat::zero(), lam: false, upper: cap.clone() });
        }
        for (lj, cap) in self.dem_cap.iter().enumerate() {
            arcs.push(PArc { from: ns + lj, to: snk, base: Rat::zero(), lam: false, upper: cap.clone() });
        }
        let edge_off = ns + nd;
        for (k, &e) in self.edges.iter().enumerate() {
            let (i, j) = p.ends(e);
            let (li, lj) = (self.local_sup(i), self.local_dem(j));
            let arc = if active.contains(&e) {
                PArc { from: li, to: ns + lj, base: Rat::zero(), lam: true, upper: self.edge_upper[k].clone() }
            } else {
                PArc {
                    from: li,
                    to: ns + lj,
                    base: self.edge_lower[k].clone(),
                    lam: false,
                    upper: self.edge_lower[k].clone(),
                }
            };
            arcs.push(arc);
        }
        arcs.push(PArc { from: snk, to: src, base: self.total.clone(), lam: false, upper: self.total.clone() });
        (ns + nd + 2, arcs, edge_off)
    }

    fn solve_lambda_witness(&self, p: &Problem, active: &[usize]) -> (Rat, Vec<Rat>, usize) {
        assert!(!active.is_empty(), "solve_lambda needs at least one active edge");
        let (n, arcs, edge_off) = self.circulation(p, active);
        let sol = max_lambda(n, &arcs);
        (sol.lambda, sol.flows, edge_off)
    }

    /// The largest uniform value lambda* such that every active edge can carry
    /// at least lambda* simultaneously, inside the component's polytope with
    /// inactive edges held at their recorded lower bounds.
    pub fn solve_lambda(&self, p: &Problem, active: &[usize]) -> Rat {
        self.solve_lambda_witness(p, active).0
    }

    /// The active edges that survive a round at `lambda`: those whose flow can
    /// strictly exceed it while all other active edges stay at or above it.
    /// Edges not returned are exactly at `lambda` in every such flow.
    pub fn update_active(&self, p: &Problem, active: &[usize], lambda: &Rat) -> Vec<usize> {
        let (n, arcs, edge_off) = self.circulation(p, active);
        let defs: Vec<crate::engine::ArcDef> = arcs
            .iter()
            .map(|a| crate::engine::ArcDef {
                from: a.from,
                to: a.to,
                lower: a.lower_at(lambda),
                upper: a.upper.clone(),
            })
            .collect();
        let out = crate::engine::feasible_circulation(n, &defs);
        assert!(out.feasible, "update_active requires a feasible lambda");
        self.survivors(&arcs, n, lambda, &out.flows, edge_off, active)
    }

    fn survivors(
        &self,
        arcs: &[PArc],
        n: usize,
        lambda: &Rat,
        flows: &[Rat],
        edge_off: usize,
        active: &[usize],
    ) -> Vec<usize> {
        let candidates: Vec<usize> =
            active.iter().map(|&e| edge_off + self.local_edge(e)).collect();
        let ex = exceeders(n, arcs, lambda, flows, &candidates);
        active.iter().zip(&ex).filter(|&(_, &keep)| keep).map(|(&e, _)| e).collect()
    }
}

/// One edge-fair round: the bound reached and the split of the active set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationStep {
    pub step: usize,
    #[serde(with = "serde_rat")]
    pub lambda_star: Rat,
    pub deactivated: Vec<(String, String)>,
    pub remaining: Vec<(String, String)>,
}

/// Per-component rounds: edge rounds for edge-fair, node rounds for the
/// egalitarian mechanism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rounds", rename_all = "kebab-case")]
pub enum ComponentSteps {
    EdgeRounds(Vec<IterationStep>),
    NodeRounds(Vec<NodeStep>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentTrace {
    pub suppliers: Vec<String>,
    pub demanders: Vec<String>,
    pub steps: ComponentSteps,
}

/// What a mechanism returns: the chosen maximum flow, its node allocation,
/// the preprocessing pins, per-component traces, and the decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanismOutcome {
    pub mechanism: String,
    pub flow: Flow,
    pub allocation: Allocation,
    pub pinned: Vec<PinnedEdge>,
    pub trace: Vec<ComponentTrace>,
    pub decomposition: Decomposition,
}

pub(crate) fn edge_labels(p: &Problem, edges: &[usize]) -> Vec<(String, String)> {
    edges.iter().map(|&e| (p.edges[e].from.clone(), p.edges[e].to.clone())).collect()
}

pub(crate) fn assemble_outcome(
    p: &Problem,
    mechanism: &str,
    pre: &Preprocessed,
    z: Vec<Rat>,
    trace: Vec<ComponentTrace>,
) -> MechanismOutcome {
    let flow = Flow { z };
    let allocation = Allocation::of(p, &flow);
    debug_assert_eq!(check_feasible(p, &flow), Ok(()));
    debug_assert_eq!(flow.value(), crate::flownet::max_flow_value(p));
    MechanismOutcome {
        mechanism: mechanism.to_string(),
        flow,
        allocation,
        pinned: pre
            .pins
            .iter()
            .map(|(e, v)| PinnedEdge {
                from: p.edges[*e].from.clone(),
                to: p.edges[*e].to.clone(),
                value: v.clone(),
            })
            .collect(),
        trace,
        decomposition: pre.decomposition.clone(),
    }
}

/// The edge-fair (lexicographically optimal) maximum flow.
pub fn edge_fair(p: &Problem) -> MechanismOutcome {
    let mut pre = preprocess(p);
    let mut z = vec![Rat::zero(); p.n_edges()];
    for (e, v) in &pre.pins {
        z[*e] = v.clone();
    }
    let mut trace = Vec::new();
    for c in &mut pre.components {
        let mut active = c.edges.clone();
        let mut steps = Vec::new();
        let mut last: Option<Rat> = None;
        while !active.is_empty() {
            let (lambda, flows, edge_off) = c.solve_lambda_witness(p, &active);
            if let Some(prev) = &last {
                assert!(lambda > *prev, "lambda must strictly increase across rounds");
            }
            let (n, arcs, _) = c.circulation(p, &active);
            let kept = c.survivors(&arcs, n, &lambda, &flows, edge_off, &active);
            let gone: Vec<usize> = active.iter().copied().filter(|e| !kept.contains(e)).collect();
            assert!(!gone.is_empty(), "every round must pin at least one edge");
            for &e in &gone {
                let k = c.local_edge(e);
                c.edge_lower[k] = lambda.clone();
            }
            steps.push(IterationStep {
                step: steps.len() + 1,
                lambda_star: lambda.clone(),
                deactivated: edge_labels(p, &gone),
                remaining: edge_labels(p, &kept),
            });
            last = Some(lambda);
            active = kept;
        }
        for (k, &e) in c.edges.iter().enumerate() {
            z[e] = c.edge_lower[k].clone();
        }
        trace.push(ComponentTrace {
            suppliers: c.suppliers.iter().map(|&i| p.suppliers[i].id.clone()).collect(),
            demanders: c.demanders.iter().map(|&j| p.demanders[j].id.clone()).collect(),
            steps: ComponentSteps::EdgeRounds(steps),
        });
    }
    assemble_outcome(p, "edge-fair", &pre, z, trace)
}

/// Node totals of a flow, the node-agent view of an edge outcome.
pub fn node_allocation(p: &Problem, f: &Flow) -> Allocation {
    Allocation::of(p, f)
}
