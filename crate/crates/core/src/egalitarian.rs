//! The egalitarian mechanism: leximin over node allocations.
//!
//! Within each flexible component at most one side can have aggregate slack
//! (capacity above the component's invariant total): a component's nodes all
//! sit on the same side of the canonical min cut, which holds one side at its
//! caps. The slack side is where rationing bites, and the mechanism
//! water-fills its allocations: raise a uniform floor lambda as far as
//! feasibility allows, freeze the nodes that cannot rise further, repeat.
//! Pinned flow counts toward a node's allocation, so a node's floor on
//! component flow is lambda minus what it already holds.

use crate::edgefair::{
    assemble_outcome, preprocess, Component, ComponentSteps, ComponentTrace, MechanismOutcome,
};
use crate::engine::{feasible_circulation, ArcDef};
use crate::parametric::{exceeders, max_lambda, PArc};
use crate::problem::Problem;
use crate::rational::{serde_rat, Rat};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// One water-filling round: the floor reached and who froze at it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeStep {
    pub step: usize,
    #[serde(with = "serde_rat")]
    pub lambda_star: Rat,
    pub frozen: Vec<String>,
    pub remaining: Vec<String>,
}

struct Target {
    /// Node arc index in the component circulation.
    arc: usize,
    id: String,
    /// Allocation already pinned outside the component.
    fix: Rat,
    /// Component flow once frozen.
    frozen: Option<Rat>,
}

fn circulation(c: &Component, p: &Problem, targets: &[Target]) -> (usize, Vec<PArc>) {
    let ns = c.suppliers.len();
    let nd = c.demanders.len();
    let src = ns + nd;
    let snk = src + 1;
    let mut arcs = Vec::with_capacity(ns + nd + c.edges.len() + 1);
    for (li, cap) in c.sup_cap.iter().enumerate() {
        arcs.push(PArc { from: src, to: li, base: Rat::zero(), lam: false, upper: cap.clone() });
    }
    for (lj, cap) in c.dem_cap.iter().enumerate() {
        arcs.push(PArc { from: ns + lj, to: snk, base: Rat::zero(), lam: false, upper: cap.clone() });
    }
    for t in targets {
        match &t.frozen {
            Some(v) => {
                arcs[t.arc].base = v.clone();
                arcs[t.arc].upper = v.clone();
            }
            None => {
                // Floor lambda on the allocation fix + flow: flow >= lambda - fix.
                // A negative bound is vacuous, flows are nonnegative anyway.
                arcs[t.arc].base = -t.fix.clone();
                arcs[t.arc].lam = true;
            }
        }
    }
    for (k, &e) in c.edges.iter().enumerate() {
        let (i, j) = p.ends(e);
        arcs.push(PArc {
            from: c.local_sup(i),
            to: ns + c.local_dem(j),
            base: Rat::zero(),
            lam: false,
            upper: c.edge_upper[k].clone(),
        });
    }
    arcs.push(PArc { from: snk, to: src, base: c.total.clone(), lam: false, upper: c.total.clone() });
    (ns + nd + 2, arcs)
}

fn initial_targets(c: &Component, p: &Problem) -> Vec<Target> {
    let ns = c.suppliers.len();
    let sup_total: Rat = c.sup_cap.iter().sum();
    let dem_total: Rat = c.dem_cap.iter().sum();
    let mut targets = Vec::new();
    if sup_total > c.total {
        for (li, &i) in c.suppliers.iter().enumerate() {
            targets.push(Target {
                arc: li,
                id: p.suppliers[i].id.clone(),
                fix: c.sup_fixed[li].clone(),
                frozen: None,
            });
        }
    }
    if dem_total > c.total {
        for (lj, &j) in c.demanders.iter().enumerate() {
            targets.push(Target {
                arc: ns + lj,
                id: p.demanders[j].id.clone(),
                fix: c.dem_fixed[lj].clone(),
                frozen: None,
            });
        }
    }
    targets
}

/// The egalitarian maximum flow: per component, lexicographically maximize
/// the sorted allocations of the slack side's nodes.
pub fn egalitarian(p: &Problem) -> MechanismOutcome {
    let pre = preprocess(p);
    let mut z = vec![Rat::zero(); p.n_edges()];
    for (e, v) in &pre.pins {
        z[*e] = v.clone();
    }
    let mut trace = Vec::new();
    for c in &pre.components {
        let edge_off = c.suppliers.len() + c.demanders.len();
        let mut targets = initial_targets(c, p);
        let mut steps = Vec::new();
        let mut witness: Option<Vec<Rat>> = None;
        let mut last: Option<Rat> = None;
        while targets.iter().any(|t| t.frozen.is_none()) {
            let (n, arcs) = circulation(c, p, &targets);
            let sol = max_lambda(n, &arcs);
            if let Some(prev) = &last {
                assert!(sol.lambda > *prev, "floor must strictly rise across rounds");
            }
            let open: Vec<usize> = targets
                .iter()
                .filter(|t| t.frozen.is_none())
                .map(|t| t.arc)
                .collect();
            let ex = exceeders(n, &arcs, &sol.lambda, &sol.flows, &open);
            let mut newly = Vec::new();
            let mut arc_keep: Vec<usize> = Vec::new();
            for (&arc, &keep) in open.iter().zip(&ex) {
                if keep {
                    arc_keep.push(arc);
                }
            }
            for t in targets.iter_mut().filter(|t| t.frozen.is_none()) {
                if !arc_keep.contains(&t.arc) {
                    t.frozen = Some(sol.lambda.clone() - &t.fix);
                    newly.push(t.id.clone());
                }
            }
            assert!(!newly.is_empty(), "every round must freeze at least one node");
            steps.push(NodeStep {
                step: steps.len() + 1,
                lambda_star: sol.lambda.clone(),
                frozen: newly,
                remaining: targets
                    .iter()
                    .filter(|t| t.frozen.is_none())
                    .map(|t| t.id.clone())
                    .collect(),
            });
            last = Some(sol.lambda);
            witness = Some(sol.flows);
        }
        let flows = match witness {
            // The closing round's witness holds every target at its frozen
            // value, so its edge flows are the component's answer.
            Some(f) => f,
            None => {
                // No slack on either side: every node is at capacity in every
                // maximum flow, any feasible circulation will do.
                let (n, arcs) = circulation(c, p, &targets);
                let defs: Vec<ArcDef> = arcs
                    .iter()
                    .map(|a| ArcDef {
                        from: a.from,
                        to: a.to,
                        lower: a.base.clone(),
                        upper: a.upper.clone(),
                    })
                    .collect();
                let out = feasible_circulation(n, &defs);
                assert!(out.feasible, "component totals come from a real flow");
                out.flows
            }
        };
        for (k, &e) in c.edges.iter().enumerate() {
            z[e] = flows[edge_off + k].clone();
        }
        trace.push(ComponentTrace {
            suppliers: c.suppliers.iter().map(|&i| p.suppliers[i].id.clone()).collect(),
            demanders: c.demanders.iter().map(|&j| p.demanders[j].id.clone()).collect(),
            steps: ComponentSteps::NodeRounds(steps),
        });
    }
    assemble_outcome(p, "egalitarian", &pre, z, trace)
}
