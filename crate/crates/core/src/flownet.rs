//! Network analysis: maximum flows, canonical min cuts, the supplier/demander
//! decomposition, edge rigidity, and Pareto-optimality relative to peaks.

use crate::engine;
use crate::problem::{check_feasible, Allocation, FeasibilityViolation, Flow, Problem};
use crate::rational::{format_number, serde_rat, Rat};
use crate::residual::Residual;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// Shared augmented-network solve. Node layout: suppliers, then demanders,
/// then source, then sink. Arc layout: source arcs, sink arcs, then edges in
/// declaration order.
pub(crate) struct Solved {
    pub ends: Vec<(usize, usize)>,
    pub caps: Vec<Rat>,
    pub flows: Vec<Rat>,
    pub value: Rat,
    pub reach_src: Vec<bool>,
    pub reach_sink: Vec<bool>,
    pub edge_off: usize,
    pub n_sup: usize,
    pub n_dem: usize,
}

impl Solved {
    pub fn source(&self) -> usize {
        self.n_sup + self.n_dem
    }
    pub fn sink(&self) -> usize {
        self.n_sup + self.n_dem + 1
    }
    pub fn sup_node(&self, i: usize) -> usize {
        i
    }
    pub fn dem_node(&self, j: usize) -> usize {
        self.n_sup + j
    }
    /// Arc index of the sink arc draining demander `j`.
    pub fn sink_arc(&self, j: usize) -> usize {
        self.n_sup + j
    }
    /// Arc index of problem edge `e`.
    pub fn edge_arc(&self, e: usize) -> usize {
        self.edge_off + e
    }

    /// Residual graph of the computed flow over the augmented arcs.
    pub fn residual(&self) -> Residual {
        Residual::new(
            self.n_sup + self.n_dem + 2,
            &self.ends,
            |a| self.flows[a] < self.caps[a],
            |a| self.flows[a] > Rat::zero(),
        )
    }

    /// Can arc `a` carry more in some maximum flow? True when its forward
    /// residual is open and the released flow can return from head to tail
    /// without using either direction of `a` itself.
    pub fn can_increase(&self, r: &Residual, a: usize) -> bool {
        self.flows[a] < self.caps[a] && r.path_avoiding(self.ends[a].1, self.ends[a].0, a)
    }

    /// Can arc `a` carry less in some maximum flow?
    pub fn can_decrease(&self, r: &Residual, a: usize) -> bool {
        self.flows[a] > Rat::zero() && r.path_avoiding(self.ends[a].0, self.ends[a].1, a)
    }
}

pub(crate) fn solve_base(p: &Problem) -> Solved {
    let ns = p.n_sup();
    let nd = p.n_dem();
    let source = ns + nd;
    let sink = ns + nd + 1;
    let mut arcs: Vec<(usize, usize, Rat)> = Vec::with_capacity(ns + nd + p.n_edges());
    for i in 0..ns {
        arcs.push((source, i, p.sup_peak(i).clone()));
    }
    for j in 0..nd {
        arcs.push((ns + j, sink, p.dem_peak(j).clone()));
    }
    for e in 0..p.n_edges() {
        let (i, j) = p.ends(e);
        arcs.push((i, ns + j, p.cap_bound(e)));
    }
    let out = engine::max_flow_simple(ns + nd + 2, &arcs, source, sink);
    Solved {
        ends: arcs.iter().map(|&(u, v, _)| (u, v)).collect(),
        caps: arcs.into_iter().map(|(_, _, c)| c).collect(),
        flows: out.flows,
        value: out.value,
        reach_src: out.reach_src,
        reach_sink: out.reach_sink,
        edge_off: ns + nd,
        n_sup: ns,
        n_dem: nd,
    }
}

/// The deterministic maximum flow and its value.
pub fn max_flow(p: &Problem) -> (Flow, Rat) {
    let s = solve_base(p);
    let z = (0..p.n_edges()).map(|e| s.flows[s.edge_arc(e)].clone()).collect();
    (Flow { z }, s.value)
}

pub fn max_flow_value(p: &Problem) -> Rat {
    solve_base(p).value
}

/// One side of a supplier/demander cut: the members on the source side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub suppliers: Vec<String>,
    pub demanders: Vec<String>,
}

/// The two canonical minimum cuts: the inclusion-smallest and
/// inclusion-largest source sides. Every other min cut sits between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinCutPair {
    pub smallest: Cut,
    pub largest: Cut,
    #[serde(with = "serde_rat")]
    pub capacity: Rat,
}

pub fn extremal_min_cuts(p: &Problem) -> MinCutPair {
    let s = solve_base(p);
    let collect = |member: &dyn Fn(usize) -> bool| Cut {
        suppliers: (0..p.n_sup())
            .filter(|&i| member(s.sup_node(i)))
            .map(|i| p.suppliers[i].id.clone())
            .collect(),
        demanders: (0..p.n_dem())
            .filter(|&j| member(s.dem_node(j)))
            .map(|j| p.demanders[j].id.clone())
            .collect(),
    };
    MinCutPair {
        smallest: collect(&|v| s.reach_src[v]),
        largest: collect(&|v| !s.reach_sink[v]),
        capacity: s.value,
    }
}

/// The four-block decomposition. Suppliers split into the rationed block S-
/// (those that keep slack in some maximum flow, plus everything residually
/// tied to them) and the saturated block S+. Demanders adjacent to S- that are
/// fully served in every maximum flow form D+; all others form D-. The cross
/// capacity is the total capacity of edges from S- to D-, which every maximum
/// flow saturates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub s_plus: Vec<String>,
    pub s_minus: Vec<String>,
    pub d_plus: Vec<String>,
    pub d_minus: Vec<String>,
    #[serde(with = "serde_rat")]
    pub cross_capacity: Rat,
}

impl Decomposition {
    pub fn s_minus_contains(&self, id: &str) -> bool {
        self.s_minus.iter().any(|s| s == id)
    }
    pub fn d_plus_contains(&self, id: &str) -> bool {
        self.d_plus.iter().any(|s| s == id)
    }
}

pub fn decompose(p: &Problem) -> Decomposition {
    decompose_solved(p, &solve_base(p))
}

pub(crate) fn decompose_solved(p: &Problem, s: &Solved) -> Decomposition {
    let r = s.residual();
    let s_minus_mask: Vec<bool> = (0..p.n_sup()).map(|i| s.reach_src[s.sup_node(i)]).collect();
    let mut adjacent = vec![false; p.n_dem()];
    for e in 0..p.n_edges() {
        let (i, j) = p.ends(e);
        if s_minus_mask[i] {
            adjacent[j] = true;
        }
    }
    let alloc = {
        let z = (0..p.n_edges()).map(|e| s.flows[s.edge_arc(e)].clone()).collect();
        Allocation::of(p, &Flow { z })
    };
    let mut d_plus_mask = vec![false; p.n_dem()];
    for j in 0..p.n_dem() {
        d_plus_mask[j] = adjacent[j]
            && alloc.demand[j] == *p.dem_peak(j)
            && !s.can_decrease(&r, s.sink_arc(j));
    }
    let mut cross = Rat::zero();
    for e in 0..p.n_edges() {
        let (i, j) = p.ends(e);
        if s_minus_mask[i] && !d_plus_mask[j] {
            cross += p.cap_bound(e);
        }
    }
    let ids = |mask: &[bool], keep: bool, nodes: &[crate::problem::Node]| {
        mask.iter()
            .enumerate()
            .filter(|&(_, &m)| m == keep)
            .map(|(k, _)| nodes[k].id.clone())
            .collect::<Vec<_>>()
    };
    Decomposition {
        s_plus: ids(&s_minus_mask, false, &p.suppliers),
        s_minus: ids(&s_minus_mask, true, &p.suppliers),
        d_plus: ids(&d_plus_mask, true, &p.demanders),
        d_minus: ids(&d_plus_mask, false, &p.demanders),
        cross_capacity: cross,
    }
}

/// Edges whose flow is the same in every maximum flow, with that invariant
/// value, in declaration order.
pub fn fixed_edges(p: &Problem) -> Vec<(usize, Rat)> {
    let s = solve_base(p);
    let r = s.residual();
    (0..p.n_edges())
        .filter_map(|e| {
            let a = s.edge_arc(e);
            if s.can_increase(&r, a) || s.can_decrease(&r, a) {
                None
            } else {
                Some((e, s.flows[a].clone()))
            }
        })
        .collect()
}

/// Why a feasible flow fails Pareto-optimality relative to peaks: the first
/// block condition it violates, or a bare value shortfall.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PoStarWitness {
    SupplierShort { id: String, got: String, peak: String },
    DemanderShort { id: String, got: String, peak: String },
    CrossEdgeSlack { edge: String, got: String, cap: String },
    ValueShort { got: String, need: String },
}

impl std::fmt::Display for PoStarWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PoStarWitness::SupplierShort { id, got, peak } => {
                write!(f, "supplier {id} ships {got} but every efficient flow ships its peak {peak}")
            }
            PoStarWitness::DemanderShort { id, got, peak } => {
                write!(f, "demander {id} receives {got} but every efficient flow serves its peak {peak}")
            }
            PoStarWitness::CrossEdgeSlack { edge, got, cap } => {
                write!(f, "cross edge {edge} carries {got} but every efficient flow saturates its capacity {cap}")
            }
            PoStarWitness::ValueShort { got, need } => {
                write!(f, "flow value {got} falls short of the maximum {need}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoStarReport {
    pub holds: bool,
    pub witness: Option<PoStarWitness>,
}

/// Is `f` Pareto-optimal relative to peaks? For feasible flows this is
/// equivalent to having maximum value. Infeasible flows are an error naming
/// the violated constraint. When the check fails, the witness names a violated
/// block condition (a rationed-block peak miss or an unsaturated cross edge)
/// when one exists, else the value shortfall.
pub fn is_po_star(p: &Problem, f: &Flow) -> Result<PoStarReport, FeasibilityViolation> {
    check_feasible(p, f)?;
    let s = solve_base(p);
    if f.value() == s.value {
        return Ok(PoStarReport { holds: true, witness: None });
    }
    let d = decompose(p);
    let alloc = Allocation::of(p, f);
    for (i, n) in p.suppliers.iter().enumerate() {
        if d.s_plus.contains(&n.id) && alloc.supply[i] < n.peak {
            return Ok(PoStarReport {
                holds: false,
                witness: Some(PoStarWitness::SupplierShort {
                    id: n.id.clone(),
                    got: format_number(&alloc.supply[i]),
                    peak: format_number(&n.peak),
                }),
            });
        }
    }
    for (j, n) in p.demanders.iter().enumerate() {
        if d.d_plus_contains(&n.id) && alloc.demand[j] < n.peak {
            return Ok(PoStarReport {
                holds: false,
                witness: Some(PoStarWitness::DemanderShort {
                    id: n.id.clone(),
                    got: format_number(&alloc.demand[j]),
                    peak: format_number(&n.peak),
                }),
            });
        }
    }
    for e in 0..p.n_edges() {
        let (i, j) = p.ends(e);
        let cross = d.s_minus_contains(&p.suppliers[i].id) && !d.d_plus_contains(&p.demanders[j].id);
        if cross && f.z[e] < p.cap_bound(e) {
            return Ok(PoStarReport {
                holds: false,
                witness: Some(PoStarWitness::CrossEdgeSlack {
                    edge: p.edge_label(e),
                    got: format_number(&f.z[e]),
                    cap: format_number(&p.cap_bound(e)),
                }),
            });
        }
    }
    Ok(PoStarReport {
        holds: false,
        witness: Some(PoStarWitness::ValueShort {
            got: format_number(&f.value()),
            need: format_number(&s.value),
        }),
    })
}

/// Maximum flow value achievable while edge `e` carries at least `floor`.
/// `None` when no feasible flow does.
pub fn max_value_with_edge_at_least(p: &Problem, e: usize, floor: &Rat) -> Option<Rat> {
    let s = solve_base(p);
    let arcs: Vec<engine::ArcDef> = (0..s.ends.len())
        .map(|a| engine::ArcDef {
            from: s.ends[a].0,
            to: s.ends[a].1,
            lower: if a == s.edge_arc(e) { floor.clone() } else { Rat::zero() },
            upper: s.caps[a].clone(),
        })
        .collect();
    if *floor > s.caps[s.edge_arc(e)] {
        return None;
    }
    engine::max_flow_lower_bounded(p.n_sup() + p.n_dem() + 2, &arcs, s.source(), s.sink())
        .map(|o| o.value)
}
