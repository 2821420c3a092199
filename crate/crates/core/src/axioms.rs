//! Axiom checkers. Every failed audit carries a witness that can be replayed:
//! a pairwise transfer, a reduced problem rerun, or a misreport.
//!
//! Pairwise checks (envy, equal treatment) follow the pair-local reading: fix
//! every flow not incident to the two agents and move mass between them. With
//! only peaks reported, preferences are known up to the single-peaked family,
//! so "i envies j" is read as: some single-peaked preference with i's peak
//! strictly prefers j's allocation. That keeps ties on opposite sides of the
//! peak in scope, which the impossibility construction depends on.

use crate::fixtures;
use crate::flownet::max_flow_value;
use crate::mechanism::{MechError, Mechanism};
use crate::problem::{check_feasible, Allocation, Capacity, FeasibilityViolation, Flow, Problem};
use crate::rational::{rint, serde_rat, Rat};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The axiom's hypothesis never fires on this instance.
    Inapplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentModel {
    /// Agents are suppliers and demanders; an agent's allocation is its total.
    Nodes,
    /// Agents are edges with the capacity as peak; allocations are edge flows.
    Edges,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// A pair-local transfer that the failed axiom says must not exist.
    Reallocation {
        model: AgentModel,
        complainant: String,
        counterpart: String,
        #[serde(with = "serde_rat")]
        transfer: Rat,
        #[serde(with = "serde_rat")]
        complainant_before: Rat,
        #[serde(with = "serde_rat")]
        complainant_after: Rat,
        #[serde(with = "serde_rat")]
        counterpart_before: Rat,
        #[serde(with = "serde_rat")]
        counterpart_after: Rat,
    },
    /// Rerunning the mechanism on a reduced problem moved a surviving edge.
    ReducedRun {
        removed: (String, String),
        #[serde(with = "serde_rat")]
        amount: Rat,
        reduced: Problem,
        edge: (String, String),
        #[serde(with = "serde_rat")]
        kept: Rat,
        #[serde(with = "serde_rat")]
        reallocated: Rat,
    },
    /// A same-neighborhood pair ordered by peak whose allocations cross.
    RankingPair {
        rule: String,
        side: String,
        lower: String,
        higher: String,
        #[serde(with = "serde_rat")]
        lower_peak: Rat,
        #[serde(with = "serde_rat")]
        higher_peak: Rat,
        #[serde(with = "serde_rat")]
        lower_value: Rat,
        #[serde(with = "serde_rat")]
        higher_value: Rat,
    },
    /// A misreport moved an allocation the axiom says must stay put.
    MisreportEffect {
        agent: String,
        #[serde(with = "serde_rat")]
        reported: Rat,
        moved: String,
        #[serde(with = "serde_rat")]
        before: Rat,
        #[serde(with = "serde_rat")]
        after: Rat,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub axiom: String,
    pub mechanism: Option<String>,
    pub verdict: Verdict,
    pub detail: String,
    pub witnesses: Vec<Witness>,
}

impl AuditReport {
    pub(crate) fn pass(axiom: &str, detail: impl Into<String>) -> Self {
        AuditReport {
            axiom: axiom.to_string(),
            mechanism: None,
            verdict: Verdict::Pass,
            detail: detail.into(),
            witnesses: Vec::new(),
        }
    }

    pub(crate) fn fail(axiom: &str, detail: impl Into<String>, witnesses: Vec<Witness>) -> Self {
        assert!(!witnesses.is_empty(), "a failed audit must carry a witness");
        AuditReport {
            axiom: axiom.to_string(),
            mechanism: None,
            verdict: Verdict::Fail,
            detail: detail.into(),
            witnesses,
        }
    }

    pub(crate) fn inapplicable(axiom: &str, detail: impl Into<String>) -> Self {
        AuditReport {
            axiom: axiom.to_string(),
            mechanism: None,
            verdict: Verdict::Inapplicable,
            detail: detail.into(),
            witnesses: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("flow is not feasible: {0}")]
    Infeasible(#[from] FeasibilityViolation),
    #[error("flow carries {value} but the maximum is {max}; edge-agent audits range over maximum flows")]
    NotMaximum { value: String, max: String },
}

/// True when every single-peaked preference with this peak weakly prefers
/// `own` to `other`: they are equal, or `own` lies between `other` and the
/// peak. Anything else leaves room for a preference that envies `other`.
fn surely_content(own: &Rat, other: &Rat, peak: &Capacity) -> bool {
    if own == other {
        return true;
    }
    match peak {
        Capacity::Finite(p) => (other < own && own <= p) || (p <= own && own < other),
        Capacity::Unbounded => own > other,
    }
}

/// Per-node list of (neighbour, edge index).
type Incidence = Vec<Vec<(usize, usize)>>;

/// Per-supplier map demander -> edge index, and the transpose.
fn adjacency(p: &Problem) -> (Incidence, Incidence) {
    let mut sup = vec![Vec::new(); p.n_sup()];
    let mut dem = vec![Vec::new(); p.n_dem()];
    for e in 0..p.n_edges() {
        let (i, j) = p.ends(e);
        sup[i].push((j, e));
        dem[j].push((i, e));
    }
    (sup, dem)
}

/// Largest mass movable to `to` from `from` through counterparties they
/// share, holding every other allocation fixed. Per shared counterparty the
/// donor edge empties and the receiving edge fills to its bound.
fn shared_transfer(
    to_adj: &[(usize, usize)],
    from_adj: &[(usize, usize)],
    z: &[Rat],
    p: &Problem,
) -> Rat {
    let mut total = Rat::zero();
    for &(c, to_edge) in to_adj {
        if let Some(&(_, from_edge)) = from_adj.iter().find(|&&(c2, _)| c2 == c) {
            let room = p.cap_bound(to_edge) - &z[to_edge];
            total += room.min(z[from_edge].clone());
        }
    }
    total
}

struct NodeSide<'a> {
    name: &'a str,
    ids: Vec<&'a str>,
    peaks: Vec<&'a Rat>,
    values: Vec<Rat>,
    adj: Vec<Vec<(usize, usize)>>,
}

fn node_sides<'a>(p: &'a Problem, alloc: &Allocation) -> [NodeSide<'a>; 2] {
    let (sup_adj, dem_adj) = adjacency(p);
    [
        NodeSide {
            name: "supplier",
            ids: p.suppliers.iter().map(|n| n.id.as_str()).collect(),
            peaks: p.suppliers.iter().map(|n| &n.peak).collect(),
            values: alloc.supply.clone(),
            adj: sup_adj,
        },
        NodeSide {
            name: "demander",
            ids: p.demanders.iter().map(|n| n.id.as_str()).collect(),
            peaks: p.demanders.iter().map(|n| &n.peak).collect(),
            values: alloc.demand.clone(),
            adj: dem_adj,
        },
    ]
}

fn reallocation_witness(
    model: AgentModel,
    complainant: String,
    counterpart: String,
    transfer: Rat,
    before: (&Rat, &Rat),
) -> Witness {
    Witness::Reallocation {
        model,
        complainant,
        counterpart,
        complainant_after: before.0.clone() + &transfer,
        counterpart_after: before.1.clone() - &transfer,
        complainant_before: before.0.clone(),
        counterpart_before: before.1.clone(),
        transfer,
    }
}

/// Edge pair transfer bound: receiving edge's headroom, donor's flow, and the
/// peak slack of any endpoint the two edges do not share.
fn edge_transfer(p: &Problem, alloc: &Allocation, z: &[Rat], to: usize, from: usize) -> Rat {
    let (ti, tj) = p.ends(to);
    let (fi, fj) = p.ends(from);
    let mut t = (p.cap_bound(to) - &z[to]).min(z[from].clone());
    if ti != fi {
        t = t.min(p.sup_peak(ti).clone() - &alloc.supply[ti]);
    }
    if tj != fj {
        t = t.min(p.dem_peak(tj).clone() - &alloc.demand[tj]);
    }
    t
}

fn ensure_feasible(p: &Problem, f: &Flow) -> Result<(), AuditError> {
    check_feasible(p, f)?;
    Ok(())
}

fn ensure_maximum(p: &Problem, f: &Flow) -> Result<(), AuditError> {
    let max = max_flow_value(p);
    let value = f.value();
    if value != max {
        return Err(AuditError::NotMaximum {
            value: crate::rational::format_number(&value),
            max: crate::rational::format_number(&max),
        });
    }
    Ok(())
}

/// No Envy: whenever some agent could (for a preference consistent with its
/// peak) prefer a same-side agent's allocation, no pair-local reallocation
/// may strictly improve the complainant.
pub fn check_no_envy(p: &Problem, f: &Flow, model: AgentModel) -> Result<AuditReport, AuditError> {
    ensure_feasible(p, f)?;
    let alloc = Allocation::of(p, f);
    match model {
        AgentModel::Nodes => {
            let mut pairs = 0usize;
            for side in node_sides(p, &alloc) {
                let n = side.ids.len();
                for a in 0..n {
                    for b in 0..n {
                        if a == b {
                            continue;
                        }
                        pairs += 1;
                        let peak = Capacity::Finite(side.peaks[a].clone());
                        if surely_content(&side.values[a], &side.values[b], &peak) {
                            continue;
                        }
                        let room = side.peaks[a].clone() - &side.values[a];
                        let t = shared_transfer(&side.adj[a], &side.adj[b], &f.z, p).min(room);
                        if t > Rat::zero() {
                            return Ok(AuditReport::fail(
                                "no-envy",
                                format!(
                                    "{} {} envies {} and a transfer of {} repairs it",
                                    side.name,
                                    side.ids[a],
                                    side.ids[b],
                                    crate::rational::format_number(&t)
                                ),
                                vec![reallocation_witness(
                                    model,
                                    side.ids[a].to_string(),
                                    side.ids[b].to_string(),
                                    t,
                                    (&side.values[a], &side.values[b]),
                                )],
                            ));
                        }
                    }
                }
            }
            if pairs == 0 {
                return Ok(AuditReport::inapplicable("no-envy", "no same-side pair of agents"));
            }
            Ok(AuditReport::pass("no-envy", "no pair-local envy-repairing transfer exists"))
        }
        AgentModel::Edges => {
            ensure_maximum(p, f)?;
            let m = p.n_edges();
            if m < 2 {
                return Ok(AuditReport::inapplicable("no-envy", "fewer than two edge agents"));
            }
            for a in 0..m {
                for b in 0..m {
                    if a == b {
                        continue;
                    }
                    if surely_content(&f.z[a], &f.z[b], &p.edges[a].cap) {
                        continue;
                    }
                    let t = edge_transfer(p, &alloc, &f.z, a, b);
                    if t > Rat::zero() {
                        return Ok(AuditReport::fail(
                            "no-envy",
                            format!(
                                "edge {} envies {} and a transfer of {} repairs it",
                                p.edge_label(a),
                                p.edge_label(b),
                                crate::rational::format_number(&t)
                            ),
                            vec![reallocation_witness(
                                model,
                                p.edge_label(a),
                                p.edge_label(b),
                                t,
                                (&f.z[a], &f.z[b]),
                            )],
                        ));
                    }
                }
            }
            Ok(AuditReport::pass("no-envy", "no pair-local envy-repairing transfer exists"))
        }
    }
}

/// Equal Treatment of Equals: equal-peak same-side agents with different
/// allocations must not admit a pair-local reallocation narrowing the gap.
pub fn check_ete(p: &Problem, f: &Flow, model: AgentModel) -> Result<AuditReport, AuditError> {
    ensure_feasible(p, f)?;
    let alloc = Allocation::of(p, f);
    let two = rint(2);
    match model {
        AgentModel::Nodes => {
            let mut pairs = 0usize;
            for side in node_sides(p, &alloc) {
                let n = side.ids.len();
                for a in 0..n {
                    for b in a + 1..n {
                        if side.peaks[a] != side.peaks[b] {
                            continue;
                        }
                        pairs += 1;
                        let (poor, rich) = if side.values[a] < side.values[b] {
                            (a, b)
                        } else if side.values[b] < side.values[a] {
                            (b, a)
                        } else {
                            continue;
                        };
                        let gap = side.values[rich].clone() - &side.values[poor];
                        let t = shared_transfer(&side.adj[poor], &side.adj[rich], &f.z, p)
                            .min(gap / &two);
                        if t > Rat::zero() {
                            return Ok(AuditReport::fail(
                                "equal-treatment",
                                format!(
                                    "equal-peak {}s {} and {} can be brought closer",
                                    side.name, side.ids[poor], side.ids[rich]
                                ),
                                vec![reallocation_witness(
                                    model,
                                    side.ids[poor].to_string(),
                                    side.ids[rich].to_string(),
                                    t,
                                    (&side.values[poor], &side.values[rich]),
                                )],
                            ));
                        }
                    }
                }
            }
            if pairs == 0 {
                return Ok(AuditReport::inapplicable(
                    "equal-treatment",
                    "no same-side pair shares a peak",
                ));
            }
            Ok(AuditReport::pass("equal-treatment", "no gap-narrowing transfer exists"))
        }
        AgentModel::Edges => {
            ensure_maximum(p, f)?;
            let m = p.n_edges();
            let mut pairs = 0usize;
            for a in 0..m {
                for b in a + 1..m {
                    if p.edges[a].cap != p.edges[b].cap {
                        continue;
                    }
                    pairs += 1;
                    let (poor, rich) = if f.z[a] < f.z[b] {
                        (a, b)
                    } else if f.z[b] < f.z[a] {
                        (b, a)
                    } else {
                        continue;
                    };
                    let gap = f.z[rich].clone() - &f.z[poor];
                    let t = edge_transfer(p, &alloc, &f.z, poor, rich).min(gap / &two);
                    if t > Rat::zero() {
                        return Ok(AuditReport::fail(
                            "equal-treatment",
                            format!(
                                "equal-peak edges {} and {} can be brought closer",
                                p.edge_label(poor),
                                p.edge_label(rich)
                            ),
                            vec![reallocation_witness(
                                model,
                                p.edge_label(poor),
                                p.edge_label(rich),
                                t,
                                (&f.z[poor], &f.z[rich]),
                            )],
                        ));
                    }
                }
            }
            if pairs == 0 {
                return Ok(AuditReport::inapplicable(
                    "equal-treatment",
                    "no pair of edges shares a peak",
                ));
            }
            Ok(AuditReport::pass("equal-treatment", "no gap-narrowing transfer exists"))
        }
    }
}

/// Consistency: remove any edge, debit its flow from both endpoint peaks, and
/// the mechanism must reproduce the remaining flows on the reduced problem.
pub fn check_consistency(mech: &dyn Mechanism, p: &Problem) -> Result<AuditReport, MechError> {
    let base = mech.solve(p)?;
    for e in 0..p.n_edges() {
        let amount = base.flow.z[e].clone();
        let reduced = p.reduced_without_edge(e, &amount);
        let rerun = mech.solve(&reduced)?;
        for (re, k) in (0..p.n_edges()).filter(|&k| k != e).enumerate() {
            if rerun.flow.z[re] != base.flow.z[k] {
                let mut report = AuditReport::fail(
                    "consistency",
                    format!(
                        "removing {} reallocates {} from {} to {}",
                        p.edge_label(e),
                        p.edge_label(k),
                        crate::rational::format_number(&base.flow.z[k]),
                        crate::rational::format_number(&rerun.flow.z[re])
                    ),
                    vec![Witness::ReducedRun {
                        removed: (p.edges[e].from.clone(), p.edges[e].to.clone()),
                        amount,
                        reduced,
                        edge: (p.edges[k].from.clone(), p.edges[k].to.clone()),
                        kept: base.flow.z[k].clone(),
                        reallocated: rerun.flow.z[re].clone(),
                    }],
                );
                report.mechanism = Some(mech.id().to_string());
                return Ok(report);
            }
        }
    }
    let mut report = if p.n_edges() == 0 {
        AuditReport::inapplicable("consistency", "no edge to remove")
    } else {
        AuditReport::pass(
            "consistency",
            format!("all {} single-edge removals keep the remaining flows", p.n_edges()),
        )
    };
    report.mechanism = Some(mech.id().to_string());
    Ok(report)
}

/// Ranking (RK): among same-side agents with identical neighborhoods, a lower
/// peak must not get a larger allocation. Ranking* (RK*) asks the same of the
/// shortfalls peak minus allocation.
pub fn check_ranking(p: &Problem, f: &Flow) -> AuditReport {
    let alloc = Allocation::of(p, f);
    let mut witnesses = Vec::new();
    let mut pairs = 0usize;
    for side in node_sides(p, &alloc) {
        let n = side.ids.len();
        let hoods: Vec<Vec<usize>> = side
            .adj
            .iter()
            .map(|a| {
                let mut h: Vec<usize> = a.iter().map(|&(c, _)| c).collect();
                h.sort_unstable();
                h
            })
            .collect();
        for a in 0..n {
            for b in 0..n {
                if a == b || hoods[a] != hoods[b] || side.peaks[a] > side.peaks[b] {
                    continue;
                }
                pairs += 1;
                let pair = |rule: &str| Witness::RankingPair {
                    rule: rule.to_string(),
                    side: side.name.to_string(),
                    lower: side.ids[a].to_string(),
                    higher: side.ids[b].to_string(),
                    lower_peak: side.peaks[a].clone(),
                    higher_peak: side.peaks[b].clone(),
                    lower_value: side.values[a].clone(),
                    higher_value: side.values[b].clone(),
                };
                if side.values[a] > side.values[b] {
                    witnesses.push(pair("RK"));
                }
                let short_a = side.peaks[a].clone() - &side.values[a];
                let short_b = side.peaks[b].clone() - &side.values[b];
                if short_a > short_b {
                    witnesses.push(pair("RK*"));
                }
            }
        }
    }
    if pairs == 0 {
        AuditReport::inapplicable("ranking", "no same-side pair has identical neighborhoods")
    } else if witnesses.is_empty() {
        AuditReport::pass("ranking", format!("RK and RK* hold on {pairs} comparable pairs"))
    } else {
        AuditReport::fail("ranking", "allocations cross the peak order", witnesses)
    }
}

/// The incompatibility of envy-freeness and consistency, materialized on the
/// two-supplier network where it was first observed: the only envy-free
/// maximum flow, the flows consistency forces after one removal, and the
/// envy that forcing creates on the reduced problem.
pub fn impossibility_demo() -> Vec<AuditReport> {
    let p = fixtures::fig2_left();
    let envy_free = Flow { z: vec![rint(2), rint(0), rint(2)] };
    let mut a = check_no_envy(&p, &envy_free, AgentModel::Nodes).expect("flow is feasible");
    a.detail =
        "the only envy-free maximum flow is (2, 0, 2), giving each supplier 2".to_string();

    let e = p.edge_index("s2", "d2").expect("fixture edge");
    let reduced = p.reduced_without_edge(e, &rint(2));
    let forced = Flow { z: vec![rint(2), rint(0)] };
    let b = AuditReport {
        axiom: "consistency".to_string(),
        mechanism: None,
        verdict: Verdict::Pass,
        detail: "removing (s2, d2) with its 2 units forces a consistent rule to keep (2, 0)"
            .to_string(),
        witnesses: Vec::new(),
    };

    let mut c = check_no_envy(&reduced, &forced, AgentModel::Nodes).expect("flow is feasible");
    c.detail = format!(
        "{}; the reduced problem's only envy-free flow is (1, 1), so no rule is both envy-free \
         and consistent",
        c.detail
    );
    vec![a, b, c]
}
