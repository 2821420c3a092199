//! Misreport search and reporting-invariance audits.
//!
//! Agents value allocations by distance to their declared peak: closer is
//! better, sated at the peak. A deviation is a coalition report profile that
//! leaves every member weakly closer to its peak and at least one member
//! strictly closer. Coalition members may report truthfully; that admits
//! coalitions where one agent's misreport only benefits the others.
//!
//! The search is exhaustive over a finite report grid and never silently
//! heuristic: when an evaluation budget runs out the outcome says so.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::axioms::{AgentModel, AuditReport, Witness};
use crate::edgefair::MechanismOutcome;
use crate::mechanism::{MechError, Mechanism};
use crate::problem::{Capacity, Problem};
use crate::rational::{format_number, serde_rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AgentRef {
    Supplier { id: String },
    Demander { id: String },
    Edge { from: String, to: String },
}

impl fmt::Display for AgentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentRef::Supplier { id } | AgentRef::Demander { id } => write!(f, "{id}"),
            AgentRef::Edge { from, to } => write!(f, "({from}, {to})"),
        }
    }
}

/// One coalition member's report. `reported == truth` marks a member who
/// joins the coalition without lying. `gain` is the drop in peak distance
/// relative to the truthful outcome; for an unbounded true capacity it is
/// the raw increase in flow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Misreport {
    pub agent: AgentRef,
    pub truth: Capacity,
    pub reported: Capacity,
    #[serde(with = "serde_rat")]
    pub gain: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub coalition: Vec<Misreport>,
    pub outcome_true: crate::problem::Allocation,
    pub outcome_reported: crate::problem::Allocation,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Largest coalition size tried; sizes run 1..=max_coalition.
    pub max_coalition: usize,
    /// Candidate reports. `None` uses [`default_grid`]. An agent's true
    /// value is always a candidate on top of the grid.
    pub grid: Option<Vec<Rat>>,
    /// Cap on mechanism evaluations; exceeding it returns
    /// [`SearchOutcome::Truncated`] instead of a silent partial answer.
    pub budget: Option<u64>,
    pub model: AgentModel,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_coalition: 2,
            grid: None,
            budget: None,
            model: AgentModel::Nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SearchOutcome {
    NoDeviation {
        examined: u64,
    },
    Found {
        deviation: Deviation,
        examined: u64,
    },
    Truncated {
        examined: u64,
        note: String,
        best_so_far: Option<Box<Deviation>>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Sup(usize),
    Dem(usize),
    Edge(usize),
}

struct Agent {
    refr: AgentRef,
    slot: Slot,
    truth: Capacity,
}

fn enumerate_agents(p: &Problem, model: AgentModel) -> Vec<Agent> {
    let mut out = Vec::new();
    match model {
        AgentModel::Nodes => {
            for (i, s) in p.suppliers.iter().enumerate() {
                out.push(Agent {
                    refr: AgentRef::Supplier { id: s.id.clone() },
                    slot: Slot::Sup(i),
                    truth: Capacity::Finite(s.peak.clone()),
                });
            }
            for (j, d) in p.demanders.iter().enumerate() {
                out.push(Agent {
                    refr: AgentRef::Demander { id: d.id.clone() },
                    slot: Slot::Dem(j),
                    truth: Capacity::Finite(d.peak.clone()),
                });
            }
        }
        AgentModel::Edges => {
            for (e, edge) in p.edges.iter().enumerate() {
                out.push(Agent {
                    refr: AgentRef::Edge {
                        from: edge.from.clone(),
                        to: edge.to.clone(),
                    },
                    slot: Slot::Edge(e),
                    truth: edge.cap.clone(),
                });
            }
        }
    }
    out
}

fn value_of(out: &MechanismOutcome, slot: Slot) -> Rat {
    match slot {
        Slot::Sup(i) => out.allocation.supply[i].clone(),
        Slot::Dem(j) => out.allocation.demand[j].clone(),
        Slot::Edge(e) => out.flow.z[e].clone(),
    }
}

fn apply_report(p: &Problem, agent: &Agent, report: &Capacity) -> Problem {
    match (agent.slot, report) {
        (Slot::Sup(i), Capacity::Finite(r)) => p.with_sup_peak(i, r.clone()),
        (Slot::Dem(j), Capacity::Finite(r)) => p.with_dem_peak(j, r.clone()),
        (Slot::Edge(e), c) => p.with_cap(e, c.clone()),
        (_, Capacity::Unbounded) => unreachable!("node reports are always finite"),
    }
}

fn report_gain(truth: &Capacity, before: &Rat, after: &Rat) -> Rat {
    match truth {
        Capacity::Finite(pk) => (before - pk).abs() - (after - pk).abs(),
        Capacity::Unbounded => after - before,
    }
}

/// Candidate reports for one agent: the grid (ascending) with the agent's
/// true value spliced in. Keeping the truth available lets an agent join a
/// coalition as a pure beneficiary.
fn candidate_reports(grid: &[Rat], truth: &Capacity) -> Vec<Capacity> {
    let mut out = Vec::with_capacity(grid.len() + 1);
    match truth {
        Capacity::Finite(t) => {
            let mut placed = false;
            for g in grid {
                if !placed && t < g {
                    out.push(Capacity::Finite(t.clone()));
                    placed = true;
                }
                if g == t {
                    placed = true;
                }
                out.push(Capacity::Finite(g.clone()));
            }
            if !placed {
                out.push(Capacity::Finite(t.clone()));
            }
        }
        Capacity::Unbounded => {
            out.extend(grid.iter().cloned().map(Capacity::Finite));
            out.push(Capacity::Unbounded);
        }
    }
    out
}

/// Half-integer multiples spanning `[0, 2 * largest declared capacity]`,
/// plus every exact value appearing in the truthful outcome. Useful
/// deviations pivot where some constraint changes state, and those pivots
/// sit at declared peaks or realized allocations; the half-integer mesh
/// covers the moves in between.
pub fn default_grid(p: &Problem, truthful: &MechanismOutcome) -> Vec<Rat> {
    grid_with_step(p, truthful, 2)
}

/// [`default_grid`] with a custom mesh: multiples of `1 / denominator` over
/// the same span, plus the truthful outcome's exact values.
pub fn grid_with_step(p: &Problem, truthful: &MechanismOutcome, denominator: u32) -> Vec<Rat> {
    assert!(denominator > 0, "grid step must be positive");
    let mut top = Rat::zero();
    for s in &p.suppliers {
        if s.peak > top {
            top = s.peak.clone();
        }
    }
    for d in &p.demanders {
        if d.peak > top {
            top = d.peak.clone();
        }
    }
    for e in &p.edges {
        if let Capacity::Finite(c) = &e.cap {
            if *c > top {
                top = c.clone();
            }
        }
    }
    let den = BigInt::from(denominator);
    let steps: BigInt = (top * Rat::from_integer(2.into()) * Rat::from_integer(den.clone()))
        .floor()
        .to_integer();
    let mut grid = Vec::new();
    let mut k = BigInt::zero();
    while k <= steps {
        grid.push(Rat::new(k.clone(), den.clone()));
        k += 1;
    }
    grid.extend(truthful.allocation.supply.iter().cloned());
    grid.extend(truthful.allocation.demand.iter().cloned());
    grid.extend(truthful.flow.z.iter().cloned());
    grid.sort();
    grid.dedup();
    grid
}

fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Exhaustive coalition search, smallest coalitions first. Within a size
/// every report profile is tried; the winner maximizes total gain, then
/// uses the fewest actual misreporters, then keeps the first profile found.
/// A budget overrun reports what was and was not covered.
pub fn search_manipulation(
    mech: &dyn Mechanism,
    p: &Problem,
    config: &SearchConfig,
) -> Result<SearchOutcome, MechError> {
    let base = mech.solve(p)?;
    let grid: Vec<Rat> = match &config.grid {
        Some(g) => {
            let mut g = g.clone();
            g.sort();
            g.dedup();
            g
        }
        None => default_grid(p, &base),
    };
    let agents = enumerate_agents(p, config.model);
    let candidates: Vec<Vec<Capacity>> = agents
        .iter()
        .map(|a| candidate_reports(&grid, &a.truth))
        .collect();
    let truth_values: Vec<Rat> = agents.iter().map(|a| value_of(&base, a.slot)).collect();

    let mut examined: u64 = 0;
    for size in 1..=config.max_coalition.min(agents.len()) {
        // (total gain, misreporter count, deviation)
        let mut best: Option<(Rat, usize, Deviation)> = None;
        for combo in combos(agents.len(), size) {
            let lists: Vec<&[Capacity]> = combo.iter().map(|&a| candidates[a].as_slice()).collect();
            let mut idx = vec![0usize; size];
            loop {
                let honest = (0..size).all(|m| lists[m][idx[m]] == agents[combo[m]].truth);
                if !honest {
                    if let Some(b) = config.budget {
                        if examined >= b {
                            return Ok(SearchOutcome::Truncated {
                                examined,
                                note: format!(
                                    "evaluation budget {b} ran out inside coalitions of size {size}; \
                                     the rest of this size and all larger coalitions are unexplored"
                                ),
                                best_so_far: best.map(|(_, _, d)| Box::new(d)),
                            });
                        }
                    }
                    examined += 1;
                    let mut q = p.clone();
                    for m in 0..size {
                        q = apply_report(&q, &agents[combo[m]], &lists[m][idx[m]]);
                    }
                    let out = mech.solve(&q)?;
                    let mut gains: Vec<Rat> = Vec::with_capacity(size);
                    let mut viable = true;
                    let mut strict = false;
                    for &a in &combo {
                        let g = report_gain(
                            &agents[a].truth,
                            &truth_values[a],
                            &value_of(&out, agents[a].slot),
                        );
                        if g.is_negative() {
                            viable = false;
                            break;
                        }
                        if g.is_positive() {
                            strict = true;
                        }
                        gains.push(g);
                    }
                    if viable && strict {
                        let total = gains.iter().fold(Rat::zero(), |acc, g| acc + g);
                        let misreporters = (0..size)
                            .filter(|&m| lists[m][idx[m]] != agents[combo[m]].truth)
                            .count();
                        let better = match &best {
                            None => true,
                            Some((bt, bm, _)) => {
                                total > *bt || (total == *bt && misreporters < *bm)
                            }
                        };
                        if better {
                            let coalition = (0..size)
                                .map(|m| Misreport {
                                    agent: agents[combo[m]].refr.clone(),
                                    truth: agents[combo[m]].truth.clone(),
                                    reported: lists[m][idx[m]].clone(),
                                    gain: gains[m].clone(),
                                })
                                .collect();
                            best = Some((
                                total,
                                misreporters,
                                Deviation {
                                    coalition,
                                    outcome_true: base.allocation.clone(),
                                    outcome_reported: out.allocation,
                                },
                            ));
                        }
                    }
                }
                let mut m = size;
                loop {
                    if m == 0 {
                        break;
                    }
                    m -= 1;
                    idx[m] += 1;
                    if idx[m] < lists[m].len() {
                        break;
                    }
                    idx[m] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
        if let Some((_, _, deviation)) = best {
            return Ok(SearchOutcome::Found {
                deviation,
                examined,
            });
        }
    }
    Ok(SearchOutcome::NoDeviation { examined })
}

fn resolve(p: &Problem, agent: &AgentRef) -> Result<Option<(Slot, Rat)>, MechError> {
    match agent {
        AgentRef::Supplier { id } => {
            let i = p.supplier_index(id).ok_or(MechError::MissingAgent)?;
            Ok(Some((Slot::Sup(i), p.sup_peak(i).clone())))
        }
        AgentRef::Demander { id } => {
            let j = p.demander_index(id).ok_or(MechError::MissingAgent)?;
            Ok(Some((Slot::Dem(j), p.dem_peak(j).clone())))
        }
        AgentRef::Edge { .. } => Ok(None),
    }
}

fn qualifies(truth: &Rat, own: &Rat, report: &Rat) -> bool {
    (truth < own && report <= own) || (truth > own && report >= own)
}

fn apply_node_report(p: &Problem, slot: Slot, r: &Rat) -> Problem {
    match slot {
        Slot::Sup(i) => p.with_sup_peak(i, r.clone()),
        Slot::Dem(j) => p.with_dem_peak(j, r.clone()),
        Slot::Edge(_) => unreachable!("invariance audits cover node agents"),
    }
}

/// A misreport lying weakly on the same side of the agent's current
/// allocation as its true peak must leave that agent's own allocation
/// unchanged. Grid entries outside the hypothesis are skipped; an agent
/// allocated exactly its peak qualifies nowhere and passes vacuously.
/// Edge agents are outside the statement.
pub fn check_invariance(
    mech: &dyn Mechanism,
    p: &Problem,
    agent: &AgentRef,
    grid: &[Rat],
) -> Result<AuditReport, MechError> {
    let Some((slot, truth)) = resolve(p, agent)? else {
        let mut rep = AuditReport::inapplicable(
            "invariance",
            "reporting invariance is stated for supplier and demander agents",
        );
        rep.mechanism = Some(mech.id().to_string());
        return Ok(rep);
    };
    let base = mech.solve(p)?;
    let own = value_of(&base, slot);
    let mut tried = 0usize;
    for r in grid {
        if !qualifies(&truth, &own, r) {
            continue;
        }
        tried += 1;
        let out = mech.solve(&apply_node_report(p, slot, r))?;
        let after = value_of(&out, slot);
        if after != own {
            let mut rep = AuditReport::fail(
                "invariance",
                format!(
                    "reporting {} moved {agent}'s own allocation from {} to {}",
                    format_number(r),
                    format_number(&own),
                    format_number(&after)
                ),
                vec![Witness::MisreportEffect {
                    agent: agent.to_string(),
                    reported: r.clone(),
                    moved: agent.to_string(),
                    before: own,
                    after,
                }],
            );
            rep.mechanism = Some(mech.id().to_string());
            return Ok(rep);
        }
    }
    let detail = if tried == 0 {
        format!("no grid report stays on {agent}'s truthful side; nothing to move")
    } else {
        format!("{tried} same-side reports all left {agent}'s allocation at {}", format_number(&own))
    };
    let mut rep = AuditReport::pass("invariance", detail);
    rep.mechanism = Some(mech.id().to_string());
    Ok(rep)
}

/// Same hypothesis as [`check_invariance`], stronger conclusion: the entire
/// allocation, everyone's share, must be unchanged.
pub fn check_strong_invariance(
    mech: &dyn Mechanism,
    p: &Problem,
    agent: &AgentRef,
    grid: &[Rat],
) -> Result<AuditReport, MechError> {
    let Some((slot, truth)) = resolve(p, agent)? else {
        let mut rep = AuditReport::inapplicable(
            "strong-invariance",
            "reporting invariance is stated for supplier and demander agents",
        );
        rep.mechanism = Some(mech.id().to_string());
        return Ok(rep);
    };
    let base = mech.solve(p)?;
    let own = value_of(&base, slot);
    let mut tried = 0usize;
    for r in grid {
        if !qualifies(&truth, &own, r) {
            continue;
        }
        tried += 1;
        let out = mech.solve(&apply_node_report(p, slot, r))?;
        if out.allocation != base.allocation {
            let (moved, before, after) = first_difference(p, &base, &out);
            let mut rep = AuditReport::fail(
                "strong-invariance",
                format!(
                    "reporting {} moved {moved}'s allocation from {} to {} although {agent}'s own share was guaranteed fixed",
                    format_number(r),
                    format_number(&before),
                    format_number(&after)
                ),
                vec![Witness::MisreportEffect {
                    agent: agent.to_string(),
                    reported: r.clone(),
                    moved,
                    before,
                    after,
                }],
            );
            rep.mechanism = Some(mech.id().to_string());
            return Ok(rep);
        }
    }
    let detail = if tried == 0 {
        format!("no grid report stays on {agent}'s truthful side; nothing to move")
    } else {
        format!("{tried} same-side reports by {agent} all left the whole allocation unchanged")
    };
    let mut rep = AuditReport::pass("strong-invariance", detail);
    rep.mechanism = Some(mech.id().to_string());
    Ok(rep)
}

fn first_difference(
    p: &Problem,
    base: &MechanismOutcome,
    out: &MechanismOutcome,
) -> (String, Rat, Rat) {
    for i in 0..p.n_sup() {
        if base.allocation.supply[i] != out.allocation.supply[i] {
            return (
                p.suppliers[i].id.clone(),
                base.allocation.supply[i].clone(),
                out.allocation.supply[i].clone(),
            );
        }
    }
    for j in 0..p.n_dem() {
        if base.allocation.demand[j] != out.allocation.demand[j] {
            return (
                p.demanders[j].id.clone(),
                base.allocation.demand[j].clone(),
                out.allocation.demand[j].clone(),
            );
        }
    }
    unreachable!("allocations differ in no coordinate")
}
