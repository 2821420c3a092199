//! Randomized structural properties tying the independent pieces together:
//! serialization, sampling, fairness orders, invariance, and witness replay.

mod common;

use fairflow::axioms::{
    check_consistency, check_ete, check_no_envy, AgentModel, Verdict, Witness,
};
use fairflow::edgefair::{edge_fair, node_allocation, ComponentSteps, MechanismOutcome};
use fairflow::egalitarian::egalitarian;
use fairflow::fixtures;
use fairflow::flownet::{decompose, fixed_edges, max_flow_value, max_value_with_edge_at_least};
use fairflow::mechanism::{hybrid_mechanism, EdgeFair, Egalitarian, Hybrid, Mechanism};
use fairflow::order::{lex_compare, lorenz_compare, LexOrdering, LorenzOrdering};
use fairflow::problem::{check_feasible, Capacity};
use fairflow::rational::{format_number, parse_number, rat, rint, Rat};
use fairflow::sampling::sample_max_flows;
use fairflow::strategic::{
    check_invariance, search_manipulation, AgentRef, SearchConfig, SearchOutcome,
};
use fairflow::{parse_problem, Problem};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn problem_json_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::mid_instance(&mut rng);
        let text = serde_json::to_string(&p).unwrap();
        let q = parse_problem(&text).unwrap();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn number_format_round_trips(n in -99_999i64..99_999, d in 1i64..500) {
        let v = rat(n, d);
        prop_assert_eq!(parse_number(&format_number(&v)).unwrap(), v);
    }
}

#[test]
fn fair_outputs_are_feasible_maximum_flows() {
    let mechanisms: [&dyn Mechanism; 2] = [&EdgeFair, &Egalitarian];
    for p in common::corpus_mid(30, 31) {
        let best = max_flow_value(&p);
        let d = decompose(&p);
        for mech in mechanisms {
            let out = mech.solve(&p).unwrap();
            check_feasible(&p, &out.flow).unwrap();
            let total: Rat = out.flow.z.iter().sum();
            assert_eq!(total, best, "{} left value on the table", mech.id());
            // rigid blocks leave no discretion: both mechanisms serve peaks there
            for id in &d.s_plus {
                let i = p.supplier_index(id).unwrap();
                assert_eq!(out.allocation.supply[i], p.suppliers[i].peak, "{} at {id}", mech.id());
            }
            for id in &d.d_plus {
                let j = p.demander_index(id).unwrap();
                assert_eq!(out.allocation.demand[j], p.demanders[j].peak, "{} at {id}", mech.id());
            }
        }
    }
}

/// 1,000 sampled maximum flows per instance: none beats edge-fair in the
/// leximin order, the egalitarian side allocations weakly Lorenz-dominate
/// every sample, and every sample obeys the rigid-block conditions (peaks on
/// the plus blocks, cross edges saturated), the sense in which the
/// decomposition does not depend on which maximum flow you look at.
#[test]
fn sampled_flows_never_beat_the_fair_outputs() {
    let mut corpus = vec![fixtures::fig1(), fixtures::fig3(), fixtures::fig5()];
    corpus.extend(common::corpus_mid(9, 32));
    for (k, p) in corpus.iter().enumerate() {
        let fair = edge_fair(p);
        let egal = egalitarian(p);
        let d = decompose(p);
        let s_plus: Vec<usize> =
            d.s_plus.iter().map(|id| p.supplier_index(id).unwrap()).collect();
        let d_plus: Vec<usize> =
            d.d_plus.iter().map(|id| p.demander_index(id).unwrap()).collect();
        let cross: Vec<usize> = (0..p.n_edges())
            .filter(|&e| {
                d.s_minus_contains(&p.edges[e].from) && !d.d_plus_contains(&p.edges[e].to)
            })
            .collect();
        for f in sample_max_flows(p, 1000, 1000 + k as u64) {
            assert!(
                !matches!(lex_compare(&fair.flow.z, &f.z).unwrap(), LexOrdering::BDominates { .. }),
                "instance {k}: a sampled flow is leximin-better than the fair one"
            );
            let alloc = node_allocation(p, &f);
            for (sampled, egal_side) in [
                (&alloc.supply, &egal.allocation.supply),
                (&alloc.demand, &egal.allocation.demand),
            ] {
                assert!(
                    matches!(
                        lorenz_compare(egal_side, sampled),
                        LorenzOrdering::ADominates | LorenzOrdering::Equal
                    ),
                    "instance {k}: the egalitarian side must weakly Lorenz-dominate every sample"
                );
            }
            for &i in &s_plus {
                assert_eq!(alloc.supply[i], p.suppliers[i].peak, "instance {k}");
            }
            for &j in &d_plus {
                assert_eq!(alloc.demand[j], p.demanders[j].peak, "instance {k}");
            }
            for &e in &cross {
                assert_eq!(f.z[e], p.cap_bound(e), "instance {k}: cross edge left slack");
            }
        }
    }
}

#[test]
fn same_side_reports_change_nothing_at_mid_size() {
    let mechanisms: [&dyn Mechanism; 2] = [&EdgeFair, &Egalitarian];
    for p in common::corpus_mid(12, 33) {
        for mech in mechanisms {
            let base = mech.solve(&p).unwrap();
            let audit = |agent: AgentRef, own: &Rat, peak: &Rat| {
                let mid = (own + peak) / rint(2);
                let grid = vec![own.clone(), mid, peak.clone()];
                let rep = check_invariance(mech, &p, &agent, &grid).unwrap();
                assert_eq!(rep.verdict, Verdict::Pass, "{agent}: {}", rep.detail);
            };
            for (i, s) in p.suppliers.iter().enumerate() {
                let own = base.allocation.supply[i].clone();
                audit(AgentRef::Supplier { id: s.id.clone() }, &own, &s.peak);
            }
            for (j, d) in p.demanders.iter().enumerate() {
                let own = base.allocation.demand[j].clone();
                audit(AgentRef::Demander { id: d.id.clone() }, &own, &d.peak);
            }
        }
    }
}

#[test]
fn inconsistency_witnesses_replay_exactly() {
    let mut corpus = vec![fixtures::fig2_left()];
    corpus.extend(common::corpus_mid(30, 34));
    let mut failures = 0usize;
    for p in &corpus {
        let rep = check_consistency(&Egalitarian, p).unwrap();
        if rep.verdict != Verdict::Fail {
            continue;
        }
        failures += 1;
        let Some(Witness::ReducedRun { removed, amount, reduced, edge, kept, reallocated }) =
            rep.witnesses.first()
        else {
            panic!("inconsistency must carry a reduced-run witness");
        };
        let full = egalitarian(p);
        let at = p.edge_index(&removed.0, &removed.1).unwrap();
        assert_eq!(&full.flow.z[at], amount, "witness must remove the solved amount");
        assert_eq!(reduced, &p.reduced_without_edge(at, amount));
        let again = egalitarian(reduced);
        let moved = reduced.edge_index(&edge.0, &edge.1).unwrap();
        assert_eq!(&again.flow.z[moved], reallocated);
        let orig = p.edge_index(&edge.0, &edge.1).unwrap();
        assert_eq!(&full.flow.z[orig], kept);
        assert_ne!(kept, reallocated);
    }
    assert!(failures >= 1, "the known inconsistent instance must fail");
}

#[test]
fn forced_edges_bind_the_optimum() {
    for p in common::corpus_mid(25, 35) {
        let best = max_flow_value(&p);
        for (e, v) in fixed_edges(&p).into_iter().take(3) {
            if v.is_zero() {
                let q = p.with_cap(e, Capacity::Finite(rint(0)));
                assert_eq!(max_flow_value(&q), best, "a forced-zero edge is free to drop");
            } else {
                let q = p.with_cap(e, Capacity::Finite(&v * rat(999, 1000)));
                assert!(
                    max_flow_value(&q) < best,
                    "capping a forced edge below its value must cost flow"
                );
            }
            // the other direction: forcing the edge above its value costs flow too
            let bound = p.cap_bound(e);
            if v < bound {
                let floor = &v + (&bound - &v) * rat(1, 1000);
                match max_value_with_edge_at_least(&p, e, &floor) {
                    None => {}
                    Some(best_above) => assert!(
                        best_above < best,
                        "raising a forced edge above its value must cost flow"
                    ),
                }
            }
        }
    }
}

#[test]
fn lone_edge_agents_stay_futile_on_random_instances() {
    let cfg = SearchConfig { max_coalition: 1, model: AgentModel::Edges, ..Default::default() };
    let mechanisms: [&dyn Mechanism; 2] = [&EdgeFair, &Egalitarian];
    for (k, p) in common::corpus_small(25, 36).iter().enumerate() {
        for mech in mechanisms {
            let out = search_manipulation(mech, p, &cfg).unwrap();
            assert!(
                matches!(out, SearchOutcome::NoDeviation { .. }),
                "instance {k}: an edge shifted {} in its own favor",
                mech.id()
            );
        }
    }
}

#[test]
fn edge_agent_pairs_cannot_collude_against_edge_fair() {
    let cfg = SearchConfig { max_coalition: 2, model: AgentModel::Edges, ..Default::default() };
    let mut corpus = vec![fixtures::fig4()];
    corpus.extend(common::corpus_small(3, 43));
    for (k, p) in corpus.iter().enumerate() {
        let out = search_manipulation(&EdgeFair, p, &cfg).unwrap();
        assert!(
            matches!(out, SearchOutcome::NoDeviation { .. }),
            "instance {k}: an edge pair beat edge-fair"
        );
    }
}

/// Water-filling traces: per component the floor strictly rises, every round
/// retires something, and the round count never exceeds what is being rationed.
#[test]
fn traces_terminate_within_their_budgets() {
    for p in common::corpus_mid(20, 40) {
        let fair = edge_fair(&p);
        let mut rounds_total = 0usize;
        for t in &fair.trace {
            let ComponentSteps::EdgeRounds(rounds) = &t.steps else {
                panic!("edge-fair must trace edge rounds");
            };
            let mut prev: Option<&Rat> = None;
            for r in rounds {
                assert!(!r.deactivated.is_empty(), "a round must retire an edge");
                if let Some(last) = prev {
                    assert!(r.lambda_star > *last, "the floor must strictly rise");
                }
                prev = Some(&r.lambda_star);
            }
            rounds_total += rounds.len();
        }
        assert!(rounds_total <= p.n_edges(), "more rounds than edges");

        let egal = egalitarian(&p);
        for t in &egal.trace {
            let ComponentSteps::NodeRounds(rounds) = &t.steps else {
                panic!("egalitarian must trace node rounds");
            };
            let mut prev: Option<&Rat> = None;
            for r in rounds {
                assert!(!r.frozen.is_empty(), "a round must freeze a node");
                if let Some(last) = prev {
                    assert!(r.lambda_star >= *last, "the floor cannot fall");
                }
                prev = Some(&r.lambda_star);
            }
            assert!(
                rounds.len() <= t.suppliers.len() + t.demanders.len(),
                "more rounds than component nodes"
            );
        }
    }
}

#[test]
fn no_envy_implies_equal_treatment() {
    let mechanisms: [&dyn Mechanism; 2] = [&EdgeFair, &Egalitarian];
    let mut implications = 0usize;
    for p in common::corpus_mid(30, 41) {
        for mech in mechanisms {
            let out = mech.solve(&p).unwrap();
            for model in [AgentModel::Nodes, AgentModel::Edges] {
                let envy = check_no_envy(&p, &out.flow, model).unwrap();
                if envy.verdict != Verdict::Pass {
                    continue;
                }
                let ete = check_ete(&p, &out.flow, model).unwrap();
                assert_ne!(
                    ete.verdict,
                    Verdict::Fail,
                    "{} {model:?}: envy-free but unequal: {}",
                    mech.id(),
                    ete.detail
                );
                implications += 1;
            }
        }
    }
    assert!(implications > 0, "the implication never fired");
}

#[test]
fn egalitarian_is_envy_free_for_node_agents() {
    let mut corpus = vec![fixtures::fig1(), fixtures::fig3()];
    corpus.extend(common::corpus_mid(30, 42));
    for (k, p) in corpus.iter().enumerate() {
        let out = egalitarian(p);
        let rep = check_no_envy(p, &out.flow, AgentModel::Nodes).unwrap();
        assert_ne!(rep.verdict, Verdict::Fail, "instance {k}: {}", rep.detail);
    }
}

/// Reporting a peak below what you are already receiving can only push your
/// allocation down to the report, never raise it.
#[test]
fn under_reporting_below_your_allocation_never_helps() {
    let mechanisms: [&dyn Mechanism; 2] = [&EdgeFair, &Egalitarian];
    for p in common::corpus_mid(8, 38) {
        for mech in mechanisms {
            let base = mech.solve(&p).unwrap();
            for (i, s) in p.suppliers.iter().enumerate() {
                let own = &base.allocation.supply[i];
                if own.is_zero() {
                    continue;
                }
                let report = own * rat(3, 4);
                let out = mech.solve(&p.with_sup_peak(i, report.clone())).unwrap();
                assert!(out.allocation.supply[i] <= report, "{} at {}", mech.id(), s.id);
            }
            for (j, d) in p.demanders.iter().enumerate() {
                let own = &base.allocation.demand[j];
                if own.is_zero() {
                    continue;
                }
                let report = own * rat(3, 4);
                let out = mech.solve(&p.with_dem_peak(j, report.clone())).unwrap();
                assert!(out.allocation.demand[j] <= report, "{} at {}", mech.id(), d.id);
            }
        }
    }
}

/// A reported deviation is a replayable artifact: applying the misreports to
/// the problem and re-running the mechanism reproduces the recorded outcome.
#[test]
fn found_deviations_reverify_exactly() {
    let p = fixtures::fig3();
    let out = search_manipulation(&Hybrid, &p, &SearchConfig::default()).unwrap();
    let SearchOutcome::Found { deviation, .. } = out else {
        panic!("the collusion against the hybrid rule must be found");
    };
    let mut q = p.clone();
    for m in &deviation.coalition {
        let Capacity::Finite(v) = &m.reported else {
            panic!("node agents report finite peaks");
        };
        match &m.agent {
            AgentRef::Supplier { id } => {
                q = q.with_sup_peak(q.supplier_index(id).unwrap(), v.clone());
            }
            AgentRef::Demander { id } => {
                q = q.with_dem_peak(q.demander_index(id).unwrap(), v.clone());
            }
            AgentRef::Edge { from, to } => {
                q = q.with_cap(q.edge_index(from, to).unwrap(), m.reported.clone());
            }
        }
    }
    let replay = hybrid_mechanism(&q).unwrap();
    assert_eq!(replay.allocation, deviation.outcome_reported);
}

/// Continuity probe: a one-in-a-million nudge to a single peak or capacity
/// moves no output coordinate by more than a bounded multiple of the nudge.
#[test]
fn outputs_move_continuously_under_small_perturbations() {
    let eps = rat(1, 1_000_000);
    let slack = rat(1, 100); // 10^4 times the nudge
    let mut corpus = vec![fixtures::fig1(), fixtures::fig5()];
    corpus.extend(common::corpus_mid(3, 39));
    for (k, p) in corpus.iter().enumerate() {
        let base = edge_fair(p);
        let worst = |out: &MechanismOutcome| -> Rat {
            let pairs = out
                .flow
                .z
                .iter()
                .zip(&base.flow.z)
                .chain(out.allocation.supply.iter().zip(&base.allocation.supply))
                .chain(out.allocation.demand.iter().zip(&base.allocation.demand));
            pairs.map(|(a, b)| (a - b).abs()).max().unwrap_or_else(|| rint(0))
        };
        let mut variants: Vec<Problem> = Vec::new();
        if p.n_sup() > 0 {
            variants.push(p.with_sup_peak(0, p.sup_peak(0) + &eps));
            if *p.sup_peak(0) >= eps {
                variants.push(p.with_sup_peak(0, p.sup_peak(0) - &eps));
            }
        }
        if p.n_dem() > 0 {
            variants.push(p.with_dem_peak(0, p.dem_peak(0) + &eps));
            if *p.dem_peak(0) >= eps {
                variants.push(p.with_dem_peak(0, p.dem_peak(0) - &eps));
            }
        }
        if let Some(Capacity::Finite(c)) = p.edges.first().map(|e| e.cap.clone()) {
            variants.push(p.with_cap(0, Capacity::Finite(&c + &eps)));
            if c >= eps {
                variants.push(p.with_cap(0, Capacity::Finite(&c - &eps)));
            }
        }
        for q in &variants {
            let moved = worst(&edge_fair(q));
            assert!(moved <= slack, "instance {k}: a tiny nudge moved an output by {moved}");
        }
    }
}
