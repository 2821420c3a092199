//! Human-readable tables. Exact fractions everywhere; `approx` appends a
//! decimal in parentheses, marked with a tilde, and changes nothing else.
//! Everything renders into a `String` so the binary writes stdout exactly
//! once and can shrug off a closed pipe.

use std::fmt::Write;

use fairflow::edgefair::{ComponentSteps, MechanismOutcome};
use fairflow::flownet::{Cut, Decomposition, MinCutPair};
use fairflow::problem::Problem;
use fairflow::rational::{approx, format_number, Rat};
use fairflow::strategic::{Misreport, SearchOutcome};
use serde::Serialize;

macro_rules! out {
    ($dst:expr) => {{ let _ = writeln!($dst); }};
    ($dst:expr, $($arg:tt)*) => {{ let _ = writeln!($dst, $($arg)*); }};
}

fn val(r: &Rat, show_approx: bool) -> String {
    let exact = format_number(r);
    if show_approx && !r.is_integer() {
        format!("{exact} (~{:.3})", approx(r))
    } else {
        exact
    }
}

fn row(vs: &[Rat], show_approx: bool) -> String {
    vs.iter().map(|v| val(v, show_approx)).collect::<Vec<_>>().join(" ")
}

fn ids(list: &[String]) -> String {
    if list.is_empty() {
        "none".to_string()
    } else {
        list.join(" ")
    }
}

pub fn solve(p: &Problem, input: &str, outc: &MechanismOutcome, approx: bool) -> String {
    let mut o = String::new();
    out!(
        o,
        "problem {input}: {} suppliers, {} demanders, {} edges",
        p.n_sup(),
        p.n_dem(),
        p.n_edges()
    );
    out!(o, "mechanism: {}", outc.mechanism);
    let total: Rat = outc.flow.z.iter().sum();
    out!(o, "value: {}", val(&total, approx));
    out!(o);
    if !p.edges.is_empty() {
        out!(o, "flow:");
        for (e, z) in outc.flow.z.iter().enumerate() {
            let (from, to) = (&p.edges[e].from, &p.edges[e].to);
            out!(o, "  ({from}, {to}) = {}", val(z, approx));
        }
    }
    out!(o, "supply: {}", row(&outc.allocation.supply, approx));
    out!(o, "demand: {}", row(&outc.allocation.demand, approx));
    if !outc.pinned.is_empty() {
        out!(o);
        out!(o, "pinned edges:");
        for pe in &outc.pinned {
            out!(o, "  ({}, {}) = {}", pe.from, pe.to, val(&pe.value, approx));
        }
    }
    out!(o);
    decomposition_block(&mut o, &outc.decomposition, approx);
    if !outc.trace.is_empty() {
        out!(o);
        out!(o, "trace:");
        for t in &outc.trace {
            out!(o, "  component {{{}}} x {{{}}}:", ids(&t.suppliers), ids(&t.demanders));
            match &t.steps {
                ComponentSteps::EdgeRounds(rounds) => {
                    for r in rounds {
                        let held: Vec<String> =
                            r.deactivated.iter().map(|(a, b)| format!("({a}, {b})")).collect();
                        out!(
                            o,
                            "    round {}: lambda* = {}, held at bound: {}",
                            r.step,
                            val(&r.lambda_star, approx),
                            if held.is_empty() { "none".to_string() } else { held.join(" ") }
                        );
                    }
                }
                ComponentSteps::NodeRounds(rounds) => {
                    for r in rounds {
                        out!(
                            o,
                            "    round {}: lambda* = {}, frozen: {}",
                            r.step,
                            val(&r.lambda_star, approx),
                            ids(&r.frozen)
                        );
                    }
                }
            }
        }
    }
    o
}

fn decomposition_block(o: &mut String, d: &Decomposition, approx: bool) {
    out!(o, "decomposition:");
    out!(o, "  always-saturated suppliers (S+): {}", ids(&d.s_plus));
    out!(o, "  rationed suppliers (S-): {}", ids(&d.s_minus));
    out!(o, "  always-served demanders (D+): {}", ids(&d.d_plus));
    out!(o, "  rationed demanders (D-): {}", ids(&d.d_minus));
    out!(o, "  cross capacity: {}", val(&d.cross_capacity, approx));
}

/// A named edge with its forced value, for forced-edge listings.
#[derive(Serialize)]
pub struct NamedValue {
    pub from: String,
    pub to: String,
    pub value: String,
}

pub fn name_edges(p: &Problem, forced: &[(usize, Rat)]) -> Vec<NamedValue> {
    forced
        .iter()
        .map(|(e, v)| NamedValue {
            from: p.edges[*e].from.clone(),
            to: p.edges[*e].to.clone(),
            value: format_number(v),
        })
        .collect()
}

fn cut_line(o: &mut String, label: &str, cut: &Cut) {
    out!(
        o,
        "  {label}: suppliers {{{}}} demanders {{{}}}",
        ids(&cut.suppliers),
        ids(&cut.demanders)
    );
}

pub fn decompose(
    input: &str,
    value: &Rat,
    d: &Decomposition,
    cuts: &MinCutPair,
    forced: &[NamedValue],
    approx: bool,
) -> String {
    let mut o = String::new();
    out!(o, "problem {input}: max-flow value {}", val(value, approx));
    decomposition_block(&mut o, d, approx);
    out!(o, "extremal minimum cuts (source side):");
    cut_line(&mut o, "smallest", &cuts.smallest);
    cut_line(&mut o, "largest", &cuts.largest);
    if forced.is_empty() {
        out!(o, "forced edges: none");
    } else {
        out!(o, "forced edges (same value in every maximum flow):");
        for f in forced {
            out!(o, "  ({}, {}) = {}", f.from, f.to, f.value);
        }
    }
    o
}

pub fn audit(input: &str, reports: &[fairflow::axioms::AuditReport]) -> String {
    use fairflow::axioms::Verdict;
    let mut o = String::new();
    for r in reports {
        let verdict = match r.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inapplicable => "INAPPLICABLE",
        };
        let mech = r.mechanism.as_deref().unwrap_or("-");
        out!(o, "{verdict} {} ({mech}) on {input}: {}", r.axiom, r.detail);
        for w in &r.witnesses {
            witness_line(&mut o, w);
        }
    }
    o
}

fn witness_line(o: &mut String, w: &fairflow::axioms::Witness) {
    use fairflow::axioms::Witness;
    match w {
        Witness::Reallocation {
            complainant,
            counterpart,
            transfer,
            complainant_before,
            complainant_after,
            counterpart_before,
            counterpart_after,
            ..
        } => out!(
            o,
            "  moving {} from {counterpart} to {complainant} takes ({}, {}) to ({}, {})",
            format_number(transfer),
            format_number(complainant_before),
            format_number(counterpart_before),
            format_number(complainant_after),
            format_number(counterpart_after)
        ),
        Witness::ReducedRun { removed, amount, edge, kept, reallocated, .. } => out!(
            o,
            "  removing ({}, {}) with its {} units moves ({}, {}): kept {}, reallocated {}",
            removed.0,
            removed.1,
            format_number(amount),
            edge.0,
            edge.1,
            format_number(kept),
            format_number(reallocated)
        ),
        Witness::RankingPair { side, lower, higher, lower_value, higher_value, .. } => out!(
            o,
            "  {side} {lower} (smaller peak) gets {} while {higher} gets {}",
            format_number(lower_value),
            format_number(higher_value)
        ),
        Witness::MisreportEffect { agent, reported, moved, before, after } => out!(
            o,
            "  {agent} reporting {} moves {moved} from {} to {}",
            format_number(reported),
            format_number(before),
            format_number(after)
        ),
    }
}

fn misreport_line(o: &mut String, m: &Misreport) {
    let cap = |c: &fairflow::problem::Capacity| match c {
        fairflow::problem::Capacity::Finite(v) => format_number(v),
        fairflow::problem::Capacity::Unbounded => "inf".to_string(),
    };
    if m.reported == m.truth {
        out!(
            o,
            "  {}: reports the truth ({}), gain {}",
            m.agent,
            cap(&m.truth),
            format_number(&m.gain)
        );
    } else {
        out!(
            o,
            "  {}: reports {} instead of {}, gain {}",
            m.agent,
            cap(&m.reported),
            cap(&m.truth),
            format_number(&m.gain)
        );
    }
}

pub fn attack(input: &str, mech: &str, coalition: usize, outcome: &SearchOutcome) -> String {
    let mut o = String::new();
    match outcome {
        SearchOutcome::NoDeviation { examined } => out!(
            o,
            "attack {mech} on {input}: no deviation found within coalitions of size <= \
             {coalition} ({examined} reports examined)"
        ),
        SearchOutcome::Found { deviation, examined } => {
            out!(
                o,
                "attack {mech} on {input}: profitable deviation found ({examined} reports \
                 examined)"
            );
            for m in &deviation.coalition {
                misreport_line(&mut o, m);
            }
            out!(o, "  supply before: {}", row(&deviation.outcome_true.supply, false));
            out!(o, "  supply after:  {}", row(&deviation.outcome_reported.supply, false));
            out!(o, "  demand before: {}", row(&deviation.outcome_true.demand, false));
            out!(o, "  demand after:  {}", row(&deviation.outcome_reported.demand, false));
        }
        SearchOutcome::Truncated { examined, note, best_so_far } => {
            out!(o, "attack {mech} on {input}: truncated after {examined} reports: {note}");
            if let Some(best) = best_so_far {
                out!(o, "best deviation before the cutoff:");
                for m in &best.coalition {
                    misreport_line(&mut o, m);
                }
            }
        }
    }
    o
}

pub fn compare(input: &str, rows: &[(&str, &MechanismOutcome)], approx: bool) -> String {
    let mut o = String::new();
    let width = rows.iter().map(|(id, _)| id.len()).max().unwrap_or(0);
    out!(o, "compare on {input}:");
    for (id, outc) in rows {
        out!(o, "  {id:width$} supply: {}", row(&outc.allocation.supply, approx));
    }
    for (id, outc) in rows {
        out!(o, "  {id:width$} demand: {}", row(&outc.allocation.demand, approx));
    }
    for (id, outc) in rows {
        out!(o, "  {id:width$} edges:  {}", row(&outc.flow.z, approx));
    }
    if rows.len() >= 2 {
        out!(o, "orderings:");
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                let (ida, oa) = rows[a];
                let (idb, ob) = rows[b];
                out!(
                    o,
                    "  edge values, {ida} vs {idb}: {}",
                    lex_line(&oa.flow.z, &ob.flow.z, ida, idb)
                );
                out!(
                    o,
                    "  supply Lorenz, {ida} vs {idb}: {}",
                    lorenz_line(&oa.allocation.supply, &ob.allocation.supply, ida, idb)
                );
            }
        }
    }
    o
}

fn lex_line(a: &[Rat], b: &[Rat], ida: &str, idb: &str) -> String {
    use fairflow::order::{lex_compare, LexOrdering};
    match lex_compare(a, b) {
        Err(e) => e.to_string(),
        Ok(LexOrdering::Equal) => "equal".to_string(),
        Ok(LexOrdering::ADominates { coordinate, a_value, b_value }) => format!(
            "{ida} leximin-better (sorted position {coordinate}: {} vs {})",
            format_number(&a_value),
            format_number(&b_value)
        ),
        Ok(LexOrdering::BDominates { coordinate, a_value, b_value }) => format!(
            "{idb} leximin-better (sorted position {coordinate}: {} vs {})",
            format_number(&b_value),
            format_number(&a_value)
        ),
    }
}

fn lorenz_line(a: &[Rat], b: &[Rat], ida: &str, idb: &str) -> String {
    use fairflow::order::{lorenz_compare, LorenzOrdering};
    match lorenz_compare(a, b) {
        LorenzOrdering::Equal => "equal".to_string(),
        LorenzOrdering::ADominates => format!("{ida} dominates"),
        LorenzOrdering::BDominates => format!("{idb} dominates"),
        LorenzOrdering::Incomparable { note } => format!("incomparable ({note})"),
    }
}
