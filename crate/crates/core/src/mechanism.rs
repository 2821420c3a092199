//! Mechanisms behind one interface, addressable by identifier.

use crate::edgefair::{edge_fair, MechanismOutcome};
use crate::egalitarian::egalitarian;
use crate::problem::Problem;
use crate::rational::rint;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechError {
    #[error("unknown mechanism {0:?}; known: edge-fair, egalitarian, hybrid")]
    Unknown(String),
    #[error("no such agent in the problem")]
    MissingAgent,
}

/// A rule mapping problems to maximum flows. Implementations must be pure:
/// the outcome depends on the problem alone.
pub trait Mechanism {
    fn id(&self) -> &'static str;
    fn solve(&self, p: &Problem) -> Result<MechanismOutcome, MechError>;
}

pub struct EdgeFair;

impl Mechanism for EdgeFair {
    fn id(&self) -> &'static str {
        "edge-fair"
    }
    fn solve(&self, p: &Problem) -> Result<MechanismOutcome, MechError> {
        Ok(edge_fair(p))
    }
}

pub struct Egalitarian;

impl Mechanism for Egalitarian {
    fn id(&self) -> &'static str {
        "egalitarian"
    }
    fn solve(&self, p: &Problem) -> Result<MechanismOutcome, MechError> {
        Ok(egalitarian(p))
    }
}

/// Switches on one demander's reported peak: at 5 or above it runs the
/// egalitarian mechanism, below it the edge-fair one. The switch agent is the
/// demander labeled "d0", or the first demander when no such label exists.
/// A strategyproof-but-not-group-strategyproof construction: the switch
/// agent's own allocation never moves, but crossing the threshold moves
/// everyone else's.
pub struct Hybrid;

impl Mechanism for Hybrid {
    fn id(&self) -> &'static str {
        "hybrid"
    }
    fn solve(&self, p: &Problem) -> Result<MechanismOutcome, MechError> {
        hybrid_mechanism(p)
    }
}

pub fn hybrid_mechanism(p: &Problem) -> Result<MechanismOutcome, MechError> {
    if p.n_dem() == 0 {
        return Err(MechError::MissingAgent);
    }
    let j = p.demander_index("d0").unwrap_or(0);
    let mut out =
        if *p.dem_peak(j) >= rint(5) { egalitarian(p) } else { edge_fair(p) };
    out.mechanism = "hybrid".to_string();
    Ok(out)
}

pub const MECHANISMS: [&str; 3] = ["edge-fair", "egalitarian", "hybrid"];

pub fn by_id(id: &str) -> Result<Box<dyn Mechanism>, MechError> {
    match id {
        "edge-fair" => Ok(Box::new(EdgeFair)),
        "egalitarian" => Ok(Box::new(Egalitarian)),
        "hybrid" => Ok(Box::new(Hybrid)),
        other => Err(MechError::Unknown(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::rat;

    #[test]
    fn hybrid_truthful_fig3_uses_egalitarian() {
        let out = hybrid_mechanism(&fixtures::fig3()).unwrap();
        assert_eq!(out.mechanism, "hybrid");
        assert_eq!(out.allocation.supply, vec![rint(4), rint(3), rint(3)]);
    }

    #[test]
    fn hybrid_low_report_switches_to_edge_fair() {
        let p = fixtures::fig3();
        let j = p.demander_index("d0").unwrap();
        let out = hybrid_mechanism(&p.with_dem_peak(j, rint(4))).unwrap();
        assert_eq!(out.allocation.supply, vec![rint(4), rat(9, 2), rat(3, 2)]);
        assert_eq!(out.allocation.demand[j], rint(4));
    }

    #[test]
    fn hybrid_threshold_boundary_is_egalitarian() {
        let p = fixtures::fig3();
        let j = p.demander_index("d0").unwrap();
        let at5 = p.with_dem_peak(j, rint(5));
        let out = hybrid_mechanism(&at5).unwrap();
        let egal = egalitarian(&at5);
        assert_eq!(out.allocation, egal.allocation);
        assert_eq!(out.flow, egal.flow);
    }

    #[test]
    fn hybrid_without_demanders_errors() {
        let p = Problem::parse(r#"{"suppliers": [{"id": "s", "peak": "1"}], "demanders": [], "edges": []}"#)
            .unwrap();
        assert_eq!(hybrid_mechanism(&p), Err(MechError::MissingAgent));
    }

    #[test]
    fn lookup_by_identifier() {
        for id in MECHANISMS {
            assert_eq!(by_id(id).unwrap().id(), id);
        }
        assert!(matches!(by_id("uniform"), Err(MechError::Unknown(_))));
    }

    #[test]
    fn solve_matches_direct_calls() {
        let p = fixtures::fig1();
        let via = by_id("edge-fair").unwrap().solve(&p).unwrap();
        assert_eq!(via.flow, edge_fair(&p).flow);
        let via = by_id("egalitarian").unwrap().solve(&p).unwrap();
        assert_eq!(via.flow, egalitarian(&p).flow);
    }
}
