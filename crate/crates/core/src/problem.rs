//! Problem instances: bipartite supply/demand networks and flows on them.

use crate::rational::{format_number, parse_number, serde_rat, serde_rat_vec, Rat};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// One side's participant: an id and a peak quantity (supply or demand).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    #[serde(with = "serde_rat")]
    pub peak: Rat,
}

impl Node {
    pub fn new(id: impl Into<String>, peak: Rat) -> Self {
        Node { id: id.into(), peak }
    }
}

/// Edge capacity: a finite bound or unbounded.
///
/// Unbounded never means infinite in computations; it materializes to
/// min(supply peak, demand peak) of the endpoints, which no feasible flow can
/// exceed anyway.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Capacity {
    Finite(Rat),
    Unbounded,
}

impl Serialize for Capacity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Capacity::Finite(r) => s.serialize_str(&format_number(r)),
            Capacity::Unbounded => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == "inf" {
            return Ok(Capacity::Unbounded);
        }
        parse_number(&text).map(Capacity::Finite).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub cap: Capacity,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("invalid document: {0}")]
    Json(String),
    #[error("negative quantity at {key}: {value}")]
    Negative { key: String, value: String },
    #[error("dangling edge endpoint at edges[{index}]: no {side} with id {id:?}")]
    DanglingEndpoint { index: usize, side: &'static str, id: String },
    #[error("duplicate edge ({from}, {to}) at edges[{index}]")]
    DuplicateEdge { index: usize, from: String, to: String },
    #[error("duplicate {side} id {id:?}")]
    DuplicateId { side: &'static str, id: String },
}

#[derive(Serialize, Deserialize)]
struct Doc {
    suppliers: Vec<Node>,
    demanders: Vec<Node>,
    edges: Vec<Edge>,
}

/// A validated problem instance.
///
/// Node and edge order is declaration order and is significant: every vector in
/// this crate (flows, allocations, traces) is aligned to it, and all iteration
/// tie-breaks follow it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub suppliers: Vec<Node>,
    pub demanders: Vec<Node>,
    pub edges: Vec<Edge>,
    sup_index: HashMap<String, usize>,
    dem_index: HashMap<String, usize>,
    ends: Vec<(usize, usize)>,
}

impl Problem {
    pub fn new(suppliers: Vec<Node>, demanders: Vec<Node>, edges: Vec<Edge>) -> Result<Self, ParseError> {
        let mut sup_index = HashMap::new();
        for (i, n) in suppliers.iter().enumerate() {
            if n.peak < Rat::zero() {
                return Err(ParseError::Negative {
                    key: format!("suppliers[{i}].peak (id {:?})", n.id),
                    value: format_number(&n.peak),
                });
            }
            if sup_index.insert(n.id.clone(), i).is_some() {
                return Err(ParseError::DuplicateId { side: "supplier", id: n.id.clone() });
            }
        }
        let mut dem_index = HashMap::new();
        for (j, n) in demanders.iter().enumerate() {
            if n.peak < Rat::zero() {
                return Err(ParseError::Negative {
                    key: format!("demanders[{j}].peak (id {:?})", n.id),
                    value: format_number(&n.peak),
                });
            }
            if dem_index.insert(n.id.clone(), j).is_some() {
                return Err(ParseError::DuplicateId { side: "demander", id: n.id.clone() });
            }
        }
        let mut ends = Vec::with_capacity(edges.len());
        let mut seen = HashMap::new();
        for (k, e) in edges.iter().enumerate() {
            let i = *sup_index.get(&e.from).ok_or_else(|| ParseError::DanglingEndpoint {
                index: k,
                side: "supplier",
                id: e.from.clone(),
            })?;
            let j = *dem_index.get(&e.to).ok_or_else(|| ParseError::DanglingEndpoint {
                index: k,
                side: "demander",
                id: e.to.clone(),
            })?;
            if let Capacity::Finite(c) = &e.cap {
                if *c < Rat::zero() {
                    return Err(ParseError::Negative {
                        key: format!("edges[{k}].cap (({}, {}))", e.from, e.to),
                        value: format_number(c),
                    });
                }
            }
            if seen.insert((i, j), k).is_some() {
                return Err(ParseError::DuplicateEdge { index: k, from: e.from.clone(), to: e.to.clone() });
            }
            ends.push((i, j));
        }
        Ok(Problem { suppliers, demanders, edges, sup_index, dem_index, ends })
    }

    /// Parse the JSON document form: `{"suppliers": [{"id", "peak"}], "demanders": [...],
    /// "edges": [{"from", "to", "cap"}]}` with numbers as strings and `"inf"` for
    /// unbounded capacity.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: Doc = serde_path_to_error::deserialize(de)
            .map_err(|e| ParseError::Json(format!("{} (at {})", e.inner(), e.path())))?;
        Problem::new(doc.suppliers, doc.demanders, doc.edges)
    }

    pub fn to_json(&self) -> String {
        let doc = Doc {
            suppliers: self.suppliers.clone(),
            demanders: self.demanders.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("problem serialization cannot fail")
    }

    pub fn n_sup(&self) -> usize {
        self.suppliers.len()
    }

    pub fn n_dem(&self) -> usize {
        self.demanders.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn sup_peak(&self, i: usize) -> &Rat {
        &self.suppliers[i].peak
    }

    pub fn dem_peak(&self, j: usize) -> &Rat {
        &self.demanders[j].peak
    }

    /// Endpoint indices (supplier, demander) of edge `e`.
    pub fn ends(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    /// Materialized capacity bound of edge `e`: the finite cap, or
    /// min(supply peak, demand peak) when unbounded.
    pub fn cap_bound(&self, e: usize) -> Rat {
        let (i, j) = self.ends[e];
        match &self.edges[e].cap {
            Capacity::Finite(c) => c.clone(),
            Capacity::Unbounded => self.suppliers[i].peak.clone().min(self.demanders[j].peak.clone()),
        }
    }

    pub fn supplier_index(&self, id: &str) -> Option<usize> {
        self.sup_index.get(id).copied()
    }

    pub fn demander_index(&self, id: &str) -> Option<usize> {
        self.dem_index.get(id).copied()
    }

    pub fn edge_index(&self, from: &str, to: &str) -> Option<usize> {
        let i = self.supplier_index(from)?;
        let j = self.demander_index(to)?;
        self.ends.iter().position(|&p| p == (i, j))
    }

    pub fn edge_label(&self, e: usize) -> String {
        format!("({}, {})", self.edges[e].from, self.edges[e].to)
    }

    pub fn total_supply(&self) -> Rat {
        self.suppliers.iter().map(|n| &n.peak).sum()
    }

    pub fn total_demand(&self) -> Rat {
        self.demanders.iter().map(|n| &n.peak).sum()
    }

    /// Copy with one supply peak replaced. Panics if the new peak is negative.
    pub fn with_sup_peak(&self, i: usize, peak: Rat) -> Problem {
        assert!(peak >= Rat::zero());
        let mut p = self.clone();
        p.suppliers[i].peak = peak;
        p
    }

    /// Copy with one demand peak replaced. Panics if the new peak is negative.
    pub fn with_dem_peak(&self, j: usize, peak: Rat) -> Problem {
        assert!(peak >= Rat::zero());
        let mut p = self.clone();
        p.demanders[j].peak = peak;
        p
    }

    /// Copy with one edge's capacity replaced.
    pub fn with_cap(&self, e: usize, cap: Capacity) -> Problem {
        if let Capacity::Finite(c) = &cap {
            assert!(*c >= Rat::zero());
        }
        let mut p = self.clone();
        p.edges[e].cap = cap;
        p
    }

    /// The reduced problem after edge `e`, carrying `amount`, leaves: the edge is
    /// deleted and both endpoint peaks are debited by `amount`.
    ///
    /// Panics if the debit would drive a peak negative, which cannot happen when
    /// `amount` is the edge's flow in a feasible flow.
    pub fn reduced_without_edge(&self, e: usize, amount: &Rat) -> Problem {
        let (i, j) = self.ends[e];
        let mut suppliers = self.suppliers.clone();
        let mut demanders = self.demanders.clone();
        suppliers[i].peak -= amount;
        demanders[j].peak -= amount;
        assert!(suppliers[i].peak >= Rat::zero() && demanders[j].peak >= Rat::zero());
        let mut edges = self.edges.clone();
        edges.remove(e);
        Problem::new(suppliers, demanders, edges).expect("reduction of a valid problem stays valid")
    }
}

impl Serialize for Problem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let doc = Doc {
            suppliers: self.suppliers.clone(),
            demanders: self.demanders.clone(),
            edges: self.edges.clone(),
        };
        doc.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Problem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = Doc::deserialize(d)?;
        Problem::new(doc.suppliers, doc.demanders, doc.edges).map_err(serde::de::Error::custom)
    }
}

/// Free-function form of [`Problem::parse`].
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    Problem::parse(text)
}

/// An edge flow, aligned to the problem's edge declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    #[serde(with = "serde_rat_vec")]
    pub z: Vec<Rat>,
}

impl Flow {
    pub fn zero(p: &Problem) -> Flow {
        Flow { z: vec![Rat::zero(); p.n_edges()] }
    }

    pub fn value(&self) -> Rat {
        self.z.iter().sum()
    }
}

/// Node totals induced by a flow, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    #[serde(with = "serde_rat_vec")]
    pub supply: Vec<Rat>,
    #[serde(with = "serde_rat_vec")]
    pub demand: Vec<Rat>,
}

impl Allocation {
    pub fn of(p: &Problem, f: &Flow) -> Allocation {
        assert_eq!(f.z.len(), p.n_edges(), "flow length mismatch");
        let mut supply = vec![Rat::zero(); p.n_sup()];
        let mut demand = vec![Rat::zero(); p.n_dem()];
        for (e, z) in f.z.iter().enumerate() {
            let (i, j) = p.ends(e);
            supply[i] += z;
            demand[j] += z;
        }
        Allocation { supply, demand }
    }
}

/// First violated feasibility constraint of a flow, by constraint kind then index.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeasibilityViolation {
    #[error("flow has {got} entries, problem has {want} edges")]
    WrongLength { got: usize, want: usize },
    #[error("edge {edge} carries negative flow {flow}")]
    NegativeEdge { edge: String, flow: String },
    #[error("edge {edge} carries {flow}, above its capacity bound {cap}")]
    EdgeOverCap { edge: String, flow: String, cap: String },
    #[error("supplier {id} ships {total}, above its peak {peak}")]
    SupplierOverPeak { id: String, total: String, peak: String },
    #[error("demander {id} receives {total}, above its peak {peak}")]
    DemanderOverPeak { id: String, total: String, peak: String },
}

/// Check a flow against the box and node constraints. Returns the first
/// violated constraint: edges in declaration order, then suppliers, then demanders.
pub fn check_feasible(p: &Problem, f: &Flow) -> Result<(), FeasibilityViolation> {
    if f.z.len() != p.n_edges() {
        return Err(FeasibilityViolation::WrongLength { got: f.z.len(), want: p.n_edges() });
    }
    for (e, z) in f.z.iter().enumerate() {
        if *z < Rat::zero() {
            return Err(FeasibilityViolation::NegativeEdge {
                edge: p.edge_label(e),
                flow: format_number(z),
            });
        }
        let cap = p.cap_bound(e);
        if *z > cap {
            return Err(FeasibilityViolation::EdgeOverCap {
                edge: p.edge_label(e),
                flow: format_number(z),
                cap: format_number(&cap),
            });
        }
    }
    let alloc = Allocation::of(p, f);
    for (i, x) in alloc.supply.iter().enumerate() {
        if x > p.sup_peak(i) {
            return Err(FeasibilityViolation::SupplierOverPeak {
                id: p.suppliers[i].id.clone(),
                total: format_number(x),
                peak: format_number(p.sup_peak(i)),
            });
        }
    }
    for (j, y) in alloc.demand.iter().enumerate() {
        if y > p.dem_peak(j) {
            return Err(FeasibilityViolation::DemanderOverPeak {
                id: p.demanders[j].id.clone(),
                total: format_number(y),
                peak: format_number(p.dem_peak(j)),
            });
        }
    }
    Ok(())
}
