//! Parametric uniform lower bounds on circulations.
//!
//! Given a circulation network whose designated arcs carry a lower bound of
//! `base + lambda`, [`max_lambda`] finds the largest feasible lambda exactly.
//! Newton iteration from above: at an infeasible lambda the engine's min cut
//! is a violated set in the sense of Hoffman's circulation condition, and its
//! violation `l(into W) - u(out of W)` is affine in lambda, so jumping to that
//! affine function's root makes progress; feasibility of a lambda certifies
//! optimality because the deficit is a maximum of such affine functions and
//! therefore convex.

use crate::engine::{feasible_circulation, ArcDef};
use crate::rational::Rat;
use crate::residual::Residual;
use num_traits::Zero;

#[derive(Debug, Clone)]
pub(crate) struct PArc {
    pub from: usize,
    pub to: usize,
    /// Constant part of the lower bound.
    pub base: Rat,
    /// When set, the lower bound is `base + lambda`.
    pub lam: bool,
    pub upper: Rat,
}

impl PArc {
    pub fn lower_at(&self, lambda: &Rat) -> Rat {
        if self.lam {
            self.base.clone() + lambda
        } else {
            self.base.clone()
        }
    }
}

fn arc_defs(arcs: &[PArc], lambda: &Rat) -> Vec<ArcDef> {
    arcs.iter()
        .map(|a| ArcDef { from: a.from, to: a.to, lower: a.lower_at(lambda), upper: a.upper.clone() })
        .collect()
}

pub(crate) struct LambdaSolution {
    pub lambda: Rat,
    /// A witness circulation at the optimal lambda, arc-aligned.
    pub flows: Vec<Rat>,
}

/// The largest lambda for which the circulation stays feasible, with a witness.
/// Requires at least one lambda arc; panics if even the per-arc trivial bound
/// admits no circulation, which callers rule out by construction.
pub(crate) fn max_lambda(n: usize, arcs: &[PArc]) -> LambdaSolution {
    // Any feasible lambda keeps each lambda arc's lower bound at or below its
    // upper bound, so the smallest such gap is a finite starting overestimate.
    let mut lambda = arcs
        .iter()
        .filter(|a| a.lam)
        .map(|a| a.upper.clone() - &a.base)
        .min()
        .expect("max_lambda needs a lambda arc");
    for _round in 0..arcs.len() + 2 {
        let out = feasible_circulation(n, &arc_defs(arcs, &lambda));
        if out.feasible {
            return LambdaSolution { lambda, flows: out.flows };
        }
        // Hoffman violation of the min-cut set W: l(into W) - u(out of W),
        // affine in lambda with slope = lambda arcs entering W.
        let mut constant = Rat::zero();
        let mut slope: i64 = 0;
        for a in arcs.iter() {
            let from_in = out.cut[a.from];
            let to_in = out.cut[a.to];
            if to_in && !from_in {
                constant += &a.base;
                if a.lam {
                    slope += 1;
                }
            } else if from_in && !to_in {
                constant -= &a.upper;
            }
        }
        let deficit = constant.clone() + Rat::from_integer(slope.into()) * &lambda;
        debug_assert_eq!(deficit, out.deficit, "cut violation must equal the engine deficit");
        assert!(slope > 0, "infeasible cut with no lambda arcs cannot happen above the optimum");
        let root = -constant / Rat::from_integer(slope.into());
        assert!(root < lambda, "Newton step must decrease lambda");
        lambda = root;
    }
    unreachable!("Newton on finitely many cut slopes must terminate");
}

/// For each candidate lambda arc: can its flow strictly exceed `base + lambda`
/// in some circulation that keeps every lambda arc at or above that bound?
/// True when the witness already exceeds, or when a residual cycle through the
/// arc raises it without dropping anything below its bound.
pub(crate) fn exceeders(
    n: usize,
    arcs: &[PArc],
    lambda: &Rat,
    flows: &[Rat],
    candidates: &[usize],
) -> Vec<bool> {
    let ends: Vec<(usize, usize)> = arcs.iter().map(|a| (a.from, a.to)).collect();
    let residual = Residual::new(
        n,
        &ends,
        |a| flows[a] < arcs[a].upper,
        |a| flows[a] > arcs[a].lower_at(lambda),
    );
    candidates
        .iter()
        .map(|&a| {
            flows[a] > arcs[a].lower_at(lambda)
                || (flows[a] < arcs[a].upper
                    && residual.path_avoiding(arcs[a].to, arcs[a].from, a))
        })
        .collect()
}
