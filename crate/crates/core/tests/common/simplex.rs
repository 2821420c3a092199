//! Exact rational simplex, used as an independent oracle. Dense tableau,
//! two phases, Bland's rule, no floats anywhere.

use fairflow::problem::{Capacity, Problem};
use fairflow::rational::{rint, Rat};
use num_traits::{One, Signed, Zero};

/// Maximize `c . x` subject to `rows` of the form `a . x <= b` and `x >= 0`.
/// Returns `None` when infeasible; panics on an unbounded program since the
/// oracle only ever builds bounded ones.
pub fn maximize(c: &[Rat], rows: &[(Vec<Rat>, Rat)]) -> Option<(Rat, Vec<Rat>)> {
    let n = c.len();
    let m = rows.len();
    // columns: n variables, m slacks, then one artificial per negative row
    let negatives: Vec<usize> = (0..m).filter(|&i| rows[i].1.is_negative()).collect();
    let total = n + m + negatives.len();
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rat> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut art_col = n + m;
    for (i, (a, b)) in rows.iter().enumerate() {
        assert_eq!(a.len(), n, "row width mismatch");
        let mut row = vec![Rat::zero(); total];
        let flip = b.is_negative();
        for (j, v) in a.iter().enumerate() {
            row[j] = if flip { -v } else { v.clone() };
        }
        row[n + i] = if flip { -Rat::one() } else { Rat::one() };
        if flip {
            row[art_col] = Rat::one();
            basis.push(art_col);
            art_col += 1;
            rhs.push(-b);
        } else {
            basis.push(n + i);
            rhs.push(b.clone());
        }
        t.push(row);
    }

    if !negatives.is_empty() {
        // phase 1: maximize minus the artificial sum, feasible iff it reaches 0
        let mut red = vec![Rat::zero(); total];
        red[n + m..total].fill(-Rat::one());
        let mut val = Rat::zero();
        reduce_basics(&t, &rhs, &basis, &mut red, &mut val);
        run_simplex(&mut t, &mut rhs, &mut basis, &mut red, &mut val, total);
        if !val.is_zero() {
            return None;
        }
        // artificials left basic at zero could grow again in phase 2; pivot
        // them out now. A row with no real column left is redundant and its
        // artificial stays frozen at zero.
        for i in 0..m {
            if basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| !t[i][j].is_zero()) {
                    pivot(&mut t, &mut rhs, &mut basis, i, j);
                }
            }
        }
    }

    // phase 2 over original columns; artificial columns are banned from entering
    let mut red = vec![Rat::zero(); total];
    red[..n].clone_from_slice(c);
    let mut val = Rat::zero();
    reduce_basics(&t, &rhs, &basis, &mut red, &mut val);
    run_simplex(&mut t, &mut rhs, &mut basis, &mut red, &mut val, n + m);

    let mut x = vec![Rat::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = rhs[i].clone();
        }
    }
    Some((val, x))
}

/// Restore the invariant that reduced costs vanish on basic columns.
fn reduce_basics(t: &[Vec<Rat>], rhs: &[Rat], basis: &[usize], red: &mut [Rat], val: &mut Rat) {
    for (i, &b) in basis.iter().enumerate() {
        if red[b].is_zero() {
            continue;
        }
        let f = red[b].clone();
        for j in 0..red.len() {
            let d = &f * &t[i][j];
            red[j] -= d;
        }
        *val += &f * &rhs[i];
    }
}

fn run_simplex(
    t: &mut [Vec<Rat>],
    rhs: &mut [Rat],
    basis: &mut [usize],
    red: &mut [Rat],
    val: &mut Rat,
    enter_limit: usize,
) {
    loop {
        // Bland: smallest improving column
        let Some(j) = (0..enter_limit).find(|&j| red[j].is_positive()) else {
            return;
        };
        // Bland: smallest ratio, ties to the smallest basis index
        let mut pick: Option<(usize, Rat)> = None;
        for i in 0..t.len() {
            if !t[i][j].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &t[i][j];
            let better = match &pick {
                None => true,
                Some((pi, pr)) => ratio < *pr || (ratio == *pr && basis[i] < basis[*pi]),
            };
            if better {
                pick = Some((i, ratio));
            }
        }
        let (piv, _) = pick.expect("oracle LPs are bounded");
        pivot(t, rhs, basis, piv, j);
        let f = red[j].clone();
        for col in 0..red.len() {
            let d = &f * &t[piv][col];
            red[col] -= d;
        }
        *val += &f * &rhs[piv];
    }
}

fn pivot(t: &mut [Vec<Rat>], rhs: &mut [Rat], basis: &mut [usize], piv: usize, j: usize) {
    let div = t[piv][j].clone();
    for v in t[piv].iter_mut() {
        *v /= &div;
    }
    rhs[piv] /= &div;
    for i in 0..t.len() {
        if i == piv || t[i][j].is_zero() {
            continue;
        }
        let f = t[i][j].clone();
        for col in 0..t[i].len() {
            let d = &f * &t[piv][col];
            t[i][col] -= d;
        }
        let d = &f * &rhs[piv];
        rhs[i] -= d;
    }
    basis[piv] = j;
}

/// Feasibility rows of the max-flow polytope over edge-flow variables:
/// supplier sums, demander sums, and finite edge caps. Width `extra` adds
/// zero columns for auxiliary variables.
pub fn feasibility_rows(p: &Problem, extra: usize) -> Vec<(Vec<Rat>, Rat)> {
    let ne = p.n_edges();
    let width = ne + extra;
    let mut rows = Vec::new();
    for i in 0..p.n_sup() {
        let mut a = vec![Rat::zero(); width];
        for (e, av) in a.iter_mut().take(ne).enumerate() {
            if p.ends(e).0 == i {
                *av = Rat::one();
            }
        }
        rows.push((a, p.sup_peak(i).clone()));
    }
    for j in 0..p.n_dem() {
        let mut a = vec![Rat::zero(); width];
        for (e, av) in a.iter_mut().take(ne).enumerate() {
            if p.ends(e).1 == j {
                *av = Rat::one();
            }
        }
        rows.push((a, p.dem_peak(j).clone()));
    }
    for (e, edge) in p.edges.iter().enumerate() {
        if let Capacity::Finite(cap) = &edge.cap {
            let mut a = vec![Rat::zero(); width];
            a[e] = Rat::one();
            rows.push((a, cap.clone()));
        }
    }
    rows
}

fn push_eq(rows: &mut Vec<(Vec<Rat>, Rat)>, a: Vec<Rat>, b: Rat) {
    rows.push((a.iter().map(|v| -v).collect(), -&b));
    rows.push((a, b));
}

/// Water-filling reference for the lexicographically fair flow, built purely
/// from linear programs: raise a common floor over the undecided edges, pin
/// the edges whose flow cannot exceed it anywhere in the polytope, repeat.
pub fn oracle_edge_fair(p: &Problem) -> Vec<Rat> {
    let ne = p.n_edges();
    if ne == 0 {
        return Vec::new();
    }
    let ones = vec![Rat::one(); ne];
    let (vstar, _) = maximize(&ones, &feasibility_rows(p, 0)).expect("zero flow is feasible");

    let mut pinned: Vec<Option<Rat>> = vec![None; ne];
    while pinned.iter().any(Option::is_none) {
        let active: Vec<usize> = (0..ne).filter(|&e| pinned[e].is_none()).collect();

        // maximize t with every active edge at least t, value held at maximum
        let mut rows = feasibility_rows(p, 1);
        push_eq(&mut rows, pad(&ones, 1), vstar.clone());
        for e in &active {
            let mut a = vec![Rat::zero(); ne + 1];
            a[*e] = -Rat::one();
            a[ne] = Rat::one();
            rows.push((a, Rat::zero()));
        }
        for (e, v) in pinned.iter().enumerate() {
            if let Some(v) = v {
                let mut a = vec![Rat::zero(); ne + 1];
                a[e] = Rat::one();
                push_eq(&mut rows, a, v.clone());
            }
        }
        let mut c = vec![Rat::zero(); ne + 1];
        c[ne] = Rat::one();
        let (tstar, _) = maximize(&c, &rows).expect("floor program is feasible");

        // an active edge is done when it cannot exceed the floor
        let mut rows = feasibility_rows(p, 0);
        push_eq(&mut rows, ones.clone(), vstar.clone());
        for e in &active {
            let mut a = vec![Rat::zero(); ne];
            a[*e] = -Rat::one();
            rows.push((a, -tstar.clone()));
        }
        for (e, v) in pinned.iter().enumerate() {
            if let Some(v) = v {
                let mut a = vec![Rat::zero(); ne];
                a[e] = Rat::one();
                push_eq(&mut rows, a, v.clone());
            }
        }
        let mut stuck = 0usize;
        for e in &active {
            let mut c = vec![Rat::zero(); ne];
            c[*e] = Rat::one();
            let (best, _) = maximize(&c, &rows).expect("floor level is feasible");
            assert!(best >= tstar, "floor must be reachable");
            if best == tstar {
                pinned[*e] = Some(tstar.clone());
                stuck += 1;
            }
        }
        assert!(stuck > 0, "every round must pin an edge");
    }
    pinned.into_iter().map(Option::unwrap).collect()
}

fn pad(a: &[Rat], extra: usize) -> Vec<Rat> {
    let mut v = a.to_vec();
    v.extend(std::iter::repeat_with(Rat::zero).take(extra));
    v
}

#[test]
fn simplex_box() {
    let c = [rint(1), rint(1)];
    let rows = [
        (vec![rint(1), rint(0)], rint(2)),
        (vec![rint(0), rint(1)], rint(3)),
    ];
    let (v, x) = maximize(&c, &rows).unwrap();
    assert_eq!(v, rint(5));
    assert_eq!(x, vec![rint(2), rint(3)]);
}

#[test]
fn simplex_blend() {
    let c = [rint(3), rint(2)];
    let rows = [
        (vec![rint(1), rint(1)], rint(4)),
        (vec![rint(1), rint(0)], rint(2)),
    ];
    let (v, x) = maximize(&c, &rows).unwrap();
    assert_eq!(v, rint(10));
    assert_eq!(x, vec![rint(2), rint(2)]);
}

#[test]
fn simplex_phase_one_equality() {
    // x = 2 encoded as a pair of inequalities, maximizing -x
    let c = [rint(-1)];
    let rows = [
        (vec![rint(1)], rint(2)),
        (vec![rint(-1)], rint(-2)),
    ];
    let (v, x) = maximize(&c, &rows).unwrap();
    assert_eq!(v, rint(-2));
    assert_eq!(x, vec![rint(2)]);
}

#[test]
fn simplex_detects_infeasible() {
    let c = [rint(1)];
    let rows = [
        (vec![rint(1)], rint(1)),
        (vec![rint(-1)], rint(-3)),
    ];
    assert!(maximize(&c, &rows).is_none());
}

#[test]
fn oracle_matches_known_fair_flows() {
    use fairflow::fixtures;
    let p = fixtures::fig3();
    let want = [rint(4), rint(3), fairflow::rational::rat(3, 2), fairflow::rational::rat(3, 2)];
    assert_eq!(oracle_edge_fair(&p), want);
    let p = fixtures::fig2_left();
    assert_eq!(oracle_edge_fair(&p), vec![rint(1), rint(1), rint(2)]);
}
