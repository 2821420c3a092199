//! Preorders on value vectors: leximin and Lorenz.

use crate::rational::{format_number, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot compare vectors of lengths {a} and {b}")]
pub struct LengthMismatch {
    pub a: usize,
    pub b: usize,
}

/// Outcome of a leximin comparison. `ADominates` means `a` is leximin-better:
/// at the first coordinate where the ascending rearrangements differ, `a` is larger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexOrdering {
    ADominates { coordinate: usize, a_value: Rat, b_value: Rat },
    BDominates { coordinate: usize, a_value: Rat, b_value: Rat },
    Equal,
}

fn sorted(v: &[Rat]) -> Vec<Rat> {
    let mut s = v.to_vec();
    s.sort();
    s
}

/// Leximin-compare two vectors of equal length: sort both ascending and compare
/// componentwise; the first difference decides, larger winning.
pub fn lex_compare(a: &[Rat], b: &[Rat]) -> Result<LexOrdering, LengthMismatch> {
    if a.len() != b.len() {
        return Err(LengthMismatch { a: a.len(), b: b.len() });
    }
    let (sa, sb) = (sorted(a), sorted(b));
    for (k, (x, y)) in sa.iter().zip(&sb).enumerate() {
        if x != y {
            return Ok(if x > y {
                LexOrdering::ADominates { coordinate: k, a_value: x.clone(), b_value: y.clone() }
            } else {
                LexOrdering::BDominates { coordinate: k, a_value: x.clone(), b_value: y.clone() }
            });
        }
    }
    Ok(LexOrdering::Equal)
}

/// Outcome of a Lorenz comparison. Dominance means every ascending prefix sum
/// is at least as large, with at least one strictly larger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LorenzOrdering {
    ADominates,
    BDominates,
    Equal,
    /// The preorder does not relate the vectors; the note says why
    /// (length mismatch, total mismatch, or crossing prefix sums).
    Incomparable { note: String },
}

/// Lorenz-compare two vectors: requires equal lengths and equal totals, then
/// compares ascending prefix sums. Degenerate inputs come back `Incomparable`
/// with an explanatory note rather than an error.
pub fn lorenz_compare(a: &[Rat], b: &[Rat]) -> LorenzOrdering {
    if a.len() != b.len() {
        return LorenzOrdering::Incomparable {
            note: format!("unequal lengths ({} vs {})", a.len(), b.len()),
        };
    }
    let (sa, sb) = (sorted(a), sorted(b));
    let total_a: Rat = sa.iter().sum();
    let total_b: Rat = sb.iter().sum();
    if total_a != total_b {
        return LorenzOrdering::Incomparable {
            note: format!("unequal totals ({} vs {})", format_number(&total_a), format_number(&total_b)),
        };
    }
    let mut a_ahead = false;
    let mut b_ahead = false;
    let mut pa = Rat::from_integer(0.into());
    let mut pb = pa.clone();
    for (k, (x, y)) in sa.iter().zip(&sb).enumerate() {
        pa += x;
        pb += y;
        if pa > pb {
            a_ahead = true;
        } else if pb > pa {
            b_ahead = true;
        }
        if a_ahead && b_ahead {
            return LorenzOrdering::Incomparable {
                note: format!("prefix sums cross by position {k}"),
            };
        }
    }
    match (a_ahead, b_ahead) {
        (true, false) => LorenzOrdering::ADominates,
        (false, true) => LorenzOrdering::BDominates,
        (false, false) => LorenzOrdering::Equal,
        (true, true) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rint};

    fn v(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| rint(x)).collect()
    }

    #[test]
    fn lex_orders_by_sorted_first_difference() {
        let r = lex_compare(&v(&[3, 1, 2]), &v(&[1, 1, 4])).unwrap();
        assert_eq!(
            r,
            LexOrdering::ADominates { coordinate: 1, a_value: rint(2), b_value: rint(1) }
        );
        let r = lex_compare(&v(&[1, 2, 3]), &v(&[3, 2, 1])).unwrap();
        assert_eq!(r, LexOrdering::Equal, "leximin ignores arrangement");
        let r = lex_compare(&[rat(1, 2), rint(5)], &[rat(2, 3), rint(1)]).unwrap();
        assert!(matches!(r, LexOrdering::BDominates { coordinate: 0, .. }));
    }

    #[test]
    fn lex_rejects_length_mismatch() {
        assert_eq!(lex_compare(&v(&[1]), &v(&[1, 2])), Err(LengthMismatch { a: 1, b: 2 }));
    }

    #[test]
    fn lorenz_dominance_and_equality() {
        // (2,2) Lorenz-dominates (1,3): same total, fairer spread.
        assert_eq!(lorenz_compare(&v(&[2, 2]), &v(&[3, 1])), LorenzOrdering::ADominates);
        assert_eq!(lorenz_compare(&v(&[3, 1]), &v(&[2, 2])), LorenzOrdering::BDominates);
        assert_eq!(lorenz_compare(&v(&[1, 3]), &v(&[3, 1])), LorenzOrdering::Equal);
    }

    #[test]
    fn lorenz_incomparable_cases() {
        match lorenz_compare(&v(&[1, 2]), &v(&[1, 2, 3])) {
            LorenzOrdering::Incomparable { note } => assert!(note.contains("lengths")),
            other => panic!("{other:?}"),
        }
        match lorenz_compare(&v(&[1, 2]), &v(&[1, 3])) {
            LorenzOrdering::Incomparable { note } => assert!(note.contains("totals")),
            other => panic!("{other:?}"),
        }
        // Prefixes 0,3,6 vs 1,2,6: b ahead at position 0, a ahead at position 1.
        match lorenz_compare(&v(&[0, 3, 3]), &v(&[1, 1, 4])) {
            LorenzOrdering::Incomparable { note } => assert!(note.contains("cross"), "{note}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lorenz_is_reflexive_on_rearrangements() {
        assert_eq!(lorenz_compare(&v(&[5, 0, 2]), &v(&[0, 2, 5])), LorenzOrdering::Equal);
    }
}
