//! Built-in example networks used by tests and the CLI.

use crate::problem::{Capacity, Edge, Node, Problem};
use crate::rational::{rat, rint, Rat};

fn node(id: &str, peak: Rat) -> Node {
    Node::new(id, peak)
}

fn edge(from: &str, to: &str, cap: Capacity) -> Edge {
    Edge { from: from.into(), to: to.into(), cap }
}

fn inf(from: &str, to: &str) -> Edge {
    edge(from, to, Capacity::Unbounded)
}

/// Eight suppliers, eight demanders, 21 edges, two finite caps of 1/2.
/// The decomposition splits it 4+4 on both sides with cross capacity 1.
pub fn fig1() -> Problem {
    let suppliers = vec![
        node("s1", rint(10)),
        node("s2", rint(8)),
        node("s3", rint(7)),
        node("s4", rint(3)),
        node("s5", rint(2)),
        node("s6", rint(2)),
        node("s7", rint(3)),
        node("s8", rint(3)),
    ];
    let demanders = vec![
        node("d1", rint(12)),
        node("d2", rint(12)),
        node("d3", rint(12)),
        node("d4", rint(12)),
        node("d5", rat(4, 3)),
        node("d6", rat(4, 3)),
        node("d7", rint(2)),
        node("d8", rint(2)),
    ];
    let edges = vec![
        inf("s1", "d1"),
        inf("s2", "d1"),
        inf("s2", "d2"),
        inf("s3", "d2"),
        inf("s3", "d3"),
        inf("s3", "d4"),
        inf("s3", "d5"),
        inf("s4", "d4"),
        inf("s4", "d6"),
        inf("s5", "d5"),
        inf("s5", "d6"),
        inf("s5", "d7"),
        inf("s6", "d5"),
        inf("s6", "d6"),
        inf("s6", "d8"),
        edge("s7", "d3", Capacity::Finite(rat(1, 2))),
        inf("s7", "d7"),
        inf("s7", "d8"),
        edge("s8", "d4", Capacity::Finite(rat(1, 2))),
        inf("s8", "d7"),
        inf("s8", "d8"),
    ];
    Problem::new(suppliers, demanders, edges).unwrap()
}

/// Two suppliers of 3, two demanders of 2, a path of three edges.
/// The small instance where no mechanism can be both consistent and fair.
pub fn fig2_left() -> Problem {
    Problem::new(
        vec![node("s1", rint(3)), node("s2", rint(3))],
        vec![node("d1", rint(2)), node("d2", rint(2))],
        vec![inf("s1", "d1"), inf("s2", "d1"), inf("s2", "d2")],
    )
    .unwrap()
}

/// Suppliers of 3 and 1 sharing a single demander of 2.
pub fn fig2_right() -> Problem {
    Problem::new(
        vec![node("s1", rint(3)), node("s2", rint(1))],
        vec![node("d1", rint(2))],
        vec![inf("s1", "d1"), inf("s2", "d1")],
    )
    .unwrap()
}

/// Three suppliers, three demanders, an isolated pair plus a shared pool.
pub fn fig3() -> Problem {
    Problem::new(
        vec![node("s0", rint(4)), node("s1", rint(6)), node("s2", rint(6))],
        vec![node("d0", rint(6)), node("d1", rint(3)), node("d2", rint(3))],
        vec![inf("s0", "d0"), inf("s1", "d1"), inf("s1", "d2"), inf("s2", "d2")],
    )
    .unwrap()
}

/// Unit peaks and unit caps on a three-edge path between {a,b} and {c,d}.
pub fn fig4() -> Problem {
    let one = || Capacity::Finite(rint(1));
    Problem::new(
        vec![node("a", rint(1)), node("b", rint(1))],
        vec![node("c", rint(1)), node("d", rint(1))],
        vec![edge("a", "c", one()), edge("a", "d", one()), edge("b", "d", one())],
    )
    .unwrap()
}

/// Complete 2x2 network with fractional peaks; its lex-optimal flow is not
/// Lorenz-maximal.
pub fn fig5() -> Problem {
    Problem::new(
        vec![node("s1", rint(3)), node("s2", rat(61, 10))],
        vec![node("d1", rat(22, 5)), node("d2", rat(33, 5))],
        vec![inf("s1", "d1"), inf("s1", "d2"), inf("s2", "d1"), inf("s2", "d2")],
    )
    .unwrap()
}

pub const NAMES: [&str; 6] = ["fig1", "fig2-left", "fig2-right", "fig3", "fig4", "fig5"];

/// Look up a built-in network by name.
pub fn by_name(name: &str) -> Option<Problem> {
    match name {
        "fig1" => Some(fig1()),
        "fig2-left" => Some(fig2_left()),
        "fig2-right" => Some(fig2_right()),
        "fig3" => Some(fig3()),
        "fig4" => Some(fig4()),
        "fig5" => Some(fig5()),
        _ => None,
    }
}
