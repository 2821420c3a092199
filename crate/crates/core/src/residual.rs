//! Residual reachability over rational flows.
//!
//! The max-flow engine works in scaled integers; the flexibility and
//! decomposition analyses only need reachability over the residual graph of a
//! known flow, which this module does directly in rationals.

/// Residual graph of a flow: arc u->v is open forward when flow < upper and
/// open backward when flow > lower.
pub(crate) struct Residual {
    n: usize,
    /// (arc index, target node) pairs per origin node, insertion order.
    adj: Vec<Vec<(usize, usize)>>,
}

impl Residual {
    /// `open_fwd`/`open_rev` report per arc whether the forward and backward
    /// residual directions are open.
    pub fn new(
        n: usize,
        ends: &[(usize, usize)],
        open_fwd: impl Fn(usize) -> bool,
        open_rev: impl Fn(usize) -> bool,
    ) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (a, &(u, v)) in ends.iter().enumerate() {
            if open_fwd(a) {
                adj[u].push((a, v));
            }
            if open_rev(a) {
                adj[v].push((a, u));
            }
        }
        Residual { n, adj }
    }

    #[cfg(test)]
    pub fn reachable_from(&self, starts: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::new();
        for &s in starts {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &(_, v) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Is there a residual path from `from` to `to` that uses neither direction
    /// of arc `skip`?
    pub fn path_avoiding(&self, from: usize, to: usize, skip: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.n];
        seen[from] = true;
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for &(a, v) in &self.adj[u] {
                if a == skip || seen[v] {
                    continue;
                }
                if v == to {
                    return true;
                }
                seen[v] = true;
                queue.push_back(v);
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reachability_follows_open_directions() {
        // Arcs 0->1, 1->2; forward open only on the first, backward on the second.
        let ends = [(0, 1), (1, 2)];
        let r = Residual::new(3, &ends, |a| a == 0, |a| a == 1);
        let seen = r.reachable_from(&[0]);
        assert_eq!(seen, vec![true, true, false]);
        let seen = r.reachable_from(&[2]);
        assert_eq!(seen, vec![false, true, true]);
    }

    #[test]
    fn path_avoiding_skips_both_directions() {
        // Parallel arcs 0->1; avoiding one still leaves the other.
        let ends = [(0, 1), (0, 1)];
        let r = Residual::new(2, &ends, |_| true, |_| true);
        assert!(r.path_avoiding(0, 1, 0));
        let r = Residual::new(2, &[(0, 1)], |_| true, |_| true);
        assert!(!r.path_avoiding(0, 1, 0), "the skipped arc's own reverse must not help");
    }
}
