//! Field graphs: finite descriptions of sets of field-access paths.
//!
//! Unbounded access paths such as `next.next.next…` cannot be enumerated, so
//! the analysis represents a set of paths as a graph over field names with a
//! distinguished head and tail. A path belongs to the graph when it walks
//! from head to tail along the edges. Concatenation of two graphs splices an
//! edge from the first tail to the second head; the result over-approximates
//! the pairwise concatenation of the represented paths, which is what keeps
//! every derived object finite.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::names::FieldName;

/// A set of field-access paths, either the empty path or a head/edges/tail
/// triple in which every node lies on some head-to-tail walk.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FieldGraph {
    /// The empty path: accessing no fields at all.
    Empty,
    /// All paths that walk `head → … → tail` along `edges`. When `edges` is
    /// empty the graph is the single one-field path `head` (and `head == tail`).
    Triple {
        head: FieldName,
        edges: BTreeSet<(FieldName, FieldName)>,
        tail: FieldName,
    },
}

impl FieldGraph {
    pub fn empty() -> Self {
        FieldGraph::Empty
    }

    /// The singleton path consisting of exactly one field access.
    pub fn path(field: impl Into<FieldName>) -> Self {
        let f = field.into();
        FieldGraph::Triple {
            head: f.clone(),
            edges: BTreeSet::new(),
            tail: f,
        }
    }

    /// Builds a head/edges/tail graph. Callers are responsible for the shape
    /// invariant (every node on some head-to-tail walk); it is re-checked in
    /// debug builds.
    pub fn triple(
        head: impl Into<FieldName>,
        edges: impl IntoIterator<Item = (FieldName, FieldName)>,
        tail: impl Into<FieldName>,
    ) -> Self {
        let g = FieldGraph::Triple {
            head: head.into(),
            edges: edges.into_iter().collect(),
            tail: tail.into(),
        };
        debug_assert!(g.is_well_formed(), "malformed field graph: {g}");
        g
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, FieldGraph::Empty)
    }

    /// Concatenates two path sets. The empty graph is the unit; otherwise the
    /// tails of `self` are wired to the heads of `other`:
    /// `⟨h,E,t⟩.⟨h',E',t'⟩ = ⟨h, E ∪ {(t,h')} ∪ E', t'⟩`.
    pub fn concat(&self, other: &FieldGraph) -> FieldGraph {
        let result = match (self, other) {
            (g, FieldGraph::Empty) => g.clone(),
            (FieldGraph::Empty, g) => g.clone(),
            (
                FieldGraph::Triple { head, edges, tail },
                FieldGraph::Triple {
                    head: head2,
                    edges: edges2,
                    tail: tail2,
                },
            ) => {
                let mut joined = edges.clone();
                joined.insert((tail.clone(), head2.clone()));
                joined.extend(edges2.iter().cloned());
                FieldGraph::Triple {
                    head: head.clone(),
                    edges: joined,
                    tail: tail2.clone(),
                }
            }
        };
        debug_assert!(result.is_well_formed(), "concat broke the shape invariant");
        result
    }

    /// Enumerates every represented path of length at most `max_len`, where
    /// length counts field names. The empty graph yields the empty sequence;
    /// a triple with edges yields only walks that traverse at least one edge,
    /// so `⟨f,{(f,f)},f⟩` contains `f.f` but not the one-field path `f`.
    ///
    /// This is an exponential enumeration intended as a test oracle for
    /// `concat`, not as part of the analysis itself.
    pub fn paths_up_to(&self, max_len: usize) -> BTreeSet<Vec<FieldName>> {
        let mut out = BTreeSet::new();
        match self {
            FieldGraph::Empty => {
                out.insert(Vec::new());
            }
            FieldGraph::Triple { head, edges, tail } => {
                if edges.is_empty() {
                    // Single-field path; head == tail by the shape invariant.
                    if max_len >= 1 {
                        out.insert(vec![head.clone()]);
                    }
                    return out;
                }
                // Breadth-first walk enumeration, seeded with the head node.
                let mut queue: VecDeque<Vec<FieldName>> = VecDeque::new();
                queue.push_back(vec![head.clone()]);
                while let Some(walk) = queue.pop_front() {
                    if walk.len() > max_len {
                        continue;
                    }
                    let last = walk.last().expect("walks are never empty");
                    for (a, b) in edges {
                        if a == last {
                            let mut next = walk.clone();
                            next.push(b.clone());
                            if next.len() <= max_len {
                                if b == tail {
                                    out.insert(next.clone());
                                }
                                queue.push_back(next);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Checks the shape invariant: every node of the graph lies on some walk
    /// from head to tail (the trivial walk when there are no edges).
    pub fn is_well_formed(&self) -> bool {
        match self {
            FieldGraph::Empty => true,
            FieldGraph::Triple { head, edges, tail } => {
                if edges.is_empty() {
                    return head == tail;
                }
                let mut nodes: BTreeSet<&FieldName> = BTreeSet::new();
                nodes.insert(head);
                nodes.insert(tail);
                for (a, b) in edges {
                    nodes.insert(a);
                    nodes.insert(b);
                }
                let forward = reachable(head, edges, |e| (&e.0, &e.1));
                let backward = reachable(tail, edges, |e| (&e.1, &e.0));
                // head must reach tail through at least one edge, or coincide
                // with it; every node must be on a head→tail walk.
                let connected = head == tail || forward.contains(tail);
                connected
                    && nodes
                        .iter()
                        .all(|n| (forward.contains(*n) || *n == head) && (backward.contains(*n) || *n == tail))
            }
        }
    }
}

fn reachable<'a>(
    from: &'a FieldName,
    edges: &'a BTreeSet<(FieldName, FieldName)>,
    orient: impl Fn(&'a (FieldName, FieldName)) -> (&'a FieldName, &'a FieldName),
) -> BTreeSet<&'a FieldName> {
    let mut seen: BTreeSet<&FieldName> = BTreeSet::new();
    let mut queue: VecDeque<&FieldName> = VecDeque::new();
    queue.push_back(from);
    while let Some(n) = queue.pop_front() {
        for e in edges {
            let (src, dst) = orient(e);
            if src == n && seen.insert(dst) {
                queue.push_back(dst);
            }
        }
    }
    seen
}

impl fmt::Display for FieldGraph {
    /// Renders `⟨head | (a,b),(c,d) | tail⟩` with the edges in sorted order;
    /// the empty graph renders as `ε` and a single-field graph as the bare
    /// field name.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldGraph::Empty => f.write_str("ε"),
            FieldGraph::Triple { head, edges, tail } => {
                if edges.is_empty() {
                    return write!(f, "{head}");
                }
                let rendered: Vec<String> =
                    edges.iter().map(|(a, b)| format!("({a},{b})")).collect();
                write!(f, "⟨{head} | {} | {tail}⟩", rendered.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(name: &str) -> FieldName {
        FieldName::new(name)
    }

    fn paths(graph: &FieldGraph, k: usize) -> BTreeSet<Vec<FieldName>> {
        graph.paths_up_to(k)
    }

    fn path_set(items: &[&[&str]]) -> BTreeSet<Vec<FieldName>> {
        items
            .iter()
            .map(|p| p.iter().map(|s| f(s)).collect())
            .collect()
    }

    #[test]
    fn empty_is_the_concat_unit() {
        let g = FieldGraph::path("f");
        assert_eq!(g.concat(&FieldGraph::empty()), g);
        assert_eq!(FieldGraph::empty().concat(&g), g);
        assert_eq!(
            FieldGraph::empty().concat(&FieldGraph::empty()),
            FieldGraph::empty()
        );
    }

    #[test]
    fn concat_of_singleton_paths_splices_an_edge() {
        let next = FieldGraph::path("next");
        let twice = next.concat(&next);
        assert_eq!(
            twice,
            FieldGraph::triple("next", [(f("next"), f("next"))], "next")
        );
    }

    #[test]
    fn concat_of_distinct_paths_keeps_both_nodes() {
        let fg = FieldGraph::path("f").concat(&FieldGraph::path("g"));
        assert_eq!(fg, FieldGraph::triple("f", [(f("f"), f("g"))], "g"));
        assert_eq!(paths(&fg, 4), path_set(&[&["f", "g"]]));
    }

    #[test]
    fn empty_graph_has_exactly_the_empty_path() {
        assert_eq!(paths(&FieldGraph::empty(), 3), path_set(&[&[]]));
    }

    #[test]
    fn singleton_graph_has_exactly_its_field() {
        assert_eq!(paths(&FieldGraph::path("v"), 3), path_set(&[&["v"]]));
    }

    #[test]
    fn self_loop_represents_paths_of_two_or_more_fields() {
        let looped = FieldGraph::path("f").concat(&FieldGraph::path("f"));
        assert_eq!(
            paths(&looped, 3),
            path_set(&[&["f", "f"], &["f", "f", "f"]])
        );
    }

    #[test]
    fn loop_then_exit_enumerates_growing_walks() {
        let g = FieldGraph::triple("n", [(f("n"), f("n")), (f("n"), f("v"))], "v");
        assert_eq!(
            paths(&g, 4),
            path_set(&[&["n", "v"], &["n", "n", "v"], &["n", "n", "n", "v"]])
        );
    }

    #[test]
    fn rendering_is_sorted_and_stable() {
        assert_eq!(FieldGraph::empty().to_string(), "ε");
        assert_eq!(FieldGraph::path("next").to_string(), "next");
        let g = FieldGraph::triple("n", [(f("n"), f("v")), (f("n"), f("n"))], "v");
        assert_eq!(g.to_string(), "⟨n | (n,n),(n,v) | v⟩");
    }

    #[test]
    fn shape_invariant_accepts_only_connected_graphs() {
        assert!(FieldGraph::path("f").is_well_formed());
        let disconnected = FieldGraph::Triple {
            head: f("a"),
            edges: [(f("c"), f("d"))].into_iter().collect(),
            tail: f("b"),
        };
        assert!(!disconnected.is_well_formed());
        let unreachable_tail = FieldGraph::Triple {
            head: f("a"),
            edges: BTreeSet::new(),
            tail: f("b"),
        };
        assert!(!unreachable_tail.is_well_formed());
    }
}
