//! Terms: joins of access-graph atoms.
//!
//! An atom pairs a base — a variable or a region — with a field graph, and
//! stands for every value reachable from the base along a represented path.
//! A term is a finite set of atoms read as their join; the empty term is the
//! least element `⊥`. Terms are the right-hand sides of the assignments and
//! field constraints that make up an abstract transformation.

use std::collections::BTreeSet;
use std::fmt;

use crate::graph::FieldGraph;
use crate::names::{FieldName, VarName};
use crate::region::Region;

/// The root of an access-graph atom: a program variable or a region.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Base {
    Var(VarName),
    Region(Region),
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::Var(x) => write!(f, "{x}"),
            Base::Region(r) => write!(f, "{r}"),
        }
    }
}

/// A base plus a field graph: `x`, `x.f`, `A.⟨f | (f,g) | g⟩`, …
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub base: Base,
    pub graph: FieldGraph,
}

impl Atom {
    pub fn new(base: Base, graph: FieldGraph) -> Self {
        Atom { base, graph }
    }

    /// The bare variable `x` (empty graph).
    pub fn var(x: impl Into<VarName>) -> Self {
        Atom::new(Base::Var(x.into()), FieldGraph::Empty)
    }

    /// The bare region `A` (empty graph).
    pub fn region(r: Region) -> Self {
        Atom::new(Base::Region(r), FieldGraph::Empty)
    }

    /// The single-field access `base.f`.
    pub fn field(base: Base, f: impl Into<FieldName>) -> Self {
        Atom::new(base, FieldGraph::path(f))
    }

    /// Appends a field graph to this atom's paths.
    pub fn concat(&self, graph: &FieldGraph) -> Atom {
        Atom::new(self.base.clone(), self.graph.concat(graph))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.graph.is_empty() {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}.{}", self.base, self.graph)
        }
    }
}

/// A join of atoms; empty means `⊥`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Term(BTreeSet<Atom>);

impl Term {
    /// The least term `⊥`.
    pub fn bottom() -> Self {
        Term(BTreeSet::new())
    }

    pub fn singleton(atom: Atom) -> Self {
        let mut set = BTreeSet::new();
        set.insert(atom);
        Term(set)
    }

    /// Convenience for the ubiquitous bare-variable term `{x}`.
    pub fn var(x: impl Into<VarName>) -> Self {
        Term::singleton(Atom::var(x))
    }

    /// Convenience for the bare-region term `{A}`.
    pub fn region(r: Region) -> Self {
        Term::singleton(Atom::region(r))
    }

    pub fn is_bottom(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.0.contains(atom)
    }

    pub fn insert(&mut self, atom: Atom) {
        self.0.insert(atom);
    }

    /// Set union: the join of the two terms.
    pub fn join(&self, other: &Term) -> Term {
        let mut set = self.0.clone();
        set.extend(other.0.iter().cloned());
        Term(set)
    }

    /// Distributes graph concatenation over the atoms:
    /// `(a1 ∨ … ∨ an).G = a1.G ∨ … ∨ an.G`; `⊥.G = ⊥`.
    pub fn concat(&self, graph: &FieldGraph) -> Term {
        Term(self.0.iter().map(|a| a.concat(graph)).collect())
    }

    /// True when this term is exactly the bare variable `{x}` — the identity
    /// assignment shape that normalized transformations never store.
    pub fn is_identity_for(&self, x: &VarName) -> bool {
        self.0.len() == 1 && self.0.contains(&Atom::var(x.clone()))
    }
}

impl FromIterator<Atom> for Term {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        Term(iter.into_iter().collect())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("⊥");
        }
        let rendered: Vec<String> = self.0.iter().map(Atom::to_string).collect();
        f.write_str(&rendered.join(" ∨ "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn this_next() -> Atom {
        Atom::field(Base::Var(VarName::this()), "next")
    }

    #[test]
    fn join_is_set_union() {
        let t1 = Term::var("x").join(&Term::var("y"));
        let t2 = Term::var("y").join(&Term::var("x"));
        assert_eq!(t1, t2);
        assert_eq!(t1.len(), 2);
        assert_eq!(Term::bottom().join(&Term::bottom()), Term::bottom());
    }

    #[test]
    fn concat_distributes_over_atoms() {
        // {this, this.next}.next = this.next ∨ this.⟨next | (next,next) | next⟩
        let term: Term = [Atom::var(VarName::this()), this_next()]
            .into_iter()
            .collect();
        let appended = term.concat(&FieldGraph::path("next"));

        let looped = Atom::new(
            Base::Var(VarName::this()),
            FieldGraph::triple(
                "next",
                [(FieldName::new("next"), FieldName::new("next"))],
                "next",
            ),
        );
        let expected: Term = [this_next(), looped].into_iter().collect();
        assert_eq!(appended, expected);
    }

    #[test]
    fn concat_on_bottom_stays_bottom() {
        assert_eq!(
            Term::bottom().concat(&FieldGraph::path("f")),
            Term::bottom()
        );
    }

    #[test]
    fn rendering_uses_join_and_bottom_symbols() {
        assert_eq!(Term::bottom().to_string(), "⊥");
        assert_eq!(Term::var("x").to_string(), "x");
        let t: Term = [Atom::var("x"), this_next()].into_iter().collect();
        assert_eq!(t.to_string(), "this.next ∨ x");
    }

    #[test]
    fn identity_shape_is_detected() {
        assert!(Term::var("x").is_identity_for(&VarName::new("x")));
        assert!(!Term::var("x").is_identity_for(&VarName::new("y")));
        assert!(!Term::bottom().is_identity_for(&VarName::new("x")));
        let two = Term::var("x").join(&Term::var("y"));
        assert!(!two.is_identity_for(&VarName::new("x")));
    }
}
