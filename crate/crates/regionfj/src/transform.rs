//! Abstract transformations: reusable descriptions of how a piece of code
//! rewrites a typing environment.
//!
//! A transformation has two kinds of entries. An *assignment* `x :↦ u` says
//! variable `x` ends up typed by term `u` evaluated in the initial
//! environment. A *constraint* `κ :≥ v` (with `κ` an access-graph atom whose
//! graph is nonempty) says the fields reached through `κ` absorb at least
//! `v` — a weak update, since other objects may share those fields.
//!
//! Transformations form a small algebra: `substitute_*` rewrites entries by
//! an earlier transformation, `compose` chains two transformations into one,
//! and `join` over-approximates a pair of branches. Stored entries are kept in normal
//! form: identity assignments and `⊥` constraints are never stored, so the
//! total-function view (`lookup`) can fill them in.

use std::collections::BTreeMap;
use std::fmt;

use crate::names::VarName;
use crate::term::{Atom, Term};

/// A lookup key: a variable (assignments) or a nonempty-graph atom
/// (constraints).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Key {
    Var(VarName),
    Field(Atom),
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Key::Var(x) => write!(f, "{x}"),
            Key::Field(a) => write!(f, "{a}"),
        }
    }
}

/// A finite set of assignments and weak field constraints, in normal form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Transform {
    assigns: BTreeMap<VarName, Term>,
    constraints: BTreeMap<Atom, Term>,
}

impl Transform {
    /// The identity transformation `[]`.
    pub fn identity() -> Self {
        Transform::default()
    }

    /// Builder-style insertion of an assignment; identity assignments are
    /// dropped, keeping the normal form.
    pub fn with_assign(mut self, x: impl Into<VarName>, u: Term) -> Self {
        self.insert_assign(x.into(), u);
        self
    }

    /// Builder-style insertion of a constraint.
    pub fn with_constraint(mut self, key: Atom, v: Term) -> Self {
        self.insert_constraint(key, v);
        self
    }

    /// Records `x :↦ u`, joining with any existing assignment for `x` and
    /// dropping the entry if it is the identity `x :↦ {x}`.
    pub fn insert_assign(&mut self, x: VarName, u: Term) {
        let joined = match self.assigns.remove(&x) {
            Some(old) => old.join(&u),
            None => u,
        };
        if !joined.is_identity_for(&x) {
            self.assigns.insert(x, joined);
        }
    }

    /// Replaces any existing assignment for `x` instead of joining — the
    /// shape composition needs when later updates overwrite earlier ones.
    fn set_assign(&mut self, x: VarName, u: Term) {
        if u.is_identity_for(&x) {
            self.assigns.remove(&x);
        } else {
            self.assigns.insert(x, u);
        }
    }

    /// Records `key :≥ v`, joining with any existing constraint on the same
    /// key and dropping `⊥` values. `key` must carry a nonempty graph.
    pub fn insert_constraint(&mut self, key: Atom, v: Term) {
        assert!(
            !key.graph.is_empty(),
            "constraint keys must access at least one field: {key}"
        );
        if v.is_bottom() {
            return;
        }
        let joined = match self.constraints.remove(&key) {
            Some(old) => old.join(&v),
            None => v,
        };
        self.constraints.insert(key, joined);
    }

    pub fn is_identity(&self) -> bool {
        self.assigns.is_empty() && self.constraints.is_empty()
    }

    /// Total-function view: unassigned variables map to themselves,
    /// unconstrained keys to `⊥`.
    pub fn lookup(&self, key: &Key) -> Term {
        match key {
            Key::Var(x) => self
                .assigns
                .get(x)
                .cloned()
                .unwrap_or_else(|| Term::var(x.clone())),
            Key::Field(a) => self.constraints.get(a).cloned().unwrap_or_default(),
        }
    }

    pub fn assignments(&self) -> impl Iterator<Item = (&VarName, &Term)> {
        self.assigns.iter()
    }

    pub fn constraints(&self) -> impl Iterator<Item = (&Atom, &Term)> {
        self.constraints.iter()
    }

    pub fn assigns_var(&self, x: &VarName) -> bool {
        self.assigns.contains_key(x)
    }

    /// Drops assignments whose key fails `keep`, preserving constraints.
    /// Used to restrict a fully composed method-body transformation to the
    /// method's interface variables.
    pub fn retain_assigns(&mut self, keep: impl Fn(&VarName) -> bool) {
        self.assigns.retain(|x, _| keep(x));
    }

    /// Checks the stored normal form: no identity assignments, no `⊥` or
    /// empty-graph constraints.
    pub fn is_normal_form(&self) -> bool {
        self.assigns.iter().all(|(x, u)| !u.is_identity_for(x))
            && self
                .constraints
                .iter()
                .all(|(k, v)| !k.graph.is_empty() && !v.is_bottom())
    }

    /// Composes `self` after `earlier`: the returned transformation
    /// over-approximates running `earlier` first and `self` second.
    ///
    /// Entries of `self` are substituted by `earlier`; `earlier`'s own
    /// entries ride along except assignments that `self` overwrites. Collided
    /// constraint keys merge by join, and the result is re-normalized.
    pub fn compose(&self, earlier: &Transform) -> Transform {
        let mut out = Transform::identity();
        // self's assignments, rewritten to speak about the initial state.
        for (x, u) in &self.assigns {
            out.set_assign(x.clone(), substitute_term(u, earlier));
        }
        // earlier's assignments survive unless self assigned the same name.
        for (y, s) in &earlier.assigns {
            if !self.assigns.contains_key(y) {
                out.set_assign(y.clone(), s.clone());
            }
        }
        // self's constraints, keys and values substituted by earlier …
        for (key, v) in &self.constraints {
            for (new_key, new_v) in substitute_constraint(key, v, earlier) {
                out.insert_constraint(new_key, new_v);
            }
        }
        // … plus earlier's constraints unchanged.
        for (key, v) in &earlier.constraints {
            out.insert_constraint(key.clone(), v.clone());
        }
        debug_assert!(out.is_normal_form());
        out
    }

    /// Joins two transformations componentwise over the union of their
    /// domains, using the total-function view for the missing side. The
    /// result over-approximates applying either transformation.
    pub fn join(&self, other: &Transform) -> Transform {
        let mut out = Transform::identity();
        let vars: std::collections::BTreeSet<&VarName> = self
            .assigns
            .keys()
            .chain(other.assigns.keys())
            .collect();
        for x in vars {
            let joined = self
                .lookup(&Key::Var((*x).clone()))
                .join(&other.lookup(&Key::Var((*x).clone())));
            out.set_assign((*x).clone(), joined);
        }
        let keys: std::collections::BTreeSet<&Atom> = self
            .constraints
            .keys()
            .chain(other.constraints.keys())
            .collect();
        for key in keys {
            let joined = self
                .lookup(&Key::Field((*key).clone()))
                .join(&other.lookup(&Key::Field((*key).clone())));
            out.insert_constraint((*key).clone(), joined);
        }
        debug_assert!(out.is_normal_form());
        out
    }
}

/// Rewrites a term by a transformation: every variable atom `x.G` with `x`
/// assigned in `theta` becomes `theta(x).G`; region atoms and unassigned
/// variables pass through.
pub fn substitute_term(u: &Term, theta: &Transform) -> Term {
    let mut out = Term::bottom();
    for atom in u.atoms() {
        match &atom.base {
            crate::term::Base::Var(x) => {
                if let Some(bound) = theta.assigns.get(x) {
                    for a in bound.concat(&atom.graph).atoms() {
                        out.insert(a.clone());
                    }
                } else {
                    out.insert(atom.clone());
                }
            }
            crate::term::Base::Region(_) => {
                out.insert(atom.clone());
            }
        }
    }
    out
}

/// Rewrites one constraint by a transformation. The key is substituted as a
/// one-atom term, which may fan out into several constraints (or none, when
/// the base was assigned `⊥`); the value is substituted alongside.
pub fn substitute_constraint(
    key: &Atom,
    value: &Term,
    theta: &Transform,
) -> Vec<(Atom, Term)> {
    let new_value = substitute_term(value, theta);
    substitute_term(&Term::singleton(key.clone()), theta)
        .atoms()
        .map(|a| (a.clone(), new_value.clone()))
        .collect()
}

impl fmt::Display for Transform {
    /// Renders `[x :↦ u, …, κ :≥ v, …]`, assignments sorted by variable and
    /// constraints by key.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (x, u) in &self.assigns {
            parts.push(format!("{x} :↦ {u}"));
        }
        for (key, v) in &self.constraints {
            parts.push(format!("{key} :≥ {v}"));
        }
        write!(f, "[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FieldGraph;
    use crate::region::Region;
    use crate::term::Base;

    fn v(x: &str) -> VarName {
        VarName::new(x)
    }

    fn var_field(x: &str, f: &str) -> Atom {
        Atom::field(Base::Var(v(x)), f)
    }

    fn region_c() -> Region {
        Region::created("C")
    }

    #[test]
    fn lookup_defaults_to_identity_and_bottom() {
        let sigma = Transform::identity().with_assign("x", Term::singleton(var_field("y", "f")));
        assert_eq!(
            sigma.lookup(&Key::Var(v("x"))),
            Term::singleton(var_field("y", "f"))
        );
        assert_eq!(sigma.lookup(&Key::Var(v("y"))), Term::var("y"));
        assert_eq!(
            sigma.lookup(&Key::Field(Atom::field(
                Base::Region(Region::created("A")),
                "f"
            ))),
            Term::bottom()
        );
    }

    #[test]
    fn identity_assignments_are_never_stored() {
        let sigma = Transform::identity().with_assign("x", Term::var("x"));
        assert!(sigma.is_identity());
        assert!(sigma.is_normal_form());
    }

    #[test]
    fn bottom_constraints_are_never_stored() {
        let key = var_field("y", "f");
        let sigma = Transform::identity().with_constraint(key, Term::bottom());
        assert!(sigma.is_identity());
    }

    #[test]
    fn substitution_rewrites_variable_bases_only() {
        // (y.f)[y :↦ C] = C.f ; regions and unassigned variables unchanged.
        let theta = Transform::identity().with_assign("y", Term::region(region_c()));
        let rewritten = substitute_term(&Term::singleton(var_field("y", "f")), &theta);
        assert_eq!(
            rewritten,
            Term::singleton(Atom::field(Base::Region(region_c()), "f"))
        );
        let untouched = substitute_term(&Term::singleton(var_field("z", "f")), &theta);
        assert_eq!(untouched, Term::singleton(var_field("z", "f")));
    }

    #[test]
    fn substitution_concatenates_graphs() {
        // (x.g)[x :↦ y.f] = y.⟨f | (f,g) | g⟩
        let theta =
            Transform::identity().with_assign("x", Term::singleton(var_field("y", "f")));
        let rewritten = substitute_term(&Term::singleton(var_field("x", "g")), &theta);
        let expected = Atom::new(
            Base::Var(v("y")),
            FieldGraph::path("f").concat(&FieldGraph::path("g")),
        );
        assert_eq!(rewritten, Term::singleton(expected));
    }

    #[test]
    fn constraint_substitution_rewrites_key_and_value() {
        // (y.f :≥ x)[y :↦ C, x :↦ y.f] = {C.f :≥ y.f}
        let theta = Transform::identity()
            .with_assign("y", Term::region(region_c()))
            .with_assign("x", Term::singleton(var_field("y", "f")));
        let rewritten = substitute_constraint(&var_field("y", "f"), &Term::var("x"), &theta);
        assert_eq!(
            rewritten,
            vec![(
                Atom::field(Base::Region(region_c()), "f"),
                Term::singleton(var_field("y", "f"))
            )]
        );
    }

    #[test]
    fn constraint_substitution_can_fan_out_or_vanish() {
        let key = var_field("y", "f");
        // y bound to two atoms → two constraints.
        let fan = Transform::identity()
            .with_assign("y", Term::region(region_c()).join(&Term::var("z")));
        let out = substitute_constraint(&key, &Term::var("w"), &fan);
        assert_eq!(out.len(), 2);
        // y bound to ⊥ → no constraints at all.
        let kill = Transform::identity().with_assign("y", Term::bottom());
        assert!(substitute_constraint(&key, &Term::var("w"), &kill).is_empty());
    }

    #[test]
    fn region_keyed_constraints_keep_their_key() {
        let key = Atom::field(Base::Region(region_c()), "f");
        let theta = Transform::identity().with_assign("x", Term::var("y"));
        let out = substitute_constraint(&key, &Term::var("x"), &theta);
        assert_eq!(out, vec![(key, Term::var("y"))]);
    }

    #[test]
    fn composition_threads_updates_right_to_left() {
        // [y.f :≥ x] ∘ [y :↦ C] ∘ [x :↦ y.f], composed pairwise, equals
        // [x :↦ y.f, y :↦ C, C.f :≥ y.f].
        let first = Transform::identity().with_assign("x", Term::singleton(var_field("y", "f")));
        let second = Transform::identity().with_assign("y", Term::region(region_c()));
        let third =
            Transform::identity().with_constraint(var_field("y", "f"), Term::var("x"));

        let composed = third.compose(&second.compose(&first));

        let expected = Transform::identity()
            .with_assign("x", Term::singleton(var_field("y", "f")))
            .with_assign("y", Term::region(region_c()))
            .with_constraint(
                Atom::field(Base::Region(region_c()), "f"),
                Term::singleton(var_field("y", "f")),
            );
        assert_eq!(composed, expected);

        // The other association agrees here (it need not in general).
        let left_first = third.compose(&second).compose(&first);
        assert_eq!(left_first, expected);
    }

    #[test]
    fn composition_drops_overwritten_and_identity_entries() {
        // x :↦ y after y :↦ x: x's new value substitutes to {x} (identity,
        // dropped) and the earlier y-assignment survives.
        let earlier = Transform::identity().with_assign("y", Term::var("x"));
        let later = Transform::identity().with_assign("x", Term::var("y"));
        let composed = later.compose(&earlier);
        assert_eq!(
            composed,
            Transform::identity().with_assign("y", Term::var("x"))
        );
    }

    #[test]
    fn composition_overrides_earlier_assignment_of_same_variable() {
        // [x :↦ C] after [x :↦ y, z :↦ y]: x takes the later value.
        let earlier = Transform::identity()
            .with_assign("x", Term::var("y"))
            .with_assign("z", Term::var("y"));
        let later = Transform::identity().with_assign("x", Term::region(region_c()));
        let composed = later.compose(&earlier);
        assert_eq!(
            composed,
            Transform::identity()
                .with_assign("x", Term::region(region_c()))
                .with_assign("z", Term::var("y"))
        );
    }

    #[test]
    fn join_uses_the_total_function_view() {
        // join([x :↦ A], []) = [x :↦ A ∨ x]
        let sigma =
            Transform::identity().with_assign("x", Term::region(Region::created("A")));
        let joined = sigma.join(&Transform::identity());
        assert_eq!(
            joined,
            Transform::identity().with_assign(
                "x",
                Term::region(Region::created("A")).join(&Term::var("x"))
            )
        );
    }

    #[test]
    fn join_is_commutative_with_bottom_like_unit() {
        let sigma = Transform::identity()
            .with_assign("x", Term::region(Region::created("A")))
            .with_constraint(var_field("y", "f"), Term::var("x"));
        let theta = Transform::identity().with_assign("y", Term::var("x"));
        assert_eq!(sigma.join(&theta), theta.join(&sigma));

        // The bottom transformation assigns ⊥ to every variable in play; it
        // is the unit of join over that universe.
        let bottom = Transform::identity()
            .with_assign("x", Term::bottom())
            .with_assign("y", Term::bottom());
        assert_eq!(sigma.join(&bottom), sigma);
    }
}
