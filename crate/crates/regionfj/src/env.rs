//! Typing environments and the machinery that applies an abstract
//! transformation to one.
//!
//! An environment maps variables and `(region, field)` pairs to region sets;
//! absent entries read as the empty set. Instantiating an atom against an
//! environment resolves its access graph to the regions it can reach, using
//! a closure over the graph's edges (`reachable_fields`). A transformation
//! acts on an environment through `step` (one sweep over assignments and
//! constraints) iterated by `apply` until the field typing stops growing.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::names::{FieldName, VarName};
use crate::region::{render_region_set, Region, RegionSet};
use crate::term::{Atom, Base, Term};
use crate::transform::Transform;

/// Which fields each region's objects carry. Queries for unknown regions
/// return the empty set, so `Null` never needs an entry.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FieldUniverse {
    fields: BTreeMap<Region, BTreeSet<FieldName>>,
}

impl FieldUniverse {
    pub fn new() -> Self {
        FieldUniverse::default()
    }

    pub fn insert(&mut self, region: Region, field: impl Into<FieldName>) {
        self.fields.entry(region).or_default().insert(field.into());
    }

    pub fn fields_of(&self, region: &Region) -> impl Iterator<Item = &FieldName> {
        self.fields.get(region).into_iter().flatten()
    }

    pub fn has_field(&self, region: &Region, field: &FieldName) -> bool {
        self.fields
            .get(region)
            .map(|fs| fs.contains(field))
            .unwrap_or(false)
    }
}

impl FromIterator<(Region, FieldName)> for FieldUniverse {
    fn from_iter<I: IntoIterator<Item = (Region, FieldName)>>(iter: I) -> Self {
        let mut fu = FieldUniverse::new();
        for (r, f) in iter {
            fu.insert(r, f);
        }
        fu
    }
}

/// A typing environment: variables and region fields to region sets.
/// Normalized so that empty sets are never stored — absence means `⊥`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Env {
    vars: BTreeMap<VarName, RegionSet>,
    fields: BTreeMap<(Region, FieldName), RegionSet>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn var(&self, x: &VarName) -> RegionSet {
        self.vars.get(x).cloned().unwrap_or_default()
    }

    pub fn field(&self, r: &Region, f: &FieldName) -> RegionSet {
        self.fields
            .get(&(r.clone(), f.clone()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn set_var(&mut self, x: VarName, regions: RegionSet) {
        if regions.is_empty() {
            self.vars.remove(&x);
        } else {
            self.vars.insert(x, regions);
        }
    }

    pub fn set_field(&mut self, r: Region, f: FieldName, regions: RegionSet) {
        if regions.is_empty() {
            self.fields.remove(&(r, f));
        } else {
            self.fields.insert((r, f), regions);
        }
    }

    pub fn add_var(&mut self, x: VarName, regions: RegionSet) {
        if regions.is_empty() {
            return;
        }
        self.vars.entry(x).or_default().extend(regions);
    }

    pub fn add_field(&mut self, r: Region, f: FieldName, regions: RegionSet) {
        if regions.is_empty() {
            return;
        }
        self.fields.entry((r, f)).or_default().extend(regions);
    }

    pub fn vars(&self) -> impl Iterator<Item = (&VarName, &RegionSet)> {
        self.vars.iter()
    }

    pub fn fields(&self) -> impl Iterator<Item = (&(Region, FieldName), &RegionSet)> {
        self.fields.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.fields.is_empty()
    }

    /// Pointwise inclusion, reading absent entries as empty.
    pub fn leq(&self, other: &Env) -> bool {
        self.vars
            .iter()
            .all(|(x, s)| s.is_subset(&other.var(x)))
            && self
                .fields
                .iter()
                .all(|((r, f), s)| s.is_subset(&other.field(r, f)))
    }

    /// Pointwise union.
    pub fn join(&self, other: &Env) -> Env {
        let mut out = self.clone();
        for (x, s) in &other.vars {
            out.add_var(x.clone(), s.clone());
        }
        for ((r, f), s) in &other.fields {
            out.add_field(r.clone(), f.clone(), s.clone());
        }
        out
    }

    /// Variable typing only.
    pub fn var_part(&self) -> Env {
        Env {
            vars: self.vars.clone(),
            fields: BTreeMap::new(),
        }
    }
}

impl FromIterator<(VarName, RegionSet)> for Env {
    fn from_iter<I: IntoIterator<Item = (VarName, RegionSet)>>(iter: I) -> Self {
        let mut env = Env::new();
        for (x, s) in iter {
            env.set_var(x, s);
        }
        env
    }
}

impl fmt::Display for Env {
    /// Renders `(x : A, A.f : B ∨ C)` — variables first, then fields, each in
    /// sorted order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (x, s) in &self.vars {
            parts.push(format!("{x} : {}", render_region_set(s)));
        }
        for ((r, fld), s) in &self.fields {
            parts.push(format!("{r}.{fld} : {}", render_region_set(s)));
        }
        write!(f, "({})", parts.join(", "))
    }
}

/// Closes `{start}` under the edge relation: from a reached pair `(B, f)`,
/// every `(C, g)` with `C ∈ env(B.f)`, `(f, g)` an edge, and `g` a field of
/// `C` is reached too. The start pair is included unconditionally.
pub fn reachable_fields(
    start: (Region, FieldName),
    edges: &BTreeSet<(FieldName, FieldName)>,
    env: &Env,
    universe: &FieldUniverse,
) -> BTreeSet<(Region, FieldName)> {
    let mut seen: BTreeSet<(Region, FieldName)> = BTreeSet::new();
    let mut queue: VecDeque<(Region, FieldName)> = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some((b, f)) = queue.pop_front() {
        for c in env.field(&b, &f) {
            for (src, dst) in edges {
                if *src == f && universe.has_field(&c, dst) {
                    let pair = (c.clone(), dst.clone());
                    if seen.insert(pair.clone()) {
                        queue.push_back(pair);
                    }
                }
            }
        }
    }
    seen
}

/// Resolves one atom to the regions it can denote under `env`:
/// a bare region is itself; `A.⟨h,E,t⟩` joins `env(B.t)` over every pair
/// `B.t` reachable from `A.h`; a variable atom resolves through `env(x)`.
pub fn instantiate_atom(atom: &Atom, env: &Env, universe: &FieldUniverse) -> RegionSet {
    match (&atom.base, &atom.graph) {
        (Base::Region(r), crate::graph::FieldGraph::Empty) => {
            [r.clone()].into_iter().collect()
        }
        (Base::Region(r), crate::graph::FieldGraph::Triple { head, edges, tail }) => {
            let mut out = RegionSet::new();
            for (b, f) in reachable_fields((r.clone(), head.clone()), edges, env, universe) {
                if f == *tail {
                    out.extend(env.field(&b, &f));
                }
            }
            out
        }
        (Base::Var(x), graph) => {
            let mut out = RegionSet::new();
            for r in env.var(x) {
                out.extend(instantiate_atom(
                    &Atom::new(Base::Region(r), graph.clone()),
                    env,
                    universe,
                ));
            }
            out
        }
    }
}

/// Joins the instantiations of a term's atoms; `⊥` yields the empty set.
pub fn instantiate_term(term: &Term, env: &Env, universe: &FieldUniverse) -> RegionSet {
    let mut out = RegionSet::new();
    for atom in term.atoms() {
        out.extend(instantiate_atom(atom, env, universe));
    }
    out
}

/// One sweep of a transformation over an environment.
///
/// Assigned variables take their term's instantiation, unassigned ones keep
/// their typing. Every field entry keeps what it had, and each constraint
/// `b.⟨h,E,t⟩ :≥ u` pours `u`'s instantiation into `(A, t)` for every pair
/// `A.t` reached from `(B, h)` with `B` an instantiation of the key's base —
/// growing the field domain as needed.
pub fn step(sigma: &Transform, env: &Env, universe: &FieldUniverse) -> Env {
    let mut out = Env::new();
    // Variable typing.
    for (x, s) in env.vars() {
        if !sigma.assigns_var(x) {
            out.set_var(x.clone(), s.clone());
        }
    }
    for (x, u) in sigma.assignments() {
        out.set_var(x.clone(), instantiate_term(u, env, universe));
    }
    // Field typing: weak updates only ever add.
    for ((r, f), s) in env.fields() {
        out.add_field(r.clone(), f.clone(), s.clone());
    }
    for (key, u) in sigma.constraints() {
        let crate::graph::FieldGraph::Triple { head, edges, tail } = &key.graph else {
            unreachable!("constraint keys always carry a nonempty graph");
        };
        let bases = match &key.base {
            Base::Region(r) => [r.clone()].into_iter().collect(),
            Base::Var(x) => env.var(x),
        };
        let value = instantiate_term(u, env, universe);
        if value.is_empty() {
            continue;
        }
        for b in bases {
            for (a, f) in reachable_fields((b.clone(), head.clone()), edges, env, universe) {
                if f == *tail {
                    out.add_field(a, f, value.clone());
                }
            }
        }
    }
    out
}

/// Applies a transformation to an environment: iterates `step`, feeding each
/// round the original variable typing and the previous round's field typing,
/// until the environment stabilizes. Returns the fixed point.
pub fn apply(sigma: &Transform, env: &Env, universe: &FieldUniverse) -> Env {
    apply_counted(sigma, env, universe).0
}

/// `apply` plus the number of *productive* sweeps (sweeps that changed the
/// environment; one extra confirming sweep always runs). The count is
/// bounded by `|regions|² · |fields| + 1` over the universe in play.
pub fn apply_counted(
    sigma: &Transform,
    env: &Env,
    universe: &FieldUniverse,
) -> (Env, usize) {
    let original_vars = env.var_part();
    let mut current = env.clone();
    let mut productive = 0;
    loop {
        let mut input = original_vars.clone();
        for ((r, f), s) in current.fields() {
            input.set_field(r.clone(), f.clone(), s.clone());
        }
        let next = step(sigma, &input, universe);
        if next == current {
            return (next, productive);
        }
        productive += 1;
        current = next;
    }
}
