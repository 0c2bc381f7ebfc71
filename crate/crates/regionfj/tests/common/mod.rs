//! Shared random generators for the property suites, all drawing from one
//! bounded universe: 3 variables, 3 regions, and 2 field names. Small on
//! purpose — collisions between generated transformations are what make the
//! algebraic properties bite.
//!
//! Every region carries every field. The soundness theorems quantify over
//! environments and transformations that only route data through fields the
//! involved regions actually have (an atom `A.f` presupposes `f ∈ Fld(A)`,
//! and so does a constraint key); a total field map makes every randomly
//! generated triple satisfy that precondition by construction. Asymmetric
//! field maps — where reachability pruning has visible effect — are pinned
//! separately by the worked-example tests.

#![allow(dead_code)] // each integration-test target uses its own subset

use rand::Rng;

use regionfj::{
    Atom, Base, Env, FieldGraph, FieldName, FieldUniverse, Region, RegionSet, Term, Transform,
    VarName,
};

pub const VAR_NAMES: [&str; 3] = ["x", "y", "z"];
pub const FIELD_NAMES: [&str; 2] = ["f", "g"];
pub const REGION_NAMES: [&str; 3] = ["A", "B", "C"];

pub fn all_regions() -> Vec<Region> {
    REGION_NAMES.iter().map(|name| Region::created(*name)).collect()
}

/// Every region carries every field (see the module docs for why).
pub fn universe() -> FieldUniverse {
    let mut pairs = Vec::new();
    for region in all_regions() {
        for field in FIELD_NAMES {
            pairs.push((region.clone(), FieldName::new(field)));
        }
    }
    pairs.into_iter().collect()
}

pub fn random_var(rng: &mut impl Rng) -> VarName {
    VarName::new(VAR_NAMES[rng.gen_range(0..VAR_NAMES.len())])
}

pub fn random_field(rng: &mut impl Rng) -> FieldName {
    FieldName::new(FIELD_NAMES[rng.gen_range(0..FIELD_NAMES.len())])
}

pub fn random_region(rng: &mut impl Rng) -> Region {
    let all = all_regions();
    all[rng.gen_range(0..all.len())].clone()
}

pub fn random_region_set(rng: &mut impl Rng) -> RegionSet {
    all_regions().into_iter().filter(|_| rng.gen_bool(0.4)).collect()
}

/// Zero to three concatenated one-field paths: covers the empty graph,
/// plain fields, two-field chains, and looping graphs, and never leaves the
/// constructors' shape invariant.
pub fn random_graph(rng: &mut impl Rng) -> FieldGraph {
    let mut graph = FieldGraph::empty();
    for _ in 0..rng.gen_range(0..=3) {
        graph = graph.concat(&FieldGraph::path(random_field(rng)));
    }
    graph
}

/// Like [`random_graph`] but never empty — the shape constraint keys need.
pub fn random_nonempty_graph(rng: &mut impl Rng) -> FieldGraph {
    let mut graph = FieldGraph::path(random_field(rng));
    for _ in 0..rng.gen_range(0..=2) {
        graph = graph.concat(&FieldGraph::path(random_field(rng)));
    }
    graph
}

pub fn random_base(rng: &mut impl Rng) -> Base {
    if rng.gen_bool(0.5) {
        Base::Var(random_var(rng))
    } else {
        Base::Region(random_region(rng))
    }
}

pub fn random_atom(rng: &mut impl Rng) -> Atom {
    Atom::new(random_base(rng), random_graph(rng))
}

/// Zero to two atoms; zero atoms is the bottom term.
pub fn random_term(rng: &mut impl Rng) -> Term {
    (0..rng.gen_range(0..=2)).map(|_| random_atom(rng)).collect()
}

/// Up to two assignments and up to two constraints over the universe.
pub fn random_transform(rng: &mut impl Rng) -> Transform {
    let mut t = Transform::identity();
    for _ in 0..rng.gen_range(0..=2) {
        t.insert_assign(random_var(rng), random_term(rng));
    }
    for _ in 0..rng.gen_range(0..=2) {
        let key = Atom::new(random_base(rng), random_nonempty_graph(rng));
        t.insert_constraint(key, random_term(rng));
    }
    t
}

/// A random environment over the bounded universe; entries with empty
/// region sets are dropped by the `Env` normalization itself.
pub fn random_env(rng: &mut impl Rng) -> Env {
    let mut env = Env::new();
    for var in VAR_NAMES {
        env.set_var(VarName::new(var), random_region_set(rng));
    }
    for region in all_regions() {
        for field in FIELD_NAMES {
            if rng.gen_bool(0.5) {
                env.set_field(region.clone(), FieldName::new(field), random_region_set(rng));
            }
        }
    }
    env
}
