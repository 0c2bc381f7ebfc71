//! Region inference: per-method summaries and their instantiation.
//!
//! The pipeline has two fixed points. First, every method body is translated
//! — once per pass, regardless of how many call sites it has — into a
//! summary: an abstract transformation describing its effect on a typing
//! environment plus a term describing its result. Summaries of called
//! methods are spliced in by composition, so the table converges even
//! through recursion. Second, the converged summaries are instantiated at
//! every calling context `(class, receiver region, method, argument
//! regions)` to build the region class table: field types `F` and method
//! result types `M`.
//!
//! An independent declarative checker ([`checker`]) re-derives minimal types
//! directly from the class table and confirms the inference's results cover
//! them.

pub mod checker;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::env::{apply_counted, instantiate_term, Env, FieldUniverse};
use crate::names::{ClassName, FieldName, MethodName, VarName};
use crate::region::{Region, RegionSet};
use crate::syntax::{ClassDecl, Expr, MethodDecl, Program};
use crate::term::{Atom, Base, Term};
use crate::transform::{substitute_term, Transform};

pub use checker::{CheckDiagnostic, Checker, TypingContext};

// ---------------------------------------------------------------------------
// Region universe
// ---------------------------------------------------------------------------

/// The finite region vocabulary of one program: `Null` plus one region per
/// allocation label, with each region's classes and fields.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegionUniverse {
    regions: RegionSet,
    classes: BTreeMap<Region, BTreeSet<ClassName>>,
    fields: FieldUniverse,
}

impl RegionUniverse {
    pub fn of_program(program: &Program) -> Self {
        let mut regions: RegionSet = [Region::Null].into_iter().collect();
        let mut classes: BTreeMap<Region, BTreeSet<ClassName>> = BTreeMap::new();
        let mut fields = FieldUniverse::new();
        for (label, class) in program.labels() {
            let region = Region::Created(label.clone());
            regions.insert(region.clone());
            classes.entry(region.clone()).or_default().insert(class.clone());
            for field in program.fields_of(class).keys() {
                fields.insert(region.clone(), field.clone());
            }
        }
        RegionUniverse { regions, classes, fields }
    }

    pub fn regions(&self) -> &RegionSet {
        &self.regions
    }

    /// The classes of objects in a region: a singleton for created regions,
    /// empty for `Null`.
    pub fn classes_of(&self, region: &Region) -> impl Iterator<Item = &ClassName> {
        self.classes.get(region).into_iter().flatten()
    }

    /// Which fields each region's objects carry; `Null` carries none.
    pub fn field_universe(&self) -> &FieldUniverse {
        &self.fields
    }
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

/// One method's reusable summary: an effect on typing environments plus a
/// term for the result value. Both speak only about `this`, the canonical
/// parameters, and regions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Summary {
    pub effect: Transform,
    pub result: Term,
}

impl Summary {
    /// The least summary: no effect, unreachable result.
    pub fn bottom() -> Self {
        Summary { effect: Transform::identity(), result: Term::bottom() }
    }

    /// Applies `earlier` first: `(σ, s)θ = (σθ, sθ)`.
    pub fn compose_with(&self, earlier: &Transform) -> Summary {
        Summary {
            effect: self.effect.compose(earlier),
            result: substitute_term(&self.result, earlier),
        }
    }

    /// Componentwise join: `(σ, s) ∨ (θ, t) = (σ ∨ θ, s ∨ t)`.
    pub fn join(&self, other: &Summary) -> Summary {
        Summary {
            effect: self.effect.join(&other.effect),
            result: self.result.join(&other.result),
        }
    }

    /// Drops assignments to variables outside `interface` (method-local
    /// temporaries). Constraints all survive; after a body has been fully
    /// composed, their variable bases can only be interface variables.
    pub fn restrict_to_interface(&self, interface: &BTreeSet<VarName>) -> Summary {
        let mut effect = self.effect.clone();
        effect.retain_assigns(|x| interface.contains(x));
        debug_assert!(
            effect.constraints().all(|(key, _)| match &key.base {
                Base::Var(x) => interface.contains(x),
                Base::Region(_) => true,
            }),
            "composed constraint keys must be rooted at interface variables or regions"
        );
        Summary { effect, result: self.result.clone() }
    }
}

/// The abstract method table: one summary per `(class, method)` pair,
/// covering inherited methods. Entries only ever grow under join.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SummaryTable {
    entries: BTreeMap<(ClassName, MethodName), Summary>,
}

impl SummaryTable {
    pub fn new() -> Self {
        SummaryTable::default()
    }

    pub fn get(&self, class: &ClassName, method: &MethodName) -> Option<&Summary> {
        self.entries.get(&(class.clone(), method.clone()))
    }

    pub fn insert(&mut self, class: ClassName, method: MethodName, summary: Summary) {
        self.entries.insert((class, method), summary);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(ClassName, MethodName), &Summary)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The canonical name of the i-th parameter (1-based): `p1`, `p2`, …
pub fn canonical_param(index: usize) -> VarName {
    VarName::new(format!("p{}", index + 1))
}

// ---------------------------------------------------------------------------
// Parameter canonicalization
// ---------------------------------------------------------------------------

fn rename_everywhere(e: &Expr, map: &BTreeMap<VarName, VarName>) -> Expr {
    let sub = |x: &VarName| map.get(x).cloned().unwrap_or_else(|| x.clone());
    match e {
        Expr::Var(x) => Expr::Var(sub(x)),
        Expr::Let { var, bound, body } => Expr::Let {
            var: sub(var),
            bound: Box::new(rename_everywhere(bound, map)),
            body: Box::new(rename_everywhere(body, map)),
        },
        Expr::If { left, right, then_branch, else_branch } => Expr::If {
            left: sub(left),
            right: sub(right),
            then_branch: Box::new(rename_everywhere(then_branch, map)),
            else_branch: Box::new(rename_everywhere(else_branch, map)),
        },
        Expr::Null => Expr::Null,
        Expr::New { label, class } => {
            Expr::New { label: label.clone(), class: class.clone() }
        }
        Expr::Cast { class, expr } => {
            Expr::Cast { class: class.clone(), expr: Box::new(rename_everywhere(expr, map)) }
        }
        Expr::Call { receiver, receiver_class, method, args } => Expr::Call {
            receiver: sub(receiver),
            receiver_class: receiver_class.clone(),
            method: method.clone(),
            args: args.iter().map(|a| sub(a)).collect(),
        },
        Expr::GetField { receiver, receiver_class, field } => Expr::GetField {
            receiver: sub(receiver),
            receiver_class: receiver_class.clone(),
            field: field.clone(),
        },
        Expr::SetField { receiver, receiver_class, field, value } => Expr::SetField {
            receiver: sub(receiver),
            receiver_class: receiver_class.clone(),
            field: field.clone(),
            value: sub(value),
        },
    }
}

fn collect_binders(e: &Expr, out: &mut BTreeSet<VarName>) {
    match e {
        Expr::Let { var, bound, body } => {
            out.insert(var.clone());
            collect_binders(bound, out);
            collect_binders(body, out);
        }
        Expr::If { then_branch, else_branch, .. } => {
            collect_binders(then_branch, out);
            collect_binders(else_branch, out);
        }
        Expr::Cast { expr, .. } => collect_binders(expr, out),
        _ => {}
    }
}

fn canonicalize_method(decl: &MethodDecl) -> MethodDecl {
    let canonical: Vec<VarName> = (0..decl.arity()).map(canonical_param).collect();
    let mut map: BTreeMap<VarName, VarName> = BTreeMap::new();
    for ((old, _), new) in decl.params.iter().zip(&canonical) {
        if old != new {
            map.insert(old.clone(), new.clone());
        }
    }
    // A binder that collides with a canonical parameter name must move out
    // of the way (binders are already distinct from the declared parameters
    // and from each other, so one simultaneous rename is capture-free).
    let mut binders = BTreeSet::new();
    collect_binders(&decl.body, &mut binders);
    let mut taken: BTreeSet<VarName> = binders.clone();
    taken.insert(VarName::this());
    taken.extend(decl.param_names().cloned());
    taken.extend(canonical.iter().cloned());
    for binder in &binders {
        if canonical.contains(binder) {
            let mut k = 1usize;
            let fresh = loop {
                let candidate = VarName::new(format!("{binder}${k}"));
                if !taken.contains(&candidate) {
                    break candidate;
                }
                k += 1;
            };
            taken.insert(fresh.clone());
            map.insert(binder.clone(), fresh);
        }
    }
    let body =
        if map.is_empty() { decl.body.clone() } else { rename_everywhere(&decl.body, &map) };
    MethodDecl {
        name: decl.name.clone(),
        params: decl
            .params
            .iter()
            .zip(&canonical)
            .map(|((_, class), new)| (new.clone(), class.clone()))
            .collect(),
        return_class: decl.return_class.clone(),
        body,
    }
}

/// Renames every method's parameters to the positional names `p1…pn` (and
/// moves colliding binders out of the way), so that summaries of overriding
/// methods join meaningfully. Class structure and labels are untouched.
pub fn canonicalize_params(program: &Program) -> Program {
    let classes: BTreeMap<ClassName, ClassDecl> = program
        .classes()
        .map(|decl| {
            let methods = decl
                .methods
                .iter()
                .map(|(name, m)| (name.clone(), canonicalize_method(m)))
                .collect();
            (
                decl.name.clone(),
                ClassDecl {
                    name: decl.name.clone(),
                    superclass: decl.superclass.clone(),
                    fields: decl.fields.clone(),
                    methods,
                },
            )
        })
        .collect();
    let labels = program.labels().map(|(l, c)| (l.clone(), c.clone())).collect();
    Program::new(classes, labels)
}

// ---------------------------------------------------------------------------
// The summary translation
// ---------------------------------------------------------------------------

/// Everything that can abort an analysis run.
#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum AnalysisError {
    #[error(
        "no summary entry for `{class}.{method}` — the method table was not \
         initialized for this call"
    )]
    MissingSummary { class: ClassName, method: MethodName },
    #[error("iteration cap ({0}) exceeded while computing method summaries")]
    SummaryIterationCap(usize),
    #[error("iteration cap ({0}) exceeded while computing the class table")]
    TableIterationCap(usize),
    #[error("context cap ({0}) exceeded while enumerating calling contexts")]
    ContextCap(usize),
}

/// Translates one expression into a summary, given the current method table.
/// Defined by induction on the expression; calls are resolved by composing
/// the callee's table entry with a binder that maps `this` and the canonical
/// parameters to the call's receiver and arguments — the callee's body is
/// never revisited.
pub fn summarize_expr(e: &Expr, table: &SummaryTable) -> Result<Summary, AnalysisError> {
    match e {
        Expr::Var(x) => {
            Ok(Summary { effect: Transform::identity(), result: Term::var(x.clone()) })
        }
        Expr::Let { var, bound, body } => {
            let bound_summary = summarize_expr(bound, table)?;
            let body_summary = summarize_expr(body, table)?;
            let binder = Transform::identity()
                .with_assign(var.clone(), bound_summary.result)
                .compose(&bound_summary.effect);
            Ok(body_summary.compose_with(&binder))
        }
        Expr::If { then_branch, else_branch, .. } => {
            let left = summarize_expr(then_branch, table)?;
            let right = summarize_expr(else_branch, table)?;
            Ok(left.join(&right))
        }
        Expr::Null => {
            Ok(Summary { effect: Transform::identity(), result: Term::region(Region::Null) })
        }
        Expr::New { label, .. } => Ok(Summary {
            effect: Transform::identity(),
            result: Term::region(Region::Created(label.clone())),
        }),
        Expr::Cast { expr, .. } => summarize_expr(expr, table),
        Expr::GetField { receiver, field, .. } => Ok(Summary {
            effect: Transform::identity(),
            result: Term::singleton(Atom::field(Base::Var(receiver.clone()), field.clone())),
        }),
        Expr::SetField { receiver, field, value, .. } => Ok(Summary {
            effect: Transform::identity().with_constraint(
                Atom::field(Base::Var(receiver.clone()), field.clone()),
                Term::var(value.clone()),
            ),
            result: Term::var(value.clone()),
        }),
        Expr::Call { receiver, receiver_class, method, args } => {
            let Some(summary) = table.get(receiver_class, method) else {
                return Err(AnalysisError::MissingSummary {
                    class: receiver_class.clone(),
                    method: method.clone(),
                });
            };
            let mut binder = Transform::identity();
            binder.insert_assign(VarName::this(), Term::var(receiver.clone()));
            for (i, arg) in args.iter().enumerate() {
                binder.insert_assign(canonical_param(i), Term::var(arg.clone()));
            }
            Ok(summary.compose_with(&binder))
        }
    }
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

/// Instrumentation for one `(class, method)` table entry.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MethodStats {
    /// How many times the body was translated by `summarize_expr`.
    pub body_visits: usize,
    /// How many of those translations changed the table entry.
    pub productive_visits: usize,
    /// How many distinct calling contexts the finished summary served.
    pub contexts_served: usize,
}

/// Instrumentation for one analysis run, including analytic worst-case
/// bounds (finite-lattice heights) that every loop must respect.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Stats {
    pub per_method: BTreeMap<(ClassName, MethodName), MethodStats>,
    /// Passes of the summary fixed point, and its lattice-height bound.
    pub summary_iterations: usize,
    pub summary_iteration_bound: u128,
    /// Passes of the class-table fixed point, and its lattice-height bound.
    pub table_iterations: usize,
    pub table_iteration_bound: u128,
    /// Largest number of productive sweeps any single environment
    /// application needed, and the bound `|regions|² · |fields| + 1`.
    pub max_apply_productive: usize,
    pub apply_productive_bound: u128,
    /// Distinct calling contexts enumerated per class-table pass.
    pub contexts_enumerated: usize,
}

fn global_field_names(program: &Program) -> BTreeSet<FieldName> {
    let mut out = BTreeSet::new();
    for class in program.classes() {
        out.extend(class.fields.keys().cloned());
    }
    out
}

/// Number of distinct nonempty field graphs over `fld` field names:
/// head × tail × edge subsets (an overcount of the well-formed ones, which
/// only needs to upper-bound the truth).
fn nonempty_graph_count(fld: u128) -> u128 {
    let edge_slots = fld.saturating_mul(fld);
    let subsets = if edge_slots >= 127 { u128::MAX } else { 1u128 << edge_slots };
    fld.saturating_mul(fld).saturating_mul(subsets)
}

fn summary_lattice_bound(program: &Program, regions: u128) -> u128 {
    let fld = global_field_names(program).len() as u128;
    let graphs = nonempty_graph_count(fld);
    let mut total: u128 = 0;
    for class in program.classes() {
        for method in program.methods_of(&class.name) {
            let (_, decl) = program.mtable_lookup(&class.name, &method).expect("method exists");
            let arity = decl.arity() as u128;
            let bases = 1 + arity + regions;
            let atoms = bases.saturating_mul(graphs.saturating_add(1));
            let keys = (1 + arity).saturating_add(bases.saturating_mul(graphs));
            total = total
                .saturating_add(keys.saturating_add(1).saturating_mul(atoms));
        }
    }
    total.saturating_add(1)
}

fn table_lattice_bound(program: &Program, regions: u128) -> u128 {
    let mut field_cells: u128 = 0;
    for class in program.classes() {
        field_cells = field_cells
            .saturating_add((program.fields_of(&class.name).len() as u128).saturating_mul(regions));
    }
    let mut method_cells: u128 = 0;
    for class in program.classes() {
        for method in program.methods_of(&class.name) {
            let (_, decl) = program.mtable_lookup(&class.name, &method).expect("method exists");
            let contexts = regions.saturating_pow(1 + decl.arity() as u32);
            method_cells = method_cells.saturating_add(contexts);
        }
    }
    field_cells
        .saturating_add(method_cells)
        .saturating_mul(regions)
        .saturating_add(1)
}

// ---------------------------------------------------------------------------
// Fixed point 1: the abstract method table
// ---------------------------------------------------------------------------

/// Tuning knobs for the analysis driver.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Options {
    /// Safety valve on both fixed-point loops; the finite lattice guarantees
    /// termination far below this.
    pub max_iterations: usize,
    /// Cap on the number of calling contexts enumerated per class-table
    /// pass.
    pub max_contexts: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { max_iterations: 10_000, max_contexts: 100_000 }
    }
}

fn method_interface(decl: &MethodDecl) -> BTreeSet<VarName> {
    let mut interface: BTreeSet<VarName> = [VarName::this()].into_iter().collect();
    interface.extend(decl.param_names().cloned());
    interface
}

fn compute_method_table_impl(
    canonical: &Program,
    options: &Options,
    stats: &mut Stats,
) -> Result<SummaryTable, AnalysisError> {
    let mut table = SummaryTable::new();
    for class in canonical.classes() {
        for method in canonical.methods_of(&class.name) {
            table.insert(class.name.clone(), method.clone(), Summary::bottom());
            stats
                .per_method
                .entry((class.name.clone(), method))
                .or_default();
        }
    }
    if table.is_empty() {
        return Ok(table);
    }

    let keys: Vec<(ClassName, MethodName)> = table.entries.keys().cloned().collect();
    let subclass_pairs: Vec<(ClassName, ClassName)> = {
        let classes: Vec<&ClassDecl> = canonical.classes().collect();
        let mut pairs = Vec::new();
        for c in &classes {
            for d in &classes {
                if canonical.strict_subtype(&d.name, &c.name) {
                    pairs.push((c.name.clone(), d.name.clone()));
                }
            }
        }
        pairs
    };

    for pass in 1..=options.max_iterations {
        let snapshot = table.clone();
        let mut changed = false;
        // Every body is translated exactly once per pass, against the
        // snapshot — call sites read summaries, never bodies.
        for (class, method) in &keys {
            let (_, decl) = canonical.mtable_lookup(class, method).expect("initialized above");
            let summary = summarize_expr(&decl.body, &snapshot)?;
            let restricted = summary.restrict_to_interface(&method_interface(decl));
            let entry = stats.per_method.get_mut(&(class.clone(), method.clone())).unwrap();
            entry.body_visits += 1;
            let current = table.get(class, method).expect("initialized above");
            let joined = current.join(&restricted);
            if joined != *current {
                entry.productive_visits += 1;
                changed = true;
                table.insert(class.clone(), method.clone(), joined);
            }
        }
        // Close under subclassing: a call on the superclass may dispatch to
        // the subclass's override, so the superclass entry absorbs it.
        for (superclass, subclass) in &subclass_pairs {
            for method in canonical.methods_of(superclass) {
                let sub_entry = table.get(subclass, &method).expect("subclass has the method");
                let super_entry = table.get(superclass, &method).expect("initialized above");
                let joined = super_entry.join(sub_entry);
                if joined != *super_entry {
                    changed = true;
                    table.insert(superclass.clone(), method.clone(), joined);
                }
            }
        }
        if !changed {
            stats.summary_iterations = pass;
            return Ok(table);
        }
    }
    Err(AnalysisError::SummaryIterationCap(options.max_iterations))
}

/// Computes the summary fixed point over a program whose parameters are
/// already canonical. Convenience wrapper over the instrumented driver.
pub fn compute_method_table(canonical: &Program) -> Result<SummaryTable, AnalysisError> {
    compute_method_table_impl(canonical, &Options::default(), &mut Stats::default())
}

// ---------------------------------------------------------------------------
// Fixed point 2: the region class table
// ---------------------------------------------------------------------------

/// The inferred class table: field types `F(class, region, field)` and
/// method result types `M(class, region, method, argument regions)`. Method
/// rows exist for the entire enumerated context universe (possibly with
/// empty region sets); field rows exist wherever something was initialized
/// or written.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ClassTable {
    field_types: BTreeMap<(ClassName, Region, FieldName), RegionSet>,
    method_types: BTreeMap<(ClassName, Region, MethodName, Vec<Region>), RegionSet>,
}

impl ClassTable {
    /// `F(class, region, field)`, reading absent rows as empty.
    pub fn field_type(&self, class: &ClassName, region: &Region, field: &FieldName) -> RegionSet {
        self.field_types
            .get(&(class.clone(), region.clone(), field.clone()))
            .cloned()
            .unwrap_or_default()
    }

    /// `M(class, region, method, args)`. `None` means the context was never
    /// enumerated — distinct from an enumerated context with an empty type.
    pub fn method_type(
        &self,
        class: &ClassName,
        region: &Region,
        method: &MethodName,
        args: &[Region],
    ) -> Option<&RegionSet> {
        self.method_types
            .get(&(class.clone(), region.clone(), method.clone(), args.to_vec()))
    }

    pub fn field_rows(
        &self,
    ) -> impl Iterator<Item = (&(ClassName, Region, FieldName), &RegionSet)> {
        self.field_types.iter()
    }

    pub fn method_rows(
        &self,
    ) -> impl Iterator<Item = (&(ClassName, Region, MethodName, Vec<Region>), &RegionSet)> {
        self.method_types.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.field_types.is_empty() && self.method_types.is_empty()
    }
}

/// All tuples with one component drawn from `options` per slot, in sorted
/// order; a zero-slot product is the single empty tuple.
pub(crate) fn cartesian_product<T: Clone>(options: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for slot in options {
        let mut next = Vec::with_capacity(out.len() * slot.len());
        for prefix in &out {
            for item in slot {
                let mut tuple = prefix.clone();
                tuple.push(item.clone());
                next.push(tuple);
            }
        }
        out = next;
    }
    out
}

fn compute_class_table_impl(
    canonical: &Program,
    table: &SummaryTable,
    universe: &RegionUniverse,
    options: &Options,
    stats: &mut Stats,
) -> Result<ClassTable, AnalysisError> {
    // Which classes declare or inherit each field name. The environment's
    // field typing is indexed by regions only, so its rows fan out to every
    // owning class on the way into F and union back on the way out; the
    // class index carries no extra information, which also keeps F closed
    // under subclassing by construction.
    let mut field_owners: BTreeMap<FieldName, BTreeSet<ClassName>> = BTreeMap::new();
    for class in canonical.classes() {
        for field in canonical.fields_of(&class.name).keys() {
            field_owners.entry(field.clone()).or_default().insert(class.name.clone());
        }
    }

    let mut ct = ClassTable::default();
    // Objects start with all fields null: seed every created region's field
    // rows with {Null}.
    for region in universe.regions() {
        for class in universe.classes_of(region) {
            for field in canonical.fields_of(class).keys() {
                for owner in field_owners.get(field).into_iter().flatten() {
                    ct.field_types
                        .entry((owner.clone(), region.clone(), field.clone()))
                        .or_default()
                        .insert(Region::Null);
                }
            }
        }
    }

    if table.is_empty() {
        return Ok(ct);
    }

    let regions: Vec<Region> = universe.regions().iter().cloned().collect();
    let subclass_pairs: Vec<(ClassName, ClassName)> = {
        let classes: Vec<&ClassDecl> = canonical.classes().collect();
        let mut pairs = Vec::new();
        for c in &classes {
            for d in &classes {
                if canonical.strict_subtype(&d.name, &c.name) {
                    pairs.push((c.name.clone(), d.name.clone()));
                }
            }
        }
        pairs
    };

    for pass in 1..=options.max_iterations {
        let before = ct.clone();
        // Project the field typing down to region-indexed rows once per
        // pass; every context in the pass reads this snapshot.
        let mut field_env = Env::new();
        for ((_, region, field), set) in &before.field_types {
            field_env.add_field(region.clone(), field.clone(), set.clone());
        }

        let mut contexts = 0usize;
        for ((class, method), summary) in table.iter() {
            let (_, decl) = canonical.mtable_lookup(class, method).expect("table key");
            let arg_slots: Vec<Vec<Region>> = vec![regions.clone(); decl.arity()];
            for receiver_region in &regions {
                for args in cartesian_product(&arg_slots) {
                    contexts += 1;
                    if contexts > options.max_contexts {
                        return Err(AnalysisError::ContextCap(options.max_contexts));
                    }
                    let mut env = field_env.clone();
                    env.set_var(
                        VarName::this(),
                        [receiver_region.clone()].into_iter().collect(),
                    );
                    for (i, arg) in args.iter().enumerate() {
                        env.set_var(canonical_param(i), [arg.clone()].into_iter().collect());
                    }
                    let (applied, productive) =
                        apply_counted(&summary.effect, &env, universe.field_universe());
                    stats.max_apply_productive = stats.max_apply_productive.max(productive);
                    for ((region, field), set) in applied.fields() {
                        for owner in field_owners.get(field).into_iter().flatten() {
                            ct.field_types
                                .entry((owner.clone(), region.clone(), field.clone()))
                                .or_default()
                                .extend(set.iter().cloned());
                        }
                    }
                    let result =
                        instantiate_term(&summary.result, &applied, universe.field_universe());
                    ct.method_types
                        .entry((
                            class.clone(),
                            receiver_region.clone(),
                            method.clone(),
                            args,
                        ))
                        .or_default()
                        .extend(result);
                }
            }
        }
        stats.contexts_enumerated = contexts;

        // Well-formedness closure: entries of a class and its subclass agree
        // by joining. Field rows already agree by construction (they fan out
        // to every owner); method rows are closed here.
        for (superclass, subclass) in &subclass_pairs {
            for field in canonical.fields_of(superclass).keys() {
                for region in &regions {
                    let joined: RegionSet = ct
                        .field_type(superclass, region, field)
                        .union(&ct.field_type(subclass, region, field))
                        .cloned()
                        .collect();
                    if !joined.is_empty() {
                        ct.field_types
                            .insert((superclass.clone(), region.clone(), field.clone()), joined.clone());
                        ct.field_types
                            .insert((subclass.clone(), region.clone(), field.clone()), joined);
                    }
                }
            }
            for method in canonical.methods_of(superclass) {
                let keys: Vec<(ClassName, Region, MethodName, Vec<Region>)> = ct
                    .method_types
                    .keys()
                    .filter(|(c, _, m, _)| c == superclass && *m == method)
                    .cloned()
                    .collect();
                for (_, region, m, args) in keys {
                    let sub_value = ct
                        .method_type(subclass, &region, &m, &args)
                        .cloned()
                        .unwrap_or_default();
                    let super_entry = ct
                        .method_types
                        .get_mut(&(superclass.clone(), region.clone(), m.clone(), args.clone()))
                        .expect("key collected above");
                    super_entry.extend(sub_value.iter().cloned());
                    let joined = super_entry.clone();
                    ct.method_types.insert((subclass.clone(), region, m, args), joined);
                }
            }
        }

        if ct == before {
            stats.table_iterations = pass;
            return Ok(ct);
        }
    }
    Err(AnalysisError::TableIterationCap(options.max_iterations))
}

/// Instantiates a converged summary table into a class table. Convenience
/// wrapper over the instrumented driver.
pub fn compute_class_table(
    canonical: &Program,
    table: &SummaryTable,
) -> Result<ClassTable, AnalysisError> {
    compute_class_table_impl(
        canonical,
        table,
        &RegionUniverse::of_program(canonical),
        &Options::default(),
        &mut Stats::default(),
    )
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// A finished analysis: the program as written, its canonical twin the
/// summaries speak about, and everything the pipeline produced.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Analysis {
    pub program: Program,
    pub canonical: Program,
    pub universe: RegionUniverse,
    pub summaries: SummaryTable,
    pub table: ClassTable,
    pub stats: Stats,
}

impl Analysis {
    /// Runs the independent declarative checker against the inferred table,
    /// using the program as written (original parameter names).
    pub fn check(&self) -> Vec<CheckDiagnostic> {
        Checker::new(&self.program, &self.table).check_well_typed()
    }
}

/// Full pipeline with default options.
pub fn analyze(program: &Program) -> Result<Analysis, AnalysisError> {
    analyze_with(program, &Options::default())
}

/// Full pipeline: canonicalize parameters, converge the summary table,
/// instantiate it into the class table, and collect instrumentation.
pub fn analyze_with(program: &Program, options: &Options) -> Result<Analysis, AnalysisError> {
    let canonical = canonicalize_params(program);
    let universe = RegionUniverse::of_program(program);
    let region_count = universe.regions().len() as u128;
    let field_count = global_field_names(program).len() as u128;

    let mut stats = Stats {
        summary_iteration_bound: summary_lattice_bound(&canonical, region_count),
        table_iteration_bound: table_lattice_bound(&canonical, region_count),
        apply_productive_bound: region_count
            .saturating_mul(region_count)
            .saturating_mul(field_count)
            .saturating_add(1),
        ..Stats::default()
    };

    let summaries = compute_method_table_impl(&canonical, options, &mut stats)?;
    let table = compute_class_table_impl(&canonical, &summaries, &universe, options, &mut stats)?;
    for ((class, _, method, _), _) in table.method_rows() {
        if let Some(entry) = stats.per_method.get_mut(&(class.clone(), method.clone())) {
            entry.contexts_served += 1;
        }
    }
    Ok(Analysis { program: program.clone(), canonical, universe, summaries, table, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FieldGraph;
    use crate::names::Label;
    use crate::syntax::parse_program;

    fn linked_list_source() -> &'static str {
        "class Node extends Object {\n\
           Node next;\n\
           Node last() {\n\
             let n = this.next in\n\
             let z = null in\n\
             if (n == z) { this } else { n.last() }\n\
           }\n\
         }\n\
         class Test extends Object {\n\
           Node linear() {\n\
             let x = new[l1] Node() in\n\
             let y = new[l2] Node() in\n\
             y.next := x;\n\
             y.last()\n\
           }\n\
           Node cyclic() {\n\
             let z = new[l3] Node() in\n\
             z.next := z;\n\
             z.last()\n\
           }\n\
         }"
    }

    fn node(class: &str) -> ClassName {
        ClassName::new(class)
    }

    fn created(label: &str) -> Region {
        Region::created(label)
    }

    fn set(regions: &[Region]) -> RegionSet {
        regions.iter().cloned().collect()
    }

    /// `this ∨ this.next ∨ this.⟨next | (next,next) | next⟩`.
    fn last_fixed_point_term() -> Term {
        let this = VarName::this();
        let loop_graph = FieldGraph::path("next").concat(&FieldGraph::path("next"));
        Term::var(this.clone())
            .join(&Term::singleton(Atom::field(Base::Var(this.clone()), "next")))
            .join(&Term::singleton(Atom::new(Base::Var(this), loop_graph)))
    }

    #[test]
    fn region_universe_lists_null_and_labels_with_classes() {
        let p = parse_program(linked_list_source()).unwrap();
        let u = RegionUniverse::of_program(&p);
        assert_eq!(u.regions().len(), 4);
        assert!(u.regions().contains(&Region::Null));
        let classes: Vec<&ClassName> = u.classes_of(&created("l1")).collect();
        assert_eq!(classes, vec![&node("Node")]);
        assert_eq!(u.classes_of(&Region::Null).count(), 0);
        assert!(u.field_universe().has_field(&created("l2"), &FieldName::new("next")));
        assert!(!u.field_universe().has_field(&Region::Null, &FieldName::new("next")));
    }

    #[test]
    fn canonicalization_renames_params_positionally() {
        let p = parse_program(
            "class A extends Object { A f; A m(A first, A second) { let v = first.f in second } }",
        )
        .unwrap();
        let canonical = canonicalize_params(&p);
        let (_, decl) = canonical.mtable_lookup(&node("A"), &MethodName::new("m")).unwrap();
        let names: Vec<&str> = decl.param_names().map(|p| p.as_str()).collect();
        assert_eq!(names, vec!["p1", "p2"]);
        let Expr::Let { var, bound, body } = &decl.body else { panic!("expected let") };
        assert_eq!(var, &VarName::new("v"));
        assert!(
            matches!(&**bound, Expr::GetField { receiver, .. } if receiver == &VarName::new("p1"))
        );
        assert_eq!(**body, Expr::Var(VarName::new("p2")));
    }

    #[test]
    fn canonicalization_moves_colliding_binders_aside() {
        let p = parse_program(
            "class A extends Object { A m(A q) { let p1 = q in p1 } }",
        )
        .unwrap();
        let canonical = canonicalize_params(&p);
        let (_, decl) = canonical.mtable_lookup(&node("A"), &MethodName::new("m")).unwrap();
        let Expr::Let { var, bound, body } = &decl.body else { panic!("expected let") };
        assert_eq!(var, &VarName::new("p1$1"));
        assert_eq!(**bound, Expr::Var(VarName::new("p1")));
        assert_eq!(**body, Expr::Var(VarName::new("p1$1")));
    }

    #[test]
    fn leaf_expressions_summarize_directly() {
        let table = SummaryTable::new();
        let var = summarize_expr(&Expr::Var(VarName::new("x")), &table).unwrap();
        assert!(var.effect.is_identity());
        assert_eq!(var.result, Term::var("x"));

        let set_field = Expr::SetField {
            receiver: VarName::new("x"),
            receiver_class: node("A"),
            field: FieldName::new("f"),
            value: VarName::new("y"),
        };
        let s = summarize_expr(&set_field, &table).unwrap();
        assert_eq!(
            s.effect,
            Transform::identity()
                .with_constraint(Atom::field(Base::Var(VarName::new("x")), "f"), Term::var("y"))
        );
        assert_eq!(s.result, Term::var("y"));
    }

    #[test]
    fn let_of_a_field_read_into_an_allocation_summarizes_to_one_assignment() {
        // let x = y.f in new[l9] C  →  ([x :↦ y.f], Created@l9)
        let e = Expr::Let {
            var: VarName::new("x"),
            bound: Box::new(Expr::GetField {
                receiver: VarName::new("y"),
                receiver_class: node("C"),
                field: FieldName::new("f"),
            }),
            body: Box::new(Expr::New { label: Label::new("l9"), class: node("C") }),
        };
        let s = summarize_expr(&e, &SummaryTable::new()).unwrap();
        assert_eq!(
            s.effect,
            Transform::identity().with_assign(
                "x",
                Term::singleton(Atom::field(Base::Var(VarName::new("y")), "f"))
            )
        );
        assert_eq!(s.result, Term::region(created("l9")));
    }

    #[test]
    fn first_translation_of_the_recursive_body_matches_the_bottom_table() {
        let p = parse_program(linked_list_source()).unwrap();
        let canonical = canonicalize_params(&p);
        let (_, decl) =
            canonical.mtable_lookup(&node("Node"), &MethodName::new("last")).unwrap();
        let mut table = SummaryTable::new();
        table.insert(node("Node"), MethodName::new("last"), Summary::bottom());
        let summary = summarize_expr(&decl.body, &table).unwrap();
        let restricted = summary.restrict_to_interface(&method_interface(decl));
        let this = VarName::this();
        let expected_effect = Transform::identity().with_assign(
            this.clone(),
            Term::var(this.clone())
                .join(&Term::singleton(Atom::field(Base::Var(this.clone()), "next"))),
        );
        assert_eq!(restricted.effect, expected_effect);
        assert_eq!(restricted.result, Term::var(this));
    }

    #[test]
    fn recursive_summary_converges_to_the_loop_graph_in_three_productive_passes() {
        let p = parse_program(linked_list_source()).unwrap();
        let analysis = analyze(&p).unwrap();
        let (table, stats) = (&analysis.summaries, &analysis.stats);

        let last = table.get(&node("Node"), &MethodName::new("last")).unwrap();
        let expected_term = last_fixed_point_term();
        let expected_effect =
            Transform::identity().with_assign(VarName::this(), expected_term.clone());
        assert_eq!(last.effect, expected_effect);
        assert_eq!(last.result, expected_term);

        let last_stats = &stats.per_method[&(node("Node"), MethodName::new("last"))];
        assert_eq!(last_stats.productive_visits, 3);
        assert_eq!(last_stats.body_visits, stats.summary_iterations);
        assert!(stats.summary_iterations <= stats.summary_iteration_bound as usize);
    }

    #[test]
    fn single_return_this_method_summarizes_to_identity() {
        let p = parse_program("class A extends Object { A m() { this } }").unwrap();
        let table = compute_method_table(&canonicalize_params(&p)).unwrap();
        let m = table.get(&node("A"), &MethodName::new("m")).unwrap();
        assert!(m.effect.is_identity());
        assert_eq!(m.result, Term::var(VarName::this()));
    }

    #[test]
    fn method_free_programs_have_empty_tables_and_zero_counters() {
        let p = parse_program("class A extends Object { A f; }").unwrap();
        let analysis = analyze(&p).unwrap();
        assert!(analysis.summaries.is_empty());
        assert!(analysis.table.is_empty());
        assert_eq!(analysis.stats.summary_iterations, 0);
        assert_eq!(analysis.stats.table_iterations, 0);
        assert_eq!(analysis.stats.contexts_enumerated, 0);
    }

    #[test]
    fn class_table_types_the_linear_and_cyclic_builders() {
        let p = parse_program(linked_list_source()).unwrap();
        let analysis = analyze(&p).unwrap();
        let (r1, r2, r3) = (created("l1"), created("l2"), created("l3"));

        // Fields: the first node keeps its null initialization; the second
        // points at the first; the cyclic node reaches itself.
        let next = FieldName::new("next");
        assert_eq!(analysis.table.field_type(&node("Node"), &r1, &next), set(&[Region::Null]));
        assert_eq!(
            analysis.table.field_type(&node("Node"), &r2, &next),
            set(&[r1.clone(), Region::Null])
        );
        assert_eq!(
            analysis.table.field_type(&node("Node"), &r3, &next),
            set(&[r3.clone(), Region::Null])
        );

        // Method results: linear ends on one of the two nodes it built (or
        // the null tail), cyclic on its own knot.
        let linear = analysis
            .table
            .method_type(&node("Test"), &Region::Null, &MethodName::new("linear"), &[])
            .unwrap();
        assert_eq!(*linear, set(&[r1.clone(), r2.clone(), Region::Null]));
        let cyclic = analysis
            .table
            .method_type(&node("Test"), &Region::Null, &MethodName::new("cyclic"), &[])
            .unwrap();
        assert_eq!(*cyclic, set(&[r3.clone(), Region::Null]));

        // The result is context-insensitive here: every enumerated receiver
        // region reports the same result set.
        for region in analysis.universe.regions() {
            assert_eq!(
                analysis
                    .table
                    .method_type(&node("Test"), region, &MethodName::new("linear"), &[])
                    .unwrap(),
                linear
            );
        }
        assert!(analysis.stats.table_iterations <= analysis.stats.table_iteration_bound as usize);
        assert!(
            analysis.stats.max_apply_productive
                <= analysis.stats.apply_productive_bound as usize
        );
    }

    #[test]
    fn summaries_spliced_at_call_sites_reuse_one_translation_per_pass() {
        let p = parse_program(linked_list_source()).unwrap();
        let analysis = analyze(&p).unwrap();
        let last_stats =
            &analysis.stats.per_method[&(node("Node"), MethodName::new("last"))];
        // One translation per table pass — not one per call site or context.
        assert_eq!(last_stats.body_visits, analysis.stats.summary_iterations);
        // Four receiver regions were served with the same summary.
        assert_eq!(last_stats.contexts_served, 4);
    }

    #[test]
    fn overriding_methods_join_into_the_superclass_summary() {
        let p = parse_program(
            "class A extends Object { A m() { this } }\n\
             class B extends A { A m() { null } }",
        )
        .unwrap();
        let table = compute_method_table(&canonicalize_params(&p)).unwrap();
        let a_m = table.get(&node("A"), &MethodName::new("m")).unwrap();
        // A.m may dispatch to B.m, so its summary covers both results.
        assert_eq!(
            a_m.result,
            Term::var(VarName::this()).join(&Term::region(Region::Null))
        );
        let b_m = table.get(&node("B"), &MethodName::new("m")).unwrap();
        assert_eq!(b_m.result, Term::region(Region::Null));
    }

    #[test]
    fn setters_record_writes_for_every_receiver_region() {
        let p = parse_program(
            "class Box extends Object {\n\
               Item item;\n\
               Item put(Item v) { this.item := v }\n\
             }\n\
             class Item extends Object { }\n\
             class Use extends Object {\n\
               Item fill(Box b) { let i = new[l1] Item() in b.put(i) }\n\
             }",
        )
        .unwrap();
        let analysis = analyze(&p).unwrap();
        let item = FieldName::new("item");
        let r1 = created("l1");
        // Every enumerated receiver region of put sees the write — including
        // Null and the class-disagreeing r1 — so the checker's set rule is
        // satisfied in every context the method table covers.
        for region in analysis.universe.regions() {
            assert!(
                analysis.table.field_type(&node("Box"), region, &item).contains(&r1),
                "write missing for receiver region {region}"
            );
        }
        assert!(analysis.check().is_empty());
    }

    #[test]
    fn context_cap_aborts_the_enumeration() {
        let p = parse_program(linked_list_source()).unwrap();
        let err = analyze_with(&p, &Options { max_iterations: 10_000, max_contexts: 3 })
            .unwrap_err();
        assert_eq!(err, AnalysisError::ContextCap(3));
    }

    #[test]
    fn cartesian_product_covers_all_tuples_in_order() {
        let tuples = cartesian_product(&[vec![1, 2], vec![10, 20]]);
        assert_eq!(tuples, vec![vec![1, 10], vec![1, 20], vec![2, 10], vec![2, 20]]);
        assert_eq!(cartesian_product::<u8>(&[]), vec![Vec::<u8>::new()]);
    }
}
