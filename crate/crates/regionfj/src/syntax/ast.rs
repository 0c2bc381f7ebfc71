//! The resolved core language: programs, class declarations, and expressions
//! in administrative normal form (receivers, arguments, and comparison
//! operands are always variables).
//!
//! Every receiver position carries the receiver's statically known class,
//! computed during parsing from declared variable classes. Two distinguished
//! classes exist in every program without being declared: `Object`, the root
//! of the hierarchy, and `NullType`, the class of `null`, which sits below
//! every other class and can never be instantiated or cast to.

use std::collections::{BTreeMap, BTreeSet};

use crate::names::{ClassName, FieldName, Label, MethodName, VarName};
use crate::region::{Region, RegionSet};

/// An expression of the core language. `Let` is the only binder; all other
/// compound forms take variables, which keeps data flow explicit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Expr {
    /// A variable read.
    Var(VarName),
    /// `let var = bound in body`.
    Let {
        var: VarName,
        bound: Box<Expr>,
        body: Box<Expr>,
    },
    /// `if (left == right) { then_branch } else { else_branch }`.
    If {
        left: VarName,
        right: VarName,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
    /// The `null` literal.
    Null,
    /// `new[label] class()` — an allocation site, uniquely tagged.
    New { label: Label, class: ClassName },
    /// `(class) expr`.
    Cast { class: ClassName, expr: Box<Expr> },
    /// `receiver.method(args)`, annotated with the receiver's static class.
    Call {
        receiver: VarName,
        receiver_class: ClassName,
        method: MethodName,
        args: Vec<VarName>,
    },
    /// `receiver.field`, annotated with the receiver's static class.
    GetField {
        receiver: VarName,
        receiver_class: ClassName,
        field: FieldName,
    },
    /// `receiver.field := value`, annotated with the receiver's static class.
    /// Evaluates to the assigned value.
    SetField {
        receiver: VarName,
        receiver_class: ClassName,
        field: FieldName,
        value: VarName,
    },
}

/// A method: ordered formal parameters with declared classes, a declared
/// return class, and a body expression whose free variables are `this` and
/// the parameters.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MethodDecl {
    pub name: MethodName,
    pub params: Vec<(VarName, ClassName)>,
    pub return_class: ClassName,
    pub body: Expr,
}

impl MethodDecl {
    pub fn param_names(&self) -> impl Iterator<Item = &VarName> {
        self.params.iter().map(|(x, _)| x)
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// A user-declared class: its direct superclass, declared fields (none may
/// shadow an inherited field), and declared methods.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClassDecl {
    pub name: ClassName,
    pub superclass: ClassName,
    pub fields: BTreeMap<FieldName, ClassName>,
    pub methods: BTreeMap<MethodName, MethodDecl>,
}

/// A whole program: the user class hierarchy plus the registry of allocation
/// labels (each label is globally unique and remembers the class it creates).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    classes: BTreeMap<ClassName, ClassDecl>,
    labels: BTreeMap<Label, ClassName>,
}

impl Program {
    pub(crate) fn new(
        classes: BTreeMap<ClassName, ClassDecl>,
        labels: BTreeMap<Label, ClassName>,
    ) -> Self {
        Program { classes, labels }
    }

    /// The user-declared classes, in name order. `Object` and `NullType`
    /// are implicit and never appear here.
    pub fn classes(&self) -> impl Iterator<Item = &ClassDecl> {
        self.classes.values()
    }

    pub fn class(&self, name: &ClassName) -> Option<&ClassDecl> {
        self.classes.get(name)
    }

    /// True for user classes and the two distinguished classes.
    pub fn has_class(&self, name: &ClassName) -> bool {
        *name == ClassName::object()
            || *name == ClassName::null_type()
            || self.classes.contains_key(name)
    }

    /// All allocation labels with the class each one creates.
    pub fn labels(&self) -> impl Iterator<Item = (&Label, &ClassName)> {
        self.labels.iter()
    }

    pub fn class_of_label(&self, label: &Label) -> Option<&ClassName> {
        self.labels.get(label)
    }

    /// Every region a run of this program can mention: `Null` plus one
    /// `Created@ℓ` region per allocation site.
    pub fn region_universe(&self) -> RegionSet {
        let mut out: RegionSet = [Region::Null].into_iter().collect();
        out.extend(self.labels.keys().map(|l| Region::Created(l.clone())));
        out
    }

    /// The direct superclass: declared for user classes, absent for
    /// `Object`. `NullType` reports `Object` so chain walks terminate.
    pub fn superclass_of(&self, name: &ClassName) -> Option<ClassName> {
        if *name == ClassName::object() {
            None
        } else if *name == ClassName::null_type() {
            Some(ClassName::object())
        } else {
            self.classes.get(name).map(|c| c.superclass.clone())
        }
    }

    /// Reflexive-transitive subclassing: every class sits below `Object`,
    /// and `NullType` sits below every class.
    pub fn subtype(&self, c: &ClassName, d: &ClassName) -> bool {
        if c == d || *d == ClassName::object() || *c == ClassName::null_type() {
            return true;
        }
        let mut cur = c.clone();
        while let Some(decl) = self.classes.get(&cur) {
            if decl.superclass == *d {
                return true;
            }
            cur = decl.superclass.clone();
        }
        false
    }

    /// Proper subclassing: `subtype` minus reflexivity.
    pub fn strict_subtype(&self, c: &ClassName, d: &ClassName) -> bool {
        c != d && self.subtype(c, d)
    }

    /// Least upper bound of two classes along the superclass chains; falls
    /// back to `Object` when the chains first meet there.
    pub fn lub(&self, c: &ClassName, d: &ClassName) -> ClassName {
        if self.subtype(c, d) {
            return d.clone();
        }
        if self.subtype(d, c) {
            return c.clone();
        }
        let mut cur = c.clone();
        while let Some(sup) = self.superclass_of(&cur) {
            cur = sup;
            if self.subtype(d, &cur) {
                return cur;
            }
        }
        ClassName::object()
    }

    /// Declared plus inherited fields, each with its declared class.
    /// `Object` and `NullType` have none.
    pub fn fields_of(&self, c: &ClassName) -> BTreeMap<FieldName, ClassName> {
        let mut out = BTreeMap::new();
        let mut cur = c.clone();
        while let Some(decl) = self.classes.get(&cur) {
            for (f, fc) in &decl.fields {
                out.entry(f.clone()).or_insert_with(|| fc.clone());
            }
            cur = decl.superclass.clone();
        }
        out
    }

    /// Declared plus inherited method names. `Object` and `NullType` have
    /// none.
    pub fn methods_of(&self, c: &ClassName) -> BTreeSet<MethodName> {
        let mut out = BTreeSet::new();
        let mut cur = c.clone();
        while let Some(decl) = self.classes.get(&cur) {
            out.extend(decl.methods.keys().cloned());
            cur = decl.superclass.clone();
        }
        out
    }

    /// The most-derived definition of `m` at or above `c`, together with the
    /// class that declares it.
    pub fn mtable_lookup(&self, c: &ClassName, m: &MethodName) -> Option<(ClassName, &MethodDecl)> {
        let mut cur = c.clone();
        while let Some(decl) = self.classes.get(&cur) {
            if let Some(method) = decl.methods.get(m) {
                return Some((cur, method));
            }
            cur = decl.superclass.clone();
        }
        None
    }
}
