//! An independent declarative checker for inferred class tables.
//!
//! Where the inference engine builds summaries and instantiates them, the
//! checker re-derives a minimal region set for every method body directly
//! from the class table, context by context, and confirms the table's own
//! entry covers it. It shares no code with the summary machinery — field
//! reads and calls are answered straight out of the table — so agreement
//! between the two is meaningful evidence.

use std::collections::BTreeMap;
use std::fmt;

use crate::names::{ClassName, MethodName, VarName};
use crate::region::{render_region_set, Region, RegionSet};
use crate::syntax::{Expr, Program};

use super::{cartesian_product, ClassTable};

/// A finite map from variables to region sets — the `Γ` a body is checked
/// under. Absent variables read as the empty set.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TypingContext {
    vars: BTreeMap<VarName, RegionSet>,
}

impl TypingContext {
    pub fn new() -> Self {
        TypingContext::default()
    }

    pub fn var(&self, x: &VarName) -> RegionSet {
        self.vars.get(x).cloned().unwrap_or_default()
    }

    pub fn set_var(&mut self, x: VarName, regions: RegionSet) {
        self.vars.insert(x, regions);
    }

    pub fn with_var(mut self, x: impl Into<VarName>, regions: RegionSet) -> Self {
        self.set_var(x.into(), regions);
        self
    }
}

/// One checker finding, pinned to the calling context it arose in.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CheckDiagnostic {
    pub class: ClassName,
    pub region: Region,
    pub method: MethodName,
    pub arg_regions: Vec<Region>,
    pub message: String,
}

impl fmt::Display for CheckDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}(", self.class, self.method)?;
        for (i, r) in self.arg_regions.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ") with this : {}: {}", self.region, self.message)
    }
}

fn render_args(args: &[RegionSet]) -> String {
    let rendered: Vec<String> = args.iter().map(render_region_set).collect();
    rendered.join("; ")
}

/// Checks a program against a class table.
pub struct Checker<'a> {
    program: &'a Program,
    table: &'a ClassTable,
}

impl<'a> Checker<'a> {
    pub fn new(program: &'a Program, table: &'a ClassTable) -> Self {
        Checker { program, table }
    }

    /// Derives the minimal region set of `e` under `ctx`, pushing a message
    /// for every rule the table fails to support. Field reads and calls are
    /// answered from the table alone; a field write demands that every
    /// possible receiver's row already admits every possible written region.
    pub fn check_expr(
        &self,
        ctx: &TypingContext,
        e: &Expr,
        violations: &mut Vec<String>,
    ) -> RegionSet {
        match e {
            Expr::Var(x) => ctx.var(x),
            Expr::Let { var, bound, body } => {
                let bound_type = self.check_expr(ctx, bound, violations);
                let inner = ctx.clone().with_var(var.clone(), bound_type);
                self.check_expr(&inner, body, violations)
            }
            Expr::If { left, right, then_branch, else_branch } => {
                // In the then branch the two compared variables are known
                // equal, so both narrow to the intersection.
                let narrowed: RegionSet =
                    ctx.var(left).intersection(&ctx.var(right)).cloned().collect();
                let then_ctx = ctx
                    .clone()
                    .with_var(left.clone(), narrowed.clone())
                    .with_var(right.clone(), narrowed);
                let mut out = self.check_expr(&then_ctx, then_branch, violations);
                out.extend(self.check_expr(ctx, else_branch, violations));
                out
            }
            Expr::Null => [Region::Null].into_iter().collect(),
            Expr::New { label, .. } => [Region::Created(label.clone())].into_iter().collect(),
            Expr::Cast { expr, .. } => self.check_expr(ctx, expr, violations),
            Expr::Call { receiver, receiver_class, method, args } => {
                let arg_types: Vec<Vec<Region>> = args
                    .iter()
                    .map(|a| ctx.var(a).into_iter().collect())
                    .collect();
                let mut out = RegionSet::new();
                for region in &ctx.var(receiver) {
                    for tuple in cartesian_product(&arg_types) {
                        match self.table.method_type(receiver_class, region, method, &tuple) {
                            Some(set) => out.extend(set.iter().cloned()),
                            None => violations.push(format!(
                                "no method-table row for {receiver_class}.{method} with \
                                 receiver region {region} and argument regions [{}]",
                                render_args(
                                    &tuple
                                        .iter()
                                        .map(|r| [r.clone()].into_iter().collect())
                                        .collect::<Vec<RegionSet>>()
                                )
                            )),
                        }
                    }
                }
                out
            }
            Expr::GetField { receiver, receiver_class, field } => {
                let mut out = RegionSet::new();
                for region in &ctx.var(receiver) {
                    out.extend(self.table.field_type(receiver_class, region, field));
                }
                out
            }
            Expr::SetField { receiver, receiver_class, field, value } => {
                let written = ctx.var(value);
                for region in &ctx.var(receiver) {
                    let allowed = self.table.field_type(receiver_class, region, field);
                    if !written.is_subset(&allowed) {
                        violations.push(format!(
                            "write of {} into field {receiver_class}.{field} of region \
                             {region} exceeds its table row {}",
                            render_region_set(&written),
                            render_region_set(&allowed),
                        ));
                    }
                }
                written
            }
        }
    }

    /// Re-checks every method-table row: the row's body, checked in the
    /// row's context, must derive a region set the row covers. Returns every
    /// finding; an empty result means the table is self-consistent.
    pub fn check_well_typed(&self) -> Vec<CheckDiagnostic> {
        let mut diagnostics = Vec::new();
        for ((class, region, method, arg_regions), declared) in self.table.method_rows() {
            let diagnose = |message: String| CheckDiagnostic {
                class: class.clone(),
                region: region.clone(),
                method: method.clone(),
                arg_regions: arg_regions.clone(),
                message,
            };
            let Some((_, decl)) = self.program.mtable_lookup(class, method) else {
                diagnostics
                    .push(diagnose("table row refers to a method the program lacks".into()));
                continue;
            };
            if decl.arity() != arg_regions.len() {
                diagnostics.push(diagnose(format!(
                    "table row carries {} argument region(s) for a {}-parameter method",
                    arg_regions.len(),
                    decl.arity()
                )));
                continue;
            }
            let mut ctx = TypingContext::new()
                .with_var(VarName::this(), [region.clone()].into_iter().collect());
            for (param, arg_region) in decl.param_names().zip(arg_regions) {
                ctx.set_var(param.clone(), [arg_region.clone()].into_iter().collect());
            }
            let mut violations = Vec::new();
            let derived = self.check_expr(&ctx, &decl.body, &mut violations);
            if !derived.is_subset(declared) {
                diagnostics.push(diagnose(format!(
                    "derived result type {} is not covered by the table entry {}",
                    render_region_set(&derived),
                    render_region_set(declared),
                )));
            }
            diagnostics.extend(violations.into_iter().map(diagnose));
        }
        diagnostics
    }
}
