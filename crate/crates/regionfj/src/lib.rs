//! Region type inference for a Featherweight Java dialect.
//!
//! The toolkit infers, for every allocation site in a program, which sites a
//! variable or field can refer to at run time. It does so compositionally:
//! each method body is summarized once as an abstract transformation over
//! typing environments, and the summary is replayed — never the body — at
//! every calling context. The pieces:
//!
//! - [`graph`]: access graphs, compact descriptions of field-path sets.
//! - [`term`]: symbolic region terms built from variables, allocation sites,
//!   and access graphs.
//! - [`transform`]: abstract transformations (variable assignments plus
//!   field constraints), with substitution, composition, and join.
//! - [`env`]: typing environments and the application of a transformation to
//!   one, via an inner fixed point over field typings.
//! - [`syntax`]: the surface language — parser, resolved core AST, and
//!   pretty-printer.
//! - [`inference`]: the analysis proper — per-method summary tables, their
//!   instantiation into region-level class tables, and an independent
//!   declarative checker.
//! - [`report`]: text and JSON renderings of analysis results.
//! - [`cli`]: the `regionfj` command-line front end.

pub mod cli;
pub mod env;
pub mod graph;
pub mod inference;
pub mod names;
pub mod region;
pub mod report;
pub mod syntax;
pub mod term;
pub mod transform;

pub use env::{apply, apply_counted, instantiate_atom, instantiate_term, step, Env, FieldUniverse};
pub use graph::FieldGraph;
pub use inference::{
    analyze, analyze_with, canonicalize_params, compute_class_table, compute_method_table,
    summarize_expr, Analysis, AnalysisError, CheckDiagnostic, Checker, ClassTable, MethodStats,
    Options, RegionUniverse, Stats, Summary, SummaryTable, TypingContext,
};
pub use names::{ClassName, FieldName, Label, MethodName, VarName};
pub use region::{Region, RegionSet};
pub use term::{Atom, Base, Term};
pub use transform::{Key, Transform};
