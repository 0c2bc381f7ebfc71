//! Renders a resolved program back to concrete syntax. Reparsing the output
//! yields a structurally identical program: binders are already distinct, so
//! no renaming happens on the way back in, and receiver annotations are
//! recomputed to the same classes they were resolved to.

use std::fmt::Write as _;

use super::ast::{Expr, Program};

/// Renders one expression. `indent` is the current left margin.
fn write_expr(out: &mut String, e: &Expr, indent: usize) {
    let margin = " ".repeat(indent);
    match e {
        Expr::Var(x) => {
            let _ = write!(out, "{x}");
        }
        Expr::Let { var, bound, body } => {
            let _ = write!(out, "let {var} = ");
            match **bound {
                // A let inside a binding needs grouping to read back as the
                // inner binding.
                Expr::Let { .. } => {
                    let _ = write!(out, "(");
                    write_expr(out, bound, indent);
                    let _ = write!(out, ")");
                }
                _ => write_expr(out, bound, indent),
            }
            let _ = write!(out, " in\n{margin}");
            write_expr(out, body, indent);
        }
        Expr::If { left, right, then_branch, else_branch } => {
            let inner = " ".repeat(indent + 2);
            let _ = write!(out, "if ({left} == {right}) {{\n{inner}");
            write_expr(out, then_branch, indent + 2);
            let _ = write!(out, "\n{margin}}} else {{\n{inner}");
            write_expr(out, else_branch, indent + 2);
            let _ = write!(out, "\n{margin}}}");
        }
        Expr::Null => {
            let _ = write!(out, "null");
        }
        Expr::New { label, class } => {
            let _ = write!(out, "new[{label}] {class}()");
        }
        Expr::Cast { class, expr } => {
            let _ = write!(out, "({class}) ");
            match **expr {
                // Cast operands bind tightly; anything with a binder needs
                // grouping.
                Expr::Let { .. } => {
                    let _ = write!(out, "(");
                    write_expr(out, expr, indent);
                    let _ = write!(out, ")");
                }
                _ => write_expr(out, expr, indent),
            }
        }
        Expr::Call { receiver, method, args, .. } => {
            let args: Vec<&str> = args.iter().map(|a| a.as_str()).collect();
            let _ = write!(out, "{receiver}.{method}({})", args.join(", "));
        }
        Expr::GetField { receiver, field, .. } => {
            let _ = write!(out, "{receiver}.{field}");
        }
        Expr::SetField { receiver, field, value, .. } => {
            let _ = write!(out, "{receiver}.{field} := {value}");
        }
    }
}

/// Renders a whole program in the concrete grammar.
pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for class in program.classes() {
        let _ = writeln!(out, "class {} extends {} {{", class.name, class.superclass);
        for (field, field_class) in &class.fields {
            let _ = writeln!(out, "  {field_class} {field};");
        }
        for method in class.methods.values() {
            let params: Vec<String> = method
                .params
                .iter()
                .map(|(name, class)| format!("{class} {name}"))
                .collect();
            let _ = writeln!(
                out,
                "  {} {}({}) {{",
                method.return_class,
                method.name,
                params.join(", ")
            );
            let _ = write!(out, "    ");
            write_expr(&mut out, &method.body, 4);
            let _ = writeln!(out, "\n  }}");
        }
        let _ = writeln!(out, "}}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    #[test]
    fn round_trip_preserves_program_structure() {
        let source = "class Node extends Object {\n\
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
             }";
        let once = parse_program(source).expect("parses");
        let printed = pretty_print(&once);
        let twice = parse_program(&printed).expect("pretty output parses");
        assert_eq!(once, twice);
    }

    #[test]
    fn round_trip_covers_casts_groupings_and_renamed_binders() {
        let source = "class A extends Object {\n\
               A f;\n\
               A m(A p) {\n\
                 let x = p in\n\
                 let x = (A) (let y = x in y.f := x; y) in\n\
                 x.m(x)\n\
               }\n\
             }";
        let once = parse_program(source).expect("parses");
        let printed = pretty_print(&once);
        let twice = parse_program(&printed).expect("pretty output parses");
        assert_eq!(once, twice);
    }
}
