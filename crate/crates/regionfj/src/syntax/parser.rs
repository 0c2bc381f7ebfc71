//! Recursive-descent parser and resolver for `.fj` sources.
//!
//! Parsing produces a surface tree; resolution then validates the class
//! hierarchy, computes each receiver's static class from declared variable
//! classes, registers allocation labels (globally unique), desugars `e1; e2`
//! into a let binding, and alpha-renames let binders so that, within one
//! method body, every binder is distinct from `this`, the parameters, and
//! every other binder.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{ClassDecl, Expr, MethodDecl, Program};
use super::lexer::{lex, Tok, Token};
use super::Diagnostic;
use crate::names::{ClassName, FieldName, Label, MethodName, VarName};

// ---------------------------------------------------------------------------
// Surface trees (positions kept for diagnostics, discarded after resolution)
// ---------------------------------------------------------------------------

struct SExpr {
    kind: SExprKind,
    line: usize,
    col: usize,
}

enum SExprKind {
    Var(String),
    Let(String, Box<SExpr>, Box<SExpr>),
    Seq(Box<SExpr>, Box<SExpr>),
    If(String, String, Box<SExpr>, Box<SExpr>),
    Null,
    New(String, String),
    Cast(String, Box<SExpr>),
    Call(String, String, Vec<String>),
    Get(String, String),
    Set(String, String, String),
}

struct SMethod {
    return_class: String,
    name: String,
    params: Vec<(String, String)>,
    body: SExpr,
    line: usize,
    col: usize,
}

struct SField {
    class: String,
    name: String,
    line: usize,
    col: usize,
}

struct SClass {
    name: String,
    superclass: String,
    fields: Vec<SField>,
    methods: Vec<SMethod>,
    line: usize,
    col: usize,
}

// ---------------------------------------------------------------------------
// Token-stream parser
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &Token {
        let idx = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[idx]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> Diagnostic {
        let t = self.peek();
        Diagnostic::new(t.line, t.col, message)
    }

    fn expect(&mut self, want: Tok) -> Result<Token, Diagnostic> {
        if self.peek().tok == want {
            Ok(self.advance())
        } else {
            Err(self.error_here(format!("expected {want}, found {}", self.peek().tok)))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, usize, usize), Diagnostic> {
        match &self.peek().tok {
            Tok::Ident(_) => {
                let t = self.advance();
                let Tok::Ident(name) = t.tok else { unreachable!() };
                Ok((name, t.line, t.col))
            }
            other => Err(self.error_here(format!("expected {what}, found {other}"))),
        }
    }

    fn parse_program(&mut self) -> Result<Vec<SClass>, Diagnostic> {
        let mut classes = Vec::new();
        while self.peek().tok != Tok::Eof {
            classes.push(self.parse_class()?);
        }
        Ok(classes)
    }

    fn parse_class(&mut self) -> Result<SClass, Diagnostic> {
        let kw = self.expect(Tok::KwClass)?;
        let (name, _, _) = self.expect_ident("a class name")?;
        let superclass = if self.peek().tok == Tok::KwExtends {
            self.advance();
            self.expect_ident("a superclass name")?.0
        } else {
            "Object".to_string()
        };
        self.expect(Tok::LBrace)?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        while self.peek().tok != Tok::RBrace {
            let (member_class, line, col) = self.expect_ident("a field or method declaration")?;
            let (member_name, ..) = self.expect_ident("a field or method name")?;
            match self.peek().tok {
                Tok::Semi => {
                    self.advance();
                    fields.push(SField { class: member_class, name: member_name, line, col });
                }
                Tok::LParen => {
                    self.advance();
                    let mut params = Vec::new();
                    if self.peek().tok != Tok::RParen {
                        loop {
                            let (pc, ..) = self.expect_ident("a parameter class")?;
                            let (pn, ..) = self.expect_ident("a parameter name")?;
                            params.push((pc, pn));
                            if self.peek().tok == Tok::Comma {
                                self.advance();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::LBrace)?;
                    let body = self.parse_expr()?;
                    self.expect(Tok::RBrace)?;
                    methods.push(SMethod {
                        return_class: member_class,
                        name: member_name,
                        params,
                        body,
                        line,
                        col,
                    });
                }
                _ => {
                    return Err(self.error_here(format!(
                        "expected `;` (field) or `(` (method), found {}",
                        self.peek().tok
                    )));
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(SClass { name, superclass, fields, methods, line: kw.line, col: kw.col })
    }

    /// `expr = let IDENT = expr in expr | simple [ ; expr ]`
    fn parse_expr(&mut self) -> Result<SExpr, Diagnostic> {
        if self.peek().tok == Tok::KwLet {
            let kw = self.advance();
            let (name, ..) = self.expect_ident("a variable name")?;
            self.expect(Tok::Eq)?;
            let bound = self.parse_expr()?;
            self.expect(Tok::KwIn)?;
            let body = self.parse_expr()?;
            return Ok(SExpr {
                kind: SExprKind::Let(name, Box::new(bound), Box::new(body)),
                line: kw.line,
                col: kw.col,
            });
        }
        let first = self.parse_simple()?;
        if self.peek().tok == Tok::Semi {
            self.advance();
            let rest = self.parse_expr()?;
            let (line, col) = (first.line, first.col);
            return Ok(SExpr {
                kind: SExprKind::Seq(Box::new(first), Box::new(rest)),
                line,
                col,
            });
        }
        Ok(first)
    }

    /// `simple = if (x == y) {e} else {e} | null | new[l] C() | (C) simple
    ///         | ( expr ) | IDENT [ .f | .f := y | .m(args) ]`
    fn parse_simple(&mut self) -> Result<SExpr, Diagnostic> {
        let at = self.peek().clone();
        match &at.tok {
            Tok::KwIf => {
                self.advance();
                self.expect(Tok::LParen)?;
                let (left, ..) = self.expect_ident("a variable")?;
                self.expect(Tok::EqEq)?;
                let (right, ..) = self.expect_ident("a variable")?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::LBrace)?;
                let then_branch = self.parse_expr()?;
                self.expect(Tok::RBrace)?;
                self.expect(Tok::KwElse)?;
                self.expect(Tok::LBrace)?;
                let else_branch = self.parse_expr()?;
                self.expect(Tok::RBrace)?;
                Ok(SExpr {
                    kind: SExprKind::If(left, right, Box::new(then_branch), Box::new(else_branch)),
                    line: at.line,
                    col: at.col,
                })
            }
            Tok::KwNull => {
                self.advance();
                Ok(SExpr { kind: SExprKind::Null, line: at.line, col: at.col })
            }
            Tok::KwNew => {
                self.advance();
                self.expect(Tok::LBracket)?;
                let (label, ..) = self.expect_ident("an allocation label")?;
                self.expect(Tok::RBracket)?;
                let (class, ..) = self.expect_ident("a class name")?;
                self.expect(Tok::LParen)?;
                self.expect(Tok::RParen)?;
                Ok(SExpr { kind: SExprKind::New(label, class), line: at.line, col: at.col })
            }
            Tok::LParen => {
                // `(C) e` is a cast when a lone identifier in parentheses is
                // followed by the start of another simple expression;
                // otherwise the parentheses just group.
                self.advance();
                let is_cast = matches!(self.peek().tok, Tok::Ident(_))
                    && self.peek_at(1).tok == Tok::RParen
                    && matches!(
                        self.peek_at(2).tok,
                        Tok::Ident(_) | Tok::KwNull | Tok::KwNew | Tok::KwIf | Tok::LParen
                    );
                if is_cast {
                    let (class, ..) = self.expect_ident("a class name")?;
                    self.expect(Tok::RParen)?;
                    let inner = self.parse_simple()?;
                    Ok(SExpr {
                        kind: SExprKind::Cast(class, Box::new(inner)),
                        line: at.line,
                        col: at.col,
                    })
                } else {
                    let inner = self.parse_expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(inner)
                }
            }
            Tok::Ident(_) => {
                let (name, line, col) = self.expect_ident("a variable")?;
                if self.peek().tok != Tok::Dot {
                    return Ok(SExpr { kind: SExprKind::Var(name), line, col });
                }
                self.advance();
                let (member, ..) = self.expect_ident("a field or method name")?;
                match self.peek().tok {
                    Tok::LParen => {
                        self.advance();
                        let mut args = Vec::new();
                        if self.peek().tok != Tok::RParen {
                            loop {
                                args.push(self.expect_ident("an argument variable")?.0);
                                if self.peek().tok == Tok::Comma {
                                    self.advance();
                                } else {
                                    break;
                                }
                            }
                        }
                        self.expect(Tok::RParen)?;
                        Ok(SExpr { kind: SExprKind::Call(name, member, args), line, col })
                    }
                    Tok::Assign => {
                        self.advance();
                        let (value, ..) = self.expect_ident("a variable")?;
                        Ok(SExpr { kind: SExprKind::Set(name, member, value), line, col })
                    }
                    _ => Ok(SExpr { kind: SExprKind::Get(name, member), line, col }),
                }
            }
            other => Err(self.error_here(format!("expected an expression, found {other}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Resolution: hierarchy validation, static classes, labels, alpha-renaming
// ---------------------------------------------------------------------------

struct Resolver<'a> {
    skeleton: &'a Program,
    diags: Vec<Diagnostic>,
    labels: BTreeMap<Label, ClassName>,
}

/// Scope entry: surface name, core (possibly renamed) name, static class.
type Scope = Vec<(String, VarName, ClassName)>;

fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    let mut k = 1usize;
    loop {
        let candidate = format!("{base}${k}");
        if !used.contains(&candidate) {
            return candidate;
        }
        k += 1;
    }
}

impl Resolver<'_> {
    fn err(&mut self, line: usize, col: usize, message: impl Into<String>) {
        self.diags.push(Diagnostic::new(line, col, message));
    }

    fn lookup_var(
        &mut self,
        name: &str,
        scope: &Scope,
        line: usize,
        col: usize,
    ) -> Option<(VarName, ClassName)> {
        for (surface, core, class) in scope.iter().rev() {
            if surface == name {
                return Some((core.clone(), class.clone()));
            }
        }
        self.err(line, col, format!("unknown variable `{name}`"));
        None
    }

    fn check_class_exists(&mut self, name: &str, line: usize, col: usize) -> Option<ClassName> {
        let class = ClassName::new(name);
        if self.skeleton.has_class(&class) {
            Some(class)
        } else {
            self.err(line, col, format!("unknown class `{name}`"));
            None
        }
    }

    fn resolve_method(&mut self, class: &ClassName, method: &SMethod) -> Option<Expr> {
        let mut scope: Scope = vec![(
            "this".to_string(),
            VarName::this(),
            class.clone(),
        )];
        let mut used: BTreeSet<String> = ["this".to_string()].into_iter().collect();
        for (pc, pn) in &method.params {
            scope.push((pn.clone(), VarName::new(pn), ClassName::new(pc)));
            used.insert(pn.clone());
        }
        let (body, body_class) = self.resolve_expr(&method.body, &mut scope, &mut used)?;
        let declared = ClassName::new(&method.return_class);
        if !self.skeleton.subtype(&body_class, &declared) {
            self.err(
                method.line,
                method.col,
                format!(
                    "body of method `{}` has class `{body_class}`, which is not a subclass of \
                     the declared return class `{declared}`",
                    method.name
                ),
            );
            return None;
        }
        Some(body)
    }

    fn resolve_let_like(
        &mut self,
        surface_name: &str,
        bound: &SExpr,
        body: &SExpr,
        scope: &mut Scope,
        used: &mut BTreeSet<String>,
        line: usize,
        col: usize,
    ) -> Option<(Expr, ClassName)> {
        if surface_name == "this" {
            self.err(line, col, "`this` cannot be rebound");
            return None;
        }
        let (bound_core, bound_class) = self.resolve_expr(bound, scope, used)?;
        let core_name = fresh_name(surface_name, used);
        used.insert(core_name.clone());
        scope.push((surface_name.to_string(), VarName::new(&core_name), bound_class));
        let resolved_body = self.resolve_expr(body, scope, used);
        scope.pop();
        let (body_core, body_class) = resolved_body?;
        Some((
            Expr::Let {
                var: VarName::new(&core_name),
                bound: Box::new(bound_core),
                body: Box::new(body_core),
            },
            body_class,
        ))
    }

    fn resolve_expr(
        &mut self,
        e: &SExpr,
        scope: &mut Scope,
        used: &mut BTreeSet<String>,
    ) -> Option<(Expr, ClassName)> {
        let (line, col) = (e.line, e.col);
        match &e.kind {
            SExprKind::Var(name) => {
                let (core, class) = self.lookup_var(name, scope, line, col)?;
                Some((Expr::Var(core), class))
            }
            SExprKind::Let(name, bound, body) => {
                self.resolve_let_like(name, bound, body, scope, used, line, col)
            }
            SExprKind::Seq(first, rest) => {
                // `e1; e2` is `let _ = e1 in e2` with a throwaway binder.
                self.resolve_let_like("_", first, rest, scope, used, line, col)
            }
            SExprKind::If(left, right, then_branch, else_branch) => {
                let (left_core, _) = self.lookup_var(left, scope, line, col)?;
                let (right_core, _) = self.lookup_var(right, scope, line, col)?;
                let (then_core, then_class) = self.resolve_expr(then_branch, scope, used)?;
                let (else_core, else_class) = self.resolve_expr(else_branch, scope, used)?;
                let class = self.skeleton.lub(&then_class, &else_class);
                Some((
                    Expr::If {
                        left: left_core,
                        right: right_core,
                        then_branch: Box::new(then_core),
                        else_branch: Box::new(else_core),
                    },
                    class,
                ))
            }
            SExprKind::Null => Some((Expr::Null, ClassName::null_type())),
            SExprKind::New(label, class) => {
                let class = self.check_class_exists(class, line, col)?;
                if class == ClassName::null_type() {
                    self.err(line, col, "`NullType` is not instantiable");
                    return None;
                }
                let label = Label::new(label);
                if self.labels.contains_key(&label) {
                    self.err(line, col, format!("duplicate allocation label `{label}`"));
                    return None;
                }
                self.labels.insert(label.clone(), class.clone());
                Some((Expr::New { label, class: class.clone() }, class))
            }
            SExprKind::Cast(class, inner) => {
                let class = self.check_class_exists(class, line, col)?;
                if class == ClassName::null_type() {
                    self.err(line, col, "cannot cast to `NullType`");
                    return None;
                }
                let (inner_core, _) = self.resolve_expr(inner, scope, used)?;
                Some((Expr::Cast { class: class.clone(), expr: Box::new(inner_core) }, class))
            }
            SExprKind::Call(receiver, method, args) => {
                let (receiver_core, receiver_class) =
                    self.lookup_var(receiver, scope, line, col)?;
                let method = MethodName::new(method);
                let Some((_, decl)) = self.skeleton.mtable_lookup(&receiver_class, &method)
                else {
                    self.err(
                        line,
                        col,
                        format!("class `{receiver_class}` has no method `{method}`"),
                    );
                    return None;
                };
                let (arity, return_class) = (decl.arity(), decl.return_class.clone());
                if args.len() != arity {
                    self.err(
                        line,
                        col,
                        format!(
                            "method `{method}` takes {arity} argument(s), but {} were supplied",
                            args.len()
                        ),
                    );
                    return None;
                }
                let mut arg_cores = Vec::new();
                for arg in args {
                    arg_cores.push(self.lookup_var(arg, scope, line, col)?.0);
                }
                Some((
                    Expr::Call {
                        receiver: receiver_core,
                        receiver_class,
                        method,
                        args: arg_cores,
                    },
                    return_class,
                ))
            }
            SExprKind::Get(receiver, field) => {
                let (receiver_core, receiver_class) =
                    self.lookup_var(receiver, scope, line, col)?;
                let field = FieldName::new(field);
                let Some(field_class) = self.skeleton.fields_of(&receiver_class).remove(&field)
                else {
                    self.err(
                        line,
                        col,
                        format!("class `{receiver_class}` has no field `{field}`"),
                    );
                    return None;
                };
                Some((
                    Expr::GetField { receiver: receiver_core, receiver_class, field },
                    field_class,
                ))
            }
            SExprKind::Set(receiver, field, value) => {
                let (receiver_core, receiver_class) =
                    self.lookup_var(receiver, scope, line, col)?;
                let field = FieldName::new(field);
                if !self.skeleton.fields_of(&receiver_class).contains_key(&field) {
                    self.err(
                        line,
                        col,
                        format!("class `{receiver_class}` has no field `{field}`"),
                    );
                    return None;
                }
                let (value_core, value_class) = self.lookup_var(value, scope, line, col)?;
                Some((
                    Expr::SetField {
                        receiver: receiver_core,
                        receiver_class,
                        field,
                        value: value_core,
                    },
                    value_class,
                ))
            }
        }
    }
}

/// Validates class-level structure and builds a skeleton program (signatures
/// only, placeholder bodies) for resolving method bodies against.
fn build_skeleton(classes: &[SClass]) -> Result<Program, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut table: BTreeMap<ClassName, ClassDecl> = BTreeMap::new();

    for sc in classes {
        let name = ClassName::new(&sc.name);
        if name == ClassName::object() || name == ClassName::null_type() {
            diags.push(Diagnostic::new(
                sc.line,
                sc.col,
                format!("class `{name}` is built in and cannot be declared"),
            ));
            continue;
        }
        if table.contains_key(&name) {
            diags.push(Diagnostic::new(sc.line, sc.col, format!("duplicate class `{name}`")));
            continue;
        }
        let superclass = ClassName::new(&sc.superclass);
        if superclass == ClassName::null_type() {
            diags.push(Diagnostic::new(sc.line, sc.col, "cannot extend `NullType`".to_string()));
            continue;
        }
        let mut fields = BTreeMap::new();
        for f in &sc.fields {
            if fields.insert(FieldName::new(&f.name), ClassName::new(&f.class)).is_some() {
                diags.push(Diagnostic::new(
                    f.line,
                    f.col,
                    format!("duplicate field `{}` in class `{name}`", f.name),
                ));
            }
        }
        let mut methods = BTreeMap::new();
        for m in &sc.methods {
            let mname = MethodName::new(&m.name);
            if methods.contains_key(&mname) {
                diags.push(Diagnostic::new(
                    m.line,
                    m.col,
                    format!("duplicate method `{mname}` in class `{name}`"),
                ));
                continue;
            }
            let mut seen = BTreeSet::new();
            let mut params = Vec::new();
            for (pc, pn) in &m.params {
                if pn == "this" {
                    diags.push(Diagnostic::new(
                        m.line,
                        m.col,
                        format!("parameter of `{mname}` cannot be named `this`"),
                    ));
                } else if !seen.insert(pn.clone()) {
                    diags.push(Diagnostic::new(
                        m.line,
                        m.col,
                        format!("duplicate parameter `{pn}` in method `{mname}`"),
                    ));
                }
                params.push((VarName::new(pn), ClassName::new(pc)));
            }
            methods.insert(
                mname.clone(),
                MethodDecl {
                    name: mname,
                    params,
                    return_class: ClassName::new(&m.return_class),
                    body: Expr::Null,
                },
            );
        }
        table.insert(name.clone(), ClassDecl { name, superclass, fields, methods });
    }

    let skeleton = Program::new(table, BTreeMap::new());

    // Referenced classes must exist (superclasses, field/param/return
    // classes), and the hierarchy must be acyclic before any chain walk.
    for sc in classes {
        let mut check = |class_name: &str, line: usize, col: usize| {
            if !skeleton.has_class(&ClassName::new(class_name)) {
                diags.push(Diagnostic::new(line, col, format!("unknown class `{class_name}`")));
            }
        };
        check(&sc.superclass, sc.line, sc.col);
        for f in &sc.fields {
            check(&f.class, f.line, f.col);
        }
        for m in &sc.methods {
            check(&m.return_class, m.line, m.col);
            for (pc, _) in &m.params {
                check(pc, m.line, m.col);
            }
        }
    }
    for sc in classes {
        let start = ClassName::new(&sc.name);
        let mut seen: BTreeSet<ClassName> = [start.clone()].into_iter().collect();
        let mut cur = start.clone();
        while let Some(sup) = skeleton.superclass_of(&cur) {
            if sup == start {
                // Report each cycle once, at its least-named member.
                if seen.iter().min() == Some(&start) {
                    diags.push(Diagnostic::new(
                        sc.line,
                        sc.col,
                        format!("cyclic inheritance involving class `{start}`"),
                    ));
                }
                break;
            }
            if !seen.insert(sup.clone()) {
                break;
            }
            cur = sup;
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    // Chain walks are safe now: reject shadowed fields and arity-changing
    // overrides.
    for sc in classes {
        let name = ClassName::new(&sc.name);
        let decl = skeleton.class(&name).expect("declared above");
        let inherited = skeleton.fields_of(&decl.superclass);
        for f in &sc.fields {
            if inherited.contains_key(&FieldName::new(&f.name)) {
                diags.push(Diagnostic::new(
                    f.line,
                    f.col,
                    format!("field `{}` shadows an inherited field", f.name),
                ));
            }
        }
        for m in &sc.methods {
            let mname = MethodName::new(&m.name);
            if let Some((_, inherited_decl)) =
                skeleton.mtable_lookup(&decl.superclass, &mname)
            {
                if inherited_decl.arity() != m.params.len() {
                    diags.push(Diagnostic::new(
                        m.line,
                        m.col,
                        format!(
                            "override of `{mname}` changes arity from {} to {}",
                            inherited_decl.arity(),
                            m.params.len()
                        ),
                    ));
                }
            }
        }
    }
    if diags.is_empty() {
        Ok(skeleton)
    } else {
        Err(diags)
    }
}

/// Full pipeline: lex, parse, validate, resolve. On failure, at least one
/// diagnostic with a line/column position.
pub fn parse_source(source: &str) -> Result<Program, Vec<Diagnostic>> {
    let tokens = lex(source).map_err(|d| vec![d])?;
    let mut parser = Parser { tokens, pos: 0 };
    let classes = parser.parse_program().map_err(|d| vec![d])?;
    let skeleton = build_skeleton(&classes)?;

    let mut resolver = Resolver { skeleton: &skeleton, diags: Vec::new(), labels: BTreeMap::new() };
    let mut resolved: BTreeMap<ClassName, ClassDecl> = BTreeMap::new();
    for sc in &classes {
        let class_name = ClassName::new(&sc.name);
        let mut decl = skeleton.class(&class_name).expect("validated above").clone();
        for m in &sc.methods {
            if let Some(body) = resolver.resolve_method(&class_name, m) {
                decl.methods.get_mut(&MethodName::new(&m.name)).expect("declared above").body =
                    body;
            }
        }
        resolved.insert(class_name, decl);
    }
    if resolver.diags.is_empty() {
        Ok(Program::new(resolved, resolver.labels))
    } else {
        Err(resolver.diags)
    }
}
