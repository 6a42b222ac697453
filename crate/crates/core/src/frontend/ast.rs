//! Statements, methods and programs.

use crate::expr::{BoolExpr, IntExpr, PermExpr};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Position of a syntax node in its source file (1-based).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
}

impl SourceSpan {
    pub fn new(file: &str, line: u32, column: u32) -> Self {
        SourceSpan { file: Arc::from(file), line, column }
    }

    /// Span for nodes synthesised outside any file.
    pub fn synthetic() -> Self {
        SourceSpan::new("<synthetic>", 0, 0)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Array,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Int => "Int",
            Type::Array => "Int[]",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhileLoop {
    pub cond: BoolExpr,
    /// Annotated over-approximate invariants (`invariant`).
    pub over_inv: Vec<BoolExpr>,
    /// Annotated under-approximate invariants (`underinvariant`).
    pub under_inv: Vec<BoolExpr>,
    pub body: Box<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Skip,
    AssignVar(String, IntExpr),
    AssignArrayVar(String, String),
    LoadElem(String, String, IntExpr),
    /// `a[e1] := e2`; after parsing `e2` is always a variable.
    StoreElem(String, IntExpr, IntExpr),
    Inhale(String, IntExpr, PermExpr),
    Exhale(String, IntExpr, PermExpr),
    Seq(Box<Stmt>, Box<Stmt>),
    If(BoolExpr, Box<Stmt>, Box<Stmt>),
    While(WhileLoop),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: SourceSpan,
}

impl Stmt {
    pub fn new(kind: StmtKind, span: SourceSpan) -> Self {
        Stmt { kind, span }
    }

    pub fn synthetic(kind: StmtKind) -> Self {
        Stmt { kind, span: SourceSpan::synthetic() }
    }

    pub fn skip() -> Self {
        Stmt::synthetic(StmtKind::Skip)
    }

    /// Right-nested sequence of `stmts`; `skip` when empty.
    pub fn seq(mut stmts: Vec<Stmt>) -> Stmt {
        let Some(mut acc) = stmts.pop() else {
            return Stmt::skip();
        };
        while let Some(s) = stmts.pop() {
            let span = s.span.clone();
            acc = Stmt::new(StmtKind::Seq(Box::new(s), Box::new(acc)), span);
        }
        acc
    }

    /// Equality ignoring spans.
    pub fn same_structure(&self, other: &Stmt) -> bool {
        use StmtKind::*;
        match (&self.kind, &other.kind) {
            (Seq(a1, b1), Seq(a2, b2)) => a1.same_structure(a2) && b1.same_structure(b2),
            (If(c1, a1, b1), If(c2, a2, b2)) => c1 == c2 && a1.same_structure(a2) && b1.same_structure(b2),
            (While(w1), While(w2)) => {
                w1.cond == w2.cond
                    && w1.over_inv == w2.over_inv
                    && w1.under_inv == w2.under_inv
                    && w1.body.same_structure(&w2.body)
            }
            (a, b) => a == b,
        }
    }

    /// Integer variables assigned anywhere in the statement.
    pub fn modified_int_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |s| match &s.kind {
            StmtKind::AssignVar(x, _) | StmtKind::LoadElem(x, _, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Array variables reassigned anywhere in the statement.
    pub fn modified_array_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |s| {
            if let StmtKind::AssignArrayVar(a, _) = &s.kind {
                out.insert(a.clone());
            }
        });
        out
    }

    pub fn contains_exhale(&self) -> bool {
        let mut found = false;
        self.visit(&mut |s| found |= matches!(s.kind, StmtKind::Exhale(..)));
        found
    }

    pub fn is_loop_free(&self) -> bool {
        let mut found = false;
        self.visit(&mut |s| found |= matches!(s.kind, StmtKind::While(_)));
        !found
    }

    /// Pre-order traversal of all statement nodes.
    pub fn visit(&self, f: &mut dyn FnMut(&Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::Seq(a, b) | StmtKind::If(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            StmtKind::While(w) => w.body.visit(f),
            _ => {}
        }
    }

    /// The loops of the statement in pre-order, with their spans.
    pub fn loops(&self) -> Vec<(&SourceSpan, &WhileLoop)> {
        let mut out = Vec::new();
        collect_loops(self, &mut out);
        out
    }

    /// Rewrite every boolean condition and annotation.
    pub fn map_conditions<E>(&self, f: &mut dyn FnMut(&BoolExpr) -> Result<BoolExpr, E>) -> Result<Stmt, E> {
        let kind = match &self.kind {
            StmtKind::Seq(a, b) => StmtKind::Seq(Box::new(a.map_conditions(f)?), Box::new(b.map_conditions(f)?)),
            StmtKind::If(c, a, b) => {
                StmtKind::If(f(c)?, Box::new(a.map_conditions(f)?), Box::new(b.map_conditions(f)?))
            }
            StmtKind::While(w) => StmtKind::While(WhileLoop {
                cond: f(&w.cond)?,
                over_inv: w.over_inv.iter().map(&mut *f).collect::<Result<_, _>>()?,
                under_inv: w.under_inv.iter().map(&mut *f).collect::<Result<_, _>>()?,
                body: Box::new(w.body.map_conditions(f)?),
            }),
            k => k.clone(),
        };
        Ok(Stmt::new(kind, self.span.clone()))
    }
}

fn collect_loops<'a>(s: &'a Stmt, out: &mut Vec<(&'a SourceSpan, &'a WhileLoop)>) {
    match &s.kind {
        StmtKind::Seq(a, b) | StmtKind::If(_, a, b) => {
            collect_loops(a, out);
            collect_loops(b, out);
        }
        StmtKind::While(w) => {
            out.push((&s.span, w));
            collect_loops(&w.body, out);
        }
        _ => {}
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Method {
    pub name: String,
    pub params: Vec<Param>,
    /// Declared local variables in order of declaration.
    pub locals: Vec<Param>,
    pub requires: Option<PermExpr>,
    pub ensures: Option<PermExpr>,
    pub body: Stmt,
    pub span: SourceSpan,
}

impl Method {
    pub fn array_params(&self) -> impl Iterator<Item = &str> {
        self.params.iter().filter(|p| p.ty == Type::Array).map(|p| p.name.as_str())
    }

    pub fn int_params(&self) -> impl Iterator<Item = &str> {
        self.params.iter().filter(|p| p.ty == Type::Int).map(|p| p.name.as_str())
    }

    /// Every array variable in scope (parameters then locals).
    pub fn array_vars(&self) -> Vec<String> {
        self.params.iter().chain(&self.locals).filter(|p| p.ty == Type::Array).map(|p| p.name.clone()).collect()
    }

    /// Every integer variable in scope (parameters then locals).
    pub fn int_vars(&self) -> Vec<String> {
        self.params.iter().chain(&self.locals).filter(|p| p.ty == Type::Int).map(|p| p.name.clone()).collect()
    }

    pub fn same_structure(&self, other: &Method) -> bool {
        self.name == other.name
            && self.params == other.params
            && self.locals == other.locals
            && self.requires == other.requires
            && self.ensures == other.ensures
            && self.body.same_structure(&other.body)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program {
    pub methods: Vec<Method>,
}

impl Program {
    pub fn method(&self, name: &str) -> Option<&Method> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn same_structure(&self, other: &Program) -> bool {
        self.methods.len() == other.methods.len()
            && self.methods.iter().zip(&other.methods).all(|(a, b)| a.same_structure(b))
    }
}
