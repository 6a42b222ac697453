//! Pretty-printing in the syntax accepted by the parser.

use super::ast::{Method, Program, Stmt, StmtKind, Type};
use std::collections::BTreeSet;
use std::fmt::{self, Write};

struct Printer<'a> {
    out: &'a mut String,
    /// Locals not yet introduced by a `var` declaration.
    pending: BTreeSet<String>,
}

impl Printer<'_> {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn decl(&mut self, x: &str, ty: Type) -> String {
        if self.pending.remove(x) {
            format!("var {x}: {ty} := ")
        } else {
            format!("{x} := ")
        }
    }

    fn block(&mut self, s: &Stmt, depth: usize) {
        match &s.kind {
            StmtKind::Seq(a, b) => {
                self.block(a, depth);
                self.block(b, depth);
            }
            _ => self.stmt(s, depth),
        }
    }

    fn stmt(&mut self, s: &Stmt, depth: usize) {
        match &s.kind {
            StmtKind::Skip => self.line(depth, "skip"),
            StmtKind::AssignVar(x, e) => {
                let l = self.decl(x, Type::Int);
                self.line(depth, &format!("{l}{e}"));
            }
            StmtKind::AssignArrayVar(a1, a2) => {
                let l = self.decl(a1, Type::Array);
                self.line(depth, &format!("{l}{a2}"));
            }
            StmtKind::LoadElem(x, a, e) => {
                let l = self.decl(x, Type::Int);
                self.line(depth, &format!("{l}{a}[{e}]"));
            }
            StmtKind::StoreElem(a, e1, e2) => self.line(depth, &format!("{a}[{e1}] := {e2}")),
            StmtKind::Inhale(a, e, p) => self.line(depth, &format!("inhale({a}, {e}, {p})")),
            StmtKind::Exhale(a, e, p) => self.line(depth, &format!("exhale({a}, {e}, {p})")),
            StmtKind::Seq(..) => self.block(s, depth),
            StmtKind::If(c, s1, s2) => {
                self.line(depth, &format!("if ({c}) {{"));
                self.block(s1, depth + 1);
                if !matches!(s2.kind, StmtKind::Skip) {
                    self.line(depth, "} else {");
                    self.block(s2, depth + 1);
                }
                self.line(depth, "}");
            }
            StmtKind::While(w) => {
                self.line(depth, &format!("while ({})", w.cond));
                for i in &w.over_inv {
                    self.line(depth + 1, &format!("invariant {i}"));
                }
                for i in &w.under_inv {
                    self.line(depth + 1, &format!("underinvariant {i}"));
                }
                self.line(depth, "{");
                self.block(&w.body, depth + 1);
                self.line(depth, "}");
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
        writeln!(f, "method {}({})", self.name, params.join(", "))?;
        if let Some(p) = &self.requires {
            writeln!(f, "    requires {p}")?;
        }
        if let Some(p) = &self.ensures {
            writeln!(f, "    ensures {p}")?;
        }
        let mut out = String::new();
        let mut pr = Printer { out: &mut out, pending: self.locals.iter().map(|p| p.name.clone()).collect() };
        pr.line(0, "{");
        pr.block(&self.body, 1);
        pr.line(0, "}");
        f.write_str(&out)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.methods.iter().enumerate() {
            if i > 0 {
                f.write_char('\n')?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}
