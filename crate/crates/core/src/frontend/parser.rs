use super::ast::{Method, Param, Program, SourceSpan, Stmt, StmtKind, Type, WhileLoop};
use super::lexer::{lex, Tok, Token};
use super::FrontendError;
use crate::expr::{rational, BoolExpr, CmpOp, IntExpr, Linear, PermExpr, QA, QI};
use num_traits::Signed;
use std::collections::{HashMap, HashSet};

const KEYWORDS: &[&str] = &[
    "method",
    "var",
    "while",
    "if",
    "else",
    "invariant",
    "underinvariant",
    "inhale",
    "exhale",
    "length",
    "skip",
    "true",
    "false",
    "rd",
    "ite",
    "min",
    "max",
    "max_",
    "Int",
    "requires",
    "ensures",
    QA,
    QI,
];

pub fn parse_program(text: &str) -> Result<Program, FrontendError> {
    parse_program_file("<input>", text)
}

pub fn parse_program_file(file: &str, text: &str) -> Result<Program, FrontendError> {
    let mut p = Parser::new(lex(file, text)?);
    let mut methods: Vec<Method> = Vec::new();
    while p.peek() != &Tok::Eof {
        let m = p.method()?;
        if methods.iter().any(|o| o.name == m.name) {
            return Err(FrontendError::Type {
                span: m.span.clone(),
                message: format!("duplicate method `{}`", m.name),
            });
        }
        methods.push(m);
    }
    Ok(Program { methods })
}

/// Parse a standalone boolean expression. Identifiers are integers unless
/// listed in `arrays`; `qa` is always an array.
pub fn parse_bool_expr(text: &str, arrays: &[&str]) -> Result<BoolExpr, FrontendError> {
    let mut p = Parser::standalone(lex("<expr>", text)?, arrays);
    let b = p.bexpr()?;
    p.expect(Tok::Eof)?;
    Ok(b)
}

/// Parse a standalone permission expression; see [`parse_bool_expr`].
pub fn parse_perm_expr(text: &str, arrays: &[&str]) -> Result<PermExpr, FrontendError> {
    let mut p = Parser::standalone(lex("<expr>", text)?, arrays);
    let e = p.perm()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

/// Parse a standalone integer expression; see [`parse_bool_expr`].
pub fn parse_int_expr(text: &str, arrays: &[&str]) -> Result<IntExpr, FrontendError> {
    let mut p = Parser::standalone(lex("<expr>", text)?, arrays);
    let span = p.span();
    let e = p.arith()?;
    let e = p.int(e, &span)?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

/// Intermediate result of arithmetic parsing.
enum Ar {
    Int(IntExpr),
    /// `e % n`, only meaningful compared against 0.
    Mod(IntExpr, i64),
    Arr(String),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    scope: HashMap<String, Type>,
    bound: Vec<String>,
    /// Treat unknown identifiers as integer variables.
    permissive: bool,
    locals: Vec<Param>,
    used_names: HashSet<String>,
    temps: usize,
}

impl Parser {
    fn new(toks: Vec<Token>) -> Self {
        let used_names = toks
            .iter()
            .filter_map(|t| match &t.tok {
                Tok::Ident(s) => Some(s.clone()),
                _ => None,
            })
            .collect();
        Parser {
            toks,
            pos: 0,
            scope: HashMap::new(),
            bound: Vec::new(),
            permissive: false,
            locals: Vec::new(),
            used_names,
            temps: 0,
        }
    }

    fn standalone(toks: Vec<Token>, arrays: &[&str]) -> Self {
        let mut p = Parser::new(toks);
        p.permissive = true;
        p.scope.insert(QA.to_string(), Type::Array);
        p.scope.insert(QI.to_string(), Type::Int);
        for a in arrays {
            p.scope.insert(a.to_string(), Type::Array);
        }
        p
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, FrontendError> {
        Err(FrontendError::Parse { span: self.span(), message: message.into() })
    }

    fn expect(&mut self, t: Tok) -> Result<(), FrontendError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", t.describe(), self.peek().describe()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), FrontendError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", self.peek().describe()))
        }
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            t => self.error(format!("expected identifier, found {}", t.describe())),
        }
    }

    fn lookup_type(&self, name: &str) -> Option<Type> {
        if self.bound.iter().any(|b| b == name) {
            return Some(Type::Int);
        }
        match self.scope.get(name) {
            Some(t) => Some(*t),
            None if self.permissive => Some(Type::Int),
            None => None,
        }
    }

    fn array_name(&mut self) -> Result<String, FrontendError> {
        let span = self.span();
        let name = match self.peek().clone() {
            Tok::Ident(s) if s == QA && self.scope.contains_key(QA) => {
                self.bump();
                s
            }
            _ => self.ident()?,
        };
        match self.scope.get(&name) {
            Some(Type::Array) if !self.bound.contains(&name) => Ok(name),
            Some(Type::Int) => Err(FrontendError::Type { span, message: format!("`{name}` is not an array") }),
            _ if self.bound.contains(&name) => {
                Err(FrontendError::Type { span, message: format!("`{name}` is not an array") })
            }
            _ => Err(FrontendError::Unknown { span, name }),
        }
    }

    fn declare(&mut self, name: &str, ty: Type, span: &SourceSpan) -> Result<(), FrontendError> {
        if self.scope.contains_key(name) {
            return Err(FrontendError::Type { span: span.clone(), message: format!("`{name}` is already declared") });
        }
        self.scope.insert(name.to_string(), ty);
        Ok(())
    }

    fn ty(&mut self) -> Result<Type, FrontendError> {
        self.expect_kw("Int")?;
        if self.eat(&Tok::LBracket) {
            self.expect(Tok::RBracket)?;
            Ok(Type::Array)
        } else {
            Ok(Type::Int)
        }
    }

    // ---- methods and statements ----

    fn method(&mut self) -> Result<Method, FrontendError> {
        let span = self.span();
        self.expect_kw("method")?;
        let name = self.ident()?;
        self.scope.clear();
        self.locals.clear();
        self.temps = 0;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                let pspan = self.span();
                let pname = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.declare(&pname, ty, &pspan)?;
                params.push(Param { name: pname, ty });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;

        // Clauses may mention locals, so they are parsed after the body.
        let mut requires_at = None;
        let mut ensures_at = None;
        loop {
            if self.eat_kw("requires") {
                requires_at = Some(self.pos);
            } else if self.eat_kw("ensures") {
                ensures_at = Some(self.pos);
            } else {
                break;
            }
            self.skip_clause();
        }
        let body = self.block()?;
        let end = self.pos;

        let clause = |p: &mut Parser, at: Option<usize>| -> Result<Option<PermExpr>, FrontendError> {
            let Some(at) = at else { return Ok(None) };
            p.pos = at;
            p.scope.insert(QA.to_string(), Type::Array);
            p.scope.insert(QI.to_string(), Type::Int);
            let e = p.perm();
            p.scope.remove(QA);
            p.scope.remove(QI);
            let e = e?;
            if !(p.is_kw("requires") || p.is_kw("ensures") || p.peek() == &Tok::LBrace) {
                return p.error(format!("unexpected {} in specification clause", p.peek().describe()));
            }
            Ok(Some(e))
        };
        let requires = clause(self, requires_at)?;
        let ensures = clause(self, ensures_at)?;
        self.pos = end;
        Ok(Method { name, params, locals: std::mem::take(&mut self.locals), requires, ensures, body, span })
    }

    /// Advance past a permission expression without interpreting it.
    fn skip_clause(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LParen | Tok::LBracket => depth += 1,
                Tok::RParen | Tok::RBracket => depth = depth.saturating_sub(1),
                Tok::Ident(s) if s == "max_" && self.peek_at(1) == &Tok::LBrace => {
                    self.bump();
                    depth += 1;
                }
                Tok::RBrace if depth > 0 => depth -= 1,
                Tok::LBrace if depth == 0 => return,
                Tok::Ident(s) if depth == 0 && (s == "requires" || s == "ensures") => return,
                _ => {}
            }
            self.bump();
        }
    }

    fn block(&mut self) -> Result<Stmt, FrontendError> {
        let span = self.span();
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.eat(&Tok::RBrace) {
            if self.peek() == &Tok::Eof {
                return self.error("unterminated block");
            }
            self.stmt(&mut stmts)?;
            while self.eat(&Tok::Semi) {}
        }
        if stmts.is_empty() {
            return Ok(Stmt::new(StmtKind::Skip, span));
        }
        Ok(Stmt::seq(stmts))
    }

    fn fresh_temp(&mut self) -> String {
        loop {
            let name = format!("t{}", self.temps);
            self.temps += 1;
            if !self.used_names.contains(&name) && !self.scope.contains_key(&name) {
                self.used_names.insert(name.clone());
                return name;
            }
        }
    }

    fn surface_int(&mut self) -> Result<IntExpr, FrontendError> {
        let span = self.span();
        let e = self.arith()?;
        let e = self.int(e, &span)?;
        if e.has_lookup() {
            return Err(FrontendError::Type { span, message: "array reads are only allowed as `x := a[e]`".into() });
        }
        Ok(e)
    }

    fn surface_bool(&mut self) -> Result<BoolExpr, FrontendError> {
        let span = self.span();
        let b = self.bexpr()?;
        if b.has_lookup() {
            return Err(FrontendError::Type { span, message: "array reads are only allowed as `x := a[e]`".into() });
        }
        Ok(b)
    }

    /// Right-hand side of an integer assignment: a lookup or a surface expression.
    fn int_rhs(&mut self, x: &str, span: &SourceSpan) -> Result<StmtKind, FrontendError> {
        let espan = self.span();
        let e = self.arith()?;
        let e = self.int(e, &espan)?;
        if let IntExpr::Lookup(a, i) = &e {
            if !i.has_lookup() {
                return Ok(StmtKind::LoadElem(x.to_string(), a.clone(), (**i).clone()));
            }
        }
        if e.has_lookup() {
            return Err(FrontendError::Type {
                span: span.clone(),
                message: "array reads are only allowed as `x := a[e]`".into(),
            });
        }
        Ok(StmtKind::AssignVar(x.to_string(), e))
    }

    fn stmt(&mut self, out: &mut Vec<Stmt>) -> Result<(), FrontendError> {
        let span = self.span();
        if self.eat_kw("skip") {
            out.push(Stmt::new(StmtKind::Skip, span));
        } else if self.eat_kw("var") {
            let mut names = vec![(self.span(), self.ident()?)];
            while self.eat(&Tok::Comma) {
                names.push((self.span(), self.ident()?));
            }
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            let start = self.pos;
            let has_init = self.eat(&Tok::Assign);
            for (nspan, name) in &names {
                // Each declared name gets its own copy of the initialiser.
                if has_init {
                    self.pos = start + 1;
                }
                let kind = match (ty, has_init) {
                    (Type::Int, false) => StmtKind::AssignVar(name.clone(), IntExpr::Const(0)),
                    (Type::Int, true) => self.int_rhs(name, nspan)?,
                    (Type::Array, true) => StmtKind::AssignArrayVar(name.clone(), self.array_name()?),
                    (Type::Array, false) => {
                        return Err(FrontendError::Type {
                            span: nspan.clone(),
                            message: format!("array variable `{name}` must be initialised"),
                        })
                    }
                };
                self.declare(name, ty, nspan)?;
                self.locals.push(Param { name: name.clone(), ty });
                out.push(Stmt::new(kind, nspan.clone()));
            }
        } else if self.is_kw("if") {
            out.push(self.if_stmt()?);
        } else if self.eat_kw("while") {
            self.expect(Tok::LParen)?;
            let cond = self.surface_bool()?;
            self.expect(Tok::RParen)?;
            let (mut over_inv, mut under_inv) = (Vec::new(), Vec::new());
            loop {
                if self.eat_kw("invariant") {
                    over_inv.push(self.surface_bool()?);
                } else if self.eat_kw("underinvariant") {
                    under_inv.push(self.surface_bool()?);
                } else {
                    break;
                }
            }
            let body = Box::new(self.block()?);
            out.push(Stmt::new(StmtKind::While(WhileLoop { cond, over_inv, under_inv, body }), span));
        } else if self.is_kw("inhale") || self.is_kw("exhale") {
            let inhale = self.is_kw("inhale");
            self.bump();
            self.expect(Tok::LParen)?;
            let a = self.array_name()?;
            self.expect(Tok::Comma)?;
            let e = self.surface_int()?;
            self.expect(Tok::Comma)?;
            let pspan = self.span();
            let p = self.perm()?;
            self.expect(Tok::RParen)?;
            let what = if inhale { "inhale" } else { "exhale" };
            check_nonneg(&p, &pspan, what)?;
            if p.has_lookup() {
                return Err(FrontendError::Type {
                    span: pspan,
                    message: "array reads are not allowed in permissions".into(),
                });
            }
            let kind = if inhale { StmtKind::Inhale(a, e, p) } else { StmtKind::Exhale(a, e, p) };
            out.push(Stmt::new(kind, span));
        } else if matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) == &Tok::LBracket {
            let a = self.array_name()?;
            self.expect(Tok::LBracket)?;
            let idx = self.surface_int()?;
            self.expect(Tok::RBracket)?;
            self.expect(Tok::Assign)?;
            let rhs = self.surface_int()?;
            let rhs = match rhs {
                IntExpr::Var(_) => rhs,
                e => {
                    let t = self.fresh_temp();
                    self.declare(&t, Type::Int, &span)?;
                    self.locals.push(Param { name: t.clone(), ty: Type::Int });
                    out.push(Stmt::new(StmtKind::AssignVar(t.clone(), e), span.clone()));
                    IntExpr::Var(t)
                }
            };
            out.push(Stmt::new(StmtKind::StoreElem(a, idx, rhs), span));
        } else {
            let name = self.ident()?;
            let ty = match self.scope.get(&name) {
                Some(t) => *t,
                None => return Err(FrontendError::Unknown { span, name }),
            };
            self.expect(Tok::Assign)?;
            let kind = match ty {
                Type::Int => self.int_rhs(&name, &span)?,
                Type::Array => StmtKind::AssignArrayVar(name, self.array_name()?),
            };
            out.push(Stmt::new(kind, span));
        }
        Ok(())
    }

    fn if_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let span = self.span();
        self.expect_kw("if")?;
        self.expect(Tok::LParen)?;
        let cond = self.surface_bool()?;
        self.expect(Tok::RParen)?;
        let then = self.block()?;
        let els = if self.eat_kw("else") {
            if self.is_kw("if") {
                self.if_stmt()?
            } else {
                self.block()?
            }
        } else {
            Stmt::new(StmtKind::Skip, span.clone())
        };
        Ok(Stmt::new(StmtKind::If(cond, Box::new(then), Box::new(els)), span))
    }

    // ---- boolean expressions ----

    fn bexpr(&mut self) -> Result<BoolExpr, FrontendError> {
        let mut parts = vec![self.band()?];
        while self.eat(&Tok::OrOr) {
            parts.push(self.band()?);
        }
        Ok(BoolExpr::or(parts))
    }

    fn band(&mut self) -> Result<BoolExpr, FrontendError> {
        let mut parts = vec![self.bnot()?];
        while self.eat(&Tok::AndAnd) {
            parts.push(self.bnot()?);
        }
        Ok(BoolExpr::and(parts))
    }

    fn bnot(&mut self) -> Result<BoolExpr, FrontendError> {
        if self.eat(&Tok::Bang) {
            return Ok(BoolExpr::not(self.bnot()?));
        }
        self.batom()
    }

    fn batom(&mut self) -> Result<BoolExpr, FrontendError> {
        if self.eat_kw("true") {
            return Ok(BoolExpr::True);
        }
        if self.eat_kw("false") {
            return Ok(BoolExpr::False);
        }
        if self.peek() == &Tok::LParen {
            let save = self.pos;
            self.bump();
            if let Ok(b) = self.bexpr() {
                if self.eat(&Tok::RParen) && !continues_arith(self.peek()) {
                    return Ok(b);
                }
            }
            self.pos = save;
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<BoolExpr, FrontendError> {
        let span = self.span();
        let lhs = self.arith()?;
        let op = match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Pipe => {
                self.bump();
                let n = match lhs {
                    Ar::Int(IntExpr::Const(n)) if n > 0 => n,
                    _ => {
                        return Err(FrontendError::Parse { span, message: "divisor must be a positive literal".into() })
                    }
                };
                let rspan = self.span();
                let rhs = self.arith()?;
                return Ok(BoolExpr::divides(n, self.int(rhs, &rspan)?));
            }
            t => return self.error(format!("expected comparison operator, found {}", t.describe())),
        };
        self.bump();
        let rspan = self.span();
        let rhs = self.arith()?;
        match (lhs, rhs) {
            (Ar::Mod(e, n), Ar::Int(IntExpr::Const(0))) if op == CmpOp::Eq => Ok(BoolExpr::divides(n, e)),
            (Ar::Mod(e, n), Ar::Int(IntExpr::Const(0))) if op == CmpOp::Ne => Ok(BoolExpr::not_divides(n, e)),
            (Ar::Mod(..), _) | (_, Ar::Mod(..)) => Err(FrontendError::Parse {
                span,
                message: "`%` is only allowed in `e % n == 0` and `e % n != 0`".into(),
            }),
            (Ar::Arr(a), Ar::Arr(b)) if op == CmpOp::Eq => Ok(BoolExpr::ArrEq(a, b)),
            (Ar::Arr(a), Ar::Arr(b)) if op == CmpOp::Ne => Ok(BoolExpr::not(BoolExpr::ArrEq(a, b))),
            (l, r) => {
                let l = self.int(l, &span)?;
                let r = self.int(r, &rspan)?;
                Ok(l.cmp(op, r))
            }
        }
    }

    // ---- integer expressions ----

    fn int(&self, a: Ar, span: &SourceSpan) -> Result<IntExpr, FrontendError> {
        match a {
            Ar::Int(e) => Ok(e),
            Ar::Mod(..) => Err(FrontendError::Parse {
                span: span.clone(),
                message: "`%` is only allowed in `e % n == 0` and `e % n != 0`".into(),
            }),
            Ar::Arr(name) => {
                Err(FrontendError::Type { span: span.clone(), message: format!("array `{name}` used as an integer") })
            }
        }
    }

    fn arith(&mut self) -> Result<Ar, FrontendError> {
        let span = self.span();
        let mut acc = self.term()?;
        loop {
            let plus = match self.peek() {
                Tok::Plus => true,
                Tok::Minus => false,
                _ => return Ok(acc),
            };
            self.bump();
            let rspan = self.span();
            let r = self.term()?;
            let l = self.int(acc, &span)?;
            let r = self.int(r, &rspan)?;
            acc = Ar::Int(if plus { l + r } else { l - r });
        }
    }

    fn term(&mut self) -> Result<Ar, FrontendError> {
        let span = self.span();
        let mut acc = self.unary()?;
        loop {
            let op = self.peek().clone();
            if !matches!(op, Tok::Star | Tok::Slash | Tok::Percent) {
                return Ok(acc);
            }
            self.bump();
            let rspan = self.span();
            let r = self.unary()?;
            let l = self.int(acc, &span)?;
            let r = self.int(r, &rspan)?;
            acc = match op {
                Tok::Star => Ar::Int(multiply(l, r, &span)?),
                _ => {
                    let n = match r {
                        IntExpr::Const(n) if n > 0 => n,
                        _ => {
                            return Err(FrontendError::Parse {
                                span: rspan,
                                message: "divisor must be a positive literal".into(),
                            })
                        }
                    };
                    if op == Tok::Slash {
                        Ar::Int(IntExpr::floor_div(l, n))
                    } else {
                        Ar::Mod(l, n)
                    }
                }
            };
        }
    }

    fn unary(&mut self) -> Result<Ar, FrontendError> {
        let span = self.span();
        if self.eat(&Tok::Minus) {
            let e = self.unary()?;
            return Ok(Ar::Int(match self.int(e, &span)? {
                IntExpr::Const(n) => IntExpr::Const(-n),
                e => IntExpr::mul(-1, e),
            }));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Ar, FrontendError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Ar::Int(IntExpr::Const(n)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.arith()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "length" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let a = self.array_name()?;
                self.expect(Tok::RParen)?;
                Ok(Ar::Int(IntExpr::Length(a)))
            }
            Tok::Ident(s) if s == "ite" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let c = self.bexpr()?;
                self.expect(Tok::Comma)?;
                let s1 = self.span();
                let a = self.arith()?;
                let a = self.int(a, &s1)?;
                self.expect(Tok::Comma)?;
                let s2 = self.span();
                let b = self.arith()?;
                let b = self.int(b, &s2)?;
                self.expect(Tok::RParen)?;
                Ok(Ar::Int(IntExpr::ite(c, a, b)))
            }
            Tok::Ident(_) if self.peek_at(1) == &Tok::LBracket => {
                let a = self.array_name()?;
                self.expect(Tok::LBracket)?;
                let ispan = self.span();
                let i = self.arith()?;
                let i = self.int(i, &ispan)?;
                self.expect(Tok::RBracket)?;
                Ok(Ar::Int(IntExpr::lookup(&a, i)))
            }
            Tok::Ident(s) if s == QA && self.scope.contains_key(QA) => {
                self.bump();
                Ok(Ar::Arr(s))
            }
            Tok::Ident(s) if s == QI && self.scope.contains_key(QI) => {
                self.bump();
                Ok(Ar::Int(IntExpr::Var(s)))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                match self.lookup_type(&name) {
                    Some(Type::Int) => Ok(Ar::Int(IntExpr::Var(name))),
                    Some(Type::Array) => Ok(Ar::Arr(name)),
                    None => Err(FrontendError::Unknown { span, name }),
                }
            }
            t => self.error(format!("expected expression, found {}", t.describe())),
        }
    }

    // ---- permission expressions ----

    fn perm(&mut self) -> Result<PermExpr, FrontendError> {
        let mut acc = self.patom()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc + self.patom()?;
            } else if self.eat(&Tok::Minus) {
                acc = acc - self.patom()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn fraction(&mut self, negative: bool) -> Result<PermExpr, FrontendError> {
        let Tok::Int(n) = self.bump() else {
            return self.error("expected permission literal");
        };
        let d = if self.peek() == &Tok::Slash && matches!(self.peek_at(1), Tok::Int(_)) {
            self.bump();
            match self.bump() {
                Tok::Int(d) if d > 0 => d,
                _ => return self.error("denominator must be positive"),
            }
        } else {
            1
        };
        let n = if negative { -n } else { n };
        Ok(PermExpr::Frac(rational(n, d)))
    }

    fn patom(&mut self) -> Result<PermExpr, FrontendError> {
        match self.peek().clone() {
            Tok::Int(_) => self.fraction(false),
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                self.fraction(true)
            }
            Tok::LParen => {
                self.bump();
                let p = self.perm()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Ident(s) if s == "rd" => {
                self.bump();
                Ok(PermExpr::Rd)
            }
            Tok::Ident(s) if s == "min" || s == "max" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let a = self.perm()?;
                self.expect(Tok::Comma)?;
                let b = self.perm()?;
                self.expect(Tok::RParen)?;
                Ok(if s == "min" { PermExpr::min(a, b) } else { PermExpr::max(a, b) })
            }
            Tok::Ident(s) if s == "ite" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let c = self.bexpr()?;
                self.expect(Tok::Comma)?;
                let a = self.perm()?;
                self.expect(Tok::Comma)?;
                let b = self.perm()?;
                self.expect(Tok::RParen)?;
                Ok(PermExpr::ite(c, a, b))
            }
            Tok::Ident(s) if s == "max_" => {
                self.bump();
                self.expect(Tok::LBrace)?;
                let mut vars = vec![self.ident()?];
                while self.eat(&Tok::Comma) {
                    vars.push(self.ident()?);
                }
                self.expect(Tok::Pipe)?;
                let depth = self.bound.len();
                self.bound.extend(vars.iter().cloned());
                let inner = (|| {
                    let g = self.bexpr()?;
                    self.expect(Tok::RBrace)?;
                    self.expect(Tok::LParen)?;
                    let b = self.perm()?;
                    self.expect(Tok::RParen)?;
                    Ok((g, b))
                })();
                self.bound.truncate(depth);
                let (g, b) = inner?;
                Ok(PermExpr::pointwise_max(vars, g, b))
            }
            t => self.error(format!("expected permission expression, found {}", t.describe())),
        }
    }
}

fn continues_arith(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Plus
            | Tok::Minus
            | Tok::Star
            | Tok::Slash
            | Tok::Percent
            | Tok::EqEq
            | Tok::Ne
            | Tok::Lt
            | Tok::Le
            | Tok::Gt
            | Tok::Ge
            | Tok::Pipe
    )
}

fn multiply(l: IntExpr, r: IntExpr, span: &SourceSpan) -> Result<IntExpr, FrontendError> {
    if let IntExpr::Const(n) = l {
        return Ok(IntExpr::mul(n, r));
    }
    if let IntExpr::Const(n) = r {
        return Ok(IntExpr::mul(n, l));
    }
    let (ll, lr) = (Linear::of(&l), Linear::of(&r));
    if ll.is_const() {
        return Ok(IntExpr::mul(ll.constant, r));
    }
    if lr.is_const() {
        return Ok(IntExpr::mul(lr.constant, l));
    }
    Err(FrontendError::Type { span: span.clone(), message: format!("non-linear product `({l}) * ({r})`") })
}

fn check_nonneg(p: &PermExpr, span: &SourceSpan, stmt: &'static str) -> Result<(), FrontendError> {
    let bad = |m: &str| Err(FrontendError::Type { span: span.clone(), message: m.to_string() });
    match p {
        PermExpr::Frac(q) if q.is_negative() => Err(FrontendError::NegativePermission { span: span.clone(), stmt }),
        PermExpr::Frac(_) | PermExpr::Rd => Ok(()),
        PermExpr::Sub(..) => bad("subtraction is not allowed in inhaled or exhaled permissions"),
        PermExpr::Add(a, b) | PermExpr::Min(a, b) | PermExpr::Max(a, b) | PermExpr::Ite(_, a, b) => {
            check_nonneg(a, span, stmt)?;
            check_nonneg(b, span, stmt)
        }
        PermExpr::PointwiseMax(_, _, b) => check_nonneg(b, span, stmt),
    }
}
