//! SMT-LIB 2 export of loop soundness conditions.
//!
//! Array objects are an uninterpreted sort with uninterpreted `len` and
//! `heap` functions. A permission amount `c + k·rd` becomes a pair of a
//! real `c` and an integer `k`, compared lexicographically, which matches
//! the infinitesimal reading of `rd` exactly. Operands of maxima and minima
//! are named by auxiliary constants so that they are not duplicated.
//!
//! The script asserts the negated condition, so `unsat` means valid.

use permax::expr::{ArrayVars, BoolExpr, CmpOp, FreeVars, IntExpr, PermExpr};
use std::fmt::Write;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SmtError {
    #[error("pointwise maximum must be eliminated before export: {0}")]
    PointwiseMax(String),
}

/// A complete script checking `condition`; `header` lines become comments.
pub fn emit_smtlib(condition: &BoolExpr, header: &[String]) -> Result<String, SmtError> {
    let mut enc = Encoder::default();
    let body = enc.bool(condition)?;

    let mut out = String::new();
    for h in header {
        writeln!(out, "; {h}").unwrap();
    }
    out.push_str("(set-logic QF_UFLIRA)\n(declare-sort Arr 0)\n(declare-fun len (Arr) Int)\n");
    out.push_str("(declare-fun heap (Arr Int) Int)\n");
    for a in condition.array_vars() {
        writeln!(out, "(declare-const {} Arr)", arr(&a)).unwrap();
        writeln!(out, "(assert (>= (len {}) 0))", arr(&a)).unwrap();
    }
    for x in condition.free_vars() {
        writeln!(out, "(declare-const {} Int)", int(&x)).unwrap();
    }
    for (name, sort) in &enc.aux {
        writeln!(out, "(declare-const {name} {sort})").unwrap();
    }
    for d in &enc.defs {
        writeln!(out, "(assert {d})").unwrap();
    }
    writeln!(out, "(assert (not {body}))").unwrap();
    out.push_str("(check-sat)\n");
    Ok(out)
}

fn int(x: &str) -> String {
    format!("i_{x}")
}

fn arr(a: &str) -> String {
    format!("a_{a}")
}

fn num(n: i64) -> String {
    if n < 0 {
        format!("(- {})", n.unsigned_abs())
    } else {
        n.to_string()
    }
}

#[derive(Default)]
struct Encoder {
    aux: Vec<(String, &'static str)>,
    defs: Vec<String>,
}

impl Encoder {
    fn int(&mut self, e: &IntExpr) -> Result<String, SmtError> {
        Ok(match e {
            IntExpr::Const(n) => num(*n),
            IntExpr::Var(x) => int(x),
            IntExpr::Length(a) => format!("(len {})", arr(a)),
            IntExpr::Lookup(a, i) => format!("(heap {} {})", arr(a), self.int(i)?),
            IntExpr::Mul(n, a) => format!("(* {} {})", num(*n), self.int(a)?),
            IntExpr::Add(a, b) => format!("(+ {} {})", self.int(a)?, self.int(b)?),
            IntExpr::Sub(a, b) => format!("(- {} {})", self.int(a)?, self.int(b)?),
            IntExpr::Ite(c, a, b) => format!("(ite {} {} {})", self.bool(c)?, self.int(a)?, self.int(b)?),
            // Euclidean division agrees with floor division for n > 0.
            IntExpr::FloorDiv(a, n) => format!("(div {} {})", self.int(a)?, num(*n)),
        })
    }

    fn bool(&mut self, b: &BoolExpr) -> Result<String, SmtError> {
        Ok(match b {
            BoolExpr::True => "true".into(),
            BoolExpr::False => "false".into(),
            BoolExpr::Cmp(l, op, r) => cmp(*op, &self.int(l)?, &self.int(r)?),
            BoolExpr::Divides(n, e) => format!("(= (mod {} {}) 0)", self.int(e)?, num(*n)),
            BoolExpr::NotDivides(n, e) => format!("(not (= (mod {} {}) 0))", self.int(e)?, num(*n)),
            BoolExpr::ArrEq(a, c) => format!("(= {} {})", arr(a), arr(c)),
            BoolExpr::And(v) => self.nary("and", "true", v)?,
            BoolExpr::Or(v) => self.nary("or", "false", v)?,
            BoolExpr::Not(c) => format!("(not {})", self.bool(c)?),
            BoolExpr::PermCmp(p, op, q) => {
                let (pc, pk) = self.perm(p)?;
                let (qc, qk) = self.perm(q)?;
                lex(*op, (&pc, &pk), (&qc, &qk))
            }
        })
    }

    fn nary(&mut self, op: &str, unit: &str, v: &[BoolExpr]) -> Result<String, SmtError> {
        if v.is_empty() {
            return Ok(unit.into());
        }
        let parts = v.iter().map(|b| self.bool(b)).collect::<Result<Vec<_>, _>>()?;
        Ok(format!("({op} {})", parts.join(" ")))
    }

    /// Name a compound amount by fresh constants.
    fn bind(&mut self, c: String, k: String) -> (String, String) {
        let atomic = |s: &str| !s.starts_with('(') || s.starts_with("(/ ");
        if atomic(&c) && atomic(&k) {
            return (c, k);
        }
        let id = self.aux.len() / 2;
        let (cn, kn) = (format!("p{id}_c"), format!("p{id}_k"));
        self.aux.push((cn.clone(), "Real"));
        self.aux.push((kn.clone(), "Int"));
        self.defs.push(format!("(= {cn} {c})"));
        self.defs.push(format!("(= {kn} {k})"));
        (cn, kn)
    }

    /// `(c, k)` with the amount being `c + k·rd`.
    fn perm(&mut self, p: &PermExpr) -> Result<(String, String), SmtError> {
        Ok(match p {
            PermExpr::Frac(r) => {
                let n = r.numer().to_string();
                let c = match n.strip_prefix('-') {
                    Some(m) => format!("(- (/ {m}.0 {}.0))", r.denom()),
                    None => format!("(/ {n}.0 {}.0)", r.denom()),
                };
                (c, "0".into())
            }
            PermExpr::Rd => ("0.0".into(), "1".into()),
            PermExpr::Add(a, b) | PermExpr::Sub(a, b) => {
                let op = if matches!(p, PermExpr::Add(..)) { "+" } else { "-" };
                let (ac, ak) = self.perm(a)?;
                let (bc, bk) = self.perm(b)?;
                (format!("({op} {ac} {bc})"), format!("({op} {ak} {bk})"))
            }
            PermExpr::Max(a, b) | PermExpr::Min(a, b) => {
                let (ac, ak) = self.perm(a)?;
                let (ac, ak) = self.bind(ac, ak);
                let (bc, bk) = self.perm(b)?;
                let (bc, bk) = self.bind(bc, bk);
                let op = if matches!(p, PermExpr::Max(..)) { CmpOp::Ge } else { CmpOp::Le };
                let pick_a = lex(op, (&ac, &ak), (&bc, &bk));
                self.bind(format!("(ite {pick_a} {ac} {bc})"), format!("(ite {pick_a} {ak} {bk})"))
            }
            PermExpr::Ite(b, x, y) => {
                let b = self.bool(b)?;
                let (xc, xk) = self.perm(x)?;
                let (yc, yk) = self.perm(y)?;
                (format!("(ite {b} {xc} {yc})"), format!("(ite {b} {xk} {yk})"))
            }
            PermExpr::PointwiseMax(..) => return Err(SmtError::PointwiseMax(p.to_string())),
        })
    }
}

fn cmp(op: CmpOp, l: &str, r: &str) -> String {
    match op {
        CmpOp::Ne => format!("(not (= {l} {r}))"),
        _ => format!("({} {l} {r})", op.symbol().replace("==", "=")),
    }
}

/// Lexicographic comparison of `(c, k)` pairs.
fn lex(op: CmpOp, (ac, ak): (&str, &str), (bc, bk): (&str, &str)) -> String {
    let eq = format!("(and (= {ac} {bc}) (= {ak} {bk}))");
    let strict = |o: &str| format!("(or ({o} {ac} {bc}) (and (= {ac} {bc}) ({o} {ak} {bk})))");
    match op {
        CmpOp::Eq => eq,
        CmpOp::Ne => format!("(not {eq})"),
        CmpOp::Lt => strict("<"),
        CmpOp::Gt => strict(">"),
        CmpOp::Le => format!("(not {})", strict(">")),
        CmpOp::Ge => format!("(not {})", strict("<")),
    }
}
