//! Reduction of an arbitrary single-variable maximum to maxima whose guard
//! and body are simple over the bound variable.

use super::boundary::as_leaf;
use super::MaxElimError;
use crate::expr::{BoolExpr, CmpOp, FreeVars, IntExpr, Linear, PermExpr, PermValue};
use crate::simplify::{coeff_lcm, nnf, simplify_bool, simplify_perm, stretch};

/// How a literal mentions the bound variable.
pub(crate) enum Lit {
    Free,
    /// `x op e`
    Cmp(CmpOp, IntExpr),
    /// A (non-)divisibility literal with this modulus.
    Div(i64),
}

pub(crate) fn view(b: &BoolExpr, x: &str) -> Result<Lit, MaxElimError> {
    let lin = match b {
        BoolExpr::Cmp(l, _, r) => Linear::of(l).sub(&Linear::of(r)),
        BoolExpr::Divides(n, e) | BoolExpr::NotDivides(n, e) => {
            let c = Linear::of(e).coeff_strict(x)?;
            return Ok(if c % n == 0 { Lit::Free } else { Lit::Div(*n) });
        }
        _ if b.mentions(x) => return Err(MaxElimError::NotSimple(b.to_string())),
        _ => return Ok(Lit::Free),
    };
    let BoolExpr::Cmp(_, op, _) = b else { unreachable!() };
    let rest = lin.without(x);
    Ok(match lin.coeff_strict(x)? {
        0 => Lit::Free,
        1 => Lit::Cmp(*op, rest.scale(-1).to_expr()),
        -1 => Lit::Cmp(op.flip(), rest.to_expr()),
        _ => return Err(MaxElimError::NotSimple(b.to_string())),
    })
}

/// A maximum over one variable with simple guard and body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleMax {
    pub var: String,
    pub guard: BoolExpr,
    pub body: PermExpr,
}

impl SimpleMax {
    pub fn to_expr(&self) -> PermExpr {
        PermExpr::pointwise_max(vec![self.var.clone()], self.guard.clone(), self.body.clone())
    }
}

/// Simple maxima combined by conditions free of the bound variable and by
/// binary maxima.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimpleTree {
    Zero,
    Leaf(SimpleMax),
    Max(Box<SimpleTree>, Box<SimpleTree>),
    Ite(BoolExpr, Box<SimpleTree>, Box<SimpleTree>),
}

impl SimpleTree {
    pub fn leaves(&self) -> Vec<&SimpleMax> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a SimpleMax>) {
        match self {
            SimpleTree::Zero => {}
            SimpleTree::Leaf(m) => out.push(m),
            SimpleTree::Max(a, b) | SimpleTree::Ite(_, a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    /// The tree as an expression, with `f` applied to every simple maximum.
    pub fn fold<E>(&self, f: &mut dyn FnMut(&SimpleMax) -> Result<PermExpr, E>) -> Result<PermExpr, E> {
        Ok(match self {
            SimpleTree::Zero => PermExpr::zero(),
            SimpleTree::Leaf(m) => f(m)?,
            SimpleTree::Max(a, b) => PermExpr::max(a.fold(f)?, b.fold(f)?),
            SimpleTree::Ite(c, a, b) => PermExpr::ite(c.clone(), a.fold(f)?, b.fold(f)?),
        })
    }

    pub fn to_expr(&self) -> PermExpr {
        self.fold::<()>(&mut |m| Ok(m.to_expr())).unwrap()
    }
}

/// Rewrite `max_{x | g}(p)` into simple maxima.
///
/// The result agrees with `max_{x | g}(max(p, 0))`, which is the maximum
/// itself whenever `p` is non-negative.
pub fn to_simple(x: &str, g: &BoolExpr, p: &PermExpr) -> Result<SimpleTree, MaxElimError> {
    check_reads(x, g)?;
    if p.has_pointwise_max() {
        return Err(MaxElimError::Nested(p.to_string()));
    }
    let mut reads = Vec::new();
    p.collect_lookups(&mut reads);
    if let Some((a, e)) = reads.iter().find(|(_, e)| e.mentions(x)) {
        return Err(MaxElimError::LookupDependsOnVar { var: x.into(), read: format!("{a}[{e}]") });
    }
    split(x, &simplify_bool(g), &lift(&simplify_perm(p)))
}

fn check_reads(x: &str, b: &BoolExpr) -> Result<(), MaxElimError> {
    let mut reads = Vec::new();
    b.collect_lookups(&mut reads);
    match reads.iter().find(|(_, e)| e.mentions(x)) {
        Some((a, e)) => Err(MaxElimError::LookupDependsOnVar { var: x.into(), read: format!("{a}[{e}]") }),
        None => Ok(()),
    }
}

fn is_leaf(p: &PermExpr) -> bool {
    p.const_value().is_some() || as_leaf(p).is_some()
}

#[derive(Clone, Copy)]
enum Op {
    Add,
    Sub,
    Min,
    Max,
}

fn apply(op: Op, a: PermExpr, b: PermExpr) -> PermExpr {
    match op {
        Op::Add => a + b,
        Op::Sub => a - b,
        Op::Min => PermExpr::min(a, b),
        Op::Max => PermExpr::max(a, b),
    }
}

/// Move every conditional that is not a leaf above all other operators.
fn lift(p: &PermExpr) -> PermExpr {
    if is_leaf(p) {
        return p.clone();
    }
    match p {
        PermExpr::Ite(c, a, b) => PermExpr::ite((**c).clone(), lift(a), lift(b)),
        PermExpr::Add(a, b) => combine(Op::Add, lift(a), lift(b)),
        PermExpr::Sub(a, b) => combine(Op::Sub, lift(a), lift(b)),
        PermExpr::Min(a, b) => combine(Op::Min, lift(a), lift(b)),
        PermExpr::Max(a, b) => combine(Op::Max, lift(a), lift(b)),
        _ => p.clone(),
    }
}

fn combine(op: Op, a: PermExpr, b: PermExpr) -> PermExpr {
    match (&a, &b) {
        (PermExpr::Ite(c, a1, a2), _) if !is_leaf(&a) => {
            PermExpr::ite((**c).clone(), combine(op, (**a1).clone(), b.clone()), combine(op, (**a2).clone(), b))
        }
        (_, PermExpr::Ite(c, b1, b2)) if !is_leaf(&b) => {
            PermExpr::ite((**c).clone(), combine(op, a.clone(), (**b1).clone()), combine(op, a, (**b2).clone()))
        }
        _ => apply(op, a, b),
    }
}

/// Split on the top-level maxima and conditionals of a lifted body.
fn split(x: &str, g: &BoolExpr, p: &PermExpr) -> Result<SimpleTree, MaxElimError> {
    if g.is_false() || p.is_zero() {
        return Ok(SimpleTree::Zero);
    }
    match p {
        PermExpr::Max(a, b) => Ok(SimpleTree::Max(Box::new(split(x, g, a)?), Box::new(split(x, g, b)?))),
        PermExpr::Ite(c, a, b) if !is_leaf(p) => {
            if !c.mentions(x) {
                let (c, a, b) = ((**c).clone(), split(x, g, a)?, split(x, g, b)?);
                return Ok(SimpleTree::Ite(c, Box::new(a), Box::new(b)));
            }
            let then_g = simplify_bool(&BoolExpr::and(vec![g.clone(), (**c).clone()]));
            let else_g = simplify_bool(&BoolExpr::and(vec![g.clone(), BoolExpr::not((**c).clone())]));
            let (a, b) = (split(x, &then_g, a)?, split(x, &else_g, b)?);
            Ok(match (a, b) {
                (SimpleTree::Zero, t) | (t, SimpleTree::Zero) => t,
                (a, b) => SimpleTree::Max(Box::new(a), Box::new(b)),
            })
        }
        _ => Ok(SimpleTree::Leaf(normalize(x, g, &distribute(p).to_expr())?)),
    }
}

/// An operator tree over signed sums of leaves.
#[derive(Clone)]
enum Dist {
    Sum(Vec<PermExpr>, Vec<PermExpr>),
    Min(Box<Dist>, Box<Dist>),
    Max(Box<Dist>, Box<Dist>),
}

impl Dist {
    fn to_expr(&self) -> PermExpr {
        match self {
            Dist::Sum(pos, neg) => {
                let mut it = pos.iter().cloned();
                let first = it.next().unwrap_or_else(PermExpr::zero);
                let total = it.fold(first, |acc, q| acc + q);
                neg.iter().cloned().fold(total, |acc, q| acc - q)
            }
            Dist::Min(a, b) => PermExpr::min(a.to_expr(), b.to_expr()),
            Dist::Max(a, b) => PermExpr::max(a.to_expr(), b.to_expr()),
        }
    }
}

/// A leaf with a non-negative constant and the sign it carries.
fn signed_leaf(guard: BoolExpr, v: PermValue) -> Dist {
    if v.is_zero() {
        return Dist::Sum(Vec::new(), Vec::new());
    }
    let neg = v < PermValue::zero();
    let r = PermExpr::from_value(&if neg { -v } else { v });
    let leaf = if guard.is_true() { r } else { PermExpr::leaf(guard, r) };
    if neg {
        Dist::Sum(Vec::new(), vec![leaf])
    } else {
        Dist::Sum(vec![leaf], Vec::new())
    }
}

/// Push `+` and `−` below `min` and `max` in a body without conditionals
/// other than leaves.
fn distribute(p: &PermExpr) -> Dist {
    if let Some(v) = p.const_value() {
        return signed_leaf(BoolExpr::True, v);
    }
    if let Some((c, v)) = as_leaf(p) {
        return signed_leaf(c.clone(), v);
    }
    match p {
        PermExpr::Add(a, b) => add(distribute(a), distribute(b), false),
        PermExpr::Sub(a, b) => add(distribute(a), distribute(b), true),
        PermExpr::Min(a, b) => Dist::Min(Box::new(distribute(a)), Box::new(distribute(b))),
        PermExpr::Max(a, b) => Dist::Max(Box::new(distribute(a)), Box::new(distribute(b))),
        _ => unreachable!("conditionals are lifted before distribution"),
    }
}

/// `a + b`, or `a − b` when `minus`.
fn add(a: Dist, b: Dist, minus: bool) -> Dist {
    match (a, b) {
        (Dist::Min(a1, a2), b) => {
            let b2 = b.clone();
            Dist::Min(Box::new(add(*a1, b, minus)), Box::new(add(*a2, b2, minus)))
        }
        (Dist::Max(a1, a2), b) => {
            let b2 = b.clone();
            Dist::Max(Box::new(add(*a1, b, minus)), Box::new(add(*a2, b2, minus)))
        }
        (a, Dist::Min(b1, b2)) => {
            let a2 = a.clone();
            let (l, r) = (Box::new(add(a, *b1, minus)), Box::new(add(a2, *b2, minus)));
            // Subtracting a minimum is a maximum of differences.
            if minus {
                Dist::Max(l, r)
            } else {
                Dist::Min(l, r)
            }
        }
        (a, Dist::Max(b1, b2)) => {
            let a2 = a.clone();
            let (l, r) = (Box::new(add(a, *b1, minus)), Box::new(add(a2, *b2, minus)));
            if minus {
                Dist::Min(l, r)
            } else {
                Dist::Max(l, r)
            }
        }
        (Dist::Sum(mut pa, mut na), Dist::Sum(pb, nb)) => {
            if minus {
                pa.extend(nb);
                na.extend(pb);
            } else {
                pa.extend(pb);
                na.extend(nb);
            }
            Dist::Sum(pa, na)
        }
    }
}

/// Bring every literal mentioning `x` to coefficient 1, stretching `x` by
/// the lcm of its coefficients and recording the stretch in the guard.
fn normalize(x: &str, g: &BoolExpr, p: &PermExpr) -> Result<SimpleMax, MaxElimError> {
    let g = nnf(g);
    let p = p.map_bools(&nnf);
    let mut d = 1;
    coeff_lcm(&g, x, &mut d)?;
    let mut guards = Vec::new();
    leaf_guards(&p, &mut guards);
    for c in guards {
        coeff_lcm(c, x, &mut d)?;
    }
    let (guard, body) = if d == 1 {
        (g, p)
    } else {
        let g = BoolExpr::and(vec![stretch(&g, x, d)?, BoolExpr::divides(d, IntExpr::var(x))]);
        (g, stretch_leaves(&p, x, d)?)
    };
    let m = SimpleMax { var: x.into(), guard, body };
    check_simple(&m)?;
    Ok(m)
}

fn leaf_guards<'a>(p: &'a PermExpr, out: &mut Vec<&'a BoolExpr>) {
    match p {
        PermExpr::Ite(c, a, b) => {
            out.push(c);
            leaf_guards(a, out);
            leaf_guards(b, out);
        }
        PermExpr::Add(a, b) | PermExpr::Sub(a, b) | PermExpr::Min(a, b) | PermExpr::Max(a, b) => {
            leaf_guards(a, out);
            leaf_guards(b, out);
        }
        _ => {}
    }
}

fn stretch_leaves(p: &PermExpr, x: &str, d: i64) -> Result<PermExpr, MaxElimError> {
    let rec = |q: &PermExpr| stretch_leaves(q, x, d);
    Ok(match p {
        PermExpr::Ite(c, a, b) => PermExpr::ite(stretch(c, x, d)?, rec(a)?, rec(b)?),
        PermExpr::Add(a, b) => rec(a)? + rec(b)?,
        PermExpr::Sub(a, b) => rec(a)? - rec(b)?,
        PermExpr::Min(a, b) => PermExpr::min(rec(a)?, rec(b)?),
        PermExpr::Max(a, b) => PermExpr::max(rec(a)?, rec(b)?),
        _ => p.clone(),
    })
}

fn check_literals(b: &BoolExpr, x: &str) -> Result<(), MaxElimError> {
    match b {
        BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().try_for_each(|c| check_literals(c, x)),
        _ => view(b, x).map(|_| ()),
    }
}

/// Whether `m` has the shape the boundary computation expects.
pub fn check_simple(m: &SimpleMax) -> Result<(), MaxElimError> {
    check_literals(&m.guard, &m.var)?;
    check_body(&m.body, &m.var, false)
}

fn check_body(p: &PermExpr, x: &str, under_add: bool) -> Result<(), MaxElimError> {
    if p.const_value().is_some() {
        return Ok(());
    }
    if let Some((c, _)) = as_leaf(p) {
        return check_literals(c, x);
    }
    let bad = || Err(MaxElimError::NotSimple(p.to_string()));
    match p {
        PermExpr::Add(a, b) => {
            check_body(a, x, true)?;
            check_body(b, x, true)
        }
        PermExpr::Sub(a, b) => {
            if under_add || !is_leaf(b) {
                return bad();
            }
            check_body(a, x, false)?;
            check_body(b, x, false)
        }
        PermExpr::Min(a, b) | PermExpr::Max(a, b) => {
            check_body(a, x, under_add)?;
            check_body(b, x, under_add)
        }
        _ => bad(),
    }
}
