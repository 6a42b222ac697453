//! Boundary expressions: finite candidate sets for the point at which a
//! simple maximum is attained.

use super::leftinf::{leftinf_bool, leftinf_perm};
use super::simple::{view, Lit};
use super::MaxElimError;
use crate::expr::{lcm, BoolExpr, CmpOp, IntExpr, Linear, PermExpr, PermValue};
use crate::simplify::{is_nonneg, nnf, simplify_bool};

/// Filtered boundary expressions `(e, filter)` with a period `delta`.
///
/// The candidates are `e + d` for `d ∈ [0, delta − 1]`. Each `e` is free
/// of the bound variable; a filter may mention it and is read at the
/// candidate point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundarySet {
    pub entries: Vec<(IntExpr, BoolExpr)>,
    pub delta: i64,
}

impl BoundarySet {
    pub fn empty(delta: i64) -> Self {
        BoundarySet { entries: Vec::new(), delta }
    }

    fn push(&mut self, e: IntExpr, filter: BoolExpr) {
        if !filter.is_false() && !self.entries.iter().any(|(f, g)| *f == e && *g == filter) {
            self.entries.push((e, filter));
        }
    }

    fn union(mut self, other: BoundarySet) -> Self {
        self.delta = lcm(self.delta, other.delta);
        for (e, f) in other.entries {
            self.push(e, f);
        }
        self
    }

    /// Every candidate point together with its filter, unsubstituted.
    pub fn candidates(&self) -> Vec<(IntExpr, &BoolExpr)> {
        let mut out = Vec::new();
        for (e, f) in &self.entries {
            for d in 0..self.delta {
                out.push((offset(e, d), f));
            }
        }
        out
    }
}

/// `e + d`, folded through the linear normal form.
pub(crate) fn offset(e: &IntExpr, d: i64) -> IntExpr {
    Linear::of(e).add(&Linear::constant(d)).to_expr()
}

/// Boundaries of a simple boolean expression; every filter is `true`.
pub fn mini_bool(b: &BoolExpr, x: &str) -> Result<BoundarySet, MaxElimError> {
    match b {
        BoolExpr::And(v) | BoolExpr::Or(v) => {
            v.iter().try_fold(BoundarySet::empty(1), |acc, c| Ok(acc.union(mini_bool(c, x)?)))
        }
        _ => {
            let mut s = BoundarySet::empty(1);
            match view(b, x)? {
                Lit::Free => {}
                Lit::Div(n) => s.delta = n,
                Lit::Cmp(CmpOp::Eq | CmpOp::Ge, e) => s.push(e, BoolExpr::True),
                Lit::Cmp(CmpOp::Ne | CmpOp::Gt, e) => s.push(offset(&e, 1), BoolExpr::True),
                Lit::Cmp(CmpOp::Le | CmpOp::Lt, _) => {}
            }
            Ok(s)
        }
    }
}

/// `ite(b, r, 0)` with a constant `r`.
pub(crate) fn as_leaf(p: &PermExpr) -> Option<(&BoolExpr, PermValue)> {
    match p {
        PermExpr::Ite(c, r, z) if z.is_zero() => Some((c, r.const_value()?)),
        _ => None,
    }
}

/// A boolean expression equivalent to `p > 0`.
pub(crate) fn positive(p: &PermExpr) -> BoolExpr {
    if let Some(v) = p.const_value() {
        return if v.is_positive() { BoolExpr::True } else { BoolExpr::False };
    }
    if let Some((c, r)) = as_leaf(p) {
        return if r.is_positive() { c.clone() } else { BoolExpr::False };
    }
    match p {
        PermExpr::Add(a, b) if is_nonneg(a) && is_nonneg(b) => BoolExpr::or(vec![positive(a), positive(b)]),
        PermExpr::Max(a, b) => BoolExpr::or(vec![positive(a), positive(b)]),
        PermExpr::Min(a, b) => BoolExpr::and(vec![positive(a), positive(b)]),
        _ => BoolExpr::perm_cmp(p.clone(), CmpOp::Gt, PermExpr::zero()),
    }
}

/// Simplify a filter, replacing it by `true` when it stays too large.
fn cap(f: BoolExpr, budget: usize) -> BoolExpr {
    let f = simplify_bool(&f);
    if f.size() > budget {
        BoolExpr::True
    } else {
        f
    }
}

/// Boundaries of a simple permission expression.
pub fn minimax(p: &PermExpr, x: &str, budget: usize) -> Result<BoundarySet, MaxElimError> {
    if p.const_value().is_some() {
        return Ok(BoundarySet::empty(1));
    }
    if let Some((c, _)) = as_leaf(p) {
        return mini_bool(c, x);
    }
    match p {
        PermExpr::Add(a, b) | PermExpr::Max(a, b) | PermExpr::Min(a, b) => {
            Ok(minimax(a, x, budget)?.union(minimax(b, x, budget)?))
        }
        PermExpr::Sub(a, b) => {
            let t1 = minimax(a, x, budget)?;
            let guard = match (b.const_value(), as_leaf(b)) {
                (Some(_), _) => BoolExpr::True,
                (None, Some((c, _))) => c.clone(),
                _ => return Err(MaxElimError::NotSimple(p.to_string())),
            };
            let s2 = mini_bool(&nnf(&BoolExpr::not(guard)), x)?;
            let filter = cap(positive(a), budget);
            let mut t2 = BoundarySet::empty(s2.delta);
            for (e, _) in s2.entries {
                t2.push(e, filter.clone());
            }
            Ok(t1.union(t2))
        }
        _ => Err(MaxElimError::NotSimple(p.to_string())),
    }
}

/// Boundaries of the maximum of `p` over the `x` satisfying `b`.
pub fn minimax_pair(p: &PermExpr, b: &BoolExpr, x: &str, budget: usize) -> Result<BoundarySet, MaxElimError> {
    let tp = minimax(p, x, budget)?;
    let sb = mini_bool(b, x)?;
    let delta = lcm(tp.delta, sb.delta);
    if sb.entries.is_empty() {
        return Ok(BoundarySet { delta, ..tp });
    }
    let (b_inf, _) = leftinf_bool(b, x)?;
    let (p_inf, _) = leftinf_perm(p, x)?;
    let not_b = nnf(&BoolExpr::not(b.clone()));

    let tail = BoolExpr::and(vec![nnf(&BoolExpr::not(b_inf)), positive(&p_inf)]);
    let mut disjuncts: Vec<BoolExpr> = (0..delta).map(|d| tail.subst(x, &IntExpr::Const(d))).collect();
    for (e, filter) in &tp.entries {
        let at = BoolExpr::and(vec![not_b.clone(), filter.clone()]);
        for d in 0..tp.delta {
            disjuncts.push(at.subst(x, &offset(e, d)));
        }
    }
    let filter = cap(BoolExpr::or(disjuncts), budget);

    let mut out = BoundarySet { delta, ..tp };
    for (e, _) in sb.entries {
        out.push(e, filter.clone());
    }
    Ok(out)
}
