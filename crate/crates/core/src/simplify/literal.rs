//! Canonical forms of atomic constraints.

use crate::expr::{BoolExpr, CmpOp, IntExpr, Linear, PermExpr, QI};
use num_integer::Integer;

/// Canonical form of a literal; non-literals are returned unchanged.
pub fn normalize_literal(b: &BoolExpr) -> BoolExpr {
    match b {
        BoolExpr::Cmp(a, op, c) => normalize_cmp(&Linear::of(a).sub(&Linear::of(c)), *op),
        BoolExpr::Divides(n, e) => normalize_divides(*n, &Linear::of(e), true),
        BoolExpr::NotDivides(n, e) => normalize_divides(*n, &Linear::of(e), false),
        BoolExpr::ArrEq(a, c) if a == c => BoolExpr::True,
        BoolExpr::ArrEq(a, c) if a > c => BoolExpr::ArrEq(c.clone(), a.clone()),
        BoolExpr::Not(inner) => match &**inner {
            BoolExpr::ArrEq(a, c) if a == c => BoolExpr::False,
            BoolExpr::ArrEq(a, c) if a > c => BoolExpr::not(BoolExpr::ArrEq(c.clone(), a.clone())),
            _ => b.clone(),
        },
        _ => b.clone(),
    }
}

/// Canonical form of `l op 0`.
pub fn normalize_cmp(l: &Linear, op: CmpOp) -> BoolExpr {
    if l.is_const() {
        return bool_const(op.holds(&l.constant, &0));
    }
    let mut l = l.clone();
    let mut op = op;
    let g = l.content().abs();
    if g > 1 {
        match op {
            CmpOp::Eq | CmpOp::Ne => {
                if l.constant % g != 0 {
                    return bool_const(op == CmpOp::Ne);
                }
                l = divide(&l, g, l.constant / g);
            }
            _ => {
                // Rewrite as `l ≤ 0`, then divide and round the constant up.
                l = match op {
                    CmpOp::Le => l,
                    CmpOp::Lt => l.add(&Linear::constant(1)),
                    CmpOp::Ge => l.scale(-1),
                    _ => l.scale(-1).add(&Linear::constant(1)),
                };
                op = CmpOp::Le;
                let k = Integer::div_ceil(&l.constant, &g);
                l = divide(&l, g, k);
            }
        }
    }
    orient(&l, op)
}

fn divide(l: &Linear, g: i64, constant: i64) -> Linear {
    Linear { terms: l.terms.iter().map(|(a, c)| (a.clone(), c / g)).collect(), constant }
}

fn bool_const(v: bool) -> BoolExpr {
    if v {
        BoolExpr::True
    } else {
        BoolExpr::False
    }
}

/// Render `l op 0` with a unit-coefficient lead atom on the left when one
/// exists (preferring `qi`, then variables), otherwise positive terms left.
fn orient(l: &Linear, op: CmpOp) -> BoolExpr {
    let unit = |a: &IntExpr| l.terms.get(a).is_some_and(|c| c.abs() == 1);
    let lead = Some(IntExpr::var(QI))
        .filter(unit)
        .or_else(|| l.terms.keys().find(|a| matches!(a, IntExpr::Var(_)) && unit(a)).cloned())
        .or_else(|| l.terms.keys().find(|a| unit(a)).cloned());
    if let Some(lead) = lead {
        let c = l.terms[&lead];
        let mut rest = l.clone();
        rest.terms.remove(&lead);
        // c·lead + rest op 0  ⇔  lead op' −rest/c
        let (rhs, op) = if c == 1 { (rest.scale(-1), op) } else { (rest, op.flip()) };
        return lead.cmp(op, rhs.to_expr());
    }
    let pos =
        Linear { terms: l.terms.iter().filter(|(_, c)| **c > 0).map(|(a, c)| (a.clone(), *c)).collect(), constant: 0 };
    let neg = pos.sub(l);
    if pos.terms.is_empty() {
        let terms = Linear { terms: neg.terms.clone(), constant: 0 };
        return terms.to_expr().cmp(op.flip(), IntExpr::Const(-neg.constant));
    }
    pos.to_expr().cmp(op, neg.to_expr())
}

/// Canonical form of `n | l` (or `n ∤ l` when `positive` is false).
pub fn normalize_divides(n: i64, l: &Linear, positive: bool) -> BoolExpr {
    let mut l = Linear {
        terms: l.terms.iter().map(|(a, c)| (a.clone(), c.rem_euclid(n))).filter(|(_, c)| *c != 0).collect(),
        constant: l.constant.rem_euclid(n),
    };
    let mut n = n;
    let g = num_integer::gcd(num_integer::gcd(n, l.content()), l.constant);
    if g > 1 {
        l = divide(&l, g, l.constant / g);
        n /= g;
    }
    if n == 1 || l.is_const() {
        return bool_const((l.constant % n == 0) == positive);
    }
    if positive {
        BoolExpr::divides(n, l.to_expr())
    } else {
        BoolExpr::not_divides(n, l.to_expr())
    }
}

/// The literal denoting the complement of `b`, in canonical form.
pub fn negate_literal(b: &BoolExpr) -> BoolExpr {
    match b {
        BoolExpr::True => BoolExpr::False,
        BoolExpr::False => BoolExpr::True,
        BoolExpr::Cmp(a, op, c) => normalize_literal(&BoolExpr::Cmp(a.clone(), op.negate(), c.clone())),
        BoolExpr::Divides(n, e) => BoolExpr::NotDivides(*n, e.clone()),
        BoolExpr::NotDivides(n, e) => BoolExpr::Divides(*n, e.clone()),
        BoolExpr::Not(inner) => (**inner).clone(),
        BoolExpr::PermCmp(p, op, q) => BoolExpr::PermCmp(p.clone(), op.negate(), q.clone()),
        _ => BoolExpr::not(b.clone()),
    }
}

pub fn is_literal(b: &BoolExpr) -> bool {
    match b {
        BoolExpr::Cmp(..)
        | BoolExpr::Divides(..)
        | BoolExpr::NotDivides(..)
        | BoolExpr::ArrEq(..)
        | BoolExpr::PermCmp(..) => true,
        BoolExpr::Not(inner) => matches!(**inner, BoolExpr::ArrEq(..)),
        _ => false,
    }
}

/// Compare permission operands once both are constant.
pub fn fold_perm_cmp(p: &PermExpr, op: CmpOp, q: &PermExpr) -> Option<bool> {
    Some(op.holds(&p.const_value()?, &q.const_value()?))
}
