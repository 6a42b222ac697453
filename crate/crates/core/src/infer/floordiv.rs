//! Removal of floor divisions from comparisons.
//!
//! For `n > 0`, `t ≤ ⌊e/n⌋ ⟺ n·t ≤ e` and `⌊e/n⌋ ≤ t ⟺ e ≤ n·t + n − 1`.
//! The other comparison operators reduce to these two.

use crate::expr::{BoolExpr, CmpOp, IntExpr, Linear};

/// Rewrite every comparison containing one floor division into an
/// equivalent division-free formula. `Err` carries the offending
/// subexpression when a division occurs anywhere else.
pub fn eliminate_floor_div(b: &BoolExpr) -> Result<BoolExpr, String> {
    Ok(match b {
        BoolExpr::Cmp(l, op, r) if l.has_floor_div() || r.has_floor_div() => cmp(l, *op, r)?,
        BoolExpr::Divides(_, e) | BoolExpr::NotDivides(_, e) if e.has_floor_div() => return Err(b.to_string()),
        BoolExpr::And(v) => BoolExpr::and(v.iter().map(eliminate_floor_div).collect::<Result<_, _>>()?),
        BoolExpr::Or(v) => BoolExpr::or(v.iter().map(eliminate_floor_div).collect::<Result<_, _>>()?),
        BoolExpr::Not(c) => BoolExpr::not(eliminate_floor_div(c)?),
        _ if b.has_floor_div() => return Err(b.to_string()),
        _ => b.clone(),
    })
}

fn cmp(l: &IntExpr, op: CmpOp, r: &IntExpr) -> Result<BoolExpr, String> {
    let whole = || l.clone().cmp(op, r.clone()).to_string();
    // l − r = c·⌊e/n⌋ + rest with c = ±1.
    let diff = Linear::of(l).sub(&Linear::of(r));
    let divs: Vec<(&IntExpr, i64)> =
        diff.terms.iter().filter(|(a, _)| a.has_floor_div()).map(|(a, c)| (a, *c)).collect();
    let [(IntExpr::FloorDiv(e, n), c)] = divs.as_slice() else { return Err(whole()) };
    if e.has_floor_div() || c.abs() != 1 {
        return Err(whole());
    }
    let mut rest = diff.clone();
    rest.terms.remove(divs[0].0);
    // c = −1: rest op ⌊e/n⌋.  c = 1: −rest op' ⌊e/n⌋ with op flipped.
    let (t, op) = if *c == -1 { (rest.to_expr(), op) } else { (rest.scale(-1).to_expr(), op.flip()) };
    Ok(against_floor(t, op, (**e).clone(), *n))
}

/// `t op ⌊e/n⌋` without division.
fn against_floor(t: IntExpr, op: CmpOp, e: IntExpr, n: i64) -> BoolExpr {
    let le = |t: IntExpr| IntExpr::mul(n, t).le(e.clone());
    let ge = |t: IntExpr| e.clone().le(IntExpr::mul(n, t) + IntExpr::Const(n - 1));
    match op {
        CmpOp::Le => le(t),
        CmpOp::Lt => le(t + IntExpr::Const(1)),
        CmpOp::Ge => ge(t),
        CmpOp::Gt => ge(t - IntExpr::Const(1)),
        CmpOp::Eq => BoolExpr::and2(le(t.clone()), ge(t)),
        CmpOp::Ne => BoolExpr::or2(le(t.clone() + IntExpr::Const(1)), ge(t - IntExpr::Const(1))),
    }
}
