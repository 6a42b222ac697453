//! Exact evaluation of expressions containing pointwise maxima.
//!
//! A maximum over `x` is computed on a finite window. Outside the range
//! spanned by the bound points of the literals mentioning `x`, every
//! comparison is constant and every divisibility literal is periodic in
//! the lcm `δ` of its moduli, so `[L − 2δ, U + 2δ]` sees every value.

use super::OracleError;
use crate::expr::{
    eval_bool, eval_int, lcm, BoolExpr, CmpOp, Env, FreeVars, Heap, IntExpr, Linear, PermExpr, PermValue,
};
use num_integer::Integer;
use std::collections::BTreeSet;

/// Windows wider than this are refused.
pub const MAX_WINDOW: i64 = 1 << 20;

/// Value of a `PointwiseMax` node.
pub fn bounded_max(node: &PermExpr, env: &Env, heap: &Heap) -> Result<PermValue, OracleError> {
    match node {
        PermExpr::PointwiseMax(vars, g, b) => {
            Ok(max_over(vars, g, b, env, heap, &BTreeSet::new())?.unwrap_or_else(PermValue::zero))
        }
        _ => eval_perm_exact(node, env, heap),
    }
}

/// `eval_perm` that also evaluates pointwise maxima.
pub fn eval_perm_exact(p: &PermExpr, env: &Env, heap: &Heap) -> Result<PermValue, OracleError> {
    Ok(match p {
        PermExpr::Frac(q) => PermValue { c: q.clone(), k: 0 },
        PermExpr::Rd => PermValue::rd(),
        PermExpr::Add(a, b) => eval_perm_exact(a, env, heap)? + eval_perm_exact(b, env, heap)?,
        PermExpr::Sub(a, b) => eval_perm_exact(a, env, heap)? - eval_perm_exact(b, env, heap)?,
        PermExpr::Min(a, b) => eval_perm_exact(a, env, heap)?.min(eval_perm_exact(b, env, heap)?),
        PermExpr::Max(a, b) => eval_perm_exact(a, env, heap)?.max(eval_perm_exact(b, env, heap)?),
        PermExpr::Ite(c, a, b) => {
            if eval_bool_exact(c, env, heap)? {
                eval_perm_exact(a, env, heap)?
            } else {
                eval_perm_exact(b, env, heap)?
            }
        }
        PermExpr::PointwiseMax(..) => bounded_max(p, env, heap)?,
    })
}

/// `eval_bool` that also evaluates permission comparisons with maxima.
pub fn eval_bool_exact(b: &BoolExpr, env: &Env, heap: &Heap) -> Result<bool, OracleError> {
    Ok(match b {
        BoolExpr::And(v) => {
            for c in v {
                if !eval_bool_exact(c, env, heap)? {
                    return Ok(false);
                }
            }
            true
        }
        BoolExpr::Or(v) => {
            for c in v {
                if eval_bool_exact(c, env, heap)? {
                    return Ok(true);
                }
            }
            false
        }
        BoolExpr::Not(c) => !eval_bool_exact(c, env, heap)?,
        BoolExpr::PermCmp(p, op, q) => op.holds(&eval_perm_exact(p, env, heap)?, &eval_perm_exact(q, env, heap)?),
        _ => eval_bool(b, env, heap)?,
    })
}

/// Maximum of `body` over the assignments to `vars` satisfying `g`;
/// `None` when there are none. `bound` holds the variables of enclosing
/// maxima that are still unassigned.
fn max_over(
    vars: &[String],
    g: &BoolExpr,
    body: &PermExpr,
    env: &Env,
    heap: &Heap,
    bound: &BTreeSet<String>,
) -> Result<Option<PermValue>, OracleError> {
    let Some((x, rest)) = vars.split_first() else {
        if !eval_bool_exact(g, env, heap)? {
            return Ok(None);
        }
        return Ok(Some(eval_perm_exact(body, env, heap)?));
    };
    let mut blocked = bound.clone();
    blocked.extend(rest.iter().cloned());
    binders(body, &mut blocked);
    let (lo, hi) = match guard_range(x, g, env, heap, &blocked)? {
        Some(r) => r,
        None => window(x, g, body, env, heap, &blocked)?,
    };
    let mut best: Option<PermValue> = None;
    for v in lo..=hi {
        let env = env.clone().with_int(x, v);
        if let Some(val) = max_over(rest, g, body, &env, heap, bound)? {
            best = Some(best.map_or(val.clone(), |b| b.max(val)));
        }
    }
    Ok(best)
}

/// The enumeration window of a single-variable maximum.
pub fn max_window(node: &PermExpr, env: &Env, heap: &Heap) -> Result<(i64, i64), OracleError> {
    match node {
        PermExpr::PointwiseMax(vars, g, b) if vars.len() == 1 => {
            let mut blocked = BTreeSet::new();
            binders(b, &mut blocked);
            window(&vars[0], g, b, env, heap, &blocked)
        }
        _ => Err(OracleError::Unsupported("expected a maximum over one variable".into())),
    }
}

/// Bounds on `x` stated by top-level conjuncts of the guard, when both
/// sides are bounded. Needed when the body couples `x` with inner binders.
fn guard_range(
    x: &str,
    g: &BoolExpr,
    env: &Env,
    heap: &Heap,
    blocked: &BTreeSet<String>,
) -> Result<Option<(i64, i64)>, OracleError> {
    fn conjuncts<'a>(b: &'a BoolExpr, out: &mut Vec<&'a BoolExpr>) {
        match b {
            BoolExpr::And(v) => v.iter().for_each(|c| conjuncts(c, out)),
            _ => out.push(b),
        }
    }
    let mut parts = Vec::new();
    conjuncts(g, &mut parts);
    let (mut lo, mut hi): (Option<i64>, Option<i64>) = (None, None);
    for part in parts {
        let BoolExpr::Cmp(l, op, r) = part else { continue };
        let lin = Linear::of(&((**l).clone() - (**r).clone()));
        let Ok(c) = lin.coeff_strict(x) else { continue };
        let rest = lin.without(x).to_expr();
        if c == 0 || rest.free_vars().iter().any(|y| blocked.contains(y) || y == x) {
            continue;
        }
        let r = eval_int(&rest, env, heap)?;
        // c·x + r `op` 0 as one or two constraints c'·x + r' ≤ 0
        let forms: Vec<(i64, i64)> = match op {
            CmpOp::Le => vec![(c, r)],
            CmpOp::Lt => vec![(c, r + 1)],
            CmpOp::Ge => vec![(-c, -r)],
            CmpOp::Gt => vec![(-c, 1 - r)],
            CmpOp::Eq => vec![(c, r), (-c, -r)],
            CmpOp::Ne => vec![],
        };
        for (c, r) in forms {
            if c > 0 {
                let u = Integer::div_floor(&-r, &c);
                hi = Some(hi.map_or(u, |h| h.min(u)));
            } else {
                let l = Integer::div_ceil(&r, &-c);
                lo = Some(lo.map_or(l, |v| v.max(l)));
            }
        }
    }
    Ok(match (lo, hi) {
        (Some(l), Some(h)) if h - l <= MAX_WINDOW => Some((l, h.max(l - 1))),
        _ => None,
    })
}

#[derive(Default)]
struct Points {
    lo: Option<i64>,
    hi: Option<i64>,
    delta: i64,
}

impl Points {
    fn add(&mut self, p: i64) {
        self.lo = Some(self.lo.map_or(p, |l| l.min(p)));
        self.hi = Some(self.hi.map_or(p, |h| h.max(p)));
    }
}

fn window(
    x: &str,
    g: &BoolExpr,
    body: &PermExpr,
    env: &Env,
    heap: &Heap,
    blocked: &BTreeSet<String>,
) -> Result<(i64, i64), OracleError> {
    let mut atoms = Vec::new();
    bool_atoms(g, &mut atoms);
    perm_atoms(body, &mut atoms);
    let mut pts = Points { delta: 1, ..Points::default() };
    for a in atoms {
        let (e, modulus) = match a {
            BoolExpr::Cmp(l, _, r) => ((**l).clone() - (**r).clone(), None),
            BoolExpr::Divides(n, e) | BoolExpr::NotDivides(n, e) => ((**e).clone(), Some(*n)),
            _ => continue,
        };
        let lin = Linear::of(&e);
        let c = lin.coeff_strict(x).map_err(|_| OracleError::Unsupported(format!("`{x}` under a non-linear term")))?;
        if c == 0 {
            continue;
        }
        let rest = lin.without(x).to_expr();
        if let Some(y) = rest.free_vars().iter().find(|y| blocked.contains(*y)) {
            return Err(OracleError::Unsupported(format!("literal couples `{x}` with `{y}`")));
        }
        match modulus {
            Some(n) => pts.delta = lcm(pts.delta, n),
            None => {
                let q = -eval_int(&rest, env, heap)?;
                pts.add(Integer::div_floor(&q, &c));
                pts.add(Integer::div_ceil(&q, &c));
            }
        }
    }
    let d = pts.delta;
    let (lo, hi) = match (pts.lo, pts.hi) {
        (Some(l), Some(h)) => (l - 2 * d, h + 2 * d),
        // Periodic everywhere (or constant when d = 1).
        _ => (0, d - 1),
    };
    if hi - lo > MAX_WINDOW {
        return Err(OracleError::WindowTooLarge { lo, hi });
    }
    Ok((lo, hi))
}

fn binders(p: &PermExpr, out: &mut BTreeSet<String>) {
    match p {
        PermExpr::Frac(_) | PermExpr::Rd => {}
        PermExpr::Add(a, b)
        | PermExpr::Sub(a, b)
        | PermExpr::Min(a, b)
        | PermExpr::Max(a, b)
        | PermExpr::Ite(_, a, b) => {
            binders(a, out);
            binders(b, out);
        }
        PermExpr::PointwiseMax(vars, _, b) => {
            out.extend(vars.iter().cloned());
            binders(b, out);
        }
    }
}

fn int_atoms<'a>(e: &'a IntExpr, out: &mut Vec<&'a BoolExpr>) {
    match e {
        IntExpr::Const(_) | IntExpr::Var(_) | IntExpr::Length(_) => {}
        IntExpr::Mul(_, a) | IntExpr::FloorDiv(a, _) | IntExpr::Lookup(_, a) => int_atoms(a, out),
        IntExpr::Add(a, b) | IntExpr::Sub(a, b) => {
            int_atoms(a, out);
            int_atoms(b, out);
        }
        IntExpr::Ite(c, a, b) => {
            bool_atoms(c, out);
            int_atoms(a, out);
            int_atoms(b, out);
        }
    }
}

fn bool_atoms<'a>(b: &'a BoolExpr, out: &mut Vec<&'a BoolExpr>) {
    match b {
        BoolExpr::True | BoolExpr::False | BoolExpr::ArrEq(..) => {}
        BoolExpr::Cmp(l, _, r) => {
            int_atoms(l, out);
            int_atoms(r, out);
            out.push(b);
        }
        BoolExpr::Divides(_, e) | BoolExpr::NotDivides(_, e) => {
            int_atoms(e, out);
            out.push(b);
        }
        BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().for_each(|c| bool_atoms(c, out)),
        BoolExpr::Not(c) => bool_atoms(c, out),
        BoolExpr::PermCmp(p, _, q) => {
            perm_atoms(p, out);
            perm_atoms(q, out);
        }
    }
}

fn perm_atoms<'a>(p: &'a PermExpr, out: &mut Vec<&'a BoolExpr>) {
    match p {
        PermExpr::Frac(_) | PermExpr::Rd => {}
        PermExpr::Add(a, b) | PermExpr::Sub(a, b) | PermExpr::Min(a, b) | PermExpr::Max(a, b) => {
            perm_atoms(a, out);
            perm_atoms(b, out);
        }
        PermExpr::Ite(c, a, b) => {
            bool_atoms(c, out);
            perm_atoms(a, out);
            perm_atoms(b, out);
        }
        PermExpr::PointwiseMax(_, g, b) => {
            bool_atoms(g, out);
            perm_atoms(b, out);
        }
    }
}
