use super::literal::is_literal;
use super::{nnf_neg, simplify_bool, simplify_bool_under, MAX_ROUNDS};
use crate::expr::{BoolExpr, FreeVars, PermExpr, PermValue};

/// Equivalent, simplified permission expression.
pub fn simplify_perm(p: &PermExpr) -> PermExpr {
    simplify_perm_under(p, &[])
}

/// `p` simplified under the assumption that every element of `ctx` holds.
pub fn simplify_perm_under(p: &PermExpr, ctx: &[BoolExpr]) -> PermExpr {
    let mut cur = p.clone();
    for _ in 0..MAX_ROUNDS {
        let next = simp(&cur, ctx);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Constant lower and upper bounds (`None` when unbounded).
pub fn perm_bounds(p: &PermExpr) -> (Option<PermValue>, Option<PermValue>) {
    let both = |a: Option<PermValue>, b: Option<PermValue>, f: fn(PermValue, PermValue) -> PermValue| match (a, b) {
        (Some(a), Some(b)) => Some(f(a, b)),
        _ => None,
    };
    let either = |a: Option<PermValue>, b: Option<PermValue>, f: fn(PermValue, PermValue) -> PermValue| match (a, b) {
        (Some(a), Some(b)) => Some(f(a, b)),
        (Some(a), None) | (None, Some(a)) => Some(a),
        (None, None) => None,
    };
    match p {
        PermExpr::Frac(_) | PermExpr::Rd => {
            let v = p.const_value();
            (v.clone(), v)
        }
        PermExpr::Add(a, b) => {
            let ((la, ua), (lb, ub)) = (perm_bounds(a), perm_bounds(b));
            (both(la, lb, |x, y| x + y), both(ua, ub, |x, y| x + y))
        }
        PermExpr::Sub(a, b) => {
            let ((la, ua), (lb, ub)) = (perm_bounds(a), perm_bounds(b));
            (both(la, ub, |x, y| x - y), both(ua, lb, |x, y| x - y))
        }
        PermExpr::Max(a, b) => {
            let ((la, ua), (lb, ub)) = (perm_bounds(a), perm_bounds(b));
            (either(la, lb, PermValue::max), both(ua, ub, PermValue::max))
        }
        PermExpr::Min(a, b) => {
            let ((la, ua), (lb, ub)) = (perm_bounds(a), perm_bounds(b));
            (both(la, lb, PermValue::min), either(ua, ub, PermValue::min))
        }
        PermExpr::Ite(_, a, b) => {
            let ((la, ua), (lb, ub)) = (perm_bounds(a), perm_bounds(b));
            (both(la, lb, PermValue::min), both(ua, ub, PermValue::max))
        }
        PermExpr::PointwiseMax(_, _, b) => {
            // An empty range yields 0.
            let (l, u) = perm_bounds(b);
            (l.map(|l| l.min(PermValue::zero())), u.map(|u| u.max(PermValue::zero())))
        }
    }
}

/// Whether `p` is non-negative in every state, judged from its structure.
pub fn is_nonneg(p: &PermExpr) -> bool {
    perm_bounds(p).0.is_some_and(|l| l >= PermValue::zero())
}

fn simp(p: &PermExpr, ctx: &[BoolExpr]) -> PermExpr {
    match p {
        PermExpr::Frac(_) | PermExpr::Rd => p.clone(),
        PermExpr::Add(a, b) => add(simp(a, ctx), simp(b, ctx)),
        PermExpr::Sub(a, b) => sub(simp(a, ctx), simp(b, ctx)),
        PermExpr::Max(..) | PermExpr::Min(..) => {
            let is_max = matches!(p, PermExpr::Max(..));
            let mut items = Vec::new();
            flatten(p, is_max, &mut items);
            let items = items.iter().map(|q| simp(q, ctx)).collect();
            min_max(is_max, items)
        }
        PermExpr::Ite(c, a, b) => {
            let c = simplify_bool_under(c, ctx);
            if c.is_true() {
                return simp(a, ctx);
            }
            if c.is_false() {
                return simp(b, ctx);
            }
            // Only literal facts are carried into the branches.
            let mut ctx_a = ctx.to_vec();
            ctx_a.extend(conjuncts(&c).into_iter().filter(is_literal));
            let mut ctx_b = ctx.to_vec();
            ctx_b.extend(conjuncts(&simplify_bool(&nnf_neg(&c))).into_iter().filter(is_literal));
            ite(c, simp(a, &ctx_a), simp(b, &ctx_b))
        }
        PermExpr::PointwiseMax(vars, g, b) => {
            let outer: Vec<BoolExpr> = ctx.iter().filter(|c| !vars.iter().any(|v| c.mentions(v))).cloned().collect();
            let g = simplify_bool_under(g, &outer);
            if g.is_false() {
                return PermExpr::zero();
            }
            let mut inner = outer;
            inner.push(g.clone());
            let b = simp(b, &inner);
            if b.is_zero() {
                return PermExpr::zero();
            }
            PermExpr::pointwise_max(vars.clone(), g, b)
        }
    }
}

fn flatten(p: &PermExpr, is_max: bool, out: &mut Vec<PermExpr>) {
    match p {
        PermExpr::Max(a, b) if is_max => {
            flatten(a, is_max, out);
            flatten(b, is_max, out);
        }
        PermExpr::Min(a, b) if !is_max => {
            flatten(a, is_max, out);
            flatten(b, is_max, out);
        }
        _ => out.push(p.clone()),
    }
}

fn ite(c: BoolExpr, a: PermExpr, b: PermExpr) -> PermExpr {
    if a == b {
        return a;
    }
    if b.is_zero() {
        if let PermExpr::Ite(c2, a2, b2) = &a {
            if b2.is_zero() {
                return ite(simplify_bool(&BoolExpr::and2(c, (**c2).clone())), (**a2).clone(), b);
            }
        }
    }
    PermExpr::ite(c, a, b)
}

fn add(a: PermExpr, b: PermExpr) -> PermExpr {
    if let (Some(x), Some(y)) = (a.const_value(), b.const_value()) {
        return PermExpr::from_value(&(x + y));
    }
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    match (&a, &b) {
        (_, PermExpr::Sub(z, q)) if z.is_zero() => sub(a.clone(), (**q).clone()),
        (PermExpr::Sub(z, q), _) if z.is_zero() => sub(b.clone(), (**q).clone()),
        (PermExpr::Ite(c1, p1, q1), PermExpr::Ite(c2, p2, q2)) if c1 == c2 => {
            ite((**c1).clone(), add((**p1).clone(), (**p2).clone()), add((**q1).clone(), (**q2).clone()))
        }
        _ => {
            // Sums are kept flat and sorted so that reordered copies compare equal.
            let mut terms = Vec::new();
            flatten_add(a, &mut terms);
            flatten_add(b, &mut terms);
            terms.sort();
            let mut it = terms.into_iter();
            let first = it.next().unwrap();
            it.fold(first, |acc, t| acc + t)
        }
    }
}

fn flatten_add(p: PermExpr, out: &mut Vec<PermExpr>) {
    match p {
        PermExpr::Add(a, b) => {
            flatten_add(*a, out);
            flatten_add(*b, out);
        }
        p => out.push(p),
    }
}

fn sub(a: PermExpr, b: PermExpr) -> PermExpr {
    if let (Some(x), Some(y)) = (a.const_value(), b.const_value()) {
        return PermExpr::from_value(&(x - y));
    }
    if b.is_zero() {
        return a;
    }
    if a == b {
        return PermExpr::zero();
    }
    match (&a, &b) {
        (_, PermExpr::Sub(q, r)) => sub(add(a.clone(), (**r).clone()), (**q).clone()),
        (PermExpr::Add(p, q), _) if **q == b => (**p).clone(),
        (PermExpr::Add(p, q), _) if **p == b => (**q).clone(),
        (PermExpr::Ite(c1, p1, q1), PermExpr::Ite(c2, p2, q2)) if c1 == c2 => {
            ite((**c1).clone(), sub((**p1).clone(), (**p2).clone()), sub((**q1).clone(), (**q2).clone()))
        }
        _ => a - b,
    }
}

/// `ite(g, p, 0)` as `(g, p)`.
fn zero_else(p: &PermExpr) -> Option<(&BoolExpr, &PermExpr)> {
    match p {
        PermExpr::Ite(g, a, b) if b.is_zero() => Some((g, a)),
        _ => None,
    }
}

fn conjuncts(b: &BoolExpr) -> Vec<BoolExpr> {
    match b {
        BoolExpr::And(v) => v.clone(),
        BoolExpr::True => Vec::new(),
        _ => vec![b.clone()],
    }
}

fn min_max(is_max: bool, items: Vec<PermExpr>) -> PermExpr {
    let pick = |x: PermValue, y: PermValue| if is_max { x.max(y) } else { x.min(y) };
    let mut konst: Option<PermValue> = None;
    let mut rest: Vec<PermExpr> = Vec::new();
    for it in items {
        match it.const_value() {
            Some(v) => konst = Some(konst.map_or(v.clone(), |k| pick(k, v))),
            _ => {
                if !rest.contains(&it) {
                    rest.push(it)
                }
            }
        }
    }
    if let Some(k) = &konst {
        // Entries dominated by the constant contribute nothing.
        rest.retain(|e| {
            let (lo, hi) = perm_bounds(e);
            if is_max {
                hi.is_none_or(|h| h > *k)
            } else {
                lo.is_none_or(|l| l < *k)
            }
        });
        let dominated = rest.iter().any(|e| {
            let (lo, hi) = perm_bounds(e);
            if is_max {
                lo.is_some_and(|l| l >= *k)
            } else {
                hi.is_some_and(|h| h <= *k)
            }
        });
        if dominated {
            konst = None;
        }
    }
    rest.sort();
    if is_max && rest.len() >= 2 {
        if let Some(merged) = merge_zero_else(&rest) {
            rest = vec![merged];
        }
    }
    let mut all = rest;
    if let Some(k) = konst {
        all.push(PermExpr::from_value(&k));
    }
    let mut it = all.into_iter();
    let first = it.next().unwrap_or_else(PermExpr::zero);
    it.fold(first, |acc, e| if is_max { PermExpr::max(acc, e) } else { PermExpr::min(acc, e) })
}

/// Combine a maximum whose entries are all of the form `ite(g, p, 0)`.
fn merge_zero_else(items: &[PermExpr]) -> Option<PermExpr> {
    let pairs: Vec<(&BoolExpr, &PermExpr)> = items.iter().map(zero_else).collect::<Option<_>>()?;

    // Entries with identical guards share one conditional.
    let mut groups: Vec<(BoolExpr, Vec<PermExpr>)> = Vec::new();
    for (g, p) in &pairs {
        match groups.iter_mut().find(|(h, _)| h == *g) {
            Some((_, ps)) => ps.push((*p).clone()),
            None => groups.push(((*g).clone(), vec![(*p).clone()])),
        }
    }
    if groups.len() < pairs.len() {
        let merged: Vec<PermExpr> = groups
            .into_iter()
            .map(|(g, ps)| {
                let mut it = ps.into_iter();
                let first = it.next().unwrap();
                PermExpr::leaf(g, it.fold(first, PermExpr::max))
            })
            .collect();
        let mut it = merged.into_iter();
        let first = it.next().unwrap();
        return Some(it.fold(first, PermExpr::max));
    }

    // Factor out conjuncts common to every guard.
    let sets: Vec<Vec<BoolExpr>> = pairs.iter().map(|(g, _)| conjuncts(g)).collect();
    let common: Vec<BoolExpr> = sets[0].iter().filter(|c| sets[1..].iter().all(|s| s.contains(c))).cloned().collect();
    if !common.is_empty() {
        let inner: Vec<PermExpr> = pairs
            .iter()
            .zip(&sets)
            .map(|((_, p), s)| {
                let g = BoolExpr::and(s.iter().filter(|c| !common.contains(c)).cloned().collect());
                PermExpr::leaf(g, (*p).clone())
            })
            .collect();
        let mut it = inner.into_iter();
        let first = it.next().unwrap();
        return Some(PermExpr::leaf(BoolExpr::and(common), it.fold(first, PermExpr::max)));
    }

    // Complementary guards over non-negative branches form one conditional.
    if let [(g1, p1), (g2, p2)] = pairs[..] {
        if is_nonneg(p1) && is_nonneg(p2) && simplify_bool(&nnf_neg(g1)) == *g2 {
            return Some(PermExpr::ite(g1.clone(), p1.clone(), p2.clone()));
        }
    }
    None
}
