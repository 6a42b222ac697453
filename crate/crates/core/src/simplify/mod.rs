//! Normalisation and syntactic simplification.

mod dbm;
mod literal;
mod perm;

pub use dbm::Facts;
pub use literal::{negate_literal, normalize_cmp, normalize_divides, normalize_literal};
pub use perm::{is_nonneg, perm_bounds, simplify_perm, simplify_perm_under};

use crate::expr::{BoolExpr, CmpOp, FreeVars, IntExpr, Linear, NonLinear};
use literal::is_literal;
use std::cell::RefCell;
use std::collections::HashMap;
use std::hash::Hash;
use std::thread::LocalKey;

/// Upper bound on rewriting rounds before a result is returned as is.
const MAX_ROUNDS: usize = 50;
/// Conjunctions larger than this skip redundant-literal elimination.
const REDUNDANCY_LIMIT: usize = 16;

/// Negation normal form: `Not` only wraps array identities.
pub fn nnf(b: &BoolExpr) -> BoolExpr {
    match b {
        BoolExpr::And(v) => BoolExpr::And(v.iter().map(nnf).collect()),
        BoolExpr::Or(v) => BoolExpr::Or(v.iter().map(nnf).collect()),
        BoolExpr::Not(inner) => nnf_neg(inner),
        _ => b.clone(),
    }
}

fn nnf_neg(b: &BoolExpr) -> BoolExpr {
    match b {
        BoolExpr::True => BoolExpr::False,
        BoolExpr::False => BoolExpr::True,
        BoolExpr::Cmp(a, op, c) => BoolExpr::Cmp(a.clone(), op.negate(), c.clone()),
        BoolExpr::Divides(n, e) => BoolExpr::NotDivides(*n, e.clone()),
        BoolExpr::NotDivides(n, e) => BoolExpr::Divides(*n, e.clone()),
        BoolExpr::ArrEq(..) => BoolExpr::not(b.clone()),
        BoolExpr::And(v) => BoolExpr::Or(v.iter().map(nnf_neg).collect()),
        BoolExpr::Or(v) => BoolExpr::And(v.iter().map(nnf_neg).collect()),
        BoolExpr::Not(inner) => nnf(inner),
        BoolExpr::PermCmp(p, op, q) => BoolExpr::PermCmp(p.clone(), op.negate(), q.clone()),
    }
}

/// Memo tables are dropped when they grow past this many entries.
const MEMO_LIMIT: usize = 1 << 16;

thread_local! {
    static SIMPLIFIED: RefCell<HashMap<BoolExpr, BoolExpr>> = RefCell::new(HashMap::new());
    static UNSAT: RefCell<HashMap<Vec<BoolExpr>, bool>> = RefCell::new(HashMap::new());
}

fn memo<K: Eq + Hash + Clone, V: Clone>(
    table: &'static LocalKey<RefCell<HashMap<K, V>>>,
    key: &K,
    f: impl FnOnce() -> V,
) -> V {
    if let Some(v) = table.with(|t| t.borrow().get(key).cloned()) {
        return v;
    }
    let v = f();
    table.with(|t| {
        let mut t = t.borrow_mut();
        if t.len() >= MEMO_LIMIT {
            t.clear();
        }
        t.insert(key.clone(), v.clone());
    });
    v
}

/// Equivalent, simplified boolean expression in negation normal form.
pub fn simplify_bool(b: &BoolExpr) -> BoolExpr {
    memo(&SIMPLIFIED, b, || simplify_bool_uncached(b))
}

fn simplify_bool_uncached(b: &BoolExpr) -> BoolExpr {
    let mut cur = simp_bool(&nnf(b));
    for _ in 0..MAX_ROUNDS {
        let next = simp_bool(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Whether the conjunction of `parts` is recognisably unsatisfiable.
pub fn is_unsat(parts: &[BoolExpr]) -> bool {
    memo(&UNSAT, &parts.to_vec(), || {
        let mut lits = Vec::new();
        let mut ors = Vec::new();
        if !flatten_and(parts.iter().map(nnf).collect(), &mut lits, &mut ors) {
            return true;
        }
        if ors.is_empty() && lits.iter().all(is_literal) {
            return Facts::new(&lits).is_unsat();
        }
        simplify_bool(&BoolExpr::and(parts.to_vec())).is_false()
    })
}

/// `b` simplified under the assumption that every element of `ctx` holds.
pub fn simplify_bool_under(b: &BoolExpr, ctx: &[BoolExpr]) -> BoolExpr {
    let b = simplify_bool(b);
    if ctx.is_empty() || b.is_true() || b.is_false() {
        return b;
    }
    let with = |extra: BoolExpr| {
        let mut v = ctx.to_vec();
        v.push(extra);
        v
    };
    if is_unsat(&with(b.clone())) {
        return BoolExpr::False;
    }
    if is_unsat(&with(nnf_neg(&b))) {
        return BoolExpr::True;
    }
    match &b {
        BoolExpr::And(v) => {
            let kept: Vec<BoolExpr> = v.iter().filter(|l| !is_unsat(&with(nnf_neg(l)))).cloned().collect();
            simplify_bool(&BoolExpr::and(kept))
        }
        BoolExpr::Or(v) => {
            let kept: Vec<BoolExpr> = v.iter().filter(|d| !is_unsat(&with((*d).clone()))).cloned().collect();
            simplify_bool(&BoolExpr::or(kept))
        }
        _ => b,
    }
}

fn simp_bool(b: &BoolExpr) -> BoolExpr {
    match b {
        BoolExpr::True | BoolExpr::False => b.clone(),
        BoolExpr::And(v) => simp_and(v.iter().map(simp_bool).collect()),
        BoolExpr::Or(v) => simp_or(v.iter().map(simp_bool).collect()),
        BoolExpr::Not(inner) if !matches!(**inner, BoolExpr::ArrEq(..)) => simp_bool(&nnf_neg(inner)),
        BoolExpr::PermCmp(p, op, q) => {
            let (p, q) = (simplify_perm(p), simplify_perm(q));
            match literal::fold_perm_cmp(&p, *op, &q) {
                Some(v) => constant(v),
                None => BoolExpr::perm_cmp(p, *op, q),
            }
        }
        _ => normalize_literal(b),
    }
}

fn constant(v: bool) -> BoolExpr {
    if v {
        BoolExpr::True
    } else {
        BoolExpr::False
    }
}

fn rank(b: &BoolExpr) -> u8 {
    match b {
        BoolExpr::ArrEq(..) | BoolExpr::Not(_) => 0,
        BoolExpr::Cmp(..) => 1,
        BoolExpr::Divides(..) | BoolExpr::NotDivides(..) => 2,
        BoolExpr::PermCmp(..) => 3,
        _ => 4,
    }
}

fn sort_parts(v: &mut Vec<BoolExpr>) {
    v.sort_by(|a, b| (rank(a), a).cmp(&(rank(b), b)));
    v.dedup();
}

/// Conjuncts of `b` when it is a conjunction of literals.
fn literal_conjuncts(b: &BoolExpr) -> Option<Vec<BoolExpr>> {
    match b {
        BoolExpr::And(v) if v.iter().all(is_literal) => Some(v.clone()),
        l if is_literal(l) => Some(vec![l.clone()]),
        _ => None,
    }
}

/// Split already simplified conjuncts into literals and disjunctions.
fn flatten_and(parts: Vec<BoolExpr>, lits: &mut Vec<BoolExpr>, ors: &mut Vec<BoolExpr>) -> bool {
    for p in parts {
        match p {
            BoolExpr::True => {}
            BoolExpr::False => return false,
            BoolExpr::And(v) => {
                if !flatten_and(v, lits, ors) {
                    return false;
                }
            }
            BoolExpr::Or(_) => ors.push(p),
            l => lits.push(l),
        }
    }
    true
}

fn simp_and(parts: Vec<BoolExpr>) -> BoolExpr {
    let (mut lits, mut ors) = (Vec::new(), Vec::new());
    if !flatten_and(parts, &mut lits, &mut ors) {
        return BoolExpr::False;
    }
    sort_parts(&mut lits);
    sort_parts(&mut ors);
    for _ in 0..8 {
        let mut changed = false;

        // Propagate `x == c` into the other conjuncts.
        let pins: Vec<(String, i64)> = lits
            .iter()
            .filter_map(|l| match l {
                BoolExpr::Cmp(a, CmpOp::Eq, c) => match (&**a, &**c) {
                    (IntExpr::Var(x), IntExpr::Const(k)) => Some((x.clone(), *k)),
                    _ => None,
                },
                _ => None,
            })
            .collect();
        for (x, k) in &pins {
            let pin = IntExpr::var(x).eq(IntExpr::Const(*k));
            let mut parts = Vec::new();
            for item in lits.drain(..).chain(ors.drain(..)) {
                if item != pin && item.mentions(x) {
                    let s = simp_bool(&item.subst(x, &IntExpr::Const(*k)));
                    changed |= s != item;
                    parts.push(s);
                } else {
                    parts.push(item);
                }
            }
            if !flatten_and(parts, &mut lits, &mut ors) {
                return BoolExpr::False;
            }
        }
        sort_parts(&mut lits);
        sort_parts(&mut ors);

        if Facts::new(&lits).is_unsat() {
            return BoolExpr::False;
        }
        if lits.len() <= REDUNDANCY_LIMIT {
            let mut i = 0;
            while i < lits.len() {
                let others: Vec<BoolExpr> =
                    lits.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| l.clone()).collect();
                if Facts::new(&others).implies(&lits[i]) {
                    lits.remove(i);
                    changed = true;
                } else {
                    i += 1;
                }
            }
        }

        let facts = Facts::new(&lits);
        let mut kept_ors = Vec::new();
        for or in std::mem::take(&mut ors) {
            let BoolExpr::Or(ds) = &or else { unreachable!() };
            let mut kept = Vec::new();
            let mut valid = false;
            for d in ds {
                if is_literal(d) {
                    if facts.implies(d) {
                        valid = true;
                        break;
                    }
                    if facts.refutes(d) {
                        continue;
                    }
                } else if let Some(conj) = literal_conjuncts(d) {
                    let mut all = lits.clone();
                    all.extend(conj);
                    if Facts::new(&all).is_unsat() {
                        continue;
                    }
                }
                kept.push(d.clone());
            }
            if valid {
                changed = true;
                continue;
            }
            if kept.len() != ds.len() {
                changed = true;
            }
            match kept.len() {
                0 => return BoolExpr::False,
                1 => {
                    let d = kept.pop().unwrap();
                    if !flatten_and(vec![d], &mut lits, &mut kept_ors) {
                        return BoolExpr::False;
                    }
                }
                _ => kept_ors.push(BoolExpr::Or(kept)),
            }
        }
        ors = kept_ors;
        sort_parts(&mut lits);
        sort_parts(&mut ors);
        if !changed {
            break;
        }
    }
    let mut all = lits;
    all.extend(ors);
    BoolExpr::and(all)
}

fn flatten_or(parts: Vec<BoolExpr>, out: &mut Vec<BoolExpr>) -> bool {
    for p in parts {
        match p {
            BoolExpr::False => {}
            BoolExpr::True => return false,
            BoolExpr::Or(v) => {
                if !flatten_or(v, out) {
                    return false;
                }
            }
            d => out.push(d),
        }
    }
    true
}

fn simp_or(parts: Vec<BoolExpr>) -> BoolExpr {
    let mut ds = Vec::new();
    if !flatten_or(parts, &mut ds) {
        return BoolExpr::True;
    }
    sort_parts(&mut ds);

    let negated: Vec<BoolExpr> = ds.iter().filter(|d| is_literal(d)).map(negate_literal).collect();
    let neg_facts = Facts::new(&negated);
    if neg_facts.is_unsat() {
        return BoolExpr::True;
    }

    // Drop literal disjuncts that entail another disjunct.
    let mut i = 0;
    while i < ds.len() {
        let entails_other = is_literal(&ds[i]) && {
            let f = Facts::new(std::slice::from_ref(&ds[i]));
            ds.iter().enumerate().any(|(j, d)| j != i && is_literal(d) && f.implies(d))
        };
        if entails_other {
            ds.remove(i);
        } else {
            i += 1;
        }
    }

    // Within conjunctive disjuncts, the literal disjuncts may be assumed false.
    let negated: Vec<BoolExpr> = ds.iter().filter(|d| is_literal(d)).map(negate_literal).collect();
    let neg_facts = Facts::new(&negated);
    let lit_ds: Vec<BoolExpr> = ds.iter().filter(|d| is_literal(d)).cloned().collect();
    let mut out = Vec::new();
    for d in ds {
        if let BoolExpr::And(cs) = &d {
            if let Some(conj) = literal_conjuncts(&d) {
                let f = Facts::new(&conj);
                if lit_ds.iter().any(|l| f.implies(l)) {
                    continue;
                }
            }
            let kept: Vec<BoolExpr> = cs.iter().filter(|c| !(is_literal(c) && neg_facts.implies(c))).cloned().collect();
            if kept.is_empty() {
                return BoolExpr::True;
            }
            if kept.len() != cs.len() {
                out.push(simp_and(kept));
                continue;
            }
        }
        out.push(d);
    }
    let mut flat = Vec::new();
    if !flatten_or(out, &mut flat) {
        return BoolExpr::True;
    }
    sort_parts(&mut flat);
    BoolExpr::or(flat)
}

/// Rewrite every literal mentioning `x` so that `x` has coefficient 1.
///
/// Returns `(b', d)` where `b'` mentions `x` only as `x op e`, `n | x + e`
/// or `n ∤ x + e`, and `b` holds at `x = v` iff `b'` holds at `x = d·v`.
pub fn normalize_coefficients(b: &BoolExpr, x: &str) -> Result<(BoolExpr, i64), NonLinear> {
    let b = nnf(b);
    let mut d = 1;
    coeff_lcm(&b, x, &mut d)?;
    Ok((stretch(&b, x, d)?, d))
}

fn literal_linear(b: &BoolExpr) -> Option<Linear> {
    match b {
        BoolExpr::Cmp(a, _, c) => Some(Linear::of(a).sub(&Linear::of(c))),
        BoolExpr::Divides(_, e) | BoolExpr::NotDivides(_, e) => Some(Linear::of(e)),
        _ => None,
    }
}

pub(crate) fn coeff_lcm(b: &BoolExpr, x: &str, d: &mut i64) -> Result<(), NonLinear> {
    match b {
        BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().try_for_each(|c| coeff_lcm(c, x, d)),
        _ => {
            if let Some(l) = literal_linear(b) {
                let c = l.coeff_strict(x)?;
                if c != 0 {
                    *d = num_integer::lcm(*d, c.abs());
                }
            } else if b.mentions(x) {
                return Err(NonLinear { var: x.to_string(), expr: b.to_string() });
            }
            Ok(())
        }
    }
}

/// Multiply out a literal `c·x + r op 0` so that `x` stands for `d·x`.
pub(crate) fn stretch_literal(b: &BoolExpr, x: &str, d: i64) -> Result<BoolExpr, NonLinear> {
    let Some(l) = literal_linear(b) else { return Ok(b.clone()) };
    let c = l.coeff_strict(x)?;
    if c == 0 {
        return Ok(b.clone());
    }
    let m = d / c.abs();
    let r = l.without(x).scale(m);
    let xv = IntExpr::var(x);
    Ok(match b {
        BoolExpr::Cmp(_, op, _) => {
            // ±x + r op 0
            if c > 0 {
                xv.cmp(*op, r.scale(-1).to_expr())
            } else {
                xv.cmp(op.flip(), r.to_expr())
            }
        }
        BoolExpr::Divides(n, _) | BoolExpr::NotDivides(n, _) => {
            let n = n * m;
            let e = if c > 0 { Linear::atom(xv).add(&r) } else { Linear::atom(xv).sub(&r) };
            if matches!(b, BoolExpr::Divides(..)) {
                BoolExpr::divides(n, e.to_expr())
            } else {
                BoolExpr::not_divides(n, e.to_expr())
            }
        }
        _ => unreachable!(),
    })
}

pub(crate) fn stretch(b: &BoolExpr, x: &str, d: i64) -> Result<BoolExpr, NonLinear> {
    match b {
        BoolExpr::And(v) => Ok(BoolExpr::And(v.iter().map(|c| stretch(c, x, d)).collect::<Result<_, _>>()?)),
        BoolExpr::Or(v) => Ok(BoolExpr::Or(v.iter().map(|c| stretch(c, x, d)).collect::<Result<_, _>>()?)),
        _ => stretch_literal(b, x, d),
    }
}
