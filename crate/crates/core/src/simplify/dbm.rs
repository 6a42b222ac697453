//! A small decision procedure for conjunctions of literals.
//!
//! Comparisons are read as difference bounds `u − v ≤ k` between atoms (or
//! whole linear forms treated as one atom) and closed under shortest paths.
//! Divisibility literals are only evaluated once all their atoms are pinned
//! to constants; array identities use union-find.

use super::literal::negate_literal;
use crate::expr::{eval_bool, BoolExpr, CmpOp, Env, Heap, IntExpr, Linear};
use num_integer::Integer;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Le,
    Eq,
    Ne,
}

/// `x_u − x_v (≤ | = | ≠) k`, with `u`, `v` the atoms and `Const(0)` the origin.
struct Constraint {
    u: IntExpr,
    v: IntExpr,
    kind: Kind,
    k: i128,
}

fn zero() -> IntExpr {
    IntExpr::Const(0)
}

fn decompose(b: &BoolExpr) -> Option<Constraint> {
    let BoolExpr::Cmp(a, op, c) = b else { return None };
    let l = Linear::of(a).sub(&Linear::of(c));
    if l.is_const() {
        return None;
    }
    // Bring every inequality to `m ≤ 0`.
    let (m, kind) = match op {
        CmpOp::Le => (l, Kind::Le),
        CmpOp::Lt => (l.add(&Linear::constant(1)), Kind::Le),
        CmpOp::Ge => (l.scale(-1), Kind::Le),
        CmpOp::Gt => (l.scale(-1).add(&Linear::constant(1)), Kind::Le),
        CmpOp::Eq => (l, Kind::Eq),
        CmpOp::Ne => (l, Kind::Ne),
    };
    let g = m.content().abs();
    let constant = match kind {
        Kind::Le => Integer::div_ceil(&m.constant, &g),
        _ if m.constant % g != 0 => return None,
        _ => m.constant / g,
    };
    let terms: BTreeMap<IntExpr, i64> = m.terms.iter().map(|(a, c)| (a.clone(), c / g)).collect();
    let k = -(constant as i128);
    let mut it = terms.iter();
    let (u, v) = match (terms.len(), it.next(), it.next()) {
        (1, Some((t, 1)), _) => (t.clone(), zero()),
        (1, Some((t, -1)), _) => (zero(), t.clone()),
        (2, Some((t1, 1)), Some((t2, -1))) => (t1.clone(), t2.clone()),
        (2, Some((t1, -1)), Some((t2, 1))) => (t2.clone(), t1.clone()),
        _ => {
            let first_positive = *terms.values().next().unwrap() > 0;
            let sign = if first_positive { 1 } else { -1 };
            let p = Linear { terms: terms.iter().map(|(a, c)| (a.clone(), c * sign)).collect(), constant: 0 }.to_expr();
            if first_positive {
                (p, zero())
            } else {
                (zero(), p)
            }
        }
    };
    Some(Constraint { u, v, kind, k })
}

/// Closed set of facts derived from a conjunction of literals.
pub struct Facts {
    index: BTreeMap<IntExpr, usize>,
    m: Vec<Vec<Option<i128>>>,
    others: BTreeSet<BoolExpr>,
    arrays: BTreeMap<String, String>,
    unsat: bool,
}

impl Facts {
    pub fn new(lits: &[BoolExpr]) -> Facts {
        let mut f = Facts {
            index: BTreeMap::new(),
            m: Vec::new(),
            others: BTreeSet::new(),
            arrays: BTreeMap::new(),
            unsat: false,
        };
        f.node(&zero());
        let mut ne = Vec::new();
        let mut arr_ne = Vec::new();
        for l in lits {
            match l {
                BoolExpr::True => {}
                BoolExpr::False => f.unsat = true,
                BoolExpr::Cmp(..) => match decompose(l) {
                    Some(c) => {
                        let (u, v) = (f.node(&c.u), f.node(&c.v));
                        match c.kind {
                            Kind::Le => f.bound(u, v, c.k),
                            Kind::Eq => {
                                f.bound(u, v, c.k);
                                f.bound(v, u, -c.k);
                            }
                            Kind::Ne => ne.push((u, v, c.k)),
                        }
                    }
                    None => {
                        if let BoolExpr::Cmp(a, CmpOp::Eq, c) = l {
                            // Coefficient gcd does not divide the constant.
                            let d = Linear::of(a).sub(&Linear::of(c));
                            if !d.is_const() {
                                f.unsat = true;
                            }
                        }
                    }
                },
                BoolExpr::ArrEq(a, b) => {
                    let (ra, rb) = (f.root(a), f.root(b));
                    if ra != rb {
                        f.arrays.insert(ra, rb);
                    }
                }
                BoolExpr::Not(inner) if matches!(**inner, BoolExpr::ArrEq(..)) => {
                    if let BoolExpr::ArrEq(a, b) = &**inner {
                        arr_ne.push((a.clone(), b.clone()));
                    }
                    f.others.insert(l.clone());
                }
                _ => {
                    f.others.insert(l.clone());
                }
            }
        }
        f.close();
        if f.unsat {
            return f;
        }
        for (u, v, k) in ne {
            if f.m[u][v] == Some(k) && f.m[v][u] == Some(-k) {
                f.unsat = true;
            }
        }
        for (a, b) in arr_ne {
            if f.root(&a) == f.root(&b) {
                f.unsat = true;
            }
        }
        let others: Vec<BoolExpr> = f.others.iter().cloned().collect();
        for l in &others {
            if f.others.contains(&negate_literal(l)) || f.pinned_value(l) == Some(false) {
                f.unsat = true;
            }
        }
        f
    }

    pub fn is_unsat(&self) -> bool {
        self.unsat
    }

    /// Whether the facts entail the literal `b`.
    pub fn implies(&self, b: &BoolExpr) -> bool {
        if self.unsat {
            return true;
        }
        match b {
            BoolExpr::True => true,
            BoolExpr::False => false,
            BoolExpr::Cmp(..) => {
                let Some(c) = decompose(b) else { return false };
                if c.u == c.v {
                    return match c.kind {
                        Kind::Le => c.k >= 0,
                        Kind::Eq => c.k == 0,
                        Kind::Ne => c.k != 0,
                    };
                }
                let (Some(&u), Some(&v)) = (self.index.get(&c.u), self.index.get(&c.v)) else {
                    return false;
                };
                let le = |x: usize, y: usize, k: i128| self.m[x][y].is_some_and(|d| d <= k);
                match c.kind {
                    Kind::Le => le(u, v, c.k),
                    Kind::Eq => le(u, v, c.k) && le(v, u, -c.k),
                    Kind::Ne => le(u, v, c.k - 1) || le(v, u, -c.k - 1),
                }
            }
            BoolExpr::ArrEq(a, c) => a == c || self.root(a) == self.root(c),
            _ => self.others.contains(b) || self.pinned_value(b) == Some(true),
        }
    }

    /// Whether the facts entail the complement of `b`.
    pub fn refutes(&self, b: &BoolExpr) -> bool {
        self.implies(&negate_literal(b))
    }

    fn node(&mut self, e: &IntExpr) -> usize {
        if let Some(&i) = self.index.get(e) {
            return i;
        }
        let i = self.m.len();
        self.index.insert(e.clone(), i);
        for row in &mut self.m {
            row.push(None);
        }
        let mut row = vec![None; i + 1];
        row[i] = Some(0);
        self.m.push(row);
        i
    }

    fn bound(&mut self, u: usize, v: usize, k: i128) {
        let cur = &mut self.m[u][v];
        if cur.is_none_or(|d| k < d) {
            *cur = Some(k);
        }
    }

    fn close(&mut self) {
        let n = self.m.len();
        for w in 0..n {
            for u in 0..n {
                let Some(uw) = self.m[u][w] else { continue };
                for v in 0..n {
                    if let Some(wv) = self.m[w][v] {
                        let d = uw + wv;
                        if self.m[u][v].is_none_or(|c| d < c) {
                            self.m[u][v] = Some(d);
                        }
                    }
                }
            }
        }
        if (0..n).any(|i| self.m[i][i].is_some_and(|d| d < 0)) {
            self.unsat = true;
        }
    }

    fn root(&self, a: &str) -> String {
        let mut r = a.to_string();
        while let Some(p) = self.arrays.get(&r) {
            r = p.clone();
        }
        r
    }

    /// Exact value of an atom forced by the facts.
    fn pinned(&self, a: &IntExpr) -> Option<i64> {
        let &i = self.index.get(a)?;
        let hi = self.m[i][0]?;
        let lo = self.m[0][i]?;
        (hi == -lo).then(|| i64::try_from(hi).ok()).flatten()
    }

    /// Truth value of a divisibility literal whose atoms are all pinned.
    fn pinned_value(&self, b: &BoolExpr) -> Option<bool> {
        let e = match b {
            BoolExpr::Divides(_, e) | BoolExpr::NotDivides(_, e) => e,
            _ => return None,
        };
        let l = Linear::of(e);
        let env = Env::new();
        let mut value = Linear::constant(l.constant);
        for (a, c) in &l.terms {
            value = value.add(&Linear::constant(c.checked_mul(self.pinned(a)?)?));
        }
        let folded = match b {
            BoolExpr::Divides(n, _) => BoolExpr::divides(*n, value.to_expr()),
            BoolExpr::NotDivides(n, _) => BoolExpr::not_divides(*n, value.to_expr()),
            _ => unreachable!(),
        };
        eval_bool(&folded, &env, &Heap::new()).ok()
    }
}
