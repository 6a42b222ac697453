//! Over-approximate loop invariants from a forward interval analysis.
//!
//! Interval endpoints are a constant plus at most one symbol: `length(a)`,
//! `length(a) / n`, or an integer variable that the method never assigns.
//! That is enough for bounds such as `0 ≤ j ≤ length(a)`. Loop heads are
//! iterated with joins for three rounds, then widened to ±∞, then narrowed
//! twice.

use crate::expr::{BoolExpr, CmpOp, IntExpr, Linear};
use crate::frontend::{Method, Stmt, StmtKind, WhileLoop};
use crate::infer::LoopMeta;
use crate::simplify::nnf;
use std::collections::{BTreeMap, BTreeSet, HashMap};

const WIDEN_AFTER: usize = 3;
const NARROWING_STEPS: usize = 2;

/// One interval invariant per loop of `m`, in pre-order. Each is a
/// conjunction of bounds on the integer variables the loop modifies, or
/// `false` for a loop the analysis finds unreachable.
pub fn forward_intervals(m: &Method) -> Vec<BoolExpr> {
    let mut assigned = m.body.modified_int_vars();
    assigned.extend(m.locals.iter().map(|p| p.name.clone()));
    let reassigned = m.body.modified_array_vars();
    let mut an = Intervals { assigned, reassigned, found: HashMap::new() };
    an.stmt(&m.body, State::top());
    m.body
        .loops()
        .into_iter()
        .map(|(_, w)| an.found.remove(&(w as *const WhileLoop)).unwrap_or(BoolExpr::False))
        .collect()
}

/// `I⁺` conjoins the inferred invariant with the `invariant` annotations;
/// `I⁻` is the conjunction of the `underinvariant` annotations, or `false`.
/// Annotations are trusted.
pub fn resolve_invariants(w: &WhileLoop, inferred: Option<BoolExpr>) -> LoopMeta {
    LoopMeta::from_annotations(w, inferred)
}

/// An endpoint: `symbol + k` (`symbol` absent for constants) or ±∞.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Bound {
    NegInf,
    Fin(Option<IntExpr>, i64),
    PosInf,
}

impl Bound {
    fn konst(k: i64) -> Bound {
        Bound::Fin(None, k)
    }

    fn shift(&self, d: i64) -> Bound {
        match self {
            Bound::Fin(s, k) => Bound::Fin(s.clone(), k + d),
            b => b.clone(),
        }
    }

    fn to_expr(&self) -> Option<IntExpr> {
        match self {
            Bound::Fin(None, k) => Some(IntExpr::Const(*k)),
            Bound::Fin(Some(s), k) => Some(Linear::atom(s.clone()).add(&Linear::constant(*k)).to_expr()),
            _ => None,
        }
    }
}

/// Symbols known to be non-negative.
fn nonneg(s: &IntExpr) -> bool {
    match s {
        IntExpr::Length(_) => true,
        IntExpr::FloorDiv(e, _) => matches!(**e, IntExpr::Length(_)),
        _ => false,
    }
}

/// `a ≤ b` in every state.
fn le(a: &Bound, b: &Bound) -> bool {
    match (a, b) {
        (Bound::NegInf, _) | (_, Bound::PosInf) => true,
        (_, Bound::NegInf) | (Bound::PosInf, _) => false,
        (Bound::Fin(s1, k1), Bound::Fin(s2, k2)) => {
            if k1 > k2 {
                return false;
            }
            match (s1, s2) {
                (x, y) if x == y => true,
                (None, Some(s)) => nonneg(s),
                // length(a) / n ≤ length(a)
                (Some(IntExpr::FloorDiv(e, _)), Some(l @ IntExpr::Length(_))) => **e == *l,
                _ => false,
            }
        }
    }
}

fn add(a: &Bound, b: &Bound, inf: &Bound) -> Bound {
    match (a, b) {
        (Bound::Fin(s, k1), Bound::Fin(None, k2)) | (Bound::Fin(None, k2), Bound::Fin(s, k1)) => {
            Bound::Fin(s.clone(), k1 + k2)
        }
        _ => inf.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Interval {
    lo: Bound,
    hi: Bound,
}

impl Interval {
    fn top() -> Interval {
        Interval { lo: Bound::NegInf, hi: Bound::PosInf }
    }

    fn point(b: Bound) -> Interval {
        Interval { lo: b.clone(), hi: b }
    }

    fn is_empty(&self) -> bool {
        // hi < lo, i.e. hi + 1 ≤ lo.
        !matches!(self.hi, Bound::PosInf) && !matches!(self.lo, Bound::NegInf) && le(&self.hi.shift(1), &self.lo)
    }

    fn join(&self, o: &Interval) -> Interval {
        let lo = if le(&self.lo, &o.lo) {
            self.lo.clone()
        } else if le(&o.lo, &self.lo) {
            o.lo.clone()
        } else {
            Bound::NegInf
        };
        let hi = if le(&o.hi, &self.hi) {
            self.hi.clone()
        } else if le(&self.hi, &o.hi) {
            o.hi.clone()
        } else {
            Bound::PosInf
        };
        Interval { lo, hi }
    }

    /// Intersection, keeping the existing endpoint when the two are
    /// incomparable.
    fn meet(&self, o: &Interval) -> Interval {
        let lo = if le(&self.lo, &o.lo) { o.lo.clone() } else { self.lo.clone() };
        let hi = if le(&o.hi, &self.hi) { o.hi.clone() } else { self.hi.clone() };
        Interval { lo, hi }
    }

    fn widen(&self, new: &Interval) -> Interval {
        Interval {
            lo: if le(&self.lo, &new.lo) { self.lo.clone() } else { Bound::NegInf },
            hi: if le(&new.hi, &self.hi) { self.hi.clone() } else { Bound::PosInf },
        }
    }

    fn narrow(&self, new: &Interval) -> Interval {
        Interval {
            lo: if self.lo == Bound::NegInf { new.lo.clone() } else { self.lo.clone() },
            hi: if self.hi == Bound::PosInf { new.hi.clone() } else { self.hi.clone() },
        }
    }

    fn add(&self, o: &Interval) -> Interval {
        Interval { lo: add(&self.lo, &o.lo, &Bound::NegInf), hi: add(&self.hi, &o.hi, &Bound::PosInf) }
    }

    fn scale(&self, c: i64) -> Interval {
        let konst = |b: &Bound| match b {
            Bound::Fin(None, k) => Some(k * c),
            _ => None,
        };
        match c {
            1 => self.clone(),
            0 => Interval::point(Bound::konst(0)),
            _ => {
                let (lo, hi) = if c > 0 { (&self.lo, &self.hi) } else { (&self.hi, &self.lo) };
                Interval {
                    lo: konst(lo).map_or(Bound::NegInf, Bound::konst),
                    hi: konst(hi).map_or(Bound::PosInf, Bound::konst),
                }
            }
        }
    }
}

/// Per-variable intervals; `None` is the unreachable state.
#[derive(Clone, Debug, PartialEq, Eq)]
struct State(Option<BTreeMap<String, Interval>>);

impl State {
    fn top() -> State {
        State(Some(BTreeMap::new()))
    }

    fn bottom() -> State {
        State(None)
    }

    fn get(&self, x: &str) -> Interval {
        self.0.as_ref().and_then(|m| m.get(x).cloned()).unwrap_or_else(Interval::top)
    }

    fn set(&mut self, x: &str, v: Interval) {
        if let Some(m) = &mut self.0 {
            if v.is_empty() {
                self.0 = None;
            } else if v == Interval::top() {
                m.remove(x);
            } else {
                m.insert(x.to_string(), v);
            }
        }
    }

    fn pointwise(&self, o: &State, f: impl Fn(&Interval, &Interval) -> Interval) -> State {
        match (&self.0, &o.0) {
            (None, _) => o.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => {
                let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
                let mut out = State::top();
                for k in keys {
                    out.set(k, f(&self.get(k), &o.get(k)));
                }
                out
            }
        }
    }

    fn join(&self, o: &State) -> State {
        self.pointwise(o, Interval::join)
    }
}

struct Intervals {
    /// Integer variables assigned somewhere; all others are symbols.
    assigned: BTreeSet<String>,
    /// Array variables assigned somewhere; their lengths are not symbols.
    reassigned: BTreeSet<String>,
    found: HashMap<*const WhileLoop, BoolExpr>,
}

impl Intervals {
    fn symbol(&self, atom: &IntExpr) -> bool {
        match atom {
            IntExpr::Var(x) => !self.assigned.contains(x),
            IntExpr::Length(a) => !self.reassigned.contains(a),
            IntExpr::FloorDiv(e, n) => *n > 0 && matches!(&**e, IntExpr::Length(a) if !self.reassigned.contains(a)),
            _ => false,
        }
    }

    fn linear(&self, l: &Linear, st: &State) -> Interval {
        let mut acc = Interval::point(Bound::konst(l.constant));
        for (atom, c) in &l.terms {
            acc = acc.add(&self.atom(atom, st).scale(*c));
        }
        acc
    }

    fn atom(&self, atom: &IntExpr, st: &State) -> Interval {
        if self.symbol(atom) {
            return Interval::point(Bound::Fin(Some(atom.clone()), 0));
        }
        match atom {
            IntExpr::Var(x) => st.get(x),
            IntExpr::FloorDiv(e, n) => {
                let i = self.linear(&Linear::of(e), st);
                let div = |b: &Bound, inf: Bound| match b {
                    Bound::Fin(None, k) => Bound::konst(k.div_euclid(*n)),
                    _ => inf,
                };
                Interval { lo: div(&i.lo, Bound::NegInf), hi: div(&i.hi, Bound::PosInf) }
            }
            IntExpr::Ite(_, a, b) => self.expr(a, st).join(&self.expr(b, st)),
            _ => Interval::top(),
        }
    }

    fn expr(&self, e: &IntExpr, st: &State) -> Interval {
        self.linear(&Linear::of(e), st)
    }

    fn refine(&self, st: &State, b: &BoolExpr) -> State {
        if st.0.is_none() {
            return st.clone();
        }
        match b {
            BoolExpr::False => State::bottom(),
            BoolExpr::And(v) => v.iter().fold(st.clone(), |s, c| self.refine(&s, c)),
            BoolExpr::Or(v) => v.iter().map(|c| self.refine(st, c)).fold(State::bottom(), |a, s| a.join(&s)),
            BoolExpr::Cmp(l, op, r) => {
                let diff = Linear::of(l).sub(&Linear::of(r));
                let mut out = st.clone();
                for (atom, &c) in &diff.terms {
                    let IntExpr::Var(x) = atom else { continue };
                    if self.symbol(atom) || c.abs() != 1 {
                        continue;
                    }
                    let rest = diff.sub(&Linear::atom(atom.clone()).scale(c));
                    // c = 1: x op −rest.  c = −1: x op' rest with op flipped.
                    let (rhs, op) = if c == 1 { (rest.scale(-1), *op) } else { (rest, op.flip()) };
                    let r = self.linear(&rhs, st);
                    let bound = match op {
                        CmpOp::Le => Interval { lo: Bound::NegInf, hi: r.hi },
                        CmpOp::Lt => Interval { lo: Bound::NegInf, hi: r.hi.shift(-1) },
                        CmpOp::Ge => Interval { lo: r.lo, hi: Bound::PosInf },
                        CmpOp::Gt => Interval { lo: r.lo.shift(1), hi: Bound::PosInf },
                        CmpOp::Eq => r,
                        CmpOp::Ne => continue,
                    };
                    let v = out.get(x).meet(&bound);
                    out.set(x, v);
                }
                out
            }
            _ => st.clone(),
        }
    }

    fn stmt(&mut self, s: &Stmt, st: State) -> State {
        if st.0.is_none() {
            return st;
        }
        match &s.kind {
            StmtKind::Skip
            | StmtKind::AssignArrayVar(..)
            | StmtKind::StoreElem(..)
            | StmtKind::Inhale(..)
            | StmtKind::Exhale(..) => st,
            StmtKind::AssignVar(x, e) => {
                let v = self.expr(e, &st);
                let mut st = st;
                st.set(x, v);
                st
            }
            StmtKind::LoadElem(x, _, _) => {
                let mut st = st;
                st.set(x, Interval::top());
                st
            }
            StmtKind::Seq(a, b) => {
                let mid = self.stmt(a, st);
                self.stmt(b, mid)
            }
            StmtKind::If(c, a, b) => {
                let t = self.refine(&st, &nnf(c));
                let f = self.refine(&st, &nnf(&BoolExpr::not(c.clone())));
                let t = self.stmt(a, t);
                let f = self.stmt(b, f);
                t.join(&f)
            }
            StmtKind::While(w) => self.while_loop(w, st),
        }
    }

    fn while_loop(&mut self, w: &WhileLoop, entry: State) -> State {
        let cond = nnf(&w.cond);
        let exit_cond = nnf(&BoolExpr::not(w.cond.clone()));
        let step = |this: &mut Self, head: &State| {
            let inside = this.refine(head, &cond);
            entry.join(&this.stmt(&w.body, inside))
        };
        let mut head = entry.clone();
        let mut round = 0;
        loop {
            let next = step(self, &head);
            let next = if round < WIDEN_AFTER { next } else { head.pointwise(&next, Interval::widen) };
            if next == head {
                break;
            }
            head = next;
            round += 1;
        }
        for _ in 0..NARROWING_STEPS {
            let next = step(self, &head);
            head = head.pointwise(&next, Interval::narrow);
        }
        // A last pass so that inner loops record invariants for this head.
        step(self, &head);

        let inv = match &head.0 {
            None => BoolExpr::False,
            Some(_) => BoolExpr::and(
                w.body
                    .modified_int_vars()
                    .iter()
                    .flat_map(|x| {
                        let i = head.get(x);
                        let v = IntExpr::var(x);
                        let lo = i.lo.to_expr().map(|b| b.le(v.clone()));
                        let hi = i.hi.to_expr().map(|b| v.clone().le(b));
                        lo.into_iter().chain(hi)
                    })
                    .collect(),
            ),
        };
        self.found.insert(w as *const WhileLoop, inv);
        self.refine(&head, &exit_cond)
    }
}
