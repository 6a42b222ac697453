//! Approximations that forget array contents.
//!
//! `over_*` and `under_*` replace every comparison that reads an array by
//! `true` or `false`, so that `under(b) ⊨ b ⊨ over(b)` and
//! `under(p) ≤ p ≤ over(p)` in every state. The `havoc_*` variants only
//! forget the single location `a[e]`: a comparison reading `a'[e']` is
//! guarded by `a' = a ∧ e' = e`.

use crate::expr::{BoolExpr, CmpOp, FreeVars, IntExpr, PermExpr, PermValue};
use crate::simplify::perm_bounds;

pub fn over_bool(b: &BoolExpr) -> BoolExpr {
    Approx::All.bool(b, true)
}

pub fn under_bool(b: &BoolExpr) -> BoolExpr {
    Approx::All.bool(b, false)
}

/// `⌈p⌉`
pub fn over_perm(p: &PermExpr) -> PermExpr {
    Approx::All.perm(p, true)
}

/// `⌊p⌋`
pub fn under_perm(p: &PermExpr) -> PermExpr {
    Approx::All.perm(p, false)
}

/// Over-approximation of `p` that does not depend on the value of `a[e]`.
pub fn havoc_over(p: &PermExpr, a: &str, e: &IntExpr) -> PermExpr {
    Approx::Location(a, e).perm(&p.rename_bound(&e.free_vars()), true)
}

/// Under-approximation of `p` that does not depend on the value of `a[e]`.
pub fn havoc_under(p: &PermExpr, a: &str, e: &IntExpr) -> PermExpr {
    Approx::Location(a, e).perm(&p.rename_bound(&e.free_vars()), false)
}

pub fn havoc_over_bool(b: &BoolExpr, a: &str, e: &IntExpr) -> BoolExpr {
    Approx::Location(a, e).bool(b, true)
}

pub fn havoc_under_bool(b: &BoolExpr, a: &str, e: &IntExpr) -> BoolExpr {
    Approx::Location(a, e).bool(b, false)
}

#[derive(Clone, Copy)]
enum Approx<'a> {
    All,
    Location(&'a str, &'a IntExpr),
}

fn verdict(over: bool) -> BoolExpr {
    if over {
        BoolExpr::True
    } else {
        BoolExpr::False
    }
}

impl Approx<'_> {
    fn atom(self, b: &BoolExpr, over: bool) -> BoolExpr {
        if !b.has_lookup() {
            return b.clone();
        }
        match self {
            Approx::All => verdict(over),
            Approx::Location(a, e) => {
                let mut reads = Vec::new();
                b.collect_lookups(&mut reads);
                reads.dedup();
                let alias = BoolExpr::or(
                    reads
                        .into_iter()
                        .map(|(a2, e2)| BoolExpr::and2(BoolExpr::arr_eq(&a2, a), e2.eq(e.clone())))
                        .collect(),
                );
                BoolExpr::ite(alias, verdict(over), b.clone())
            }
        }
    }

    fn bool(self, b: &BoolExpr, over: bool) -> BoolExpr {
        match b {
            BoolExpr::True | BoolExpr::False | BoolExpr::ArrEq(..) => b.clone(),
            BoolExpr::Cmp(..) | BoolExpr::Divides(..) | BoolExpr::NotDivides(..) => self.atom(b, over),
            BoolExpr::And(v) => BoolExpr::And(v.iter().map(|c| self.bool(c, over)).collect()),
            BoolExpr::Or(v) => BoolExpr::Or(v.iter().map(|c| self.bool(c, over)).collect()),
            BoolExpr::Not(c) => BoolExpr::not(self.bool(c, !over)),
            BoolExpr::PermCmp(..) if !b.has_lookup() => b.clone(),
            BoolExpr::PermCmp(p, op, q) => {
                // over(p ≤ q) = ⌊p⌋ ≤ ⌈q⌉, and dually for under.
                let le = |p: &PermExpr, op: CmpOp, q: &PermExpr| {
                    BoolExpr::perm_cmp(self.perm(p, !over), op, self.perm(q, over))
                };
                match op {
                    CmpOp::Le | CmpOp::Lt => le(p, *op, q),
                    CmpOp::Ge => le(q, CmpOp::Le, p),
                    CmpOp::Gt => le(q, CmpOp::Lt, p),
                    CmpOp::Eq => BoolExpr::and2(le(p, CmpOp::Le, q), le(q, CmpOp::Le, p)),
                    CmpOp::Ne => BoolExpr::or2(le(p, CmpOp::Lt, q), le(q, CmpOp::Lt, p)),
                }
            }
        }
    }

    fn perm(self, p: &PermExpr, over: bool) -> PermExpr {
        if !p.has_lookup() {
            return p.clone();
        }
        match p {
            PermExpr::Frac(_) | PermExpr::Rd => p.clone(),
            PermExpr::Add(a, b) => self.perm(a, over) + self.perm(b, over),
            PermExpr::Sub(a, b) => self.perm(a, over) - self.perm(b, !over),
            PermExpr::Min(a, b) => PermExpr::min(self.perm(a, over), self.perm(b, over)),
            PermExpr::Max(a, b) => PermExpr::max(self.perm(a, over), self.perm(b, over)),
            PermExpr::Ite(c, a, b) => {
                let (pa, pb) = (self.perm(a, over), self.perm(b, over));
                let neg = BoolExpr::not((**c).clone());
                if over {
                    PermExpr::max(PermExpr::leaf(self.bool(c, true), pa), PermExpr::leaf(self.bool(&neg, true), pb))
                } else {
                    let either = PermExpr::min(pa.clone(), pb.clone());
                    PermExpr::ite(self.bool(c, false), pa, PermExpr::ite(self.bool(&neg, false), pb, either))
                }
            }
            PermExpr::PointwiseMax(vars, g, body) => {
                let body = self.perm(body, over);
                let lo = perm_bounds(&body).0;
                let m = PermExpr::pointwise_max(vars.clone(), self.bool(g, over), body);
                match lo {
                    // A shrunken range may be empty while the original is
                    // not; its maximum is then 0 rather than a body value.
                    Some(l) if !over && l < PermValue::zero() => PermExpr::min(m, PermExpr::from_value(&l)),
                    _ => m,
                }
            }
        }
    }
}
