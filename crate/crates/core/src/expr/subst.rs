//! Capture-avoiding substitution and lookup rewriting.

use super::{fresh_name, ArrayVars, BoolExpr, FreeVars, IntExpr, PermExpr};
use std::collections::BTreeSet;

impl IntExpr {
    /// `self[e/x]`
    pub fn subst(&self, x: &str, e: &IntExpr) -> IntExpr {
        match self {
            IntExpr::Var(y) if y == x => e.clone(),
            IntExpr::Const(_) | IntExpr::Var(_) | IntExpr::Length(_) => self.clone(),
            IntExpr::Mul(n, a) => IntExpr::Mul(*n, Box::new(a.subst(x, e))),
            IntExpr::Add(a, b) => a.subst(x, e) + b.subst(x, e),
            IntExpr::Sub(a, b) => a.subst(x, e) - b.subst(x, e),
            IntExpr::Lookup(arr, i) => IntExpr::Lookup(arr.clone(), Box::new(i.subst(x, e))),
            IntExpr::Ite(c, a, b) => IntExpr::ite(c.subst(x, e), a.subst(x, e), b.subst(x, e)),
            IntExpr::FloorDiv(a, n) => IntExpr::FloorDiv(Box::new(a.subst(x, e)), *n),
        }
    }

    /// Rename array variable `a1` to `a2`.
    pub fn subst_array(&self, a1: &str, a2: &str) -> IntExpr {
        let ren = |a: &String| if a == a1 { a2.to_string() } else { a.clone() };
        match self {
            IntExpr::Const(_) | IntExpr::Var(_) => self.clone(),
            IntExpr::Length(a) => IntExpr::Length(ren(a)),
            IntExpr::Lookup(a, i) => IntExpr::Lookup(ren(a), Box::new(i.subst_array(a1, a2))),
            IntExpr::Mul(n, a) => IntExpr::Mul(*n, Box::new(a.subst_array(a1, a2))),
            IntExpr::Add(a, b) => a.subst_array(a1, a2) + b.subst_array(a1, a2),
            IntExpr::Sub(a, b) => a.subst_array(a1, a2) - b.subst_array(a1, a2),
            IntExpr::Ite(c, a, b) => IntExpr::ite(c.subst_array(a1, a2), a.subst_array(a1, a2), b.subst_array(a1, a2)),
            IntExpr::FloorDiv(a, n) => IntExpr::FloorDiv(Box::new(a.subst_array(a1, a2)), *n),
        }
    }

    /// Replace every lookup `a'[e']` by `builder(a', e'')`, where `e''` is the
    /// already rewritten index (innermost lookups first).
    pub fn map_lookups(&self, builder: &dyn Fn(&str, &IntExpr) -> IntExpr) -> IntExpr {
        match self {
            IntExpr::Const(_) | IntExpr::Var(_) | IntExpr::Length(_) => self.clone(),
            IntExpr::Lookup(a, i) => builder(a, &i.map_lookups(builder)),
            IntExpr::Mul(n, a) => IntExpr::Mul(*n, Box::new(a.map_lookups(builder))),
            IntExpr::Add(a, b) => a.map_lookups(builder) + b.map_lookups(builder),
            IntExpr::Sub(a, b) => a.map_lookups(builder) - b.map_lookups(builder),
            IntExpr::Ite(c, a, b) => {
                IntExpr::ite(c.map_lookups(builder), a.map_lookups(builder), b.map_lookups(builder))
            }
            IntExpr::FloorDiv(a, n) => IntExpr::FloorDiv(Box::new(a.map_lookups(builder)), *n),
        }
    }
}

impl BoolExpr {
    pub fn subst(&self, x: &str, e: &IntExpr) -> BoolExpr {
        self.map_ints(&|i| i.subst(x, e), &|p| p.subst(x, e))
    }

    pub fn subst_array(&self, a1: &str, a2: &str) -> BoolExpr {
        match self {
            BoolExpr::ArrEq(a, b) => {
                let ren = |n: &String| if n == a1 { a2.to_string() } else { n.clone() };
                BoolExpr::ArrEq(ren(a), ren(b))
            }
            BoolExpr::And(v) => BoolExpr::And(v.iter().map(|b| b.subst_array(a1, a2)).collect()),
            BoolExpr::Or(v) => BoolExpr::Or(v.iter().map(|b| b.subst_array(a1, a2)).collect()),
            BoolExpr::Not(b) => BoolExpr::not(b.subst_array(a1, a2)),
            _ => self.map_ints(&|i| i.subst_array(a1, a2), &|p| p.subst_array(a1, a2)),
        }
    }

    pub fn map_lookups(&self, builder: &dyn Fn(&str, &IntExpr) -> IntExpr) -> BoolExpr {
        self.map_ints(&|i| i.map_lookups(builder), &|p| p.map_lookups(builder))
    }

    /// Rebuild with every maximal integer subterm and nested permission
    /// operand rewritten.
    pub fn map_ints(&self, fi: &dyn Fn(&IntExpr) -> IntExpr, fp: &dyn Fn(&PermExpr) -> PermExpr) -> BoolExpr {
        match self {
            BoolExpr::True | BoolExpr::False | BoolExpr::ArrEq(..) => self.clone(),
            BoolExpr::Cmp(a, op, b) => fi(a).cmp(*op, fi(b)),
            BoolExpr::Divides(n, e) => BoolExpr::divides(*n, fi(e)),
            BoolExpr::NotDivides(n, e) => BoolExpr::not_divides(*n, fi(e)),
            BoolExpr::And(v) => BoolExpr::And(v.iter().map(|b| b.map_ints(fi, fp)).collect()),
            BoolExpr::Or(v) => BoolExpr::Or(v.iter().map(|b| b.map_ints(fi, fp)).collect()),
            BoolExpr::Not(b) => BoolExpr::not(b.map_ints(fi, fp)),
            BoolExpr::PermCmp(p, op, q) => BoolExpr::perm_cmp(fp(p), *op, fp(q)),
        }
    }
}

impl PermExpr {
    /// Capture-avoiding `self[e/x]`.
    pub fn subst(&self, x: &str, e: &IntExpr) -> PermExpr {
        match self {
            PermExpr::Frac(_) | PermExpr::Rd => self.clone(),
            PermExpr::Add(a, b) => a.subst(x, e) + b.subst(x, e),
            PermExpr::Sub(a, b) => a.subst(x, e) - b.subst(x, e),
            PermExpr::Min(a, b) => PermExpr::min(a.subst(x, e), b.subst(x, e)),
            PermExpr::Max(a, b) => PermExpr::max(a.subst(x, e), b.subst(x, e)),
            PermExpr::Ite(c, a, b) => PermExpr::ite(c.subst(x, e), a.subst(x, e), b.subst(x, e)),
            PermExpr::PointwiseMax(vars, g, b) => {
                if vars.iter().any(|v| v == x) {
                    return self.clone();
                }
                let (vars, g, b) = avoid_capture(vars, g, b, &e.free_vars());
                PermExpr::pointwise_max(vars, g.subst(x, e), b.subst(x, e))
            }
        }
    }

    pub fn subst_array(&self, a1: &str, a2: &str) -> PermExpr {
        self.map_bools(&|b| b.subst_array(a1, a2))
    }

    /// Store-rule rewriting of every lookup. Bound variables of nested
    /// maxima are renamed away from the free variables of `extra_free`.
    pub fn map_lookups_avoiding(
        &self,
        builder: &dyn Fn(&str, &IntExpr) -> IntExpr,
        extra_free: &BTreeSet<String>,
    ) -> PermExpr {
        match self {
            PermExpr::PointwiseMax(vars, g, b) => {
                let (vars, g, b) = avoid_capture(vars, g, b, extra_free);
                PermExpr::pointwise_max(vars, g.map_lookups(builder), b.map_lookups_avoiding(builder, extra_free))
            }
            PermExpr::Ite(c, a, b) => PermExpr::ite(
                c.map_lookups(builder),
                a.map_lookups_avoiding(builder, extra_free),
                b.map_lookups_avoiding(builder, extra_free),
            ),
            PermExpr::Frac(_) | PermExpr::Rd => self.clone(),
            PermExpr::Add(a, b) => {
                a.map_lookups_avoiding(builder, extra_free) + b.map_lookups_avoiding(builder, extra_free)
            }
            PermExpr::Sub(a, b) => {
                a.map_lookups_avoiding(builder, extra_free) - b.map_lookups_avoiding(builder, extra_free)
            }
            PermExpr::Min(a, b) => {
                PermExpr::min(a.map_lookups_avoiding(builder, extra_free), b.map_lookups_avoiding(builder, extra_free))
            }
            PermExpr::Max(a, b) => {
                PermExpr::max(a.map_lookups_avoiding(builder, extra_free), b.map_lookups_avoiding(builder, extra_free))
            }
        }
    }

    /// Replace every lookup; see [`IntExpr::map_lookups`].
    pub fn map_lookups(&self, builder: &dyn Fn(&str, &IntExpr) -> IntExpr) -> PermExpr {
        self.map_lookups_avoiding(builder, &BTreeSet::new())
    }

    /// Rebuild with every boolean guard rewritten.
    pub fn map_bools(&self, f: &dyn Fn(&BoolExpr) -> BoolExpr) -> PermExpr {
        match self {
            PermExpr::Frac(_) | PermExpr::Rd => self.clone(),
            PermExpr::Add(a, b) => a.map_bools(f) + b.map_bools(f),
            PermExpr::Sub(a, b) => a.map_bools(f) - b.map_bools(f),
            PermExpr::Min(a, b) => PermExpr::min(a.map_bools(f), b.map_bools(f)),
            PermExpr::Max(a, b) => PermExpr::max(a.map_bools(f), b.map_bools(f)),
            PermExpr::Ite(c, a, b) => PermExpr::ite(f(c), a.map_bools(f), b.map_bools(f)),
            PermExpr::PointwiseMax(v, g, b) => PermExpr::pointwise_max(v.clone(), f(g), b.map_bools(f)),
        }
    }

    /// Rename bound variables of every maximum so that none occurs in `avoid`.
    pub fn rename_bound(&self, avoid: &BTreeSet<String>) -> PermExpr {
        match self {
            PermExpr::PointwiseMax(vars, g, b) => {
                let (vars, g, b) = avoid_capture(vars, g, b, avoid);
                PermExpr::pointwise_max(vars, g, b.rename_bound(avoid))
            }
            PermExpr::Frac(_) | PermExpr::Rd => self.clone(),
            PermExpr::Add(a, b) => a.rename_bound(avoid) + b.rename_bound(avoid),
            PermExpr::Sub(a, b) => a.rename_bound(avoid) - b.rename_bound(avoid),
            PermExpr::Min(a, b) => PermExpr::min(a.rename_bound(avoid), b.rename_bound(avoid)),
            PermExpr::Max(a, b) => PermExpr::max(a.rename_bound(avoid), b.rename_bound(avoid)),
            PermExpr::Ite(c, a, b) => PermExpr::ite((**c).clone(), a.rename_bound(avoid), b.rename_bound(avoid)),
        }
    }
}

/// Rename the binders in `vars` that clash with `avoid`.
fn avoid_capture(
    vars: &[String],
    g: &BoolExpr,
    b: &PermExpr,
    avoid: &BTreeSet<String>,
) -> (Vec<String>, BoolExpr, PermExpr) {
    let mut vars = vars.to_vec();
    let mut g = g.clone();
    let mut b = b.clone();
    if !vars.iter().any(|v| avoid.contains(v)) {
        return (vars, g, b);
    }
    let mut used: BTreeSet<String> = avoid.clone();
    used.extend(g.free_vars());
    used.extend(b.free_vars());
    used.extend(vars.iter().cloned());
    used.extend(g.array_vars());
    used.extend(b.array_vars());
    for v in vars.iter_mut() {
        if avoid.contains(v) {
            let nv = fresh_name(v, &used);
            used.insert(nv.clone());
            let ne = IntExpr::Var(nv.clone());
            g = g.subst(v, &ne);
            b = b.subst(v, &ne);
            *v = nv;
        }
    }
    (vars, g, b)
}
