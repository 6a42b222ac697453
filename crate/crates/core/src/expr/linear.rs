//! Linear normal form `Σ cᵢ·atomᵢ + k` of integer expressions.

use super::{FreeVars, IntExpr};
use std::collections::BTreeMap;
use thiserror::Error;

/// Sum of integer multiples of atoms plus a constant. Atoms are variables,
/// `length(a)`, lookups, conditionals and floor divisions (the latter three
/// with canonicalised operands).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Linear {
    pub terms: BTreeMap<IntExpr, i64>,
    pub constant: i64,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("variable `{var}` occurs non-linearly in `{expr}`")]
pub struct NonLinear {
    pub var: String,
    pub expr: String,
}

impl Linear {
    pub fn constant(k: i64) -> Linear {
        Linear { terms: BTreeMap::new(), constant: k }
    }

    pub fn atom(a: IntExpr) -> Linear {
        let mut terms = BTreeMap::new();
        terms.insert(a, 1);
        Linear { terms, constant: 0 }
    }

    pub fn of(e: &IntExpr) -> Linear {
        match e {
            IntExpr::Const(n) => Linear::constant(*n),
            IntExpr::Var(_) | IntExpr::Length(_) => Linear::atom(e.clone()),
            IntExpr::Mul(n, a) => Linear::of(a).scale(*n),
            IntExpr::Add(a, b) => Linear::of(a).add(&Linear::of(b)),
            IntExpr::Sub(a, b) => Linear::of(a).sub(&Linear::of(b)),
            IntExpr::Lookup(arr, i) => Linear::atom(IntExpr::Lookup(arr.clone(), Box::new(Linear::of(i).to_expr()))),
            IntExpr::Ite(..) => Linear::atom(e.clone()),
            IntExpr::FloorDiv(a, n) => Linear::atom(IntExpr::FloorDiv(Box::new(Linear::of(a).to_expr()), *n)),
        }
    }

    pub fn add(&self, o: &Linear) -> Linear {
        let mut r = self.clone();
        for (a, c) in &o.terms {
            *r.terms.entry(a.clone()).or_insert(0) += c;
        }
        r.terms.retain(|_, c| *c != 0);
        r.constant += o.constant;
        r
    }

    pub fn sub(&self, o: &Linear) -> Linear {
        self.add(&o.scale(-1))
    }

    pub fn scale(&self, n: i64) -> Linear {
        if n == 0 {
            return Linear::constant(0);
        }
        Linear { terms: self.terms.iter().map(|(a, c)| (a.clone(), c * n)).collect(), constant: self.constant * n }
    }

    pub fn is_const(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the variable `x`.
    pub fn coeff(&self, x: &str) -> i64 {
        self.terms.get(&IntExpr::var(x)).copied().unwrap_or(0)
    }

    /// Coefficient of `x`, failing if `x` also occurs inside another atom.
    pub fn coeff_strict(&self, x: &str) -> Result<i64, NonLinear> {
        for a in self.terms.keys() {
            if !matches!(a, IntExpr::Var(_)) && a.mentions(x) {
                return Err(NonLinear { var: x.to_string(), expr: a.to_string() });
            }
        }
        Ok(self.coeff(x))
    }

    /// The form with the `x` term removed.
    pub fn without(&self, x: &str) -> Linear {
        let mut r = self.clone();
        r.terms.remove(&IntExpr::var(x));
        r
    }

    /// Greatest common divisor of the non-constant coefficients.
    pub fn content(&self) -> i64 {
        self.terms.values().fold(0, |g, c| num_integer::gcd(g, *c))
    }

    /// Canonical expression: atoms in order, constant last.
    pub fn to_expr(&self) -> IntExpr {
        let term = |a: &IntExpr, c: i64| if c == 1 { a.clone() } else { IntExpr::mul(c, a.clone()) };
        let mut acc: Option<IntExpr> = None;
        for (a, &c) in &self.terms {
            acc = Some(match acc {
                None => term(a, c),
                Some(e) if c > 0 => e + term(a, c),
                Some(e) => e - term(a, -c),
            });
        }
        match acc {
            None => IntExpr::Const(self.constant),
            Some(e) if self.constant > 0 => e + IntExpr::Const(self.constant),
            Some(e) if self.constant < 0 => e - IntExpr::Const(-self.constant),
            Some(e) => e,
        }
    }
}
