//! Integer, boolean and permission expressions.
//!
//! Permission expressions are parameterised by the two distinguished
//! variables [`QA`] (an array identifier) and [`QI`] (an index), so a single
//! expression denotes a permission amount for every heap location.

mod display;
mod eval;
mod linear;
mod subst;

pub use eval::{eval_bool, eval_int, eval_perm, Env, EvalError, Heap};
pub use linear::{Linear, NonLinear};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Array-variable name of the distinguished location parameter.
pub const QA: &str = "qa";
/// Integer-variable name of the distinguished index parameter.
pub const QI: &str = "qi";

/// Runtime identity of an array object.
pub type ArrayId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    /// The operator satisfied exactly when `self` is not.
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// The operator obtained by swapping the operands.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            op => op,
        }
    }

    pub fn holds<T: Ord>(self, a: &T, b: &T) -> bool {
        let o = a.cmp(b);
        match self {
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Ne => o != Ordering::Equal,
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntExpr {
    Const(i64),
    Var(String),
    /// Multiplication by a constant coefficient.
    Mul(i64, Box<IntExpr>),
    Add(Box<IntExpr>, Box<IntExpr>),
    Sub(Box<IntExpr>, Box<IntExpr>),
    Lookup(String, Box<IntExpr>),
    Length(String),
    Ite(Box<BoolExpr>, Box<IntExpr>, Box<IntExpr>),
    /// Floor division by a positive constant; removed before inference.
    FloorDiv(Box<IntExpr>, i64),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoolExpr {
    True,
    False,
    Cmp(Box<IntExpr>, CmpOp, Box<IntExpr>),
    /// `n | e`
    Divides(i64, Box<IntExpr>),
    /// `n ∤ e`
    NotDivides(i64, Box<IntExpr>),
    /// Identity of two array variables, e.g. `qa == a`.
    ArrEq(String, String),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
    Not(Box<BoolExpr>),
    /// Pointwise comparison of permission amounts; only appears in loop
    /// soundness conditions.
    PermCmp(Box<PermExpr>, CmpOp, Box<PermExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PermExpr {
    Frac(BigRational),
    Rd,
    Add(Box<PermExpr>, Box<PermExpr>),
    Sub(Box<PermExpr>, Box<PermExpr>),
    Min(Box<PermExpr>, Box<PermExpr>),
    Max(Box<PermExpr>, Box<PermExpr>),
    Ite(Box<BoolExpr>, Box<PermExpr>, Box<PermExpr>),
    /// `max_{x̄ | guard}(body)`; the maximum over an empty range is 0.
    PointwiseMax(Vec<String>, Box<BoolExpr>, Box<PermExpr>),
}

/// Exact permission amount `c + k·rd`, where `rd` is positive and smaller
/// than every positive rational.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PermValue {
    pub c: BigRational,
    pub k: i64,
}

impl PermValue {
    pub fn zero() -> Self {
        PermValue { c: BigRational::zero(), k: 0 }
    }

    pub fn one() -> Self {
        PermValue { c: BigRational::one(), k: 0 }
    }

    pub fn rd() -> Self {
        PermValue { c: BigRational::zero(), k: 1 }
    }

    pub fn frac(n: i64, d: i64) -> Self {
        PermValue { c: rational(n, d), k: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero() && self.k == 0
    }

    pub fn is_positive(&self) -> bool {
        *self > PermValue::zero()
    }

    /// Replace `rd` by a concrete rational.
    pub fn concretize(&self, rd: &BigRational) -> BigRational {
        &self.c + rd * BigRational::from_integer(BigInt::from(self.k))
    }
}

impl Add for PermValue {
    type Output = PermValue;
    fn add(self, o: PermValue) -> PermValue {
        PermValue { c: self.c + o.c, k: self.k + o.k }
    }
}

impl Sub for PermValue {
    type Output = PermValue;
    fn sub(self, o: PermValue) -> PermValue {
        PermValue { c: self.c - o.c, k: self.k - o.k }
    }
}

impl Neg for PermValue {
    type Output = PermValue;
    fn neg(self) -> PermValue {
        PermValue { c: -self.c, k: -self.k }
    }
}

impl fmt::Display for PermValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&PermExpr::from_value(self), f)
    }
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn lcm(a: i64, b: i64) -> i64 {
    num_integer::lcm(a, b)
}

impl IntExpr {
    pub fn var(x: &str) -> IntExpr {
        IntExpr::Var(x.to_string())
    }

    pub fn lookup(a: &str, e: IntExpr) -> IntExpr {
        IntExpr::Lookup(a.to_string(), Box::new(e))
    }

    pub fn length(a: &str) -> IntExpr {
        IntExpr::Length(a.to_string())
    }

    pub fn mul(n: i64, e: IntExpr) -> IntExpr {
        IntExpr::Mul(n, Box::new(e))
    }

    pub fn ite(b: BoolExpr, e1: IntExpr, e2: IntExpr) -> IntExpr {
        IntExpr::Ite(Box::new(b), Box::new(e1), Box::new(e2))
    }

    pub fn floor_div(e: IntExpr, n: i64) -> IntExpr {
        IntExpr::FloorDiv(Box::new(e), n)
    }

    pub fn cmp(self, op: CmpOp, other: IntExpr) -> BoolExpr {
        BoolExpr::Cmp(Box::new(self), op, Box::new(other))
    }

    pub fn eq(self, other: IntExpr) -> BoolExpr {
        self.cmp(CmpOp::Eq, other)
    }

    pub fn le(self, other: IntExpr) -> BoolExpr {
        self.cmp(CmpOp::Le, other)
    }

    pub fn lt(self, other: IntExpr) -> BoolExpr {
        self.cmp(CmpOp::Lt, other)
    }

    pub fn ge(self, other: IntExpr) -> BoolExpr {
        self.cmp(CmpOp::Ge, other)
    }

    pub fn gt(self, other: IntExpr) -> BoolExpr {
        self.cmp(CmpOp::Gt, other)
    }

    pub fn ne(self, other: IntExpr) -> BoolExpr {
        self.cmp(CmpOp::Ne, other)
    }

    pub fn as_const(&self) -> Option<i64> {
        match self {
            IntExpr::Const(n) => Some(*n),
            _ => None,
        }
    }

    /// Whether the expression reads the heap.
    pub fn has_lookup(&self) -> bool {
        match self {
            IntExpr::Const(_) | IntExpr::Var(_) | IntExpr::Length(_) => false,
            IntExpr::Lookup(..) => true,
            IntExpr::Mul(_, e) | IntExpr::FloorDiv(e, _) => e.has_lookup(),
            IntExpr::Add(a, b) | IntExpr::Sub(a, b) => a.has_lookup() || b.has_lookup(),
            IntExpr::Ite(c, a, b) => c.has_lookup() || a.has_lookup() || b.has_lookup(),
        }
    }

    pub fn has_floor_div(&self) -> bool {
        match self {
            IntExpr::Const(_) | IntExpr::Var(_) | IntExpr::Length(_) => false,
            IntExpr::FloorDiv(..) => true,
            IntExpr::Mul(_, e) | IntExpr::Lookup(_, e) => e.has_floor_div(),
            IntExpr::Add(a, b) | IntExpr::Sub(a, b) => a.has_floor_div() || b.has_floor_div(),
            IntExpr::Ite(c, a, b) => c.has_floor_div() || a.has_floor_div() || b.has_floor_div(),
        }
    }

    /// Every lookup `a'[e']` occurring in the expression, outermost first.
    pub fn collect_lookups(&self, out: &mut Vec<(String, IntExpr)>) {
        match self {
            IntExpr::Const(_) | IntExpr::Var(_) | IntExpr::Length(_) => {}
            IntExpr::Lookup(a, e) => {
                out.push((a.clone(), (**e).clone()));
                e.collect_lookups(out);
            }
            IntExpr::Mul(_, e) | IntExpr::FloorDiv(e, _) => e.collect_lookups(out),
            IntExpr::Add(a, b) | IntExpr::Sub(a, b) => {
                a.collect_lookups(out);
                b.collect_lookups(out);
            }
            IntExpr::Ite(c, a, b) => {
                c.collect_lookups(out);
                a.collect_lookups(out);
                b.collect_lookups(out);
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            IntExpr::Const(_) | IntExpr::Var(_) | IntExpr::Length(_) => 0,
            IntExpr::Mul(_, e) | IntExpr::FloorDiv(e, _) | IntExpr::Lookup(_, e) => e.size(),
            IntExpr::Add(a, b) | IntExpr::Sub(a, b) => a.size() + b.size(),
            IntExpr::Ite(c, a, b) => c.size() + a.size() + b.size(),
        }
    }
}

impl Add for IntExpr {
    type Output = IntExpr;
    fn add(self, o: IntExpr) -> IntExpr {
        IntExpr::Add(Box::new(self), Box::new(o))
    }
}

impl Sub for IntExpr {
    type Output = IntExpr;
    fn sub(self, o: IntExpr) -> IntExpr {
        IntExpr::Sub(Box::new(self), Box::new(o))
    }
}

impl From<i64> for IntExpr {
    fn from(n: i64) -> IntExpr {
        IntExpr::Const(n)
    }
}

impl BoolExpr {
    pub fn and(parts: Vec<BoolExpr>) -> BoolExpr {
        match parts.len() {
            0 => BoolExpr::True,
            1 => parts.into_iter().next().unwrap(),
            _ => BoolExpr::And(parts),
        }
    }

    pub fn or(parts: Vec<BoolExpr>) -> BoolExpr {
        match parts.len() {
            0 => BoolExpr::False,
            1 => parts.into_iter().next().unwrap(),
            _ => BoolExpr::Or(parts),
        }
    }

    pub fn and2(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::And(vec![a, b])
    }

    pub fn or2(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::Or(vec![a, b])
    }

    pub fn not(b: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(b))
    }

    pub fn divides(n: i64, e: IntExpr) -> BoolExpr {
        BoolExpr::Divides(n, Box::new(e))
    }

    pub fn not_divides(n: i64, e: IntExpr) -> BoolExpr {
        BoolExpr::NotDivides(n, Box::new(e))
    }

    pub fn arr_eq(a: &str, b: &str) -> BoolExpr {
        BoolExpr::ArrEq(a.to_string(), b.to_string())
    }

    pub fn perm_cmp(p1: PermExpr, op: CmpOp, p2: PermExpr) -> BoolExpr {
        BoolExpr::PermCmp(Box::new(p1), op, Box::new(p2))
    }

    /// `ite(b0, b1, b2)` encoded as `(¬b0 ∨ b1) ∧ (b0 ∨ b2)`.
    pub fn ite(b0: BoolExpr, b1: BoolExpr, b2: BoolExpr) -> BoolExpr {
        BoolExpr::and2(BoolExpr::or2(BoolExpr::not(b0.clone()), b1), BoolExpr::or2(b0, b2))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, BoolExpr::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, BoolExpr::False)
    }

    pub fn has_lookup(&self) -> bool {
        match self {
            BoolExpr::True | BoolExpr::False | BoolExpr::ArrEq(..) => false,
            BoolExpr::Cmp(a, _, b) => a.has_lookup() || b.has_lookup(),
            BoolExpr::Divides(_, e) | BoolExpr::NotDivides(_, e) => e.has_lookup(),
            BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().any(|b| b.has_lookup()),
            BoolExpr::Not(b) => b.has_lookup(),
            BoolExpr::PermCmp(p, _, q) => p.has_lookup() || q.has_lookup(),
        }
    }

    pub fn has_floor_div(&self) -> bool {
        match self {
            BoolExpr::True | BoolExpr::False | BoolExpr::ArrEq(..) => false,
            BoolExpr::Cmp(a, _, b) => a.has_floor_div() || b.has_floor_div(),
            BoolExpr::Divides(_, e) | BoolExpr::NotDivides(_, e) => e.has_floor_div(),
            BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().any(|b| b.has_floor_div()),
            BoolExpr::Not(b) => b.has_floor_div(),
            BoolExpr::PermCmp(..) => false,
        }
    }

    pub fn collect_lookups(&self, out: &mut Vec<(String, IntExpr)>) {
        match self {
            BoolExpr::True | BoolExpr::False | BoolExpr::ArrEq(..) => {}
            BoolExpr::Cmp(a, _, b) => {
                a.collect_lookups(out);
                b.collect_lookups(out);
            }
            BoolExpr::Divides(_, e) | BoolExpr::NotDivides(_, e) => e.collect_lookups(out),
            BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().for_each(|b| b.collect_lookups(out)),
            BoolExpr::Not(b) => b.collect_lookups(out),
            BoolExpr::PermCmp(p, _, q) => {
                p.collect_lookups(out);
                q.collect_lookups(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        1 + match self {
            BoolExpr::True | BoolExpr::False | BoolExpr::ArrEq(..) => 0,
            BoolExpr::Cmp(a, _, b) => a.size() + b.size(),
            BoolExpr::Divides(_, e) | BoolExpr::NotDivides(_, e) => e.size(),
            BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().map(|b| b.size()).sum(),
            BoolExpr::Not(b) => b.size(),
            BoolExpr::PermCmp(p, _, q) => p.size() + q.size(),
        }
    }
}

impl PermExpr {
    pub fn zero() -> PermExpr {
        PermExpr::Frac(BigRational::zero())
    }

    pub fn one() -> PermExpr {
        PermExpr::Frac(BigRational::one())
    }

    pub fn frac(n: i64, d: i64) -> PermExpr {
        PermExpr::Frac(rational(n, d))
    }

    pub fn ite(b: BoolExpr, p1: PermExpr, p2: PermExpr) -> PermExpr {
        PermExpr::Ite(Box::new(b), Box::new(p1), Box::new(p2))
    }

    /// `ite(b, p, 0)`
    pub fn leaf(b: BoolExpr, p: PermExpr) -> PermExpr {
        PermExpr::ite(b, p, PermExpr::zero())
    }

    pub fn max(p1: PermExpr, p2: PermExpr) -> PermExpr {
        PermExpr::Max(Box::new(p1), Box::new(p2))
    }

    pub fn min(p1: PermExpr, p2: PermExpr) -> PermExpr {
        PermExpr::Min(Box::new(p1), Box::new(p2))
    }

    pub fn pointwise_max(vars: Vec<String>, guard: BoolExpr, body: PermExpr) -> PermExpr {
        PermExpr::PointwiseMax(vars, Box::new(guard), Box::new(body))
    }

    /// `perm(a, e, p) = ite(qa = a ∧ qi = e, p, 0)`: `p` permission to `a[e]`.
    pub fn perm(a: &str, e: IntExpr, p: PermExpr) -> PermExpr {
        PermExpr::leaf(BoolExpr::and2(BoolExpr::arr_eq(QA, a), IntExpr::var(QI).eq(e)), p)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PermExpr::Frac(q) if q.is_zero())
    }

    /// Value of a closed expression built from constants, `+` and `-`.
    pub fn const_value(&self) -> Option<PermValue> {
        match self {
            PermExpr::Frac(q) => Some(PermValue { c: q.clone(), k: 0 }),
            PermExpr::Rd => Some(PermValue::rd()),
            PermExpr::Add(a, b) => Some(a.const_value()? + b.const_value()?),
            PermExpr::Sub(a, b) => Some(a.const_value()? - b.const_value()?),
            PermExpr::Max(a, b) => Some(a.const_value()?.max(b.const_value()?)),
            PermExpr::Min(a, b) => Some(a.const_value()?.min(b.const_value()?)),
            _ => None,
        }
    }

    /// Canonical expression denoting a constant value.
    pub fn from_value(v: &PermValue) -> PermExpr {
        let rd_term = |k: i64| {
            let mut t = PermExpr::Rd;
            for _ in 1..k {
                t = t + PermExpr::Rd;
            }
            t
        };
        if v.k == 0 {
            if v.c.is_negative() {
                return PermExpr::zero() - PermExpr::Frac(-v.c.clone());
            }
            return PermExpr::Frac(v.c.clone());
        }
        let c = PermExpr::Frac(v.c.abs());
        let k = v.k.abs();
        match (v.c.is_zero(), v.c.is_negative(), v.k > 0) {
            (true, _, true) => rd_term(k),
            (true, _, false) => PermExpr::zero() - rd_term(k),
            (false, false, true) => c + rd_term(k),
            (false, false, false) => c - rd_term(k),
            (false, true, true) => rd_term(k) - c,
            (false, true, false) => PermExpr::zero() - c - rd_term(k),
        }
    }

    pub fn has_lookup(&self) -> bool {
        match self {
            PermExpr::Frac(_) | PermExpr::Rd => false,
            PermExpr::Add(a, b) | PermExpr::Sub(a, b) | PermExpr::Min(a, b) | PermExpr::Max(a, b) => {
                a.has_lookup() || b.has_lookup()
            }
            PermExpr::Ite(c, a, b) => c.has_lookup() || a.has_lookup() || b.has_lookup(),
            PermExpr::PointwiseMax(_, g, b) => g.has_lookup() || b.has_lookup(),
        }
    }

    pub fn has_pointwise_max(&self) -> bool {
        match self {
            PermExpr::Frac(_) | PermExpr::Rd => false,
            PermExpr::Add(a, b) | PermExpr::Sub(a, b) | PermExpr::Min(a, b) | PermExpr::Max(a, b) => {
                a.has_pointwise_max() || b.has_pointwise_max()
            }
            PermExpr::Ite(_, a, b) => a.has_pointwise_max() || b.has_pointwise_max(),
            PermExpr::PointwiseMax(..) => true,
        }
    }

    pub fn collect_lookups(&self, out: &mut Vec<(String, IntExpr)>) {
        match self {
            PermExpr::Frac(_) | PermExpr::Rd => {}
            PermExpr::Add(a, b) | PermExpr::Sub(a, b) | PermExpr::Min(a, b) | PermExpr::Max(a, b) => {
                a.collect_lookups(out);
                b.collect_lookups(out);
            }
            PermExpr::Ite(c, a, b) => {
                c.collect_lookups(out);
                a.collect_lookups(out);
                b.collect_lookups(out);
            }
            PermExpr::PointwiseMax(_, g, b) => {
                g.collect_lookups(out);
                b.collect_lookups(out);
            }
        }
    }

    /// Number of nodes, counting nested boolean and integer nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            PermExpr::Frac(_) | PermExpr::Rd => 0,
            PermExpr::Add(a, b) | PermExpr::Sub(a, b) | PermExpr::Min(a, b) | PermExpr::Max(a, b) => {
                a.size() + b.size()
            }
            PermExpr::Ite(c, a, b) => c.size() + a.size() + b.size(),
            PermExpr::PointwiseMax(_, g, b) => g.size() + b.size(),
        }
    }

    /// Replace `rd` by a concrete rational constant.
    pub fn concretize_rd(&self, rd: &BigRational) -> PermExpr {
        match self {
            PermExpr::Rd => PermExpr::Frac(rd.clone()),
            PermExpr::Frac(_) => self.clone(),
            PermExpr::Add(a, b) => a.concretize_rd(rd) + b.concretize_rd(rd),
            PermExpr::Sub(a, b) => a.concretize_rd(rd) - b.concretize_rd(rd),
            PermExpr::Min(a, b) => PermExpr::min(a.concretize_rd(rd), b.concretize_rd(rd)),
            PermExpr::Max(a, b) => PermExpr::max(a.concretize_rd(rd), b.concretize_rd(rd)),
            PermExpr::Ite(c, a, b) => PermExpr::ite((**c).clone(), a.concretize_rd(rd), b.concretize_rd(rd)),
            PermExpr::PointwiseMax(v, g, b) => PermExpr::pointwise_max(v.clone(), (**g).clone(), b.concretize_rd(rd)),
        }
    }
}

impl Add for PermExpr {
    type Output = PermExpr;
    fn add(self, o: PermExpr) -> PermExpr {
        PermExpr::Add(Box::new(self), Box::new(o))
    }
}

impl Sub for PermExpr {
    type Output = PermExpr;
    fn sub(self, o: PermExpr) -> PermExpr {
        PermExpr::Sub(Box::new(self), Box::new(o))
    }
}

/// Free integer variables of an expression.
pub trait FreeVars {
    fn free_vars_into(&self, out: &mut BTreeSet<String>);

    fn free_vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.free_vars_into(&mut s);
        s
    }

    fn mentions(&self, x: &str) -> bool {
        self.free_vars().contains(x)
    }
}

impl FreeVars for IntExpr {
    fn free_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            IntExpr::Const(_) | IntExpr::Length(_) => {}
            IntExpr::Var(x) => {
                out.insert(x.clone());
            }
            IntExpr::Mul(_, e) | IntExpr::FloorDiv(e, _) | IntExpr::Lookup(_, e) => e.free_vars_into(out),
            IntExpr::Add(a, b) | IntExpr::Sub(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            IntExpr::Ite(c, a, b) => {
                c.free_vars_into(out);
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
        }
    }
}

impl FreeVars for BoolExpr {
    fn free_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            BoolExpr::True | BoolExpr::False | BoolExpr::ArrEq(..) => {}
            BoolExpr::Cmp(a, _, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            BoolExpr::Divides(_, e) | BoolExpr::NotDivides(_, e) => e.free_vars_into(out),
            BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().for_each(|b| b.free_vars_into(out)),
            BoolExpr::Not(b) => b.free_vars_into(out),
            BoolExpr::PermCmp(p, _, q) => {
                p.free_vars_into(out);
                q.free_vars_into(out);
            }
        }
    }
}

impl FreeVars for PermExpr {
    fn free_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            PermExpr::Frac(_) | PermExpr::Rd => {}
            PermExpr::Add(a, b) | PermExpr::Sub(a, b) | PermExpr::Min(a, b) | PermExpr::Max(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            PermExpr::Ite(c, a, b) => {
                c.free_vars_into(out);
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            PermExpr::PointwiseMax(vars, g, b) => {
                let mut inner = BTreeSet::new();
                g.free_vars_into(&mut inner);
                b.free_vars_into(&mut inner);
                for v in vars {
                    inner.remove(v);
                }
                out.extend(inner);
            }
        }
    }
}

/// Array variables mentioned by an expression (including `qa`).
pub trait ArrayVars {
    fn array_vars_into(&self, out: &mut BTreeSet<String>);

    fn array_vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.array_vars_into(&mut s);
        s
    }
}

impl ArrayVars for IntExpr {
    fn array_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            IntExpr::Const(_) | IntExpr::Var(_) => {}
            IntExpr::Length(a) => {
                out.insert(a.clone());
            }
            IntExpr::Lookup(a, e) => {
                out.insert(a.clone());
                e.array_vars_into(out);
            }
            IntExpr::Mul(_, e) | IntExpr::FloorDiv(e, _) => e.array_vars_into(out),
            IntExpr::Add(a, b) | IntExpr::Sub(a, b) => {
                a.array_vars_into(out);
                b.array_vars_into(out);
            }
            IntExpr::Ite(c, a, b) => {
                c.array_vars_into(out);
                a.array_vars_into(out);
                b.array_vars_into(out);
            }
        }
    }
}

impl ArrayVars for BoolExpr {
    fn array_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::ArrEq(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            BoolExpr::Cmp(a, _, b) => {
                a.array_vars_into(out);
                b.array_vars_into(out);
            }
            BoolExpr::Divides(_, e) | BoolExpr::NotDivides(_, e) => e.array_vars_into(out),
            BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().for_each(|b| b.array_vars_into(out)),
            BoolExpr::Not(b) => b.array_vars_into(out),
            BoolExpr::PermCmp(p, _, q) => {
                p.array_vars_into(out);
                q.array_vars_into(out);
            }
        }
    }
}

impl ArrayVars for PermExpr {
    fn array_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            PermExpr::Frac(_) | PermExpr::Rd => {}
            PermExpr::Add(a, b) | PermExpr::Sub(a, b) | PermExpr::Min(a, b) | PermExpr::Max(a, b) => {
                a.array_vars_into(out);
                b.array_vars_into(out);
            }
            PermExpr::Ite(c, a, b) => {
                c.array_vars_into(out);
                a.array_vars_into(out);
                b.array_vars_into(out);
            }
            PermExpr::PointwiseMax(_, g, b) => {
                g.array_vars_into(out);
                b.array_vars_into(out);
            }
        }
    }
}

/// A name based on `base` that is not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
    let stem = if stem.is_empty() { "v" } else { stem };
    (0..).map(|i| format!("{stem}_{i}")).find(|n| !avoid.contains(n)).unwrap()
}
