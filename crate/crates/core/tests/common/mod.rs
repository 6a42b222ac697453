//! Random expressions and states shared by the property suites.
#![allow(dead_code)]

use permax::expr::{BoolExpr, CmpOp, Env, Heap, IntExpr, PermExpr, QA, QI};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INT_VARS: &[&str] = &["x", "y", "z", QI];
pub const ARRAYS: &[&str] = &["a", "b"];

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub lookups: bool,
    pub depth: u32,
}

pub fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![Just(CmpOp::Eq), Just(CmpOp::Ne), Just(CmpOp::Lt), Just(CmpOp::Le), Just(CmpOp::Gt), Just(CmpOp::Ge)]
}

fn var() -> impl Strategy<Value = IntExpr> {
    prop::sample::select(INT_VARS).prop_map(IntExpr::var)
}

fn array() -> impl Strategy<Value = String> {
    prop::sample::select(ARRAYS).prop_map(|s| s.to_string())
}

pub fn int_expr(shape: Shape) -> BoxedStrategy<IntExpr> {
    let leaf = prop_oneof![
        3 => (-3i64..=3).prop_map(IntExpr::Const),
        4 => var(),
        1 => array().prop_map(IntExpr::Length),
    ];
    let lookups = shape.lookups;
    leaf.prop_recursive(shape.depth, 24, 2, move |inner| {
        let mut options: Vec<(u32, BoxedStrategy<IntExpr>)> = vec![
            (2, ((-2i64..=3), inner.clone()).prop_map(|(n, e)| IntExpr::mul(n, e)).boxed()),
            (3, (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b).boxed()),
            (2, (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b).boxed()),
        ];
        if lookups {
            options.push((1, (array(), inner.clone()).prop_map(|(a, e)| IntExpr::lookup(&a, e)).boxed()));
        }
        prop::strategy::Union::new_weighted(options)
    })
    .boxed()
}

pub fn literal(shape: Shape) -> BoxedStrategy<BoolExpr> {
    let e = int_expr(Shape { depth: shape.depth.min(2), ..shape });
    prop_oneof![
        5 => (e.clone(), cmp_op(), e.clone()).prop_map(|(a, op, b)| a.cmp(op, b)),
        1 => ((1i64..=4), e.clone()).prop_map(|(n, e)| BoolExpr::divides(n, e)),
        1 => ((1i64..=4), e).prop_map(|(n, e)| BoolExpr::not_divides(n, e)),
        1 => array().prop_map(|a| BoolExpr::arr_eq(QA, &a)),
    ]
    .boxed()
}

pub fn bool_expr(shape: Shape) -> BoxedStrategy<BoolExpr> {
    let leaf = prop_oneof![
        1 => Just(BoolExpr::True),
        1 => Just(BoolExpr::False),
        8 => literal(shape),
    ];
    leaf.prop_recursive(shape.depth, 16, 3, |inner| {
        prop_oneof![
            2 => prop::collection::vec(inner.clone(), 2..4).prop_map(BoolExpr::And),
            2 => prop::collection::vec(inner.clone(), 2..4).prop_map(BoolExpr::Or),
            1 => inner.prop_map(BoolExpr::not),
        ]
    })
    .boxed()
}

pub fn perm_literal() -> BoxedStrategy<PermExpr> {
    prop_oneof![
        4 => ((0i64..=4), (1i64..=4)).prop_map(|(n, d)| PermExpr::frac(n, d)),
        1 => Just(PermExpr::Rd),
    ]
    .boxed()
}

pub fn perm_expr(shape: Shape) -> BoxedStrategy<PermExpr> {
    let guard = bool_expr(Shape { depth: 2, ..shape });
    perm_literal()
        .prop_recursive(shape.depth, 32, 2, move |inner| {
            prop_oneof![
                2 => (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| PermExpr::max(a, b)),
                1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| PermExpr::min(a, b)),
                4 => (guard.clone(), inner.clone(), inner.clone()).prop_map(|(c, a, b)| PermExpr::ite(c, a, b)),
            ]
        })
        .boxed()
}

/// A random state over the variables used by the generators. Arrays `a`,
/// `b` and `qa` each denote one of three objects, so aliasing occurs.
pub fn random_state(rng: &mut impl Rng) -> (Env, Heap) {
    let mut env = Env::new();
    for v in INT_VARS {
        env = env.with_int(v, rng.gen_range(-5..=5));
    }
    for a in ARRAYS.iter().chain([&QA]) {
        env = env.with_array(a, rng.gen_range(0..3));
    }
    let mut heap = Heap::new();
    for id in 0..3u32 {
        let len = rng.gen_range(0..5);
        heap = heap.with_array(id, (0..len).map(|_| rng.gen_range(-3..=3)).collect());
    }
    (env, heap)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random simple maxima over `x`: linear literals with coefficients of
/// magnitude at most 3, at most two divisibility literals, depth at most 4.
pub struct SimpleGen {
    divisibility: u32,
}

impl SimpleGen {
    pub fn pair(rng: &mut impl Rng) -> (BoolExpr, PermExpr) {
        let mut g = SimpleGen { divisibility: 2 };
        let b = g.bool_expr(rng, 2);
        let p = g.perm_expr(rng, 2, false);
        (b, p)
    }

    fn rest(&self, rng: &mut impl Rng) -> IntExpr {
        let mut e = IntExpr::Const(rng.gen_range(-4..=4));
        for v in ["y", QI] {
            if rng.gen_bool(0.4) {
                e = e + IntExpr::mul(rng.gen_range(-2..=2), IntExpr::var(v));
            }
        }
        e
    }

    fn x_term(&self, rng: &mut impl Rng) -> IntExpr {
        let c = [-3, -2, -1, 1, 1, 1, 2, 3][rng.gen_range(0..8)];
        if c == 1 {
            IntExpr::var("x")
        } else {
            IntExpr::mul(c, IntExpr::var("x"))
        }
    }

    fn literal(&mut self, rng: &mut impl Rng) -> BoolExpr {
        let ops = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
        match rng.gen_range(0..10) {
            0..=5 => {
                let op = ops[rng.gen_range(0..6)];
                (self.x_term(rng) + self.rest(rng)).cmp(op, self.rest(rng))
            }
            6 | 7 if self.divisibility > 0 => {
                self.divisibility -= 1;
                let n = rng.gen_range(2..=3);
                let e = self.x_term(rng) + IntExpr::Const(rng.gen_range(0..3));
                if rng.gen_bool(0.5) {
                    BoolExpr::divides(n, e)
                } else {
                    BoolExpr::not_divides(n, e)
                }
            }
            8 => BoolExpr::arr_eq(QA, ARRAYS[rng.gen_range(0..2)]),
            _ => IntExpr::var(["y", "z", QI][rng.gen_range(0..3)]).cmp(ops[rng.gen_range(0..6)], self.rest(rng)),
        }
    }

    fn bool_expr(&mut self, rng: &mut impl Rng, depth: u32) -> BoolExpr {
        if depth == 0 || rng.gen_bool(0.35) {
            return self.literal(rng);
        }
        let parts = (0..rng.gen_range(2..=3)).map(|_| self.bool_expr(rng, depth - 1)).collect();
        if rng.gen_bool(0.5) {
            BoolExpr::And(parts)
        } else {
            BoolExpr::Or(parts)
        }
    }

    fn constant(&self, rng: &mut impl Rng) -> PermExpr {
        [PermExpr::one(), PermExpr::frac(1, 2), PermExpr::frac(1, 3), PermExpr::Rd][rng.gen_range(0..4)].clone()
    }

    fn leaf(&mut self, rng: &mut impl Rng) -> PermExpr {
        let b = self.bool_expr(rng, 1);
        PermExpr::leaf(b, self.constant(rng))
    }

    /// Subtractions never occur beneath an addition.
    fn perm_expr(&mut self, rng: &mut impl Rng, depth: u32, under_add: bool) -> PermExpr {
        if depth == 0 || rng.gen_bool(0.3) {
            return self.leaf(rng);
        }
        match rng.gen_range(0..if under_add { 3 } else { 4 }) {
            0 => self.perm_expr(rng, depth - 1, true) + self.perm_expr(rng, depth - 1, true),
            1 => PermExpr::max(self.perm_expr(rng, depth - 1, under_add), self.perm_expr(rng, depth - 1, under_add)),
            2 => PermExpr::min(self.perm_expr(rng, depth - 1, under_add), self.perm_expr(rng, depth - 1, under_add)),
            _ => self.perm_expr(rng, depth - 1, false) - self.leaf(rng),
        }
    }
}
pub mod programs;
