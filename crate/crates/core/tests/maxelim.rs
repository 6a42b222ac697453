mod common;

use common::{bool_expr, perm_expr, random_state, rng, Shape, SimpleGen};
use permax::expr::{eval_bool, eval_perm, BoolExpr, Env, FreeVars, Heap, IntExpr, PermExpr, PermValue};
use permax::frontend::{parse_bool_expr, parse_perm_expr};
use permax::maxelim::{
    eliminate, eliminate_var, leftinf_bool, leftinf_perm, mini_bool, minimax, minimax_pair, to_simple, ElimConfig,
};
use permax::oracle::{bounded_max, OracleError};
use permax::simplify::{is_nonneg, simplify_bool, simplify_perm};
use proptest::prelude::*;

fn b(s: &str) -> BoolExpr {
    parse_bool_expr(s, &["a"]).unwrap()
}

fn p(s: &str) -> PermExpr {
    parse_perm_expr(s, &["a"]).unwrap()
}

fn max_x(g: &str, body: &str) -> PermExpr {
    PermExpr::pointwise_max(vec!["x".into()], b(g), p(body))
}

fn elim(m: &PermExpr) -> PermExpr {
    eliminate(m, &ElimConfig::default()).unwrap().expr
}

#[test]
fn single_point_maximum() {
    let out = elim(&max_x("x >= 0", "ite(x == i, 1, 0)"));
    assert_eq!(out, simplify_perm(&p("ite(i >= 0, 1, 0)")));
}

#[test]
fn filtered_boundaries_of_single_point() {
    let t = minimax_pair(&p("ite(x == i, 1, 0)"), &b("x >= 0"), "x", 64).unwrap();
    assert_eq!(t.delta, 1);
    assert_eq!(t.entries, vec![(IntExpr::var("i"), BoolExpr::True), (IntExpr::Const(0), simplify_bool(&b("i < 0")))]);
}

#[test]
fn boundaries_of_guards() {
    let s = mini_bool(&b("x != 4 && 3 | x"), "x").unwrap();
    assert_eq!(s.delta, 3);
    assert_eq!(s.entries, vec![(IntExpr::Const(5), BoolExpr::True)]);
    let points: Vec<IntExpr> = s.candidates().into_iter().map(|(e, _)| e).collect();
    assert_eq!(points, vec![IntExpr::Const(5), IntExpr::Const(6), IntExpr::Const(7)]);

    let ge = mini_bool(&b("x >= y"), "x").unwrap();
    assert_eq!((ge.entries.len(), ge.delta), (1, 1));
    assert_eq!(ge.entries[0].0, IntExpr::var("y"));
    assert!(mini_bool(&b("x < y"), "x").unwrap().entries.is_empty());
}

#[test]
fn left_infinite_projections() {
    assert_eq!(leftinf_bool(&b("x < y"), "x").unwrap(), (BoolExpr::True, 1));
    assert_eq!(
        leftinf_bool(&b("x >= y || x == 3"), "x").unwrap().0,
        BoolExpr::Or(vec![BoolExpr::False, BoolExpr::False])
    );
    let div = b("2 | x + y");
    assert_eq!(leftinf_bool(&div, "x").unwrap(), (div.clone(), 2));
    let (q, d) = leftinf_perm(&p("ite(qa == a && qi == j, rd, 0)"), "j").unwrap();
    assert_eq!((simplify_perm(&q), d), (PermExpr::zero(), 1));
}

#[test]
fn subtraction_filters_boundaries() {
    let t = minimax(&p("ite(x >= 0, 1, 0) - ite(x > 3, 1/2, 0)"), "x", 64).unwrap();
    // x ≥ 0 contributes 0; ¬(x > 3) has no lower boundary.
    assert_eq!(t.entries, vec![(IntExpr::Const(0), BoolExpr::True)]);
    let t = minimax(&p("ite(x >= 0, 1, 0) - ite(x < 3, 1/2, 0)"), "x", 64).unwrap();
    assert_eq!(t.entries.len(), 2);
    assert_eq!(t.entries[1].0, IntExpr::Const(3));
    assert_eq!(t.entries[1].1, simplify_bool(&b("x >= 0")));
}

#[test]
fn empty_range_is_zero() {
    assert_eq!(elim(&max_x("false", "1")), PermExpr::zero());
    assert_eq!(elim(&max_x("x > 3 && x < 2", "ite(x == i, 1, 0)")), PermExpr::zero());
}

#[test]
fn maxima_of_maxima_split() {
    let body = p("max(ite(x == i, 1, 0), ite(x == j, rd, 0))");
    let tree = to_simple("x", &b("x >= 0"), &body).unwrap();
    let leaves = tree.leaves();
    assert_eq!(leaves.len(), 2);
    assert_eq!(leaves[0].body, simplify_perm(&p("ite(x == i, 1, 0)")));
    assert_eq!(leaves[1].body, simplify_perm(&p("ite(x == j, rd, 0)")));
}

fn copy_even_projection() -> PermExpr {
    PermExpr::pointwise_max(
        vec!["j".into()],
        b("0 <= j && j < length(a)"),
        p("ite(j % 2 == 0, ite(qa == a && qi == j, rd, 0), ite(qa == a && qi == j, 1, 0))"),
    )
}

#[test]
fn copy_even_splits_on_parity() {
    let PermExpr::PointwiseMax(_, g, body) = copy_even_projection() else { unreachable!() };
    let tree = to_simple("j", &g, &body).unwrap();
    let leaves = tree.leaves();
    assert_eq!(leaves.len(), 2);
    assert_eq!(leaves[0].guard, simplify_bool(&b("0 <= j && j < length(a) && j % 2 == 0")));
    assert_eq!(leaves[1].guard, simplify_bool(&b("0 <= j && j < length(a) && j % 2 != 0")));
}

#[test]
fn copy_even_full_elimination() {
    let m = copy_even_projection();
    let out = elim(&m);
    assert!(!out.has_pointwise_max());
    let expected = p("ite(qa == a && 0 <= qi && qi < length(a), ite(qi % 2 == 0, rd, 1), 0)");
    for len in 0..6 {
        let heap = Heap::new().with_array(0, vec![0; len]).with_array(1, vec![0; 3]);
        for qa in 0..2 {
            for qi in -3..8 {
                let env = Env::new().with_array("a", 0).at_location(qa, qi);
                let got = eval_perm(&out, &env, &heap).unwrap();
                assert_eq!(got, eval_perm(&expected, &env, &heap).unwrap(), "{out} at qa={qa} qi={qi} len={len}");
                assert_eq!(got, bounded_max(&m, &env, &heap).unwrap());
            }
        }
    }
}

#[test]
fn coefficients_are_normalised() {
    // 2x = i has a solution only for even i.
    let m = max_x("2 * x == i", "1");
    let out = elim(&m);
    for i in -6..6 {
        let env = Env::new().with_int("i", i);
        let want = if i % 2 == 0 { PermValue::one() } else { PermValue::zero() };
        assert_eq!(eval_perm(&out, &env, &Heap::new()).unwrap(), want, "{out} at i = {i}");
    }
}

#[test]
fn vectors_of_variables() {
    let m = PermExpr::pointwise_max(
        vec!["x".into(), "y".into()],
        b("0 <= x && x < 2 && 0 <= y && y < 3"),
        p("ite(qi == y + 3 * x, 1/2, 0)"),
    );
    let out = elim(&m);
    for qi in -2..9 {
        let env = Env::new().with_int("qi", qi);
        assert_eq!(eval_perm(&out, &env, &Heap::new()).unwrap(), bounded_max(&m, &env, &Heap::new()).unwrap());
    }
}

#[test]
fn unverified_bodies_are_reported() {
    let cfg = ElimConfig::default();
    assert!(eliminate(&max_x("x >= 0", "ite(x == i, 1, 0)"), &cfg).unwrap().unverified.is_empty());
    let r = eliminate(&max_x("x >= 0", "ite(x == i, 1, 0) - ite(x == j, 1/2, 0)"), &cfg).unwrap();
    assert_eq!(r.unverified.len(), 1);
}

#[test]
fn reads_indexed_by_the_bound_variable_are_rejected() {
    let g = b("x >= 0 && a[x] > 0");
    assert!(to_simple("x", &g, &PermExpr::one()).is_err());
    let g = b("x >= 0 && a[i] > 0");
    assert!(to_simple("x", &g, &PermExpr::one()).is_ok());
}

/// `max(0, max_{x|g} p)`, or `None` when the window is too wide.
fn oracle(m: &PermExpr, env: &Env, heap: &Heap) -> Option<PermValue> {
    match bounded_max(m, env, heap) {
        Ok(v) => Some(v.max(PermValue::zero())),
        Err(OracleError::WindowTooLarge { .. }) => None,
        Err(e) => panic!("oracle failed on {m}: {e}"),
    }
}

fn check_against_oracle(g: BoolExpr, body: PermExpr, seed: u64) -> Result<(), TestCaseError> {
    let m = PermExpr::pointwise_max(vec!["x".into()], g, body);
    let out = elim(&m);
    prop_assert!(!out.has_pointwise_max());
    prop_assert!(!out.mentions("x"), "{}", out);
    let mut r = rng(seed);
    for _ in 0..20 {
        let (env, heap) = random_state(&mut r);
        let Some(want) = oracle(&m, &env, &heap) else { continue };
        prop_assert_eq!(eval_perm(&out, &env, &heap).unwrap(), want, "{} ↦ {}\n{:?}", m, out, env);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn simple_maxima_match_oracle(seed in any::<u64>()) {
        let (g, body) = SimpleGen::pair(&mut rng(seed));
        check_against_oracle(g, body, seed)?;
    }
}

const SHAPE: Shape = Shape { lookups: false, depth: 2 };

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn general_maxima_match_oracle(g in bool_expr(SHAPE), body in perm_expr(SHAPE), seed in any::<u64>()) {
        check_against_oracle(g, body, seed)?;
    }

    #[test]
    fn boundary_sets_cover_maximisers(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (_, body) = SimpleGen::pair(&mut r);
        let tree = to_simple("x", &BoolExpr::True, &body).unwrap();
        for leaf in tree.leaves().into_iter().filter(|l| is_nonneg(&l.body)) {
            let q = &leaf.body;
            let t = minimax(q, "x", 64).unwrap();
            for _ in 0..5 {
                let (env, heap) = random_state(&mut r);
                let at = |n: i64| eval_perm(q, &env.clone().with_int("x", n), &heap).unwrap();
                for n in -25..25 {
                    let hit = t.candidates().iter().any(|(e, f)| {
                        let env = env.clone().with_int("x", n);
                        permax::expr::eval_int(e, &env, &heap).unwrap() == n && eval_bool(f, &env, &heap).unwrap()
                    });
                    prop_assert!(hit || at(n - t.delta) >= at(n) || at(n).is_zero(), "{} at x = {}", q, n);
                }
            }
        }
    }
}

#[test]
fn elimination_with_unit_budget_stays_exact() {
    let mut r = rng(11);
    let cfg = ElimConfig { filter_budget: 1 };
    for _ in 0..200 {
        let (g, body) = SimpleGen::pair(&mut r);
        let m = PermExpr::pointwise_max(vec!["x".into()], g.clone(), body.clone());
        let out = eliminate_var("x", &g, &body, &cfg).unwrap();
        for _ in 0..5 {
            let (env, heap) = random_state(&mut r);
            if let Some(want) = oracle(&m, &env, &heap) {
                assert_eq!(eval_perm(&out, &env, &heap).unwrap(), want, "{m}");
            }
        }
    }
}
