//! The two-iteration soundness condition for loops that exhale.

use super::rules::Analyzer;
use super::{InferConfig, InferError, LoopMeta, Soundness, SoundnessCheck};
use crate::approx::over_perm;
use crate::expr::{BoolExpr, CmpOp, Env, Heap, IntExpr, PermExpr};
use crate::frontend::Stmt;
use crate::oracle::{bounded_validity, OracleError, Validity};

/// The condition for `while b do s` with `step = ⌈wpp(s, 0)⌉`:
///
/// ```text
/// (I ∧ b)[v̄/x̄] ∧ (I ∧ b)[v̄'/x̄] ∧ ⋁ v̄ ≠ v̄'
///     ⟹ max(step[v̄/x̄], step[v̄'/x̄]) ≥ ⌈wpp(s, step[v̄'/x̄])⌉[v̄/x̄]
/// ```
///
/// `qa` and `qi` stay free, so validity is the pointwise claim. When the
/// body modifies no integer variable, a fresh iteration counter stands in
/// for `x̄` (second component of the result).
pub(super) fn condition<'s>(
    an: &mut Analyzer<'s>,
    body: &'s Stmt,
    meta: &LoopMeta,
    cond: &BoolExpr,
    step: &PermExpr,
) -> Result<(BoolExpr, bool), InferError> {
    let mut xs = meta.modified.clone();
    let counter = xs.is_empty();
    if counter {
        xs.push(an.fresh("iter"));
    }
    let v: Vec<String> = xs.iter().map(|x| an.fresh(x)).collect();
    let w: Vec<String> = xs.iter().map(|x| an.fresh(x)).collect();
    let at = |b: &BoolExpr, to: &[String]| xs.iter().zip(to).fold(b.clone(), |b, (x, y)| b.subst(x, &IntExpr::var(y)));
    let at_p =
        |p: &PermExpr, to: &[String]| xs.iter().zip(to).fold(p.clone(), |p, (x, y)| p.subst(x, &IntExpr::var(y)));

    let inv = BoolExpr::and2(meta.over_inv.clone(), cond.clone());
    let distinct = BoolExpr::or(v.iter().zip(&w).map(|(a, b)| IntExpr::var(a).ne(IntExpr::var(b))).collect());
    let hyp = BoolExpr::and(vec![at(&inv, &v), at(&inv, &w), distinct]);

    let second = at_p(step, &w);
    let seq = at_p(&over_perm(&an.wpp(body, &second)?), &v);
    let both = PermExpr::max(at_p(step, &v), second);
    let concl = BoolExpr::perm_cmp(both, CmpOp::Ge, seq);
    Ok((BoolExpr::or2(BoolExpr::not(hyp), concl), counter))
}

/// Decide a maximum-free condition according to the configured mode.
pub(super) fn check(c: &BoolExpr, cfg: &InferConfig) -> Result<Soundness, InferError> {
    let SoundnessCheck::Bounded(vcfg) = &cfg.soundness else {
        return Ok(Soundness::Exported { reason: "bounded checking disabled".into() });
    };
    match bounded_validity(c, vcfg) {
        Ok(Validity::Pass { checked }) => Ok(Soundness::BoundedPass { checked }),
        Ok(Validity::Counterexample { env, heap }) => {
            Ok(Soundness::BoundedCounterexample { detail: describe(&env, &heap) })
        }
        Err(e @ OracleError::Budget { .. }) => Ok(Soundness::Exported { reason: e.to_string() }),
        Err(e) => Err(InferError::Check(e)),
    }
}

/// `x = 1, qa = #0, #0 = [0, 0]`
fn describe(env: &Env, heap: &Heap) -> String {
    let mut parts: Vec<String> = env.ints.iter().map(|(x, v)| format!("{x} = {v}")).collect();
    parts.extend(env.arrays.iter().map(|(a, id)| format!("{a} = #{id}")));
    parts.extend(heap.arrays.iter().map(|(id, v)| format!("#{id} = {v:?}")));
    parts.join(", ")
}
