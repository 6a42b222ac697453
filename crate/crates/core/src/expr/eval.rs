//! Exact evaluation under an environment and a heap.

use super::{ArrayId, BoolExpr, IntExpr, PermExpr, PermValue, QA, QI};
use std::collections::BTreeMap;
use thiserror::Error;

/// Values of integer and array variables, including `qa` and `qi`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    pub ints: BTreeMap<String, i64>,
    pub arrays: BTreeMap<String, ArrayId>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn with_int(mut self, x: &str, v: i64) -> Self {
        self.ints.insert(x.to_string(), v);
        self
    }

    pub fn with_array(mut self, a: &str, id: ArrayId) -> Self {
        self.arrays.insert(a.to_string(), id);
        self
    }

    /// `self[qa ↦ a][qi ↦ i]`
    pub fn at_location(&self, a: ArrayId, i: i64) -> Env {
        let mut env = self.clone();
        env.arrays.insert(QA.to_string(), a);
        env.ints.insert(QI.to_string(), i);
        env
    }

    pub fn int(&self, x: &str) -> Result<i64, EvalError> {
        self.ints.get(x).copied().ok_or_else(|| EvalError::Unbound(x.to_string()))
    }

    pub fn array(&self, a: &str) -> Result<ArrayId, EvalError> {
        self.arrays.get(a).copied().ok_or_else(|| EvalError::UnboundArray(a.to_string()))
    }
}

/// Array contents by identity; the length of an array is its vector length.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Heap {
    pub arrays: BTreeMap<ArrayId, Vec<i64>>,
}

impl Heap {
    pub fn new() -> Self {
        Heap::default()
    }

    pub fn with_array(mut self, id: ArrayId, contents: Vec<i64>) -> Self {
        self.arrays.insert(id, contents);
        self
    }

    pub fn len(&self, id: ArrayId) -> i64 {
        self.arrays.get(&id).map_or(0, |v| v.len() as i64)
    }

    pub fn is_empty(&self) -> bool {
        self.arrays.is_empty()
    }

    pub fn get(&self, id: ArrayId, i: i64) -> Option<i64> {
        let v = self.arrays.get(&id)?;
        if i < 0 {
            return None;
        }
        v.get(i as usize).copied()
    }

    /// Overwrite an in-bounds element; `None` when out of bounds.
    pub fn set(&mut self, id: ArrayId, i: i64, value: i64) -> Option<()> {
        let slot = self.arrays.get_mut(&id)?.get_mut(usize::try_from(i).ok()?)?;
        *slot = value;
        Some(())
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound integer variable `{0}`")]
    Unbound(String),
    #[error("unbound array variable `{0}`")]
    UnboundArray(String),
    #[error("out-of-bounds lookup at index {index} of array #{array}")]
    OutOfBounds { array: ArrayId, index: i64 },
    #[error("pointwise maxima cannot be evaluated directly")]
    PointwiseMax,
    #[error("integer overflow")]
    Overflow,
}

pub fn eval_int(e: &IntExpr, env: &Env, heap: &Heap) -> Result<i64, EvalError> {
    Ok(match e {
        IntExpr::Const(n) => *n,
        IntExpr::Var(x) => env.int(x)?,
        IntExpr::Mul(n, a) => n.checked_mul(eval_int(a, env, heap)?).ok_or(EvalError::Overflow)?,
        IntExpr::Add(a, b) => {
            eval_int(a, env, heap)?.checked_add(eval_int(b, env, heap)?).ok_or(EvalError::Overflow)?
        }
        IntExpr::Sub(a, b) => {
            eval_int(a, env, heap)?.checked_sub(eval_int(b, env, heap)?).ok_or(EvalError::Overflow)?
        }
        IntExpr::Lookup(a, i) => {
            let id = env.array(a)?;
            let idx = eval_int(i, env, heap)?;
            heap.get(id, idx).ok_or(EvalError::OutOfBounds { array: id, index: idx })?
        }
        IntExpr::Length(a) => heap.len(env.array(a)?),
        IntExpr::Ite(c, a, b) => {
            if eval_bool(c, env, heap)? {
                eval_int(a, env, heap)?
            } else {
                eval_int(b, env, heap)?
            }
        }
        IntExpr::FloorDiv(a, n) => eval_int(a, env, heap)?.div_euclid(*n),
    })
}

pub fn eval_bool(b: &BoolExpr, env: &Env, heap: &Heap) -> Result<bool, EvalError> {
    Ok(match b {
        BoolExpr::True => true,
        BoolExpr::False => false,
        BoolExpr::Cmp(a, op, c) => op.holds(&eval_int(a, env, heap)?, &eval_int(c, env, heap)?),
        BoolExpr::Divides(n, e) => eval_int(e, env, heap)?.rem_euclid(*n) == 0,
        BoolExpr::NotDivides(n, e) => eval_int(e, env, heap)?.rem_euclid(*n) != 0,
        BoolExpr::ArrEq(a, c) => env.array(a)? == env.array(c)?,
        BoolExpr::And(v) => {
            for c in v {
                if !eval_bool(c, env, heap)? {
                    return Ok(false);
                }
            }
            true
        }
        BoolExpr::Or(v) => {
            for c in v {
                if eval_bool(c, env, heap)? {
                    return Ok(true);
                }
            }
            false
        }
        BoolExpr::Not(c) => !eval_bool(c, env, heap)?,
        BoolExpr::PermCmp(p, op, q) => op.holds(&eval_perm(p, env, heap)?, &eval_perm(q, env, heap)?),
    })
}

pub fn eval_perm(p: &PermExpr, env: &Env, heap: &Heap) -> Result<PermValue, EvalError> {
    Ok(match p {
        PermExpr::Frac(q) => PermValue { c: q.clone(), k: 0 },
        PermExpr::Rd => PermValue::rd(),
        PermExpr::Add(a, b) => eval_perm(a, env, heap)? + eval_perm(b, env, heap)?,
        PermExpr::Sub(a, b) => eval_perm(a, env, heap)? - eval_perm(b, env, heap)?,
        PermExpr::Min(a, b) => eval_perm(a, env, heap)?.min(eval_perm(b, env, heap)?),
        PermExpr::Max(a, b) => eval_perm(a, env, heap)?.max(eval_perm(b, env, heap)?),
        PermExpr::Ite(c, a, b) => {
            if eval_bool(c, env, heap)? {
                eval_perm(a, env, heap)?
            } else {
                eval_perm(b, env, heap)?
            }
        }
        PermExpr::PointwiseMax(..) => return Err(EvalError::PointwiseMax),
    })
}
