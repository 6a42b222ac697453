//! Elimination of pointwise maxima.
//!
//! A maximum over one variable is first reduced to simple maxima (see
//! [`to_simple`]). For a simple maximum the bound variable is then
//! replaced by a finite set of candidate points, computed from the
//! boundaries of the guard and the body, together with the periodic
//! behaviour of both towards −∞.

mod boundary;
mod leftinf;
mod simple;

pub use boundary::{mini_bool, minimax, minimax_pair, BoundarySet};
pub use leftinf::{leftinf_bool, leftinf_perm};
pub use simple::{check_simple, to_simple, SimpleMax, SimpleTree};

use crate::expr::{lcm, BoolExpr, FreeVars, IntExpr, NonLinear, PermExpr};
use crate::simplify::{is_nonneg, simplify_bool, simplify_perm};
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MaxElimError {
    #[error(transparent)]
    NonLinear(#[from] NonLinear),
    #[error("not a simple expression: {0}")]
    NotSimple(String),
    #[error("read `{read}` depends on the bound variable `{var}`")]
    LookupDependsOnVar { var: String, read: String },
    #[error("unexpected nested maximum: {0}")]
    Nested(String),
}

#[derive(Clone, Debug)]
pub struct ElimConfig {
    /// Filters larger than this many nodes are weakened to `true`.
    pub filter_budget: usize,
}

impl Default for ElimConfig {
    fn default() -> Self {
        ElimConfig { filter_budget: 64 }
    }
}

/// Result of eliminating all maxima from an expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eliminated<T> {
    pub expr: T,
    /// Bodies of maxima not structurally known to be non-negative. For
    /// these the result is the maximum of `max(body, 0)`.
    pub unverified: Vec<PermExpr>,
}

/// Replace every pointwise maximum in `p`, innermost first.
pub fn eliminate(p: &PermExpr, cfg: &ElimConfig) -> Result<Eliminated<PermExpr>, MaxElimError> {
    let mut unverified = Vec::new();
    let expr = perm(p, cfg, &mut unverified)?;
    Ok(Eliminated { expr, unverified })
}

/// [`eliminate`] for the permission comparisons inside a condition.
pub fn eliminate_bool(b: &BoolExpr, cfg: &ElimConfig) -> Result<Eliminated<BoolExpr>, MaxElimError> {
    let mut unverified = Vec::new();
    let expr = boolean(b, cfg, &mut unverified)?;
    Ok(Eliminated { expr, unverified })
}

fn boolean(b: &BoolExpr, cfg: &ElimConfig, flags: &mut Vec<PermExpr>) -> Result<BoolExpr, MaxElimError> {
    Ok(match b {
        BoolExpr::And(v) => BoolExpr::And(v.iter().map(|c| boolean(c, cfg, flags)).collect::<Result<_, _>>()?),
        BoolExpr::Or(v) => BoolExpr::Or(v.iter().map(|c| boolean(c, cfg, flags)).collect::<Result<_, _>>()?),
        BoolExpr::Not(c) => BoolExpr::not(boolean(c, cfg, flags)?),
        BoolExpr::PermCmp(p, op, q) => BoolExpr::perm_cmp(perm(p, cfg, flags)?, *op, perm(q, cfg, flags)?),
        _ => b.clone(),
    })
}

fn perm(p: &PermExpr, cfg: &ElimConfig, flags: &mut Vec<PermExpr>) -> Result<PermExpr, MaxElimError> {
    if !p.has_pointwise_max() {
        return Ok(p.clone());
    }
    Ok(match p {
        PermExpr::Frac(_) | PermExpr::Rd => p.clone(),
        PermExpr::Add(a, b) => perm(a, cfg, flags)? + perm(b, cfg, flags)?,
        PermExpr::Sub(a, b) => perm(a, cfg, flags)? - perm(b, cfg, flags)?,
        PermExpr::Min(a, b) => PermExpr::min(perm(a, cfg, flags)?, perm(b, cfg, flags)?),
        PermExpr::Max(a, b) => PermExpr::max(perm(a, cfg, flags)?, perm(b, cfg, flags)?),
        PermExpr::Ite(c, a, b) => PermExpr::ite(boolean(c, cfg, flags)?, perm(a, cfg, flags)?, perm(b, cfg, flags)?),
        PermExpr::PointwiseMax(vars, g, body) => {
            let mut body = perm(body, cfg, flags)?;
            let mut guard = boolean(g, cfg, flags)?;
            if !is_nonneg(&body) {
                flags.push(body.clone());
            }
            for x in vars.iter().rev() {
                let (inner, outer) = conjuncts(&simplify_bool(&guard)).into_iter().partition(|c| c.mentions(x));
                body = eliminate_var(x, &BoolExpr::and(inner), &body, cfg)?;
                guard = BoolExpr::and(outer);
            }
            simplify_perm(&PermExpr::leaf(guard, body))
        }
    })
}

fn conjuncts(b: &BoolExpr) -> Vec<BoolExpr> {
    match b {
        BoolExpr::And(v) => v.clone(),
        BoolExpr::True => Vec::new(),
        _ => vec![b.clone()],
    }
}

/// `max_{x | g}(max(p, 0))` without maxima, for a body free of maxima.
pub fn eliminate_var(x: &str, g: &BoolExpr, p: &PermExpr, cfg: &ElimConfig) -> Result<PermExpr, MaxElimError> {
    let tree = to_simple(x, g, p)?;
    let out = tree.fold(&mut |m| eliminate_simple(m, cfg))?;
    Ok(simplify_perm(&out))
}

/// Candidate-point expansion of one simple maximum.
pub fn eliminate_simple(m: &SimpleMax, cfg: &ElimConfig) -> Result<PermExpr, MaxElimError> {
    let (x, g, p) = (m.var.as_str(), &m.guard, &m.body);
    let t = minimax_pair(p, g, x, cfg.filter_budget)?;
    let mut terms = Vec::new();
    for (at, filter) in t.candidates() {
        let cond = BoolExpr::and(vec![filter.subst(x, &at), g.subst(x, &at)]);
        push_term(&mut terms, cond, p.subst(x, &at));
    }
    let (g_inf, d1) = leftinf_bool(g, x)?;
    let (p_inf, d2) = leftinf_perm(p, x)?;
    for d in 0..lcm(d1, d2) {
        let at = IntExpr::Const(d);
        push_term(&mut terms, g_inf.subst(x, &at), p_inf.subst(x, &at));
    }
    if !is_nonneg(p) {
        terms.push(PermExpr::zero());
    }
    let out = terms.into_iter().reduce(PermExpr::max).unwrap_or_else(PermExpr::zero);
    Ok(simplify_perm(&out))
}

fn push_term(terms: &mut Vec<PermExpr>, cond: BoolExpr, value: PermExpr) {
    let cond = simplify_bool(&cond);
    if cond.is_false() {
        return;
    }
    let term = simplify_perm(&PermExpr::leaf(cond, value));
    if !term.is_zero() && !terms.contains(&term) {
        terms.push(term);
    }
}
